//! Parameter storage, forward pass and analytic backward pass for the two
//! desk-scale architectures.
//!
//! Loss contract: `loss = mean cross-entropy over the batch +
//! (weight_decay / 2) * ||W||^2` where the penalty runs over weight
//! matrices only, never biases. `backward` returns the exact gradient of
//! that loss. Cross-entropy accumulation happens in f64 regardless of the
//! parameter scalar type so finite-difference checks are not drowned by
//! summation noise.

use super::arch::{ArchKind, ModelArch};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::rng::SeededRng;
use crate::scalar::Scalar;

/// One named parameter array. `is_bias` excludes it from weight decay.
#[derive(Debug, Clone)]
pub struct ParamArray<T: Scalar> {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<T>,
    pub is_bias: bool,
}

impl<T: Scalar> ParamArray<T> {
    fn new(name: &str, shape: Vec<usize>, is_bias: bool) -> Self {
        let len = shape.iter().product();
        ParamArray { name: name.to_string(), shape, data: vec![T::zero(); len], is_bias }
    }
}

/// A classifier: architecture plus parameter arrays in a fixed order.
#[derive(Debug, Clone)]
pub struct Network<T: Scalar> {
    pub arch: ModelArch,
    pub params: Vec<ParamArray<T>>,
}

/// Gradients in the same order and shapes as `Network::params`.
pub type Gradients<T> = Vec<Vec<T>>;

impl<T: Scalar> Network<T> {
    /// Zero-initialized parameter skeleton.
    pub fn zeros(arch: &ModelArch) -> Result<Self> {
        arch.validate()?;
        let (_, _, c) = arch.input;
        let params = match arch.kind {
            ArchKind::Mlp => vec![
                ParamArray::new("fc1.w", vec![arch.hidden, arch.flat_input()], false),
                ParamArray::new("fc1.b", vec![arch.hidden], true),
                ParamArray::new("fc2.w", vec![arch.classes, arch.hidden], false),
                ParamArray::new("fc2.b", vec![arch.classes], true),
            ],
            ArchKind::Cnn => {
                let (c1, c2) = arch.conv_channels;
                vec![
                    ParamArray::new("conv1.w", vec![c1, c, 3, 3], false),
                    ParamArray::new("conv1.b", vec![c1], true),
                    ParamArray::new("conv2.w", vec![c2, c1, 3, 3], false),
                    ParamArray::new("conv2.b", vec![c2], true),
                    ParamArray::new("fc.w", vec![arch.classes, arch.cnn_flat_features()], false),
                    ParamArray::new("fc.b", vec![arch.classes], true),
                ]
            }
        };
        Ok(Network { arch: *arch, params })
    }

    /// Kaiming-uniform fan-in init for weights (bound sqrt(6 / fan_in)),
    /// zero biases. One child stream per parameter array, in order.
    pub fn init(arch: &ModelArch, rng: &SeededRng) -> Result<Self> {
        let mut net = Network::zeros(arch)?;
        for (i, p) in net.params.iter_mut().enumerate() {
            if p.is_bias {
                continue;
            }
            // fan_in: product of all dims but the first (output) dim
            let fan_in: usize = p.shape[1..].iter().product();
            let bound = (6.0 / fan_in as f64).sqrt();
            let mut stream = rng.derive_str("init").derive(i as u64);
            for v in &mut p.data {
                *v = T::from_f64_lossy(stream.uniform(-bound, bound));
            }
        }
        Ok(net)
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(|p| p.data.len()).sum()
    }

    /// Squared L2 norm of the weight matrices (biases excluded), in f64.
    pub fn weight_sq_norm(&self) -> f64 {
        self.params
            .iter()
            .filter(|p| !p.is_bias)
            .flat_map(|p| p.data.iter())
            .map(|v| {
                let x = v.as_f64();
                x * x
            })
            .sum()
    }

    fn check_image(&self, image: &Image<T>) -> Result<()> {
        let (h, w, c) = self.arch.input;
        if (image.height(), image.width(), image.channels()) != (h, w, c) {
            return Err(Error::validation(format!(
                "image {}x{}x{} does not match arch input {h}x{w}x{c}",
                image.height(),
                image.width(),
                image.channels()
            )));
        }
        Ok(())
    }

    /// Logits for one image.
    pub fn forward_single(&self, image: &Image<T>) -> Result<Vec<T>> {
        self.check_image(image)?;
        Ok(match self.arch.kind {
            ArchKind::Mlp => self.mlp_forward(image).1,
            ArchKind::Cnn => self.cnn_forward(image).logits,
        })
    }

    /// Logits for a batch, one row per image.
    pub fn forward(&self, images: &[&Image<T>]) -> Result<Vec<Vec<T>>> {
        images.iter().map(|img| self.forward_single(img)).collect()
    }

    /// Accumulates the gradient of `mean CE + (wd/2)||W||^2` for a batch
    /// into fresh buffers and returns `(loss, gradients)`.
    pub fn batch_gradients(
        &self,
        images: &[&Image<T>],
        labels: &[usize],
        weight_decay: f64,
    ) -> Result<(f64, Gradients<T>)> {
        if images.is_empty() || images.len() != labels.len() {
            return Err(Error::validation("batch images/labels mismatch"));
        }
        let mut grads: Gradients<T> =
            self.params.iter().map(|p| vec![T::zero(); p.data.len()]).collect();
        let mut ce_sum = 0.0f64;
        for (img, &label) in images.iter().zip(labels) {
            if label >= self.arch.classes {
                return Err(Error::validation(format!("label {label} out of range")));
            }
            ce_sum += match self.arch.kind {
                ArchKind::Mlp => self.mlp_backward(img, label, &mut grads)?,
                ArchKind::Cnn => self.cnn_backward(img, label, &mut grads)?,
            };
        }
        let inv_b = T::from_f64_lossy(1.0 / images.len() as f64);
        let wd = T::from_f64_lossy(weight_decay);
        for (p, g) in self.params.iter().zip(grads.iter_mut()) {
            if p.is_bias || weight_decay == 0.0 {
                for v in g.iter_mut() {
                    *v = *v * inv_b;
                }
            } else {
                for (v, w) in g.iter_mut().zip(&p.data) {
                    *v = *v * inv_b + wd * *w;
                }
            }
        }
        let loss = ce_sum / images.len() as f64 + weight_decay / 2.0 * self.weight_sq_norm();
        Ok((loss, grads))
    }

    /// Batch loss only (used by finite-difference oracles).
    pub fn batch_loss(
        &self,
        images: &[&Image<T>],
        labels: &[usize],
        weight_decay: f64,
    ) -> Result<f64> {
        if images.is_empty() || images.len() != labels.len() {
            return Err(Error::validation("batch images/labels mismatch"));
        }
        let mut ce_sum = 0.0f64;
        for (img, &label) in images.iter().zip(labels) {
            let logits = self.forward_single(img)?;
            ce_sum += cross_entropy(&logits, label);
        }
        Ok(ce_sum / images.len() as f64 + weight_decay / 2.0 * self.weight_sq_norm())
    }

    // ---- mlp ----

    fn mlp_forward(&self, image: &Image<T>) -> (Vec<T>, Vec<T>) {
        let w1 = &self.params[0];
        let b1 = &self.params[1];
        let w2 = &self.params[2];
        let b2 = &self.params[3];
        let x = image.data();
        let hidden = self.arch.hidden;
        let in_dim = x.len();
        let mut h = Vec::with_capacity(hidden);
        for j in 0..hidden {
            let row = &w1.data[j * in_dim..(j + 1) * in_dim];
            let mut acc = b1.data[j];
            for (wv, xv) in row.iter().zip(x) {
                acc += *wv * *xv;
            }
            h.push(if acc > T::zero() { acc } else { T::zero() });
        }
        let classes = self.arch.classes;
        let mut logits = Vec::with_capacity(classes);
        for k in 0..classes {
            let row = &w2.data[k * hidden..(k + 1) * hidden];
            let mut acc = b2.data[k];
            for (wv, hv) in row.iter().zip(&h) {
                acc += *wv * *hv;
            }
            logits.push(acc);
        }
        (h, logits)
    }

    /// Returns the sample CE and accumulates its gradient into `grads`.
    fn mlp_backward(&self, image: &Image<T>, label: usize, grads: &mut Gradients<T>) -> Result<f64> {
        self.check_image(image)?;
        let (h, logits) = self.mlp_forward(image);
        let ce = cross_entropy(&logits, label);
        let dlogits = softmax_minus_onehot(&logits, label);

        let x = image.data();
        let hidden = self.arch.hidden;
        let in_dim = x.len();
        let w2 = &self.params[2];

        // fc2
        for (k, &dk) in dlogits.iter().enumerate() {
            let grow = &mut grads[2][k * hidden..(k + 1) * hidden];
            for (g, hv) in grow.iter_mut().zip(&h) {
                *g += dk * *hv;
            }
            grads[3][k] += dk;
        }
        // hidden grad through relu
        let mut dh = vec![T::zero(); hidden];
        for (k, &dk) in dlogits.iter().enumerate() {
            let row = &w2.data[k * hidden..(k + 1) * hidden];
            for (dhv, wv) in dh.iter_mut().zip(row) {
                *dhv += dk * *wv;
            }
        }
        for (dhv, hv) in dh.iter_mut().zip(&h) {
            if *hv <= T::zero() {
                *dhv = T::zero();
            }
        }
        // fc1
        for (j, &dj) in dh.iter().enumerate() {
            if dj == T::zero() {
                continue;
            }
            let grow = &mut grads[0][j * in_dim..(j + 1) * in_dim];
            for (g, xv) in grow.iter_mut().zip(x) {
                *g += dj * *xv;
            }
            grads[1][j] += dj;
        }
        Ok(ce)
    }

    // ---- cnn ----

    fn cnn_forward(&self, image: &Image<T>) -> CnnCache<T> {
        let (h, w, c_in) = self.arch.input;
        let (c1, c2) = self.arch.conv_channels;
        let input = hwc_to_chw_padded(image, h, w, c_in);
        let act1 = conv3x3_relu(&input, h, w, c_in, &self.params[0].data, &self.params[1].data, c1);
        let (h2, w2) = (h / 2, w / 2);
        let (pool1, idx1) = maxpool2(&act1, c1, h, w);
        let pad1 = pad_planes(&pool1, c1, h2, w2);
        let act2 = conv3x3_relu(&pad1, h2, w2, c1, &self.params[2].data, &self.params[3].data, c2);
        let (pool2, idx2) = maxpool2(&act2, c2, h2, w2);

        let flat = &pool2;
        let classes = self.arch.classes;
        let fcw = &self.params[4].data;
        let fcb = &self.params[5].data;
        let n_flat = flat.len();
        let mut logits = Vec::with_capacity(classes);
        for k in 0..classes {
            let row = &fcw[k * n_flat..(k + 1) * n_flat];
            let mut acc = fcb[k];
            for (wv, fv) in row.iter().zip(flat) {
                acc += *wv * *fv;
            }
            logits.push(acc);
        }
        drop(act2);
        CnnCache { input, act1, idx1, pad1, idx2, pool2, logits }
    }

    fn cnn_backward(&self, image: &Image<T>, label: usize, grads: &mut Gradients<T>) -> Result<f64> {
        self.check_image(image)?;
        let cache = self.cnn_forward(image);
        let ce = cross_entropy(&cache.logits, label);
        let dlogits = softmax_minus_onehot(&cache.logits, label);

        let (h, w, c_in) = self.arch.input;
        let (c1, c2) = self.arch.conv_channels;
        let (h2, w2) = (h / 2, w / 2);
        let n_flat = cache.pool2.len();

        // dense layer
        let fcw = &self.params[4].data;
        let mut dflat = vec![T::zero(); n_flat];
        for (k, &dk) in dlogits.iter().enumerate() {
            let grow = &mut grads[4][k * n_flat..(k + 1) * n_flat];
            for (g, fv) in grow.iter_mut().zip(&cache.pool2) {
                *g += dk * *fv;
            }
            grads[5][k] += dk;
            let row = &fcw[k * n_flat..(k + 1) * n_flat];
            for (dfv, wv) in dflat.iter_mut().zip(row) {
                *dfv += dk * *wv;
            }
        }

        // unpool2 + relu2 mask
        let mut dact2 = vec![T::zero(); c2 * h2 * w2];
        for (flat_i, &src) in cache.idx2.iter().enumerate() {
            if cache.pool2[flat_i] > T::zero() {
                dact2[src] = dflat[flat_i];
            }
        }

        // conv2 backward: weights, bias, and input gradient (into pool1)
        let mut dpool1 = vec![T::zero(); c1 * h2 * w2];
        {
            let (head, tail) = grads.split_at_mut(3);
            conv3x3_backward(
                &cache.pad1,
                &dact2,
                h2,
                w2,
                c1,
                c2,
                &self.params[2].data,
                &mut head[2],
                &mut tail[0],
                Some(&mut dpool1),
            );
        }

        // unpool1 + relu1 mask
        let mut dact1 = vec![T::zero(); c1 * h * w];
        for (flat_i, &src) in cache.idx1.iter().enumerate() {
            if cache.pool1_value(flat_i) > T::zero() {
                dact1[src] = dpool1[flat_i];
            }
        }

        // conv1 backward: no input gradient needed
        {
            let (head, tail) = grads.split_at_mut(1);
            conv3x3_backward(
                &cache.input,
                &dact1,
                h,
                w,
                c_in,
                c1,
                &self.params[0].data,
                &mut head[0],
                &mut tail[0],
                None,
            );
        }
        Ok(ce)
    }
}

struct CnnCache<T: Scalar> {
    /// zero-padded input planes, (h+2)x(w+2) per channel
    input: Vec<T>,
    /// post-relu conv1 activations, c1 x h x w
    act1: Vec<T>,
    /// argmax flat indices into act1 for each pool1 cell
    idx1: Vec<usize>,
    /// zero-padded pool1 planes
    pad1: Vec<T>,
    /// argmax flat indices into act2 for each pool2 cell
    idx2: Vec<usize>,
    /// pooled features, the flattened dense input
    pool2: Vec<T>,
    logits: Vec<T>,
}

impl<T: Scalar> CnnCache<T> {
    /// Value of pool1 at a flat index, recovered via the stored argmax.
    fn pool1_value(&self, flat_i: usize) -> T {
        self.act1[self.idx1[flat_i]]
    }
}

/// HWC image into zero-padded CHW planes, each (h+2) x (w+2).
fn hwc_to_chw_padded<T: Scalar>(image: &Image<T>, h: usize, w: usize, c: usize) -> Vec<T> {
    let (ph, pw) = (h + 2, w + 2);
    let mut out = vec![T::zero(); c * ph * pw];
    for ch in 0..c {
        for y in 0..h {
            for x in 0..w {
                out[ch * ph * pw + (y + 1) * pw + (x + 1)] = image.get(y, x, ch);
            }
        }
    }
    out
}

/// Zero-pads CHW planes by one pixel on each side.
fn pad_planes<T: Scalar>(planes: &[T], c: usize, h: usize, w: usize) -> Vec<T> {
    let (ph, pw) = (h + 2, w + 2);
    let mut out = vec![T::zero(); c * ph * pw];
    for ch in 0..c {
        for y in 0..h {
            for x in 0..w {
                out[ch * ph * pw + (y + 1) * pw + (x + 1)] = planes[ch * h * w + y * w + x];
            }
        }
    }
    out
}

/// 3x3 same-padding convolution over padded planes followed by ReLU.
/// Weights are laid out [out_c][in_c][ky][kx].
fn conv3x3_relu<T: Scalar>(
    padded: &[T],
    h: usize,
    w: usize,
    c_in: usize,
    weights: &[T],
    bias: &[T],
    c_out: usize,
) -> Vec<T> {
    let (ph, pw) = (h + 2, w + 2);
    let mut out = vec![T::zero(); c_out * h * w];
    for oc in 0..c_out {
        let w_oc = &weights[oc * c_in * 9..(oc + 1) * c_in * 9];
        let out_plane = &mut out[oc * h * w..(oc + 1) * h * w];
        for ic in 0..c_in {
            let w_ic = &w_oc[ic * 9..ic * 9 + 9];
            let in_plane = &padded[ic * ph * pw..(ic + 1) * ph * pw];
            for y in 0..h {
                let r0 = &in_plane[y * pw..y * pw + w + 2];
                let r1 = &in_plane[(y + 1) * pw..(y + 1) * pw + w + 2];
                let r2 = &in_plane[(y + 2) * pw..(y + 2) * pw + w + 2];
                let orow = &mut out_plane[y * w..(y + 1) * w];
                for x in 0..w {
                    let acc = w_ic[0] * r0[x]
                        + w_ic[1] * r0[x + 1]
                        + w_ic[2] * r0[x + 2]
                        + w_ic[3] * r1[x]
                        + w_ic[4] * r1[x + 1]
                        + w_ic[5] * r1[x + 2]
                        + w_ic[6] * r2[x]
                        + w_ic[7] * r2[x + 1]
                        + w_ic[8] * r2[x + 2];
                    orow[x] += acc;
                }
            }
        }
        for v in out_plane.iter_mut() {
            *v += bias[oc];
            if *v < T::zero() {
                *v = T::zero();
            }
        }
    }
    out
}

/// Accumulates conv weight/bias gradients and optionally the input
/// gradient from `dout` (gradient at the conv+relu output, already masked).
#[allow(clippy::too_many_arguments)]
fn conv3x3_backward<T: Scalar>(
    padded_in: &[T],
    dout: &[T],
    h: usize,
    w: usize,
    c_in: usize,
    c_out: usize,
    weights: &[T],
    dw: &mut [T],
    db: &mut [T],
    mut dinput: Option<&mut Vec<T>>,
) {
    let (ph, pw) = (h + 2, w + 2);
    let mut dpad: Option<Vec<T>> = dinput.as_ref().map(|_| vec![T::zero(); c_in * ph * pw]);
    for oc in 0..c_out {
        let dplane = &dout[oc * h * w..(oc + 1) * h * w];
        let mut bias_acc = T::zero();
        for &d in dplane {
            bias_acc += d;
        }
        db[oc] += bias_acc;
        for ic in 0..c_in {
            let in_plane = &padded_in[ic * ph * pw..(ic + 1) * ph * pw];
            let dw_ic = &mut dw[oc * c_in * 9 + ic * 9..oc * c_in * 9 + ic * 9 + 9];
            for ky in 0..3 {
                for kx in 0..3 {
                    let mut acc = T::zero();
                    for y in 0..h {
                        let irow = &in_plane[(y + ky) * pw + kx..(y + ky) * pw + kx + w];
                        let drow = &dplane[y * w..(y + 1) * w];
                        for (iv, dv) in irow.iter().zip(drow) {
                            acc += *iv * *dv;
                        }
                    }
                    dw_ic[ky * 3 + kx] += acc;
                }
            }
            if let Some(dpad_buf) = dpad.as_mut() {
                let w_ic = &weights[oc * c_in * 9 + ic * 9..oc * c_in * 9 + ic * 9 + 9];
                let dpad_plane = &mut dpad_buf[ic * ph * pw..(ic + 1) * ph * pw];
                for y in 0..h {
                    let drow = &dplane[y * w..(y + 1) * w];
                    for ky in 0..3 {
                        let prow = &mut dpad_plane[(y + ky) * pw..(y + ky) * pw + w + 2];
                        for (x, &dv) in drow.iter().enumerate() {
                            prow[x] += w_ic[ky * 3] * dv;
                            prow[x + 1] += w_ic[ky * 3 + 1] * dv;
                            prow[x + 2] += w_ic[ky * 3 + 2] * dv;
                        }
                    }
                }
            }
        }
    }
    if let (Some(dinput), Some(dpad_buf)) = (dinput.as_mut(), dpad) {
        for ic in 0..c_in {
            for y in 0..h {
                for x in 0..w {
                    dinput[ic * h * w + y * w + x] = dpad_buf[ic * ph * pw + (y + 1) * pw + (x + 1)];
                }
            }
        }
    }
}

/// 2x2 max pooling with stride 2 (floor semantics: trailing odd rows or
/// columns are dropped). Ties keep the first candidate in (ky, kx) scan
/// order. Returns pooled values and flat argmax indices into the input.
fn maxpool2<T: Scalar>(planes: &[T], c: usize, h: usize, w: usize) -> (Vec<T>, Vec<usize>) {
    let (h2, w2) = (h / 2, w / 2);
    let mut out = Vec::with_capacity(c * h2 * w2);
    let mut idx = Vec::with_capacity(c * h2 * w2);
    for ch in 0..c {
        let plane = &planes[ch * h * w..(ch + 1) * h * w];
        for y in 0..h2 {
            for x in 0..w2 {
                let mut best = plane[(2 * y) * w + 2 * x];
                let mut best_i = (2 * y) * w + 2 * x;
                for (ky, kx) in [(0, 1), (1, 0), (1, 1)] {
                    let i = (2 * y + ky) * w + 2 * x + kx;
                    if plane[i] > best {
                        best = plane[i];
                        best_i = i;
                    }
                }
                out.push(best);
                idx.push(ch * h * w + best_i);
            }
        }
    }
    (out, idx)
}

/// Log-sum-exp stabilized cross-entropy of one logit row, in f64.
pub fn cross_entropy<T: Scalar>(logits: &[T], label: usize) -> f64 {
    let max = logits
        .iter()
        .map(|v| v.as_f64())
        .fold(f64::NEG_INFINITY, f64::max);
    let lse: f64 = logits.iter().map(|v| (v.as_f64() - max).exp()).sum::<f64>().ln() + max;
    lse - logits[label].as_f64()
}

/// Mean cross-entropy over a batch of logit rows plus the weight-decay
/// penalty of `weight_sq_norm`.
pub fn loss_ce<T: Scalar>(
    logits: &[Vec<T>],
    labels: &[usize],
    weight_decay: f64,
    weight_sq_norm: f64,
) -> Result<f64> {
    if logits.is_empty() || logits.len() != labels.len() {
        return Err(Error::validation("logits/labels mismatch"));
    }
    let k = logits[0].len();
    for (row, &label) in logits.iter().zip(labels) {
        if row.len() != k {
            return Err(Error::validation("ragged logits"));
        }
        if label >= k {
            return Err(Error::validation(format!("label {label} out of range")));
        }
    }
    let ce: f64 = logits
        .iter()
        .zip(labels)
        .map(|(row, &label)| cross_entropy(row, label))
        .sum::<f64>()
        / logits.len() as f64;
    Ok(ce + weight_decay / 2.0 * weight_sq_norm)
}

/// softmax(logits) - onehot(label), computed in f64 and cast back.
fn softmax_minus_onehot<T: Scalar>(logits: &[T], label: usize) -> Vec<T> {
    let max = logits
        .iter()
        .map(|v| v.as_f64())
        .fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|v| (v.as_f64() - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter()
        .enumerate()
        .map(|(k, &e)| {
            let p = e / sum - if k == label { 1.0 } else { 0.0 };
            T::from_f64_lossy(p)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_image<T: Scalar>(rng: &mut SeededRng, h: usize, w: usize, c: usize) -> Image<T> {
        let data: Vec<T> = (0..h * w * c)
            .map(|_| T::from_f64_lossy(rng.uniform(0.0, 1.0)))
            .collect();
        Image::new(h, w, c, data).unwrap()
    }

    #[test]
    fn uniform_logits_give_ln_k() {
        let logits = vec![0.7f64; 10];
        assert!((cross_entropy(&logits, 3) - (10.0f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn confident_correct_logit_drives_ce_to_zero() {
        let mut logits = vec![0.0f64; 5];
        logits[2] = 50.0;
        assert!(cross_entropy(&logits, 2) < 1e-12);
    }

    #[test]
    fn zero_weight_decay_loss_is_plain_ce() {
        let logits = vec![vec![1.0f64, 2.0, 3.0], vec![0.0, 0.0, 0.0]];
        let plain = loss_ce(&logits, &[0, 1], 0.0, 123.0).unwrap();
        let manual =
            (cross_entropy(&logits[0], 0) + cross_entropy(&logits[1], 1)) / 2.0;
        assert!((plain - manual).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_validation_error() {
        let arch = ModelArch::mlp((8, 8, 3), 4);
        let net = Network::<f32>::init(&arch, &SeededRng::new(1)).unwrap();
        let mut rng = SeededRng::new(2);
        let bad = random_image::<f32>(&mut rng, 9, 8, 3);
        assert!(net.forward_single(&bad).is_err());
    }

    #[test]
    fn init_is_deterministic_and_biases_zero() {
        let arch = ModelArch::cnn((16, 16, 3), 4);
        let a = Network::<f32>::init(&arch, &SeededRng::new(5)).unwrap();
        let b = Network::<f32>::init(&arch, &SeededRng::new(5)).unwrap();
        for (pa, pb) in a.params.iter().zip(&b.params) {
            assert_eq!(pa.data, pb.data);
            if pa.is_bias {
                assert!(pa.data.iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn duplicated_sample_gradient_equals_single_sample() {
        let arch = ModelArch::mlp((8, 8, 1), 3);
        let net = Network::<f64>::init(&arch, &SeededRng::new(7)).unwrap();
        let mut rng = SeededRng::new(8);
        let img = random_image::<f64>(&mut rng, 8, 8, 1);
        let (l1, g1) = net.batch_gradients(&[&img], &[2], 1e-4).unwrap();
        let (l2, g2) = net.batch_gradients(&[&img, &img], &[2, 2], 1e-4).unwrap();
        assert!((l1 - l2).abs() < 1e-12);
        for (a, b) in g1.iter().zip(&g2) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    /// Central finite differences over every parameter of a small model.
    fn finite_diff_check(arch: &ModelArch, tol: f64) {
        let net = Network::<f64>::init(arch, &SeededRng::new(11)).unwrap();
        let mut rng = SeededRng::new(12);
        let (h, w, c) = arch.input;
        let images: Vec<Image<f64>> = (0..4).map(|_| random_image(&mut rng, h, w, c)).collect();
        let refs: Vec<&Image<f64>> = images.iter().collect();
        let labels = [0usize, 1, 2, 1];
        let wd = 1e-4;
        let (_, analytic) = net.batch_gradients(&refs, &labels, wd).unwrap();

        let eps = 1e-5;
        let mut num_sq = 0.0;
        let mut diff_sq = 0.0;
        let mut ana_sq = 0.0;
        let mut probe = net.clone();
        for (pi, p) in net.params.iter().enumerate() {
            // probe a deterministic subset to keep runtime sane
            let stride = (p.data.len() / 25).max(1);
            for i in (0..p.data.len()).step_by(stride) {
                let orig = p.data[i];
                probe.params[pi].data[i] = orig + eps;
                let up = probe.batch_loss(&refs, &labels, wd).unwrap();
                probe.params[pi].data[i] = orig - eps;
                let down = probe.batch_loss(&refs, &labels, wd).unwrap();
                probe.params[pi].data[i] = orig;
                let numeric = (up - down) / (2.0 * eps);
                let a = analytic[pi][i];
                diff_sq += (numeric - a) * (numeric - a);
                num_sq += numeric * numeric;
                ana_sq += a * a;
            }
        }
        let rel = diff_sq.sqrt() / num_sq.sqrt().max(ana_sq.sqrt()).max(1e-12);
        assert!(rel < tol, "relative gradient error {rel}");
    }

    #[test]
    fn mlp_gradients_match_finite_differences() {
        finite_diff_check(&ModelArch::mlp((8, 8, 3), 4), 1e-6);
    }

    #[test]
    fn cnn_gradients_match_finite_differences() {
        finite_diff_check(&ModelArch::cnn((8, 8, 3), 4), 1e-6);
    }
}
