//! Image tensor type and PPM file IO.
//!
//! Pixels are stored row-major as `height * width * channels` scalars in
//! `[0, 1]`. Every public transform in this crate clamps back into that
//! range as its final step; quantization to 8 bits happens only at file IO.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::fs;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct Image<T: Scalar> {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<T>,
}

impl<T: Scalar> Image<T> {
    /// Builds an image from raw row-major data. Channels must be 1 or 3 and
    /// the data length must match the dimensions.
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<T>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::validation(format!(
                "channels must be 1 or 3, got {channels}"
            )));
        }
        if height == 0 || width == 0 {
            return Err(Error::validation("image dimensions must be nonzero"));
        }
        let expected = height * width * channels;
        if data.len() != expected {
            return Err(Error::validation(format!(
                "data length {} != {}x{}x{} = {expected}",
                data.len(),
                height,
                width,
                channels
            )));
        }
        Ok(Image { height, width, channels, data })
    }

    pub fn zeros(height: usize, width: usize, channels: usize) -> Self {
        Image::new(height, width, channels, vec![T::zero(); height * width * channels])
            .expect("valid dimensions")
    }

    pub fn constant(height: usize, width: usize, channels: usize, value: T) -> Self {
        Image::new(height, width, channels, vec![value; height * width * channels])
            .expect("valid dimensions")
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn min_side(&self) -> usize {
        self.height.min(self.width)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn idx(&self, y: usize, x: usize, c: usize) -> usize {
        (y * self.width + x) * self.channels + c
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> T {
        self.data[self.idx(y, x, c)]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, c: usize, v: T) {
        let i = self.idx(y, x, c);
        self.data[i] = v;
    }

    /// Bilinear sample at fractional coordinates with edge clamping.
    pub fn sample_bilinear(&self, y: f64, x: f64, c: usize) -> T {
        let clamp = |v: f64, hi: usize| v.max(0.0).min(hi as f64 - 1.0);
        let y = clamp(y, self.height);
        let x = clamp(x, self.width);
        let y0 = y.floor() as usize;
        let x0 = x.floor() as usize;
        let y1 = (y0 + 1).min(self.height - 1);
        let x1 = (x0 + 1).min(self.width - 1);
        let fy = T::from_f64_lossy(y - y0 as f64);
        let fx = T::from_f64_lossy(x - x0 as f64);
        let one = T::one();
        let v00 = self.get(y0, x0, c);
        let v01 = self.get(y0, x1, c);
        let v10 = self.get(y1, x0, c);
        let v11 = self.get(y1, x1, c);
        let top = v00 * (one - fx) + v01 * fx;
        let bot = v10 * (one - fx) + v11 * fx;
        top * (one - fy) + bot * fy
    }

    /// Per-channel mean.
    pub fn channel_mean(&self, c: usize) -> T {
        let n = self.height * self.width;
        let mut sum = T::zero();
        for i in 0..n {
            sum += self.data[i * self.channels + c];
        }
        sum / T::from_f64_lossy(n as f64)
    }

    /// Grayscale to RGB by channel replication; RGB passes through.
    pub fn to_rgb(&self) -> Image<T> {
        if self.channels == 3 {
            return self.clone();
        }
        let mut data = Vec::with_capacity(self.height * self.width * 3);
        for &v in &self.data {
            data.extend_from_slice(&[v, v, v]);
        }
        Image::new(self.height, self.width, 3, data).expect("valid dimensions")
    }

    /// Clamps every pixel in place to `[0, 1]`. Idempotent.
    pub fn clamp01_in_place(&mut self) {
        let zero = T::zero();
        let one = T::one();
        for v in &mut self.data {
            if *v < zero {
                *v = zero;
            } else if *v > one {
                *v = one;
            }
        }
    }
}

/// `min(1, max(0, v))` per pixel; the final step of every transform.
pub fn clamp01<T: Scalar>(mut image: Image<T>) -> Image<T> {
    image.clamp01_in_place();
    image
}

fn quantize_u8<T: Scalar>(v: T) -> u8 {
    let x = v.as_f64().clamp(0.0, 1.0) * 255.0;
    x.round() as u8
}

/// Writes binary PPM (P6, maxval 255). Grayscale images are written with
/// the channel replicated. Quantization error per pixel is at most 1/510.
pub fn write_ppm<T: Scalar>(image: &Image<T>, path: &Path) -> Result<()> {
    let rgb = image.to_rgb();
    let mut bytes = Vec::with_capacity(32 + rgb.data().len());
    write!(bytes, "P6\n{} {}\n255\n", rgb.width(), rgb.height())
        .expect("in-memory write cannot fail");
    bytes.extend(rgb.data().iter().map(|&v| quantize_u8(v)));
    fs::write(path, &bytes).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Reads a binary PPM (P6, maxval 255) into a 3-channel image with pixels
/// scaled to `[0, 1]`.
pub fn read_ppm<T: Scalar>(path: &Path) -> Result<Image<T>> {
    let bytes = fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    parse_ppm(&bytes)
}

pub fn parse_ppm<T: Scalar>(bytes: &[u8]) -> Result<Image<T>> {
    let mut pos = 0usize;

    fn skip_ws(bytes: &[u8], pos: &mut usize) {
        // PPM comments run from '#' to end of line and count as whitespace.
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            } else {
                return;
            }
        }
    }

    fn read_token<'a>(bytes: &'a [u8], pos: &mut usize) -> &'a [u8] {
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        &bytes[start..*pos]
    }

    fn read_uint(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
        skip_ws(bytes, pos);
        let at = *pos as u64;
        let tok = read_token(bytes, pos);
        if tok.is_empty() {
            return Err(Error::parse(at, format!("missing {what}")));
        }
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| Error::parse(at, format!("invalid {what}")))
    }

    skip_ws(bytes, &mut pos);
    let magic_at = pos as u64;
    let magic = read_token(bytes, &mut pos);
    if magic != b"P6" {
        return Err(Error::parse(magic_at, "expected PPM magic \"P6\""));
    }
    let width = read_uint(bytes, &mut pos, "width")?;
    let height = read_uint(bytes, &mut pos, "height")?;
    let maxval = read_uint(bytes, &mut pos, "maxval")?;
    if maxval != 255 {
        return Err(Error::parse(pos as u64, format!("unsupported maxval {maxval}")));
    }
    if pos >= bytes.len() {
        return Err(Error::parse(pos as u64, "missing payload"));
    }
    pos += 1; // single whitespace byte after maxval
    let expected = height
        .checked_mul(width)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| Error::parse(magic_at, "dimensions overflow"))?;
    let payload = &bytes[pos..];
    if payload.len() < expected {
        return Err(Error::parse(
            (pos + payload.len()) as u64,
            format!("truncated payload: have {} of {expected} bytes", payload.len()),
        ));
    }
    let scale = T::from_f64_lossy(1.0 / 255.0);
    let data: Vec<T> = payload[..expected]
        .iter()
        .map(|&b| T::from_f64_lossy(b as f64) * scale)
        .collect();
    Image::new(height, width, 3, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use tempfile::tempdir;

    type Img = Image<f64>;

    #[test]
    fn clamp01_identity_on_midrange() {
        let img = Img::constant(4, 4, 3, 0.5);
        assert_eq!(clamp01(img.clone()), img);
    }

    #[test]
    fn clamp01_pins_out_of_range_values() {
        let mut img = Img::zeros(1, 2, 1);
        img.data_mut()[0] = 1.7;
        img.data_mut()[1] = -0.2;
        let out = clamp01(img);
        assert_eq!(out.data(), &[1.0, 0.0]);
    }

    #[test]
    fn clamp01_idempotent_on_random_data() {
        let mut rng = SeededRng::new(3);
        let data: Vec<f64> = (0..48).map(|_| rng.uniform(-2.0, 2.0)).collect();
        let img = Img::new(4, 4, 3, data).unwrap();
        let once = clamp01(img);
        let twice = clamp01(once.clone());
        assert_eq!(once, twice);
    }

    #[test]
    fn zero_image_writes_zero_payload() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("black.ppm");
        write_ppm(&Img::zeros(2, 2, 3), &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let header_end = bytes.len() - 12;
        assert_eq!(&bytes[..header_end], b"P6\n2 2\n255\n");
        assert!(bytes[header_end..].iter().all(|&b| b == 0));
    }

    #[test]
    fn ppm_round_trip_quantization_bound() {
        let mut rng = SeededRng::new(17);
        let data: Vec<f64> = (0..5 * 7 * 3).map(|_| rng.uniform(0.0, 1.0)).collect();
        let img = Img::new(5, 7, 3, data).unwrap();
        let dir = tempdir().unwrap();
        let path = dir.path().join("rt.ppm");
        write_ppm(&img, &path).unwrap();
        let back: Img = read_ppm(&path).unwrap();
        let max_diff = img
            .data()
            .iter()
            .zip(back.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max_diff <= 1.0 / 510.0 + 1e-12, "max diff {max_diff}");
    }

    #[test]
    fn grayscale_written_as_replicated_rgb() {
        let mut img = Image::<f64>::zeros(1, 2, 1);
        img.data_mut()[1] = 1.0;
        let dir = tempdir().unwrap();
        let path = dir.path().join("gray.ppm");
        write_ppm(&img, &path).unwrap();
        let back: Img = read_ppm(&path).unwrap();
        assert_eq!(back.channels(), 3);
        assert_eq!(back.data(), &[0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn truncated_payload_is_an_error_not_a_partial_image() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("trunc.ppm");
        write_ppm(&Img::constant(4, 4, 3, 0.5), &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 5]).unwrap();
        match read_ppm::<f64>(&path) {
            Err(Error::Parse { offset, .. }) => assert!(offset > 0),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn header_only_file_is_a_parse_error() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("hdr.ppm");
        std::fs::write(&path, b"P6\n2 2\n255\n").unwrap();
        assert!(matches!(read_ppm::<f64>(&path), Err(Error::Parse { .. })));
    }

    #[test]
    fn bad_magic_is_a_parse_error_at_offset_zero() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.ppm");
        std::fs::write(&path, b"P5\n2 2\n255\n0000").unwrap();
        match read_ppm::<f64>(&path) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bilinear_sample_interpolates() {
        let mut img = Img::zeros(2, 2, 1);
        img.set(0, 1, 0, 1.0);
        img.set(1, 0, 0, 1.0);
        // center of the 2x2 grid mixes all four corners equally
        assert!((img.sample_bilinear(0.5, 0.5, 0) - 0.5).abs() < 1e-12);
    }
}
