//! IDX file loading (the MNIST container format). Big-endian header:
//! magic, then one u32 per dimension. Images use magic 0x00000803
//! (count, rows, cols), labels 0x00000801 (count). Payload is raw u8.

use super::{hex, Dataset, Split};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::scalar::Scalar;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::Path;

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

fn read_u32(bytes: &[u8], offset: usize, what: &str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::parse(offset as u64, format!("truncated reading {what}")))
}

/// Loads an IDX image/label file pair into a single-channel dataset with
/// pixels scaled to `[0, 1]` (byte 255 maps to exactly 1.0). The split is
/// recorded as `Train`; relabel with [`Dataset::new`] composition if the
/// files hold a test split.
pub fn load_idx<T: Scalar>(images_path: &Path, labels_path: &Path) -> Result<Dataset<T>> {
    let img_bytes = fs::read(images_path)
        .map_err(|e| Error::io(format!("reading {}", images_path.display()), e))?;
    let lbl_bytes = fs::read(labels_path)
        .map_err(|e| Error::io(format!("reading {}", labels_path.display()), e))?;

    let magic = read_u32(&img_bytes, 0, "image magic")?;
    if magic != IMAGES_MAGIC {
        return Err(Error::parse(0, format!("image magic {magic:#010x} != {IMAGES_MAGIC:#010x}")));
    }
    let count = read_u32(&img_bytes, 4, "image count")? as usize;
    let rows = read_u32(&img_bytes, 8, "rows")? as usize;
    let cols = read_u32(&img_bytes, 12, "cols")? as usize;
    let expected = count
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .ok_or_else(|| Error::parse(4, "image dimensions overflow"))?;
    let payload = &img_bytes[16.min(img_bytes.len())..];
    if payload.len() < expected {
        return Err(Error::parse(
            img_bytes.len() as u64,
            format!("truncated image payload: have {} of {expected} bytes", payload.len()),
        ));
    }

    let magic = read_u32(&lbl_bytes, 0, "label magic")?;
    if magic != LABELS_MAGIC {
        return Err(Error::parse(0, format!("label magic {magic:#010x} != {LABELS_MAGIC:#010x}")));
    }
    let lbl_count = read_u32(&lbl_bytes, 4, "label count")? as usize;
    if lbl_count != count {
        return Err(Error::parse(4, format!("{count} images but {lbl_count} labels")));
    }
    let lbl_payload = &lbl_bytes[8.min(lbl_bytes.len())..];
    if lbl_payload.len() < count {
        return Err(Error::parse(
            lbl_bytes.len() as u64,
            format!("truncated label payload: have {} of {count} bytes", lbl_payload.len()),
        ));
    }

    let scale = T::from_f64_lossy(1.0 / 255.0);
    let mut images = Vec::with_capacity(count);
    for i in 0..count {
        let start = i * rows * cols;
        let data: Vec<T> = payload[start..start + rows * cols]
            .iter()
            .map(|&b| T::from_f64_lossy(b as f64) * scale)
            .collect();
        images.push(Image::new(rows, cols, 1, data)?);
    }
    let labels: Vec<usize> = lbl_payload[..count].iter().map(|&b| b as usize).collect();
    let num_classes = labels.iter().copied().max().map_or(1, |m| m + 1);

    let mut hasher = Sha256::new();
    hasher.update(&img_bytes);
    hasher.update(&lbl_bytes);
    let digest = hex(&hasher.finalize());

    Dataset::new(
        images,
        labels,
        num_classes,
        Split::Train,
        vec![format!(
            "idx(images={}, labels={}, sha256={digest})",
            images_path.display(),
            labels_path.display()
        )],
    )
}
