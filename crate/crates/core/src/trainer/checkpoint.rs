//! Versioned binary model checkpoints.
//!
//! Layout: 8-byte magic, u32 version, length-prefixed JSON arch
//! descriptor, parameter arrays (name, bias flag, shape, little-endian f32
//! data), length-prefixed JSON provenance block, SHA-256 digest of all
//! preceding bytes. All integers little-endian.

use super::{ModelArch, Network, ParamArray, TrainProvenance, TrainedModel};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::Path;

const MAGIC: &[u8; 8] = b"CBCKPT01";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ProvenanceBlock {
    provenance: TrainProvenance,
    converged: bool,
    final_train_accuracy: f64,
    epoch_losses: Vec<f64>,
}

/// Serializes a trained model. Parameters are stored as f32 regardless of
/// the in-memory scalar type.
pub fn encode<T: Scalar>(model: &TrainedModel<T>) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend(VERSION.to_le_bytes());

    let arch_json = serde_json::to_vec(&model.network.arch).expect("arch serializes");
    out.extend((arch_json.len() as u32).to_le_bytes());
    out.extend(&arch_json);

    out.extend((model.network.params.len() as u32).to_le_bytes());
    for p in &model.network.params {
        out.extend((p.name.len() as u16).to_le_bytes());
        out.extend(p.name.as_bytes());
        out.push(p.is_bias as u8);
        out.push(p.shape.len() as u8);
        for &d in &p.shape {
            out.extend((d as u32).to_le_bytes());
        }
        out.extend((p.data.len() as u32).to_le_bytes());
        for &v in &p.data {
            out.extend((v.as_f64() as f32).to_le_bytes());
        }
    }

    let prov = ProvenanceBlock {
        provenance: model.provenance.clone(),
        converged: model.converged,
        final_train_accuracy: model.final_train_accuracy,
        epoch_losses: model.epoch_losses.clone(),
    };
    let prov_json = serde_json::to_vec(&prov).expect("provenance serializes");
    out.extend((prov_json.len() as u32).to_le_bytes());
    out.extend(&prov_json);

    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let slice = self
            .bytes
            .get(self.pos..self.pos + n)
            .ok_or_else(|| Error::parse(self.pos as u64, format!("truncated reading {what}")))?;
        self.pos += n;
        Ok(slice)
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        let b = self.take(2, what)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }
}

/// Decodes a checkpoint, verifying magic, version and digest.
pub fn decode<T: Scalar>(bytes: &[u8]) -> Result<TrainedModel<T>> {
    if bytes.len() < MAGIC.len() + 4 + 32 {
        return Err(Error::parse(bytes.len() as u64, "checkpoint too short"));
    }
    let (body, stored_digest) = bytes.split_at(bytes.len() - 32);
    let digest = Sha256::digest(body);
    if digest.as_slice() != stored_digest {
        return Err(Error::parse(
            body.len() as u64,
            "checkpoint digest mismatch (corrupt file)",
        ));
    }

    let mut r = Reader { bytes: body, pos: 0 };
    if r.take(8, "magic")? != MAGIC {
        return Err(Error::parse(0, "bad checkpoint magic"));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::parse(8, format!("unsupported checkpoint version {version}")));
    }

    let arch_len = r.u32("arch length")? as usize;
    let arch_at = r.pos as u64;
    let arch: ModelArch = serde_json::from_slice(r.take(arch_len, "arch json")?)
        .map_err(|e| Error::parse(arch_at, format!("bad arch descriptor: {e}")))?;

    let param_count = r.u32("param count")? as usize;
    let mut params = Vec::with_capacity(param_count);
    for _ in 0..param_count {
        let name_len = r.u16("param name length")? as usize;
        let name_at = r.pos as u64;
        let name = std::str::from_utf8(r.take(name_len, "param name")?)
            .map_err(|_| Error::parse(name_at, "param name not utf-8"))?
            .to_string();
        let is_bias = r.u8("bias flag")? != 0;
        let ndim = r.u8("ndim")? as usize;
        let mut shape = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            shape.push(r.u32("dim")? as usize);
        }
        let data_len = r.u32("data length")? as usize;
        if shape.iter().product::<usize>() != data_len {
            return Err(Error::parse(r.pos as u64, format!("param {name} shape/data mismatch")));
        }
        let raw = r.take(data_len * 4, "param data")?;
        let data: Vec<T> = raw
            .chunks_exact(4)
            .map(|c| T::from_f64_lossy(f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64))
            .collect();
        params.push(ParamArray { name, shape, data, is_bias });
    }

    let prov_len = r.u32("provenance length")? as usize;
    let prov_at = r.pos as u64;
    let block: ProvenanceBlock = serde_json::from_slice(r.take(prov_len, "provenance json")?)
        .map_err(|e| Error::parse(prov_at, format!("bad provenance block: {e}")))?;

    // structural consistency against the declared arch
    let skeleton = Network::<T>::zeros(&arch)?;
    if skeleton.params.len() != params.len()
        || skeleton
            .params
            .iter()
            .zip(&params)
            .any(|(a, b)| a.name != b.name || a.shape != b.shape)
    {
        return Err(Error::parse(arch_at, "parameters do not match arch descriptor"));
    }

    Ok(TrainedModel {
        network: Network { arch, params },
        provenance: block.provenance,
        converged: block.converged,
        final_train_accuracy: block.final_train_accuracy,
        epoch_losses: block.epoch_losses,
    })
}

pub fn save<T: Scalar>(model: &TrainedModel<T>, path: &Path) -> Result<()> {
    fs::write(path, encode(model))
        .map_err(|e| Error::io(format!("writing checkpoint {}", path.display()), e))
}

pub fn load<T: Scalar>(path: &Path) -> Result<TrainedModel<T>> {
    let bytes = fs::read(path)
        .map_err(|e| Error::io(format!("reading checkpoint {}", path.display()), e))?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_procshapes, ProcShapesSpec};
    use crate::trainer::{train, TrainConfig};
    use tempfile::tempdir;

    fn trained() -> TrainedModel<f32> {
        let (train_set, _) = generate_procshapes::<f32>(&ProcShapesSpec {
            classes: 2,
            per_class: 10,
            side: 24,
            seed: 2,
        })
        .unwrap();
        let config = TrainConfig {
            epochs: 2,
            batch_size: 8,
            lr_drop_epochs: vec![],
            seed: 4,
            ..Default::default()
        };
        train(&ModelArch::cnn((24, 24, 3), 2), &train_set, &config).unwrap()
    }

    #[test]
    fn round_trip_preserves_params_and_provenance() {
        let model = trained();
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save(&model, &path).unwrap();
        let back: TrainedModel<f32> = load(&path).unwrap();
        assert_eq!(back.param_digest(), model.param_digest());
        assert_eq!(back.converged, model.converged);
        assert_eq!(back.provenance.dataset_digest, model.provenance.dataset_digest);
        assert_eq!(back.final_train_accuracy, model.final_train_accuracy);
    }

    #[test]
    fn flipped_bit_is_detected() {
        let model = trained();
        let mut bytes = encode(&model);
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        assert!(matches!(decode::<f32>(&bytes), Err(Error::Parse { .. })));
    }

    #[test]
    fn truncation_is_detected() {
        let model = trained();
        let bytes = encode(&model);
        assert!(decode::<f32>(&bytes[..bytes.len() - 7]).is_err());
    }

    #[test]
    fn encode_is_deterministic() {
        let model = trained();
        assert_eq!(encode(&model), encode(&model));
    }
}
