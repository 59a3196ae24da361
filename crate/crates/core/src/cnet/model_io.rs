//! Binary model files.
//!
//! Layout, little-endian throughout:
//!
//! ```text
//! magic     4 bytes  "CNET"
//! version   u8       FORMAT_VERSION
//! height    u8       0 = normalized, 1 = raw
//! seed      u64
//! layers    u32      always 3
//! per layer:
//!   inputs  u32
//!   outputs u32
//!   weights f64 × outputs·inputs, row-major
//!   biases  f64 × outputs
//! ```

use std::path::Path;

use super::encode::{HeightEncoding, INPUT_DIM};
use super::network::{CNet, Dense, OUTPUT_DIM};
use super::ModelError;
use crate::scalar::Scalar;

pub const MAGIC: [u8; 4] = *b"CNET";
pub const FORMAT_VERSION: u8 = 1;

pub fn save_model<T: Scalar>(net: &CNet<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + net.param_count() * 8);
    out.extend_from_slice(&MAGIC);
    out.push(FORMAT_VERSION);
    out.push(net.height_encoding.to_byte());
    out.extend_from_slice(&net.seed.to_le_bytes());
    out.extend_from_slice(&(net.layers.len() as u32).to_le_bytes());
    for layer in &net.layers {
        out.extend_from_slice(&(layer.inputs as u32).to_le_bytes());
        out.extend_from_slice(&(layer.outputs as u32).to_le_bytes());
        for v in layer.weights.iter().chain(&layer.biases) {
            out.extend_from_slice(&v.to_f64_lossy().to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelError> {
        if self.bytes.len() < n {
            return Err(ModelError::CorruptModel("unexpected end of file".into()));
        }
        let (head, rest) = self.bytes.split_at(n);
        self.bytes = rest;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, ModelError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, ModelError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, ModelError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, ModelError> {
        let raw = self.take(
            n.checked_mul(8)
                .ok_or_else(|| ModelError::CorruptModel("size overflow".into()))?,
        )?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

pub fn load_model<T: Scalar>(bytes: &[u8]) -> Result<CNet<T>, ModelError> {
    let mut r = Reader { bytes };
    if r.take(4)? != MAGIC {
        return Err(ModelError::CorruptModel("bad magic".into()));
    }
    let version = r.u8()?;
    if version != FORMAT_VERSION {
        return Err(ModelError::FormatVersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let height =
        HeightEncoding::from_byte(r.u8()?).ok_or_else(|| ModelError::CorruptModel("unknown height encoding".into()))?;
    let seed = r.u64()?;
    if r.u32()? != 3 {
        return Err(ModelError::CorruptModel("expected 3 layers".into()));
    }
    let mut layers = Vec::with_capacity(3);
    let mut expected_inputs = INPUT_DIM;
    for l in 0..3 {
        let inputs = r.u32()? as usize;
        let outputs = r.u32()? as usize;
        if inputs != expected_inputs || outputs == 0 || (l == 2 && outputs != OUTPUT_DIM) {
            return Err(ModelError::CorruptModel(format!(
                "layer {l} has shape {inputs}x{outputs}"
            )));
        }
        let weights = r.f64s(inputs * outputs)?;
        let biases = r.f64s(outputs)?;
        layers.push(Dense {
            inputs,
            outputs,
            weights: weights.into_iter().map(T::from_f64_lossy).collect(),
            biases: biases.into_iter().map(T::from_f64_lossy).collect(),
        });
        expected_inputs = outputs;
    }
    if !r.bytes.is_empty() {
        return Err(ModelError::CorruptModel("trailing bytes".into()));
    }
    let layers: [Dense<T>; 3] = layers.try_into().expect("three layers");
    Ok(CNet::from_layers(layers, height, seed))
}

pub fn save_model_file<T: Scalar>(net: &CNet<T>, path: &Path) -> Result<(), ModelError> {
    std::fs::write(path, save_model(net))?;
    Ok(())
}

pub fn load_model_file<T: Scalar>(path: &Path) -> Result<CNet<T>, ModelError> {
    load_model(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnet::encode::encode_input;
    use crate::cnet::network::CNetConfig;
    use crate::level::{SurroundingInfo, TileType};

    fn probes() -> Vec<SurroundingInfo> {
        (0..20u8)
            .map(|i| SurroundingInfo {
                center_height: i as usize % 14,
                neighbors: std::array::from_fn(|k| {
                    TileType::concrete((i + k as u8 * 3) % 12).unwrap_or(TileType::OUTER)
                }),
            })
            .collect()
    }

    #[test]
    fn round_trip_preserves_outputs() {
        let net = CNet::<f64>::new(CNetConfig {
            seed: 12,
            ..Default::default()
        });
        let back: CNet<f64> = load_model(&save_model(&net)).unwrap();
        assert_eq!(net, back);
        for s in probes() {
            let x = encode_input(&s, 14);
            assert_eq!(net.forward(&x), back.forward(&x));
        }
    }

    #[test]
    fn f32_round_trip_is_exact() {
        let net = CNet::<f32>::new(CNetConfig {
            seed: 2,
            height_encoding: HeightEncoding::Raw,
            ..Default::default()
        });
        let back: CNet<f32> = load_model(&save_model(&net)).unwrap();
        assert_eq!(net, back);
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let bytes = save_model(&CNet::<f64>::new(CNetConfig::default()));
        for cut in [0, 3, 10, bytes.len() / 2, bytes.len() - 1] {
            assert!(matches!(
                load_model::<f64>(&bytes[..cut]),
                Err(ModelError::CorruptModel(_))
            ));
        }
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(load_model::<f64>(&extra), Err(ModelError::CorruptModel(_))));
    }

    #[test]
    fn version_mismatch_detected() {
        let mut bytes = save_model(&CNet::<f64>::new(CNetConfig::default()));
        bytes[4] = FORMAT_VERSION + 1;
        assert!(matches!(
            load_model::<f64>(&bytes),
            Err(ModelError::FormatVersionMismatch { found: 2, expected: 1 })
        ));
    }
}
