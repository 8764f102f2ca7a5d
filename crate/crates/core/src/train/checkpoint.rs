use std::path::Path;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine as _;
use serde::{Deserialize, Serialize};

use super::TrainConfig;
use crate::error::{Error, Result};
use crate::net::{ModelConfig, ModelParams};
use crate::spectral::WaveletConfig;

pub const CHECKPOINT_VERSION: u32 = 1;

/// Per-epoch training record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub valid_loss: Option<f64>,
    /// Masked validation accuracy per hop; `None` where every graph skipped the hop.
    pub valid_hop_accuracy: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    /// Epoch whose parameters were kept (0 = initialization).
    pub epoch: usize,
    pub train_config: Option<TrainConfig>,
    pub history: Vec<EpochRecord>,
}

/// A trained model with everything needed to rebuild its inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: ModelConfig,
    pub wavelet: WaveletConfig,
    pub params: ModelParams,
    pub meta: TrainingMeta,
}

impl Checkpoint {
    /// Short stable identifier derived from the parameter values.
    pub fn id(&self) -> String {
        format!("{:016x}", self.params.fingerprint())
    }
}

#[derive(Serialize, Deserialize)]
struct BlockRecord {
    name: String,
    rows: usize,
    cols: usize,
    /// Little-endian f64 values, base64.
    data: String,
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format_version: u32,
    model: ModelConfig,
    wavelet: WaveletConfig,
    init_seed: u64,
    params: Vec<BlockRecord>,
    meta: TrainingMeta,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

pub fn checkpoint_to_string(c: &Checkpoint) -> String {
    let params = c
        .params
        .layout
        .blocks()
        .into_iter()
        .map(|b| {
            let bytes: Vec<u8> = c.params.values[b.range()].iter().flat_map(|v| v.to_le_bytes()).collect();
            BlockRecord { name: b.name.clone(), rows: b.rows, cols: b.cols, data: B64.encode(bytes) }
        })
        .collect();
    let file = CheckpointFile {
        format_version: CHECKPOINT_VERSION,
        model: c.model.clone(),
        wavelet: c.wavelet.clone(),
        init_seed: c.params.init_seed,
        params,
        meta: c.meta.clone(),
    };
    serde_json::to_string_pretty(&file).expect("checkpoint serializes")
}

pub fn checkpoint_from_str(text: &str) -> Result<Checkpoint> {
    let parse_err = |e: serde_json::Error| Error::Parse { line: e.line(), msg: format!("checkpoint: {e}") };
    let probe: VersionProbe = serde_json::from_str(text).map_err(parse_err)?;
    if probe.format_version != CHECKPOINT_VERSION {
        return Err(Error::VersionMismatch { found: probe.format_version, expected: CHECKPOINT_VERSION });
    }
    let file: CheckpointFile = serde_json::from_str(text).map_err(parse_err)?;
    file.model.validate()?;
    let layout = crate::net::ParamLayout::new(&file.model);
    let blocks = layout.blocks();
    if blocks.len() != file.params.len() {
        return Err(Error::Corrupt(format!(
            "expected {} parameter blocks, found {}",
            blocks.len(),
            file.params.len()
        )));
    }
    let mut values = Vec::with_capacity(layout.total);
    for (want, rec) in blocks.iter().zip(&file.params) {
        if want.name != rec.name || want.rows != rec.rows || want.cols != rec.cols {
            return Err(Error::Corrupt(format!(
                "block `{}` ({}x{}) where `{}` ({}x{}) was expected",
                rec.name, rec.rows, rec.cols, want.name, want.rows, want.cols
            )));
        }
        let bytes = B64
            .decode(&rec.data)
            .map_err(|e| Error::Corrupt(format!("block `{}`: {e}", rec.name)))?;
        if bytes.len() != want.len() * 8 {
            return Err(Error::Corrupt(format!(
                "block `{}` holds {} bytes, expected {}",
                rec.name,
                bytes.len(),
                want.len() * 8
            )));
        }
        values.extend(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))));
    }
    let params = ModelParams::from_values(&file.model, values, file.init_seed)
        .map_err(|e| Error::Corrupt(e.to_string()))?;
    Ok(Checkpoint { model: file.model, wavelet: file.wavelet, params, meta: file.meta })
}

pub fn save_checkpoint(c: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, checkpoint_to_string(c))?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    checkpoint_from_str(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        let model = ModelConfig { hops: vec![1, 2], ..ModelConfig::default() };
        let params = ModelParams::init(&model, 9).unwrap();
        Checkpoint {
            model,
            wavelet: WaveletConfig::default(),
            params,
            meta: TrainingMeta {
                seed: 9,
                epoch: 1,
                train_config: Some(TrainConfig::default()),
                history: vec![EpochRecord {
                    epoch: 1,
                    train_loss: 0.1 + 0.2,
                    valid_loss: None,
                    valid_hop_accuracy: vec![Some(0.5), None],
                }],
            },
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let c = sample();
        let back = checkpoint_from_str(&checkpoint_to_string(&c)).unwrap();
        assert_eq!(back, c);
        assert!(back.params.values.iter().zip(&c.params.values).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn truncated_is_parse_error() {
        let text = checkpoint_to_string(&sample());
        let cut = &text[..text.len() / 2];
        assert!(matches!(checkpoint_from_str(cut), Err(Error::Parse { .. })));
    }

    #[test]
    fn version_mismatch_names_both() {
        let text = checkpoint_to_string(&sample()).replacen("\"format_version\": 1", "\"format_version\": 2", 1);
        let err = checkpoint_from_str(&text).unwrap_err();
        assert!(matches!(err, Error::VersionMismatch { found: 2, expected: 1 }));
        let msg = err.to_string();
        assert!(msg.contains('2') && msg.contains('1'), "{msg}");
    }

    #[test]
    fn corrupt_base64_is_reported() {
        let c = sample();
        let text = checkpoint_to_string(&c);
        let first = B64.encode(
            c.params.values[c.params.layout.blocks()[0].range()]
                .iter()
                .flat_map(|v| v.to_le_bytes())
                .collect::<Vec<u8>>(),
        );
        let bad = text.replacen(&first, "!!!not-base64!!!", 1);
        assert!(matches!(checkpoint_from_str(&bad), Err(Error::Corrupt(_))));
    }
}
