//! XPRS model checkpoints.
//!
//! Layout (little-endian): `b"XPRS"`, `u8` version (1), `u32` header length,
//! UTF-8 JSON header (kind, architecture, tensor manifest, provenance,
//! extras), then every tensor as `f32` values in manifest order.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{EpochLog, Ffn, FfnConfig, Lstm, LstmConfig, Network, StopReason, Tensor, TrainConfig, TrainOutcome};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"XPRS";
const VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Expression,
    Emotion,
    Inversion,
    Fusion,
    BowBaseline,
    Generic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Architecture {
    Lstm(LstmConfig),
    Ffn(FfnConfig),
}

/// Summary of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub train_config: TrainConfig,
    pub epochs: usize,
    pub best_epoch: usize,
    pub best_cv_error: f64,
    pub lr_history: Vec<f64>,
    pub stop: StopReason,
    #[serde(default)]
    pub log: Vec<EpochLog>,
}

impl StageRecord {
    pub fn from_outcome<N>(name: &str, cfg: &TrainConfig, out: &TrainOutcome<N>) -> Self {
        Self {
            name: name.to_string(),
            train_config: cfg.clone(),
            epochs: out.epochs_run(),
            best_epoch: out.best_epoch,
            best_cv_error: out.best_cv_error,
            lr_history: out.lr_history.clone(),
            stop: out.stop,
            log: out.log.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub stages: Vec<StageRecord>,
    /// Fully resolved run configuration.
    pub run_config: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelCheckpoint {
    pub kind: ModelKind,
    pub arch: Architecture,
    pub tensors: Vec<(String, Tensor)>,
    pub provenance: Provenance,
    /// Model-specific side data: normalization statistics, vocabulary, fusion sources.
    pub extras: BTreeMap<String, Value>,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    name: String,
    shape: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    kind: ModelKind,
    arch: Architecture,
    tensors: Vec<Entry>,
    provenance: Provenance,
    extras: BTreeMap<String, Value>,
}

fn named<N: Network>(net: &N) -> Vec<(String, Tensor)> {
    net.tensor_names()
        .into_iter()
        .zip(net.tensors())
        .map(|(n, t)| {
            let mut t = t.clone();
            t.round_to_f32();
            (n, t)
        })
        .collect()
}

impl ModelCheckpoint {
    /// Snapshot of an LSTM; weights are rounded to the stored `f32` precision.
    pub fn from_lstm(kind: ModelKind, net: &Lstm, provenance: Provenance) -> Self {
        Self { kind, arch: Architecture::Lstm(net.config().clone()), tensors: named(net), provenance, extras: BTreeMap::new() }
    }

    pub fn from_ffn(kind: ModelKind, net: &Ffn, provenance: Provenance) -> Self {
        Self { kind, arch: Architecture::Ffn(net.config().clone()), tensors: named(net), provenance, extras: BTreeMap::new() }
    }

    pub fn expect_kind(&self, kind: ModelKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::WrongModelKind { expected: format!("{kind:?}"), got: format!("{:?}", self.kind) });
        }
        Ok(())
    }

    fn raw_tensors(&self) -> Vec<Tensor> {
        self.tensors.iter().map(|(_, t)| t.clone()).collect()
    }

    pub fn lstm(&self) -> Result<Lstm> {
        match &self.arch {
            Architecture::Lstm(cfg) => Lstm::from_tensors(cfg.clone(), self.raw_tensors()),
            Architecture::Ffn(_) => Err(Error::WrongModelKind { expected: "Lstm".into(), got: "Ffn".into() }),
        }
    }

    pub fn ffn(&self) -> Result<Ffn> {
        match &self.arch {
            Architecture::Ffn(cfg) => Ffn::from_tensors(cfg.clone(), self.raw_tensors()),
            Architecture::Lstm(_) => Err(Error::WrongModelKind { expected: "Ffn".into(), got: "Lstm".into() }),
        }
    }

    pub fn set_extra(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.extras.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn extra<T: serde::de::DeserializeOwned>(&self, key: &str) -> Result<T> {
        let v = self.extras.get(key).ok_or_else(|| Error::Format(format!("checkpoint lacks '{key}'")))?;
        Ok(serde_json::from_value(v.clone())?)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = Header {
            kind: self.kind,
            arch: self.arch.clone(),
            tensors: self.tensors.iter().map(|(n, t)| Entry { name: n.clone(), shape: t.shape().to_vec() }).collect(),
            provenance: self.provenance.clone(),
            extras: self.extras.clone(),
        };
        let json = serde_json::to_vec(&header)?;
        let n_values: usize = self.tensors.iter().map(|(_, t)| t.len()).sum();
        let mut out = Vec::with_capacity(9 + json.len() + 4 * n_values);
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&(json.len() as u32).to_le_bytes());
        out.extend_from_slice(&json);
        for (_, t) in &self.tensors {
            for &v in t.data() {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let truncated = || Error::TruncatedFile("XPRS".into());
        if bytes.len() < 9 {
            return Err(if bytes.starts_with(&MAGIC[..bytes.len().min(4)]) { truncated() } else { Error::Format("missing XPRS magic".into()) });
        }
        if &bytes[..4] != MAGIC {
            return Err(Error::Format("missing XPRS magic".into()));
        }
        if bytes[4] != VERSION {
            return Err(Error::Format(format!("unsupported XPRS version {}", bytes[4])));
        }
        let len = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
        let json = bytes.get(9..9 + len).ok_or_else(truncated)?;
        let header: Header = serde_json::from_slice(json)?;
        let mut pos = 9 + len;
        let mut tensors = Vec::with_capacity(header.tensors.len());
        for e in header.tensors {
            let n: usize = e.shape.iter().product();
            let raw = bytes.get(pos..pos + 4 * n).ok_or_else(truncated)?;
            pos += 4 * n;
            let data = raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64).collect();
            tensors.push((e.name, Tensor::from_vec(&e.shape, data).expect("length follows from shape")));
        }
        if pos != bytes.len() {
            return Err(Error::Format(format!("{} trailing bytes", bytes.len() - pos)));
        }
        let ck = Self { kind: header.kind, arch: header.arch, tensors, provenance: header.provenance, extras: header.extras };
        // validates names and shapes against the architecture
        let names = match &ck.arch {
            Architecture::Lstm(_) => ck.lstm()?.tensor_names(),
            Architecture::Ffn(_) => ck.ffn()?.tensor_names(),
        };
        if names.iter().ne(ck.tensors.iter().map(|(n, _)| n)) {
            return Err(Error::ShapeMismatch("tensor names do not match architecture".into()));
        }
        Ok(ck)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::{Loss, OutputKind, Readout};

    fn lstm_ck() -> ModelCheckpoint {
        let cfg = LstmConfig {
            input_dim: 3,
            hidden_dim: 4,
            embedding_dim: 2,
            output_dim: 2,
            output_kind: OutputKind::SoftmaxClasses,
            readout: Readout::FinalState,
        };
        let prov = Provenance {
            seed: 7,
            stages: vec![StageRecord {
                name: "pretrain".into(),
                train_config: TrainConfig::new(Loss::CrossEntropy, 200, 1e-4, 10, 7),
                epochs: 10,
                best_epoch: 4,
                best_cv_error: 0.1234567890123,
                lr_history: vec![1e-4, 9e-5],
                stop: StopReason::MaxEpochs,
                log: vec![EpochLog { epoch: 0, train_loss: 0.7, cv_error: 0.69, learning_rate: 1e-4, backoff: false }],
            }],
            run_config: serde_json::json!({"seed": 7}),
        };
        let mut ck = ModelCheckpoint::from_lstm(ModelKind::Expression, &Lstm::new(cfg, 3).unwrap(), prov);
        ck.set_extra("mean", vec![0.1, 1.0 / 3.0]).unwrap();
        ck
    }

    #[test]
    fn roundtrip_is_bitwise() {
        let ck = lstm_ck();
        let bytes = ck.to_bytes().unwrap();
        assert_eq!(&bytes[..5], b"XPRS\x01");
        let back = ModelCheckpoint::from_bytes(&bytes).unwrap();
        assert_eq!(back, ck);
        assert_eq!(back.to_bytes().unwrap(), bytes);
        assert_eq!(back.extra::<Vec<f64>>("mean").unwrap(), vec![0.1, 1.0 / 3.0]);
        assert_eq!(back.lstm().unwrap().tensors(), ck.lstm().unwrap().tensors());
    }

    #[test]
    fn kind_and_architecture_are_enforced() {
        let ck = lstm_ck();
        assert!(ck.expect_kind(ModelKind::Expression).is_ok());
        assert!(matches!(ck.expect_kind(ModelKind::Emotion), Err(Error::WrongModelKind { .. })));
        assert!(matches!(ck.ffn(), Err(Error::WrongModelKind { .. })));
    }

    #[test]
    fn corrupt_input_is_rejected() {
        let bytes = lstm_ck().to_bytes().unwrap();
        assert!(matches!(ModelCheckpoint::from_bytes(&bytes[..bytes.len() - 2]), Err(Error::TruncatedFile(_))));
        assert!(matches!(ModelCheckpoint::from_bytes(b"XPR"), Err(Error::TruncatedFile(_))));
        assert!(matches!(ModelCheckpoint::from_bytes(b"FEAT\x01\x00\x00\x00\x00"), Err(Error::Format(_))));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(ModelCheckpoint::from_bytes(&extra), Err(Error::Format(_))));
    }
}
