//! Run configuration: one JSON document, optionally patched by dotted-path overrides.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use xprs_core::articulatory::InversionConfig;
use xprs_core::data::{SplitRatios, SynthConfig};
use xprs_core::dsp::FrameSpec;
use xprs_core::models::{BowConfig, EmotionConfig, ExpressionConfig, FusionConfig};
use xprs_core::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; copied into every stage's training seed on resolution.
    pub seed: u64,
    pub feature: String,
    pub frames: FrameSpec,
    pub synth_queries: usize,
    pub synth: SynthConfig,
    pub split: SplitRatios,
    pub inversion: InversionConfig,
    pub expression: ExpressionConfig,
    pub emotion: EmotionConfig,
    pub fusion: FusionConfig,
    pub bow: BowConfig,
    pub gradcheck: GradcheckConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradcheckConfig {
    pub step: f64,
    pub tolerance: f64,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        Self { step: 1e-5, tolerance: 1e-4 }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            feature: "mfcc".into(),
            frames: FrameSpec::default(),
            synth_queries: 2000,
            synth: SynthConfig::default(),
            split: SplitRatios::default(),
            inversion: InversionConfig::default(),
            expression: ExpressionConfig::default(),
            emotion: EmotionConfig::default(),
            fusion: FusionConfig::default(),
            bow: BowConfig::default(),
            gradcheck: GradcheckConfig::default(),
        }
    }
}

/// Parses an override value as JSON, falling back to a bare string.
fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

fn apply_override(doc: &mut Value, spec: &str) -> Result<()> {
    let (path, raw) = spec.split_once('=').ok_or_else(|| Error::BadConfig(format!("override '{spec}' is not key=value")))?;
    let mut node = doc;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        let obj = node.as_object_mut().ok_or_else(|| Error::BadConfig(format!("'{path}': '{key}' is not inside an object")))?;
        if !obj.contains_key(*key) {
            return Err(Error::BadConfig(format!("unknown config key '{path}'")));
        }
        if i + 1 == keys.len() {
            obj.insert(key.to_string(), parse_value(raw));
            return Ok(());
        }
        node = obj.get_mut(*key).expect("checked above");
    }
    Err(Error::BadConfig("empty override path".into()))
}

impl RunConfig {
    /// File (if any) over defaults, then overrides, then the seed flag.
    pub fn resolve(file: Option<&Path>, overrides: &[String], seed: Option<u64>) -> Result<Self> {
        let mut doc = serde_json::to_value(RunConfig::default())?;
        if let Some(path) = file {
            let user: Value = serde_json::from_str(&fs::read_to_string(path)?)?;
            let parsed: RunConfig = serde_json::from_value(user).map_err(|e| Error::BadConfig(e.to_string()))?;
            doc = serde_json::to_value(parsed)?;
        }
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let mut cfg: RunConfig = serde_json::from_value(doc).map_err(|e| Error::BadConfig(e.to_string()))?;
        if let Some(s) = seed {
            cfg.seed = s;
        }
        cfg.expression.pretrain.seed = cfg.seed;
        cfg.expression.finetune.seed = cfg.seed;
        cfg.emotion.train.seed = cfg.seed;
        cfg.inversion.train.seed = cfg.seed;
        cfg.fusion.train.seed = cfg.seed;
        cfg.bow.train.seed = cfg.seed;
        Ok(cfg)
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}
