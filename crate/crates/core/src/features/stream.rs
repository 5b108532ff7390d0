//! Named feature streams such as `mfcc`, `concat:mfcc,f0v` or `gcc+tv`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{concat, f0v, gcc, mfcc, mfcc39, nmcc, FeatureMatrix, FilterbankSpec};
use crate::articulatory::estimate_tvs;
use crate::dsp::{frame_power_spectrum, AudioBuffer, FrameSpec};
use crate::error::{Error, Result};
use crate::neural::ModelCheckpoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseFeature {
    Mfcc,
    Gcc,
    Nmcc,
    F0v,
    Mfcc39,
}

impl BaseFeature {
    fn name(self) -> &'static str {
        match self {
            BaseFeature::Mfcc => "mfcc",
            BaseFeature::Gcc => "gcc",
            BaseFeature::Nmcc => "nmcc",
            BaseFeature::F0v => "f0v",
            BaseFeature::Mfcc39 => "mfcc39",
        }
    }
}

impl FromStr for BaseFeature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "mfcc" => BaseFeature::Mfcc,
            "gcc" => BaseFeature::Gcc,
            "nmcc" => BaseFeature::Nmcc,
            "f0v" => BaseFeature::F0v,
            "mfcc39" => BaseFeature::Mfcc39,
            other => return Err(Error::UnknownFeature(other.into())),
        })
    }
}

/// Frame-synchronous concatenation of base streams, optionally followed by
/// the eight estimated tract variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureStream {
    pub parts: Vec<BaseFeature>,
    pub with_tv: bool,
}

impl FeatureStream {
    pub fn single(b: BaseFeature) -> Self {
        Self { parts: vec![b], with_tv: false }
    }

    pub fn width(&self) -> usize {
        let base: usize = self
            .parts
            .iter()
            .map(|p| match p {
                BaseFeature::F0v => 3,
                BaseFeature::Mfcc39 => 39,
                _ => 20,
            })
            .sum();
        base + if self.with_tv { 8 } else { 0 }
    }

    /// Extracts the stream; `inversion` is required when tract variables are appended.
    pub fn extract(&self, audio: &AudioBuffer, spec: &FrameSpec, inversion: Option<&ModelCheckpoint>) -> Result<FeatureMatrix> {
        let needs_spectrum = self.with_tv || self.parts.iter().any(|p| matches!(p, BaseFeature::Mfcc | BaseFeature::Gcc | BaseFeature::Mfcc39));
        let ps = if needs_spectrum { Some(frame_power_spectrum(audio, spec)?) } else { None };
        let ps = || ps.as_ref().expect("spectrum computed above");
        let mut out: Option<FeatureMatrix> = None;
        let mut push = |m: FeatureMatrix| -> Result<()> {
            out = Some(match out.take() {
                None => m,
                Some(acc) => concat(&acc, &m)?,
            });
            Ok(())
        };
        for p in &self.parts {
            push(match p {
                BaseFeature::Mfcc => mfcc(ps(), &FilterbankSpec::mel())?,
                BaseFeature::Gcc => gcc(ps(), &FilterbankSpec::gammatone())?,
                BaseFeature::Nmcc => nmcc(audio, &FilterbankSpec::gammatone(), spec)?,
                BaseFeature::F0v => f0v(audio, spec)?,
                BaseFeature::Mfcc39 => mfcc39(ps(), &FilterbankSpec::mel())?,
            })?;
        }
        if self.with_tv {
            let ck = inversion.ok_or_else(|| Error::BadConfig(format!("stream '{self}' needs an inversion model")))?;
            push(estimate_tvs(&mfcc39(ps(), &FilterbankSpec::mel())?, ck)?)?;
        }
        out.ok_or_else(|| Error::UnknownFeature(String::new()))
    }
}

impl FromStr for FeatureStream {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (body, with_tv) = match s.trim().strip_suffix("+tv") {
            Some(b) => (b, true),
            None => (s.trim(), false),
        };
        let parts = match body.strip_prefix("concat:") {
            Some(list) => list.split(',').map(str::parse).collect::<Result<Vec<_>>>()?,
            None => vec![body.parse()?],
        };
        Ok(Self { parts, with_tv })
    }
}

impl fmt::Display for FeatureStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.parts.iter().map(|p| p.name()).collect();
        if names.len() == 1 {
            write!(f, "{}", names[0])?;
        } else {
            write!(f, "concat:{}", names.join(","))?;
        }
        if self.with_tv {
            write!(f, "+tv")?;
        }
        Ok(())
    }
}
