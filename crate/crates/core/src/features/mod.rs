//! Acoustic feature streams: mel and gammatone cepstra, modulation cepstra,
//! pitch/voicing, plus the matrix operations used to assemble model inputs.

mod cepstra;
mod dct;
mod gammatone;
mod io;
mod nmcc;
mod ops;
mod pitch;
mod stream;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use cepstra::{gammatone_weights, gcc, mel_weights, mfcc, mfcc13, mfcc39};
pub use dct::dct_matrix;
pub use gammatone::{erb_bandwidth_hz, erb_centers, erb_rate, erb_rate_inverse, GammatoneFilter};
pub use io::{read_feat, read_feat_file, write_feat, write_feat_file};
pub use nmcc::{band_envelope_power, nmcc};
pub use ops::{add_deltas, cmvn, concat, splice, ColumnStats};
pub use pitch::{f0v, f0v_with, PitchConfig};
pub use stream::{BaseFeature, FeatureStream};

use crate::error::{Error, Result};

/// Number of cepstral coefficients in the classification streams.
pub const N_CEPSTRA: usize = 20;
/// Static coefficients feeding the 39-dimensional inversion stream.
pub const N_STATIC_INVERSION: usize = 13;
/// Context frames on each side for inversion input.
pub const INVERSION_CONTEXT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureKind {
    Mfcc20,
    Gcc20,
    Nmcc20,
    F0v3,
    Mfcc13,
    Mfcc39,
    Concat23,
    Spliced429,
    Tv8,
    Custom,
}

impl FeatureKind {
    /// Fixed width for the kind, `None` for [`FeatureKind::Custom`].
    pub fn width(self) -> Option<usize> {
        use FeatureKind::*;
        match self {
            Mfcc20 | Gcc20 | Nmcc20 => Some(20),
            F0v3 => Some(3),
            Mfcc13 => Some(13),
            Mfcc39 => Some(39),
            Concat23 => Some(23),
            Spliced429 => Some(429),
            Tv8 => Some(8),
            Custom => None,
        }
    }

    /// Byte code in the FEAT file header.
    pub fn code(self) -> u8 {
        use FeatureKind::*;
        match self {
            Custom => 0,
            Mfcc20 => 1,
            Gcc20 => 2,
            Nmcc20 => 3,
            F0v3 => 4,
            Mfcc39 => 5,
            Concat23 => 6,
            Spliced429 => 7,
            Tv8 => 8,
            Mfcc13 => 9,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        use FeatureKind::*;
        Some(match code {
            0 => Custom,
            1 => Mfcc20,
            2 => Gcc20,
            3 => Nmcc20,
            4 => F0v3,
            5 => Mfcc39,
            6 => Concat23,
            7 => Spliced429,
            8 => Tv8,
            9 => Mfcc13,
            _ => return None,
        })
    }

    pub fn is_cepstral20(self) -> bool {
        matches!(self, FeatureKind::Mfcc20 | FeatureKind::Gcc20 | FeatureKind::Nmcc20)
    }
}

impl std::fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

pub type Meta = BTreeMap<String, serde_json::Value>;

/// Frames × dims real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    kind: FeatureKind,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    pub meta: Meta,
}

impl FeatureMatrix {
    pub fn new(kind: FeatureKind, rows: usize, cols: usize, data: Vec<f64>, meta: Meta) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!("{} values for {rows}x{cols}", data.len())));
        }
        if let Some(w) = kind.width() {
            if w != cols {
                return Err(Error::ShapeMismatch(format!("{kind} must have {w} columns, got {cols}")));
            }
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format(format!("non-finite value in {kind} matrix")));
        }
        Ok(Self { kind, rows, cols, data, meta })
    }

    pub fn from_rows(kind: FeatureKind, rows: &[Vec<f64>], meta: Meta) -> Result<Self> {
        let cols = rows.first().map_or(kind.width().unwrap_or(0), Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Self::new(kind, rows.len(), cols, rows.concat(), meta)
    }

    /// A `rows × 0` matrix; the identity element of [`concat`].
    pub fn empty(rows: usize) -> Self {
        Self { kind: FeatureKind::Custom, rows, cols: 0, data: Vec::new(), meta: Meta::new() }
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.cols..(t + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|t| self.data[t * self.cols + j]).collect()
    }

    pub fn get(&self, t: usize, j: usize) -> f64 {
        self.data[t * self.cols + j]
    }

    /// Relabels the matrix; the new kind must accept the current width.
    pub fn with_kind(mut self, kind: FeatureKind) -> Result<Self> {
        if let Some(w) = kind.width() {
            if w != self.cols {
                return Err(Error::ShapeMismatch(format!("{kind} must have {w} columns, got {}", self.cols)));
            }
        }
        self.kind = kind;
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FilterbankKind {
    MelTriangular,
    GammatoneErb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterbankSpec {
    pub kind: FilterbankKind,
    pub n_filters: usize,
    pub f_lo_hz: f64,
    pub f_hi_hz: f64,
}

impl FilterbankSpec {
    pub fn mel() -> Self {
        Self { kind: FilterbankKind::MelTriangular, n_filters: 40, f_lo_hz: 50.0, f_hi_hz: 7600.0 }
    }

    pub fn gammatone() -> Self {
        Self { kind: FilterbankKind::GammatoneErb, ..Self::mel() }
    }

    pub(crate) fn check(&self, want: FilterbankKind, sample_rate_hz: u32, n_out: usize) -> Result<()> {
        if self.kind != want {
            return Err(Error::BadFilterbank(format!("expected {want:?}, got {:?}", self.kind)));
        }
        if self.n_filters < n_out {
            return Err(Error::BadFilterbank(format!(
                "{} filters cannot yield {n_out} cepstra",
                self.n_filters
            )));
        }
        if !(self.f_lo_hz >= 0.0 && self.f_lo_hz < self.f_hi_hz && self.f_hi_hz <= sample_rate_hz as f64 / 2.0) {
            return Err(Error::BadFilterbank(format!(
                "band edges {}..{} Hz invalid at {sample_rate_hz} Hz",
                self.f_lo_hz, self.f_hi_hz
            )));
        }
        Ok(())
    }

    pub(crate) fn meta(&self) -> Meta {
        let mut m = Meta::new();
        m.insert("filterbank".into(), serde_json::to_value(self).unwrap());
        m
    }
}
