//! Vocal expression detection from acoustic and paralinguistic cues.
//!
//! The crate covers the whole pipeline: audio ingestion and framing
//! ([`dsp`]), cepstral, modulation and pitch features ([`features`]),
//! tract-variable inversion ([`articulatory`]), a small recurrent/feed-forward
//! learning engine ([`neural`]), the concrete expression, emotion, fusion and
//! bag-of-words models ([`models`]), grading and corpus handling ([`data`]) and
//! detection metrics ([`metrics`]).

pub mod dsp;
pub mod articulatory;
pub mod data;
pub mod error;
pub mod features;
pub mod metrics;
pub mod models;
pub mod neural;

pub use error::{Error, Result};
