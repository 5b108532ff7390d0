//! Audio ingestion and short-time power spectra.
//!
//! Everything downstream (cepstra, pitch, modulation features) starts from an
//! [`AudioBuffer`] at 16 kHz. Framing defaults to 25 ms Hamming windows with a
//! 10 ms hop, 0.97 pre-emphasis and a 512-point FFT.

mod spectrum;
mod wav;

pub use spectrum::{frame_power_spectrum, hamming, FrameSpec, PowerSpectrogram, WindowKind};
pub use wav::{load_wav, read_wav, write_wav};

use crate::error::{Error, Result};

/// The only sample rate the toolkit ingests.
pub const SAMPLE_RATE_HZ: u32 = 16_000;

/// Mono PCM audio with amplitudes in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    sample_rate_hz: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz != SAMPLE_RATE_HZ {
            return Err(Error::UnsupportedEncoding(format!(
                "sample rate {sample_rate_hz} Hz, expected {SAMPLE_RATE_HZ}"
            )));
        }
        if samples.is_empty() {
            return Err(Error::AudioTooShort { len: 0, needed: 1 });
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::Format(format!("non-finite sample at index {i}")));
        }
        Ok(Self { samples, sample_rate_hz })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }
}
