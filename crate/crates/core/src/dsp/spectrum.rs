use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::AudioBuffer;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindowKind {
    Hamming,
}

/// Short-time analysis parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub window_ms: f64,
    pub hop_ms: f64,
    pub window_kind: WindowKind,
    pub preemphasis: f64,
    pub fft_size: usize,
}

impl Default for FrameSpec {
    fn default() -> Self {
        Self { window_ms: 25.0, hop_ms: 10.0, window_kind: WindowKind::Hamming, preemphasis: 0.97, fft_size: 512 }
    }
}

impl FrameSpec {
    pub fn window_len(&self, sample_rate_hz: u32) -> usize {
        (self.window_ms * sample_rate_hz as f64 / 1000.0).round() as usize
    }

    pub fn hop_len(&self, sample_rate_hz: u32) -> usize {
        (self.hop_ms * sample_rate_hz as f64 / 1000.0).round() as usize
    }

    /// Number of complete frames in `n` samples, zero when `n` is shorter than a window.
    pub fn frame_count(&self, n: usize, sample_rate_hz: u32) -> usize {
        let win = self.window_len(sample_rate_hz);
        let hop = self.hop_len(sample_rate_hz);
        if n < win {
            0
        } else {
            (n - win) / hop + 1
        }
    }

    pub fn validate(&self, sample_rate_hz: u32) -> Result<()> {
        let win = self.window_len(sample_rate_hz);
        if !(self.window_ms > 0.0 && self.hop_ms > 0.0) || self.hop_len(sample_rate_hz) == 0 {
            return Err(Error::BadFrameSpec("window and hop must be positive".into()));
        }
        if self.hop_ms > self.window_ms {
            return Err(Error::BadFrameSpec("hop longer than window".into()));
        }
        if !(0.0..1.0).contains(&self.preemphasis) {
            return Err(Error::BadFrameSpec(format!("preemphasis {} not in [0,1)", self.preemphasis)));
        }
        if !self.fft_size.is_power_of_two() || self.fft_size < win {
            return Err(Error::BadFrameSpec(format!(
                "fft size {} must be a power of two >= window length {win}",
                self.fft_size
            )));
        }
        Ok(())
    }

    /// Checks the spec and that `audio` holds at least one window.
    pub(crate) fn check_audio(&self, audio: &AudioBuffer) -> Result<(usize, usize)> {
        self.validate(audio.sample_rate_hz())?;
        let win = self.window_len(audio.sample_rate_hz());
        if audio.len() < win {
            return Err(Error::AudioTooShort { len: audio.len(), needed: win });
        }
        Ok((win, self.hop_len(audio.sample_rate_hz())))
    }
}

/// Symmetric Hamming window.
pub fn hamming(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    (0..len).map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / (len - 1) as f64).cos()).collect()
}

/// `T × (fft_size/2 + 1)` power spectra.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrogram {
    pub frames: Vec<Vec<f64>>,
    pub spec: FrameSpec,
    pub sample_rate_hz: u32,
}

impl PowerSpectrogram {
    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn n_bins(&self) -> usize {
        self.spec.fft_size / 2 + 1
    }

    /// Center frequency in Hz of FFT bin `k`.
    pub fn bin_hz(&self, k: usize) -> f64 {
        k as f64 * self.sample_rate_hz as f64 / self.spec.fft_size as f64
    }
}

pub fn frame_power_spectrum(audio: &AudioBuffer, spec: &FrameSpec) -> Result<PowerSpectrogram> {
    let (win, hop) = spec.check_audio(audio)?;
    let x = audio.samples();
    let mut emph = Vec::with_capacity(x.len());
    emph.push(x[0]);
    emph.extend(x.windows(2).map(|w| w[1] - spec.preemphasis * w[0]));

    let window = match spec.window_kind {
        WindowKind::Hamming => hamming(win),
    };
    let fft = FftPlanner::<f64>::new().plan_fft_forward(spec.fft_size);
    let n_bins = spec.fft_size / 2 + 1;
    let n_frames = spec.frame_count(x.len(), audio.sample_rate_hz());
    let mut buf = vec![Complex::new(0.0, 0.0); spec.fft_size];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut frames = Vec::with_capacity(n_frames);
    for t in 0..n_frames {
        let seg = &emph[t * hop..t * hop + win];
        for (slot, (s, w)) in buf.iter_mut().zip(seg.iter().zip(&window)) {
            *slot = Complex::new(s * w, 0.0);
        }
        buf[win..].fill(Complex::new(0.0, 0.0));
        fft.process_with_scratch(&mut buf, &mut scratch);
        frames.push(buf[..n_bins].iter().map(|c| c.norm_sqr()).collect());
    }
    Ok(PowerSpectrogram { frames, spec: spec.clone(), sample_rate_hz: audio.sample_rate_hz() })
}
