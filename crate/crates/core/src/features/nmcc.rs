//! Modulation cepstra from Teager-energy amplitude envelopes of gammatone bands.

use std::f64::consts::PI;

use super::dct::{apply, dct_matrix};
use super::gammatone::{erb_centers, GammatoneFilter};
use super::{FeatureKind, FeatureMatrix, FilterbankKind, FilterbankSpec, N_CEPSTRA};
use crate::dsp::{AudioBuffer, FrameSpec};
use crate::error::Result;

const COMPRESSION_EXPONENT: f64 = 1.0 / 15.0;

/// Teager energy `x[n]^2 - x[n-1] x[n+1]`, edges copied from their neighbours.
fn teager(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let mut psi = vec![0.0; n];
    for i in 1..n - 1 {
        psi[i] = x[i] * x[i] - x[i - 1] * x[i + 1];
    }
    psi[0] = psi[1];
    psi[n - 1] = psi[n - 2];
    psi
}

/// Frame-averaged squared AM envelope per band, `T × n_filters`.
///
/// The energy-separation amplitude of a band-limited carrier at normalized
/// frequency Ω is `sqrt(Ψ) / sin Ω`; Ω is taken at the band center, and
/// negative Teager energies are clamped to zero.
pub fn band_envelope_power(audio: &AudioBuffer, fb: &FilterbankSpec, spec: &FrameSpec) -> Result<Vec<Vec<f64>>> {
    fb.check(FilterbankKind::GammatoneErb, audio.sample_rate_hz(), N_CEPSTRA)?;
    let (win, hop) = spec.check_audio(audio)?;
    let fs = audio.sample_rate_hz() as f64;
    let n_frames = spec.frame_count(audio.len(), audio.sample_rate_hz());
    let mut out = vec![vec![0.0; fb.n_filters]; n_frames];
    for (b, fc) in erb_centers(fb.f_lo_hz, fb.f_hi_hz, fb.n_filters).into_iter().enumerate() {
        let band = GammatoneFilter::new(fc, fs).filter(audio.samples());
        let correction = 1.0 / (2.0 * PI * fc / fs).sin().powi(2);
        // squared envelope a^2 = max(Ψ, 0) · correction
        let env_sq: Vec<f64> = teager(&band).into_iter().map(|p| p.max(0.0) * correction).collect();
        for (t, row) in out.iter_mut().enumerate() {
            let seg = &env_sq[t * hop..t * hop + win];
            row[b] = seg.iter().sum::<f64>() / win as f64;
        }
    }
    Ok(out)
}

/// 20 modulation cepstra: `(envelope power)^(1/15)` through the DCT.
pub fn nmcc(audio: &AudioBuffer, fb: &FilterbankSpec, spec: &FrameSpec) -> Result<FeatureMatrix> {
    let env = band_envelope_power(audio, fb, spec)?;
    let dct = dct_matrix(fb.n_filters, N_CEPSTRA);
    let mut data = Vec::with_capacity(env.len() * N_CEPSTRA);
    for row in &env {
        let compressed: Vec<f64> = row.iter().map(|p| p.powf(COMPRESSION_EXPONENT)).collect();
        data.extend(apply(&dct, &compressed));
    }
    let mut meta = fb.meta();
    meta.insert("compression".into(), "power 1/15".into());
    meta.insert("envelope".into(), "teager energy separation, center-frequency correction".into());
    FeatureMatrix::new(FeatureKind::Nmcc20, env.len(), N_CEPSTRA, data, meta)
}
