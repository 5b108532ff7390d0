//! Normalized cross-correlation pitch tracker producing (f0, Δf0, voicing).

use serde::{Deserialize, Serialize};

use super::{FeatureKind, FeatureMatrix, Meta};
use crate::dsp::{AudioBuffer, FrameSpec};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchConfig {
    pub f0_min_hz: f64,
    pub f0_max_hz: f64,
    pub voicing_threshold: f64,
    /// The shortest-lag correlation peak within this fraction of the global
    /// maximum is taken as the period, which suppresses sub-octave picks.
    pub octave_ratio: f64,
}

impl Default for PitchConfig {
    fn default() -> Self {
        Self { f0_min_hz: 60.0, f0_max_hz: 400.0, voicing_threshold: 0.3, octave_ratio: 0.9 }
    }
}

fn ncc_curve(x: &[f64], start: usize, win: usize, lag_lo: usize, lag_hi: usize) -> Vec<f64> {
    let seg = &x[start..start + win];
    let e0: f64 = seg.iter().map(|v| v * v).sum();
    let mut e_lag: f64 = x[start + lag_lo..start + lag_lo + win].iter().map(|v| v * v).sum();
    let mut out = Vec::with_capacity(lag_hi - lag_lo + 1);
    for lag in lag_lo..=lag_hi {
        if lag > lag_lo {
            let (old, new) = (x[start + lag - 1], x[start + lag + win - 1]);
            e_lag = (e_lag - old * old + new * new).max(0.0);
        }
        let other = &x[start + lag..start + lag + win];
        let num: f64 = seg.iter().zip(other).map(|(a, b)| a * b).sum();
        let den = (e0 * e_lag).sqrt();
        out.push(if den > 1e-12 { num / den } else { 0.0 });
    }
    out
}

/// Picks a fractional lag from a correlation curve; returns (lag offset, peak value).
fn pick_period(r: &[f64], octave_ratio: f64) -> (f64, f64) {
    let peak = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let is_local_max = |i: usize| {
        (i == 0 || r[i] >= r[i - 1]) && (i + 1 == r.len() || r[i] >= r[i + 1])
    };
    let i = (0..r.len())
        .find(|&i| r[i] >= octave_ratio * peak && is_local_max(i))
        .unwrap_or_else(|| (0..r.len()).max_by(|&a, &b| r[a].total_cmp(&r[b])).unwrap());
    let mut frac = 0.0;
    if i > 0 && i + 1 < r.len() {
        let (a, b, c) = (r[i - 1], r[i], r[i + 1]);
        let den = a - 2.0 * b + c;
        if den < 0.0 {
            frac = (0.5 * (a - c) / den).clamp(-0.5, 0.5);
        }
    }
    (i as f64 + frac, peak)
}

/// Linear interpolation of f0 across unvoiced frames, holding the edges.
fn fill_unvoiced(f0: &mut [f64], voiced: &[bool]) {
    let idx: Vec<usize> = (0..f0.len()).filter(|&t| voiced[t]).collect();
    if idx.is_empty() {
        f0.fill(0.0);
        return;
    }
    let (first, last) = (idx[0], *idx.last().unwrap());
    let (v_first, v_last) = (f0[first], f0[last]);
    f0[..first].fill(v_first);
    f0[last + 1..].fill(v_last);
    for w in idx.windows(2) {
        let (a, b) = (w[0], w[1]);
        for t in a + 1..b {
            let u = (t - a) as f64 / (b - a) as f64;
            f0[t] = f0[a] + u * (f0[b] - f0[a]);
        }
    }
}

/// Pitch, pitch-delta and voicing, one row per analysis frame.
pub fn f0v(audio: &AudioBuffer, spec: &FrameSpec) -> Result<FeatureMatrix> {
    f0v_with(audio, spec, &PitchConfig::default())
}

pub fn f0v_with(audio: &AudioBuffer, spec: &FrameSpec, cfg: &PitchConfig) -> Result<FeatureMatrix> {
    let (win, hop) = spec.check_audio(audio)?;
    let fs = audio.sample_rate_hz() as f64;
    let lag_lo = (fs / cfg.f0_max_hz).ceil() as usize;
    let lag_hi = (fs / cfg.f0_min_hz).floor() as usize;
    let n_frames = spec.frame_count(audio.len(), audio.sample_rate_hz());
    let mut x = audio.samples().to_vec();
    x.resize((n_frames - 1) * hop + win + lag_hi + 1, 0.0);

    let mut f0 = vec![0.0; n_frames];
    let mut voicing = vec![0.0; n_frames];
    for t in 0..n_frames {
        let r = ncc_curve(&x, t * hop, win, lag_lo, lag_hi);
        let (lag, peak) = pick_period(&r, cfg.octave_ratio);
        voicing[t] = peak.clamp(0.0, 1.0);
        f0[t] = fs / (lag_lo as f64 + lag);
    }
    let voiced: Vec<bool> = voicing.iter().map(|&v| v >= cfg.voicing_threshold).collect();
    fill_unvoiced(&mut f0, &voiced);

    let mut data = Vec::with_capacity(n_frames * 3);
    for t in 0..n_frames {
        let prev = f0[t.saturating_sub(1)];
        let next = f0[(t + 1).min(n_frames - 1)];
        data.extend([f0[t], 0.5 * (next - prev), voicing[t]]);
    }
    let mut meta = Meta::new();
    meta.insert("pitch".into(), serde_json::to_value(cfg).unwrap());
    meta.insert("columns".into(), serde_json::json!(["f0", "delta_f0", "voicing"]));
    FeatureMatrix::new(FeatureKind::F0v3, n_frames, 3, data, meta)
}
