//! ERB scale and a time-domain 4th-order gammatone filter.
//!
//! The filter is the all-pole approximation built from four cascaded complex
//! one-pole resonators at the band center, normalized to unit gain there.

use std::f64::consts::PI;

/// Equivalent rectangular bandwidth (Glasberg & Moore) in Hz.
pub fn erb_hz(f: f64) -> f64 {
    24.7 * (4.37 * f / 1000.0 + 1.0)
}

/// Bandwidth parameter of a 4th-order gammatone at `fc`.
pub fn erb_bandwidth_hz(fc: f64) -> f64 {
    1.019 * erb_hz(fc)
}

/// ERB-rate (number of ERBs below `f`).
pub fn erb_rate(f: f64) -> f64 {
    21.4 * (1.0 + 0.00437 * f).log10()
}

pub fn erb_rate_inverse(e: f64) -> f64 {
    (10f64.powf(e / 21.4) - 1.0) / 0.00437
}

/// `n` centers equally spaced on the ERB-rate scale, endpoints included.
pub fn erb_centers(f_lo: f64, f_hi: f64, n: usize) -> Vec<f64> {
    let (lo, hi) = (erb_rate(f_lo), erb_rate(f_hi));
    if n == 1 {
        return vec![erb_rate_inverse(0.5 * (lo + hi))];
    }
    (0..n).map(|i| erb_rate_inverse(lo + (hi - lo) * i as f64 / (n - 1) as f64)).collect()
}

#[derive(Debug, Clone)]
pub struct GammatoneFilter {
    pub center_hz: f64,
    pole_re: f64,
    pole_im: f64,
    gain: f64,
}

impl GammatoneFilter {
    pub fn new(center_hz: f64, sample_rate_hz: f64) -> Self {
        let omega = 2.0 * PI * center_hz / sample_rate_hz;
        let r = (-2.0 * PI * erb_bandwidth_hz(center_hz) / sample_rate_hz).exp();
        Self { center_hz, pole_re: r * omega.cos(), pole_im: r * omega.sin(), gain: (1.0 - r).powi(4) }
    }

    /// Filters `x`, returning the real band signal (twice the real part of the
    /// one-sided complex output, so a tone at the center passes with unit gain).
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let (pr, pi) = (self.pole_re, self.pole_im);
        let mut st = [(0.0f64, 0.0f64); 4];
        x.iter()
            .map(|&v| {
                let (mut re, mut im) = (self.gain * v, 0.0);
                for s in st.iter_mut() {
                    let nr = re + pr * s.0 - pi * s.1;
                    let ni = im + pr * s.1 + pi * s.0;
                    *s = (nr, ni);
                    re = nr;
                    im = ni;
                }
                2.0 * re
            })
            .collect()
    }
}
