//! Source-filter speech synthesizer driven by tract variables.
//!
//! A glottal pulse train (with aspiration noise) passes through a nasal
//! pole-zero pair and a cascade of four formant resonators; a fricative noise
//! branch is added at the output. The eight tract variables steer formant
//! frequencies, nasal coupling, breathiness, frication and level, so each one
//! leaves a distinct spectral trace.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Control values at one control instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TractFrame {
    /// Fundamental frequency in Hz.
    pub f0: f64,
    /// Linear source amplitude.
    pub amp: f64,
    /// Source low-pass coefficient in [0, 1): larger is darker.
    pub tilt: f64,
    /// GLO, VEL, LP, LA, TTCL, TTCD, TBCL, TBCD in z-units.
    pub tv: [f64; 8],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TractParams {
    pub sample_rate_hz: u32,
    /// Samples between control frames; parameters are interpolated in between.
    pub control_hop: usize,
    /// Filter coefficients are refreshed every this many samples.
    pub update_every: usize,
    pub output_gain: f64,
    pub noise_floor: f64,
}

impl Default for TractParams {
    fn default() -> Self {
        Self { sample_rate_hz: 16_000, control_hop: 80, update_every: 16, output_gain: 0.15, noise_floor: 1e-3 }
    }
}

/// Second-order resonator with unit DC gain.
#[derive(Default, Clone, Copy)]
struct Resonator {
    a: f64,
    b: f64,
    c: f64,
    y1: f64,
    y2: f64,
}

impl Resonator {
    fn tune(&mut self, f: f64, bw: f64, fs: f64) {
        let r = (-PI * bw / fs).exp();
        self.c = -r * r;
        self.b = 2.0 * r * (2.0 * PI * f / fs).cos();
        self.a = 1.0 - self.b - self.c;
    }

    fn step(&mut self, x: f64) -> f64 {
        let y = self.a * x + self.b * self.y1 + self.c * self.y2;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}

/// Inverse of [`Resonator`]: a zero pair with unit DC gain.
#[derive(Default, Clone, Copy)]
struct AntiResonator {
    a: f64,
    b: f64,
    c: f64,
    x1: f64,
    x2: f64,
}

impl AntiResonator {
    fn tune(&mut self, f: f64, bw: f64, fs: f64) {
        let mut r = Resonator::default();
        r.tune(f, bw, fs);
        self.a = 1.0 / r.a;
        self.b = -r.b / r.a;
        self.c = -r.c / r.a;
    }

    fn step(&mut self, x: f64) -> f64 {
        let y = self.a * x + self.b * self.x1 + self.c * self.x2;
        self.x2 = self.x1;
        self.x1 = x;
        y
    }
}

fn squash(z: f64) -> f64 {
    (z / 1.5).tanh()
}

/// Acoustic targets implied by one control frame.
struct Acoustics {
    formants: [(f64, f64); 4],
    nasal_zero: f64,
    breath: f64,
    frication: f64,
    level: f64,
}

fn acoustics(tv: &[f64; 8]) -> Acoustics {
    let [glo, vel, lp, la, ttcl, ttcd, tbcl, tbcd] = tv.map(squash);
    let open = |g: f64| 0.5 * (g + 1.0);
    let nasal = open(vel);
    let f1 = 550.0 * 2f64.powf(0.5 * la - 0.35 * tbcd - 0.15 * lp);
    let f2 = 1500.0 * 2f64.powf(0.55 * tbcl - 0.2 * lp + 0.1 * ttcl);
    let f3 = 2550.0 * 2f64.powf(0.22 * ttcl - 0.12 * lp);
    let f4 = 3600.0 * 2f64.powf(0.1 * ttcd);
    Acoustics {
        formants: [(f1, 70.0 + 90.0 * nasal), (f2, 90.0), (f3, 140.0), (f4, 220.0)],
        nasal_zero: 270.0 + 250.0 * nasal,
        breath: 0.01 + 0.1 * open(glo).powi(2),
        frication: 0.1 * open(ttcd).powi(3),
        level: 2f64.powf(0.5 * la),
    }
}

fn lerp(a: f64, b: f64, w: f64) -> f64 {
    a + (b - a) * w
}

fn interp(frames: &[TractFrame], pos: f64) -> TractFrame {
    let i = (pos.floor() as usize).min(frames.len() - 1);
    let j = (i + 1).min(frames.len() - 1);
    let w = pos - i as f64;
    let (a, b) = (&frames[i], &frames[j]);
    let mut tv = [0.0; 8];
    for k in 0..8 {
        tv[k] = lerp(a.tv[k], b.tv[k], w);
    }
    TractFrame { f0: lerp(a.f0, b.f0, w), amp: lerp(a.amp, b.amp, w), tilt: lerp(a.tilt, b.tilt, w), tv }
}

/// Glottal flow derivative over one period; open quotient 0.6.
fn glottal(phase: f64) -> f64 {
    const OQ: f64 = 0.6;
    if phase < OQ {
        let t = phase / OQ;
        2.0 * t - 3.0 * t * t
    } else {
        0.0
    }
}

/// Renders `(frames.len() - 1) * control_hop + 1` samples.
pub fn synthesize(frames: &[TractFrame], params: &TractParams, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if frames.is_empty() {
        return Vec::new();
    }
    let fs = params.sample_rate_hz as f64;
    let n = (frames.len() - 1) * params.control_hop + 1;
    let mut formants = [Resonator::default(); 4];
    let mut nasal_pole = Resonator::default();
    let mut nasal_zero = AntiResonator::default();
    let mut fric = Resonator::default();
    fric.tune(4500.0, 1500.0, fs);
    let mut hp_prev = 0.0;
    let mut tilt_state = 0.0;
    let mut phase = 0.0;
    let mut current = frames[0];
    let mut ac = acoustics(&current.tv);
    let mut out = Vec::with_capacity(n);
    for s in 0..n {
        if s % params.update_every == 0 {
            current = interp(frames, s as f64 / params.control_hop as f64);
            ac = acoustics(&current.tv);
            for (r, &(f, bw)) in formants.iter_mut().zip(&ac.formants) {
                r.tune(f, bw, fs);
            }
            nasal_pole.tune(270.0, 100.0, fs);
            nasal_zero.tune(ac.nasal_zero, 100.0, fs);
        }
        phase += current.f0 / fs;
        if phase >= 1.0 {
            phase -= 1.0;
        }
        let noise: f64 = rng.sample(StandardNormal);
        let src = glottal(phase) + ac.breath * noise;
        tilt_state = (1.0 - current.tilt) * src + current.tilt * tilt_state;
        let mut y = nasal_pole.step(nasal_zero.step(tilt_state));
        for r in &mut formants {
            y = r.step(y);
        }
        let fn_: f64 = rng.sample(StandardNormal);
        let hp = fn_ - hp_prev;
        hp_prev = fn_;
        y += ac.frication * fric.step(hp);
        let floor: f64 = rng.sample(StandardNormal);
        out.push(params.output_gain * current.amp * ac.level * y + params.noise_floor * floor);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn steady(f0: f64, tv: [f64; 8], n: usize) -> Vec<TractFrame> {
        vec![TractFrame { f0, amp: 1.0, tilt: 0.5, tv }; n]
    }

    #[test]
    fn matched_nasal_pair_cancels() {
        let fs = 16_000.0;
        let (mut p, mut z) = (Resonator::default(), AntiResonator::default());
        p.tune(270.0, 100.0, fs);
        z.tune(270.0, 100.0, fs);
        for k in 0..200 {
            let x = ((k * 37 % 11) as f64 - 5.0) / 5.0;
            assert!((p.step(z.step(x)) - x).abs() < 1e-9);
        }
    }

    #[test]
    fn resonator_peaks_at_its_frequency() {
        let fs = 16_000.0;
        let gain = |f_in: f64| {
            let mut r = Resonator::default();
            r.tune(1000.0, 80.0, fs);
            let mut peak: f64 = 0.0;
            for k in 0..8000 {
                let y = r.step((2.0 * PI * f_in * k as f64 / fs).sin());
                if k > 4000 {
                    peak = peak.max(y.abs());
                }
            }
            peak
        };
        assert!(gain(1000.0) > 5.0 * gain(600.0));
        assert!(gain(1000.0) > 5.0 * gain(1600.0));
    }

    #[test]
    fn output_is_deterministic_and_finite() {
        let frames = steady(120.0, [0.3, -1.0, 0.5, 1.0, -0.2, 0.0, 0.7, -0.4], 50);
        let p = TractParams::default();
        let a = synthesize(&frames, &p, &mut ChaCha8Rng::seed_from_u64(1));
        let b = synthesize(&frames, &p, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a.len(), 49 * 80 + 1);
        assert_eq!(a, b);
        assert!(a.iter().all(|v| v.is_finite() && v.abs() < 1.0));
    }

    #[test]
    fn lip_aperture_raises_level() {
        let rms = |la: f64| {
            let mut tv = [0.0; 8];
            tv[3] = la;
            let y = synthesize(&steady(150.0, tv, 60), &TractParams::default(), &mut ChaCha8Rng::seed_from_u64(2));
            (y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64).sqrt()
        };
        assert!(rms(1.5) > 1.3 * rms(-1.5));
    }
}
