//! Seeded synthetic forward map from tract variables to cepstral features,
//! giving inversion experiments a known ground truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::N_TVS;
use crate::error::Result;
use crate::features::{splice, FeatureKind, FeatureMatrix, Meta, INVERSION_CONTEXT};

/// Spliced features and the TVs that produced them.
#[derive(Debug, Clone)]
pub struct OraclePair {
    pub features: FeatureMatrix,
    pub tvs: FeatureMatrix,
}

/// `feat = W2 · tanh(W1 · tv + b1) + b2 + noise`, 8 → hidden → 39 per frame.
#[derive(Debug, Clone)]
pub struct ForwardMap {
    hidden: usize,
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
    pub noise_std: f64,
}

const OUT: usize = 39;

impl ForwardMap {
    pub fn new(seed: u64, hidden: usize, noise_std: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gauss = |n: usize, scale: f64| (0..n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect::<Vec<_>>();
        let w1 = gauss(hidden * N_TVS, 1.0 / (N_TVS as f64).sqrt());
        let b1 = gauss(hidden, 0.3);
        let w2 = gauss(OUT * hidden, 1.0 / (hidden as f64).sqrt());
        let b2 = gauss(OUT, 1.0);
        Self { hidden, w1, b1, w2, b2, noise_std }
    }

    /// Noise-free 39-d image of one TV frame.
    pub fn map_frame(&self, tv: &[f64]) -> Vec<f64> {
        let h: Vec<f64> = (0..self.hidden)
            .map(|i| {
                let z: f64 = self.w1[i * N_TVS..(i + 1) * N_TVS].iter().zip(tv).map(|(w, x)| w * x).sum();
                (z + self.b1[i]).tanh()
            })
            .collect();
        (0..OUT).map(|o| self.w2[o * self.hidden..(o + 1) * self.hidden].iter().zip(&h).map(|(w, x)| w * x).sum::<f64>() + self.b2[o]).collect()
    }

    /// Band-limited random TV trajectories: per TV, three sinusoids between
    /// 0.3 and 3 Hz (at 100 frames/s) with unit expected variance.
    pub fn random_tvs(frames: usize, rng: &mut ChaCha8Rng) -> FeatureMatrix {
        let comps: Vec<[(f64, f64, f64); 3]> = (0..N_TVS)
            .map(|_| {
                let mut c = [(0.0, 0.0, 0.0); 3];
                for x in &mut c {
                    *x = (rng.random_range(0.3..3.0) / 100.0, rng.random_range(0.0..std::f64::consts::TAU), rng.random_range(0.5..1.0));
                }
                c
            })
            .collect();
        let mut data = Vec::with_capacity(frames * N_TVS);
        for t in 0..frames {
            for c in &comps {
                let power: f64 = c.iter().map(|(_, _, a)| a * a / 2.0).sum();
                let v: f64 = c.iter().map(|(f, p, a)| a * (std::f64::consts::TAU * f * t as f64 + p).sin()).sum();
                data.push(v / power.sqrt());
            }
        }
        FeatureMatrix::new(FeatureKind::Tv8, frames, N_TVS, data, Meta::new()).expect("finite by construction")
    }

    /// `n` utterances of `min_frames..=max_frames` frames each.
    pub fn generate(&self, n: usize, min_frames: usize, max_frames: usize, seed: u64) -> Result<Vec<OraclePair>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let frames = rng.random_range(min_frames..=max_frames);
            let tvs = Self::random_tvs(frames, &mut rng);
            let mut feat = Vec::with_capacity(frames * OUT);
            for t in 0..frames {
                for v in self.map_frame(tvs.row(t)) {
                    feat.push(v + self.noise_std * rng.sample::<f64, _>(StandardNormal));
                }
            }
            let m39 = FeatureMatrix::new(FeatureKind::Mfcc39, frames, OUT, feat, Meta::new())?;
            out.push(OraclePair { features: splice(&m39, INVERSION_CONTEXT), tvs });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_determinism() {
        let map = ForwardMap::new(3, 16, 0.05);
        let a = map.generate(4, 30, 60, 9).unwrap();
        let b = map.generate(4, 30, 60, 9).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.features, y.features);
            assert_eq!(x.features.kind(), FeatureKind::Spliced429);
            assert_eq!(x.features.cols(), 429);
            assert_eq!(x.tvs.cols(), 8);
            assert_eq!(x.tvs.rows(), x.features.rows());
        }
    }

    #[test]
    fn trajectories_have_roughly_unit_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut total = 0.0;
        let reps = 40;
        for _ in 0..reps {
            let tv = ForwardMap::random_tvs(2000, &mut rng);
            let col = tv.column(0);
            total += col.iter().map(|v| v * v).sum::<f64>() / col.len() as f64;
        }
        let var = total / reps as f64;
        assert!((var - 1.0).abs() < 0.2, "{var}");
    }
}
