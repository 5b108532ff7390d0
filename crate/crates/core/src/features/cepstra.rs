use super::dct::{apply, dct_matrix};
use super::gammatone::{erb_bandwidth_hz, erb_centers};
use super::{add_deltas, FeatureKind, FeatureMatrix, FilterbankKind, FilterbankSpec, N_CEPSTRA, N_STATIC_INVERSION};
use crate::dsp::PowerSpectrogram;
use crate::error::Result;

pub(crate) const LOG_FLOOR: f64 = 1e-10;

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular mel weights, `n_filters × n_bins`, evaluated at the bin frequencies.
pub fn mel_weights(fb: &FilterbankSpec, fft_size: usize, sample_rate_hz: u32) -> Vec<Vec<f64>> {
    let (lo, hi) = (hz_to_mel(fb.f_lo_hz), hz_to_mel(fb.f_hi_hz));
    let edges: Vec<f64> = (0..fb.n_filters + 2)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (fb.n_filters + 1) as f64))
        .collect();
    let n_bins = fft_size / 2 + 1;
    (0..fb.n_filters)
        .map(|j| {
            let (l, c, r) = (edges[j], edges[j + 1], edges[j + 2]);
            (0..n_bins)
                .map(|k| {
                    let f = k as f64 * sample_rate_hz as f64 / fft_size as f64;
                    if f <= l || f >= r {
                        0.0
                    } else if f <= c {
                        (f - l) / (c - l)
                    } else {
                        (r - f) / (r - c)
                    }
                })
                .collect()
        })
        .collect()
}

/// Squared magnitude responses of 4th-order gammatone filters at ERB-spaced centers.
pub fn gammatone_weights(fb: &FilterbankSpec, fft_size: usize, sample_rate_hz: u32) -> Vec<Vec<f64>> {
    let n_bins = fft_size / 2 + 1;
    erb_centers(fb.f_lo_hz, fb.f_hi_hz, fb.n_filters)
        .into_iter()
        .map(|fc| {
            let b = erb_bandwidth_hz(fc);
            (0..n_bins)
                .map(|k| {
                    let f = k as f64 * sample_rate_hz as f64 / fft_size as f64;
                    let u = (f - fc) / b;
                    (1.0 + u * u).powi(-4)
                })
                .collect()
        })
        .collect()
}

fn log_cepstra(ps: &PowerSpectrogram, weights: &[Vec<f64>], n_ceps: usize) -> Vec<f64> {
    let dct = dct_matrix(weights.len(), n_ceps);
    let mut out = Vec::with_capacity(ps.n_frames() * n_ceps);
    for frame in &ps.frames {
        let energies: Vec<f64> = weights
            .iter()
            .map(|w| w.iter().zip(frame).map(|(a, b)| a * b).sum::<f64>().max(LOG_FLOOR).ln())
            .collect();
        out.extend(apply(&dct, &energies));
    }
    out
}

fn mel_cepstra(ps: &PowerSpectrogram, fb: &FilterbankSpec, n_ceps: usize, kind: FeatureKind) -> Result<FeatureMatrix> {
    fb.check(FilterbankKind::MelTriangular, ps.sample_rate_hz, n_ceps)?;
    let w = mel_weights(fb, ps.spec.fft_size, ps.sample_rate_hz);
    let data = log_cepstra(ps, &w, n_ceps);
    let mut meta = fb.meta();
    meta.insert("log_floor".into(), LOG_FLOOR.into());
    FeatureMatrix::new(kind, ps.n_frames(), n_ceps, data, meta)
}

/// 20 mel cepstra, c0 through c19.
pub fn mfcc(ps: &PowerSpectrogram, fb: &FilterbankSpec) -> Result<FeatureMatrix> {
    mel_cepstra(ps, fb, N_CEPSTRA, FeatureKind::Mfcc20)
}

/// The 13 static mel cepstra feeding the inversion stream.
pub fn mfcc13(ps: &PowerSpectrogram, fb: &FilterbankSpec) -> Result<FeatureMatrix> {
    mel_cepstra(ps, fb, N_STATIC_INVERSION, FeatureKind::Mfcc13)
}

/// 13 statics with delta and delta-delta.
pub fn mfcc39(ps: &PowerSpectrogram, fb: &FilterbankSpec) -> Result<FeatureMatrix> {
    add_deltas(&mfcc13(ps, fb)?)
}

/// 20 gammatone cepstra with log compression.
pub fn gcc(ps: &PowerSpectrogram, fb: &FilterbankSpec) -> Result<FeatureMatrix> {
    fb.check(FilterbankKind::GammatoneErb, ps.sample_rate_hz, N_CEPSTRA)?;
    let w = gammatone_weights(fb, ps.spec.fft_size, ps.sample_rate_hz);
    let data = log_cepstra(ps, &w, N_CEPSTRA);
    let mut meta = fb.meta();
    meta.insert("compression".into(), "log".into());
    FeatureMatrix::new(FeatureKind::Gcc20, ps.n_frames(), N_CEPSTRA, data, meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{frame_power_spectrum, AudioBuffer, FrameSpec, SAMPLE_RATE_HZ};
    use crate::error::Error;

    fn spectrogram(frames: Vec<Vec<f64>>) -> PowerSpectrogram {
        PowerSpectrogram { frames, spec: FrameSpec::default(), sample_rate_hz: SAMPLE_RATE_HZ }
    }

    #[test]
    fn zero_power_gives_log_floor_cepstrum() {
        let ps = spectrogram(vec![vec![0.0; 257]]);
        for m in [mfcc(&ps, &FilterbankSpec::mel()).unwrap(), gcc(&ps, &FilterbankSpec::gammatone()).unwrap()] {
            assert_eq!(m.cols(), 20);
            let c0 = 40f64.sqrt() * LOG_FLOOR.ln();
            assert!((m.get(0, 0) - c0).abs() < 1e-9);
            for j in 1..20 {
                assert!(m.get(0, j).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn gain_moves_only_c0() {
        let audio: Vec<f64> = (0..4000).map(|n| ((n * 7919) % 2003) as f64 / 2003.0 - 0.5).collect();
        let ps = frame_power_spectrum(&AudioBuffer::new(audio, SAMPLE_RATE_HZ).unwrap(), &FrameSpec::default()).unwrap();
        let mut ps4 = ps.clone();
        for f in &mut ps4.frames {
            for p in f.iter_mut() {
                *p *= 4.0;
            }
        }
        let (a, b) = (mfcc(&ps, &FilterbankSpec::mel()).unwrap(), mfcc(&ps4, &FilterbankSpec::mel()).unwrap());
        for t in 0..a.rows() {
            assert!((b.get(t, 0) - a.get(t, 0) - 4f64.ln() * 40f64.sqrt()).abs() < 1e-9);
            for j in 1..20 {
                assert!((b.get(t, j) - a.get(t, j)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn filterbank_kind_and_size_checked() {
        let ps = spectrogram(vec![vec![1.0; 257]]);
        assert!(matches!(mfcc(&ps, &FilterbankSpec::gammatone()), Err(Error::BadFilterbank(_))));
        assert!(matches!(gcc(&ps, &FilterbankSpec::mel()), Err(Error::BadFilterbank(_))));
        let small = FilterbankSpec { n_filters: 19, ..FilterbankSpec::mel() };
        assert!(matches!(mfcc(&ps, &small), Err(Error::BadFilterbank(_))));
    }

    #[test]
    fn gammatone_rows_positive() {
        let w = gammatone_weights(&FilterbankSpec::gammatone(), 512, SAMPLE_RATE_HZ);
        assert_eq!(w.len(), 40);
        for row in &w {
            let s: f64 = row.iter().sum();
            assert!(s.is_finite() && s > 0.0);
        }
    }

    #[test]
    fn mel_filters_all_nonempty() {
        let w = mel_weights(&FilterbankSpec::mel(), 512, SAMPLE_RATE_HZ);
        assert!(w.iter().all(|r| r.iter().sum::<f64>() > 0.0));
    }
}
