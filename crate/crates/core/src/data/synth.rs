//! Seeded synthetic graded corpus.
//!
//! Each query has a latent expressive intensity. Intensity raises the pitch
//! excursion (through arousal) and the amplitude modulation, and pushes
//! valence up, which brightens the source and widens articulatory movement.
//! Graders judge a blend of intensity and the perceived arousal and valence,
//! through noise; emotion grades are quantiles of
//! the realized pitch variability (arousal) and of a blend of spectral
//! brightness and articulatory movement (valence).
//! Transcripts come from one pool regardless of class.

use std::fs;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::tract::{synthesize, TractFrame, TractParams};
use super::{write_manifest_file, GradedQuery, Vote};
use crate::dsp::{write_wav, AudioBuffer, FrameSpec};
use crate::error::{Error, Result};
use crate::features::{write_feat_file, FeatureKind, FeatureMatrix, Meta};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub min_duration_s: f64,
    pub max_duration_s: f64,
    /// Probability of drawing intensity from the upper half.
    pub expressive_rate: f64,
    /// Pitch standard deviation (semitones) added at full arousal and intensity.
    pub pitch_range_st: f64,
    /// Amplitude-modulation depth at full intensity.
    pub am_depth: f64,
    /// Spread of articulatory targets added at full valence (z-units).
    pub articulation_range: f64,
    /// Source tilt change between lowest and highest valence.
    pub tilt_range: f64,
    /// Weight of intensity in arousal and valence (the rest is independent).
    pub emotion_coupling: f64,
    /// Share of the graders' impression taken from perceived arousal and valence.
    pub perception_emotion_weight: f64,
    /// Share of articulatory movement (against source brightness) in valence grades.
    pub valence_articulation_weight: f64,
    pub grader_noise: f64,
    pub emotion_vote_noise: f64,
    pub all_not_sure_rate: f64,
    pub tract: TractParams,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            min_duration_s: 1.0,
            max_duration_s: 3.0,
            expressive_rate: 0.4,
            pitch_range_st: 4.0,
            am_depth: 0.5,
            articulation_range: 0.8,
            tilt_range: 0.3,
            emotion_coupling: 0.6,
            perception_emotion_weight: 0.7,
            valence_articulation_weight: 0.8,
            grader_noise: 0.1,
            emotion_vote_noise: 0.08,
            all_not_sure_rate: 0.02,
            tract: TractParams::default(),
        }
    }
}

/// Generator-side truth for one query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Latent {
    pub intensity: f64,
    pub arousal: f64,
    pub valence: f64,
    /// Realized pitch standard deviation in semitones.
    pub pitch_std_st: f64,
    pub tilt: f64,
    /// Mean temporal standard deviation of the eight TV trajectories.
    pub articulation: f64,
}

#[derive(Debug, Clone)]
pub struct SynthQuery {
    pub query: GradedQuery,
    pub audio: AudioBuffer,
    /// True tract variables at the analysis frame centers (default framing).
    pub tvs: FeatureMatrix,
    pub latent: Latent,
}

const PHRASES: &[&str] = &[
    "what's the weather like today",
    "play some music",
    "set a timer for ten minutes",
    "turn off the lights",
    "what time is it",
    "tell me a joke",
    "call mom",
    "add milk to my shopping list",
    "how tall is mount everest",
    "play the news",
    "turn up the volume",
    "what's on my calendar",
    "stop",
    "remind me to call the doctor",
    "how far is the moon",
    "play my workout playlist",
    "set an alarm for seven",
    "what's the score of the game",
    "turn on the kitchen lights",
    "how do you spell necessary",
    "tell me something interesting",
    "what's the weather tomorrow",
    "play jazz music",
    "pause",
];

const INTENTS: &[&str] = &["resource", "accidental", "prank"];

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Smooth curve through `targets` placed at `knots` (sample positions), evaluated at `pos`.
fn cosine_path(knots: &[f64], targets: &[f64], pos: f64) -> f64 {
    let k = knots.partition_point(|&x| x <= pos);
    if k == 0 {
        return targets[0];
    }
    if k >= knots.len() {
        return targets[targets.len() - 1];
    }
    let w = (pos - knots[k - 1]) / (knots[k] - knots[k - 1]);
    let s = 0.5 - 0.5 * (std::f64::consts::PI * w).cos();
    targets[k - 1] + (targets[k] - targets[k - 1]) * s
}

fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (m, (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt())
}

struct Draft {
    frames: Vec<TractFrame>,
    latent: Latent,
    transcript: String,
    intent: String,
    expr_votes: Vec<Vote>,
}

fn draft(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Draft {
    let fs = cfg.tract.sample_rate_hz as f64;
    let hop = cfg.tract.control_hop;
    let intensity = if rng.random_bool(cfg.expressive_rate) { rng.random_range(0.5..1.0) } else { rng.random_range(0.0..0.5) };
    let c = cfg.emotion_coupling;
    let arousal = (c * intensity + (1.0 - c) * rng.random::<f64>()).clamp(0.0, 1.0);
    let valence = (c * intensity + (1.0 - c) * rng.random::<f64>()).clamp(0.0, 1.0);

    let dur = rng.random_range(cfg.min_duration_s..=cfg.max_duration_s);
    let n_ctrl = ((dur * fs) as usize).div_ceil(hop) + 1;
    let span = (n_ctrl - 1) as f64;

    // syllable knots in control-frame units
    let mut knots = vec![0.0];
    while *knots.last().unwrap() < span {
        let step = rng.random_range(0.15..0.3) * fs / hop as f64;
        knots.push(knots.last().unwrap() + step);
    }
    let n_knots = knots.len();

    let exc = 0.6 + cfg.articulation_range * valence;
    let tv_targets: Vec<Vec<f64>> = (0..8).map(|_| (0..n_knots).map(|_| exc * normal(rng)).collect()).collect();
    let accents: Vec<f64> = (0..n_knots).map(|_| normal(rng)).collect();
    let base_f0 = (95f64.ln() + rng.random::<f64>() * (230f64 / 95.0).ln()).exp();
    let pitch_sd = 0.15 + cfg.pitch_range_st * arousal * intensity;
    let am = cfg.am_depth * intensity * rng.random_range(0.2..1.0);
    let am_hz = rng.random_range(3.0..6.0);
    let am_phase = rng.random_range(0.0..std::f64::consts::TAU);
    let tilt = (0.75 - cfg.tilt_range * (valence - 0.5) + 0.03 * normal(rng)).clamp(0.2, 0.97);
    let declination = rng.random_range(0.3..1.0);

    let raw: Vec<f64> = (0..n_ctrl).map(|i| cosine_path(&knots, &accents, i as f64)).collect();
    let (rm, rs) = mean_std(&raw);
    let semitones: Vec<f64> = raw
        .iter()
        .enumerate()
        .map(|(i, r)| pitch_sd * (r - rm) / rs.max(1e-9) + declination * (0.5 - i as f64 / span))
        .collect();
    let pitch_std_st = mean_std(&semitones).1;

    let ramp = 0.03 * fs / hop as f64;
    let frames = (0..n_ctrl)
        .map(|i| {
            let t = i as f64 * hop as f64 / fs;
            let edge = ((i as f64 / ramp).min((span - i as f64) / ramp)).clamp(0.0, 1.0);
            let syl = {
                let k = knots.partition_point(|&x| x <= i as f64).clamp(1, n_knots - 1);
                let w = (i as f64 - knots[k - 1]) / (knots[k] - knots[k - 1]);
                0.55 + 0.45 * (std::f64::consts::PI * w).sin()
            };
            let amp = edge * syl * (am * (std::f64::consts::TAU * am_hz * t + am_phase).sin()).exp();
            let mut tv = [0.0; 8];
            for (k, v) in tv.iter_mut().enumerate() {
                *v = cosine_path(&knots, &tv_targets[k], i as f64);
            }
            let f0 = (base_f0 * 2f64.powf(semitones[i] / 12.0)).clamp(60.0, 400.0);
            TractFrame { f0, amp, tilt, tv }
        })
        .collect::<Vec<TractFrame>>();
    let articulation = (0..8).map(|k| mean_std(&frames.iter().map(|f| f.tv[k]).collect::<Vec<_>>()).1).sum::<f64>() / 8.0;

    let expr_votes = if rng.random_bool(cfg.all_not_sure_rate) {
        vec![Vote::NotSure; 4]
    } else {
        (0..4)
            .map(|_| {
                let w = cfg.perception_emotion_weight;
                let p = (1.0 - w) * intensity + w * 0.5 * (arousal + valence) + cfg.grader_noise * normal(rng);
                if p > 0.55 {
                    Vote::Yes
                } else if p > 0.42 {
                    Vote::NotSure
                } else {
                    Vote::No
                }
            })
            .collect()
    };
    Draft {
        frames,
        latent: Latent { intensity, arousal, valence, pitch_std_st, tilt, articulation },
        transcript: PHRASES.choose(rng).unwrap().to_string(),
        intent: INTENTS.choose(rng).unwrap().to_string(),
        expr_votes,
    }
}

/// Quantile ranks in [0, 1]; ties keep input order.
fn quantiles(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut q = vec![0.0; x.len()];
    let denom = (x.len().max(2) - 1) as f64;
    for (r, &i) in idx.iter().enumerate() {
        q[i] = r as f64 / denom;
    }
    q
}

fn grade_votes(q: f64, noise: f64, rng: &mut ChaCha8Rng) -> Vec<u8> {
    (0..4).map(|_| 1 + ((3.0 * (q + noise * normal(rng)).clamp(0.0, 1.0)) as u8).min(2)).collect()
}

/// Generates `n` queries with audio, grades and true tract variables.
pub fn synth_corpus(n: usize, seed: u64, cfg: &SynthConfig) -> Result<Vec<SynthQuery>> {
    if n < 100 {
        return Err(Error::InsufficientData(format!("synthetic corpus needs at least 100 queries, asked for {n}")));
    }
    if !(cfg.min_duration_s > 0.1 && cfg.min_duration_s <= cfg.max_duration_s) {
        return Err(Error::Format("invalid duration range".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let drafts: Vec<Draft> = (0..n).map(|_| draft(cfg, &mut rng)).collect();
    let q_arousal = quantiles(&drafts.iter().map(|d| d.latent.pitch_std_st).collect::<Vec<_>>());
    let w = cfg.valence_articulation_weight;
    let q_bright = quantiles(&drafts.iter().map(|d| -d.latent.tilt).collect::<Vec<_>>());
    let q_moves = quantiles(&drafts.iter().map(|d| d.latent.articulation).collect::<Vec<_>>());
    let q_valence = quantiles(&q_bright.iter().zip(&q_moves).map(|(b, m)| (1.0 - w) * b + w * m).collect::<Vec<_>>());

    let spec = FrameSpec::default();
    let fs = cfg.tract.sample_rate_hz;
    let hop = cfg.tract.control_hop as f64;
    let (win, fhop) = (spec.window_len(fs), spec.hop_len(fs));
    let mut out = Vec::with_capacity(n);
    for (i, d) in drafts.into_iter().enumerate() {
        let valence_votes = grade_votes(q_valence[i], cfg.emotion_vote_noise, &mut rng);
        let arousal_votes = grade_votes(q_arousal[i], cfg.emotion_vote_noise, &mut rng);
        // quantized as in the written WAV, so in-memory and on-disk audio agree
        let samples = synthesize(&d.frames, &cfg.tract, &mut rng)
            .into_iter()
            .map(|s| (s * 32768.0).round().clamp(-32768.0, 32767.0) / 32768.0)
            .collect();
        let audio = AudioBuffer::new(samples, fs)?;

        let t = spec.frame_count(audio.len(), fs);
        let mut tv = Vec::with_capacity(t * 8);
        for f in 0..t {
            let pos = (f * fhop + win / 2) as f64 / hop;
            let j = (pos.floor() as usize).min(d.frames.len() - 1);
            let k = (j + 1).min(d.frames.len() - 1);
            let w = pos - j as f64;
            for c in 0..8 {
                tv.push(d.frames[j].tv[c] + (d.frames[k].tv[c] - d.frames[j].tv[c]) * w);
            }
        }
        let tvs = FeatureMatrix::new(FeatureKind::Tv8, t, 8, tv, Meta::new())?;

        let id = format!("q{i:05}");
        let query = GradedQuery {
            audio: format!("wav/{id}.wav"),
            id,
            transcript: d.transcript,
            expr_votes: d.expr_votes,
            valence_votes,
            arousal_votes,
            intent: Some(d.intent),
        };
        out.push(SynthQuery { query, audio, tvs, latent: d.latent });
    }
    Ok(out)
}

/// Writes `manifest.jsonl`, `wav/<id>.wav` and `tv/<id>.feat` under `dir`.
pub fn write_corpus(dir: impl AsRef<Path>, corpus: &[SynthQuery]) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir.join("wav"))?;
    fs::create_dir_all(dir.join("tv"))?;
    for q in corpus {
        write_wav(dir.join(&q.query.audio), &q.audio)?;
        write_feat_file(dir.join("tv").join(format!("{}.feat", q.query.id)), &q.tvs)?;
    }
    let queries: Vec<GradedQuery> = corpus.iter().map(|q| q.query.clone()).collect();
    write_manifest_file(dir.join("manifest.jsonl"), &queries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_span_unit_interval() {
        assert_eq!(quantiles(&[3.0, 1.0, 2.0]), vec![1.0, 0.0, 0.5]);
    }

    #[test]
    fn cosine_path_hits_targets() {
        let k = [0.0, 10.0, 20.0];
        let t = [1.0, -1.0, 3.0];
        assert_eq!(cosine_path(&k, &t, 10.0), -1.0);
        assert!(cosine_path(&k, &t, 5.0).abs() < 1e-12);
        assert_eq!(cosine_path(&k, &t, 25.0), 3.0);
    }

    #[test]
    fn small_corpora_are_rejected() {
        assert!(matches!(synth_corpus(99, 0, &SynthConfig::default()), Err(Error::InsufficientData(_))));
    }
}
