//! End-to-end run on a seeded synthetic corpus: extraction, inversion,
//! expression, emotion, fusion and the lexical baseline.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use xprs_core::articulatory::{estimate_tvs_batch, train_inversion, InversionConfig};
use xprs_core::data::{filter_all_not_sure, make_splits, synth_corpus, DatasetSplit, GradedQuery, QueryLabel, SplitRatios, SynthConfig};
use xprs_core::dsp::{frame_power_spectrum, FrameSpec};
use xprs_core::features::{concat, f0v, mfcc, mfcc39, nmcc, splice, FeatureMatrix, FilterbankSpec, INVERSION_CONTEXT};
use xprs_core::metrics::{ccc, eer, ScoredSet};
use xprs_core::models::{
    extract_embeddings, predict_emotion, score_bow, score_expression, score_fusion, train_bow_baseline, train_emotion,
    train_expression, train_fusion, BowConfig, EmbeddingSet, EmotionConfig, ExpressionConfig, FusionConfig,
};
use xprs_core::neural::ModelCheckpoint;

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub n_queries: usize,
    pub seed: u64,
    pub synth: SynthConfig,
    pub ratios: SplitRatios,
    pub inversion_utterances: usize,
    pub inversion: InversionConfig,
    pub expression: ExpressionConfig,
    pub emotion: EmotionConfig,
    pub fusion: FusionConfig,
    pub bow: BowConfig,
    /// Reuse checkpoints saved here by an earlier run with the same settings.
    pub cache_dir: Option<std::path::PathBuf>,
}

impl PipelineConfig {
    pub fn new(n_queries: usize, seed: u64) -> Self {
        let mut inversion = InversionConfig::default();
        inversion.train.max_epochs = 20;
        Self {
            n_queries,
            seed,
            synth: SynthConfig::default(),
            ratios: SplitRatios { pretrain: 60.0, balanced_train: 30.0, dev: 8.0, eval: 20.0 },
            inversion_utterances: 150,
            inversion,
            expression: ExpressionConfig::default(),
            emotion: EmotionConfig::default(),
            fusion: FusionConfig::default(),
            bow: BowConfig::default(),
            cache_dir: None,
        }
    }
}

/// Per-query base streams; composite inputs are concatenated on demand.
pub struct Streams {
    pub mfcc: FeatureMatrix,
    pub nmcc: FeatureMatrix,
    pub f0v: FeatureMatrix,
    pub tv: FeatureMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Input {
    Mfcc,
    MfccF0v,
    NmccF0v,
    MfccF0vTv,
}

impl Streams {
    pub fn input(&self, which: Input) -> FeatureMatrix {
        match which {
            Input::Mfcc => self.mfcc.clone(),
            Input::MfccF0v => concat(&self.mfcc, &self.f0v).unwrap(),
            Input::NmccF0v => concat(&self.nmcc, &self.f0v).unwrap(),
            Input::MfccF0vTv => concat(&concat(&self.mfcc, &self.f0v).unwrap(), &self.tv).unwrap(),
        }
    }
}

#[derive(Debug, Default, Clone)]
pub struct Results {
    pub bow_eer: f64,
    pub expr_eer: HashMap<Input, f64>,
    /// (valence CCC, arousal CCC) on the eval partition
    pub emo_ccc: HashMap<Input, (f64, f64)>,
    pub ae_eer: f64,
    pub ae_ee_eer: f64,
    pub ae2_ee_eer: f64,
    pub timings: Vec<(String, Duration)>,
}

pub struct Pipeline {
    pub cfg: PipelineConfig,
    pub split: DatasetSplit,
    pub labels: HashMap<String, QueryLabel>,
    pub transcripts: HashMap<String, String>,
    pub streams: HashMap<String, Streams>,
    pub expression: HashMap<Input, ModelCheckpoint>,
    pub emotion: HashMap<Input, ModelCheckpoint>,
    pub results: Results,
}

fn timed<T>(timings: &mut Vec<(String, Duration)>, name: &str, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let out = f();
    timings.push((name.to_string(), t.elapsed()));
    out
}

fn cached(dir: &Option<std::path::PathBuf>, name: &str, train: impl FnOnce() -> ModelCheckpoint) -> ModelCheckpoint {
    let Some(dir) = dir else { return train() };
    let path = dir.join(format!("{name}.xprs"));
    if let Ok(ck) = ModelCheckpoint::read_file(&path) {
        return ck;
    }
    let ck = train();
    std::fs::create_dir_all(dir).unwrap();
    ck.write_file(&path).unwrap();
    ck
}

fn train_inversion_on_synth(cfg: &PipelineConfig) -> ModelCheckpoint {
    let corpus = synth_corpus(cfg.inversion_utterances.max(100), cfg.seed ^ 0x9e37_79b9, &cfg.synth).unwrap();
    let spec = FrameSpec::default();
    let spliced: Vec<FeatureMatrix> = corpus
        .iter()
        .map(|q| splice(&mfcc39(&frame_power_spectrum(&q.audio, &spec).unwrap(), &FilterbankSpec::mel()).unwrap(), INVERSION_CONTEXT))
        .collect();
    let pairs: Vec<(&FeatureMatrix, &FeatureMatrix)> = spliced.iter().zip(&corpus).map(|(f, q)| (f, &q.tvs)).collect();
    train_inversion(&pairs, &cfg.inversion).unwrap()
}

impl Pipeline {
    pub fn run(cfg: PipelineConfig) -> Self {
        let mut timings = Vec::new();
        let corpus = timed(&mut timings, "synthesize", || synth_corpus(cfg.n_queries, cfg.seed, &cfg.synth).unwrap());
        let queries: Vec<GradedQuery> = filter_all_not_sure(corpus.iter().map(|q| q.query.clone()).collect());
        let split = make_splits(&queries, cfg.ratios, cfg.seed).unwrap();
        let labels: HashMap<String, QueryLabel> = queries.iter().map(|q| (q.id.clone(), q.label().unwrap())).collect();
        let transcripts: HashMap<String, String> = queries.iter().map(|q| (q.id.clone(), q.transcript.clone())).collect();

        let inversion = timed(&mut timings, "train inversion", || cached(&cfg.cache_dir, "inversion", || train_inversion_on_synth(&cfg)));

        let spec = FrameSpec::default();
        let kept: Vec<_> = corpus.iter().filter(|q| labels.contains_key(&q.query.id)).collect();
        let mut streams = HashMap::new();
        timed(&mut timings, "extract features", || {
            for group in kept.chunks(64) {
                let mut m39 = Vec::new();
                let mut base = Vec::new();
                for q in group {
                    let ps = frame_power_spectrum(&q.audio, &spec).unwrap();
                    let n = nmcc(&q.audio, &FilterbankSpec::gammatone(), &spec).unwrap();
                    base.push((mfcc(&ps, &FilterbankSpec::mel()).unwrap(), n, f0v(&q.audio, &spec).unwrap()));
                    m39.push(mfcc39(&ps, &FilterbankSpec::mel()).unwrap());
                }
                let refs: Vec<&FeatureMatrix> = m39.iter().collect();
                let tvs = estimate_tvs_batch(&refs, &inversion).unwrap();
                for ((q, (mfcc, nmcc, f0v)), tv) in group.iter().zip(base).zip(tvs) {
                    streams.insert(q.query.id.clone(), Streams { mfcc, nmcc, f0v, tv });
                }
            }
        });
        drop(corpus);

        let mut p = Pipeline {
            cfg,
            split,
            labels,
            transcripts,
            streams,
            expression: HashMap::new(),
            emotion: HashMap::new(),
            results: Results::default(),
        };
        p.results.timings = timings;
        p.run_models();
        p
    }

    fn inputs(&self, which: Input, ids: &[String]) -> Vec<FeatureMatrix> {
        ids.iter().map(|i| self.streams[i].input(which)).collect()
    }

    fn binary(&self, ids: &[String]) -> Vec<bool> {
        ids.iter().map(|i| self.labels[i].binary_expressive).collect()
    }

    fn emotion_targets(&self, ids: &[String]) -> Vec<[f64; 2]> {
        ids.iter().map(|i| [self.labels[i].valence, self.labels[i].arousal]).collect()
    }

    fn eval_eer(&self, scores: Vec<f64>) -> f64 {
        eer(&ScoredSet::new(scores, self.binary(&self.split.eval)).unwrap()).unwrap()
    }

    fn labeled<'a>(&self, m: &'a [FeatureMatrix], ids: &[String]) -> Vec<(&'a FeatureMatrix, bool)> {
        m.iter().zip(ids).map(|(f, i)| (f, self.labels[i].binary_expressive)).collect()
    }

    fn train_expr(&self, which: Input) -> ModelCheckpoint {
        let s = &self.split;
        let (pre, ft, cv) = (self.inputs(which, &s.pretrain), self.inputs(which, &s.balanced_train), self.inputs(which, &s.dev));
        train_expression(
            &self.labeled(&pre, &s.pretrain),
            &self.labeled(&ft, &s.balanced_train),
            &self.labeled(&cv, &s.dev),
            &self.cfg.expression,
        )
        .unwrap()
    }

    fn train_emo(&self, which: Input) -> ModelCheckpoint {
        let s = &self.split;
        // pretrain only, so embeddings of the fusion training set are out of sample
        let (tr, cv) = (self.inputs(which, &s.pretrain), self.inputs(which, &s.dev));
        let (ytr, ycv) = (self.emotion_targets(&s.pretrain), self.emotion_targets(&s.dev));
        let tr: Vec<(&FeatureMatrix, [f64; 2])> = tr.iter().zip(ytr).collect();
        let cv: Vec<(&FeatureMatrix, [f64; 2])> = cv.iter().zip(ycv).collect();
        train_emotion(&tr, &cv, &self.cfg.emotion).unwrap()
    }

    fn embeddings(&self, ck: &ModelCheckpoint, which: Input, name: &str, ids: &[String]) -> EmbeddingSet {
        let feats = self.inputs(which, ids);
        let refs: Vec<&FeatureMatrix> = feats.iter().collect();
        EmbeddingSet::new(name, ids.to_vec(), extract_embeddings(ck, &refs).unwrap()).unwrap()
    }

    fn fusion_eer(&self, sources: &[(&ModelCheckpoint, Input, &str)], hidden: Option<usize>) -> f64 {
        let s = &self.split;
        let sets = |ids: &[String]| -> Vec<EmbeddingSet> { sources.iter().map(|(ck, w, n)| self.embeddings(ck, *w, n, ids)).collect() };
        let mut cfg = self.cfg.fusion.clone();
        cfg.hidden_dim = hidden.or(cfg.hidden_dim);
        let ck = train_fusion(&sets(&s.balanced_train), &self.binary(&s.balanced_train), &sets(&s.dev), &self.binary(&s.dev), &cfg).unwrap();
        self.eval_eer(score_fusion(&ck, &sets(&s.eval)).unwrap())
    }

    fn run_models(&mut self) {
        let mut timings = std::mem::take(&mut self.results.timings);
        let s = self.split.clone();

        let bow = timed(&mut timings, "bow baseline", || {
            let text = |ids: &[String]| -> Vec<(&str, bool)> {
                ids.iter().map(|i| (self.transcripts[i].as_str(), self.labels[i].binary_expressive)).collect()
            };
            let vocab: Vec<&str> = s.pretrain.iter().map(|i| self.transcripts[i].as_str()).collect();
            let ck = train_bow_baseline(&vocab, &text(&s.balanced_train), &text(&s.dev), &self.cfg.bow).unwrap();
            let eval: Vec<&str> = s.eval.iter().map(|i| self.transcripts[i].as_str()).collect();
            self.eval_eer(score_bow(&ck, &eval).unwrap())
        });
        self.results.bow_eer = bow;

        for which in [Input::Mfcc, Input::MfccF0v, Input::NmccF0v] {
            let ck = timed(&mut timings, &format!("expression {which:?}"), || cached(&self.cfg.cache_dir, &format!("expr_{which:?}"), || self.train_expr(which)));
            let feats = self.inputs(which, &s.eval);
            let refs: Vec<&FeatureMatrix> = feats.iter().collect();
            let e = self.eval_eer(score_expression(&ck, &refs).unwrap());
            self.results.expr_eer.insert(which, e);
            self.expression.insert(which, ck);
        }

        for which in [Input::Mfcc, Input::MfccF0v, Input::MfccF0vTv] {
            let ck = timed(&mut timings, &format!("emotion {which:?}"), || cached(&self.cfg.cache_dir, &format!("emo_{which:?}"), || self.train_emo(which)));
            let feats = self.inputs(which, &s.eval);
            let refs: Vec<&FeatureMatrix> = feats.iter().collect();
            let pred = predict_emotion(&ck, &refs).unwrap();
            let truth = self.emotion_targets(&s.eval);
            let col = |v: &[[f64; 2]], j: usize| -> Vec<f64> { v.iter().map(|r| r[j]).collect() };
            let cv = ccc(&col(&pred, 0), &col(&truth, 0)).unwrap();
            let ca = ccc(&col(&pred, 1), &col(&truth, 1)).unwrap();
            self.results.emo_ccc.insert(which, (cv, ca));
            self.emotion.insert(which, ck);
        }

        let ae = (&self.expression[&Input::NmccF0v], Input::NmccF0v, "ae");
        let ae2 = (&self.expression[&Input::MfccF0v], Input::MfccF0v, "ae2");
        let ee = (&self.emotion[&Input::MfccF0vTv], Input::MfccF0vTv, "ee");
        let (a, b, c) = timed(&mut timings, "fusion", || {
            (self.fusion_eer(&[ae], None), self.fusion_eer(&[ae, ee], None), self.fusion_eer(&[ae, ae2, ee], None))
        });
        self.results.ae_eer = a;
        self.results.ae_ee_eer = b;
        self.results.ae2_ee_eer = c;
        self.results.timings = timings;
    }
}
