use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde_json::{json, Value};
use xprs_core::articulatory::train_inversion;
use xprs_core::data::{
    filter_all_not_sure, make_splits, read_manifest_file, read_split_file, synth_corpus, write_corpus, write_split_file,
    DatasetSplit, GradedQuery,
};
use xprs_core::dsp::{frame_power_spectrum, load_wav};
use xprs_core::features::{mfcc39, read_feat_file, splice, write_feat_file, FeatureMatrix, FeatureStream, FilterbankSpec, INVERSION_CONTEXT};
use xprs_core::metrics::{roc_csv, EvalReport, ScoredSet};
use xprs_core::models::{
    extract_embeddings, predict_emotion, score_bow, score_expression, score_fusion, train_bow_baseline, train_emotion,
    train_expression, train_fusion, EmbeddingSet,
};
use xprs_core::neural::gradcheck::standard_suite;
use xprs_core::neural::{ModelCheckpoint, ModelKind};
use xprs_core::{Error, Result};

use crate::config::RunConfig;

/// Queries of a manifest with all-NotSure items removed, plus the directory
/// audio paths are relative to.
pub struct Corpus {
    pub root: PathBuf,
    pub queries: Vec<GradedQuery>,
}

impl Corpus {
    pub fn load(manifest: &Path) -> Result<Self> {
        let root = manifest.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { root, queries: filter_all_not_sure(read_manifest_file(manifest)?) })
    }

    fn by_id(&self) -> HashMap<&str, &GradedQuery> {
        self.queries.iter().map(|q| (q.id.as_str(), q)).collect()
    }

    fn get<'a>(&'a self, index: &HashMap<&str, &'a GradedQuery>, id: &str) -> Result<&'a GradedQuery> {
        index.get(id).copied().ok_or_else(|| Error::InsufficientData(format!("query {id} is not in the manifest")))
    }
}

fn require<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| Error::BadConfig(format!("missing --{flag}")))
}

fn feat_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.feat"))
}

fn load_feats(dir: &Path, ids: &[String]) -> Result<Vec<FeatureMatrix>> {
    ids.iter().map(|id| read_feat_file(feat_path(dir, id))).collect()
}

fn provenance_meta(cfg: &RunConfig) -> Vec<(String, Value)> {
    vec![("run_config".into(), cfg.to_value()), ("seed".into(), json!(cfg.seed))]
}

/// Side file carrying the run configuration for artifacts that cannot embed it.
fn write_sidecar(path: &Path, cfg: &RunConfig) -> Result<()> {
    let mut p = path.as_os_str().to_owned();
    p.push(".run.json");
    let doc = json!({ "run_config": cfg.to_value(), "seed": cfg.seed });
    fs::write(PathBuf::from(p), serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok(())
}

fn finish_checkpoint(mut ck: ModelCheckpoint, cfg: &RunConfig, out: &Path) -> Result<()> {
    ck.provenance.run_config = cfg.to_value();
    ck.provenance.seed = cfg.seed;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    ck.write_file(out)?;
    let mut log = String::from("stage,epoch,train_loss,cv_error,learning_rate,backoff\n");
    for st in &ck.provenance.stages {
        for e in &st.log {
            log.push_str(&format!("{},{},{},{},{},{}\n", st.name, e.epoch, e.train_loss, e.cv_error, e.learning_rate, e.backoff as u8));
        }
    }
    let log_path = out.with_extension("log.csv");
    fs::write(&log_path, log)?;
    write_sidecar(&log_path, cfg)
}

pub fn synth(cfg: &RunConfig, out: &Path) -> Result<()> {
    let corpus = synth_corpus(cfg.synth_queries, cfg.seed, &cfg.synth)?;
    write_corpus(out, &corpus)?;
    let queries = filter_all_not_sure(corpus.into_iter().map(|q| q.query).collect());
    write_split_file(out.join("split.json"), &make_splits(&queries, cfg.split, cfg.seed)?)?;
    fs::write(out.join("run.json"), serde_json::to_string_pretty(&json!({ "run_config": cfg.to_value(), "seed": cfg.seed }))? + "\n")?;
    Ok(())
}

/// Worker count from `XPRS_THREADS`, else the machine's parallelism.
pub fn thread_count() -> usize {
    std::env::var("XPRS_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

pub fn extract(cfg: &RunConfig, manifest: &Path, out: &Path, inversion: Option<&Path>) -> Result<()> {
    let stream: FeatureStream = cfg.feature.parse()?;
    let inv = inversion.map(ModelCheckpoint::read_file).transpose()?;
    let corpus = Corpus::load(manifest)?;
    fs::create_dir_all(out)?;
    let next = AtomicUsize::new(0);
    let errors: Mutex<Vec<(usize, Error)>> = Mutex::new(Vec::new());
    let work = || loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        let Some(q) = corpus.queries.get(i) else { break };
        let result = load_wav(corpus.root.join(&q.audio)).and_then(|audio| {
            let mut m = stream.extract(&audio, &cfg.frames, inv.as_ref())?;
            m.meta.insert("feature".into(), json!(stream.to_string()));
            m.meta.insert("id".into(), json!(q.id));
            m.meta.extend(provenance_meta(cfg));
            write_feat_file(feat_path(out, &q.id), &m)
        });
        if let Err(e) = result {
            errors.lock().expect("no poisoned workers").push((i, e));
        }
    };
    std::thread::scope(|s| {
        for _ in 0..thread_count().min(corpus.queries.len().max(1)) {
            s.spawn(work);
        }
    });
    let mut errors = errors.into_inner().expect("workers joined");
    errors.sort_by_key(|(i, _)| *i);
    match errors.into_iter().next() {
        Some((_, e)) => Err(e),
        None => Ok(()),
    }
}

pub fn train_inversion_cmd(cfg: &RunConfig, manifest: &Path, out: &Path) -> Result<()> {
    let corpus = Corpus::load(manifest)?;
    let mut spliced = Vec::new();
    let mut tvs = Vec::new();
    for q in &corpus.queries {
        let audio = load_wav(corpus.root.join(&q.audio))?;
        let m = mfcc39(&frame_power_spectrum(&audio, &cfg.frames)?, &FilterbankSpec::mel())?;
        spliced.push(splice(&m, INVERSION_CONTEXT));
        tvs.push(read_feat_file(corpus.root.join("tv").join(format!("{}.feat", q.id)))?);
    }
    let pairs: Vec<(&FeatureMatrix, &FeatureMatrix)> = spliced.iter().zip(&tvs).collect();
    finish_checkpoint(train_inversion(&pairs, &cfg.inversion)?, cfg, out)
}

fn labeled<'a>(feats: &'a [FeatureMatrix], ids: &[String], corpus: &Corpus) -> Result<Vec<(&'a FeatureMatrix, bool)>> {
    let index = corpus.by_id();
    ids.iter().zip(feats).map(|(id, f)| Ok((f, corpus.get(&index, id)?.label()?.binary_expressive))).collect()
}

fn emotion_targets(ids: &[String], corpus: &Corpus) -> Result<Vec<[f64; 2]>> {
    let index = corpus.by_id();
    ids.iter()
        .map(|id| {
            let l = corpus.get(&index, id)?.label()?;
            Ok([l.valence, l.arousal])
        })
        .collect()
}

pub fn train_expr(cfg: &RunConfig, manifest: &Path, split: &Path, features: &Path, out: &Path) -> Result<()> {
    let corpus = Corpus::load(manifest)?;
    let s = read_split_file(split)?;
    let (pre, ft, cv) = (load_feats(features, &s.pretrain)?, load_feats(features, &s.balanced_train)?, load_feats(features, &s.dev)?);
    let ck = train_expression(
        &labeled(&pre, &s.pretrain, &corpus)?,
        &labeled(&ft, &s.balanced_train, &corpus)?,
        &labeled(&cv, &s.dev, &corpus)?,
        &cfg.expression,
    )?;
    finish_checkpoint(ck, cfg, out)
}

pub fn train_emo(cfg: &RunConfig, manifest: &Path, split: &Path, features: &Path, out: &Path) -> Result<()> {
    let corpus = Corpus::load(manifest)?;
    let s = read_split_file(split)?;
    // the fusion network trains on balanced_train, so emotion embeddings there must be out of sample
    let (tr, cv) = (load_feats(features, &s.pretrain)?, load_feats(features, &s.dev)?);
    let tr: Vec<(&FeatureMatrix, [f64; 2])> = tr.iter().zip(emotion_targets(&s.pretrain, &corpus)?).collect();
    let cv: Vec<(&FeatureMatrix, [f64; 2])> = cv.iter().zip(emotion_targets(&s.dev, &corpus)?).collect();
    finish_checkpoint(train_emotion(&tr, &cv, &cfg.emotion)?, cfg, out)
}

fn ids_path(feat: &Path) -> PathBuf {
    let mut p = feat.as_os_str().to_owned();
    p.push(".ids");
    PathBuf::from(p)
}

pub fn embed(cfg: &RunConfig, model: &Path, manifest: &Path, features: &Path, out: &Path) -> Result<()> {
    let ck = ModelCheckpoint::read_file(model)?;
    let corpus = Corpus::load(manifest)?;
    let ids: Vec<String> = corpus.queries.iter().map(|q| q.id.clone()).collect();
    let feats = load_feats(features, &ids)?;
    let refs: Vec<&FeatureMatrix> = feats.iter().collect();
    let mut m = extract_embeddings(&ck, &refs)?;
    m.meta.extend(provenance_meta(cfg));
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_feat_file(out, &m)?;
    fs::write(ids_path(out), ids.iter().map(|i| format!("{i}\n")).collect::<String>())?;
    Ok(())
}

/// An embedding file with its id list, named after the file stem.
fn load_embedding_set(path: &Path) -> Result<EmbeddingSet> {
    let m = read_feat_file(path)?;
    let ids: Vec<String> = fs::read_to_string(ids_path(path))?.lines().map(str::to_owned).collect();
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("embedding").to_string();
    EmbeddingSet::new(name, ids, m)
}

/// Rows of `set` for `ids`, in that order.
fn select(set: &EmbeddingSet, ids: &[String]) -> Result<EmbeddingSet> {
    let index: HashMap<&str, usize> = set.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut data = Vec::with_capacity(ids.len() * set.matrix.cols());
    for id in ids {
        let &i = index.get(id.as_str()).ok_or_else(|| Error::SourceListMismatch(format!("{} lacks query {id}", set.name)))?;
        data.extend_from_slice(set.matrix.row(i));
    }
    let m = FeatureMatrix::new(set.matrix.kind(), ids.len(), set.matrix.cols(), data, set.matrix.meta.clone())?;
    EmbeddingSet::new(set.name.clone(), ids.to_vec(), m)
}

fn binary(ids: &[String], corpus: &Corpus) -> Result<Vec<bool>> {
    let index = corpus.by_id();
    ids.iter().map(|id| Ok(corpus.get(&index, id)?.label()?.binary_expressive)).collect()
}

pub fn train_fusion_cmd(cfg: &RunConfig, manifest: &Path, split: &Path, embeddings: &[PathBuf], out: &Path) -> Result<()> {
    let corpus = Corpus::load(manifest)?;
    let s = read_split_file(split)?;
    let sets: Vec<EmbeddingSet> = embeddings.iter().map(|p| load_embedding_set(p)).collect::<Result<_>>()?;
    let part = |ids: &[String]| -> Result<Vec<EmbeddingSet>> { sets.iter().map(|e| select(e, ids)).collect() };
    let ck = train_fusion(
        &part(&s.balanced_train)?,
        &binary(&s.balanced_train, &corpus)?,
        &part(&s.dev)?,
        &binary(&s.dev, &corpus)?,
        &cfg.fusion,
    )?;
    finish_checkpoint(ck, cfg, out)
}

/// Where evaluation scores come from.
pub struct ScoreSource<'a> {
    pub scores: Option<&'a Path>,
    pub model: Option<&'a Path>,
    pub manifest: Option<&'a Path>,
    pub split: Option<&'a Path>,
    pub features: Option<&'a Path>,
    pub embeddings: &'a [PathBuf],
}

/// CSV with a header naming `score` and `label` columns; labels are 0/1 or true/false.
pub fn read_scores_csv(path: &Path) -> Result<ScoredSet> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or_else(|| Error::Format("empty scores file".into()))?.split(',').map(str::trim).collect();
    let col = |name: &str| header.iter().position(|h| *h == name).ok_or_else(|| Error::Format(format!("scores file lacks a '{name}' column")));
    let (si, li) = (col("score")?, col("label")?);
    let (mut scores, mut labels) = (Vec::new(), Vec::new());
    for (n, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = || Error::Format(format!("scores line {}: '{line}'", n + 2));
        scores.push(f.get(si).and_then(|v| v.parse::<f64>().ok()).ok_or_else(bad)?);
        labels.push(match f.get(li).copied() {
            Some("1") | Some("true") => true,
            Some("0") | Some("false") => false,
            _ => return Err(bad()),
        });
    }
    ScoredSet::new(scores, labels)
}

/// Scores of the eval partition from a trained model.
fn model_scores(src: &ScoreSource, model: &Path) -> Result<ScoredSet> {
    let ck = ModelCheckpoint::read_file(model)?;
    let corpus = Corpus::load(require(&src.manifest, "manifest")?)?;
    let s: DatasetSplit = read_split_file(require(&src.split, "split")?)?;
    let ids = &s.eval;
    let scores = match ck.kind {
        ModelKind::Expression => {
            let feats = load_feats(require(&src.features, "features")?, ids)?;
            score_expression(&ck, &feats.iter().collect::<Vec<_>>())?
        }
        ModelKind::BowBaseline => {
            let index = corpus.by_id();
            let texts: Vec<&str> = ids.iter().map(|id| Ok(corpus.get(&index, id)?.transcript.as_str())).collect::<Result<_>>()?;
            score_bow(&ck, &texts)?
        }
        ModelKind::Fusion => {
            let sets: Vec<EmbeddingSet> =
                src.embeddings.iter().map(|p| select(&load_embedding_set(p)?, ids)).collect::<Result<_>>()?;
            score_fusion(&ck, &sets)?
        }
        other => {
            return Err(Error::WrongModelKind { expected: "Expression, BowBaseline or Fusion".into(), got: format!("{other:?}") })
        }
    };
    ScoredSet::new(scores, binary(ids, &corpus)?)
}

fn scored(src: &ScoreSource) -> Result<ScoredSet> {
    match (src.scores, src.model) {
        (Some(p), None) => read_scores_csv(p),
        (None, Some(m)) => model_scores(src, m),
        _ => Err(Error::BadConfig("give exactly one of --scores or --model".into())),
    }
}

pub struct EmotionSource<'a> {
    pub model: &'a Path,
    pub features: &'a Path,
}

pub fn eval(cfg: &RunConfig, src: &ScoreSource, emotion: Option<EmotionSource>, out: Option<&Path>) -> Result<String> {
    let mut report = EvalReport::from_scores(&scored(src)?)?;
    if let Some(emo) = emotion {
        let ck = ModelCheckpoint::read_file(emo.model)?;
        let corpus = Corpus::load(require(&src.manifest, "manifest")?)?;
        let s = read_split_file(require(&src.split, "split")?)?;
        let feats = load_feats(emo.features, &s.eval)?;
        let pred = predict_emotion(&ck, &feats.iter().collect::<Vec<_>>())?;
        let truth = emotion_targets(&s.eval, &corpus)?;
        let col = |v: &[[f64; 2]], j: usize| -> Vec<f64> { v.iter().map(|r| r[j]).collect() };
        report = report.with_emotion((&col(&pred, 0), &col(&truth, 0)), (&col(&pred, 1), &col(&truth, 1)))?;
    }
    let mut doc = serde_json::to_value(&report)?;
    if let Value::Object(map) = &mut doc {
        map.extend(provenance_meta(cfg));
    }
    let text = serde_json::to_string_pretty(&doc)? + "\n";
    if let Some(p) = out {
        fs::write(p, &text)?;
    }
    Ok(text)
}

pub fn roc(cfg: &RunConfig, src: &ScoreSource, out: Option<&Path>) -> Result<String> {
    let s = scored(src)?;
    let text = roc_csv(&xprs_core::metrics::roc_curve(&s)?);
    if let Some(p) = out {
        fs::write(p, &text)?;
        write_sidecar(p, cfg)?;
    }
    Ok(text)
}

/// One line per architecture, then a pass/fail verdict.
pub fn gradcheck(cfg: &RunConfig) -> Result<String> {
    let mut text = String::new();
    let mut worst: f64 = 0.0;
    for (name, r) in standard_suite(cfg.seed, cfg.gradcheck.step)? {
        text.push_str(&format!("{name}: max_rel_error={:.3e} params={} worst={}[{}]\n", r.max_rel_error, r.checked, r.worst_tensor, r.worst_index));
        worst = worst.max(r.max_rel_error);
    }
    if worst < cfg.gradcheck.tolerance {
        text.push_str(&format!("PASS max_rel_error={worst:.3e}\n"));
        Ok(text)
    } else {
        print!("{text}");
        Err(Error::CheckFailed(format!("gradient relative error {worst:.3e} >= {:.1e}", cfg.gradcheck.tolerance)))
    }
}

pub fn bow(cfg: &RunConfig, manifest: &Path, split: &Path, out: &Path) -> Result<()> {
    let corpus = Corpus::load(manifest)?;
    let s = read_split_file(split)?;
    let index = corpus.by_id();
    let text = |ids: &[String]| -> Result<Vec<(&str, bool)>> {
        ids.iter()
            .map(|id| {
                let q = corpus.get(&index, id)?;
                Ok((q.transcript.as_str(), q.label()?.binary_expressive))
            })
            .collect()
    };
    let vocab: Vec<&str> = text(&s.pretrain)?.into_iter().map(|(t, _)| t).collect();
    let ck = train_bow_baseline(&vocab, &text(&s.balanced_train)?, &text(&s.dev)?, &cfg.bow)?;
    finish_checkpoint(ck, cfg, out)
}
