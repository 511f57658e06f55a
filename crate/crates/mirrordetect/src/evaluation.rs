//! Measurement: confusion metrics, threshold calibration to a target FPR,
//! recall at fixed FPR by generator, per-domain FPR tables, scaling-curve
//! experiments, and report files.
//!
//! Counts are exact integers and every rate is a reduced rational; floats
//! appear only at display boundaries. The decision rule is strict
//! everywhere: a document is called AI iff `score > threshold`, which makes
//! calibration well-defined under tied scores.

use crate::corpus::{Collection, Document, Label};
use crate::hashing::derive_seed;
use crate::mirrorgen::{mirror_batch, Generator, MirrorOptions, TemplateSet};
use crate::model::{self, ClassifierModel, FeatureVector, ModelError, TrainConfig};
use crate::ratio::Ratio;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("scores and labels differ in length ({scores} vs {labels})")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("target FPR {0} outside [0, 1)")]
    BadTarget(f64),
    #[error("holdout document {0} is not human-labeled")]
    NonHumanHoldout(String),
    #[error("scaling sizes must be strictly increasing and nonempty")]
    BadSizes,
    #[error("size {size} per domain infeasible: domain {domain} has {available} documents")]
    InfeasibleSize {
        size: usize,
        domain: String,
        available: usize,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("report parse error: {0}")]
    Parse(String),
}

// ---------------------------------------------------------------------------
// Confusion counts
// ---------------------------------------------------------------------------

/// Exact confusion counts under the strict `score > threshold` rule.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub true_positives: u64,
    pub false_positives: u64,
    pub true_negatives: u64,
    pub false_negatives: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.true_positives + self.false_positives + self.true_negatives + self.false_negatives
    }

    pub fn accuracy(&self) -> Option<Ratio> {
        let total = self.total();
        (total > 0).then(|| Ratio::new(self.true_positives + self.true_negatives, total))
    }

    /// FP / (FP + TN); absent when there are no human documents.
    pub fn fpr(&self) -> Option<Ratio> {
        let den = self.false_positives + self.true_negatives;
        (den > 0).then(|| Ratio::new(self.false_positives, den))
    }

    /// FN / (FN + TP); absent when there are no AI documents.
    pub fn fnr(&self) -> Option<Ratio> {
        let den = self.false_negatives + self.true_positives;
        (den > 0).then(|| Ratio::new(self.false_negatives, den))
    }

    /// TP / (TP + FN); absent when there are no AI documents.
    pub fn recall(&self) -> Option<Ratio> {
        let den = self.true_positives + self.false_negatives;
        (den > 0).then(|| Ratio::new(self.true_positives, den))
    }

    fn add(&mut self, is_ai: bool, predicted_ai: bool) {
        match (is_ai, predicted_ai) {
            (true, true) => self.true_positives += 1,
            (true, false) => self.false_negatives += 1,
            (false, true) => self.false_positives += 1,
            (false, false) => self.true_negatives += 1,
        }
    }
}

/// Tally scores against labels at a threshold (strict inequality).
pub fn confusion(
    scores: &[f64],
    labels: &[Label],
    threshold: f64,
) -> Result<ConfusionCounts, EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    if scores.is_empty() {
        return Err(EvalError::EmptyInput("confusion"));
    }
    let mut counts = ConfusionCounts::default();
    for (&score, &label) in scores.iter().zip(labels) {
        counts.add(label == Label::Ai, score > threshold);
    }
    Ok(counts)
}

// ---------------------------------------------------------------------------
// Threshold calibration
// ---------------------------------------------------------------------------

/// Exact floor(target * n) where target is interpreted as the rational the
/// f64 denotes. Plain f64 multiplication can round across an integer
/// boundary and admit one extra false positive; this cannot.
fn exact_floor_mul(target: f64, n: u64) -> u64 {
    debug_assert!((0.0..1.0).contains(&target));
    if target == 0.0 || n == 0 {
        return 0;
    }
    let bits = target.to_bits();
    let raw_exponent = ((bits >> 52) & 0x7ff) as i64;
    let fraction = bits & ((1u64 << 52) - 1);
    let (mantissa, exponent) = if raw_exponent == 0 {
        (fraction, -1074i64)
    } else {
        (fraction | (1u64 << 52), raw_exponent - 1075)
    };
    // target * n = mantissa * n * 2^exponent with exponent < 0 here
    let product = u128::from(mantissa) * u128::from(n);
    let shift = (-exponent) as u32;
    if shift >= 128 {
        0
    } else {
        (product >> shift) as u64
    }
}

/// Calibrate a decision threshold on human scores for a target FPR.
///
/// With `k = floor(target * N)`, the threshold is the (k+1)-th largest
/// human score: the smallest candidate from the score set whose realized
/// FPR under the strict rule stays at or below the target.
pub fn calibrate_threshold(human_scores: &[f64], target_fpr: f64) -> Result<f64, EvalError> {
    if human_scores.is_empty() {
        return Err(EvalError::EmptyInput("calibrate_threshold"));
    }
    if !(0.0..1.0).contains(&target_fpr) {
        return Err(EvalError::BadTarget(target_fpr));
    }
    let k = exact_floor_mul(target_fpr, human_scores.len() as u64) as usize;
    let mut sorted = human_scores.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("scores are finite"));
    Ok(sorted[k])
}

/// Realized FPR of a threshold on a score set (strict rule).
pub fn realized_fpr(human_scores: &[f64], threshold: f64) -> Ratio {
    let over = human_scores.iter().filter(|&&s| s > threshold).count() as u64;
    Ratio::new(over, human_scores.len() as u64)
}

// ---------------------------------------------------------------------------
// Recall at fixed FPR
// ---------------------------------------------------------------------------

/// Exact recall counts for one generator's evaluation set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorRecall {
    pub detected: u64,
    pub total: u64,
}

impl GeneratorRecall {
    pub fn recall(&self) -> Ratio {
        Ratio::new(self.detected, self.total)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecallReport {
    pub threshold: f64,
    pub target_fpr: f64,
    pub realized_fpr: Ratio,
    pub per_generator: BTreeMap<String, GeneratorRecall>,
}

/// Score-level recall@FPR: one threshold calibrated on the human scores,
/// applied to every generator's scores.
pub fn recall_at_fpr_scores(
    human_scores: &[f64],
    ai_scores_by_generator: &BTreeMap<String, Vec<f64>>,
    target_fpr: f64,
) -> Result<RecallReport, EvalError> {
    let threshold = calibrate_threshold(human_scores, target_fpr)?;
    let mut per_generator = BTreeMap::new();
    for (generator, scores) in ai_scores_by_generator {
        if scores.is_empty() {
            return Err(EvalError::EmptyInput("generator score set"));
        }
        let detected = scores.iter().filter(|&&s| s > threshold).count() as u64;
        per_generator.insert(
            generator.clone(),
            GeneratorRecall {
                detected,
                total: scores.len() as u64,
            },
        );
    }
    Ok(RecallReport {
        threshold,
        target_fpr,
        realized_fpr: realized_fpr(human_scores, threshold),
        per_generator,
    })
}

/// Model-level recall@FPR over document sets.
pub fn recall_at_fpr(
    model: &ClassifierModel,
    human_set: &Collection,
    ai_sets_by_generator: &BTreeMap<String, Vec<&Document>>,
    target_fpr: f64,
) -> Result<RecallReport, EvalError> {
    if human_set.is_empty() {
        return Err(EvalError::EmptyInput("human set"));
    }
    let human_scores = score_docs(model, human_set.docs());
    let ai_scores: BTreeMap<String, Vec<f64>> = ai_sets_by_generator
        .iter()
        .map(|(g, docs)| {
            let texts: Vec<&str> = docs.iter().map(|d| d.text.as_str()).collect();
            (g.clone(), model.predict_batch(&texts))
        })
        .collect();
    recall_at_fpr_scores(&human_scores, &ai_scores, target_fpr)
}

fn score_docs(model: &ClassifierModel, docs: &[Document]) -> Vec<f64> {
    docs.par_iter().map(|d| model.predict(&d.text)).collect()
}

// ---------------------------------------------------------------------------
// Per-domain FPR table
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainFpr {
    pub false_positives: u64,
    pub total: u64,
}

impl DomainFpr {
    pub fn fpr(&self) -> Ratio {
        Ratio::new(self.false_positives, self.total)
    }
}

/// Per-domain FPR plus the equal-weight mean across domains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainFprTable {
    pub threshold: f64,
    pub per_domain: BTreeMap<String, DomainFpr>,
    /// Domains excluded for having zero documents (possible when scoring
    /// an explicit domain map).
    pub excluded_domains: Vec<String>,
}

impl DomainFprTable {
    /// Unweighted mean of per-domain FPRs: every domain counts equally.
    pub fn domain_weighted_total(&self) -> Option<Ratio> {
        if self.per_domain.is_empty() {
            return None;
        }
        let sum = self
            .per_domain
            .values()
            .fold(Ratio::zero(), |acc, d| acc.add(d.fpr()));
        Some(sum.div_int(self.per_domain.len() as u64))
    }
}

/// Per-domain FPR from raw human scores grouped by domain.
pub fn domain_fpr_from_scores(
    scores_by_domain: &BTreeMap<String, Vec<f64>>,
    threshold: f64,
) -> DomainFprTable {
    let mut per_domain = BTreeMap::new();
    let mut excluded = Vec::new();
    for (domain, scores) in scores_by_domain {
        if scores.is_empty() {
            excluded.push(domain.clone());
            continue;
        }
        let fp = scores.iter().filter(|&&s| s > threshold).count() as u64;
        per_domain.insert(
            domain.clone(),
            DomainFpr {
                false_positives: fp,
                total: scores.len() as u64,
            },
        );
    }
    DomainFprTable {
        threshold,
        per_domain,
        excluded_domains: excluded,
    }
}

/// Score an all-human holdout and build the per-domain FPR table.
pub fn domain_fpr_table(
    model: &ClassifierModel,
    holdout: &Collection,
    threshold: f64,
) -> Result<DomainFprTable, EvalError> {
    if holdout.is_empty() {
        return Err(EvalError::EmptyInput("holdout"));
    }
    if let Some(bad) = holdout.iter().find(|d| d.label != Label::Human) {
        return Err(EvalError::NonHumanHoldout(bad.id.clone()));
    }
    let scores = score_docs(model, holdout.docs());
    let mut by_domain: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (doc, score) in holdout.iter().zip(scores) {
        by_domain.entry(doc.domain.clone()).or_default().push(score);
    }
    Ok(domain_fpr_from_scores(&by_domain, threshold))
}

// ---------------------------------------------------------------------------
// Full evaluation report
// ---------------------------------------------------------------------------

/// Confusion metrics with per-domain and per-generator breakdowns.
///
/// Rates are methods, not fields, so serialized reports round-trip exactly
/// from the integer counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub threshold: f64,
    pub calibration_target: Option<f64>,
    pub overall: ConfusionCounts,
    pub per_domain: BTreeMap<String, ConfusionCounts>,
    pub per_generator_recall: BTreeMap<String, GeneratorRecall>,
}

/// Evaluate a model on a mixed labeled set at a fixed threshold.
pub fn evaluate(
    model: &ClassifierModel,
    docs: &Collection,
    threshold: f64,
    calibration_target: Option<f64>,
) -> Result<EvalReport, EvalError> {
    if docs.is_empty() {
        return Err(EvalError::EmptyInput("evaluation set"));
    }
    let scores = score_docs(model, docs.docs());
    let mut overall = ConfusionCounts::default();
    let mut per_domain: BTreeMap<String, ConfusionCounts> = BTreeMap::new();
    let mut per_generator: BTreeMap<String, GeneratorRecall> = BTreeMap::new();
    for (doc, &score) in docs.iter().zip(&scores) {
        let is_ai = doc.label == Label::Ai;
        let predicted_ai = score > threshold;
        overall.add(is_ai, predicted_ai);
        per_domain
            .entry(doc.domain.clone())
            .or_default()
            .add(is_ai, predicted_ai);
        if let Some(generator) = &doc.generator {
            let entry = per_generator
                .entry(generator.clone())
                .or_insert(GeneratorRecall { detected: 0, total: 0 });
            entry.total += 1;
            if predicted_ai {
                entry.detected += 1;
            }
        }
    }
    Ok(EvalReport {
        threshold,
        calibration_target,
        overall,
        per_domain,
        per_generator_recall: per_generator,
    })
}

// ---------------------------------------------------------------------------
// Report files
// ---------------------------------------------------------------------------

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> EvalError + '_ {
    move |source| EvalError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn write_report_json(report: &EvalReport, path: impl AsRef<Path>) -> Result<(), EvalError> {
    let path = path.as_ref();
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    std::fs::write(path, json).map_err(io_err(path))
}

pub fn read_report_json(path: impl AsRef<Path>) -> Result<EvalReport, EvalError> {
    let path = path.as_ref();
    let raw = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&raw).map_err(|e| EvalError::Parse(e.to_string()))
}

fn display_opt(r: Option<Ratio>) -> String {
    r.map(|r| format!("{:.6}", r.to_f64())).unwrap_or_default()
}

/// One row per slice: overall, each domain, each generator. Counts are
/// authoritative; the rate columns are display-only and recomputed on read.
pub fn write_report_csv(report: &EvalReport, path: impl AsRef<Path>) -> Result<(), EvalError> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str("slice,name,tp,fp,tn,fn,threshold,calibration_target,accuracy,fpr,fnr,recall\n");
    let target = report
        .calibration_target
        .map(|t| t.to_string())
        .unwrap_or_default();
    let mut push_counts = |slice: &str, name: &str, c: &ConfusionCounts| {
        out.push_str(&format!(
            "{slice},{name},{},{},{},{},{},{target},{},{},{},{}\n",
            c.true_positives,
            c.false_positives,
            c.true_negatives,
            c.false_negatives,
            report.threshold,
            display_opt(c.accuracy()),
            display_opt(c.fpr()),
            display_opt(c.fnr()),
            display_opt(c.recall()),
        ));
    };
    push_counts("overall", "all", &report.overall);
    for (domain, counts) in &report.per_domain {
        push_counts("domain", domain, counts);
    }
    for (generator, recall) in &report.per_generator_recall {
        out.push_str(&format!(
            "generator,{generator},{},0,0,{},{},{target},,,,{}\n",
            recall.detected,
            recall.total - recall.detected,
            report.threshold,
            format!("{:.6}", recall.recall().to_f64()),
        ));
    }
    std::fs::write(path, out).map_err(io_err(path))
}

pub fn read_report_csv(path: impl AsRef<Path>) -> Result<EvalReport, EvalError> {
    let path = path.as_ref();
    let raw = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut reader = csv::Reader::from_reader(raw.as_bytes());
    let mut report = EvalReport {
        threshold: 0.0,
        calibration_target: None,
        overall: ConfusionCounts::default(),
        per_domain: BTreeMap::new(),
        per_generator_recall: BTreeMap::new(),
    };
    let parse = |v: &str| -> Result<u64, EvalError> {
        v.parse()
            .map_err(|_| EvalError::Parse(format!("bad count {v:?}")))
    };
    for record in reader.records() {
        let record = record.map_err(|e| EvalError::Parse(e.to_string()))?;
        let field = |i: usize| record.get(i).unwrap_or("");
        report.threshold = field(6)
            .parse()
            .map_err(|_| EvalError::Parse("bad threshold".into()))?;
        report.calibration_target = field(7).parse().ok();
        match field(0) {
            "overall" | "domain" => {
                let counts = ConfusionCounts {
                    true_positives: parse(field(2))?,
                    false_positives: parse(field(3))?,
                    true_negatives: parse(field(4))?,
                    false_negatives: parse(field(5))?,
                };
                if field(0) == "overall" {
                    report.overall = counts;
                } else {
                    report.per_domain.insert(field(1).to_string(), counts);
                }
            }
            "generator" => {
                let detected = parse(field(2))?;
                let missed = parse(field(5))?;
                report.per_generator_recall.insert(
                    field(1).to_string(),
                    GeneratorRecall {
                        detected,
                        total: detected + missed,
                    },
                );
            }
            other => return Err(EvalError::Parse(format!("unknown slice {other:?}"))),
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Scaling experiment
// ---------------------------------------------------------------------------

/// One point on the scaling curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub train_size_per_domain: usize,
    pub test_loss: f64,
    pub test_accuracy: f64,
    pub checkpoint_id: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScalingCurve {
    pub points: Vec<ScalingPoint>,
}

impl ScalingCurve {
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<(), EvalError> {
        let path = path.as_ref();
        let mut out = String::from("train_size_per_domain,test_loss,test_accuracy,checkpoint_id\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{}\n",
                p.train_size_per_domain, p.test_loss, p.test_accuracy, p.checkpoint_id
            ));
        }
        std::fs::write(path, out).map_err(io_err(path))
    }
}

#[derive(Debug, Clone)]
pub struct ScalingOptions {
    pub seed: u64,
    /// Human documents reserved per domain for the shared test set.
    pub test_docs_per_domain: usize,
    pub templates: TemplateSet,
    pub mirror: MirrorOptions,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        ScalingOptions {
            seed: 0,
            test_docs_per_domain: 200,
            templates: TemplateSet::builtin(),
            mirror: MirrorOptions::default(),
        }
    }
}

/// Train at increasing per-domain sizes and evaluate each checkpoint on a
/// fixed common test set (humans plus their mirrors).
///
/// For every size: sample that many humans per domain (seeded), mirror
/// them, train with checkpoint selection by validation loss, then record
/// unweighted test loss and accuracy.
pub fn scaling_experiment(
    pool: &Collection,
    sizes: &[usize],
    generators: &[Box<dyn Generator>],
    train_cfg: &TrainConfig,
    opts: &ScalingOptions,
) -> Result<ScalingCurve, EvalError> {
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EvalError::BadSizes);
    }

    // Group pool indices by domain, input order preserved.
    let mut by_domain: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, doc) in pool.iter().enumerate() {
        if doc.label == Label::Human {
            by_domain.entry(doc.domain.as_str()).or_default().push(i);
        }
    }
    let max_size = *sizes.last().expect("validated nonempty");
    for (domain, members) in &by_domain {
        let needed = max_size + opts.test_docs_per_domain;
        if members.len() < needed {
            return Err(EvalError::InfeasibleSize {
                size: max_size,
                domain: domain.to_string(),
                available: members.len(),
            });
        }
    }

    // Shared test set: the same seeded per-domain sample for every size.
    let mut test_idx: Vec<usize> = Vec::new();
    let mut train_candidates: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (domain, members) in &by_domain {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(
            opts.seed,
            &format!("scaling-test:{domain}"),
            0,
        ));
        let picks = rand::seq::index::sample(&mut rng, members.len(), opts.test_docs_per_domain);
        let picked: std::collections::HashSet<usize> = picks.iter().collect();
        for (pos, &idx) in members.iter().enumerate() {
            if picked.contains(&pos) {
                test_idx.push(idx);
            } else {
                train_candidates.entry(domain).or_default().push(idx);
            }
        }
    }
    let test_humans: Vec<&Document> = test_idx.iter().map(|&i| &pool.docs()[i]).collect();
    let test_mirrors = mirror_batch(
        &test_humans,
        &opts.templates,
        generators,
        &opts.mirror,
        derive_seed(opts.seed, "scaling-test-mirrors", 0),
    );
    let mut test_docs: Vec<Document> = test_humans.iter().map(|d| (*d).clone()).collect();
    test_docs.extend(test_mirrors.mirrors.iter().cloned());
    let test_features: Vec<(FeatureVector, bool, f64)> = test_docs
        .par_iter()
        .map(|d| {
            (
                model::featurize(&d.text, &train_cfg.feature),
                d.label == Label::Ai,
                1.0,
            )
        })
        .collect();

    let mut curve = ScalingCurve::default();
    for &size in sizes {
        let mut sample: Vec<&Document> = Vec::with_capacity(size * train_candidates.len());
        for (domain, members) in &train_candidates {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(
                opts.seed,
                &format!("scaling-sample:{domain}"),
                size as u64,
            ));
            for pos in rand::seq::index::sample(&mut rng, members.len(), size) {
                sample.push(&pool.docs()[members[pos]]);
            }
        }
        let mirrors = mirror_batch(
            &sample,
            &opts.templates,
            generators,
            &opts.mirror,
            derive_seed(opts.seed, "scaling-mirrors", size as u64),
        );
        let mut train_docs: Vec<Document> = sample.iter().map(|d| (*d).clone()).collect();
        train_docs.extend(mirrors.mirrors);
        let train_set = Collection::new(train_docs)
            .expect("sampled pool ids and fresh mirror ids are unique");

        let mut cfg = train_cfg.clone();
        cfg.seed = derive_seed(train_cfg.seed, "scaling-train", size as u64);
        let (model, history) = model::train(&train_set, &cfg)?;

        let test_loss = model::batch_loss(&test_features, &model.weights, model.bias);
        let correct = test_features
            .iter()
            .filter(|(fv, is_ai, _)| (model.score_features(fv) > 0.5) == *is_ai)
            .count();
        curve.points.push(ScalingPoint {
            train_size_per_domain: size,
            test_loss,
            test_accuracy: correct as f64 / test_features.len() as f64,
            checkpoint_id: format!("size-{size}-epoch-{}", history.selected_epoch),
        });
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn confusion_perfect_split() {
        let counts = confusion(&[0.9, 0.2], &[Label::Ai, Label::Human], 0.5).unwrap();
        assert_eq!(counts.accuracy(), Some(Ratio::new(1, 1)));
        assert_eq!(counts.fpr(), Some(Ratio::zero()));
        assert_eq!(counts.fnr(), Some(Ratio::zero()));
    }

    #[test]
    fn all_human_set_has_absent_fnr() {
        let counts = confusion(&[1.0, 1.0, 1.0], &[Label::Human; 3], 0.5).unwrap();
        assert_eq!(counts.fpr(), Some(Ratio::new(1, 1)));
        assert_eq!(counts.fnr(), None);
    }

    #[test]
    fn confusion_rejects_bad_input() {
        assert!(matches!(
            confusion(&[0.5], &[], 0.5),
            Err(EvalError::LengthMismatch { .. })
        ));
        assert!(matches!(
            confusion(&[], &[], 0.5),
            Err(EvalError::EmptyInput(_))
        ));
    }

    #[test]
    fn confusion_matches_naive_tally_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let scores: Vec<f64> = (0..1000).map(|_| rng.random_range(0.0..1.0)).collect();
        let labels: Vec<Label> = (0..1000)
            .map(|_| if rng.random_bool(0.5) { Label::Ai } else { Label::Human })
            .collect();
        let threshold = 0.37;
        let counts = confusion(&scores, &labels, threshold).unwrap();
        // independent naive tally
        let (mut tp, mut fp, mut tn, mut fnn) = (0u64, 0u64, 0u64, 0u64);
        for (s, l) in scores.iter().zip(&labels) {
            match (*l == Label::Ai, *s > threshold) {
                (true, true) => tp += 1,
                (true, false) => fnn += 1,
                (false, true) => fp += 1,
                (false, false) => tn += 1,
            }
        }
        assert_eq!(
            (tp, fp, tn, fnn),
            (
                counts.true_positives,
                counts.false_positives,
                counts.true_negatives,
                counts.false_negatives
            )
        );
    }

    #[test]
    fn calibrate_picks_smallest_feasible_candidate() {
        let scores = [0.1, 0.2, 0.3, 0.9];
        let t = calibrate_threshold(&scores, 0.25).unwrap();
        assert_eq!(t, 0.3);
        assert_eq!(realized_fpr(&scores, t), Ratio::new(1, 4));
    }

    #[test]
    fn calibrate_target_zero_returns_max() {
        let scores = [0.4, 0.8, 0.1];
        let t = calibrate_threshold(&scores, 0.0).unwrap();
        assert_eq!(t, 0.8);
        assert_eq!(realized_fpr(&scores, t), Ratio::zero());
    }

    #[test]
    fn calibrate_tied_scores() {
        let scores = [0.5; 6];
        let t = calibrate_threshold(&scores, 0.3).unwrap();
        assert_eq!(t, 0.5);
        assert_eq!(realized_fpr(&scores, t), Ratio::zero());
    }

    #[test]
    fn exact_floor_handles_awkward_products() {
        // 0.01 * 300: the f64 product rounds near 3
        assert_eq!(exact_floor_mul(0.01, 300), 3);
        assert_eq!(exact_floor_mul(0.25, 4), 1);
        assert_eq!(exact_floor_mul(0.0, 10), 0);
        // 0.1 is slightly above 1/10 in binary
        assert_eq!(exact_floor_mul(0.1, 10), 1);
        let just_under = f64::from_bits(0.3f64.to_bits() - 1);
        assert_eq!(exact_floor_mul(just_under, 10), 2);
    }

    /// Independent feasibility check: interpret the f64 target as an exact
    /// binary rational and compare count/n <= target by cross-multiplying.
    fn oracle_feasible(count: u64, n: u64, target: f64) -> bool {
        let bits = target.to_bits();
        let raw_exponent = ((bits >> 52) & 0x7ff) as i64;
        let fraction = bits & ((1u64 << 52) - 1);
        let (mantissa, exponent) = if raw_exponent == 0 {
            (fraction, -1074i64)
        } else {
            (fraction | (1u64 << 52), raw_exponent - 1075)
        };
        // count / n <= m * 2^e  <=>  count << (-e) <= m * n (e negative)
        let shift = (-exponent) as u32;
        if shift >= 128 {
            return count == 0;
        }
        let lhs = u128::from(count) << shift.min(127);
        // count < 2^11 here and shift <= 1074; only small shifts occur for
        // targets in [0,1) with n <= 2^11, but guard anyway
        lhs <= u128::from(mantissa) * u128::from(n)
    }

    #[test]
    fn calibration_matches_brute_force_on_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for case in 0..200 {
            let n = rng.random_range(1..=200usize);
            let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
            let target: f64 = rng.random_range(0.0..1.0);
            let threshold = calibrate_threshold(&scores, target).unwrap();

            // brute force: smallest candidate threshold with feasible FPR
            let mut best: Option<f64> = None;
            for &candidate in &scores {
                let count = scores.iter().filter(|&&s| s > candidate).count() as u64;
                if oracle_feasible(count, n as u64, target) {
                    best = Some(match best {
                        Some(b) if b <= candidate => b,
                        _ => candidate,
                    });
                }
            }
            assert_eq!(Some(threshold), best, "case {case}: target {target}, n {n}");
            let realized = scores.iter().filter(|&&s| s > threshold).count() as u64;
            assert!(oracle_feasible(realized, n as u64, target));
        }
    }

    #[test]
    fn recall_with_degenerate_scores() {
        let humans = vec![0.0; 10];
        let mut by_gen = BTreeMap::new();
        by_gen.insert("a".to_string(), vec![1.0; 5]);
        by_gen.insert("b".to_string(), vec![1.0; 7]);
        let report = recall_at_fpr_scores(&humans, &by_gen, 0.01).unwrap();
        assert_eq!(report.per_generator["a"].recall(), Ratio::new(1, 1));
        assert_eq!(report.per_generator["b"].recall(), Ratio::new(1, 1));
        assert_eq!(report.realized_fpr, Ratio::zero());
    }

    #[test]
    fn domain_table_mean_is_exact() {
        let mut by_domain = BTreeMap::new();
        by_domain.insert("a".to_string(), {
            let mut v = vec![0.0; 98];
            v.extend([1.0, 1.0]); // 2%
            v
        });
        by_domain.insert("b".to_string(), {
            let mut v = vec![0.0; 96];
            v.extend([1.0, 1.0, 1.0, 1.0]); // 4%
            v
        });
        let table = domain_fpr_from_scores(&by_domain, 0.5);
        assert_eq!(table.per_domain["a"].fpr(), Ratio::new(2, 100));
        assert_eq!(table.per_domain["b"].fpr(), Ratio::new(4, 100));
        assert_eq!(table.domain_weighted_total(), Some(Ratio::new(3, 100)));
    }

    #[test]
    fn empty_domain_is_excluded_and_listed() {
        let mut by_domain = BTreeMap::new();
        by_domain.insert("a".to_string(), vec![0.0, 1.0]);
        by_domain.insert("ghost".to_string(), Vec::new());
        let table = domain_fpr_from_scores(&by_domain, 0.5);
        assert_eq!(table.excluded_domains, vec!["ghost".to_string()]);
        assert_eq!(table.per_domain.len(), 1);
    }

    fn sample_report() -> EvalReport {
        let mut per_domain = BTreeMap::new();
        per_domain.insert(
            "reviews".to_string(),
            ConfusionCounts {
                true_positives: 40,
                false_positives: 3,
                true_negatives: 97,
                false_negatives: 10,
            },
        );
        let mut per_generator = BTreeMap::new();
        per_generator.insert(
            "simulacrum".to_string(),
            GeneratorRecall {
                detected: 38,
                total: 50,
            },
        );
        EvalReport {
            threshold: 0.6234375,
            calibration_target: Some(0.01),
            overall: ConfusionCounts {
                true_positives: 40,
                false_positives: 3,
                true_negatives: 97,
                false_negatives: 10,
            },
            per_domain,
            per_generator_recall: per_generator,
        }
    }

    #[test]
    fn report_json_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        let report = sample_report();
        write_report_json(&report, &path).unwrap();
        assert_eq!(read_report_json(&path).unwrap(), report);
    }

    #[test]
    fn report_csv_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.csv");
        let report = sample_report();
        write_report_csv(&report, &path).unwrap();
        assert_eq!(read_report_csv(&path).unwrap(), report);
    }
}
