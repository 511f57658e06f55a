//! Hard negative mining with synthetic mirrors.
//!
//! The round loop: sample an initial human training set and mirror it,
//! train, then iterate. Each iteration scores the remaining human pool,
//! samples false positives, mirrors them, folds both into the training set,
//! and retrains, until the improvement metric stalls, the pool stops
//! yielding false positives, or the round budget runs out.
//!
//! The holdout never touches training or mining. A seeded half of it
//! calibrates the operating threshold at the evaluation target FPR; the
//! other half measures per-domain FPR, and a mirrored sample of it measures
//! FNR. The improvement metric is therefore read on documents the loop has
//! never seen.
//!
//! Every round persists its artifacts (metrics, id lists, mirrors, model)
//! before the next round starts; `resume` rebuilds state from the ledger
//! and, with an offline generator, continues bit-identically to an
//! uninterrupted run.

use crate::corpus::{self, Collection, CorpusError, Document, Label};
use crate::evaluation::{self, DomainFpr, EvalError};
use crate::hashing::{derive_seed, fnv1a_128};
use crate::mirrorgen::{mirror_batch, Generator, MirrorOptions, TemplateSet};
use crate::model::{self, ClassifierModel, ModelError, TrainConfig};
use crate::ratio::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// What "better" means in the round loop's while-condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImprovementMetric {
    /// Domain-weighted holdout FPR at the calibrated operating threshold,
    /// with validation loss as tie-break.
    HoldoutWeightedFpr,
    ValidationLoss,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct MiningConfig {
    /// Initial training humans (desk-scale default; production runs use
    /// far larger values).
    pub n: usize,
    /// False positives sampled per round.
    pub m: usize,
    /// Cap on false positives taken from any single domain per round.
    pub per_domain_fp_cap: usize,
    /// Score above which a pool human counts as a false positive during
    /// mining (the raw threshold, not the calibrated one).
    pub fp_threshold: f64,
    pub improvement_metric: ImprovementMetric,
    /// Mining rounds after the initial one; 0 trains the base model only.
    pub max_rounds: usize,
    /// Minimum relative improvement per round to keep going.
    pub min_improvement: f64,
    /// Domains with fewer candidates than this skip mining (defaults to
    /// twice the per-domain cap).
    pub min_domain_pool: Option<usize>,
    /// Stratify the initial sample per domain.
    pub stratified_init: bool,
    /// Target FPR for the calibrated operating threshold used in holdout
    /// metrics.
    pub eval_target_fpr: f64,
    /// Fraction of the holdout reserved for threshold calibration; the
    /// rest measures FPR/FNR.
    pub calibration_fraction: f64,
    /// Measurement-slice humans mirrored per domain for the FNR metric.
    pub eval_mirrors_per_domain: usize,
    /// Batch mirror generation may skip at most this fraction of sources.
    pub max_skip_fraction: f64,
    pub seed: u64,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            n: 4_000,
            m: 400,
            per_domain_fp_cap: 10_000,
            fp_threshold: 0.5,
            improvement_metric: ImprovementMetric::HoldoutWeightedFpr,
            max_rounds: 4,
            min_improvement: 0.05,
            min_domain_pool: None,
            stratified_init: true,
            eval_target_fpr: 0.01,
            calibration_fraction: 0.5,
            eval_mirrors_per_domain: 100,
            max_skip_fraction: 0.05,
            seed: 0,
        }
    }
}

impl MiningConfig {
    fn min_domain_pool(&self) -> usize {
        self.min_domain_pool.unwrap_or(2 * self.per_domain_fp_cap)
    }
}

/// Why the loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    NoImprovement,
    NoFalsePositives,
    MaxRounds,
}

/// Holdout and training measurements for one round's model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    /// Operating threshold calibrated on the holdout calibration slice.
    pub operating_threshold: f64,
    /// Per-domain FPR on the measurement slice at the operating threshold.
    pub per_domain_fpr: BTreeMap<String, DomainFpr>,
    /// Equal-weight mean of the per-domain FPRs.
    pub weighted_fpr: Option<Ratio>,
    /// FNR on the mirrored measurement sample at the operating threshold.
    pub fnr: Option<Ratio>,
    /// Best validation loss of this round's training run.
    pub validation_loss: f64,
    /// Fraction of scored pool candidates above the mining threshold
    /// (absent when this round did not mine).
    pub pool_fpr: Option<Ratio>,
}

/// One iteration of the loop, as persisted in the ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub index: u32,
    pub training_set_id: String,
    pub model_id: String,
    /// Ids of every document in this round's training set.
    pub training_ids: Vec<String>,
    /// Pool humans mined as false positives by this round's model.
    pub fp_ids: Vec<String>,
    /// Accepted mirrors of those false positives.
    pub mirror_ids: Vec<String>,
    pub metrics: RoundMetrics,
    pub stop: Option<StopReason>,
}

#[derive(Debug, Error)]
pub enum MiningError {
    #[error("insufficient pool: need {needed} humans{}, have {available}", domain_suffix(.domain))]
    InsufficientPool {
        needed: usize,
        available: usize,
        domain: Option<String>,
    },
    #[error("generator skipped {skipped} of {requested} sources (budget {budget})")]
    GeneratorFailure {
        skipped: usize,
        requested: usize,
        budget: usize,
    },
    #[error("holdout document {0} leaked into the round state")]
    HoldoutContamination(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("ledger error: {0}")]
    Ledger(String),
}

fn domain_suffix(domain: &Option<String>) -> String {
    domain
        .as_ref()
        .map(|d| format!(" in domain {d}"))
        .unwrap_or_default()
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> MiningError + '_ {
    move |source| MiningError::Io {
        path: path.display().to_string(),
        source,
    }
}

// ---------------------------------------------------------------------------
// Initial training set
// ---------------------------------------------------------------------------

/// Sample `n` humans from the pool (per-domain stratified when requested),
/// mirror each, and return humans plus accepted mirrors.
pub fn init_training_set(
    pool: &Collection,
    cfg: &MiningConfig,
    generators: &[Box<dyn Generator>],
    templates: &TemplateSet,
    mirror_opts: &MirrorOptions,
) -> Result<Collection, MiningError> {
    let humans: Vec<&Document> = pool.iter().filter(|d| d.label == Label::Human).collect();
    if humans.len() < cfg.n {
        return Err(MiningError::InsufficientPool {
            needed: cfg.n,
            available: humans.len(),
            domain: None,
        });
    }

    let mut picked: Vec<&Document> = Vec::with_capacity(cfg.n);
    if cfg.stratified_init {
        let mut by_domain: BTreeMap<&str, Vec<&Document>> = BTreeMap::new();
        for doc in &humans {
            by_domain.entry(doc.domain.as_str()).or_default().push(doc);
        }
        let domains = by_domain.len();
        let base = cfg.n / domains;
        let remainder = cfg.n % domains;
        for (i, (domain, members)) in by_domain.iter().enumerate() {
            let want = base + usize::from(i < remainder);
            if members.len() < want {
                return Err(MiningError::InsufficientPool {
                    needed: want,
                    available: members.len(),
                    domain: Some(domain.to_string()),
                });
            }
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &format!("init:{domain}"), 0));
            let mut idx: Vec<usize> =
                rand::seq::index::sample(&mut rng, members.len(), want).into_vec();
            idx.sort_unstable();
            picked.extend(idx.into_iter().map(|i| members[i]));
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "init", 0));
        let mut idx: Vec<usize> =
            rand::seq::index::sample(&mut rng, humans.len(), cfg.n).into_vec();
        idx.sort_unstable();
        picked.extend(idx.into_iter().map(|i| humans[i]));
    }

    let mirrors = mirror_batch(
        &picked,
        templates,
        generators,
        mirror_opts,
        derive_seed(cfg.seed, "init-mirrors", 0),
    );
    check_skip_budget(mirrors.skipped.len(), picked.len(), cfg)?;

    let mut docs: Vec<Document> = picked.into_iter().cloned().collect();
    docs.extend(mirrors.mirrors);
    Ok(Collection::new(docs)?)
}

fn check_skip_budget(
    skipped: usize,
    requested: usize,
    cfg: &MiningConfig,
) -> Result<(), MiningError> {
    let budget = (cfg.max_skip_fraction * requested as f64).floor() as usize;
    if skipped > budget {
        return Err(MiningError::GeneratorFailure {
            skipped,
            requested,
            budget,
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// False positive mining
// ---------------------------------------------------------------------------

/// Mined false positives, in candidate order, plus the observed pool FPR.
pub struct MinedFps<'a> {
    pub docs: Vec<&'a Document>,
    pub pool_fpr: Ratio,
}

/// Pure selection step: filter by score, cap per domain, then sample `m`
/// overall. Deterministic given the seed; survivors keep candidate order.
pub fn select_false_positives<'a>(
    candidates: &[&'a Document],
    scores: &[f64],
    cfg: &MiningConfig,
    seed: u64,
) -> MinedFps<'a> {
    assert_eq!(candidates.len(), scores.len());
    let fp_positions: Vec<usize> = (0..candidates.len())
        .filter(|&i| scores[i] > cfg.fp_threshold)
        .collect();
    let pool_fpr = Ratio::new(fp_positions.len() as u64, (candidates.len() as u64).max(1));

    // Domains below the candidate floor skip mining entirely.
    let mut domain_candidates: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in candidates {
        *domain_candidates.entry(doc.domain.as_str()).or_default() += 1;
    }
    let min_pool = cfg.min_domain_pool();

    let mut by_domain: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for &pos in &fp_positions {
        let domain = candidates[pos].domain.as_str();
        if domain_candidates[domain] >= min_pool {
            by_domain.entry(domain).or_default().push(pos);
        }
    }

    let mut capped: Vec<usize> = Vec::new();
    for (domain, positions) in &by_domain {
        if positions.len() <= cfg.per_domain_fp_cap {
            capped.extend(positions);
        } else {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("fp-cap:{domain}"), 0));
            let mut keep: Vec<usize> =
                rand::seq::index::sample(&mut rng, positions.len(), cfg.per_domain_fp_cap)
                    .into_iter()
                    .map(|k| positions[k])
                    .collect();
            keep.sort_unstable();
            capped.extend(keep);
        }
    }
    capped.sort_unstable();

    let selected: Vec<usize> = if capped.len() > cfg.m {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "fp-sample", 0));
        let mut keep: Vec<usize> = rand::seq::index::sample(&mut rng, capped.len(), cfg.m)
            .into_iter()
            .map(|k| capped[k])
            .collect();
        keep.sort_unstable();
        keep
    } else {
        capped
    };

    MinedFps {
        docs: selected.into_iter().map(|i| candidates[i]).collect(),
        pool_fpr,
    }
}

/// Score candidates with the model and select false positives.
pub fn mine_false_positives<'a>(
    model: &ClassifierModel,
    candidates: &[&'a Document],
    cfg: &MiningConfig,
    seed: u64,
) -> MinedFps<'a> {
    let texts: Vec<&str> = candidates.iter().map(|d| d.text.as_str()).collect();
    let scores = model.predict_batch(&texts);
    select_false_positives(candidates, &scores, cfg, seed)
}

// ---------------------------------------------------------------------------
// Holdout evaluation fixture
// ---------------------------------------------------------------------------

struct EvalFixture {
    calibration: Vec<Document>,
    measurement: Vec<Document>,
    eval_mirrors: Vec<Document>,
}

impl EvalFixture {
    /// Threshold calibration set plus FPR/FNR measurement set.
    ///
    /// With an external benchmark, the whole holdout measures FPR and the
    /// benchmark calibrates the threshold. Otherwise a seeded split of the
    /// holdout provides both: a calibration slice and a measurement slice.
    fn build(
        holdout: &Collection,
        benchmark: Option<&Collection>,
        cfg: &MiningConfig,
        generators: &[Box<dyn Generator>],
        templates: &TemplateSet,
        mirror_opts: &MirrorOptions,
        persisted_mirrors: Option<Vec<Document>>,
    ) -> Result<Self, MiningError> {
        let (calibration, measurement): (Vec<Document>, Vec<Document>) = match benchmark {
            Some(benchmark) => (
                benchmark.docs().to_vec(),
                holdout.docs().to_vec(),
            ),
            None => {
                let mut order: Vec<usize> = (0..holdout.len()).collect();
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "eval-split", 0));
                order.shuffle(&mut rng);
                let calib_len = ((holdout.len() as f64 * cfg.calibration_fraction).round()
                    as usize)
                    .clamp(1, holdout.len().saturating_sub(1).max(1));
                let (calib_idx, meas_idx) = order.split_at(calib_len.min(order.len()));
                (
                    calib_idx.iter().map(|&i| holdout.docs()[i].clone()).collect(),
                    meas_idx.iter().map(|&i| holdout.docs()[i].clone()).collect(),
                )
            }
        };

        let eval_mirrors = match persisted_mirrors {
            Some(mirrors) => mirrors,
            None => {
                let mut by_domain: BTreeMap<&str, Vec<&Document>> = BTreeMap::new();
                for doc in &measurement {
                    by_domain.entry(doc.domain.as_str()).or_default().push(doc);
                }
                let mut sample: Vec<&Document> = Vec::new();
                for (domain, members) in &by_domain {
                    let want = cfg.eval_mirrors_per_domain.min(members.len());
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                        cfg.seed,
                        &format!("eval-mirror-sample:{domain}"),
                        0,
                    ));
                    let mut idx: Vec<usize> =
                        rand::seq::index::sample(&mut rng, members.len(), want).into_vec();
                    idx.sort_unstable();
                    sample.extend(idx.into_iter().map(|i| members[i]));
                }
                let batch = mirror_batch(
                    &sample,
                    templates,
                    generators,
                    mirror_opts,
                    derive_seed(cfg.seed, "eval-mirrors", 0),
                );
                check_skip_budget(batch.skipped.len(), sample.len(), cfg)?;
                batch.mirrors
            }
        };
        Ok(EvalFixture {
            calibration,
            measurement,
            eval_mirrors,
        })
    }

    fn evaluate(
        &self,
        model: &ClassifierModel,
        cfg: &MiningConfig,
        validation_loss: f64,
    ) -> Result<RoundMetrics, MiningError> {
        let calib_texts: Vec<&str> = self.calibration.iter().map(|d| d.text.as_str()).collect();
        let calib_scores = model.predict_batch(&calib_texts);
        let threshold = evaluation::calibrate_threshold(&calib_scores, cfg.eval_target_fpr)?;

        let meas_texts: Vec<&str> = self.measurement.iter().map(|d| d.text.as_str()).collect();
        let meas_scores = model.predict_batch(&meas_texts);
        let mut by_domain: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for (doc, score) in self.measurement.iter().zip(&meas_scores) {
            by_domain.entry(doc.domain.clone()).or_default().push(*score);
        }
        let table = evaluation::domain_fpr_from_scores(&by_domain, threshold);

        let fnr = if self.eval_mirrors.is_empty() {
            None
        } else {
            let texts: Vec<&str> = self.eval_mirrors.iter().map(|d| d.text.as_str()).collect();
            let missed = model
                .predict_batch(&texts)
                .iter()
                .filter(|&&s| s <= threshold)
                .count() as u64;
            Some(Ratio::new(missed, self.eval_mirrors.len() as u64))
        };

        Ok(RoundMetrics {
            operating_threshold: threshold,
            weighted_fpr: table.domain_weighted_total(),
            per_domain_fpr: table.per_domain,
            fnr,
            validation_loss,
            pool_fpr: None,
        })
    }
}

// ---------------------------------------------------------------------------
// The round loop
// ---------------------------------------------------------------------------

/// Everything a mining run needs. `run_dir` receives the ledger: one
/// directory per round plus a manifest and the evaluation mirrors.
pub struct MiningRun<'a> {
    pub train_pool: &'a Collection,
    pub holdout: &'a Collection,
    /// Optional calibration benchmark: human documents, separate from both
    /// pool and holdout, on which operating thresholds are calibrated.
    /// Without one, a seeded slice of the holdout calibrates instead.
    pub benchmark: Option<&'a Collection>,
    pub cfg: MiningConfig,
    pub train_cfg: TrainConfig,
    pub generators: Vec<Box<dyn Generator>>,
    pub templates: TemplateSet,
    pub mirror_opts: MirrorOptions,
    pub run_dir: PathBuf,
}

/// Completed run: all rounds plus the last strictly-improving model.
pub struct MiningOutcome {
    pub rounds: Vec<Round>,
    pub best_round: u32,
    pub best_model: ClassifierModel,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    version: u32,
    config: MiningConfig,
    train_config: TrainConfig,
    pool_fingerprint: String,
    holdout_fingerprint: String,
    #[serde(default)]
    benchmark_fingerprint: Option<String>,
}

fn fingerprint(collection: &Collection) -> String {
    let mut acc: u128 = 0;
    for doc in collection.iter() {
        acc ^= fnv1a_128(doc.id.as_bytes()) ^ fnv1a_128(doc.text.as_bytes()).rotate_left(1);
    }
    format!("{acc:032x}")
}

impl MiningRun<'_> {
    fn rounds_dir(&self) -> PathBuf {
        self.run_dir.join("rounds")
    }

    fn round_dir(&self, index: u32) -> PathBuf {
        self.rounds_dir().join(format!("round_{index:04}"))
    }

    fn manifest(&self) -> Manifest {
        Manifest {
            version: 1,
            config: self.cfg.clone(),
            train_config: self.train_cfg.clone(),
            pool_fingerprint: fingerprint(self.train_pool),
            holdout_fingerprint: fingerprint(self.holdout),
            benchmark_fingerprint: self.benchmark.map(fingerprint),
        }
    }

    /// Execute from scratch, persisting every round.
    pub fn execute(&self) -> Result<MiningOutcome, MiningError> {
        self.execute_with(|_| {})
    }

    pub fn execute_with(
        &self,
        mut on_round: impl FnMut(&Round),
    ) -> Result<MiningOutcome, MiningError> {
        std::fs::create_dir_all(self.rounds_dir()).map_err(io_err(&self.run_dir))?;
        let manifest_path = self.run_dir.join("mining.json");
        let manifest = serde_json::to_string_pretty(&self.manifest()).expect("manifest serializes");
        std::fs::write(&manifest_path, manifest).map_err(io_err(&manifest_path))?;

        let fixture = self.build_and_persist_fixture()?;
        let t0 = init_training_set(
            self.train_pool,
            &self.cfg,
            &self.generators,
            &self.templates,
            &self.mirror_opts,
        )?;
        self.drive(fixture, t0, Vec::new(), &mut on_round)
    }

    /// Continue a run from its ledger. Completed rounds are replayed from
    /// disk; the loop picks up at the first missing round with the same
    /// derived seeds an uninterrupted run would use.
    pub fn resume(&self) -> Result<MiningOutcome, MiningError> {
        self.resume_with(|_| {})
    }

    pub fn resume_with(
        &self,
        mut on_round: impl FnMut(&Round),
    ) -> Result<MiningOutcome, MiningError> {
        let manifest_path = self.run_dir.join("mining.json");
        let raw = std::fs::read_to_string(&manifest_path).map_err(io_err(&manifest_path))?;
        let manifest: Manifest =
            serde_json::from_str(&raw).map_err(|e| MiningError::Ledger(e.to_string()))?;
        if manifest.pool_fingerprint != fingerprint(self.train_pool)
            || manifest.holdout_fingerprint != fingerprint(self.holdout)
            || manifest.benchmark_fingerprint != self.benchmark.map(fingerprint)
        {
            return Err(MiningError::Ledger(
                "pool, holdout, or benchmark differs from the original run".into(),
            ));
        }

        let eval_mirrors_path = self.run_dir.join("eval_mirrors.jsonl");
        let persisted = corpus::load(&eval_mirrors_path, corpus::Format::Jsonl)?;
        let fixture = EvalFixture::build(
            self.holdout,
            self.benchmark,
            &self.cfg,
            &self.generators,
            &self.templates,
            &self.mirror_opts,
            Some(persisted.into_docs()),
        )?;

        // Replay completed rounds in order, rebuilding the training set.
        let by_id: BTreeMap<&str, &Document> =
            self.train_pool.iter().map(|d| (d.id.as_str(), d)).collect();
        let mut rounds: Vec<Round> = Vec::new();
        let mut training: Vec<Document> = Vec::new();
        loop {
            let index = rounds.len() as u32;
            let round_path = self.round_dir(index).join("round.json");
            if !round_path.exists() {
                break;
            }
            let raw = std::fs::read_to_string(&round_path).map_err(io_err(&round_path))?;
            let round: Round =
                serde_json::from_str(&raw).map_err(|e| MiningError::Ledger(e.to_string()))?;
            if index == 0 {
                let mirrors_path = self.round_dir(0).join("t0_mirrors.jsonl");
                let mirrors = corpus::load(&mirrors_path, corpus::Format::Jsonl)?;
                let mirror_ids: HashSet<&str> = mirrors.ids().collect();
                for id in &round.training_ids {
                    if mirror_ids.contains(id.as_str()) {
                        continue;
                    }
                    let doc = by_id.get(id.as_str()).ok_or_else(|| {
                        MiningError::Ledger(format!("training id {id} not in pool"))
                    })?;
                    training.push((*doc).clone());
                }
                training.extend(mirrors.into_docs());
            }
            rounds.push(round);
            // Fold this round's additions so `training` always holds the
            // next round's set; the last replayed round matters too.
            let last = rounds.last().expect("just pushed");
            for id in &last.fp_ids {
                let doc = by_id
                    .get(id.as_str())
                    .ok_or_else(|| MiningError::Ledger(format!("fp id {id} not in pool")))?;
                training.push((*doc).clone());
            }
            let mirrors_path = self.round_dir(last.index).join("mirrors.jsonl");
            let mirrors = corpus::load(&mirrors_path, corpus::Format::Jsonl)?;
            training.extend(mirrors.into_docs());
        }

        if rounds.is_empty() {
            let t0 = init_training_set(
                self.train_pool,
                &self.cfg,
                &self.generators,
                &self.templates,
                &self.mirror_opts,
            )?;
            return self.drive(fixture, t0, Vec::new(), &mut on_round);
        }

        if rounds.last().is_some_and(|r| r.stop.is_some()) {
            // Already finished; reload the best model and return.
            let best = best_round_index(&rounds, &self.cfg);
            let best_model = ClassifierModel::load(self.round_dir(best).join("model.json"))?;
            return Ok(MiningOutcome {
                rounds,
                best_round: best,
                best_model,
            });
        }

        let training = Collection::new(training)?;
        self.drive(fixture, training, rounds, &mut on_round)
    }

    fn build_and_persist_fixture(&self) -> Result<EvalFixture, MiningError> {
        let fixture = EvalFixture::build(
            self.holdout,
            self.benchmark,
            &self.cfg,
            &self.generators,
            &self.templates,
            &self.mirror_opts,
            None,
        )?;
        let mirrors = Collection::new(fixture.eval_mirrors.clone())?;
        let path = self.run_dir.join("eval_mirrors.jsonl");
        corpus::save(&mirrors, &path)?;
        Ok(fixture)
    }

    /// The loop itself. `completed` holds replayed rounds when resuming.
    fn drive(
        &self,
        fixture: EvalFixture,
        mut training: Collection,
        completed: Vec<Round>,
        on_round: &mut impl FnMut(&Round),
    ) -> Result<MiningOutcome, MiningError> {
        let holdout_ids: HashSet<&str> = self
            .holdout
            .ids()
            .chain(self.benchmark.into_iter().flat_map(|b| b.ids()))
            .chain(fixture.eval_mirrors.iter().map(|d| d.id.as_str()))
            .collect();
        let mut rounds = completed;

        loop {
            let index = rounds.len() as u32;
            self.assert_hygiene(&holdout_ids, training.ids())?;

            let mut train_cfg = self.train_cfg.clone();
            train_cfg.seed = derive_seed(self.cfg.seed, "train", u64::from(index));
            let (mut model, history) = model::train(&training, &train_cfg)?;
            model.meta.round = Some(index);
            let best_val_loss = history.epochs[history.selected_epoch].val_loss;

            let mut metrics = fixture.evaluate(&model, &self.cfg, best_val_loss)?;

            // Stop checks that precede mining.
            let mut stop: Option<StopReason> = None;
            if index > 0 {
                let prev = &rounds[index as usize - 1];
                if !improved(&prev.metrics, &metrics, &self.cfg) {
                    stop = Some(StopReason::NoImprovement);
                }
            }
            if stop.is_none() && index as usize >= self.cfg.max_rounds {
                stop = Some(StopReason::MaxRounds);
            }

            let (fp_docs, mirrors) = if stop.is_none() {
                let training_ids: HashSet<&str> = training.ids().collect();
                let candidates: Vec<&Document> = self
                    .train_pool
                    .iter()
                    .filter(|d| d.label == Label::Human && !training_ids.contains(d.id.as_str()))
                    .collect();
                let mined = mine_false_positives(
                    &model,
                    &candidates,
                    &self.cfg,
                    derive_seed(self.cfg.seed, "mine", u64::from(index)),
                );
                metrics.pool_fpr = Some(mined.pool_fpr);
                if mined.docs.is_empty() {
                    stop = Some(StopReason::NoFalsePositives);
                    (Vec::new(), Vec::new())
                } else {
                    let batch = mirror_batch(
                        &mined.docs,
                        &self.templates,
                        &self.generators,
                        &self.mirror_opts,
                        derive_seed(self.cfg.seed, "fp-mirrors", u64::from(index)),
                    );
                    check_skip_budget(batch.skipped.len(), mined.docs.len(), &self.cfg)?;
                    // Keep only pairs: a mined doc enters T alongside its
                    // accepted mirror, so |S| tracks the accepted set.
                    let mirrored: HashSet<&str> = batch
                        .mirrors
                        .iter()
                        .filter_map(|m| m.mirror_of.as_deref())
                        .collect();
                    let kept: Vec<&Document> = mined
                        .docs
                        .iter()
                        .copied()
                        .filter(|d| mirrored.contains(d.id.as_str()))
                        .collect();
                    (kept, batch.mirrors)
                }
            } else {
                (Vec::new(), Vec::new())
            };

            let leak = fp_docs
                .iter()
                .map(|d| d.id.as_str())
                .chain(mirrors.iter().map(|m| m.id.as_str()))
                .find(|id| holdout_ids.contains(id));
            if let Some(leak) = leak {
                return Err(MiningError::HoldoutContamination(leak.to_string()));
            }

            let round = Round {
                index,
                training_set_id: format!("T{index}"),
                model_id: format!("M{index}"),
                training_ids: training.ids().map(str::to_string).collect(),
                fp_ids: fp_docs.iter().map(|d| d.id.clone()).collect(),
                mirror_ids: mirrors.iter().map(|d| d.id.clone()).collect(),
                metrics,
                stop,
            };
            self.persist_round(&round, &model, &training, &mirrors)?;
            on_round(&round);
            let done = round.stop.is_some();
            rounds.push(round);
            if done {
                break;
            }

            let mut next: Vec<Document> = training.into_docs();
            next.extend(fp_docs.into_iter().cloned());
            next.extend(mirrors);
            training = Collection::new(next)?;
        }

        let best = best_round_index(&rounds, &self.cfg);
        let best_model = ClassifierModel::load(self.round_dir(best).join("model.json"))?;
        Ok(MiningOutcome {
            rounds,
            best_round: best,
            best_model,
        })
    }

    fn assert_hygiene<'i>(
        &self,
        holdout_ids: &HashSet<&str>,
        mut ids: impl Iterator<Item = &'i str>,
    ) -> Result<(), MiningError> {
        if let Some(leak) = ids.find(|id| holdout_ids.contains(id)) {
            return Err(MiningError::HoldoutContamination(leak.to_string()));
        }
        Ok(())
    }

    fn persist_round(
        &self,
        round: &Round,
        model: &ClassifierModel,
        training: &Collection,
        mirrors: &[Document],
    ) -> Result<(), MiningError> {
        let dir = self.round_dir(round.index);
        std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        model.save(dir.join("model.json"))?;
        if round.index == 0 {
            // T0 mirrors are not pool documents; persist them for resume.
            let t0_mirrors: Vec<Document> = training
                .iter()
                .filter(|d| d.label == Label::Ai)
                .cloned()
                .collect();
            corpus::save(&Collection::new(t0_mirrors)?, dir.join("t0_mirrors.jsonl"))?;
        }
        corpus::save(&Collection::new(mirrors.to_vec())?, dir.join("mirrors.jsonl"))?;
        let path = dir.join("round.json");
        let json = serde_json::to_string_pretty(round).expect("round serializes");
        std::fs::write(&path, json).map_err(io_err(&path))?;
        Ok(())
    }
}

/// Relative-improvement test between consecutive rounds.
fn improved(prev: &RoundMetrics, cur: &RoundMetrics, cfg: &MiningConfig) -> bool {
    let delta = cfg.min_improvement;
    let loss_improved = |prev: f64, cur: f64| cur.is_finite() && cur <= prev * (1.0 - delta);
    match cfg.improvement_metric {
        ImprovementMetric::ValidationLoss => {
            loss_improved(prev.validation_loss, cur.validation_loss)
        }
        ImprovementMetric::HoldoutWeightedFpr => {
            let p = prev.weighted_fpr.map(|r| r.to_f64()).unwrap_or(f64::NAN);
            let c = cur.weighted_fpr.map(|r| r.to_f64()).unwrap_or(f64::NAN);
            if !p.is_finite() || !c.is_finite() {
                return false;
            }
            if p == c {
                // ties (e.g. both zero) fall back to validation loss
                loss_improved(prev.validation_loss, cur.validation_loss)
            } else {
                c <= p * (1.0 - delta)
            }
        }
    }
}

fn best_round_index(rounds: &[Round], cfg: &MiningConfig) -> u32 {
    let mut best = 0u32;
    for i in 1..rounds.len() {
        if improved(&rounds[i - 1].metrics, &rounds[i].metrics, cfg) {
            best = i as u32;
        } else {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mirrorgen::{Simulacrum, SimulacrumConfig};
    use crate::synthcorpus::{self, SynthCorpusConfig};

    fn doc(id: &str, domain: &str) -> Document {
        Document::human(id, format!("text for {id} {}", "w ".repeat(60)), domain, "s")
    }

    fn mini_cfg() -> MiningConfig {
        MiningConfig {
            n: 10,
            m: 50,
            per_domain_fp_cap: 10,
            min_domain_pool: Some(1),
            eval_mirrors_per_domain: 5,
            seed: 11,
            ..MiningConfig::default()
        }
    }

    fn sim_generators() -> Vec<Box<dyn Generator>> {
        vec![Box::new(Simulacrum::new(7, SimulacrumConfig::default()))]
    }

    #[test]
    fn selection_takes_only_scores_above_threshold() {
        let docs: Vec<Document> = (0..1000).map(|i| doc(&format!("d{i}"), "a")).collect();
        let refs: Vec<&Document> = docs.iter().collect();
        let scores: Vec<f64> = (0..1000)
            .map(|i| if i % 9 == 0 || (i % 9 != 0 && i < 10) { 0.9 } else { 0.1 })
            .collect();
        let planted = scores.iter().filter(|&&s| s > 0.5).count();
        assert_eq!(planted, 120);
        let cfg = MiningConfig {
            m: 50,
            per_domain_fp_cap: 1000,
            min_domain_pool: Some(1),
            ..MiningConfig::default()
        };
        let mined = select_false_positives(&refs, &scores, &cfg, 5);
        assert_eq!(mined.docs.len(), 50);
        assert_eq!(mined.pool_fpr, Ratio::new(120, 1000));
        // oracle: every selected doc scored above the threshold
        let by_id: BTreeMap<&str, f64> = refs
            .iter()
            .zip(&scores)
            .map(|(d, &s)| (d.id.as_str(), s))
            .collect();
        assert!(mined.docs.iter().all(|d| by_id[d.id.as_str()] > 0.5));
    }

    #[test]
    fn zero_scores_mine_nothing() {
        let docs: Vec<Document> = (0..20).map(|i| doc(&format!("d{i}"), "a")).collect();
        let refs: Vec<&Document> = docs.iter().collect();
        let scores = vec![0.0; 20];
        let mined = select_false_positives(&refs, &scores, &mini_cfg(), 1);
        assert!(mined.docs.is_empty());
        assert_eq!(mined.pool_fpr, Ratio::zero());
    }

    #[test]
    fn per_domain_cap_is_enforced() {
        let mut docs: Vec<Document> = (0..200).map(|i| doc(&format!("hot{i}"), "hot")).collect();
        docs.extend((0..50).map(|i| doc(&format!("cool{i}"), "cool")));
        let refs: Vec<&Document> = docs.iter().collect();
        let scores = vec![0.9; 250];
        let cfg = MiningConfig {
            m: 250,
            per_domain_fp_cap: 10,
            min_domain_pool: Some(1),
            ..MiningConfig::default()
        };
        let mined = select_false_positives(&refs, &scores, &cfg, 2);
        let hot = mined.docs.iter().filter(|d| d.domain == "hot").count();
        let cool = mined.docs.iter().filter(|d| d.domain == "cool").count();
        assert!(hot <= 10, "hot domain got {hot}");
        assert!(cool <= 10);
    }

    #[test]
    fn small_domains_skip_mining() {
        let mut docs: Vec<Document> = (0..100).map(|i| doc(&format!("big{i}"), "big")).collect();
        docs.extend((0..5).map(|i| doc(&format!("tiny{i}"), "tiny")));
        let refs: Vec<&Document> = docs.iter().collect();
        let scores = vec![0.9; 105];
        let cfg = MiningConfig {
            m: 200,
            per_domain_fp_cap: 100,
            min_domain_pool: Some(50),
            ..MiningConfig::default()
        };
        let mined = select_false_positives(&refs, &scores, &cfg, 3);
        assert!(mined.docs.iter().all(|d| d.domain == "big"));
        assert!(!mined.docs.is_empty());
    }

    #[test]
    fn selection_is_deterministic() {
        let docs: Vec<Document> = (0..300).map(|i| doc(&format!("d{i}"), if i % 2 == 0 { "a" } else { "b" })).collect();
        let refs: Vec<&Document> = docs.iter().collect();
        let scores: Vec<f64> = (0..300).map(|i| (i % 10) as f64 / 10.0).collect();
        let cfg = MiningConfig {
            m: 30,
            per_domain_fp_cap: 20,
            min_domain_pool: Some(1),
            ..MiningConfig::default()
        };
        let a = select_false_positives(&refs, &scores, &cfg, 9);
        let b = select_false_positives(&refs, &scores, &cfg, 9);
        let ids =
            |m: &MinedFps| m.docs.iter().map(|d| d.id.clone()).collect::<Vec<_>>();
        assert_eq!(ids(&a), ids(&b));
    }

    #[test]
    fn init_stratifies_humans_per_domain() {
        let cfg = SynthCorpusConfig {
            docs_per_domain: 20,
            seed: 5,
            ..SynthCorpusConfig::default()
        };
        let pool = synthcorpus::generate(&cfg);
        let t0 = init_training_set(
            &pool,
            &mini_cfg(),
            &sim_generators(),
            &TemplateSet::builtin(),
            &MirrorOptions::default(),
        )
        .unwrap();
        let humans: Vec<&Document> = t0.iter().filter(|d| d.label == Label::Human).collect();
        assert_eq!(humans.len(), 10);
        let mut per_domain: BTreeMap<&str, usize> = BTreeMap::new();
        for h in &humans {
            *per_domain.entry(h.domain.as_str()).or_default() += 1;
        }
        assert!(per_domain.values().all(|&c| c == 2), "{per_domain:?}");
        let mirrors: Vec<&Document> = t0.iter().filter(|d| d.label == Label::Ai).collect();
        assert_eq!(mirrors.len(), humans.len());
        for m in mirrors {
            assert!(humans
                .iter()
                .any(|h| Some(h.id.as_str()) == m.mirror_of.as_deref()));
        }
    }

    #[test]
    fn init_is_deterministic() {
        let cfg = SynthCorpusConfig {
            docs_per_domain: 20,
            seed: 5,
            ..SynthCorpusConfig::default()
        };
        let pool = synthcorpus::generate(&cfg);
        let a = init_training_set(&pool, &mini_cfg(), &sim_generators(), &TemplateSet::builtin(), &MirrorOptions::default()).unwrap();
        let b = init_training_set(&pool, &mini_cfg(), &sim_generators(), &TemplateSet::builtin(), &MirrorOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn init_rejects_insufficient_pool() {
        let docs: Vec<Document> = (0..5).map(|i| doc(&format!("d{i}"), "only")).collect();
        let pool = Collection::new(docs).unwrap();
        let err = init_training_set(
            &pool,
            &mini_cfg(),
            &sim_generators(),
            &TemplateSet::builtin(),
            &MirrorOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, MiningError::InsufficientPool { .. }), "{err}");
    }
}
