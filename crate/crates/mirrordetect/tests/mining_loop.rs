//! End-to-end tests of the mining round loop against the synthetic corpus
//! and the offline generator: training-set growth invariants, holdout
//! hygiene, ledger determinism, and kill-and-resume equivalence.

use mirrordetect::corpus::{self, Label, SplitSpec};
use mirrordetect::mining::{MiningConfig, MiningRun, StopReason};
use mirrordetect::mirrorgen::{Generator, MirrorOptions, Simulacrum, SimulacrumConfig, TemplateSet};
use mirrordetect::model::{FeatureConfig, TrainConfig};
use mirrordetect::synthcorpus::{self, SynthCorpusConfig};
use std::collections::HashSet;
use std::path::Path;

fn generators() -> Vec<Box<dyn Generator>> {
    vec![Box::new(Simulacrum::new(3, SimulacrumConfig::default()))]
}

fn small_train_cfg() -> TrainConfig {
    TrainConfig {
        learning_rate: 1.0,
        lr_decay: 0.1,
        max_epochs: 6,
        batch_size: 32,
        seed: 0,
        validation_fraction: 0.15,
        patience: 2,
        feature: FeatureConfig {
            dim_exponent: 14,
            ngram_min: 3,
            ngram_max: 5,
        },
    }
}

fn small_mining_cfg(max_rounds: usize) -> MiningConfig {
    MiningConfig {
        n: 150,
        m: 60,
        per_domain_fp_cap: 30,
        min_domain_pool: Some(10),
        max_rounds,
        eval_mirrors_per_domain: 15,
        min_improvement: 0.01,
        seed: 77,
        ..MiningConfig::default()
    }
}

fn build_run<'a>(
    train_pool: &'a corpus::Collection,
    holdout: &'a corpus::Collection,
    dir: &Path,
    max_rounds: usize,
) -> MiningRun<'a> {
    MiningRun {
        train_pool,
        holdout,
        benchmark: None,
        cfg: small_mining_cfg(max_rounds),
        train_cfg: small_train_cfg(),
        generators: generators(),
        templates: TemplateSet::builtin(),
        mirror_opts: MirrorOptions::default(),
        run_dir: dir.to_path_buf(),
    }
}

fn pool_and_holdout() -> (corpus::Collection, corpus::Collection) {
    let corpus_cfg = SynthCorpusConfig {
        seed: 42,
        docs_per_domain: 140,
        ..SynthCorpusConfig::default()
    };
    let pool = synthcorpus::generate(&corpus_cfg);
    let spec = SplitSpec {
        seed: 9,
        holdout_fraction: 0.25,
        per_domain: true,
    };
    corpus::split(&pool, &spec).unwrap()
}

/// Every file under a directory, relative path -> content bytes.
fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(current) = stack.pop() {
        for entry in std::fs::read_dir(&current).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                if rel == "run.log.jsonl" {
                    continue; // timestamps
                }
                files.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn round_loop_invariants_hold() {
    let (train_pool, holdout) = pool_and_holdout();
    let dir = tempfile::tempdir().unwrap();
    let run = build_run(&train_pool, &holdout, dir.path(), 2);
    let outcome = run.execute().unwrap();

    assert!(!outcome.rounds.is_empty());
    assert!(outcome.rounds.last().unwrap().stop.is_some());

    let holdout_ids: HashSet<&str> = holdout.ids().collect();
    for window in outcome.rounds.windows(2) {
        let (prev, next) = (&window[0], &window[1]);
        // training sets grow monotonically by exactly |F| + |S|
        let prev_ids: HashSet<&String> = prev.training_ids.iter().collect();
        let next_ids: HashSet<&String> = next.training_ids.iter().collect();
        assert!(prev_ids.is_subset(&next_ids), "T{} not subset of T{}", prev.index, next.index);
        assert_eq!(
            next.training_ids.len() - prev.training_ids.len(),
            prev.fp_ids.len() + prev.mirror_ids.len()
        );
    }
    for round in &outcome.rounds {
        // holdout hygiene, asserted from the persisted ledger
        for id in round
            .training_ids
            .iter()
            .chain(&round.fp_ids)
            .chain(&round.mirror_ids)
        {
            assert!(!holdout_ids.contains(id.as_str()), "holdout id {id} leaked");
        }
        // mined docs are human, mirrors are ai with valid links
        let by_id = |id: &str| train_pool.get(id);
        for id in &round.fp_ids {
            assert_eq!(by_id(id).unwrap().label, Label::Human);
        }
        let mirrors_path = dir
            .path()
            .join("rounds")
            .join(format!("round_{:04}", round.index))
            .join("mirrors.jsonl");
        let mirrors = corpus::load(&mirrors_path, corpus::Format::Jsonl).unwrap();
        assert_eq!(mirrors.len(), round.mirror_ids.len());
        for mirror in mirrors.iter() {
            assert_eq!(mirror.label, Label::Ai);
            let source = mirror.mirror_of.as_deref().unwrap();
            assert!(round.fp_ids.iter().any(|id| id == source));
            assert_eq!(mirror.domain, by_id(source).unwrap().domain);
        }
    }
}

#[test]
fn max_rounds_zero_returns_single_round() {
    let (train_pool, holdout) = pool_and_holdout();
    let dir = tempfile::tempdir().unwrap();
    let run = build_run(&train_pool, &holdout, dir.path(), 0);
    let outcome = run.execute().unwrap();
    assert_eq!(outcome.rounds.len(), 1);
    assert_eq!(outcome.rounds[0].stop, Some(StopReason::MaxRounds));
    assert!(outcome.rounds[0].fp_ids.is_empty());
    assert_eq!(outcome.best_round, 0);
}

#[test]
fn two_seeded_runs_produce_identical_ledgers() {
    let (train_pool, holdout) = pool_and_holdout();
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    build_run(&train_pool, &holdout, dir_a.path(), 1)
        .execute()
        .unwrap();
    build_run(&train_pool, &holdout, dir_b.path(), 1)
        .execute()
        .unwrap();
    let a = snapshot(dir_a.path());
    let b = snapshot(dir_b.path());
    assert_eq!(
        a.iter().map(|(p, _)| p).collect::<Vec<_>>(),
        b.iter().map(|(p, _)| p).collect::<Vec<_>>()
    );
    for ((path_a, bytes_a), (_, bytes_b)) in a.iter().zip(&b) {
        assert_eq!(bytes_a, bytes_b, "file {path_a} differs between runs");
    }
}

#[test]
fn killed_and_resumed_run_matches_uninterrupted() {
    let (train_pool, holdout) = pool_and_holdout();

    // Uninterrupted reference run.
    let full_dir = tempfile::tempdir().unwrap();
    let full = build_run(&train_pool, &holdout, full_dir.path(), 2);
    let full_outcome = full.execute().unwrap();
    assert!(full_outcome.rounds.len() >= 2, "need at least two rounds to test resume");

    // Simulate a kill after round 0: copy the ledger, drop later rounds.
    let cut_dir = tempfile::tempdir().unwrap();
    copy_tree(full_dir.path(), cut_dir.path());
    for round in 1..full_outcome.rounds.len() {
        let dir = cut_dir
            .path()
            .join("rounds")
            .join(format!("round_{round:04}"));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    let resumed = build_run(&train_pool, &holdout, cut_dir.path(), 2);
    let resumed_outcome = resumed.resume().unwrap();
    assert_eq!(resumed_outcome.rounds, full_outcome.rounds);
    assert_eq!(resumed_outcome.best_round, full_outcome.best_round);

    let a = snapshot(full_dir.path());
    let b = snapshot(cut_dir.path());
    assert_eq!(a.len(), b.len());
    for ((path_a, bytes_a), (_, bytes_b)) in a.iter().zip(&b) {
        assert_eq!(bytes_a, bytes_b, "file {path_a} differs after resume");
    }
}

#[test]
fn resume_of_finished_run_is_a_no_op() {
    let (train_pool, holdout) = pool_and_holdout();
    let dir = tempfile::tempdir().unwrap();
    let run = build_run(&train_pool, &holdout, dir.path(), 1);
    let first = run.execute().unwrap();
    let before = snapshot(dir.path());
    let second = build_run(&train_pool, &holdout, dir.path(), 1)
        .resume()
        .unwrap();
    assert_eq!(first.rounds, second.rounds);
    assert_eq!(before, snapshot(dir.path()));
}

#[test]
fn resume_rejects_a_different_pool() {
    let (train_pool, holdout) = pool_and_holdout();
    let dir = tempfile::tempdir().unwrap();
    build_run(&train_pool, &holdout, dir.path(), 0)
        .execute()
        .unwrap();
    let other_cfg = SynthCorpusConfig {
        seed: 999,
        docs_per_domain: 140,
        ..SynthCorpusConfig::default()
    };
    let other_pool = synthcorpus::generate(&other_cfg);
    let spec = SplitSpec {
        seed: 9,
        holdout_fraction: 0.25,
        per_domain: true,
    };
    let (other_train, other_holdout) = corpus::split(&other_pool, &spec).unwrap();
    let run = build_run(&other_train, &other_holdout, dir.path(), 0);
    assert!(run.resume().is_err());
}

fn copy_tree(from: &Path, to: &Path) {
    for entry in std::fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.path().is_dir() {
            std::fs::create_dir_all(&target).unwrap();
            copy_tree(&entry.path(), &target);
        } else {
            std::fs::copy(entry.path(), &target).unwrap();
        }
    }
}
