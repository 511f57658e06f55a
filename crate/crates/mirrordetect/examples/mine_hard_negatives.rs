//! The full mining loop at desk scale: initial mirrored training set,
//! iterate false-positive mining and retraining, stop on the improvement
//! metric, persist a resumable round ledger.
//!
//! ```bash
//! cargo run --release --example mine_hard_negatives
//! ```

use mirrordetect::corpus::{self, SplitSpec};
use mirrordetect::mining::{MiningConfig, MiningRun};
use mirrordetect::mirrorgen::{Generator, MirrorOptions, Simulacrum, SimulacrumConfig, TemplateSet};
use mirrordetect::model::{FeatureConfig, TrainConfig};
use mirrordetect::synthcorpus::{self, SynthCorpusConfig};
use std::collections::BTreeMap;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Human pool with a formulaic subpopulation concentrated in three
    // domains; the mining loop should find and defuse it.
    let mut hard = BTreeMap::new();
    hard.insert("qa".to_string(), 0.30);
    hard.insert("email".to_string(), 0.30);
    hard.insert("news".to_string(), 0.15);
    let pool = synthcorpus::generate(&SynthCorpusConfig {
        seed: 1234,
        docs_per_domain: 600,
        hard_fraction: hard,
        default_hard_fraction: 0.03,
        hard_synonym_rate: 0.55,
        hard_filler_bias: 0.12,
        min_words: 120,
        ..SynthCorpusConfig::default()
    });
    let (train_pool, holdout) = corpus::split(
        &pool,
        &SplitSpec { seed: 7, holdout_fraction: 0.25, per_domain: true },
    )?;

    // Clean benchmark for threshold calibration, separate from the pool.
    let benchmark = synthcorpus::generate(&SynthCorpusConfig {
        seed: 4321,
        docs_per_domain: 200,
        default_hard_fraction: 0.0,
        hard_fraction: BTreeMap::new(),
        id_tag: "b".to_string(),
        min_words: 120,
        ..SynthCorpusConfig::default()
    });

    let generators: Vec<Box<dyn Generator>> = vec![Box::new(Simulacrum::new(
        99,
        SimulacrumConfig {
            tells_per_100_words: 3.0,
            filler_bias: 0.35,
            synonym_rate: 0.02,
            ..SimulacrumConfig::default()
        },
    ))];

    let dir = tempfile::tempdir()?;
    let run = MiningRun {
        train_pool: &train_pool,
        holdout: &holdout,
        benchmark: Some(&benchmark),
        cfg: MiningConfig {
            n: 400,
            m: 400,
            per_domain_fp_cap: 200,
            fp_threshold: 0.10,
            min_domain_pool: Some(50),
            max_rounds: 2,
            eval_mirrors_per_domain: 40,
            seed: 2024,
            ..MiningConfig::default()
        },
        train_cfg: TrainConfig {
            learning_rate: 2.0,
            lr_decay: 0.05,
            max_epochs: 20,
            batch_size: 16,
            seed: 0,
            validation_fraction: 0.1,
            patience: 4,
            feature: FeatureConfig { dim_exponent: 17, ngram_min: 3, ngram_max: 5 },
        },
        generators,
        templates: TemplateSet::builtin(),
        mirror_opts: MirrorOptions::default(),
        run_dir: dir.path().to_path_buf(),
    };

    println!(
        "pool {} | holdout {} | benchmark {}",
        train_pool.len(),
        holdout.len(),
        benchmark.len()
    );
    let outcome = run.execute_with(|round| {
        println!(
            "round {}: |T|={} mined {} FPs, weighted FPR {}, FNR {}, val loss {:.4}{}",
            round.index,
            round.training_ids.len(),
            round.fp_ids.len(),
            round
                .metrics
                .weighted_fpr
                .map(|r| format!("{:.4}", r.to_f64()))
                .unwrap_or_default(),
            round
                .metrics
                .fnr
                .map(|r| format!("{:.4}", r.to_f64()))
                .unwrap_or_default(),
            round.metrics.validation_loss,
            round
                .stop
                .map(|s| format!("  [stop: {s:?}]"))
                .unwrap_or_default(),
        );
    })?;
    println!(
        "\nbest model: round {} (ledger in {})",
        outcome.best_round,
        dir.path().display()
    );
    Ok(())
}
