//! Scaling experiment: train at increasing per-domain sizes, evaluate each
//! checkpoint on a fixed common test set, and watch accuracy saturate.
//!
//! ```bash
//! cargo run --release --example scaling_curve
//! ```

use mirrordetect::evaluation::{self, ScalingOptions};
use mirrordetect::mirrorgen::{Generator, MirrorOptions, Simulacrum, SimulacrumConfig, TemplateSet};
use mirrordetect::model::{FeatureConfig, TrainConfig};
use mirrordetect::synthcorpus::{self, SynthCorpusConfig};
use std::collections::BTreeMap;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut hard = BTreeMap::new();
    hard.insert("qa".to_string(), 0.30);
    hard.insert("email".to_string(), 0.30);
    let pool = synthcorpus::generate(&SynthCorpusConfig {
        seed: 88,
        docs_per_domain: 900,
        hard_fraction: hard,
        default_hard_fraction: 0.03,
        hard_synonym_rate: 0.02,
        hard_filler_bias: 0.35,
        min_words: 120,
        ..SynthCorpusConfig::default()
    });

    let generators: Vec<Box<dyn Generator>> = vec![Box::new(Simulacrum::new(
        5,
        SimulacrumConfig {
            tells_per_100_words: 3.0,
            filler_bias: 0.35,
            synonym_rate: 0.02,
            ..SimulacrumConfig::default()
        },
    ))];
    let train_cfg = TrainConfig {
        learning_rate: 2.0,
        lr_decay: 0.05,
        max_epochs: 8,
        batch_size: 32,
        seed: 0,
        validation_fraction: 0.1,
        patience: 2,
        feature: FeatureConfig { dim_exponent: 16, ngram_min: 3, ngram_max: 5 },
    };
    let opts = ScalingOptions {
        seed: 31,
        test_docs_per_domain: 150,
        templates: TemplateSet::builtin(),
        mirror: MirrorOptions::default(),
    };

    let sizes = [100usize, 300, 700];
    let curve = evaluation::scaling_experiment(&pool, &sizes, &generators, &train_cfg, &opts)?;
    println!("{:>10} {:>10} {:>10}  {}", "size", "loss", "accuracy", "checkpoint");
    for point in &curve.points {
        println!(
            "{:>10} {:>10.4} {:>10.4}  {}",
            point.train_size_per_domain, point.test_loss, point.test_accuracy, point.checkpoint_id
        );
    }

    let dir = tempfile::tempdir()?;
    let csv = dir.path().join("scaling.csv");
    curve.write_csv(&csv)?;
    println!("curve written to {}", csv.display());
    Ok(())
}
