//! Train the hashed n-gram classifier on a human/mirror mixture and score
//! some held-out text.
//!
//! ```bash
//! cargo run --example train_classifier
//! ```

use mirrordetect::corpus::{Collection, Document, Label};
use mirrordetect::mirrorgen::{mirror_batch, Generator, MirrorOptions, Simulacrum, SimulacrumConfig, TemplateSet};
use mirrordetect::model::{self, FeatureConfig, TrainConfig};
use mirrordetect::synthcorpus::{self, SynthCorpusConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pool = synthcorpus::generate(&SynthCorpusConfig {
        seed: 21,
        docs_per_domain: 220,
        ..SynthCorpusConfig::default()
    });
    let (humans, held): (Vec<&Document>, Vec<&Document>) = {
        let docs: Vec<&Document> = pool.iter().collect();
        let cut = docs.len() - 100;
        (docs[..cut].to_vec(), docs[cut..].to_vec())
    };

    let generators: Vec<Box<dyn Generator>> =
        vec![Box::new(Simulacrum::new(5, SimulacrumConfig::default()))];
    let batch = mirror_batch(&humans, &TemplateSet::builtin(), &generators, &MirrorOptions::default(), 7);
    println!("{} humans, {} mirrors", humans.len(), batch.mirrors.len());

    let mut docs: Vec<Document> = humans.iter().map(|d| (*d).clone()).collect();
    docs.extend(batch.mirrors);
    let train_set = Collection::new(docs)?;

    let cfg = TrainConfig {
        learning_rate: 1.5,
        lr_decay: 0.1,
        max_epochs: 10,
        batch_size: 32,
        seed: 1,
        validation_fraction: 0.1,
        patience: 3,
        feature: FeatureConfig {
            dim_exponent: 16,
            ngram_min: 3,
            ngram_max: 5,
        },
    };
    let (classifier, history) = model::train(&train_set, &cfg)?;
    for epoch in &history.epochs {
        println!(
            "epoch {:>2}: train loss {:.4} acc {:.3} | val loss {:.4} acc {:.3}",
            epoch.epoch, epoch.train_loss, epoch.train_accuracy, epoch.val_loss, epoch.val_accuracy
        );
    }
    println!("selected checkpoint: epoch {}", history.selected_epoch);

    // score held-out humans and fresh mirrors of them
    let held_mirrors = mirror_batch(&held, &TemplateSet::builtin(), &generators, &MirrorOptions::default(), 8);
    let human_scores: Vec<f64> = held.iter().map(|d| classifier.predict(&d.text)).collect();
    let ai_scores: Vec<f64> = held_mirrors.mirrors.iter().map(|d| classifier.predict(&d.text)).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    println!(
        "held-out mean score: humans {:.3}, mirrors {:.3}",
        mean(&human_scores),
        mean(&ai_scores)
    );

    // models round-trip through a versioned file
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("model.json");
    classifier.save(&path)?;
    let reloaded = model::ClassifierModel::load(&path)?;
    assert_eq!(reloaded.predict("sample text"), classifier.predict("sample text"));
    println!("model saved and reloaded from {}", path.display());

    let ai_like = train_set.iter().find(|d| d.label == Label::Ai).unwrap();
    println!("example mirror score: {:.3}", classifier.predict(&ai_like.text));
    Ok(())
}
