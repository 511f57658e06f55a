//! Corpus handling: load a JSONL collection, drop normalized-text
//! duplicates, and carve a stratified holdout.
//!
//! ```bash
//! cargo run --example ingest_split_dedupe
//! ```

use mirrordetect::corpus::{self, Collection, Document, SplitSpec};
use mirrordetect::synthcorpus::{self, SynthCorpusConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("pool.jsonl");

    // A seeded demo corpus, with two planted duplicates that differ only
    // in quote style.
    let pool = synthcorpus::generate(&SynthCorpusConfig {
        seed: 7,
        docs_per_domain: 40,
        ..SynthCorpusConfig::default()
    });
    let mut docs = pool.into_docs();
    let copied = docs[0].text.replace(' ', "  ");
    docs.push(Document::human("dup-0", copied, "reviews", "demo"));
    corpus::save(&Collection::new(docs)?, &path)?;

    let loaded = corpus::load(&path, corpus::Format::Jsonl)?;
    println!("loaded {} documents from {}", loaded.len(), path.display());
    for warning in corpus::curation_warnings(&loaded) {
        println!("warning: {warning}");
    }

    let deduped = corpus::dedupe(&loaded);
    println!("dedupe removed {} near-identical documents", loaded.len() - deduped.len());

    let (train, holdout) = corpus::split(
        &deduped,
        &SplitSpec {
            seed: 42,
            holdout_fraction: 0.2,
            per_domain: true,
        },
    )?;
    println!("split: {} train / {} holdout", train.len(), holdout.len());
    for domain in ["reviews", "essays", "news", "email", "qa"] {
        let held = holdout.iter().filter(|d| d.domain == domain).count();
        println!("  {domain}: {held} held out");
    }
    Ok(())
}
