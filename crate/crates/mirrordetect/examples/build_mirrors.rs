//! Mirror prompting: fill a domain template from a human document, then
//! generate the synthetic counterpart with the offline simulacrum.
//!
//! ```bash
//! cargo run --example build_mirrors
//! ```

use mirrordetect::corpus::Document;
use mirrordetect::mirrorgen::{
    build_prompt, mirror_batch, Generator, MirrorOptions, Simulacrum, SimulacrumConfig,
    TemplateSet,
};
use mirrordetect::synthcorpus::{self, SynthCorpusConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let templates = TemplateSet::builtin();

    // One review with the metadata its template needs.
    let text = "The patio was packed but service stayed quick. We ordered the brunch special and the portions were generous. Coffee refills came without asking, and the staff remembered our usual table. Prices crept up since last year, but the pastry case alone keeps us coming back every weekend morning without fail.";
    let mut doc = Document::human("demo-review", text, "reviews", "example");
    doc.extra.insert("rating".into(), serde_json::json!(4));
    doc.extra.insert("business".into(), serde_json::json!("The Copper Kettle"));
    doc.extra.insert("topic".into(), serde_json::json!("brunch and coffee"));

    let template = templates.pick(&doc)?;
    let prompt = build_prompt(&doc, template)?;
    println!("template {} ({})", template.template_id, template.style);
    for turn in &prompt.turns {
        println!("[{:?}] {}", turn.role, turn.text);
    }

    let generator = Simulacrum::new(11, SimulacrumConfig::default());
    let mirror = mirrordetect::mirrorgen::generate_mirror(&prompt, &generator, &MirrorOptions::default())?;
    println!(
        "\nmirror {} ({} words, target {}):\n{}\n",
        mirror.id,
        mirror.word_count,
        prompt.target_words,
        mirror.text.lines().next().unwrap_or("")
    );

    // Batch mode over a small corpus: order-stable, skip-and-log.
    let pool = synthcorpus::generate(&SynthCorpusConfig {
        seed: 3,
        docs_per_domain: 10,
        ..SynthCorpusConfig::default()
    });
    let sources: Vec<&Document> = pool.iter().collect();
    let generators: Vec<Box<dyn Generator>> =
        vec![Box::new(Simulacrum::new(11, SimulacrumConfig::default()))];
    let batch = mirror_batch(&sources, &templates, &generators, &MirrorOptions::default(), 99);
    println!(
        "batch: {} mirrors, {} skipped, mean relative length error {:.3}",
        batch.mirrors.len(),
        batch.skipped.len(),
        batch.mean_relative_length_error(&sources)
    );
    Ok(())
}
