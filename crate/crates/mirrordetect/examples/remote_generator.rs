//! Mirror generation against a remote chat-completion endpoint.
//!
//! Point the client at any OpenAI-compatible `/chat/completions` URL:
//!
//! ```bash
//! export GENERATOR_ENDPOINT="http://localhost:8000/v1/chat/completions"
//! export GENERATOR_API_KEY="sk-..."
//! export GENERATOR_MODEL="my-model"       # optional
//! cargo run --example remote_generator
//! ```
//!
//! Without GENERATOR_ENDPOINT set, this prints the request it would send
//! and exits; the offline simulacrum examples stay fully hermetic.

use mirrordetect::corpus::Document;
use mirrordetect::mirrorgen::{
    build_generator, build_prompt, generate_mirror, GeneratorSpec, MirrorOptions, TemplateSet,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = "Rain moved in before the second inning and never let up. The grounds crew fought the tarp while fans huddled under the concourse. By the time the umpires called it, the only dry spot in the stadium was the press box, and even that was debatable according to the beat reporters.";
    let mut doc = Document::human("demo-news", text, "news", "example");
    doc.extra.insert("topic".into(), serde_json::json!("a rained-out ballgame"));

    let template = TemplateSet::builtin().pick(&doc)?.clone();
    let prompt = build_prompt(&doc, &template)?;

    let Ok(endpoint) = std::env::var("GENERATOR_ENDPOINT") else {
        println!("GENERATOR_ENDPOINT not set; request that would be sent:");
        for turn in &prompt.turns {
            println!("[{:?}] {}", turn.role, turn.text);
        }
        return Ok(());
    };

    let spec = GeneratorSpec {
        name: std::env::var("GENERATOR_MODEL").unwrap_or_else(|_| "gpt-4o-mini".into()),
        endpoint,
        api_key_env: Some("GENERATOR_API_KEY".into()),
        max_in_flight: 2,
        retry_budget: 3,
        ..GeneratorSpec::default()
    };
    let generator = build_generator(&spec, None)?;
    let mirror = generate_mirror(&prompt, generator.as_ref(), &MirrorOptions::default())?;
    println!(
        "mirror {} from {} ({} words):\n\n{}",
        mirror.id,
        mirror.generator.as_deref().unwrap_or("?"),
        mirror.word_count,
        mirror.text
    );
    Ok(())
}
