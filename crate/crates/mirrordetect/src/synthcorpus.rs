//! Seeded synthetic human corpus for hermetic experiments.
//!
//! Documents span the bundled template domains and carry the metadata the
//! templates need (topic, rating, business). A configurable fraction per
//! domain is "formulaic": written with the simulacrum's regular sentence
//! lengths and rare-synonym habit but no tell phrases. Those documents look
//! AI-ish to a weakly trained classifier, which is exactly the hard human
//! subpopulation that mining is supposed to surface.

use crate::corpus::{Collection, Document};
use crate::hashing::derive_seed;
use crate::mirrorgen::wordlists::{FILLER_WORDS, PREFERRED_FILLER, SYNONYM_TABLE};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// The domains the bundled templates cover.
pub const DOMAINS: &[&str] = &["reviews", "essays", "news", "email", "qa"];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthCorpusConfig {
    pub seed: u64,
    pub docs_per_domain: usize,
    /// Domains to generate; defaults to every bundled template domain.
    pub domains: Vec<String>,
    /// Fraction of formulaic (hard) documents per domain; domains not
    /// listed fall back to `default_hard_fraction`.
    pub hard_fraction: BTreeMap<String, f64>,
    pub default_hard_fraction: f64,
    pub min_words: usize,
    pub max_words: usize,
    /// Id infix, e.g. "h" gives ids like `reviews-h00042`. Distinct tags
    /// keep separately generated corpora (pool vs benchmark) disjoint.
    pub id_tag: String,
    /// Rare-synonym rate of the formulaic subpopulation.
    pub hard_synonym_rate: f64,
    /// Function-word skew of the formulaic subpopulation (same preferred
    /// subset the offline generator over-uses).
    pub hard_filler_bias: f64,
}

impl Default for SynthCorpusConfig {
    fn default() -> Self {
        let mut hard_fraction = BTreeMap::new();
        hard_fraction.insert("reviews".to_string(), 0.30);
        hard_fraction.insert("qa".to_string(), 0.20);
        SynthCorpusConfig {
            seed: 0,
            docs_per_domain: 1000,
            domains: DOMAINS.iter().map(|s| s.to_string()).collect(),
            hard_fraction,
            default_hard_fraction: 0.05,
            min_words: 60,
            max_words: 340,
            id_tag: "h".to_string(),
            hard_synonym_rate: 0.10,
            hard_filler_bias: 0.0,
        }
    }
}

fn domain_vocab(domain: &str) -> &'static [&'static str] {
    match domain {
        "reviews" => &[
            "coffee", "service", "waiter", "menu", "pasta", "flavor", "price", "atmosphere",
            "staff", "ordered", "table", "portion", "lunch", "dinner", "brunch", "salad",
            "dessert", "friendly", "cozy", "fresh", "delicious", "crowded", "patio", "venue",
        ],
        "essays" => &[
            "summer", "family", "school", "learning", "childhood", "travel", "memory",
            "literature", "courage", "community", "choices", "growth", "teacher", "lesson",
            "future", "identity", "tradition", "challenge", "curiosity", "gratitude",
        ],
        "news" => &[
            "mayor", "council", "storm", "budget", "election", "residents", "officials",
            "downtown", "project", "traffic", "weather", "schools", "funding", "committee",
            "region", "airport", "harbor", "construction", "hearing", "statement",
        ],
        "email" => &[
            "meeting", "schedule", "deadline", "report", "client", "agenda", "attached",
            "minutes", "proposal", "invoice", "quarter", "vendor", "follow", "notes",
            "timeline", "approval", "draft", "contract", "office", "coordinate",
        ],
        "qa" => &[
            "energy", "planets", "history", "science", "bacteria", "muscles", "economy",
            "oceans", "climate", "neurons", "vaccines", "gravity", "protein", "ancient",
            "empire", "volcano", "electricity", "inflation", "species", "galaxy",
        ],
        _ => &[
            "subject", "matter", "notion", "detail", "example", "context", "pattern",
            "outline", "aspect", "figure", "record", "source", "account", "estimate",
        ],
    }
}

const BUSINESS_FIRST: &[&str] = &["Copper", "Blue", "Golden", "Rusty", "Silver", "Green", "Happy", "Old"];
const BUSINESS_SECOND: &[&str] = &["Kettle", "Fern", "Anchor", "Lantern", "Orchard", "Spoon", "Harbor", "Finch"];

struct StyleParams {
    regular_sentences: bool,
    content_prob: f64,
    synonym_rate: f64,
    comma_rate: f64,
    exclaim_rate: f64,
    caps_rate: f64,
    filler_bias: f64,
}

fn style_for(hard: bool, config: &SynthCorpusConfig) -> StyleParams {
    if hard {
        // formulaic: matches the simulacrum's cadence and word habits, so
        // only tells and topic echo separate these from mirrors
        StyleParams {
            regular_sentences: true,
            content_prob: 0.35,
            synonym_rate: config.hard_synonym_rate,
            comma_rate: 0.12,
            // enthusiastic-formulaic punctuation habits the generator
            // never produces
            exclaim_rate: 0.30,
            caps_rate: 0.04,
            filler_bias: config.hard_filler_bias,
        }
    } else {
        StyleParams {
            regular_sentences: false,
            content_prob: 0.30,
            synonym_rate: 0.0,
            comma_rate: 0.12,
            exclaim_rate: 0.0,
            caps_rate: 0.0,
            filler_bias: 0.0,
        }
    }
}

fn compose_text(
    rng: &mut ChaCha8Rng,
    topics: &[&str],
    length: usize,
    style: &StyleParams,
) -> String {
    let mut body = String::new();
    let mut emitted = 0usize;
    let mut sentences_in_paragraph = 0usize;
    let paragraph_break_at = rng.random_range(4..=6);
    while emitted < length {
        let sentence_target = if style.regular_sentences {
            let jitter: i64 = rng.random_range(-2..=2);
            (15i64 + jitter) as usize
        } else if rng.random_bool(0.5) {
            rng.random_range(4..=9)
        } else {
            rng.random_range(14..=28)
        };
        let mut sentence: Vec<String> = Vec::new();
        while sentence.len() < sentence_target.max(3) && emitted + sentence.len() < length {
            let mut word = if rng.random_bool(style.content_prob) {
                (*topics.choose(rng).unwrap_or(&"subject")).to_string()
            } else {
                let filler = if style.filler_bias > 0.0 && rng.random_bool(style.filler_bias) {
                    PREFERRED_FILLER.choose(rng).copied().unwrap_or("the")
                } else {
                    FILLER_WORDS.choose(rng).copied().unwrap_or("the")
                };
                if style.synonym_rate > 0.0 && rng.random_bool(style.synonym_rate) {
                    SYNONYM_TABLE
                        .iter()
                        .find(|(k, _)| *k == filler)
                        .map(|(_, v)| *v)
                        .unwrap_or(filler)
                        .to_string()
                } else {
                    filler.to_string()
                }
            };
            if style.caps_rate > 0.0 && rng.random_bool(style.caps_rate) {
                word.make_ascii_uppercase();
            }
            sentence.push(word);
        }
        emitted += sentence.len();
        if style.comma_rate > 0.0 {
            // sprinkle mid-sentence commas, a habit the formulaic style
            // and the simulacrum both lack
            for k in (1..sentence.len().saturating_sub(1)).rev() {
                if rng.random_bool(style.comma_rate) {
                    sentence[k].push(',');
                }
            }
        }
        let mut rendered = sentence.join(" ");
        if let Some(first) = rendered.get_mut(0..1) {
            first.make_ascii_uppercase();
        }
        body.push_str(&rendered);
        if style.exclaim_rate > 0.0 && rng.random_bool(style.exclaim_rate) {
            body.push('!');
        } else {
            body.push('.');
        }
        sentences_in_paragraph += 1;
        if emitted < length {
            if sentences_in_paragraph >= paragraph_break_at {
                body.push_str("\n\n");
                sentences_in_paragraph = 0;
            } else {
                body.push(' ');
            }
        }
    }
    body
}

/// Generate the human side of the corpus. Deterministic in the seed; each
/// document's RNG is derived from (seed, domain, index) so subsets match
/// across different corpus sizes.
pub fn generate(config: &SynthCorpusConfig) -> Collection {
    let mut docs = Vec::with_capacity(config.domains.len() * config.docs_per_domain);
    for domain in &config.domains {
        let vocab = domain_vocab(domain);
        let hard_fraction = config
            .hard_fraction
            .get(domain)
            .copied()
            .unwrap_or(config.default_hard_fraction);
        for index in 0..config.docs_per_domain {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                config.seed,
                &format!("synth:{}:{domain}", config.id_tag),
                index as u64,
            ));
            let hard = rng.random_bool(hard_fraction);
            let style = style_for(hard, config);
            let topics: Vec<&str> = (0..4)
                .map(|_| *vocab.choose(&mut rng).unwrap_or(&"subject"))
                .collect();
            let length = rng.random_range(config.min_words..=config.max_words);
            let text = compose_text(&mut rng, &topics, length, &style);

            let mut doc = Document::human(
                format!("{domain}-{}{index:05}", config.id_tag),
                text,
                domain.clone(),
                if hard { "synth:formulaic" } else { "synth:standard" },
            );
            doc.year = Some(rng.random_range(2014..=2020));
            doc.extra.insert(
                "topic".into(),
                serde_json::Value::String(format!("{} and {}", topics[0], topics[1])),
            );
            if domain == "reviews" {
                doc.extra.insert(
                    "rating".into(),
                    serde_json::Value::Number(rng.random_range(1..=5i64).into()),
                );
                let name = format!(
                    "The {} {}",
                    BUSINESS_FIRST.choose(&mut rng).unwrap(),
                    BUSINESS_SECOND.choose(&mut rng).unwrap()
                );
                doc.extra
                    .insert("business".into(), serde_json::Value::String(name));
            }
            docs.push(doc);
        }
    }
    Collection::new(docs).expect("generated ids are unique")
}
