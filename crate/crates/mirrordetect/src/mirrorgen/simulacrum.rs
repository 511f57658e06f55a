//! Offline deterministic generator for hermetic runs.
//!
//! The simulacrum stands in for a remote LLM: given the same prompt, seed,
//! and salt it emits byte-identical text whose statistics differ from the
//! human side in controlled, learnable ways. It injects stock tell phrases
//! at a configurable rate, substitutes rare synonyms, regularizes sentence
//! lengths, and echoes content words from the prompt so topical mirroring
//! holds.

use super::wordlists::{FALLBACK_TOPICS, FILLER_WORDS, INSTRUCTION_WORDS, PREFERRED_FILLER, SYNONYM_TABLE};
use super::{Generator, GeneratorError, MirrorPrompt, Role, Turn};
use crate::hashing::{derive_seed, fnv1a_64};
use crate::textnorm::DEFAULT_TELLS;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Tuning knobs for the simulacrum's learnable fingerprints.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulacrumConfig {
    /// Tell phrases injected per 100 words.
    pub tells_per_100_words: f64,
    /// Probability a filler word is swapped for its rarer synonym.
    pub synonym_rate: f64,
    /// Probability the output opens with an assistant boilerplate
    /// paragraph (exercises the stripping filter downstream).
    pub boilerplate_rate: f64,
    /// Mean sentence length in words; jitter is +/-2 (low burstiness).
    pub sentence_mean: usize,
    /// Chance of a comma after any mid-sentence word.
    pub comma_rate: f64,
    /// Strength of the generator's function-word skew: with this
    /// probability a filler slot draws from a narrow preferred subset
    /// instead of the full list. A dense, individually-weak fingerprint
    /// that classifiers need scale to learn.
    pub filler_bias: f64,
    /// Tell phrases to inject; defaults to the built-in lexicon.
    pub tells: Vec<String>,
}

impl Default for SimulacrumConfig {
    fn default() -> Self {
        SimulacrumConfig {
            tells_per_100_words: 1.5,
            synonym_rate: 0.10,
            boilerplate_rate: 0.10,
            sentence_mean: 15,
            comma_rate: 0.12,
            filler_bias: 0.25,
            tells: DEFAULT_TELLS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Deterministic offline generator.
pub struct Simulacrum {
    name: String,
    seed: u64,
    config: SimulacrumConfig,
}

impl Simulacrum {
    pub fn new(seed: u64, config: SimulacrumConfig) -> Self {
        Simulacrum {
            name: "simulacrum".to_string(),
            seed,
            config,
        }
    }

    pub fn with_name(name: impl Into<String>, seed: u64, config: SimulacrumConfig) -> Self {
        Simulacrum {
            name: name.into(),
            seed,
            config,
        }
    }
}

impl Generator for Simulacrum {
    fn name(&self) -> &str {
        &self.name
    }

    fn complete(&self, turns: &[Turn], salt: u64) -> Result<String, GeneratorError> {
        Ok(render(turns, self.seed, salt, &self.config))
    }
}

/// Run the simulacrum on a built prompt. Same (prompt, seed) gives the
/// same text.
pub fn simulacrum_generate(prompt: &MirrorPrompt, seed: u64, config: &SimulacrumConfig) -> String {
    render(&prompt.turns, seed, 0, config)
}

/// Word target parsed from the prompt's "around N words" instruction.
fn target_words(turns: &[Turn]) -> usize {
    let last_prompt = turns.iter().rev().find(|t| t.role == Role::Prompt);
    if let Some(turn) = last_prompt {
        if let Some(pos) = turn.text.rfind("around ") {
            let digits: String = turn.text[pos + 7..]
                .chars()
                .take_while(char::is_ascii_digit)
                .collect();
            if let Ok(n) = digits.parse::<usize>() {
                return n.max(50);
            }
        }
    }
    120
}

/// Harvest content words from the prompt, skipping template vocabulary
/// and ordinary function/filler words so only topical terms echo.
fn content_words(turns: &[Turn]) -> Vec<String> {
    let mut words = Vec::new();
    for turn in turns {
        for raw in turn.text.split(|c: char| !c.is_alphanumeric()) {
            if raw.len() < 4 {
                continue;
            }
            let lower = raw.to_ascii_lowercase();
            if INSTRUCTION_WORDS.contains(&lower.as_str())
                || FILLER_WORDS.contains(&lower.as_str())
                || SYNONYM_TABLE.iter().any(|(_, v)| *v == lower)
            {
                continue;
            }
            if lower.chars().any(|c| c.is_ascii_digit()) {
                continue;
            }
            if !words.contains(&lower) {
                words.push(lower);
            }
        }
    }
    if words.is_empty() {
        words.extend(FALLBACK_TOPICS.iter().map(|s| s.to_string()));
    }
    words
}

fn render(turns: &[Turn], seed: u64, salt: u64, config: &SimulacrumConfig) -> String {
    let turn_hash = fnv1a_64(
        turns
            .iter()
            .map(|t| t.text.as_str())
            .collect::<Vec<_>>()
            .join("\u{1}")
            .as_bytes(),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed ^ turn_hash, "simulacrum", salt));

    let target = target_words(turns);
    let low = ((target as f64 * 0.96).ceil() as usize).max(50);
    let high = (target as f64 * 1.04).floor() as usize;
    let length = if high > low {
        rng.random_range(low..=high)
    } else {
        low
    };

    let topics = content_words(turns);
    let tell_rate = config.tells_per_100_words / 100.0;

    let mut body = String::new();
    let mut emitted = 0usize;
    let mut tells_emitted = 0usize;
    let mut sentences_in_paragraph = 0usize;
    let paragraph_break_at = rng.random_range(4..=6);

    while emitted < length {
        let mut sentence: Vec<String> = Vec::new();

        // Pace tell injection against the words emitted so far.
        let due = (emitted as f64 * tell_rate) - tells_emitted as f64;
        if due > 0.0 || (emitted == 0 && tell_rate > 0.0 && rng.random_bool(0.3)) {
            let phrase = config
                .tells
                .choose(&mut rng)
                .cloned()
                .unwrap_or_else(|| "in conclusion".to_string());
            if phrase.eq_ignore_ascii_case("delve") {
                sentence.extend(["we".to_string(), "delve".to_string(), "into".to_string()]);
            } else {
                let mut words: Vec<String> =
                    phrase.split_whitespace().map(str::to_lowercase).collect();
                if let Some(last) = words.last_mut() {
                    last.push(',');
                }
                sentence.extend(words);
            }
            tells_emitted += 1;
        }

        let jitter: i64 = rng.random_range(-2..=2);
        let sentence_target = config.sentence_mean.saturating_add_signed(jitter as isize).max(5);
        while sentence.len() < sentence_target && emitted + sentence.len() < length {
            let word = if rng.random_bool(0.35) {
                topics.choose(&mut rng).cloned().unwrap_or_default()
            } else {
                let filler = if config.filler_bias > 0.0 && rng.random_bool(config.filler_bias) {
                    PREFERRED_FILLER.choose(&mut rng).copied().unwrap_or("the")
                } else {
                    FILLER_WORDS.choose(&mut rng).copied().unwrap_or("the")
                };
                if rng.random_bool(config.synonym_rate) {
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
            sentence.push(word);
        }

        emitted += sentence.len();
        if config.comma_rate > 0.0 {
            for k in (1..sentence.len().saturating_sub(1)).rev() {
                if rng.random_bool(config.comma_rate) {
                    if !sentence[k].ends_with(',') {
                        sentence[k].push(',');
                    }
                }
            }
        }
        let mut rendered = sentence.join(" ");
        if let Some(first) = rendered.get_mut(0..1) {
            first.make_ascii_uppercase();
        }
        // A trailing comma from a tell phrase must not collide with the period.
        let rendered = rendered.trim_end_matches(',').to_string();
        body.push_str(&rendered);
        body.push('.');
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

    if rng.random_bool(config.boilerplate_rate) {
        format!("Sure! Here is the response you asked for:\n\n{body}")
    } else {
        body
    }
}
