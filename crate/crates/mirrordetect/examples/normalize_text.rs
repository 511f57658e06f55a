//! The text cleaning pipeline: boilerplate stripping, transliteration,
//! whitespace normalization, length rejection, and tell detection.
//!
//! ```bash
//! cargo run --example normalize_text
//! ```

use mirrordetect::textnorm::{self, TellLexicon};

fn main() {
    let raw = "Sure! Here is a review:\n\n\u{201C}Caf\u{00E9} Lumi\u{00E8}re\u{201D} is a gem \u{2014} cozy,\twarm\u{00A0}\u{2026} 😀\n\n\nIt is important to note that the croissants sell out early.";

    println!("raw:\n{raw}\n");

    let (stripped, was_stripped) = textnorm::strip_boilerplate(raw);
    println!("boilerplate stripped: {was_stripped}");

    let normalized = textnorm::normalize(&stripped);
    println!("normalized:\n{normalized}\n");

    println!("word count: {}", textnorm::word_count(&normalized));
    println!(
        "rejected at the {}-word minimum: {}",
        textnorm::MIN_WORDS,
        textnorm::reject_short(&normalized, textnorm::MIN_WORDS)
    );

    let lexicon = TellLexicon::default();
    for hit in textnorm::find_tells(&normalized, &lexicon) {
        println!("tell {:?} at char offset {}", hit.phrase, hit.position);
    }

    // the whole pipeline in one call, with a report
    let (cleaned, report) = textnorm::clean(raw, textnorm::MIN_WORDS, &lexicon);
    println!(
        "\nclean(): {} chars removed, rejected={:?}, {} tells, output starts {:?}",
        report.removed_char_count,
        report.rejected,
        report.tells_found.len(),
        cleaned.chars().take(24).collect::<String>()
    );
}
