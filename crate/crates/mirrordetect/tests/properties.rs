//! Property tests for the spec-level invariants that hold for all inputs,
//! not just the golden cases.

use mirrordetect::corpus::{self, Collection, Document, SplitSpec};
use mirrordetect::evaluation;
use mirrordetect::model::{self, FeatureConfig};
use mirrordetect::textnorm;
use proptest::prelude::*;

fn word_text(words: usize, salt: u64) -> String {
    (0..words)
        .map(|i| format!("w{}", i as u64 ^ salt))
        .collect::<Vec<_>>()
        .join(" ")
}

proptest! {
    #[test]
    fn normalize_is_idempotent(text in "\\PC{0,200}") {
        let once = textnorm::normalize(&text);
        prop_assert_eq!(textnorm::normalize(&once), once);
    }

    #[test]
    fn normalize_output_is_ascii_with_plain_whitespace(text in "\\PC{0,200}") {
        let out = textnorm::normalize(&text);
        prop_assert!(out.chars().all(|c| c.is_ascii()));
        prop_assert!(out
            .chars()
            .filter(|c| c.is_whitespace())
            .all(|c| c == ' ' || c == '\n'));
        // no triple newlines, no doubled spaces
        prop_assert!(!out.contains("\n\n\n"));
        prop_assert!(!out.contains("  "));
    }

    #[test]
    fn strip_boilerplate_output_is_a_suffix(text in "\\PC{0,200}") {
        let (out, _stripped) = textnorm::strip_boilerplate(&text);
        prop_assert!(text.ends_with(&out), "output {:?} not a suffix of {:?}", out, text);
    }

    #[test]
    fn reject_short_is_exact_at_any_boundary(words in 0usize..120, min in 1usize..100) {
        let text = word_text(words, 7);
        prop_assert_eq!(textnorm::reject_short(&text, min), words < min);
    }

    #[test]
    fn find_tells_hits_match_the_text(text in "[a-zA-Z ,\\.]{0,160}") {
        let lexicon = textnorm::TellLexicon::default();
        let chars: Vec<char> = text.chars().collect();
        for hit in textnorm::find_tells(&text, &lexicon) {
            let end = hit.position + hit.phrase.chars().count();
            prop_assert!(end <= chars.len());
            let window: String = chars[hit.position..end].iter().collect();
            prop_assert!(window.eq_ignore_ascii_case(&hit.phrase));
        }
    }

    #[test]
    fn featurize_mass_counts_every_window(len in 0usize..60) {
        let text: String = (0..len).map(|i| (b'a' + (i % 9) as u8) as char).collect();
        let cfg = FeatureConfig { dim_exponent: 12, ngram_min: 3, ngram_max: 5 };
        let fv = model::featurize(&text, &cfg);
        let expected: usize = (3..=5).map(|n| len.saturating_sub(n - 1)).sum();
        prop_assert_eq!(fv.mass(), expected as u64);
        prop_assert!(fv.entries().iter().all(|&(i, _)| (i as usize) < cfg.dims()));
    }

    #[test]
    fn dedupe_is_idempotent_and_order_preserving(texts in prop::collection::vec("[a-c ]{0,12}", 0..24)) {
        let docs: Vec<Document> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Document::human(format!("d{i}"), t.clone(), "dom", "src"))
            .collect();
        let collection = Collection::new(docs).unwrap();
        let once = corpus::dedupe(&collection);
        let twice = corpus::dedupe(&once);
        prop_assert_eq!(&once, &twice);
        // surviving ids appear in original order
        let original: Vec<&str> = collection.ids().collect();
        let surviving: Vec<&str> = once.ids().collect();
        let mut cursor = 0;
        for id in surviving {
            let pos = original[cursor..].iter().position(|&o| o == id);
            prop_assert!(pos.is_some());
            cursor += pos.unwrap() + 1;
        }
    }

    #[test]
    fn split_partitions_exactly(
        n in 6usize..80, // 3 domains need at least 2 docs each to stratify
        fraction in 0.0f64..0.9,
        per_domain in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let docs: Vec<Document> = (0..n)
            .map(|i| Document::human(format!("d{i}"), word_text(55, i as u64), format!("dom{}", i % 3), "s"))
            .collect();
        let pool = Collection::new(docs).unwrap();
        let spec = SplitSpec { seed, holdout_fraction: fraction, per_domain };
        let (train, holdout) = corpus::split(&pool, &spec).unwrap();
        prop_assert_eq!(train.len() + holdout.len(), pool.len());
        let train_ids = train.id_set();
        prop_assert!(holdout.iter().all(|d| !train_ids.contains(d.id.as_str())));
        // determinism
        let (train2, holdout2) = corpus::split(&pool, &spec).unwrap();
        prop_assert_eq!(train.ids().collect::<Vec<_>>(), train2.ids().collect::<Vec<_>>());
        prop_assert_eq!(holdout.ids().collect::<Vec<_>>(), holdout2.ids().collect::<Vec<_>>());
    }

    #[test]
    fn calibration_never_exceeds_target(
        scores in prop::collection::vec(0.0f64..1.0, 1..120),
        target in 0.0f64..1.0,
    ) {
        let threshold = evaluation::calibrate_threshold(&scores, target).unwrap();
        let realized = evaluation::realized_fpr(&scores, threshold);
        // compare count/n <= target via the exact binary expansion of target
        let bits = target.to_bits();
        let raw_exponent = ((bits >> 52) & 0x7ff) as i64;
        let fraction = bits & ((1u64 << 52) - 1);
        let (mantissa, exponent) = if raw_exponent == 0 {
            (fraction, -1074i64)
        } else {
            (fraction | (1u64 << 52), raw_exponent - 1075)
        };
        let shift = (-exponent) as u32;
        let feasible = if realized.num == 0 {
            true
        } else if shift >= 128 {
            false
        } else {
            u128::from(realized.num).checked_shl(shift).map_or(false, |lhs| {
                lhs <= u128::from(mantissa) * u128::from(realized.den)
            })
        };
        prop_assert!(feasible, "realized {}/{} above target {}", realized.num, realized.den, target);
    }

    #[test]
    fn confusion_counts_are_exhaustive(
        pairs in prop::collection::vec((0.0f64..1.0, any::<bool>()), 1..200),
        threshold in 0.0f64..1.0,
    ) {
        let scores: Vec<f64> = pairs.iter().map(|(s, _)| *s).collect();
        let labels: Vec<corpus::Label> = pairs
            .iter()
            .map(|(_, ai)| if *ai { corpus::Label::Ai } else { corpus::Label::Human })
            .collect();
        let counts = evaluation::confusion(&scores, &labels, threshold).unwrap();
        prop_assert_eq!(counts.total(), pairs.len() as u64);
        if let Some(acc) = counts.accuracy() {
            prop_assert!(acc <= mirrordetect::ratio::Ratio::new(1, 1));
        }
    }
}
