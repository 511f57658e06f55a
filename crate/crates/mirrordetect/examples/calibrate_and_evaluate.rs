//! Threshold-calibrated evaluation: recall at a fixed FPR per generator,
//! per-domain FPR tables, and report files that round-trip.
//!
//! ```bash
//! cargo run --example calibrate_and_evaluate
//! ```

use mirrordetect::evaluation::{self, EvalReport};
use mirrordetect::ratio::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(12);

    // Pretend scores from two generators and a human set.
    let human_scores: Vec<f64> = (0..2000).map(|_| rng.random_range(0.0..0.45)).collect();
    let mut ai_scores = BTreeMap::new();
    ai_scores.insert(
        "strong-model".to_string(),
        (0..500).map(|_| rng.random_range(0.5..1.0)).collect::<Vec<f64>>(),
    );
    ai_scores.insert(
        "sneaky-model".to_string(),
        (0..500).map(|_| rng.random_range(0.2..0.9)).collect::<Vec<f64>>(),
    );

    let report = evaluation::recall_at_fpr_scores(&human_scores, &ai_scores, 0.01)?;
    println!(
        "threshold {:.4} calibrated at target FPR {} (realized {})",
        report.threshold, report.target_fpr, report.realized_fpr
    );
    for (generator, recall) in &report.per_generator {
        println!(
            "recall[{generator}] = {:.4} ({}/{})",
            recall.recall().to_f64(),
            recall.detected,
            recall.total
        );
    }

    // Per-domain FPR with an exact equal-weight mean.
    let mut by_domain = BTreeMap::new();
    by_domain.insert("reviews".to_string(), human_scores[..800].to_vec());
    by_domain.insert("email".to_string(), human_scores[800..1400].to_vec());
    by_domain.insert("news".to_string(), human_scores[1400..].to_vec());
    let table = evaluation::domain_fpr_from_scores(&by_domain, report.threshold);
    for (domain, fpr) in &table.per_domain {
        println!("fpr[{domain}] = {} ({}/{})", fpr.fpr(), fpr.false_positives, fpr.total);
    }
    println!(
        "domain-weighted total = {}",
        table.domain_weighted_total().unwrap_or(Ratio::zero())
    );

    // Full confusion report, emitted as JSON and CSV and read back.
    let labels: Vec<mirrordetect::corpus::Label> = human_scores
        .iter()
        .map(|_| mirrordetect::corpus::Label::Human)
        .chain(ai_scores.values().flatten().map(|_| mirrordetect::corpus::Label::Ai))
        .collect();
    let all_scores: Vec<f64> = human_scores
        .iter()
        .copied()
        .chain(ai_scores.values().flatten().copied())
        .collect();
    let counts = evaluation::confusion(&all_scores, &labels, report.threshold)?;
    let full = EvalReport {
        threshold: report.threshold,
        calibration_target: Some(0.01),
        overall: counts,
        per_domain: BTreeMap::new(),
        per_generator_recall: report.per_generator.clone(),
    };
    let dir = tempfile::tempdir()?;
    let json_path = dir.path().join("report.json");
    let csv_path = dir.path().join("report.csv");
    evaluation::write_report_json(&full, &json_path)?;
    evaluation::write_report_csv(&full, &csv_path)?;
    assert_eq!(evaluation::read_report_json(&json_path)?, full);
    assert_eq!(evaluation::read_report_csv(&csv_path)?, full);
    println!(
        "\noverall accuracy {} | reports round-trip from {} and {}",
        counts.accuracy().unwrap(),
        json_path.display(),
        csv_path.display()
    );
    Ok(())
}
