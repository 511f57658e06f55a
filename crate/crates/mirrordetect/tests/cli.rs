//! End-to-end smoke tests of the command-line interface: exit codes,
//! validation messages, run-directory layout, and a miniature
//! ingest -> mine -> report -> eval flow against the offline generator.

use mirrordetect::corpus::{self, Collection, Format};
use mirrordetect::synthcorpus::{self, SynthCorpusConfig};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mirrordetect"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    cli().args(args).current_dir(cwd).output().expect("binary runs")
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).to_string()
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).to_string()
}

fn write_pool(dir: &Path, docs_per_domain: usize, seed: u64) -> PathBuf {
    let pool = synthcorpus::generate(&SynthCorpusConfig {
        seed,
        docs_per_domain,
        min_words: 100,
        ..SynthCorpusConfig::default()
    });
    let path = dir.join("pool.jsonl");
    corpus::save(&pool, &path).unwrap();
    path
}

fn mini_config(dir: &Path, pool: &Path) -> PathBuf {
    let path = dir.join("desk.toml");
    let config = format!(
        r#"
seed = 17
output_dir = {out:?}

[paths]
pool = {pool:?}

[split]
holdout_fraction = 0.25
per_domain = true

[mining]
n = 100
m = 40
per_domain_fp_cap = 20
fp_threshold = 0.3
min_domain_pool = 10
max_rounds = 1
eval_mirrors_per_domain = 10

[training]
learning_rate = 1.5
lr_decay = 0.1
max_epochs = 5
batch_size = 16
validation_fraction = 0.15
patience = 2

[training.feature]
dim_exponent = 13
ngram_min = 3
ngram_max = 5

[[generators]]
name = "simulacrum"
endpoint = "offline"

[scaling]
sizes = [20, 40]
test_docs_per_domain = 20
"#,
        out = dir.join("runs").display().to_string(),
        pool = pool.display().to_string(),
    );
    std::fs::write(&path, config).unwrap();
    path
}

#[test]
fn ingest_reports_malformed_line_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    let mut lines: Vec<String> = (0..6)
        .map(|i| {
            format!(
                "{{\"id\":\"d{i}\",\"text\":\"{}\",\"label\":\"human\",\"domain\":\"x\",\"source\":\"s\"}}",
                "w ".repeat(60)
            )
        })
        .collect();
    lines.push("{not valid json".to_string());
    std::fs::write(&bad, lines.join("\n")).unwrap();

    let output = run(
        &["ingest", "--input", bad.to_str().unwrap(), "--output-dir", "runs"],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(1), "stderr: {}", stderr(&output));
    assert!(
        stderr(&output).contains("line 7"),
        "message should cite line 7: {}",
        stderr(&output)
    );
}

#[test]
fn ingest_writes_canonical_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let pool = write_pool(dir.path(), 5, 3);
    let output = run(
        &["ingest", "--input", pool.to_str().unwrap(), "--output-dir", "runs", "--dedupe"],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));
    let out_path = stdout(&output).trim().to_string();
    let out_path = {
        let p = PathBuf::from(&out_path);
        if p.is_absolute() { p } else { dir.path().join(p) }
    };
    let reloaded = corpus::load(&out_path, Format::Jsonl).unwrap();
    assert_eq!(reloaded.len(), 25);
    // run dir is self-describing
    let run_dir = out_path.parent().unwrap();
    assert!(run_dir.join("config.toml").exists());
    assert!(run_dir.join("manifest.json").exists());
    assert!(run_dir.join("run.log.jsonl").exists());
}

#[test]
fn config_validation_fails_fast_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let pool = write_pool(dir.path(), 4, 5);
    let config = dir.path().join("broken.toml");
    std::fs::write(
        &config,
        format!(
            "[paths]\npool = {:?}\n[split]\nholdout_fraction = 2.0\nper_domain = true\n",
            pool.display().to_string()
        ),
    )
    .unwrap();
    let output = run(
        &["--config", config.to_str().unwrap(), "mine"],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr(&output).contains("split.holdout_fraction"), "{}", stderr(&output));
}

#[test]
fn subcommands_requiring_config_refuse_to_run_without_it() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(&["mine"], dir.path());
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr(&output).contains("--config"));
}

#[test]
fn mine_report_eval_flow() {
    let dir = tempfile::tempdir().unwrap();
    let pool = write_pool(dir.path(), 60, 11);
    let config = mini_config(dir.path(), &pool);

    // mine
    let output = run(
        &["--config", config.to_str().unwrap(), "mine"],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));
    let run_dir = PathBuf::from(stdout(&output).trim());
    let run_dir = if run_dir.is_absolute() {
        run_dir
    } else {
        dir.path().join(run_dir)
    };
    assert!(run_dir.join("mining.json").exists());
    assert!(run_dir.join("rounds/round_0000/round.json").exists());
    assert!(run_dir.join("rounds/round_0000/model.json").exists());

    // resume of the finished run is a clean no-op
    let output = run(
        &["--config", config.to_str().unwrap(), "mine", "--resume"],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));

    // report re-emits round metrics
    let output = run(
        &["--config", config.to_str().unwrap(), "report", "--run", run_dir.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));
    assert!(stdout(&output).contains("round,training_docs"), "{}", stdout(&output));

    // eval: humans from the pool, mirrors file generated by the run ledger
    let humans = corpus::load(&pool, Format::Jsonl).unwrap();
    let human_docs: Vec<_> = humans.iter().take(60).cloned().collect();
    let human_path = dir.path().join("eval_humans.jsonl");
    corpus::save(&Collection::new(human_docs).unwrap(), &human_path).unwrap();
    let ai_path = run_dir.join("eval_mirrors.jsonl");
    assert!(ai_path.exists());

    let model_path = run_dir.join("rounds/round_0000/model.json");
    let output = run(
        &[
            "eval",
            "--model",
            model_path.to_str().unwrap(),
            "--human",
            human_path.to_str().unwrap(),
            "--ai",
            ai_path.to_str().unwrap(),
            "--target-fpr",
            "0.05",
            "--json",
            "--output-dir",
            "runs",
        ],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));
    let report: serde_json::Value = serde_json::from_str(&stdout(&output)).expect("json output");
    assert!(report.get("per_generator_recall").is_some());
    assert!(report.get("threshold").is_some());
}

#[test]
fn eval_rejects_out_of_range_target() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(
        &[
            "eval",
            "--model",
            "missing.json",
            "--human",
            "h.jsonl",
            "--ai",
            "a.jsonl",
            "--target-fpr",
            "1.5",
        ],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr(&output).contains("target-fpr"));
}

#[test]
fn normalize_rewrites_text() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("docs.jsonl");
    let text = format!("\u{201C}caf\u{00E9}\u{201D} {}", "word ".repeat(60));
    std::fs::write(
        &input,
        format!(
            "{{\"id\":\"a\",\"text\":{:?},\"label\":\"human\",\"domain\":\"d\",\"source\":\"s\"}}\n",
            text
        ),
    )
    .unwrap();
    let output = run(
        &["normalize", "--input", input.to_str().unwrap(), "--output-dir", "runs"],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));
    let out_path = PathBuf::from(stdout(&output).trim());
    let out_path = if out_path.is_absolute() {
        out_path
    } else {
        dir.path().join(out_path)
    };
    let normalized = corpus::load(&out_path, Format::Jsonl).unwrap();
    assert!(normalized.docs()[0].text.starts_with("\"cafe\""));
}

#[test]
fn mirror_generates_linked_documents() {
    let dir = tempfile::tempdir().unwrap();
    let pool = write_pool(dir.path(), 6, 23);
    let config = mini_config(dir.path(), &pool);
    let output = run(
        &[
            "--config",
            config.to_str().unwrap(),
            "mirror",
            "--input",
            pool.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));
    let out_path = PathBuf::from(stdout(&output).trim());
    let out_path = if out_path.is_absolute() {
        out_path
    } else {
        dir.path().join(out_path)
    };
    let mirrors = corpus::load(&out_path, Format::Jsonl).unwrap();
    assert_eq!(mirrors.len(), 30);
    assert!(mirrors.iter().all(|m| m.mirror_of.is_some()));
}

#[test]
fn train_emits_model_and_history() {
    let dir = tempfile::tempdir().unwrap();
    let pool = write_pool(dir.path(), 20, 31);
    let config = mini_config(dir.path(), &pool);

    // build a labeled set: humans plus mirrors
    let output = run(
        &[
            "--config",
            config.to_str().unwrap(),
            "mirror",
            "--input",
            pool.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(0));
    let mirrors_path = PathBuf::from(stdout(&output).trim());
    let mirrors_path = if mirrors_path.is_absolute() {
        mirrors_path
    } else {
        dir.path().join(mirrors_path)
    };
    let humans = corpus::load(&pool, Format::Jsonl).unwrap();
    let mirrors = corpus::load(&mirrors_path, Format::Jsonl).unwrap();
    let mut docs = humans.into_docs();
    docs.extend(mirrors.into_docs());
    let labeled = dir.path().join("labeled.jsonl");
    corpus::save(&Collection::new(docs).unwrap(), &labeled).unwrap();

    let output = run(
        &[
            "--config",
            config.to_str().unwrap(),
            "train",
            "--input",
            labeled.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));
    let model_path = PathBuf::from(stdout(&output).trim());
    let model_path = if model_path.is_absolute() {
        model_path
    } else {
        dir.path().join(model_path)
    };
    assert!(mirrordetect::model::ClassifierModel::load(&model_path).is_ok());
    assert!(model_path.parent().unwrap().join("history.json").exists());
}

#[test]
fn scaling_emits_curve_csv() {
    let dir = tempfile::tempdir().unwrap();
    let pool = write_pool(dir.path(), 70, 41);
    let config = mini_config(dir.path(), &pool);
    let output = run(
        &["--config", config.to_str().unwrap(), "scaling"],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));
    let csv_path = PathBuf::from(stdout(&output).trim());
    let csv_path = if csv_path.is_absolute() {
        csv_path
    } else {
        dir.path().join(csv_path)
    };
    let raw = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = raw.lines().collect();
    assert_eq!(lines[0], "train_size_per_domain,test_loss,test_accuracy,checkpoint_id");
    assert_eq!(lines.len(), 3); // header + two sizes
}
