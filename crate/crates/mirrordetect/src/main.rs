//! Command-line entry point: thin, logged wrappers over the library's
//! pipeline stages, driven by a TOML run config.
//!
//! Every invocation works under a fresh timestamped run directory with the
//! resolved config and input hashes copied in, so a run is reproducible
//! from its directory alone (given the offline generator). Exit codes:
//! 0 success, 1 validation error, 2 runtime failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use mirrordetect::config::{ConfigError, RunConfig};
use mirrordetect::corpus::{self, Collection, CorpusError, Document, Label};
use mirrordetect::evaluation::{self, EvalError};
use mirrordetect::hashing::fnv1a_128;
use mirrordetect::mining::{MiningError, MiningRun, Round};
use mirrordetect::mirrorgen::{
    self, build_generators, Generator, MirrorOptions, TemplateSet,
};
use mirrordetect::model::{self, ClassifierModel, ModelError};
use mirrordetect::runlog::RunLogger;
use mirrordetect::textnorm;
use serde_json::json;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Parser)]
#[command(name = "mirrordetect", version, about = "Train and evaluate AI-text detectors with mirror prompting and hard negative mining")]
struct Cli {
    /// Run configuration (TOML). Required by mirror/train/mine/scaling.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the config's global seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Override the config's output directory.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Log debug-level events.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum IngestFormat {
    Jsonl,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Load, validate, and canonicalize a document collection.
    Ingest(IngestArgs),
    /// Normalize every document's text in a collection.
    Normalize(NormalizeArgs),
    /// Generate synthetic mirrors for a collection of human documents.
    Mirror(MirrorArgs),
    /// Train a classifier on a labeled collection.
    Train(TrainArgs),
    /// Run the hard-negative-mining loop.
    Mine(MineArgs),
    /// Evaluate a model: calibrated threshold, recall per generator,
    /// per-domain breakdowns.
    Eval(EvalArgs),
    /// Scaling-law experiment over increasing training sizes.
    Scaling,
    /// Re-emit consolidated metrics from a mining run's ledger.
    Report(ReportArgs),
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    input: PathBuf,
    /// Input format (default: by file extension).
    #[arg(long, value_enum)]
    format: Option<IngestFormat>,
    /// Also drop normalized-text duplicates.
    #[arg(long)]
    dedupe: bool,
}

#[derive(Args)]
struct NormalizeArgs {
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct MirrorArgs {
    #[arg(long)]
    input: PathBuf,
    /// Mirrors per source document.
    #[arg(long, default_value_t = 1)]
    fanout: usize,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct MineArgs {
    /// Continue the most recent mine run from its ledger.
    #[arg(long)]
    resume: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    /// Human documents (JSONL).
    #[arg(long)]
    human: PathBuf,
    /// AI documents (JSONL); repeatable.
    #[arg(long, required = true)]
    ai: Vec<PathBuf>,
    #[arg(long, default_value_t = 0.01)]
    target_fpr: f64,
    /// Print the full report as JSON on stdout.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// A `mine` run directory containing the round ledger.
    #[arg(long)]
    run: PathBuf,
}

enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => m,
        }
    }
}

fn validation(e: impl ToString) -> CliError {
    CliError::Validation(e.to_string())
}

fn runtime(e: impl ToString) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Input-file problems are validation errors; artifact-writing problems
/// are runtime failures.
fn corpus_input(e: CorpusError) -> CliError {
    CliError::Validation(e.to_string())
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<MiningError> for CliError {
    fn from(e: MiningError) -> Self {
        match e {
            MiningError::InsufficientPool { .. } => CliError::Validation(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Io { .. } | ModelError::NonFiniteLoss { .. } => {
                CliError::Runtime(e.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Io { .. } | EvalError::Model(_) => CliError::Runtime(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap help/version output is a success path
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

/// Run directory shared by every subcommand: resolved config, input
/// hashes, structured log.
struct RunContext {
    dir: PathBuf,
    logger: RunLogger,
    config: RunConfig,
}

impl RunContext {
    fn create(cli: &Cli, name: &str, config: RunConfig) -> Result<Self, CliError> {
        let stamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let base = config.output_dir.clone();
        let mut dir = base.join(format!("run-{stamp}-{name}"));
        let mut k = 1;
        while dir.exists() {
            dir = base.join(format!("run-{stamp}-{name}-{k}"));
            k += 1;
        }
        std::fs::create_dir_all(&dir).map_err(runtime)?;
        std::fs::write(dir.join("config.toml"), config.to_toml()).map_err(runtime)?;
        let logger = RunLogger::to_stderr(cli.verbose);
        logger.add_file(dir.join("run.log.jsonl")).map_err(runtime)?;
        logger.info("run_start", json!({"command": name, "dir": dir.display().to_string(), "seed": config.seed}));
        Ok(RunContext { dir, logger, config })
    }

    fn record_inputs(&self, paths: &[&Path]) -> Result<(), CliError> {
        let mut hashes = BTreeMap::new();
        for path in paths {
            let bytes = std::fs::read(path).map_err(|e| validation(format!("{}: {e}", path.display())))?;
            hashes.insert(
                path.display().to_string(),
                format!("{:032x}", fnv1a_128(&bytes)),
            );
        }
        let manifest = json!({"seed": self.config.seed, "inputs": hashes});
        std::fs::write(
            self.dir.join("manifest.json"),
            serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
        )
        .map_err(runtime)
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => {
            // Synthetic minimal config for config-less subcommands.
            let toml = "[paths]\npool = \"unused\"\n";
            toml::from_str::<RunConfig>(toml).map_err(|e| validation(e.to_string()))?
        }
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(dir) = &cli.output_dir {
        config.output_dir = dir.clone();
    }
    if let Some(workers) = cli.workers {
        config.workers = workers;
    }
    config.propagate_seed();
    if config.workers > 0 {
        // Ignore the error if a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build_global();
    }
    Ok(config)
}

fn require_config(cli: &Cli, config: &RunConfig) -> Result<(), CliError> {
    if cli.config.is_none() {
        return Err(CliError::Validation(
            "this subcommand requires --config".into(),
        ));
    }
    config.validate()?;
    Ok(())
}

fn templates_from(config: &RunConfig) -> Result<TemplateSet, CliError> {
    match &config.paths.templates {
        Some(dir) => TemplateSet::load_dir(dir).map_err(validation),
        None => Ok(TemplateSet::builtin()),
    }
}

fn generators_from(
    config: &RunConfig,
    audit: Option<&Path>,
) -> Result<Vec<Box<dyn Generator>>, CliError> {
    build_generators(&config.generators, audit).map_err(validation)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = load_config(&cli)?;
    match &cli.command {
        Command::Ingest(args) => cmd_ingest(&cli, config, args),
        Command::Normalize(args) => cmd_normalize(&cli, config, args),
        Command::Mirror(args) => cmd_mirror(&cli, config, args),
        Command::Train(args) => cmd_train(&cli, config, args),
        Command::Mine(args) => cmd_mine(&cli, config, args),
        Command::Eval(args) => cmd_eval(&cli, config, args),
        Command::Scaling => cmd_scaling(&cli, config),
        Command::Report(args) => cmd_report(&cli, config, args),
    }
}

fn detect_format(path: &Path, flag: Option<IngestFormat>) -> corpus::Format {
    match flag {
        Some(IngestFormat::Jsonl) => corpus::Format::Jsonl,
        Some(IngestFormat::Csv) => corpus::Format::Csv,
        None if path.extension().is_some_and(|e| e == "csv") => corpus::Format::Csv,
        None => corpus::Format::Jsonl,
    }
}

fn cmd_ingest(cli: &Cli, config: RunConfig, args: &IngestArgs) -> Result<(), CliError> {
    let collection =
        corpus::load(&args.input, detect_format(&args.input, args.format)).map_err(corpus_input)?;
    let ctx = RunContext::create(cli, "ingest", config)?;
    ctx.record_inputs(&[&args.input])?;
    for warning in corpus::curation_warnings(&collection) {
        ctx.logger.info("curation_warning", json!({"warning": warning}));
    }
    let final_collection = if args.dedupe {
        let deduped = corpus::dedupe(&collection);
        ctx.logger.info(
            "dedupe",
            json!({"input": collection.len(), "surviving": deduped.len()}),
        );
        deduped
    } else {
        collection
    };
    let out = ctx.dir.join("corpus.jsonl");
    corpus::save(&final_collection, &out).map_err(runtime)?;
    ctx.logger.info(
        "ingest_complete",
        json!({"documents": final_collection.len(), "output": out.display().to_string()}),
    );
    println!("{}", out.display());
    Ok(())
}

fn cmd_normalize(cli: &Cli, config: RunConfig, args: &NormalizeArgs) -> Result<(), CliError> {
    let collection = corpus::load(&args.input, corpus::Format::Jsonl).map_err(corpus_input)?;
    let ctx = RunContext::create(cli, "normalize", config)?;
    ctx.record_inputs(&[&args.input])?;
    let mut changed = 0usize;
    let docs: Vec<Document> = collection
        .iter()
        .map(|doc| {
            let mut doc = doc.clone();
            let normalized = textnorm::normalize(&doc.text);
            if normalized != doc.text {
                changed += 1;
            }
            doc.text = normalized;
            doc.refresh_word_count();
            doc
        })
        .collect();
    let normalized = Collection::new(docs).map_err(runtime)?;
    let out = ctx.dir.join("normalized.jsonl");
    corpus::save(&normalized, &out).map_err(runtime)?;
    ctx.logger.info(
        "normalize_complete",
        json!({"documents": normalized.len(), "changed": changed, "output": out.display().to_string()}),
    );
    println!("{}", out.display());
    Ok(())
}

fn cmd_mirror(cli: &Cli, config: RunConfig, args: &MirrorArgs) -> Result<(), CliError> {
    require_config(cli, &config)?;
    let collection = corpus::load(&args.input, corpus::Format::Jsonl).map_err(corpus_input)?;
    let templates = templates_from(&config)?;
    let ctx = RunContext::create(cli, "mirror", config)?;
    ctx.record_inputs(&[&args.input])?;
    let audit = ctx.dir.join("generator_audit.jsonl");
    let generators = generators_from(&ctx.config, Some(&audit))?;

    let humans: Vec<&Document> = collection
        .iter()
        .filter(|d| d.label == Label::Human)
        .collect();
    let mut mirrors: Vec<Document> = Vec::new();
    let mut skipped = 0usize;
    for fanout in 0..args.fanout.max(1) {
        let opts = MirrorOptions {
            fanout_index: fanout,
            ..MirrorOptions::default()
        };
        let batch = mirrorgen::mirror_batch(
            &humans,
            &templates,
            &generators,
            &opts,
            ctx.config.seed.wrapping_add(fanout as u64),
        );
        for skip in &batch.skipped {
            ctx.logger.info(
                "mirror_skipped",
                json!({"source_id": skip.source_id, "reason": skip.reason}),
            );
        }
        skipped += batch.skipped.len();
        mirrors.extend(batch.mirrors);
    }
    let out = ctx.dir.join("mirrors.jsonl");
    corpus::save(&Collection::new(mirrors).map_err(runtime)?, &out).map_err(runtime)?;
    ctx.logger.info(
        "mirror_complete",
        json!({"sources": humans.len(), "skipped": skipped, "output": out.display().to_string()}),
    );
    println!("{}", out.display());
    Ok(())
}

fn cmd_train(cli: &Cli, config: RunConfig, args: &TrainArgs) -> Result<(), CliError> {
    require_config(cli, &config)?;
    let collection = corpus::load(&args.input, corpus::Format::Jsonl).map_err(corpus_input)?;
    let ctx = RunContext::create(cli, "train", config)?;
    ctx.record_inputs(&[&args.input])?;
    let (model, history) = model::train(&collection, &ctx.config.training)?;
    let model_path = ctx.dir.join("model.json");
    model.save(&model_path)?;
    std::fs::write(
        ctx.dir.join("history.json"),
        serde_json::to_string_pretty(&history).expect("history serializes"),
    )
    .map_err(runtime)?;
    let last = history.epochs.last().expect("at least one epoch");
    ctx.logger.info(
        "train_complete",
        json!({
            "documents": collection.len(),
            "epochs": history.epochs.len(),
            "selected_epoch": history.selected_epoch,
            "val_loss": last.val_loss,
            "model": model_path.display().to_string(),
        }),
    );
    println!("{}", model_path.display());
    Ok(())
}

fn round_event(round: &Round) -> serde_json::Value {
    json!({
        "round": round.index,
        "training_docs": round.training_ids.len(),
        "mined_fps": round.fp_ids.len(),
        "mirrors": round.mirror_ids.len(),
        "weighted_fpr": round.metrics.weighted_fpr.map(|r| r.to_f64()),
        "fnr": round.metrics.fnr.map(|r| r.to_f64()),
        "validation_loss": round.metrics.validation_loss,
        "pool_fpr": round.metrics.pool_fpr.map(|r| r.to_f64()),
        "operating_threshold": round.metrics.operating_threshold,
        "stop": round.stop.map(|s| format!("{s:?}")),
    })
}

fn cmd_mine(cli: &Cli, config: RunConfig, args: &MineArgs) -> Result<(), CliError> {
    require_config(cli, &config)?;
    let pool = corpus::load(&config.paths.pool, corpus::Format::Jsonl).map_err(corpus_input)?;
    let (train_pool, holdout) = match &config.paths.holdout {
        Some(path) => {
            let holdout = corpus::load(path, corpus::Format::Jsonl).map_err(corpus_input)?;
            (pool, holdout)
        }
        None => corpus::split(&pool, &config.split_spec()).map_err(corpus_input)?,
    };
    let benchmark = match &config.paths.benchmark {
        Some(path) => Some(corpus::load(path, corpus::Format::Jsonl).map_err(corpus_input)?),
        None => None,
    };
    let templates = templates_from(&config)?;

    let (ctx, resume) = if args.resume {
        let dir = latest_mine_dir(&config.output_dir).ok_or_else(|| {
            CliError::Validation(format!(
                "no previous mine run under {}",
                config.output_dir.display()
            ))
        })?;
        let logger = RunLogger::to_stderr(cli.verbose);
        logger.add_file(dir.join("run.log.jsonl")).map_err(runtime)?;
        logger.info("run_resume", json!({"dir": dir.display().to_string()}));
        (
            RunContext {
                dir,
                logger,
                config,
            },
            true,
        )
    } else {
        let ctx = RunContext::create(cli, "mine", config)?;
        ctx.record_inputs(&[ctx.config.paths.pool.as_path()])?;
        (ctx, false)
    };

    let audit = ctx.dir.join("generator_audit.jsonl");
    let generators = generators_from(&ctx.config, Some(&audit))?;
    let run = MiningRun {
        train_pool: &train_pool,
        holdout: &holdout,
        benchmark: benchmark.as_ref(),
        cfg: ctx.config.mining.clone(),
        train_cfg: ctx.config.training.clone(),
        generators,
        templates,
        mirror_opts: MirrorOptions::default(),
        run_dir: ctx.dir.clone(),
    };
    let logger = &ctx.logger;
    let on_round = |round: &Round| logger.info("round_complete", round_event(round));
    let outcome = if resume {
        run.resume_with(on_round)?
    } else {
        run.execute_with(on_round)?
    };
    ctx.logger.info(
        "mine_complete",
        json!({
            "rounds": outcome.rounds.len(),
            "best_round": outcome.best_round,
            "dir": ctx.dir.display().to_string(),
        }),
    );
    println!("{}", ctx.dir.display());
    Ok(())
}

fn latest_mine_dir(output_dir: &Path) -> Option<PathBuf> {
    let mut candidates: Vec<PathBuf> = std::fs::read_dir(output_dir)
        .ok()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_dir()
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("run-") && n.contains("-mine"))
                && p.join("mining.json").exists()
        })
        .collect();
    candidates.sort();
    candidates.pop()
}

fn cmd_eval(cli: &Cli, config: RunConfig, args: &EvalArgs) -> Result<(), CliError> {
    if !(0.0..1.0).contains(&args.target_fpr) {
        return Err(CliError::Validation(format!(
            "--target-fpr {} outside [0, 1)",
            args.target_fpr
        )));
    }
    let model = ClassifierModel::load(&args.model)?;
    let humans = corpus::load(&args.human, corpus::Format::Jsonl).map_err(corpus_input)?;
    let mut ai_docs: Vec<Document> = Vec::new();
    for path in &args.ai {
        let docs = corpus::load(path, corpus::Format::Jsonl).map_err(corpus_input)?;
        ai_docs.extend(docs.into_docs());
    }
    if let Some(bad) = humans.iter().find(|d| d.label != Label::Human) {
        return Err(CliError::Validation(format!(
            "--human file contains non-human document {}",
            bad.id
        )));
    }
    if let Some(bad) = ai_docs.iter().find(|d| d.label != Label::Ai) {
        return Err(CliError::Validation(format!(
            "--ai file contains non-ai document {}",
            bad.id
        )));
    }

    let ctx = RunContext::create(cli, "eval", config)?;
    let mut inputs: Vec<&Path> = vec![args.model.as_path(), args.human.as_path()];
    inputs.extend(args.ai.iter().map(|p| p.as_path()));
    ctx.record_inputs(&inputs)?;

    let mut by_generator: BTreeMap<String, Vec<&Document>> = BTreeMap::new();
    for doc in &ai_docs {
        let generator = doc.generator.clone().expect("validated ai docs");
        by_generator.entry(generator).or_default().push(doc);
    }
    let recall = evaluation::recall_at_fpr(&model, &humans, &by_generator, args.target_fpr)?;

    let mut combined: Vec<Document> = humans.docs().to_vec();
    combined.extend(ai_docs.iter().cloned());
    let combined = Collection::new(combined).map_err(validation)?;
    let report = evaluation::evaluate(&model, &combined, recall.threshold, Some(args.target_fpr))?;

    let json_path = ctx.dir.join("report.json");
    let csv_path = ctx.dir.join("report.csv");
    evaluation::write_report_json(&report, &json_path)?;
    evaluation::write_report_csv(&report, &csv_path)?;
    ctx.logger.info(
        "eval_complete",
        json!({
            "threshold": recall.threshold,
            "realized_fpr": recall.realized_fpr.to_f64(),
            "documents": combined.len(),
            "report": json_path.display().to_string(),
        }),
    );

    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
    } else {
        println!("threshold {:.6} (target FPR {})", recall.threshold, args.target_fpr);
        println!("realized FPR {:.6}", recall.realized_fpr.to_f64());
        for (generator, r) in &recall.per_generator {
            println!(
                "recall[{generator}] {:.4} ({}/{})",
                r.recall().to_f64(),
                r.detected,
                r.total
            );
        }
        println!("{}", json_path.display());
    }
    Ok(())
}

fn cmd_scaling(cli: &Cli, config: RunConfig) -> Result<(), CliError> {
    require_config(cli, &config)?;
    let pool = corpus::load(&config.paths.pool, corpus::Format::Jsonl).map_err(corpus_input)?;
    let templates = templates_from(&config)?;
    let ctx = RunContext::create(cli, "scaling", config)?;
    ctx.record_inputs(&[ctx.config.paths.pool.as_path()])?;
    let audit = ctx.dir.join("generator_audit.jsonl");
    let generators = generators_from(&ctx.config, Some(&audit))?;
    let opts = evaluation::ScalingOptions {
        seed: ctx.config.seed,
        test_docs_per_domain: ctx.config.scaling.test_docs_per_domain,
        templates,
        mirror: MirrorOptions::default(),
    };
    let curve = evaluation::scaling_experiment(
        &pool,
        &ctx.config.scaling.sizes,
        &generators,
        &ctx.config.training,
        &opts,
    )?;
    let csv_path = ctx.dir.join("scaling.csv");
    curve.write_csv(&csv_path)?;
    for point in &curve.points {
        ctx.logger.info(
            "scaling_point",
            json!({
                "size": point.train_size_per_domain,
                "test_loss": point.test_loss,
                "test_accuracy": point.test_accuracy,
            }),
        );
    }
    println!("{}", csv_path.display());
    Ok(())
}

fn cmd_report(cli: &Cli, config: RunConfig, args: &ReportArgs) -> Result<(), CliError> {
    let rounds_dir = args.run.join("rounds");
    if !rounds_dir.is_dir() {
        return Err(CliError::Validation(format!(
            "{} has no rounds ledger",
            args.run.display()
        )));
    }
    let mut rounds: Vec<Round> = Vec::new();
    loop {
        let path = rounds_dir
            .join(format!("round_{:04}", rounds.len()))
            .join("round.json");
        if !path.exists() {
            break;
        }
        let raw = std::fs::read_to_string(&path).map_err(runtime)?;
        rounds.push(serde_json::from_str(&raw).map_err(|e| runtime(format!("{}: {e}", path.display())))?);
    }
    if rounds.is_empty() {
        return Err(CliError::Validation("ledger contains no rounds".into()));
    }
    let ctx = RunContext::create(cli, "report", config)?;
    let mut csv = String::from(
        "round,training_docs,mined_fps,mirrors,weighted_fpr,fnr,validation_loss,pool_fpr,operating_threshold,stop\n",
    );
    let fmt_ratio =
        |r: &Option<mirrordetect::ratio::Ratio>| r.map(|r| format!("{:.6}", r.to_f64())).unwrap_or_default();
    for round in &rounds {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            round.index,
            round.training_ids.len(),
            round.fp_ids.len(),
            round.mirror_ids.len(),
            fmt_ratio(&round.metrics.weighted_fpr),
            fmt_ratio(&round.metrics.fnr),
            round.metrics.validation_loss,
            fmt_ratio(&round.metrics.pool_fpr),
            round.metrics.operating_threshold,
            round.stop.map(|s| format!("{s:?}")).unwrap_or_default(),
        ));
    }
    let csv_path = ctx.dir.join("rounds.csv");
    std::fs::write(&csv_path, &csv).map_err(runtime)?;
    std::fs::write(
        ctx.dir.join("rounds.json"),
        serde_json::to_string_pretty(&rounds).expect("rounds serialize"),
    )
    .map_err(runtime)?;
    print!("{csv}");
    println!("{}", csv_path.display());
    Ok(())
}
