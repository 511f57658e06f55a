//! Training and evaluation pipeline for AI-generated-text detectors.
//!
//! The pipeline pairs every human document with a synthetic "mirror" written
//! by a generator to match its topic and length, trains a classifier on the
//! mixture, and then iterates hard negative mining: score a large human pool,
//! collect the false positives, mirror them too, and retrain. Evaluation is
//! threshold-calibrated (recall at a fixed false positive rate, per-domain
//! FPR on holdouts that never touch training or mining).
//!
//! Modules map onto pipeline stages:
//!
//! - [`corpus`]: load/validate/dedupe/split labeled document collections
//! - [`textnorm`]: boilerplate stripping, transliteration, whitespace and
//!   quote normalization, short-response rejection, tell detection
//! - [`mirrorgen`]: mirror prompt construction and generator backends
//!   (remote chat API or the offline deterministic simulacrum)
//! - [`model`]: hashed character n-gram logistic classifier
//! - [`mining`]: the hard-negative-mining round loop with a resumable ledger
//! - [`evaluation`]: confusion metrics, threshold calibration, recall@FPR,
//!   per-domain FPR tables, scaling-curve experiments, report files
//! - [`synthcorpus`]: seeded synthetic corpus for hermetic experiments
//!
//! Every seeded operation is deterministic: the same inputs, config, and seed
//! reproduce byte-identical artifacts with the offline generator.
//!
//! The `examples/` directory is the best starting point; each file is a
//! runnable walkthrough of one capability:
//!
//! ```bash
//! cargo run --example ingest_split_dedupe      # corpus load/dedupe/split
//! cargo run --example normalize_text           # the cleaning pipeline
//! cargo run --example build_mirrors            # templates and generation
//! cargo run --example train_classifier         # training and scoring
//! cargo run --example calibrate_and_evaluate   # threshold-calibrated metrics
//! cargo run --release --example mine_hard_negatives   # the full round loop
//! cargo run --release --example scaling_curve         # accuracy vs data size
//! cargo run --example remote_generator         # chat-API backend (needs env)
//! ```
//!
//! The `mirrordetect` binary wraps the same stages as config-driven,
//! resumable subcommands.

pub mod config;
pub mod corpus;
pub mod evaluation;
pub mod hashing;
pub mod mining;
pub mod mirrorgen;
pub mod model;
pub mod ratio;
pub mod runlog;
pub mod synthcorpus;
pub mod textnorm;

pub use corpus::{Collection, Document, Label, SplitSpec};
