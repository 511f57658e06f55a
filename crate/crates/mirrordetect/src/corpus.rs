//! Labeled document collections: ingestion, validation, dedup, splitting,
//! and JSONL persistence.
//!
//! Collections are immutable after construction; every constructor runs the
//! full invariant suite (unique ids, label/generator consistency, mirror
//! links). Storage is JSONL, one document per line; CSV is supported for
//! ingestion only.

use crate::hashing::{derive_seed, fnv1a_128};
use crate::textnorm;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use thiserror::Error;

/// Who wrote a document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Human,
    Ai,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Human => write!(f, "human"),
            Label::Ai => write!(f, "ai"),
        }
    }
}

/// One labeled text unit.
///
/// `word_count` is derived from the text at construction/persistence time.
/// Fields outside the schema (e.g. a review's star rating) round-trip
/// through `extra` and are available to prompt templates as slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub label: Label,
    pub domain: String,
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mirror_of: Option<String>,
    #[serde(default)]
    pub word_count: usize,
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl Document {
    pub fn human(id: impl Into<String>, text: impl Into<String>, domain: impl Into<String>, source: impl Into<String>) -> Self {
        let text = text.into();
        let word_count = textnorm::word_count(&text);
        Document {
            id: id.into(),
            text,
            label: Label::Human,
            domain: domain.into(),
            source: source.into(),
            year: None,
            generator: None,
            mirror_of: None,
            word_count,
            extra: BTreeMap::new(),
        }
    }

    pub fn ai(
        id: impl Into<String>,
        text: impl Into<String>,
        domain: impl Into<String>,
        source: impl Into<String>,
        generator: impl Into<String>,
    ) -> Self {
        let text = text.into();
        let word_count = textnorm::word_count(&text);
        Document {
            id: id.into(),
            text,
            label: Label::Ai,
            domain: domain.into(),
            source: source.into(),
            year: None,
            generator: Some(generator.into()),
            mirror_of: None,
            word_count,
            extra: BTreeMap::new(),
        }
    }

    /// Recompute the derived word count from the current text.
    pub fn refresh_word_count(&mut self) {
        self.word_count = textnorm::word_count(&self.text);
    }

    /// Per-document invariants (the cross-document ones live in
    /// [`Collection::new`]).
    pub fn validate(&self) -> Result<(), CorpusError> {
        match (self.label, &self.generator) {
            (Label::Ai, None) => {
                return Err(CorpusError::Invariant {
                    id: self.id.clone(),
                    message: "label=ai requires a generator".into(),
                })
            }
            (Label::Human, Some(_)) => {
                return Err(CorpusError::Invariant {
                    id: self.id.clone(),
                    message: "label=human forbids a generator".into(),
                })
            }
            _ => {}
        }
        if self.mirror_of.is_some() && self.label != Label::Ai {
            return Err(CorpusError::Invariant {
                id: self.id.clone(),
                message: "mirror_of requires label=ai".into(),
            });
        }
        Ok(())
    }
}

/// Deterministic split parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitSpec {
    pub seed: u64,
    /// Fraction of the pool held out, in `[0, 1)`.
    pub holdout_fraction: f64,
    /// Stratify by domain: hold out `round(fraction * n_domain)` per domain.
    pub per_domain: bool,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("document {id}: {message}")]
    Invariant { id: String, message: String },
    #[error("duplicate ids: {}", .0.join(", "))]
    DuplicateIds(Vec<String>),
    #[error("document {id}: mirror_of {target} is not human-labeled")]
    MirrorTargetNotHuman { id: String, target: String },
    #[error("empty pool")]
    EmptyPool,
    #[error("domain {0:?} has fewer than 2 documents; cannot stratify")]
    UnstratifiableDomain(String),
    #[error("holdout fraction {0} outside [0, 1)")]
    BadFraction(f64),
}

/// Ingestion formats. Persistence is always JSONL.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Jsonl,
    Csv,
}

/// An immutable collection of documents with unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Collection {
    docs: Vec<Document>,
}

impl Collection {
    /// Validate and wrap a document list. Input order is preserved.
    pub fn new(docs: Vec<Document>) -> Result<Self, CorpusError> {
        // Duplicate ids: report every offender, not just the first.
        let mut seen: HashMap<&str, usize> = HashMap::with_capacity(docs.len());
        for doc in &docs {
            *seen.entry(doc.id.as_str()).or_insert(0) += 1;
        }
        let mut dups: Vec<String> = seen
            .iter()
            .filter(|(_, &n)| n > 1)
            .map(|(id, _)| id.to_string())
            .collect();
        if !dups.is_empty() {
            dups.sort();
            return Err(CorpusError::DuplicateIds(dups));
        }

        let labels: HashMap<&str, Label> =
            docs.iter().map(|d| (d.id.as_str(), d.label)).collect();
        for doc in &docs {
            doc.validate()?;
            if let Some(target) = &doc.mirror_of {
                // Mirrors may reference documents stored elsewhere, so a
                // missing target is legal; a present one must be human.
                if let Some(&label) = labels.get(target.as_str()) {
                    if label != Label::Human {
                        return Err(CorpusError::MirrorTargetNotHuman {
                            id: doc.id.clone(),
                            target: target.clone(),
                        });
                    }
                }
            }
        }
        Ok(Collection { docs })
    }

    pub fn docs(&self) -> &[Document] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Document> {
        self.docs.iter()
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.docs.iter().find(|d| d.id == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.docs.iter().map(|d| d.id.as_str())
    }

    pub fn id_set(&self) -> HashSet<&str> {
        self.ids().collect()
    }

    pub fn into_docs(self) -> Vec<Document> {
        self.docs
    }
}

impl<'a> IntoIterator for &'a Collection {
    type Item = &'a Document;
    type IntoIter = std::slice::Iter<'a, Document>;
    fn into_iter(self) -> Self::IntoIter {
        self.docs.iter()
    }
}

/// Load a collection from disk, validating all invariants.
///
/// JSONL parse failures report the 1-based line number; CSV failures the
/// record number. `word_count` is recomputed from the text on load.
pub fn load(path: impl AsRef<Path>, format: Format) -> Result<Collection, CorpusError> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let docs = match format {
        Format::Jsonl => parse_jsonl(&raw)?,
        Format::Csv => parse_csv(&raw)?,
    };
    Collection::new(docs)
}

fn parse_jsonl(raw: &str) -> Result<Vec<Document>, CorpusError> {
    let lines: Vec<(usize, &str)> = raw
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    let parsed: Vec<Result<Document, CorpusError>> = lines
        .par_iter()
        .map(|(idx, line)| {
            serde_json::from_str::<Document>(line)
                .map(|mut doc| {
                    doc.refresh_word_count();
                    doc
                })
                .map_err(|e| CorpusError::Parse {
                    line: idx + 1,
                    message: e.to_string(),
                })
        })
        .collect();
    parsed.into_iter().collect()
}

fn parse_csv(raw: &str) -> Result<Vec<Document>, CorpusError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(false)
        .from_reader(raw.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| CorpusError::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let mut docs = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2; // header occupies line 1
        let record = record.map_err(|e| CorpusError::Parse {
            line,
            message: e.to_string(),
        })?;
        let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
        for (name, value) in headers.iter().zip(record.iter()) {
            fields.insert(name, value);
        }
        let require = |key: &str| -> Result<String, CorpusError> {
            match fields.get(key) {
                Some(v) if !v.is_empty() => Ok((*v).to_string()),
                _ => Err(CorpusError::Parse {
                    line,
                    message: format!("missing required field `{key}`"),
                }),
            }
        };
        let optional = |key: &str| -> Option<String> {
            fields
                .get(key)
                .filter(|v| !v.is_empty())
                .map(|v| (*v).to_string())
        };
        let label = match require("label")?.as_str() {
            "human" => Label::Human,
            "ai" => Label::Ai,
            other => {
                return Err(CorpusError::Parse {
                    line,
                    message: format!("unknown label {other:?}"),
                })
            }
        };
        let year = match optional("year") {
            None => None,
            Some(v) => Some(v.parse::<i32>().map_err(|_| CorpusError::Parse {
                line,
                message: format!("year {v:?} is not an integer"),
            })?),
        };
        let known = ["id", "text", "label", "domain", "source", "year", "generator", "mirror_of", "word_count"];
        let extra: BTreeMap<String, serde_json::Value> = fields
            .iter()
            .filter(|(k, v)| !known.contains(*k) && !v.is_empty())
            .map(|(k, v)| (k.to_string(), serde_json::Value::String(v.to_string())))
            .collect();
        let text = require("text")?;
        let word_count = textnorm::word_count(&text);
        docs.push(Document {
            id: require("id")?,
            text,
            label,
            domain: require("domain")?,
            source: require("source")?,
            year,
            generator: optional("generator"),
            mirror_of: optional("mirror_of"),
            word_count,
            extra,
        });
    }
    Ok(docs)
}

/// Write a collection as JSONL, one document per line.
pub fn save(collection: &Collection, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let io_err = |source: std::io::Error| CorpusError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut writer = BufWriter::new(file);
    for doc in collection.iter() {
        let line = serde_json::to_string(doc).expect("document serializes");
        writer.write_all(line.as_bytes()).map_err(io_err)?;
        writer.write_all(b"\n").map_err(io_err)?;
    }
    writer.flush().map_err(io_err)
}

/// Curation lints that warn rather than fail: human documents dated after
/// 2021 risk contamination by AI-era text.
pub fn curation_warnings(collection: &Collection) -> Vec<String> {
    collection
        .iter()
        .filter(|d| d.label == Label::Human && d.year.is_some_and(|y| y > 2021))
        .map(|d| {
            format!(
                "document {}: human-labeled but year {} is after 2021",
                d.id,
                d.year.unwrap()
            )
        })
        .collect()
}

/// Partition a pool into (train, holdout), deterministically in the seed.
///
/// Stratified splits hold out `round(fraction * n)` per domain; otherwise a
/// single rounded count over the whole pool. Both halves preserve pool
/// order.
pub fn split(pool: &Collection, spec: &SplitSpec) -> Result<(Collection, Collection), CorpusError> {
    if pool.is_empty() {
        return Err(CorpusError::EmptyPool);
    }
    if !(0.0..1.0).contains(&spec.holdout_fraction) {
        return Err(CorpusError::BadFraction(spec.holdout_fraction));
    }

    let mut holdout_idx: HashSet<usize> = HashSet::new();
    if spec.per_domain {
        let mut by_domain: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, doc) in pool.iter().enumerate() {
            by_domain.entry(doc.domain.as_str()).or_default().push(i);
        }
        for (domain, members) in &by_domain {
            if members.len() < 2 {
                return Err(CorpusError::UnstratifiableDomain(domain.to_string()));
            }
        }
        for (domain, members) in &by_domain {
            let take = (spec.holdout_fraction * members.len() as f64).round() as usize;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, "split", fnv1a_128(domain.as_bytes()) as u64));
            for sel in rand::seq::index::sample(&mut rng, members.len(), take.min(members.len())) {
                holdout_idx.insert(members[sel]);
            }
        }
    } else {
        let take = (spec.holdout_fraction * pool.len() as f64).round() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, "split", 0));
        for sel in rand::seq::index::sample(&mut rng, pool.len(), take.min(pool.len())) {
            holdout_idx.insert(sel);
        }
    }

    let mut train = Vec::with_capacity(pool.len() - holdout_idx.len());
    let mut holdout = Vec::with_capacity(holdout_idx.len());
    for (i, doc) in pool.iter().enumerate() {
        if holdout_idx.contains(&i) {
            holdout.push(doc.clone());
        } else {
            train.push(doc.clone());
        }
    }
    Ok((Collection { docs: train }, Collection { docs: holdout }))
}

/// Remove documents whose normalized text duplicates an earlier one.
///
/// The key is the 128-bit content hash of `textnorm::normalize(text)`;
/// first occurrence wins and relative order is preserved. Hashing runs in
/// parallel; the surviving set is identical to sequential execution.
pub fn dedupe(docs: &Collection) -> Collection {
    let keys: Vec<u128> = docs
        .docs
        .par_iter()
        .map(|d| fnv1a_128(textnorm::normalize(&d.text).as_bytes()))
        .collect();
    let mut seen: HashSet<u128> = HashSet::with_capacity(docs.len());
    let mut surviving = Vec::with_capacity(docs.len());
    for (doc, key) in docs.iter().zip(keys) {
        if seen.insert(key) {
            surviving.push(doc.clone());
        }
    }
    Collection { docs: surviving }
}
