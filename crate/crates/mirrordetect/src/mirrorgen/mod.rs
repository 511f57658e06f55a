//! Mirror prompt construction and synthetic mirror generation.
//!
//! A mirror prompt is built from one human document so the generated text
//! matches its topic and length. Templates are data files, hand-tuned per
//! domain; the generator behind the prompt is pluggable (a remote
//! chat-completion API or the offline deterministic simulacrum). Raw
//! generations run through the textnorm pipeline and may be rejected.

mod remote;
mod simulacrum;
pub(crate) mod wordlists;

use crate::corpus::{Document, Label};
use crate::hashing::{derive_seed, fnv1a_64};
use crate::textnorm::{self, RejectReason, TellLexicon};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use thiserror::Error;

pub use remote::RemoteGenerator;
pub use simulacrum::{simulacrum_generate, Simulacrum, SimulacrumConfig};

/// Who speaks a turn in a chat-completion exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Prompt,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub role: Role,
    pub text: String,
}

impl Turn {
    pub fn prompt(text: impl Into<String>) -> Self {
        Turn {
            role: Role::Prompt,
            text: text.into(),
        }
    }

    pub fn assistant(text: impl Into<String>) -> Self {
        Turn {
            role: Role::Assistant,
            text: text.into(),
        }
    }
}

/// Template families: one-shot, title-then-body, and document completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateStyle {
    Single,
    DoublePrompt,
    Continuation,
}

impl fmt::Display for TemplateStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemplateStyle::Single => write!(f, "single"),
            TemplateStyle::DoublePrompt => write!(f, "double_prompt"),
            TemplateStyle::Continuation => write!(f, "continuation"),
        }
    }
}

/// Slot that the first generator call of a double-prompt template fills.
pub const GENERATED_SLOT: &str = "generated";

/// A domain-specific prompt template with named `<slot>`s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MirrorTemplate {
    pub template_id: String,
    pub domain: String,
    pub style: TemplateStyle,
    pub turns: Vec<Turn>,
    pub anti_tell_suffix: Option<String>,
}

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("template {id}: {message}")]
    Invalid { id: String, message: String },
    #[error("template parse error in {path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("no template for domain {0:?}")]
    NoTemplateForDomain(String),
}

impl MirrorTemplate {
    /// Style invariants: double-prompt templates carry exactly one
    /// assistant turn holding the `<generated>` placeholder; continuation
    /// templates reference `<excerpt>`.
    pub fn validate(&self) -> Result<(), TemplateError> {
        let invalid = |message: &str| TemplateError::Invalid {
            id: self.template_id.clone(),
            message: message.to_string(),
        };
        if self.turns.is_empty() {
            return Err(invalid("template has no turns"));
        }
        if self.turns.last().map(|t| t.role) != Some(Role::Prompt) {
            return Err(invalid("last turn must be a prompt"));
        }
        let assistant_turns = self
            .turns
            .iter()
            .filter(|t| t.role == Role::Assistant)
            .count();
        match self.style {
            TemplateStyle::DoublePrompt => {
                if assistant_turns != 1 {
                    return Err(invalid("double_prompt requires exactly one assistant turn"));
                }
                let holds_slot = self
                    .turns
                    .iter()
                    .any(|t| t.role == Role::Assistant && t.text.contains("<generated>"));
                if !holds_slot {
                    return Err(invalid("assistant turn must contain the <generated> slot"));
                }
            }
            TemplateStyle::Single | TemplateStyle::Continuation => {
                if assistant_turns != 0 {
                    return Err(invalid("only double_prompt may contain assistant turns"));
                }
                if self.style == TemplateStyle::Continuation
                    && !self.turns.iter().any(|t| t.text.contains("<excerpt>"))
                {
                    return Err(invalid("continuation requires an <excerpt> slot"));
                }
            }
        }
        Ok(())
    }

    /// Parse the on-disk template format: `key: value` headers, `---`,
    /// then `[prompt]` / `[assistant]` sections.
    pub fn parse(raw: &str, origin: &str) -> Result<Self, TemplateError> {
        let parse_err = |message: String| TemplateError::Parse {
            path: origin.to_string(),
            message,
        };
        let (header, body) = raw
            .split_once("\n---")
            .ok_or_else(|| parse_err("missing `---` separator".into()))?;
        let mut id = None;
        let mut domain = None;
        let mut style = None;
        let mut anti_tell = None;
        for line in header.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| parse_err(format!("bad header line {line:?}")))?;
            let value = value.trim().to_string();
            match key.trim() {
                "id" => id = Some(value),
                "domain" => domain = Some(value),
                "style" => {
                    style = Some(match value.as_str() {
                        "single" => TemplateStyle::Single,
                        "double_prompt" => TemplateStyle::DoublePrompt,
                        "continuation" => TemplateStyle::Continuation,
                        other => return Err(parse_err(format!("unknown style {other:?}"))),
                    })
                }
                "anti_tell" => anti_tell = Some(value),
                other => return Err(parse_err(format!("unknown header key {other:?}"))),
            }
        }
        let mut turns: Vec<Turn> = Vec::new();
        let mut current: Option<(Role, Vec<&str>)> = None;
        for line in body.lines().skip(1) {
            let marker = match line.trim() {
                "[prompt]" => Some(Role::Prompt),
                "[assistant]" => Some(Role::Assistant),
                _ => None,
            };
            if let Some(role) = marker {
                if let Some((r, lines)) = current.take() {
                    turns.push(Turn {
                        role: r,
                        text: lines.join("\n").trim().to_string(),
                    });
                }
                current = Some((role, Vec::new()));
            } else if let Some((_, lines)) = current.as_mut() {
                lines.push(line);
            } else if !line.trim().is_empty() {
                return Err(parse_err("turn text before any [prompt]/[assistant] marker".into()));
            }
        }
        if let Some((r, lines)) = current.take() {
            turns.push(Turn {
                role: r,
                text: lines.join("\n").trim().to_string(),
            });
        }
        let template = MirrorTemplate {
            template_id: id.ok_or_else(|| parse_err("missing id header".into()))?,
            domain: domain.ok_or_else(|| parse_err("missing domain header".into()))?,
            style: style.ok_or_else(|| parse_err("missing style header".into()))?,
            turns,
            anti_tell_suffix: anti_tell,
        };
        template.validate()?;
        Ok(template)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, TemplateError> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path).map_err(|source| TemplateError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&raw, &path.display().to_string())
    }
}

/// Templates keyed by domain. Bundled defaults cover the synthetic corpus
/// domains; directories of `.tmpl` files override or extend them.
#[derive(Debug, Clone, Default)]
pub struct TemplateSet {
    by_domain: BTreeMap<String, Vec<MirrorTemplate>>,
}

const BUILTIN_TEMPLATES: &[&str] = &[
    include_str!("../../templates/reviews_single.tmpl"),
    include_str!("../../templates/essays_double.tmpl"),
    include_str!("../../templates/news_continuation.tmpl"),
    include_str!("../../templates/email_continuation.tmpl"),
    include_str!("../../templates/qa_continuation.tmpl"),
];

impl TemplateSet {
    pub fn builtin() -> Self {
        let mut set = TemplateSet::default();
        for raw in BUILTIN_TEMPLATES {
            let t = MirrorTemplate::parse(raw, "builtin").expect("bundled template parses");
            set.insert(t);
        }
        set
    }

    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, TemplateError> {
        let dir = dir.as_ref();
        let mut set = TemplateSet::default();
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(|source| TemplateError::Io {
                path: dir.display().to_string(),
                source,
            })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "tmpl"))
            .collect();
        paths.sort();
        for path in paths {
            set.insert(MirrorTemplate::from_file(&path)?);
        }
        Ok(set)
    }

    pub fn insert(&mut self, template: MirrorTemplate) {
        self.by_domain
            .entry(template.domain.clone())
            .or_default()
            .push(template);
    }

    pub fn for_domain(&self, domain: &str) -> Result<&[MirrorTemplate], TemplateError> {
        self.by_domain
            .get(domain)
            .map(Vec::as_slice)
            .ok_or_else(|| TemplateError::NoTemplateForDomain(domain.to_string()))
    }

    /// Deterministic per-document template choice within a domain.
    pub fn pick(&self, doc: &Document) -> Result<&MirrorTemplate, TemplateError> {
        let candidates = self.for_domain(&doc.domain)?;
        let idx = (fnv1a_64(doc.id.as_bytes()) % candidates.len() as u64) as usize;
        Ok(&candidates[idx])
    }

    pub fn domains(&self) -> impl Iterator<Item = &str> {
        self.by_domain.keys().map(String::as_str)
    }
}

/// A fully substituted prompt targeting one source document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MirrorPrompt {
    pub source_id: String,
    pub template_id: String,
    pub domain: String,
    pub style: TemplateStyle,
    pub turns: Vec<Turn>,
    pub target_words: usize,
}

#[derive(Debug, Error)]
pub enum MirrorError {
    #[error("document {doc}: cannot resolve slot <{slot}>")]
    UnresolvableSlot { doc: String, slot: String },
    #[error("document {doc}: {message}")]
    BadSource { doc: String, message: String },
    #[error("template domain {template} does not match document domain {doc}")]
    DomainMismatch { template: String, doc: String },
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("generation rejected: {0:?}")]
    Rejected(RejectReason),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
}

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("transport failure after {attempts} attempts: {message}")]
    Transport { attempts: usize, message: String },
    #[error("generator returned HTTP {status}")]
    HttpStatus { status: u16 },
    #[error("malformed generator response: {0}")]
    BadResponse(String),
    #[error("missing credentials: environment variable {0} not set")]
    MissingCredentials(String),
    #[error("offline generator requires a seed")]
    MissingSeed,
    #[error("cannot open audit log: {0}")]
    AuditLog(String),
}

/// Configuration for one generator backend.
///
/// `endpoint` is either the literal `"offline"` (the seeded simulacrum) or
/// a chat-completion URL; remote credentials come from the environment
/// variable named by `api_key_env`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub name: String,
    pub endpoint: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    /// Required for offline generators.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Environment variable holding the API key (remote only; defaults to
    /// GENERATOR_API_KEY).
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_max_in_flight")]
    pub max_in_flight: usize,
    #[serde(default = "default_retry_budget")]
    pub retry_budget: usize,
    /// Simulacrum tuning (offline only).
    #[serde(default)]
    pub simulacrum: Option<SimulacrumConfig>,
}

fn default_temperature() -> f64 {
    0.7
}

fn default_max_tokens() -> u32 {
    2048
}

fn default_max_in_flight() -> usize {
    4
}

fn default_retry_budget() -> usize {
    3
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            name: "simulacrum".into(),
            endpoint: "offline".into(),
            temperature: default_temperature(),
            max_tokens: default_max_tokens(),
            seed: None,
            api_key_env: None,
            max_in_flight: default_max_in_flight(),
            retry_budget: default_retry_budget(),
            simulacrum: None,
        }
    }
}

/// Instantiate the backend a spec describes. Remote backends append every
/// request/response pair to `audit` (JSONL) when a path is given.
pub fn build_generator(
    spec: &GeneratorSpec,
    audit: Option<&Path>,
) -> Result<Box<dyn Generator>, GeneratorError> {
    if spec.endpoint == "offline" {
        let seed = spec.seed.ok_or(GeneratorError::MissingSeed)?;
        let cfg = spec.simulacrum.clone().unwrap_or_default();
        Ok(Box::new(Simulacrum::with_name(spec.name.clone(), seed, cfg)))
    } else {
        let remote = RemoteGenerator::from_spec(spec)?;
        let remote = match audit {
            Some(path) => remote
                .with_audit_log(path)
                .map_err(|e| GeneratorError::AuditLog(e.to_string()))?,
            None => remote,
        };
        Ok(Box::new(remote))
    }
}

pub fn build_generators(
    specs: &[GeneratorSpec],
    audit: Option<&Path>,
) -> Result<Vec<Box<dyn Generator>>, GeneratorError> {
    specs.iter().map(|spec| build_generator(spec, audit)).collect()
}

/// Round target length to the nearest 50 words, minimum 50, so the exact
/// source length never leaks into the prompt as a feature.
pub fn round_target_words(word_count: usize) -> usize {
    let rounded = ((word_count as f64 / 50.0).round() as usize) * 50;
    rounded.max(50)
}

/// First `n` sentences of a text (the whole text when it has fewer).
pub fn leading_sentences(text: &str, n: usize) -> String {
    let mut found = 0;
    let mut end = text.len();
    let mut it = text.char_indices().peekable();
    while let Some((i, c)) = it.next() {
        if matches!(c, '.' | '!' | '?') {
            let next_is_break = it
                .peek()
                .map(|&(_, nc)| nc.is_whitespace())
                .unwrap_or(true);
            if next_is_break {
                found += 1;
                if found == n {
                    end = i + c.len_utf8();
                    break;
                }
            }
        }
    }
    text[..end].trim().to_string()
}

fn resolve_slot(name: &str, doc: &Document) -> Option<String> {
    match name {
        "target_words" => Some(round_target_words(doc.word_count).to_string()),
        "excerpt" => Some(leading_sentences(&doc.text, 2)),
        "text" => Some(doc.text.clone()),
        "domain" => Some(doc.domain.clone()),
        GENERATED_SLOT => None, // filled by the first generator call
        other => doc.extra.get(other).map(|v| match v {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        }),
    }
}

fn substitute(text: &str, doc: &Document, allow_generated: bool) -> Result<String, MirrorError> {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(open) = rest.find('<') {
        out.push_str(&rest[..open]);
        let tail = &rest[open + 1..];
        let Some(close) = tail.find('>') else {
            out.push('<');
            rest = tail;
            continue;
        };
        let name = &tail[..close];
        if name == GENERATED_SLOT && allow_generated {
            out.push('<');
            out.push_str(name);
            out.push('>');
        } else {
            match resolve_slot(name, doc) {
                Some(value) => out.push_str(&value),
                None => {
                    return Err(MirrorError::UnresolvableSlot {
                        doc: doc.id.clone(),
                        slot: name.to_string(),
                    })
                }
            }
        }
        rest = &tail[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

/// Fill a template's slots from a human document.
///
/// Pure and deterministic; the `<generated>` slot of double-prompt
/// templates is left for generation time. The anti-tell suffix, when set,
/// is appended to the final prompt turn.
pub fn build_prompt(doc: &Document, template: &MirrorTemplate) -> Result<MirrorPrompt, MirrorError> {
    if doc.label != Label::Human {
        return Err(MirrorError::BadSource {
            doc: doc.id.clone(),
            message: "mirror sources must be human-labeled".into(),
        });
    }
    if doc.domain != template.domain {
        return Err(MirrorError::DomainMismatch {
            template: template.domain.clone(),
            doc: doc.domain.clone(),
        });
    }
    template.validate()?;
    let mut turns = Vec::with_capacity(template.turns.len());
    for turn in &template.turns {
        turns.push(Turn {
            role: turn.role,
            text: substitute(&turn.text, doc, true)?,
        });
    }
    if let Some(suffix) = &template.anti_tell_suffix {
        let last = turns
            .iter_mut()
            .rev()
            .find(|t| t.role == Role::Prompt)
            .expect("validated template has a prompt turn");
        last.text.push(' ');
        last.text.push_str(suffix);
    }
    Ok(MirrorPrompt {
        source_id: doc.id.clone(),
        template_id: template.template_id.clone(),
        domain: doc.domain.clone(),
        style: template.style,
        turns,
        target_words: round_target_words(doc.word_count),
    })
}

/// A text generator behind the single chat contract: turn list in, text
/// out. `salt` varies retries; offline backends fold it into their seed and
/// remote ones ignore it.
pub trait Generator: Send + Sync {
    fn name(&self) -> &str;
    fn complete(&self, turns: &[Turn], salt: u64) -> Result<String, GeneratorError>;
}

/// Postprocessing knobs for mirror acceptance.
#[derive(Debug, Clone)]
pub struct MirrorOptions {
    pub min_words: usize,
    /// Attempts per document before it is skipped (rejections only).
    pub attempts: usize,
    /// Suffix index when fanning out several mirrors per source.
    pub fanout_index: usize,
    pub lexicon: TellLexicon,
}

impl Default for MirrorOptions {
    fn default() -> Self {
        MirrorOptions {
            min_words: textnorm::MIN_WORDS,
            attempts: 3,
            fanout_index: 0,
            lexicon: TellLexicon::default(),
        }
    }
}

fn mirror_id(source_id: &str, fanout: usize) -> String {
    if fanout == 0 {
        format!("{source_id}::m")
    } else {
        format!("{source_id}::m{fanout}")
    }
}

/// Run one generation for a prompt and clean the result into a Document.
///
/// Double-prompt templates make two sequential calls: the turns before the
/// assistant placeholder produce the intermediate (e.g. a title), which is
/// substituted into `<generated>` before the final call. The raw body runs
/// through emoji removal, transliteration, boilerplate stripping,
/// whitespace normalization, and the length check.
pub fn generate_mirror(
    prompt: &MirrorPrompt,
    generator: &dyn Generator,
    opts: &MirrorOptions,
) -> Result<Document, MirrorError> {
    generate_mirror_salted(prompt, generator, opts, 0)
}

fn generate_mirror_salted(
    prompt: &MirrorPrompt,
    generator: &dyn Generator,
    opts: &MirrorOptions,
    salt: u64,
) -> Result<Document, MirrorError> {
    let raw = match prompt.style {
        TemplateStyle::Single | TemplateStyle::Continuation => {
            generator.complete(&prompt.turns, salt)?
        }
        TemplateStyle::DoublePrompt => {
            let placeholder = prompt
                .turns
                .iter()
                .position(|t| t.role == Role::Assistant)
                .expect("double_prompt has an assistant turn");
            let first = generator.complete(&prompt.turns[..placeholder], salt)?;
            let generated = first.lines().next().unwrap_or("").trim().trim_matches('"');
            let filled: Vec<Turn> = prompt
                .turns
                .iter()
                .map(|t| Turn {
                    role: t.role,
                    text: t.text.replace("<generated>", generated),
                })
                .collect();
            generator.complete(&filled, derive_seed(salt, "second-call", 1))?
        }
    };
    let (text, report) = textnorm::clean(&raw, opts.min_words, &opts.lexicon);
    if let Some(reason) = report.rejected {
        return Err(MirrorError::Rejected(reason));
    }
    let mut doc = Document::ai(
        mirror_id(&prompt.source_id, opts.fanout_index),
        text,
        prompt.domain.clone(),
        format!("mirror:{}", prompt.template_id),
        generator.name(),
    );
    doc.mirror_of = Some(prompt.source_id.clone());
    Ok(doc)
}

/// One skipped source in a batch run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkipRecord {
    pub source_id: String,
    pub reason: String,
}

/// Batch outcome: accepted mirrors in input order, plus skip records.
#[derive(Debug, Default)]
pub struct MirrorBatch {
    pub mirrors: Vec<Document>,
    pub skipped: Vec<SkipRecord>,
}

impl MirrorBatch {
    /// Mean relative length error of accepted mirrors vs their sources.
    pub fn mean_relative_length_error(&self, sources: &[&Document]) -> f64 {
        let by_id: BTreeMap<&str, &Document> =
            sources.iter().map(|d| (d.id.as_str(), *d)).collect();
        let mut total = 0.0;
        let mut n = 0usize;
        for m in &self.mirrors {
            let Some(src) = m.mirror_of.as_deref().and_then(|id| by_id.get(id)) else {
                continue;
            };
            if src.word_count == 0 {
                continue;
            }
            let diff = m.word_count.abs_diff(src.word_count) as f64;
            total += diff / src.word_count as f64;
            n += 1;
        }
        if n == 0 {
            0.0
        } else {
            total / n as f64
        }
    }
}

/// Mirror a batch of human documents, round-robin over generators.
///
/// Prompt building, generation, and cleaning run in parallel per document;
/// output order is restored to input order so seeded runs reproduce. A
/// document whose generation keeps getting rejected (or whose slots cannot
/// resolve) is skipped with a record instead of failing the batch.
pub fn mirror_batch(
    sources: &[&Document],
    templates: &TemplateSet,
    generators: &[Box<dyn Generator>],
    opts: &MirrorOptions,
    seed: u64,
) -> MirrorBatch {
    assert!(!generators.is_empty(), "at least one generator required");
    let outcomes: Vec<Result<Document, (String, String)>> = sources
        .par_iter()
        .enumerate()
        .map(|(i, doc)| {
            let generator = &generators[i % generators.len()];
            let template = templates
                .pick(doc)
                .map_err(|e| (doc.id.clone(), e.to_string()))?;
            let prompt = build_prompt(doc, template).map_err(|e| (doc.id.clone(), e.to_string()))?;
            let mut last_err = String::new();
            for attempt in 0..opts.attempts.max(1) {
                let salt = derive_seed(seed, &doc.id, attempt as u64);
                match generate_mirror_salted(&prompt, generator.as_ref(), opts, salt) {
                    Ok(doc) => return Ok(doc),
                    Err(MirrorError::Rejected(reason)) => {
                        last_err = format!("rejected: {reason:?}");
                    }
                    Err(other) => return Err((doc.id.clone(), other.to_string())),
                }
            }
            Err((doc.id.clone(), last_err))
        })
        .collect();

    let mut batch = MirrorBatch::default();
    for outcome in outcomes {
        match outcome {
            Ok(doc) => batch.mirrors.push(doc),
            Err((source_id, reason)) => batch.skipped.push(SkipRecord { source_id, reason }),
        }
    }
    batch
}
