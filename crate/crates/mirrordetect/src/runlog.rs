//! Structured run logging: one JSON object per line, machine-readable for
//! post-hoc analysis of long mining runs.

use serde_json::{json, Map, Value};
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Level {
    Info,
    Debug,
}

impl Level {
    fn name(self) -> &'static str {
        match self {
            Level::Info => "info",
            Level::Debug => "debug",
        }
    }
}

/// Fan-out JSON-line logger. Thread-safe; a failed sink write is ignored
/// rather than failing the run.
pub struct RunLogger {
    min_level: Level,
    sinks: Mutex<Vec<Box<dyn Write + Send>>>,
}

impl RunLogger {
    pub fn to_stderr(verbose: bool) -> Self {
        RunLogger {
            min_level: if verbose { Level::Debug } else { Level::Info },
            sinks: Mutex::new(vec![Box::new(std::io::stderr())]),
        }
    }

    pub fn silent() -> Self {
        RunLogger {
            min_level: Level::Info,
            sinks: Mutex::new(Vec::new()),
        }
    }

    /// Also append events to a file (e.g. `<run_dir>/run.log.jsonl`).
    pub fn add_file(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)?;
        self.sinks.lock().unwrap().push(Box::new(file));
        Ok(())
    }

    pub fn event(&self, level: Level, name: &str, fields: Value) {
        if level > self.min_level {
            return;
        }
        let ts = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        let mut object = Map::new();
        object.insert("ts".into(), json!(ts));
        object.insert("level".into(), json!(level.name()));
        object.insert("event".into(), json!(name));
        if let Value::Object(extra) = fields {
            object.extend(extra);
        }
        let line = Value::Object(object).to_string();
        let mut sinks = self.sinks.lock().unwrap();
        for sink in sinks.iter_mut() {
            let _ = writeln!(sink, "{line}");
        }
    }

    pub fn info(&self, name: &str, fields: Value) {
        self.event(Level::Info, name, fields);
    }

    pub fn debug(&self, name: &str, fields: Value) {
        self.event(Level::Debug, name, fields);
    }
}
