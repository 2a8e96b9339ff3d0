//! Append-only record of fixture actions, written as JSON lines.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use super::Payload;

/// One journal line. `verb` is a verb keyword or one of `open`, `back`,
/// `forward` and `timer`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct JournalEntry {
    pub seq: u64,
    pub snapshot: String,
    pub verb: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Payload>,
    #[serde(default)]
    pub modifiers: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub submitted: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub navigated_to: Option<String>,
}

/// In-memory journal with an optional JSONL sink.
#[derive(Default)]
pub struct Journal {
    entries: Vec<JournalEntry>,
    sink: Option<Box<dyn Write + Send>>,
}

impl fmt::Debug for Journal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Journal")
            .field("entries", &self.entries)
            .field("sink", &self.sink.is_some())
            .finish()
    }
}

impl Journal {
    pub fn new() -> Self {
        Journal::default()
    }

    /// Also writes each appended entry as one line to `sink`.
    pub fn with_sink(sink: Box<dyn Write + Send>) -> Self {
        Journal {
            entries: Vec::new(),
            sink: Some(sink),
        }
    }

    pub fn entries(&self) -> &[JournalEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn next_seq(&self) -> u64 {
        self.entries.len() as u64 + 1
    }

    pub fn append(&mut self, entry: JournalEntry) -> io::Result<()> {
        if let Some(sink) = &mut self.sink {
            let line = serde_json::to_string(&entry)?;
            writeln!(sink, "{line}")?;
            sink.flush()?;
        }
        self.entries.push(entry);
        Ok(())
    }

    /// Drops recorded entries; the sink is kept.
    pub fn clear(&mut self) {
        self.entries.clear();
    }

    pub fn to_jsonl(&self) -> String {
        to_jsonl(&self.entries)
    }
}

pub fn to_jsonl(entries: &[JournalEntry]) -> String {
    entries
        .iter()
        .map(|e| serde_json::to_string(e).expect("journal entries serialize") + "\n")
        .collect()
}

/// Reads a JSONL journal, skipping blank lines.
pub fn read_jsonl<R: BufRead>(reader: R) -> io::Result<Vec<JournalEntry>> {
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}
