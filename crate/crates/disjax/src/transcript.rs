//! Append-only transcript of oracle answers, doubling as a replay cache.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use disjax_core::{Disjointness, Oracle, PromptSpec, Question, Verdict};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub strategy: String,
    pub qa_mode: String,
    pub label_a: String,
    pub label_b: String,
    pub raw_response: String,
    pub verdict: String,
    #[serde(default)]
    pub ambiguous_retries: u32,
    #[serde(default)]
    pub fallback: bool,
    pub timestamp: String,
}

type Key = (String, String, String, String);

impl TranscriptRecord {
    fn key(&self) -> Key {
        (self.strategy.clone(), self.qa_mode.clone(), self.label_a.clone(), self.label_b.clone())
    }
}

fn key_of(spec: PromptSpec, a: &str, b: &str) -> Key {
    (spec.strategy.as_str().into(), spec.qa_mode.as_str().into(), a.into(), b.into())
}

/// Reads JSON-lines records, dropping a torn final line. Returns the records
/// and the byte length of the intact prefix.
pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<(Vec<T>, u64)> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok((Vec::new(), 0)),
        Err(e) => return Err(Error::open(path, e)),
    };
    let mut out = Vec::new();
    let mut offset = 0;
    for (i, chunk) in bytes.split_inclusive(|&b| b == b'\n').enumerate() {
        let complete = chunk.ends_with(b"\n");
        let parsed = std::str::from_utf8(chunk)
            .ok()
            .and_then(|s| serde_json::from_str::<T>(s.trim_end()).ok());
        match parsed {
            Some(rec) if complete => out.push(rec),
            _ if !complete => {
                log::warn!("{}: dropping incomplete final line", path.display());
                break;
            }
            _ => {
                return Err(Error::Format {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: "malformed record".into(),
                })
            }
        }
        offset += chunk.len();
    }
    Ok((out, offset as u64))
}

/// Opens `path` for appending after cutting it to `len` bytes.
pub fn open_append(path: &Path, len: u64) -> Result<File> {
    let f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::open(path, e))?;
    if f.metadata()?.len() != len {
        f.set_len(len)?;
    }
    Ok(f)
}

/// Writes one JSON line and flushes it to the OS.
pub fn append_line<T: Serialize>(f: &mut File, record: &T) -> Result<()> {
    let mut line = serde_json::to_vec(record).expect("serializable");
    line.push(b'\n');
    f.write_all(&line)?;
    f.flush()?;
    Ok(())
}

pub struct Transcript {
    path: PathBuf,
    file: File,
    records: HashMap<Key, TranscriptRecord>,
}

impl Transcript {
    pub fn open(path: &Path) -> Result<Self> {
        let (list, len) = read_jsonl::<TranscriptRecord>(path)?;
        let file = open_append(path, len)?;
        let records = list.into_iter().map(|r| (r.key(), r)).collect();
        Ok(Transcript { path: path.to_path_buf(), file, records })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn lookup(&self, spec: PromptSpec, a: &str, b: &str) -> Option<&TranscriptRecord> {
        self.records.get(&key_of(spec, a, b))
    }

    pub fn record(&mut self, spec: PromptSpec, a: &str, b: &str, v: &Verdict) -> Result<()> {
        let rec = TranscriptRecord {
            strategy: spec.strategy.as_str().into(),
            qa_mode: spec.qa_mode.as_str().into(),
            label_a: a.into(),
            label_b: b.into(),
            raw_response: v.raw_response.clone(),
            verdict: v.value.as_str().into(),
            ambiguous_retries: v.ambiguous_retries,
            fallback: v.fallback,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        };
        append_line(&mut self.file, &rec)?;
        self.records.insert(rec.key(), rec);
        Ok(())
    }
}

/// Answers from the transcript when possible and records every fresh answer.
pub struct CachedOracle<O> {
    inner: O,
    spec: PromptSpec,
    transcript: Transcript,
    hits: usize,
    misses: usize,
}

impl<O> CachedOracle<O> {
    pub fn new(inner: O, spec: PromptSpec, transcript: Transcript) -> Self {
        CachedOracle { inner, spec, transcript, hits: 0, misses: 0 }
    }

    pub fn hits(&self) -> usize {
        self.hits
    }

    pub fn misses(&self) -> usize {
        self.misses
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O> Oracle for CachedOracle<O>
where
    O: Oracle,
    O::Error: Into<Error>,
{
    type Error = Error;

    fn ask(&mut self, q: &Question<'_>) -> Result<Verdict> {
        if let Some(rec) = self.transcript.lookup(self.spec, q.first_label, q.second_label) {
            let value: Disjointness = rec.verdict.parse().map_err(|e| Error::Format {
                path: self.transcript.path().to_path_buf(),
                line: 0,
                message: format!("{e}"),
            })?;
            self.hits += 1;
            return Ok(Verdict {
                value,
                raw_response: rec.raw_response.clone(),
                ambiguous_retries: rec.ambiguous_retries,
                fallback: rec.fallback,
            });
        }
        let v = self.inner.ask(q).map_err(Into::into)?;
        self.misses += 1;
        self.transcript.record(self.spec, q.first_label, q.second_label, &v)?;
        Ok(v)
    }
}
