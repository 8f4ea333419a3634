//! Append-only JSONL run log.
//!
//! Each line is `{"seq", "kind", "generation", "time", "body"}`. The `time`
//! field is wall-clock seconds and is left out of every digest.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::digest::Digester;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Meta,
    Generation,
    Prompt,
    Response,
    Reflection,
    Result,
}

impl RecordKind {
    fn tag(self) -> &'static [u8] {
        match self {
            RecordKind::Meta => b"meta",
            RecordKind::Generation => b"generation",
            RecordKind::Prompt => b"prompt",
            RecordKind::Response => b"response",
            RecordKind::Reflection => b"reflection",
            RecordKind::Result => b"result",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunLogRecord {
    pub seq: u64,
    pub kind: RecordKind,
    pub generation: u32,
    pub time: f64,
    pub body: Value,
}

impl RunLogRecord {
    fn feed(&self, d: &mut Digester) {
        let body = serde_json::to_string(&self.body).expect("json values serialise");
        d.u64(self.seq).bytes(self.kind.tag()).u64(u64::from(self.generation)).bytes(body.as_bytes());
    }
}

/// Digest of a record sequence, ignoring timestamps.
pub fn digest_records(records: &[RunLogRecord]) -> u64 {
    let mut d = Digester::new();
    d.bytes(b"runlog").u64(records.len() as u64);
    for r in records {
        r.feed(&mut d);
    }
    d.finish()
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

/// In-memory log, optionally mirrored line by line to a file.
#[derive(Default)]
pub struct RunLog {
    records: Vec<RunLogRecord>,
    sink: Option<BufWriter<File>>,
}

impl RunLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Also writes every record to `path`, replacing any existing file.
    pub fn to_file(path: impl AsRef<Path>) -> io::Result<Self> {
        Ok(Self { records: Vec::new(), sink: Some(BufWriter::new(File::create(path)?)) })
    }

    pub fn push(&mut self, kind: RecordKind, generation: u32, body: Value) -> io::Result<u64> {
        let seq = self.records.len() as u64;
        let record = RunLogRecord { seq, kind, generation, time: now(), body };
        if let Some(sink) = &mut self.sink {
            serde_json::to_writer(&mut *sink, &record)?;
            sink.write_all(b"\n")?;
        }
        self.records.push(record);
        Ok(seq)
    }

    pub fn flush(&mut self) -> io::Result<()> {
        match &mut self.sink {
            Some(sink) => sink.flush(),
            None => Ok(()),
        }
    }

    pub fn records(&self) -> &[RunLogRecord] {
        &self.records
    }

    pub fn digest(&self) -> u64 {
        digest_records(&self.records)
    }

    pub fn of_kind(&self, kind: RecordKind) -> impl Iterator<Item = &RunLogRecord> {
        self.records.iter().filter(move |r| r.kind == kind)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReadLogError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: line {line}: {message}")]
    Malformed { path: PathBuf, line: usize, message: String },
}

/// Reads a JSONL log; sequence numbers must run 0, 1, 2, ...
pub fn read_log(path: impl AsRef<Path>) -> Result<Vec<RunLogRecord>, ReadLogError> {
    let path = path.as_ref();
    let io_err = |source| ReadLogError::Io { path: path.to_path_buf(), source };
    let reader = BufReader::new(File::open(path).map_err(io_err)?);
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| ReadLogError::Malformed { path: path.to_path_buf(), line: i + 1, message };
        let record: RunLogRecord = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        if record.seq != records.len() as u64 {
            return Err(malformed(format!("expected seq {}, found {}", records.len(), record.seq)));
        }
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn digest_ignores_time() {
        let mut a = RunLog::new();
        a.push(RecordKind::Meta, 0, json!({"x": 1.5})).unwrap();
        std::thread::sleep(std::time::Duration::from_millis(2));
        let mut b = RunLog::new();
        b.push(RecordKind::Meta, 0, json!({"x": 1.5})).unwrap();
        assert_ne!(a.records()[0].time, b.records()[0].time);
        assert_eq!(a.digest(), b.digest());
        b.push(RecordKind::Result, 1, json!({})).unwrap();
        assert_ne!(a.digest(), b.digest());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.jsonl");
        let mut log = RunLog::to_file(&path).unwrap();
        log.push(RecordKind::Meta, 0, json!({"cost": 0.1 + 0.2, "inf": null})).unwrap();
        log.push(RecordKind::Generation, 1, json!({"costs": [4.0, 4.82842712474619]})).unwrap();
        log.flush().unwrap();
        let back = read_log(&path).unwrap();
        assert_eq!(back, log.records());
        assert_eq!(digest_records(&back), log.digest());
    }

    #[test]
    fn bad_sequence_is_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.jsonl");
        std::fs::write(&path, "{\"seq\":1,\"kind\":\"meta\",\"generation\":0,\"time\":0,\"body\":{}}\n").unwrap();
        assert!(matches!(read_log(&path), Err(ReadLogError::Malformed { line: 1, .. })));
        std::fs::write(&path, "{\"seq\":0,\"kind\":\"meta\"").unwrap();
        assert!(matches!(read_log(&path), Err(ReadLogError::Malformed { .. })));
    }
}
