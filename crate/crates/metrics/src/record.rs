//! Interaction records and the append-only record store.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::MetricsError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionRecord {
    pub team_id: String,
    pub timestamp: DateTime<Utc>,
    pub mission_id: String,
    pub mission_seen: bool,
    pub success: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rating: Option<u8>,
    /// Idle sessions closed by the orchestrator; always unsuccessful.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub abandoned: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_id: Option<String>,
}

impl InteractionRecord {
    pub fn validate(&self) -> Result<(), MetricsError> {
        match self.rating {
            Some(r) if !(1..=5).contains(&r) => Err(MetricsError::RatingOutOfRange(r)),
            _ => Ok(()),
        }
    }
}

/// Newline-delimited JSON file, one record per line. Appends are
/// serialized through a mutex and flushed per record.
#[derive(Debug)]
pub struct RecordStore {
    path: PathBuf,
    file: Mutex<File>,
}

impl RecordStore {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, MetricsError> {
        let path = path.as_ref().to_path_buf();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Self {
            path,
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, record: &InteractionRecord) -> Result<(), MetricsError> {
        record.validate()?;
        let mut line = serde_json::to_string(record).expect("record serializes");
        line.push('\n');
        let mut f = self.file.lock().expect("record store lock");
        f.write_all(line.as_bytes())?;
        f.flush()?;
        Ok(())
    }

    /// Snapshot of every record written so far.
    pub fn snapshot(&self) -> Result<Vec<InteractionRecord>, MetricsError> {
        let _guard = self.file.lock().expect("record store lock");
        read_records(&self.path)
    }
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<InteractionRecord>, MetricsError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: InteractionRecord =
            serde_json::from_str(&line).map_err(|source| MetricsError::Parse {
                line: i + 1,
                source,
            })?;
        rec.validate()?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_records(
    path: impl AsRef<Path>,
    records: &[InteractionRecord],
) -> Result<(), MetricsError> {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r).expect("record serializes"));
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}
