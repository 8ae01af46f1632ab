//! On-disk sessions: one directory per id holding the workbook, transcript,
//! config and a checksum file covering the other three.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sheetmind_core::io::{from_json, to_json};
use sheetmind_core::Workbook;
use thiserror::Error;

use super::config::PipelineConfig;
use super::pipeline::SessionState;
use super::transcript::Transcript;

const WORKBOOK: &str = "workbook.json";
const TRANSCRIPT: &str = "transcript.jsonl";
const CONFIG: &str = "config.json";
const CHECKSUMS: &str = "checksums.txt";
const CHECKED: [&str; 3] = [WORKBOOK, TRANSCRIPT, CONFIG];

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("session {0} already exists")]
    IdCollision(String),

    #[error("no session {0}")]
    NotFound(String),

    #[error("invalid session id {0:?}")]
    InvalidId(String),

    #[error("session {id} is corrupt: {file}: {detail}")]
    Corrupt { id: String, file: String, detail: String },

    #[error("invalid pipeline config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl StoreError {
    pub fn code(&self) -> &'static str {
        match self {
            StoreError::IdCollision(_) => "id-collision",
            StoreError::NotFound(_) => "not-found",
            StoreError::InvalidId(_) => "invalid-id",
            StoreError::Corrupt { .. } => "corrupt-store",
            StoreError::Config(_) => "invalid-config",
            StoreError::Io(_) => "io",
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoredConfig {
    pipeline: PipelineConfig,
    turn: u64,
    version: u64,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

/// Writes via a temporary file and rename, so readers never see a partial file.
fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(tmp, path)
}

#[derive(Debug, Clone)]
pub struct SessionStore {
    root: PathBuf,
}

impl SessionStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<SessionStore, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(SessionStore { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dir(&self, id: &str) -> Result<PathBuf, StoreError> {
        if !valid_id(id) {
            return Err(StoreError::InvalidId(id.to_string()));
        }
        Ok(self.root.join(id))
    }

    /// Creates and persists a session with a fresh random id.
    pub fn create(&self, initial: Workbook, config: PipelineConfig) -> Result<SessionState, StoreError> {
        self.create_with_id(&uuid::Uuid::new_v4().simple().to_string(), initial, config)
    }

    pub fn create_with_id(&self, id: &str, initial: Workbook, config: PipelineConfig) -> Result<SessionState, StoreError> {
        config.validate().map_err(|e| StoreError::Config(e.0))?;
        let dir = self.dir(id)?;
        match fs::create_dir(&dir) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => return Err(StoreError::IdCollision(id.to_string())),
            Err(e) => return Err(e.into()),
        }
        let state = SessionState::new(id, initial, config);
        self.save(&state)?;
        Ok(state)
    }

    pub fn save(&self, s: &SessionState) -> Result<(), StoreError> {
        let dir = self.dir(&s.id)?;
        if !dir.is_dir() {
            return Err(StoreError::NotFound(s.id.clone()));
        }
        let config = StoredConfig {
            pipeline: s.config.clone(),
            turn: s.turn,
            version: s.workbook.version(),
        };
        let files: [(&str, Vec<u8>); 3] = [
            (WORKBOOK, to_json(&s.workbook).into_bytes()),
            (TRANSCRIPT, s.transcript.to_jsonl().into_bytes()),
            (CONFIG, serde_json::to_vec_pretty(&config).expect("config serializes")),
        ];
        let mut sums = String::new();
        for (name, bytes) in &files {
            write_atomic(&dir.join(name), bytes)?;
            sums.push_str(&format!("{}  {name}\n", sha256_hex(bytes)));
        }
        write_atomic(&dir.join(CHECKSUMS), sums.as_bytes())?;
        Ok(())
    }

    pub fn load(&self, id: &str) -> Result<SessionState, StoreError> {
        let dir = self.dir(id)?;
        if !dir.is_dir() {
            return Err(StoreError::NotFound(id.to_string()));
        }
        let corrupt = |file: &str, detail: String| StoreError::Corrupt {
            id: id.to_string(),
            file: file.to_string(),
            detail,
        };
        let read = |file: &str| -> Result<Vec<u8>, StoreError> {
            fs::read(dir.join(file)).map_err(|e| corrupt(file, e.to_string()))
        };
        let sums_text = String::from_utf8(read(CHECKSUMS)?).map_err(|e| corrupt(CHECKSUMS, e.to_string()))?;
        let mut sums = BTreeMap::new();
        for line in sums_text.lines() {
            let (hash, name) = line
                .split_once("  ")
                .ok_or_else(|| corrupt(CHECKSUMS, format!("malformed line {line:?}")))?;
            sums.insert(name.to_string(), hash.to_string());
        }
        let mut contents = BTreeMap::new();
        for name in CHECKED {
            let bytes = read(name)?;
            let expected = sums.get(name).ok_or_else(|| corrupt(CHECKSUMS, format!("no entry for {name}")))?;
            if sha256_hex(&bytes) != *expected {
                return Err(corrupt(name, "checksum mismatch".into()));
            }
            let text = String::from_utf8(bytes).map_err(|e| corrupt(name, e.to_string()))?;
            contents.insert(name, text);
        }
        let config: StoredConfig =
            serde_json::from_str(&contents[CONFIG]).map_err(|e| corrupt(CONFIG, e.to_string()))?;
        let mut workbook = from_json(&contents[WORKBOOK]).map_err(|e| corrupt(WORKBOOK, e.to_string()))?;
        workbook.restore_version(config.version);
        let transcript = Transcript::from_jsonl(&contents[TRANSCRIPT]).map_err(|e| corrupt(TRANSCRIPT, e))?;
        Ok(SessionState {
            id: id.to_string(),
            workbook,
            transcript,
            config: config.pipeline,
            turn: config.turn,
        })
    }

    pub fn exists(&self, id: &str) -> bool {
        self.dir(id).map(|d| d.is_dir()).unwrap_or(false)
    }

    /// Ids of all stored sessions, sorted.
    pub fn list(&self) -> Result<Vec<String>, StoreError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.root)? {
            let entry = entry?;
            if entry.file_type()?.is_dir() {
                if let Some(name) = entry.file_name().to_str().filter(|n| valid_id(n)) {
                    ids.push(name.to_string());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }
}
