use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::backend::{AdapterError, ChatBackend, ChatRequest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CassetteEntry {
    pub request: ChatRequest,
    pub response: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CassetteFile {
    pub entries: Vec<CassetteEntry>,
}

impl CassetteFile {
    pub fn load(path: &Path) -> Result<Self, AdapterError> {
        let text = fs::read_to_string(path).map_err(|e| AdapterError::Cassette(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| AdapterError::Cassette(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<(), AdapterError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| AdapterError::Cassette(e.to_string()))?;
        fs::write(path, text + "\n").map_err(|e| AdapterError::Cassette(format!("{}: {e}", path.display())))
    }
}

enum Mode {
    Replay,
    Record { inner: Box<dyn ChatBackend>, path: PathBuf },
}

/// Record/replay wrapper: in replay mode the n-th occurrence of a request is
/// answered with the n-th recorded response to that same request; in record
/// mode calls go to the wrapped backend and every exchange is appended to the
/// file as it happens.
pub struct Cassette {
    mode: Mode,
    state: Mutex<State>,
}

struct State {
    file: CassetteFile,
    seen: HashMap<String, usize>,
}

fn key(request: &ChatRequest) -> String {
    serde_json::to_string(request).unwrap_or_default()
}

impl Cassette {
    pub fn replay(file: CassetteFile) -> Self {
        Cassette { mode: Mode::Replay, state: Mutex::new(State { file, seen: HashMap::new() }) }
    }

    pub fn replay_from(path: &Path) -> Result<Self, AdapterError> {
        Ok(Self::replay(CassetteFile::load(path)?))
    }

    /// Starts a fresh recording at `path`.
    pub fn record(inner: Box<dyn ChatBackend>, path: impl Into<PathBuf>) -> Self {
        Cassette {
            mode: Mode::Record { inner, path: path.into() },
            state: Mutex::new(State { file: CassetteFile::default(), seen: HashMap::new() }),
        }
    }

    pub fn entries(&self) -> Vec<CassetteEntry> {
        self.state.lock().unwrap_or_else(|e| e.into_inner()).file.entries.clone()
    }
}

impl ChatBackend for Cassette {
    fn complete(&self, request: &ChatRequest) -> Result<String, AdapterError> {
        match &self.mode {
            Mode::Replay => {
                let mut st = self.state.lock().unwrap_or_else(|e| e.into_inner());
                let k = key(request);
                let n = *st.seen.get(&k).unwrap_or(&0);
                let hit = st.file.entries.iter().filter(|e| e.request == *request).nth(n).map(|e| e.response.clone());
                match hit {
                    Some(r) => {
                        st.seen.insert(k, n + 1);
                        Ok(r)
                    }
                    None => Err(AdapterError::CassetteMiss),
                }
            }
            Mode::Record { inner, path } => {
                let response = inner.complete(request)?;
                let mut st = self.state.lock().unwrap_or_else(|e| e.into_inner());
                st.file.entries.push(CassetteEntry { request: request.clone(), response: response.clone() });
                st.file.save(path)?;
                Ok(response)
            }
        }
    }
}
