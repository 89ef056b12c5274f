use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::session::Session;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("invalid session id `{0}`")]
    InvalidId(String),
    #[error("session `{0}` not found")]
    NotFound(String),
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("corrupt session file {path}: {message}")]
    Corrupt { path: PathBuf, message: String },
}

/// Session files under `{root}/sessions`.
///
/// Each session is `{id}.json`; its diagrams live in `{id}/{turn}.svg` and
/// `{id}/{turn}.json`. Files are written to a temporary sibling and renamed
/// so a crash never leaves a half-written session behind.
#[derive(Debug, Clone)]
pub struct SessionStore {
    dir: PathBuf,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

pub fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

impl SessionStore {
    pub fn open(root: impl AsRef<Path>) -> Result<Self, StoreError> {
        let dir = root.as_ref().join("sessions");
        std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        Ok(SessionStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn checked(&self, id: &str) -> Result<(), StoreError> {
        if valid_id(id) {
            Ok(())
        } else {
            Err(StoreError::InvalidId(id.to_string()))
        }
    }

    pub fn session_path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    pub fn artifact_dir(&self, id: &str) -> PathBuf {
        self.dir.join(id)
    }

    fn write_atomic(&self, path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
        let parent = path.parent().unwrap_or(&self.dir);
        std::fs::create_dir_all(parent).map_err(io_err(parent))?;
        let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(io_err(parent))?;
        tmp.write_all(bytes).map_err(io_err(path))?;
        tmp.as_file().sync_all().map_err(io_err(path))?;
        tmp.persist(path).map_err(|e| StoreError::Io { path: path.to_path_buf(), source: e.error })?;
        Ok(())
    }

    pub fn save(&self, session: &Session) -> Result<(), StoreError> {
        self.checked(&session.id)?;
        let path = self.session_path(&session.id);
        let bytes = serde_json::to_vec_pretty(session).expect("session serializes");
        self.write_atomic(&path, &bytes)
    }

    pub fn load(&self, id: &str) -> Result<Session, StoreError> {
        self.checked(id)?;
        let path = self.session_path(id);
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(StoreError::NotFound(id.into())),
            Err(e) => return Err(StoreError::Io { path, source: e }),
        };
        serde_json::from_slice(&bytes).map_err(|e| StoreError::Corrupt { path, message: e.to_string() })
    }

    pub fn exists(&self, id: &str) -> bool {
        valid_id(id) && self.session_path(id).is_file()
    }

    /// Ids of all stored sessions, sorted.
    pub fn list(&self) -> Result<Vec<String>, StoreError> {
        let mut ids = Vec::new();
        for entry in std::fs::read_dir(&self.dir).map_err(io_err(&self.dir))? {
            let path = entry.map_err(io_err(&self.dir))?.path();
            if path.extension().is_some_and(|e| e == "json") {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()).filter(|s| valid_id(s)) {
                    ids.push(stem.to_string());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }

    /// Writes the diagram artifacts of one turn and returns their file names.
    pub fn write_artifacts(&self, id: &str, turn: usize, svg: &str, json: &str) -> Result<(String, String), StoreError> {
        self.checked(id)?;
        let dir = self.artifact_dir(id);
        let (svg_name, json_name) = (format!("{turn}.svg"), format!("{turn}.json"));
        self.write_atomic(&dir.join(&svg_name), svg.as_bytes())?;
        self.write_atomic(&dir.join(&json_name), json.as_bytes())?;
        Ok((svg_name, json_name))
    }

    pub fn read_artifact(&self, id: &str, name: &str) -> Result<Vec<u8>, StoreError> {
        self.checked(id)?;
        if name.contains(['/', '\\']) || name.starts_with('.') {
            return Err(StoreError::NotFound(name.into()));
        }
        let path = self.artifact_dir(id).join(name);
        std::fs::read(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => StoreError::NotFound(name.into()),
            _ => StoreError::Io { path, source: e },
        })
    }
}
