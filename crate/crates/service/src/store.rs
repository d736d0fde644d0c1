//! File-backed session storage.
//!
//! Each session lives in `<id>.session.json`; finalized results in
//! `<id>.results.json`. Mutations of one session are serialized by a writer
//! lock and published as a new snapshot, so readers never block on a writer
//! and always see a complete state.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};

use crate::session::{ElicitationSession, ServiceError};

const SESSION_SUFFIX: &str = ".session.json";
const RESULTS_SUFFIX: &str = ".results.json";

struct Slot {
    writer: Mutex<()>,
    current: RwLock<Arc<ElicitationSession>>,
    results: RwLock<Option<Arc<String>>>,
}

pub struct Store {
    dir: PathBuf,
    slots: RwLock<HashMap<String, Arc<Slot>>>,
}

fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(tmp, path)
}

fn internal(e: impl std::fmt::Display) -> ServiceError {
    ServiceError::Internal(e.to_string())
}

impl Store {
    /// Opens `dir`, creating it if needed, and loads every stored session.
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let mut slots = HashMap::new();
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
                continue;
            };
            let Some(id) = name.strip_suffix(SESSION_SUFFIX) else {
                continue;
            };
            let session: ElicitationSession = serde_json::from_str(&fs::read_to_string(&path)?)
                .map_err(|e| {
                    io::Error::new(
                        io::ErrorKind::InvalidData,
                        format!("{}: {e}", path.display()),
                    )
                })?;
            let results_path = dir.join(format!("{id}{RESULTS_SUFFIX}"));
            let results = match fs::read_to_string(&results_path) {
                Ok(s) => Some(Arc::new(s)),
                Err(e) if e.kind() == io::ErrorKind::NotFound => None,
                Err(e) => return Err(e),
            };
            slots.insert(
                id.to_string(),
                Arc::new(Slot {
                    writer: Mutex::new(()),
                    current: RwLock::new(Arc::new(session)),
                    results: RwLock::new(results),
                }),
            );
        }
        log::info!("loaded {} session(s) from {}", slots.len(), dir.display());
        Ok(Self {
            dir,
            slots: RwLock::new(slots),
        })
    }

    pub fn session_path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}{SESSION_SUFFIX}"))
    }

    pub fn results_path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}{RESULTS_SUFFIX}"))
    }

    fn persist(&self, session: &ElicitationSession) -> Result<(), ServiceError> {
        let json = serde_json::to_vec_pretty(session).map_err(internal)?;
        write_atomic(&self.session_path(&session.session_id), &json).map_err(internal)
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>, ServiceError> {
        self.slots
            .read()
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(format!("no session '{id}'")))
    }

    pub fn insert(
        &self,
        session: ElicitationSession,
    ) -> Result<Arc<ElicitationSession>, ServiceError> {
        self.persist(&session)?;
        let id = session.session_id.clone();
        let session = Arc::new(session);
        self.slots.write().insert(
            id,
            Arc::new(Slot {
                writer: Mutex::new(()),
                current: RwLock::new(session.clone()),
                results: RwLock::new(None),
            }),
        );
        Ok(session)
    }

    pub fn get(&self, id: &str) -> Result<Arc<ElicitationSession>, ServiceError> {
        Ok(self.slot(id)?.current.read().clone())
    }

    pub fn results(&self, id: &str) -> Result<Option<Arc<String>>, ServiceError> {
        Ok(self.slot(id)?.results.read().clone())
    }

    /// Applies `f` to a copy of the session under the session's writer lock,
    /// persists the copy, then publishes it. Nothing changes if `f` fails.
    pub fn update<R>(
        &self,
        id: &str,
        f: impl FnOnce(&mut ElicitationSession) -> Result<R, ServiceError>,
    ) -> Result<(R, Arc<ElicitationSession>), ServiceError> {
        let slot = self.slot(id)?;
        let _writer = slot.writer.lock();
        let mut next = (**slot.current.read()).clone();
        let out = f(&mut next)?;
        self.persist(&next)?;
        let next = Arc::new(next);
        *slot.current.write() = next.clone();
        Ok((out, next))
    }

    /// Like [`Store::update`] for finalization: the results document is
    /// written before the finalized session is.
    pub fn finalize(
        &self,
        id: &str,
        f: impl FnOnce(&mut ElicitationSession) -> Result<String, ServiceError>,
    ) -> Result<Arc<String>, ServiceError> {
        let slot = self.slot(id)?;
        let _writer = slot.writer.lock();
        let mut next = (**slot.current.read()).clone();
        let results = Arc::new(f(&mut next)?);
        write_atomic(&self.results_path(id), results.as_bytes()).map_err(internal)?;
        self.persist(&next)?;
        *slot.results.write() = Some(results.clone());
        *slot.current.write() = Arc::new(next);
        Ok(results)
    }
}
