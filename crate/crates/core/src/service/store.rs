use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use super::ApiError;
use crate::pipeline::Analysis;
use crate::risk::RuleSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pending,
    Complete,
    Failed,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pending => "pending",
            Status::Complete => "complete",
            Status::Failed => "failed",
        }
    }
}

/// Input format as named in request bodies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatName {
    Mocap,
    Interchange,
}

/// What is needed to recompute an analysis from scratch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub motion: String,
    pub format: Option<FormatName>,
    pub body_mass_kg: f64,
    pub scale: f64,
    pub rules: Option<RuleSet>,
}

/// Public view of an analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Handle {
    pub id: String,
    pub status: Status,
    pub created_at_ms: u64,
    pub source: String,
    pub parent: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ApiError>,
}

impl Handle {
    pub fn pending(source: &str, parent: Option<String>) -> Self {
        Self {
            id: uuid::Uuid::new_v4().to_string(),
            status: Status::Pending,
            created_at_ms: now_ms(),
            source: crate::pipeline::source_name(source),
            parent,
            frame_count: None,
            error: None,
        }
    }
}

/// A completed result and its pre-rendered report body.
#[derive(Debug)]
pub struct Completed {
    pub analysis: Analysis,
    pub report_json: String,
}

#[derive(Debug, Clone)]
pub struct Entry {
    pub handle: Handle,
    pub request: Arc<Request>,
    pub result: Option<Arc<Completed>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Persisted {
    id: String,
    created_at_ms: u64,
    source: String,
    parent: Option<String>,
    request: Request,
}

#[derive(Default)]
struct Inner {
    entries: HashMap<String, Entry>,
    order: Vec<String>,
}

/// Id to analysis map, optionally mirrored to a directory with one
/// document per analysis.
#[derive(Default)]
pub struct Store {
    inner: RwLock<Inner>,
    dir: Option<PathBuf>,
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

impl Store {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn with_dir(dir: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            inner: RwLock::default(),
            dir: Some(dir.to_path_buf()),
        })
    }

    /// Persisted documents in creation order, for replay on startup.
    pub fn saved_requests(&self) -> std::io::Result<Vec<(Handle, Request)>> {
        let Some(dir) = &self.dir else { return Ok(Vec::new()) };
        let mut docs = Vec::new();
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            match serde_json::from_str::<Persisted>(&std::fs::read_to_string(&path)?) {
                Ok(p) => docs.push(p),
                Err(e) => log::warn!("skipping {}: {e}", path.display()),
            }
        }
        docs.sort_by(|a, b| (a.created_at_ms, &a.id).cmp(&(b.created_at_ms, &b.id)));
        Ok(docs
            .into_iter()
            .map(|p| {
                let handle = Handle {
                    id: p.id,
                    status: Status::Pending,
                    created_at_ms: p.created_at_ms,
                    source: p.source,
                    parent: p.parent,
                    frame_count: None,
                    error: None,
                };
                (handle, p.request)
            })
            .collect())
    }

    fn persist(&self, handle: &Handle, request: &Request) {
        let Some(dir) = &self.dir else { return };
        let doc = Persisted {
            id: handle.id.clone(),
            created_at_ms: handle.created_at_ms,
            source: handle.source.clone(),
            parent: handle.parent.clone(),
            request: request.clone(),
        };
        let body = serde_json::to_string(&doc).expect("persisted document serializes");
        if let Err(e) = crate::report::write_atomic(&dir.join(format!("{}.json", handle.id)), &body) {
            log::warn!("could not persist analysis {}: {e}", handle.id);
        }
    }

    pub fn insert(&self, handle: Handle, request: Request, persist: bool) {
        if persist {
            self.persist(&handle, &request);
        }
        let mut inner = self.inner.write();
        inner.order.push(handle.id.clone());
        inner.entries.insert(
            handle.id.clone(),
            Entry {
                handle,
                request: Arc::new(request),
                result: None,
            },
        );
    }

    /// Publish the outcome of a pending analysis. Later calls are ignored.
    pub fn finish(&self, id: &str, outcome: Result<Completed, ApiError>) {
        let mut inner = self.inner.write();
        let Some(entry) = inner.entries.get_mut(id) else { return };
        if entry.handle.status != Status::Pending {
            return;
        }
        match outcome {
            Ok(done) => {
                entry.handle.status = Status::Complete;
                entry.handle.frame_count = Some(done.analysis.motion.sequence.len());
                entry.result = Some(Arc::new(done));
            }
            Err(e) => {
                entry.handle.status = Status::Failed;
                entry.handle.error = Some(e);
            }
        }
    }

    pub fn get(&self, id: &str) -> Option<Entry> {
        self.inner.read().entries.get(id).cloned()
    }

    pub fn list(&self) -> Vec<Handle> {
        let inner = self.inner.read();
        inner.order.iter().map(|id| inner.entries[id].handle.clone()).collect()
    }
}
