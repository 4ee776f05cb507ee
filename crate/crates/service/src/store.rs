use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, PoisonError, RwLock, RwLockReadGuard, RwLockWriteGuard};

use crate::error::{ServiceError, ServiceResult};
use crate::session::{
    Change, ExportRequest, Exported, Session, SessionView, SignalSource, View, ViewRequest,
};

/// In-memory sessions. Each session has its own lock: writers to one session are
/// serialized, readers share it, and different sessions never contend.
#[derive(Debug, Default)]
pub struct SessionStore {
    sessions: RwLock<HashMap<String, Arc<RwLock<Session>>>>,
    next_id: AtomicU64,
}

// A panic while holding a lock leaves the session as it was before the failed
// call, since every mutation validates before assigning.
fn read<T>(lock: &RwLock<T>) -> RwLockReadGuard<'_, T> {
    lock.read().unwrap_or_else(PoisonError::into_inner)
}

fn write<T>(lock: &RwLock<T>) -> RwLockWriteGuard<'_, T> {
    lock.write().unwrap_or_else(PoisonError::into_inner)
}

impl SessionStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn create(&self, source: SignalSource) -> ServiceResult<SessionView> {
        let n = self.next_id.fetch_add(1, Ordering::Relaxed) + 1;
        let session = Session::create(format!("s{n}"), source)?;
        let view = session.summary();
        write(&self.sessions).insert(view.id.clone(), Arc::new(RwLock::new(session)));
        Ok(view)
    }

    fn session(&self, id: &str) -> ServiceResult<Arc<RwLock<Session>>> {
        read(&self.sessions)
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    pub fn summary(&self, id: &str) -> ServiceResult<SessionView> {
        let session = self.session(id)?;
        let view = read(&session).summary();
        Ok(view)
    }

    pub fn update(
        &self,
        id: &str,
        base_revision: u64,
        change: Change,
    ) -> ServiceResult<SessionView> {
        let session = self.session(id)?;
        let mut guard = write(&session);
        guard.apply(base_revision, change)?;
        Ok(guard.summary())
    }

    pub fn view(&self, id: &str, request: &ViewRequest) -> ServiceResult<View> {
        let session = self.session(id)?;
        {
            let guard = read(&session);
            if guard.can_view_readonly(request) {
                return guard.view(request);
            }
        }
        let mut guard = write(&session);
        guard.ensure_preview()?;
        guard.view(request)
    }

    pub fn export(&self, id: &str, request: &ExportRequest) -> ServiceResult<Exported> {
        let session = self.session(id)?;
        let mut guard = write(&session);
        guard.export(request)
    }

    pub fn len(&self) -> usize {
        read(&self.sessions).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
