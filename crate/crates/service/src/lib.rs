//! Analyst sessions over the ssamask core.
//!
//! A session walks `loaded → decomposed → grouped → previewed → exported`; changing
//! the window sends it back to `decomposed`, changing the grouping or trend back
//! to `grouped`. Every change carries the revision it was based on and fails with
//! `stale_revision` if another change landed first.

mod error;
pub mod http;
pub mod report;
pub mod session;
mod store;

pub use error::{ErrorBody, ServiceError, ServiceResult};
pub use session::{
    Change, ExportRequest, Exported, Session, SessionView, SignalSource, Stage, View, ViewRequest,
};
pub use store::SessionStore;
