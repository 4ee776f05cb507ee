//! JSON over HTTP.
//!
//! | method | path                         | body                    | reply         |
//! |--------|------------------------------|-------------------------|---------------|
//! | POST   | `/sessions`                  | signal source           | session (201) |
//! | GET    | `/sessions/{id}`             |                         | session       |
//! | PATCH  | `/sessions/{id}`             | `base_revision` + `op`  | session       |
//! | GET    | `/sessions/{id}/views/{view}`| query parameters        | view          |
//! | POST   | `/sessions/{id}/export`      | `what`                  | exported file |
//!
//! Errors reply with `{"code": ..., "message": ...}`.

use std::collections::HashMap;
use std::net::{Ipv4Addr, SocketAddr};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{ServiceError, ServiceResult};
use crate::session::{
    Change, ExportRequest, SignalSource, ViewRequest, DEFAULT_NOISE_FLOOR, DEFAULT_PAIR_TOLERANCE,
};
use crate::store::SessionStore;

#[derive(Debug, Deserialize)]
struct Patch {
    base_revision: u64,
    #[serde(flatten)]
    change: Change,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status =
            StatusCode::from_u16(self.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self.body())).into_response()
    }
}

type Shared = Arc<SessionStore>;

pub fn router(store: Shared) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(summary).patch(update))
        .route("/sessions/{id}/views/{view}", get(view))
        .route("/sessions/{id}/export", post(export))
        .with_state(store)
}

/// Binds `127.0.0.1:port` (0 picks a free port).
pub async fn bind(port: u16) -> std::io::Result<tokio::net::TcpListener> {
    tokio::net::TcpListener::bind(SocketAddr::from((Ipv4Addr::LOCALHOST, port))).await
}

/// Serves until Ctrl-C.
pub async fn serve(listener: tokio::net::TcpListener, store: Shared) -> std::io::Result<()> {
    axum::serve(listener, router(store))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

fn parse<T: DeserializeOwned>(body: &[u8]) -> ServiceResult<T> {
    serde_json::from_slice(body).map_err(|e| ServiceError::BadRequest(e.to_string()))
}

/// Runs store work off the async executor.
async fn blocking<T: Serialize + Send + 'static>(
    work: impl FnOnce() -> ServiceResult<T> + Send + 'static,
) -> ServiceResult<Json<T>> {
    tokio::task::spawn_blocking(work)
        .await
        .map_err(|e| ServiceError::Io(format!("worker failed: {e}")))?
        .map(Json)
}

async fn create(State(store): State<Shared>, body: Bytes) -> Response {
    let result = async {
        let source: SignalSource = parse(&body)?;
        blocking(move || store.create(source)).await
    }
    .await;
    match result {
        Ok(json) => (StatusCode::CREATED, json).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn summary(State(store): State<Shared>, Path(id): Path<String>) -> Response {
    blocking(move || store.summary(&id)).await.into_response()
}

async fn update(State(store): State<Shared>, Path(id): Path<String>, body: Bytes) -> Response {
    let result = async {
        let patch: Patch = parse(&body)?;
        blocking(move || store.update(&id, patch.base_revision, patch.change)).await
    }
    .await;
    result.into_response()
}

async fn view(
    State(store): State<Shared>,
    Path((id, view)): Path<(String, String)>,
    Query(query): Query<HashMap<String, String>>,
) -> Response {
    let result = async {
        let request = view_request(&view, &query)?;
        blocking(move || store.view(&id, &request)).await
    }
    .await;
    result.into_response()
}

async fn export(State(store): State<Shared>, Path(id): Path<String>, body: Bytes) -> Response {
    let result = async {
        let request: ExportRequest = parse(&body)?;
        blocking(move || store.export(&id, &request)).await
    }
    .await;
    result.into_response()
}

fn view_request(view: &str, query: &HashMap<String, String>) -> ServiceResult<ViewRequest> {
    fn number<T: std::str::FromStr>(
        query: &HashMap<String, String>,
        key: &str,
    ) -> ServiceResult<Option<T>> {
        query
            .get(key)
            .map(|v| {
                v.parse().map_err(|_| {
                    ServiceError::BadRequest(format!("query parameter {key}={v:?} is not a number"))
                })
            })
            .transpose()
    }
    Ok(match view {
        "spectrum" => ViewRequest::Spectrum,
        "eigenvector" => ViewRequest::Eigenvector(
            number(query, "index")?
                .ok_or_else(|| ServiceError::BadRequest("eigenvector view needs ?index=".into()))?,
        ),
        "components" => ViewRequest::Components,
        "advisory" => ViewRequest::Advisory {
            pair_tolerance: number(query, "pair_tolerance")?.unwrap_or(DEFAULT_PAIR_TOLERANCE),
            noise_floor: number(query, "noise_floor")?.unwrap_or(DEFAULT_NOISE_FLOOR),
        },
        "preview" => ViewRequest::Preview,
        other => return Err(ServiceError::UnknownView(other.to_string())),
    })
}
