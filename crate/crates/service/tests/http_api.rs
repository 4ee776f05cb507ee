//! Request/response pairs locked against `tests/golden/*.json`.
//!
//! Run with `UPDATE_GOLDEN=1` to rewrite the files after an intended schema change.

mod common;

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use ssamask_service::http::router;
use ssamask_service::SessionStore;
use tower::ServiceExt;

use common::values;

async fn call(app: &axum::Router, method: Method, uri: &str, body: Option<Value>) -> (u16, Value) {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(match body {
            Some(v) => Body::from(v.to_string()),
            None => Body::empty(),
        })
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status().as_u16();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes)
        .unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()));
    (status, value)
}

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{name}.json"))
}

/// Same shape and strings; numbers within 1e-9 relative.
fn same(a: &Value, b: &Value, path: &str) -> Result<(), String> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            if (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0) {
                Ok(())
            } else {
                Err(format!("{path}: {x} != {y}"))
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                return Err(format!("{path}: length {} != {}", x.len(), y.len()));
            }
            x.iter()
                .zip(y)
                .enumerate()
                .try_for_each(|(i, (p, q))| same(p, q, &format!("{path}[{i}]")))
        }
        (Value::Object(x), Value::Object(y)) => {
            let keys_x: Vec<_> = x.keys().collect();
            let keys_y: Vec<_> = y.keys().collect();
            if keys_x != keys_y {
                return Err(format!("{path}: keys {keys_x:?} != {keys_y:?}"));
            }
            x.iter()
                .try_for_each(|(k, v)| same(v, &y[k], &format!("{path}.{k}")))
        }
        _ if a == b => Ok(()),
        _ => Err(format!("{path}: {a} != {b}")),
    }
}

fn check_golden(name: &str, status: u16, body: &Value) {
    let actual = json!({ "status": status, "body": body });
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, serde_json::to_string_pretty(&actual).unwrap() + "\n").unwrap();
        return;
    }
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| {
        panic!(
            "{}: {e} (run with UPDATE_GOLDEN=1 to create)",
            path.display()
        )
    });
    let expected: Value = serde_json::from_str(&text).unwrap();
    if let Err(diff) = same(&actual, &expected, name) {
        panic!("golden mismatch: {diff}");
    }
}

fn app() -> axum::Router {
    router(Arc::new(SessionStore::new()))
}

#[tokio::test]
async fn paper_workflow() {
    let app = app();
    let q_hat = values("reference/q_hat.txt");
    let trend = values("reference/q_hat_trend_replacement.txt");

    let steps: Vec<(&str, Method, &str, Option<Value>)> = vec![
        (
            "create_session",
            Method::POST,
            "/sessions",
            Some(json!({"kind": "inline", "values": q_hat, "label": "q_hat"})),
        ),
        (
            "spectrum_before_window",
            Method::GET,
            "/sessions/s1/views/spectrum",
            None,
        ),
        (
            "set_window",
            Method::PATCH,
            "/sessions/s1",
            Some(json!({"base_revision": 1, "op": "set_window", "window_length": 20})),
        ),
        ("spectrum", Method::GET, "/sessions/s1/views/spectrum", None),
        (
            "eigenvector_3",
            Method::GET,
            "/sessions/s1/views/eigenvector?index=3",
            None,
        ),
        (
            "advisory",
            Method::GET,
            "/sessions/s1/views/advisory?pair_tolerance=0.1",
            None,
        ),
        (
            "components_before_grouping",
            Method::GET,
            "/sessions/s1/views/components",
            None,
        ),
        (
            "overlapping_grouping",
            Method::PATCH,
            "/sessions/s1",
            Some(json!({"base_revision": 2, "op": "set_grouping", "subsets": [[1, 2], [2, 3]]})),
        ),
        (
            "set_grouping",
            Method::PATCH,
            "/sessions/s1",
            Some(
                json!({"base_revision": 2, "op": "set_grouping", "subsets": "1,2|3,4|5,6|7-20", "trend_subset": 1}),
            ),
        ),
        (
            "components",
            Method::GET,
            "/sessions/s1/views/components",
            None,
        ),
        (
            "export_before_preview",
            Method::POST,
            "/sessions/s1/export",
            Some(json!({"what": "masked_signal"})),
        ),
        (
            "stale_revision",
            Method::PATCH,
            "/sessions/s1",
            Some(
                json!({"base_revision": 2, "op": "set_trend", "trend": {"mode": "scale", "factor": 1.0}}),
            ),
        ),
        (
            "set_trend",
            Method::PATCH,
            "/sessions/s1",
            Some(
                json!({"base_revision": 3, "op": "set_trend", "trend": {"mode": "explicit", "values": trend}}),
            ),
        ),
        ("preview", Method::GET, "/sessions/s1/views/preview", None),
        (
            "export_masked_signal",
            Method::POST,
            "/sessions/s1/export",
            Some(json!({"what": "masked_signal"})),
        ),
        (
            "export_report",
            Method::POST,
            "/sessions/s1/export",
            Some(json!({"what": "report"})),
        ),
        (
            "export_microfile_without_backing",
            Method::POST,
            "/sessions/s1/export",
            Some(json!({"what": "modified_microfile", "seed": 1})),
        ),
        ("session_summary", Method::GET, "/sessions/s1", None),
    ];
    for (name, method, uri, body) in steps {
        let (status, reply) = call(&app, method, uri, body).await;
        check_golden(name, status, &reply);
    }

    let (_, masked) = call(
        &app,
        Method::POST,
        "/sessions/s1/export",
        Some(json!({"what": "masked_signal"})),
    )
    .await;
    let text = masked["content"].as_str().unwrap();
    let back = ssamask_core::textio::read_values::<f64>(text)
        .unwrap()
        .values;
    assert_eq!(back, values("reference/q_tilde.txt"));
}

#[tokio::test]
async fn request_errors() {
    let app = app();
    let steps: Vec<(&str, Method, &str, Option<Value>)> = vec![
        (
            "short_signal",
            Method::POST,
            "/sessions",
            Some(json!({"kind": "inline", "values": [1, 2]})),
        ),
        (
            "malformed_body",
            Method::POST,
            "/sessions",
            Some(json!({"kind": "telepathy"})),
        ),
        (
            "unknown_session",
            Method::GET,
            "/sessions/s9/views/spectrum",
            None,
        ),
        (
            "unknown_view",
            Method::GET,
            "/sessions/s9/views/histogram",
            None,
        ),
    ];
    for (name, method, uri, body) in steps {
        let (status, reply) = call(&app, method, uri, body).await;
        check_golden(name, status, &reply);
    }
    let (status, reply) = call(
        &app,
        Method::POST,
        "/sessions",
        Some(json!({"kind": "inline", "values": [3, 1, 2]})),
    )
    .await;
    assert_eq!(status, 201);
    let (status, reply) = call(
        &app,
        Method::GET,
        &format!(
            "/sessions/{}/views/eigenvector",
            reply["id"].as_str().unwrap()
        ),
        None,
    )
    .await;
    assert_eq!((status, reply["code"].as_str()), (400, Some("bad_request")));
}

#[tokio::test]
async fn microfile_session_over_http() {
    let app = app();
    let dir = common::fixture_dir().join("microdata");
    let config = std::fs::read_to_string(dir.join("tiny.toml")).unwrap();
    let csv = std::fs::read_to_string(dir.join("tiny.csv")).unwrap();
    let steps: Vec<(&str, Method, &str, Option<Value>)> = vec![
        (
            "microfile_create",
            Method::POST,
            "/sessions",
            Some(json!({"kind": "microfile", "config": config, "microfile_csv": csv})),
        ),
        (
            "microfile_set_window",
            Method::PATCH,
            "/sessions/s1",
            Some(json!({"base_revision": 1, "op": "set_window"})),
        ),
        (
            "microfile_set_grouping",
            Method::PATCH,
            "/sessions/s1",
            Some(json!({"base_revision": 2, "op": "set_grouping", "subsets": [[1], [2]]})),
        ),
        (
            "microfile_set_trend",
            Method::PATCH,
            "/sessions/s1",
            Some(
                json!({"base_revision": 3, "op": "set_trend", "trend": {"mode": "scale", "factor": 2.0}}),
            ),
        ),
        (
            "microfile_preview",
            Method::GET,
            "/sessions/s1/views/preview",
            None,
        ),
        (
            "microfile_export",
            Method::POST,
            "/sessions/s1/export",
            Some(json!({"what": "modified_microfile", "donor_policy": "forbid"})),
        ),
    ];
    for (name, method, uri, body) in steps {
        let (status, reply) = call(&app, method, uri, body).await;
        check_golden(name, status, &reply);
    }
}
