#![allow(dead_code)]

use std::path::PathBuf;

use ssamask_core::textio::read_values;
use ssamask_service::SignalSource;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn values(name: &str) -> Vec<f64> {
    let path = fixture_dir().join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    read_values(&text).unwrap().values
}

pub fn q_hat_source() -> SignalSource {
    SignalSource::Inline {
        values: values("reference/q_hat.txt"),
        label: Some("q_hat".into()),
        parameter_labels: None,
    }
}

pub fn tiny_source() -> SignalSource {
    let dir = fixture_dir().join("microdata");
    SignalSource::Microfile {
        config: None,
        config_path: Some(dir.join("tiny.toml")),
        microfile_csv: None,
        microfile_path: Some(dir.join("tiny.csv")),
    }
}

pub const PAPER_GROUPING: &str = "1,2|3,4|5,6|7-20";
