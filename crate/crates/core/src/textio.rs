//! Plain-text columnar format: `#`-prefixed `key=value` header lines followed by
//! one value per line.
//!
//! ```text
//! # label=q_hat
//! # n=40
//! # provenance=inline
//! 2
//! 86
//! ```
//!
//! Values are written in their shortest round-trip form. Header keys other than
//! `label`, `n` and `provenance` are preserved on read. A `#` line without `=` is a
//! comment.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::{ComponentSet, Error, Result, Scalar, Series};

#[derive(Debug, Clone, PartialEq)]
pub struct Columnar<T> {
    pub label: String,
    pub provenance: Option<String>,
    /// Header entries other than `label`, `n` and `provenance`.
    pub headers: BTreeMap<String, String>,
    pub values: Vec<T>,
}

impl<T: Scalar> Columnar<T> {
    pub fn into_series(self) -> Result<Series<T>> {
        Series::new(self.values, self.label)
    }
}

pub fn write_values<T: Scalar>(label: &str, values: &[T], provenance: &str) -> String {
    write_values_with(label, values, provenance, &BTreeMap::new())
}

pub fn write_values_with<T: Scalar>(
    label: &str,
    values: &[T],
    provenance: &str,
    extra: &BTreeMap<String, String>,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# label={}", one_line(label));
    let _ = writeln!(out, "# n={}", values.len());
    let _ = writeln!(out, "# provenance={}", one_line(provenance));
    for (k, v) in extra {
        let _ = writeln!(out, "# {}={}", one_line(k), one_line(v));
    }
    for v in values {
        let _ = writeln!(out, "{v}");
    }
    out
}

pub fn write_series<T: Scalar>(series: &Series<T>, provenance: &str) -> String {
    write_values(series.label(), series.values(), provenance)
}

/// One document per component, named `component_<k>.txt` (1-based).
pub fn write_components<T: Scalar>(
    set: &ComponentSet<T>,
    provenance: &str,
) -> Vec<(String, String)> {
    set.components()
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let mut extra = BTreeMap::new();
            extra.insert(
                "indices".to_string(),
                crate::Grouping::new(vec![set.grouping().subsets()[k].clone()], None)
                    .map(|g| g.to_string())
                    .unwrap_or_default(),
            );
            (
                format!("component_{}.txt", k + 1),
                write_values_with(c.label(), c.values(), provenance, &extra),
            )
        })
        .collect()
}

pub fn read_values<T: Scalar>(text: &str) -> Result<Columnar<T>> {
    let mut label = String::new();
    let mut provenance = None;
    let mut declared_n = None;
    let mut headers = BTreeMap::new();
    let mut values = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(h) = line.strip_prefix('#') {
            if let Some((k, v)) = h.split_once('=') {
                let (k, v) = (k.trim(), v.trim());
                match k {
                    "label" => label = v.to_string(),
                    "provenance" => provenance = Some(v.to_string()),
                    "n" => {
                        declared_n = Some(v.parse::<usize>().map_err(|_| {
                            Error::Format(format!("line {}: invalid n {v:?}", lineno + 1))
                        })?)
                    }
                    _ => {
                        headers.insert(k.to_string(), v.to_string());
                    }
                }
            }
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| Error::Format(format!("line {}: not a number: {line:?}", lineno + 1)))?;
        if !v.is_finite() {
            return Err(Error::Format(format!(
                "line {}: non-finite value",
                lineno + 1
            )));
        }
        values.push(T::lit(v));
    }
    if let Some(n) = declared_n {
        if n != values.len() {
            return Err(Error::Format(format!(
                "header declares n={n} but {} values follow",
                values.len()
            )));
        }
    }
    Ok(Columnar {
        label,
        provenance,
        headers,
        values,
    })
}

pub fn read_series<T: Scalar>(text: &str) -> Result<Series<T>> {
    read_values(text)?.into_series()
}

fn one_line(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}
