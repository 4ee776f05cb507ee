use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

/// Minimum admissible series length.
pub const MIN_SERIES_LEN: usize = 3;

/// A finite real-valued sequence with a free-text label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Series<T> {
    values: Vec<T>,
    label: String,
}

impl<T: Scalar> Series<T> {
    /// Validates length (N ≥ 3) and finiteness.
    pub fn new(values: Vec<T>, label: impl Into<String>) -> Result<Self> {
        if values.len() < MIN_SERIES_LEN {
            return Err(Error::param(format!(
                "series needs at least {MIN_SERIES_LEN} values, got {}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(format!(
                "series value at position {} is not finite",
                pos + 1
            )));
        }
        Ok(Self {
            values,
            label: label.into(),
        })
    }

    pub fn from_f64(values: &[f64], label: impl Into<String>) -> Result<Self> {
        Self::new(values.iter().map(|&v| T::lit(v)).collect(), label)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }
}
