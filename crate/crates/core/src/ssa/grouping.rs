use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::decompose::SpectralDecomposition;
use super::hankel::average_antidiagonals;
use crate::{Error, Result, Scalar, Series};

/// Disjoint subsets of 1-based eigentriple indices, optionally marking one subset
/// (by 0-based position) as the trend.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grouping {
    subsets: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trend_subset: Option<usize>,
}

impl Grouping {
    /// Checks shape only (non-empty subsets, indices ≥ 1, disjointness). Rank bounds
    /// are checked by [`Grouping::validate`].
    pub fn new(subsets: Vec<Vec<usize>>, trend_subset: Option<usize>) -> Result<Self> {
        if subsets.is_empty() {
            return Err(Error::grouping("grouping has no subsets", vec![]));
        }
        if let Some(pos) = subsets.iter().position(Vec::is_empty) {
            return Err(Error::grouping(
                format!("subset {} is empty", pos + 1),
                vec![],
            ));
        }
        if let Some(t) = trend_subset {
            if t >= subsets.len() {
                return Err(Error::grouping(
                    format!(
                        "trend subset {} does not exist ({} subsets)",
                        t + 1,
                        subsets.len()
                    ),
                    vec![],
                ));
            }
        }
        let zero: Vec<usize> = subsets
            .iter()
            .flatten()
            .copied()
            .filter(|&i| i == 0)
            .collect();
        if !zero.is_empty() {
            return Err(Error::grouping("eigentriple indices are 1-based", zero));
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut dups = std::collections::BTreeSet::new();
        for &i in subsets.iter().flatten() {
            if !seen.insert(i) {
                dups.insert(i);
            }
        }
        if !dups.is_empty() {
            let dups: Vec<usize> = dups.into_iter().collect();
            return Err(Error::grouping(
                format!("subsets are not disjoint; repeated indices {dups:?}"),
                dups,
            ));
        }
        Ok(Self {
            subsets,
            trend_subset,
        })
    }

    /// One subset `{1..=d}`.
    pub fn full(rank: usize) -> Result<Self> {
        Self::new(vec![(1..=rank).collect()], None)
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn trend_subset(&self) -> Option<usize> {
        self.trend_subset
    }

    pub fn with_trend(mut self, trend_subset: Option<usize>) -> Result<Self> {
        self.trend_subset = trend_subset;
        Self::new(self.subsets, self.trend_subset)
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    /// True when the subsets together are exactly `{1..=rank}`.
    pub fn covers(&self, rank: usize) -> bool {
        let total: usize = self.subsets.iter().map(Vec::len).sum();
        total == rank && self.subsets.iter().flatten().all(|&i| i <= rank)
    }

    /// Every index must lie in `[1, rank]`.
    pub fn validate(&self, rank: usize) -> Result<()> {
        let bad: Vec<usize> = self
            .subsets
            .iter()
            .flatten()
            .copied()
            .filter(|&i| i > rank)
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::grouping(
                format!("indices {bad:?} exceed the effective rank d = {rank}"),
                bad,
            ))
        }
    }
}

/// `"1,2|3,4|5,6|7-20"`: `|` separates subsets, `,` separates items, `a-b` is inclusive.
impl FromStr for Grouping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::grouping(msg, vec![]);
        let mut subsets = Vec::new();
        for part in s.split('|') {
            let mut subset = Vec::new();
            for item in part.split(',').map(str::trim) {
                if item.is_empty() {
                    return Err(bad(format!("empty item in grouping {s:?}")));
                }
                let parse = |t: &str| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| bad(format!("invalid index {t:?} in grouping {s:?}")))
                };
                match item.split_once('-') {
                    Some((a, b)) => {
                        let (a, b) = (parse(a)?, parse(b)?);
                        if a > b {
                            return Err(bad(format!("descending range {item:?}")));
                        }
                        subset.extend(a..=b);
                    }
                    None => subset.push(parse(item)?),
                }
            }
            subsets.push(subset);
        }
        Self::new(subsets, None)
    }
}

impl fmt::Display for Grouping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, subset) in self.subsets.iter().enumerate() {
            if n > 0 {
                f.write_str("|")?;
            }
            let mut i = 0;
            let mut first = true;
            while i < subset.len() {
                let mut j = i;
                while j + 1 < subset.len() && subset[j + 1] == subset[j] + 1 {
                    j += 1;
                }
                if !first {
                    f.write_str(",")?;
                }
                first = false;
                if j >= i + 2 {
                    write!(f, "{}-{}", subset[i], subset[j])?;
                } else {
                    for (m, v) in subset[i..=j].iter().enumerate() {
                        if m > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{v}")?;
                    }
                }
                i = j + 1;
            }
        }
        Ok(())
    }
}

/// Reconstructed series, one per grouping subset, in subset order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ComponentSet<T> {
    components: Vec<Series<T>>,
    labels: Vec<String>,
    grouping: Grouping,
}

impl<T: Scalar> ComponentSet<T> {
    pub fn components(&self) -> &[Series<T>] {
        &self.components
    }

    pub fn component(&self, position: usize) -> Option<&Series<T>> {
        self.components.get(position)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn grouping(&self) -> &Grouping {
        &self.grouping
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// The trend component, when the grouping designates one.
    pub fn trend(&self) -> Option<&Series<T>> {
        self.grouping.trend_subset.map(|t| &self.components[t])
    }

    /// Replaces the free-text tags. Length must match the component count.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.components.len() {
            return Err(Error::param(format!(
                "{} labels for {} components",
                labels.len(),
                self.components.len()
            )));
        }
        self.components = self
            .components
            .into_iter()
            .zip(&labels)
            .map(|(c, l)| c.with_label(l.clone()))
            .collect();
        self.labels = labels;
        Ok(self)
    }

    /// Element-wise sum of all components.
    pub fn sum(&self) -> Vec<T> {
        let n = self.components.first().map_or(0, Series::len);
        (0..n)
            .map(|i| self.components.iter().map(|c| c.values()[i]).sum())
            .collect()
    }
}

/// Diagonal-averages `X_I = Σ_{i∈I} Xᵢ` for each subset `I`.
pub fn reconstruct<T: Scalar>(
    decomposition: &SpectralDecomposition<T>,
    grouping: &Grouping,
) -> Result<ComponentSet<T>> {
    grouping.validate(decomposition.rank())?;
    let (l, k) = (decomposition.window_length(), decomposition.lag_count());
    let mut components = Vec::with_capacity(grouping.len());
    let mut labels = Vec::with_capacity(grouping.len());
    for (pos, subset) in grouping.subsets().iter().enumerate() {
        let label = if grouping.trend_subset() == Some(pos) {
            "trend".to_string()
        } else {
            format!("component {}", pos + 1)
        };
        let values = average_antidiagonals(decomposition.antidiagonal_sums(subset), l, k);
        components.push(Series::new(values, label.clone())?);
        labels.push(label);
    }
    Ok(ComponentSet {
        components,
        labels,
        grouping: grouping.clone(),
    })
}
