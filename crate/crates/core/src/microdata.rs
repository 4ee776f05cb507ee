//! Microfiles, group definitions, quantity signals and the inverse mapping that
//! writes a modified signal back into a microfile.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::Read;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar, Series};

/// Expected layout of a delimiter-separated microfile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MicrofileConfig {
    /// Every column of the header, identifiers included.
    pub columns: Vec<String>,
    /// Columns dropped at ingestion.
    #[serde(default)]
    pub identifiers: Vec<String>,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
}

fn default_delimiter() -> char {
    ','
}

impl MicrofileConfig {
    pub fn new(columns: &[&str], identifiers: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            identifiers: identifiers.iter().map(|s| s.to_string()).collect(),
            delimiter: ',',
        }
    }

    fn delimiter_byte(&self) -> Result<u8> {
        u8::try_from(self.delimiter)
            .ok()
            .filter(u8::is_ascii)
            .ok_or_else(|| Error::Config(format!("delimiter {:?} is not ASCII", self.delimiter)))
    }
}

/// Depersonalized row-per-respondent table. Values are kept as text codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Microfile {
    schema: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Microfile {
    /// Every row must have one value per schema attribute.
    pub fn new(schema: Vec<String>, rows: Vec<Vec<String>>) -> Result<Self> {
        if let Some(pos) = rows.iter().position(|r| r.len() != schema.len()) {
            return Err(Error::Ingestion {
                line: pos + 2,
                message: format!(
                    "row has {} values, schema has {}",
                    rows[pos].len(),
                    schema.len()
                ),
            });
        }
        Ok(Self { schema, rows })
    }

    pub fn schema(&self) -> &[String] {
        &self.schema
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|a| a == name)
    }

    /// Distinct values of one attribute.
    pub fn domain(&self, attribute: &str) -> Option<BTreeSet<&str>> {
        let idx = self.attribute_index(attribute)?;
        Some(self.rows.iter().map(|r| r[idx].as_str()).collect())
    }

    /// Serializes with a header row.
    pub fn to_delimited(&self, delimiter: char) -> Result<String> {
        let delim = u8::try_from(delimiter)
            .ok()
            .filter(u8::is_ascii)
            .ok_or_else(|| Error::Config(format!("delimiter {delimiter:?} is not ASCII")))?;
        let mut w = csv::WriterBuilder::new()
            .delimiter(delim)
            .from_writer(Vec::new());
        let io = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(&self.schema).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Parses a delimiter-separated microfile with a header row and drops identifier columns.
pub fn load_microfile(source: impl Read, config: &MicrofileConfig) -> Result<Microfile> {
    let header_err = |message: String| Error::Ingestion { line: 1, message };
    for id in &config.identifiers {
        if !config.columns.contains(id) {
            return Err(Error::Config(format!(
                "identifier {id:?} is not among the configured columns"
            )));
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(config.delimiter_byte()?)
        .has_headers(true)
        .flexible(true)
        .from_reader(source);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| header_err(e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    if let Some(unknown) = header.iter().find(|h| !config.columns.contains(h)) {
        return Err(header_err(format!("unknown column {unknown:?}")));
    }
    if let Some(missing) = config.columns.iter().find(|c| !header.contains(c)) {
        let kind = if config.identifiers.contains(missing) {
            "identifier column"
        } else {
            "column"
        };
        return Err(header_err(format!(
            "{kind} {missing:?} missing from header"
        )));
    }

    let keep: Vec<usize> = header
        .iter()
        .enumerate()
        .filter(|(_, h)| !config.identifiers.contains(h))
        .map(|(i, _)| i)
        .collect();
    let schema = keep.iter().map(|&i| header[i].clone()).collect();

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Ingestion {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != header.len() {
            return Err(Error::Ingestion {
                line,
                message: format!("expected {} values, found {}", header.len(), record.len()),
            });
        }
        rows.push(keep.iter().map(|&i| record[i].trim().to_string()).collect());
    }
    Microfile::new(schema, rows)
}

/// Vital attributes with the value tuples to protect, plus one ordered parameter attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupDefinition {
    vital_attributes: Vec<String>,
    vital_combinations: Vec<Vec<String>>,
    parameter_attribute: String,
    parameter_values: Vec<String>,
}

impl GroupDefinition {
    pub fn new(
        vital_attributes: Vec<String>,
        vital_combinations: Vec<Vec<String>>,
        parameter_attribute: String,
        parameter_values: Vec<String>,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::Definition(m));
        if vital_attributes.is_empty() {
            return bad("at least one vital attribute is required".into());
        }
        if vital_attributes.contains(&parameter_attribute) {
            return bad(format!(
                "parameter attribute {parameter_attribute:?} is also a vital attribute"
            ));
        }
        if parameter_values.is_empty() {
            return bad("parameter values are empty".into());
        }
        let mut seen = HashSet::new();
        if let Some(dup) = parameter_values.iter().find(|v| !seen.insert(*v)) {
            return bad(format!("duplicate parameter value {dup:?}"));
        }
        if let Some(c) = vital_combinations
            .iter()
            .find(|c| c.len() != vital_attributes.len())
        {
            return bad(format!(
                "vital combination {c:?} has {} values for {} vital attributes",
                c.len(),
                vital_attributes.len()
            ));
        }
        let mut seen = HashSet::new();
        let vital_combinations = vital_combinations
            .into_iter()
            .filter(|c| seen.insert(c.clone()))
            .collect();
        Ok(Self {
            vital_attributes,
            vital_combinations,
            parameter_attribute,
            parameter_values,
        })
    }

    pub fn vital_attributes(&self) -> &[String] {
        &self.vital_attributes
    }

    pub fn vital_combinations(&self) -> &[Vec<String>] {
        &self.vital_combinations
    }

    pub fn parameter_attribute(&self) -> &str {
        &self.parameter_attribute
    }

    pub fn parameter_values(&self) -> &[String] {
        &self.parameter_values
    }
}

/// Per-parameter-value member counts of one group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantitySignal {
    counts: Vec<u64>,
    parameter_labels: Vec<String>,
    label: String,
}

impl QuantitySignal {
    pub fn new(
        counts: Vec<u64>,
        parameter_labels: Vec<String>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if counts.len() != parameter_labels.len() {
            return Err(Error::param(format!(
                "{} counts but {} parameter labels",
                counts.len(),
                parameter_labels.len()
            )));
        }
        Ok(Self {
            counts,
            parameter_labels,
            label: label.into(),
        })
    }

    /// Labels are the 1-based positions.
    pub fn from_counts(counts: Vec<u64>, label: impl Into<String>) -> Self {
        let parameter_labels = (1..=counts.len()).map(|i| i.to_string()).collect();
        Self {
            counts,
            parameter_labels,
            label: label.into(),
        }
    }

    /// Accepts only finite non-negative integral values.
    pub fn from_values<T: Scalar>(values: &[T], label: impl Into<String>) -> Result<Self> {
        let counts = values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if v.is_finite() && *v >= T::zero() && v.fract() == T::zero() {
                    v.to_u64()
                        .ok_or_else(|| Error::param(format!("value at {} too large", i + 1)))
                } else {
                    Err(Error::param(format!(
                        "quantity signal value at position {} is not a non-negative integer: {v}",
                        i + 1
                    )))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_counts(counts, label))
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn parameter_labels(&self) -> &[String] {
        &self.parameter_labels
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn to_series<T: Scalar>(&self) -> Result<Series<T>> {
        Series::new(
            self.counts
                .iter()
                .map(|&c| T::from_u64(c).expect("count fits"))
                .collect(),
            self.label.clone(),
        )
    }

    pub fn with_counts(&self, counts: Vec<u64>) -> Result<Self> {
        Self::new(counts, self.parameter_labels.clone(), self.label.clone())
    }
}

struct GroupIndex<'a> {
    vital: Vec<usize>,
    parameter: usize,
    combinations: HashSet<Vec<&'a str>>,
    buckets: HashMap<&'a str, usize>,
}

impl<'a> GroupIndex<'a> {
    fn resolve(microfile: &Microfile, group: &'a GroupDefinition) -> Result<Self> {
        let find = |name: &str| {
            microfile
                .attribute_index(name)
                .ok_or_else(|| Error::Definition(format!("unknown attribute {name:?}")))
        };
        Ok(Self {
            vital: group
                .vital_attributes
                .iter()
                .map(|a| find(a))
                .collect::<Result<_>>()?,
            parameter: find(&group.parameter_attribute)?,
            combinations: group
                .vital_combinations
                .iter()
                .map(|c| c.iter().map(String::as_str).collect())
                .collect(),
            buckets: group
                .parameter_values
                .iter()
                .enumerate()
                .map(|(k, v)| (v.as_str(), k))
                .collect(),
        })
    }

    fn is_member(&self, row: &[String]) -> bool {
        let key: Vec<&str> = self.vital.iter().map(|&i| row[i].as_str()).collect();
        self.combinations.contains(&key)
    }

    /// Bucket of a group member, `None` for non-members and out-of-range parameters.
    fn bucket(&self, row: &[String]) -> Option<usize> {
        if self.is_member(row) {
            self.buckets.get(row[self.parameter].as_str()).copied()
        } else {
            None
        }
    }
}

/// Counts group members per parameter value, in the group's parameter order.
pub fn build_quantity_signal(
    microfile: &Microfile,
    group: &GroupDefinition,
) -> Result<QuantitySignal> {
    let index = GroupIndex::resolve(microfile, group)?;
    let mut counts = vec![0u64; group.parameter_values.len()];
    for row in &microfile.rows {
        if let Some(k) = index.bucket(row) {
            counts[k] += 1;
        }
    }
    QuantitySignal::new(
        counts,
        group.parameter_values.clone(),
        format!(
            "{} by {}",
            group.vital_attributes.join("+"),
            group.parameter_attribute
        ),
    )
}

/// How to grow a bucket that has no member rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DonorPolicy {
    #[default]
    Forbid,
    /// Copy member rows from the closest non-empty bucket, rewriting the parameter value.
    NearestParameter,
}

impl std::str::FromStr for DonorPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forbid" => Ok(Self::Forbid),
            "nearest-parameter" => Ok(Self::NearestParameter),
            other => Err(Error::param(format!(
                "unknown donor policy {other:?} (expected forbid or nearest-parameter)"
            ))),
        }
    }
}

/// Rewrites the microfile so that its quantity signal equals `target`.
///
/// Surplus members of a bucket are removed by a uniform draw without replacement
/// (`ChaCha8Rng::seed_from_u64(seed)`, `rand::seq::index::sample`, buckets visited in
/// parameter order). Deficits are filled with exact copies of the bucket's members,
/// cycling in row order, appended after the surviving rows. Rows outside the group
/// keep their positions and bytes.
pub fn apply_modified_signal(
    microfile: &Microfile,
    group: &GroupDefinition,
    target: &QuantitySignal,
    seed: u64,
    donor_policy: DonorPolicy,
) -> Result<Microfile> {
    let m = group.parameter_values.len();
    if target.len() != m {
        return Err(Error::param(format!(
            "target has {} values but the group has {m} parameter values",
            target.len()
        )));
    }
    let index = GroupIndex::resolve(microfile, group)?;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (r, row) in microfile.rows.iter().enumerate() {
        if let Some(k) = index.bucket(row) {
            members[k].push(r);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut removed = vec![false; microfile.rows.len()];
    for (k, bucket) in members.iter().enumerate() {
        let want = target.counts[k] as usize;
        if want < bucket.len() {
            for pick in rand::seq::index::sample(&mut rng, bucket.len(), bucket.len() - want) {
                removed[bucket[pick]] = true;
            }
        }
    }
    let survivors: Vec<Vec<usize>> = members
        .iter()
        .map(|b| b.iter().copied().filter(|&r| !removed[r]).collect())
        .collect();

    let mut appended = Vec::new();
    for (k, bucket) in members.iter().enumerate() {
        let want = target.counts[k] as usize;
        if want <= bucket.len() {
            continue;
        }
        let extra = want - bucket.len();
        if !bucket.is_empty() {
            appended.extend((0..extra).map(|e| microfile.rows[bucket[e % bucket.len()]].clone()));
            continue;
        }
        let value = &group.parameter_values[k];
        let donor = match donor_policy {
            DonorPolicy::Forbid => None,
            DonorPolicy::NearestParameter => (1..m)
                .flat_map(|d| [k.checked_sub(d), Some(k + d).filter(|&j| j < m)])
                .flatten()
                .find(|&j| !survivors[j].is_empty()),
        };
        let Some(donor) = donor else {
            return Err(Error::Synthesis(format!(
                "bucket {} (parameter value {value:?}) has no member rows to grow from{}",
                k + 1,
                match donor_policy {
                    DonorPolicy::Forbid => " and donor policy is forbid",
                    DonorPolicy::NearestParameter => " and no bucket can donate",
                }
            )));
        };
        let pool = &survivors[donor];
        appended.extend((0..extra).map(|e| {
            let mut row = microfile.rows[pool[e % pool.len()]].clone();
            row[index.parameter] = value.clone();
            row
        }));
    }

    let rows = microfile
        .rows
        .iter()
        .zip(&removed)
        .filter(|(_, &gone)| !gone)
        .map(|(row, _)| row.clone())
        .chain(appended)
        .collect();
    Microfile::new(microfile.schema.clone(), rows)
}
