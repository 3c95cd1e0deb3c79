//! Score data model: quality-score tables, comparison sets, CSV ingestion and
//! the pairwise quality-score function.
//!
//! Both file formats are long-format CSV with a mandatory header:
//!
//! ```text
//! sample_id,algorithm,quality_score
//! sample_id_a,sample_id_b,comparison_score,kind
//! ```
//!
//! Scores must be finite; `kind` is `mated` or `nonmated`.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const QUALITY_HEADER: [&str; 3] = ["sample_id", "algorithm", "quality_score"];
pub const COMPARISON_HEADER: [&str; 4] = ["sample_id_a", "sample_id_b", "comparison_score", "kind"];

/// Opaque, non-empty sample identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SampleId(String);

impl SampleId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::Domain("sample id must be non-empty".into()));
        }
        Ok(Self(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for SampleId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Per-(sample, algorithm) quality scores. Higher means higher utility.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QualityScoreTable {
    scores: BTreeMap<String, BTreeMap<SampleId, f64>>,
}

impl QualityScoreTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert one score, rejecting duplicates and non-finite values.
    pub fn insert(&mut self, sample: SampleId, algorithm: &str, score: f64) -> Result<()> {
        if !score.is_finite() {
            return Err(Error::Domain(format!(
                "quality score for `{sample}` under `{algorithm}` is not finite"
            )));
        }
        let per_alg = self.scores.entry(algorithm.to_owned()).or_default();
        if per_alg.contains_key(&sample) {
            return Err(Error::DuplicateKey {
                sample: sample.0,
                algorithm: algorithm.to_owned(),
            });
        }
        per_alg.insert(sample, score);
        Ok(())
    }

    /// Sorted distinct algorithm names.
    pub fn algorithm_names(&self) -> Vec<String> {
        self.scores.keys().cloned().collect()
    }

    pub fn has_algorithm(&self, algorithm: &str) -> bool {
        self.scores.contains_key(algorithm)
    }

    pub fn get(&self, sample: &str, algorithm: &str) -> Option<f64> {
        self.scores.get(algorithm)?.get(sample).copied()
    }

    /// Scores of one algorithm, ordered by sample id.
    pub fn algorithm_scores(&self, algorithm: &str) -> Option<&BTreeMap<SampleId, f64>> {
        self.scores.get(algorithm)
    }

    /// Total number of (sample, algorithm) entries.
    pub fn len(&self) -> usize {
        self.scores.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Iterate `(sample, algorithm, score)` ordered by algorithm, then sample.
    pub fn iter(&self) -> impl Iterator<Item = (&SampleId, &str, f64)> {
        self.scores
            .iter()
            .flat_map(|(alg, m)| m.iter().map(move |(s, &q)| (s, alg.as_str(), q)))
    }

    /// Keep only the named algorithms.
    pub fn restrict(&self, algorithms: &[String]) -> Result<Self> {
        let mut out = Self::new();
        for alg in algorithms {
            let m = self
                .scores
                .get(alg)
                .ok_or_else(|| Error::UnknownAlgorithm(alg.clone()))?;
            out.scores.insert(alg.clone(), m.clone());
        }
        Ok(out)
    }
}

/// Kind of a comparison: same subject and instance (mated) or not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComparisonKind {
    Mated,
    Nonmated,
}

impl ComparisonKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ComparisonKind::Mated => "mated",
            ComparisonKind::Nonmated => "nonmated",
        }
    }
}

impl std::str::FromStr for ComparisonKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "mated" => Ok(ComparisonKind::Mated),
            "nonmated" => Ok(ComparisonKind::Nonmated),
            other => Err(format!("unknown kind `{other}`")),
        }
    }
}

impl fmt::Display for ComparisonKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One comparison between two distinct samples with a similarity score.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub sample_a: SampleId,
    pub sample_b: SampleId,
    pub score: f64,
    pub kind: ComparisonKind,
}

impl Comparison {
    pub fn new(sample_a: SampleId, sample_b: SampleId, score: f64, kind: ComparisonKind) -> Result<Self> {
        if sample_a == sample_b {
            return Err(Error::SelfComparison {
                line: 0,
                sample: sample_a.0,
            });
        }
        if !score.is_finite() {
            return Err(Error::Domain(format!(
                "comparison score for ({sample_a}, {sample_b}) is not finite"
            )));
        }
        Ok(Self {
            sample_a,
            sample_b,
            score,
            kind,
        })
    }
}

/// Comparisons in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ComparisonSet {
    pub comparisons: Vec<Comparison>,
}

impl ComparisonSet {
    pub fn new(comparisons: Vec<Comparison>) -> Self {
        Self { comparisons }
    }

    pub fn len(&self) -> usize {
        self.comparisons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comparisons.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Comparison> {
        self.comparisons.iter()
    }

    /// Sub-set of one kind, file order preserved.
    pub fn of_kind(&self, kind: ComparisonKind) -> ComparisonSet {
        ComparisonSet::new(self.comparisons.iter().filter(|c| c.kind == kind).cloned().collect())
    }

    pub fn scores(&self) -> Vec<f64> {
        self.comparisons.iter().map(|c| c.score).collect()
    }

    /// The single kind shared by all comparisons, or an error when the set is
    /// empty or mixed.
    pub fn uniform_kind(&self) -> Result<ComparisonKind> {
        let first = self
            .comparisons
            .first()
            .ok_or(Error::EmptyInput("comparison set"))?
            .kind;
        if self.comparisons.iter().any(|c| c.kind != first) {
            return Err(Error::MixedKinds);
        }
        Ok(first)
    }
}

impl FromIterator<Comparison> for ComparisonSet {
    fn from_iter<I: IntoIterator<Item = Comparison>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// Combines the two sample quality scores of a comparison into the single
/// score it is discarded by.
pub trait PairwiseQsFunction {
    fn combine(&self, a: f64, b: f64) -> f64;
}

/// The minimum of the two sample scores: a pair is discarded as soon as either
/// of its samples would be.
#[derive(Debug, Clone, Copy, Default)]
pub struct MinimumQs;

impl PairwiseQsFunction for MinimumQs {
    fn combine(&self, a: f64, b: f64) -> f64 {
        a.min(b)
    }
}

/// Pairwise quality scores aligned with `set` under an arbitrary combination
/// function.
pub fn pairwise_qs<F: PairwiseQsFunction + ?Sized>(
    set: &ComparisonSet,
    table: &QualityScoreTable,
    algorithm: &str,
    function: &F,
) -> Result<Vec<f64>> {
    let scores = table
        .algorithm_scores(algorithm)
        .ok_or_else(|| Error::UnknownAlgorithm(algorithm.to_owned()))?;
    let lookup = |s: &SampleId| {
        scores.get(s).copied().ok_or_else(|| Error::MissingScore {
            sample: s.to_string(),
            algorithm: algorithm.to_owned(),
        })
    };
    set.iter()
        .map(|c| Ok(function.combine(lookup(&c.sample_a)?, lookup(&c.sample_b)?)))
        .collect()
}

/// Pairwise minimum quality scores aligned with `set`.
pub fn pairwise_min_qs(set: &ComparisonSet, table: &QualityScoreTable, algorithm: &str) -> Result<Vec<f64>> {
    pairwise_qs(set, table, algorithm, &MinimumQs)
}

/// Consistency report for a score table against a comparison set.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    /// Per algorithm, samples referenced by comparisons but lacking a score.
    pub missing: BTreeMap<String, BTreeSet<SampleId>>,
    /// Samples referenced by comparisons that no algorithm scores.
    pub unknown_samples: BTreeSet<SampleId>,
    pub mated_count: usize,
    pub nonmated_count: usize,
    /// Distinct comparison scores among mated comparisons; bounds the number
    /// of achievable FNM starting errors.
    pub distinct_mated_scores: usize,
    pub distinct_nonmated_scores: usize,
}

impl ValidationReport {
    pub fn missing_reference_count(&self) -> usize {
        self.missing.values().map(BTreeSet::len).sum()
    }

    pub fn is_consistent(&self) -> bool {
        self.missing_reference_count() == 0 && self.unknown_samples.is_empty()
    }
}

pub fn validate_dataset(table: &QualityScoreTable, set: &ComparisonSet) -> ValidationReport {
    let referenced: BTreeSet<&SampleId> = set.iter().flat_map(|c| [&c.sample_a, &c.sample_b]).collect();

    let mut report = ValidationReport::default();
    for alg in table.algorithm_names() {
        let scores = table.algorithm_scores(&alg).expect("listed algorithm");
        let missing: BTreeSet<SampleId> = referenced
            .iter()
            .filter(|s| !scores.contains_key(**s))
            .map(|s| (*s).clone())
            .collect();
        report.missing.insert(alg, missing);
    }
    report.unknown_samples = referenced
        .iter()
        .filter(|s| table.scores.values().all(|m| !m.contains_key(**s)))
        .map(|s| (*s).clone())
        .collect();

    let mut mated = Vec::new();
    let mut nonmated = Vec::new();
    for c in set.iter() {
        match c.kind {
            ComparisonKind::Mated => mated.push(c.score),
            ComparisonKind::Nonmated => nonmated.push(c.score),
        }
    }
    report.mated_count = mated.len();
    report.nonmated_count = nonmated.len();
    report.distinct_mated_scores = count_distinct(&mut mated);
    report.distinct_nonmated_scores = count_distinct(&mut nonmated);
    report
}

fn count_distinct(values: &mut [f64]) -> usize {
    values.sort_by(f64::total_cmp);
    let mut n = 0;
    let mut prev: Option<f64> = None;
    for &v in values.iter() {
        if prev != Some(v) {
            n += 1;
            prev = Some(v);
        }
    }
    n
}

fn csv_reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source)
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn csv_error(err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

/// Reads records, checking the header and column count. Returns `(line, record)`
/// for every data row.
fn read_rows<R: Read>(source: R, header: &[&str]) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut reader = csv_reader(source);
    let mut rows = Vec::new();
    let mut seen_header = false;
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record_line(&record);
        if !seen_header {
            if record.iter().ne(header.iter().copied()) {
                return Err(Error::Parse {
                    line,
                    message: format!("expected header `{}`", header.join(",")),
                });
            }
            seen_header = true;
            continue;
        }
        if record.len() != header.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} columns, found {}", header.len(), record.len()),
            });
        }
        rows.push((line, record));
    }
    Ok(rows)
}

fn parse_score(field: &str, line: u64, what: &str) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("non-numeric {what} `{field}`"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite {what} `{field}`"),
        });
    }
    Ok(v)
}

fn parse_id(field: &str, line: u64) -> Result<SampleId> {
    SampleId::new(field).map_err(|_| Error::Parse {
        line,
        message: "empty sample id".into(),
    })
}

/// Load a quality-score CSV. An entirely empty stream yields an empty table.
pub fn load_quality_scores<R: Read>(source: R) -> Result<QualityScoreTable> {
    let mut table = QualityScoreTable::new();
    for (line, record) in read_rows(source, &QUALITY_HEADER)? {
        let sample = parse_id(&record[0], line)?;
        let algorithm = &record[1];
        if algorithm.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty algorithm name".into(),
            });
        }
        let score = parse_score(&record[2], line, "quality score")?;
        table.insert(sample, algorithm, score)?;
    }
    Ok(table)
}

/// Load a comparison CSV, preserving file order.
pub fn load_comparisons<R: Read>(source: R) -> Result<ComparisonSet> {
    let mut comparisons = Vec::new();
    for (line, record) in read_rows(source, &COMPARISON_HEADER)? {
        let a = parse_id(&record[0], line)?;
        let b = parse_id(&record[1], line)?;
        let score = parse_score(&record[2], line, "comparison score")?;
        let kind: ComparisonKind = record[3].parse().map_err(|message| Error::Parse { line, message })?;
        if a == b {
            return Err(Error::SelfComparison {
                line,
                sample: a.to_string(),
            });
        }
        comparisons.push(Comparison {
            sample_a: a,
            sample_b: b,
            score,
            kind,
        });
    }
    Ok(ComparisonSet::new(comparisons))
}

/// Write a table in quality-score CSV format. Scores use the shortest
/// representation that parses back to the identical value.
pub fn write_quality_scores<W: Write>(table: &QualityScoreTable, mut out: W) -> Result<()> {
    writeln!(out, "{}", QUALITY_HEADER.join(","))?;
    for (sample, alg, score) in table.iter() {
        writeln!(out, "{sample},{alg},{score}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_comparisons<W: Write>(set: &ComparisonSet, mut out: W) -> Result<()> {
    writeln!(out, "{}", COMPARISON_HEADER.join(","))?;
    for c in set.iter() {
        writeln!(out, "{},{},{},{}", c.sample_a, c.sample_b, c.score, c.kind)?;
    }
    out.flush()?;
    Ok(())
}
