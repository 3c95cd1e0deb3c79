//! Synthetic utility, comparison and quality scores with a known ranking.
//!
//! Each sample gets a hidden utility drawn uniformly from `[-1, 1]`. Mated
//! comparison scores are the pairwise minima of the utilities within a
//! subject, and synthetic quality algorithm `k` scores a sample as its utility
//! plus an offset drawn uniformly from `[-scale_k, scale_k]`. Offsets are drawn
//! independently per algorithm.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::score_data::{Comparison, ComparisonKind, ComparisonSet, QualityScoreTable, SampleId};

/// Offset scales of the first synthetic variant.
pub const VARIANT_1_SCALES: [f64; 5] = [0.05, 0.10, 0.15, 0.20, 0.25];
/// Offset scales of the second synthetic variant.
pub const VARIANT_2_SCALES: [f64; 5] = [0.01, 0.02, 0.03, 0.04, 0.05];

/// Subtracted from cross-subject utility minima in [`cross_subject_nonmated`].
pub const NONMATED_MARGIN: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_subjects: usize,
    pub samples_per_subject: usize,
    pub offset_scales: Vec<f64>,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_subjects == 0 {
            return Err(Error::Config("at least one subject is required".into()));
        }
        if self.samples_per_subject < 2 {
            return Err(Error::Config(format!(
                "samples_per_subject is {}, at least 2 are needed to form mated pairs",
                self.samples_per_subject
            )));
        }
        if self.offset_scales.is_empty() {
            return Err(Error::Config("at least one offset scale is required".into()));
        }
        if let Some(s) = self.offset_scales.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(Error::Config(format!(
                "offset scale {s} must be finite and non-negative"
            )));
        }
        Ok(())
    }

    pub fn mated_pair_count(&self) -> usize {
        self.n_subjects * self.samples_per_subject * (self.samples_per_subject - 1) / 2
    }
}

/// Name of synthetic quality algorithm `k` (zero-based).
pub fn algorithm_name(k: usize) -> String {
    format!("SQA{}", k + 1)
}

pub fn sample_name(subject: usize, sample: usize) -> String {
    format!("u{subject}s{sample}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleUtility {
    pub sample: SampleId,
    pub subject: usize,
    pub utility: f64,
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub utilities: Vec<SampleUtility>,
    pub mated: ComparisonSet,
    pub quality: QualityScoreTable,
    pub algorithms: Vec<String>,
}

struct SubjectBlock {
    utilities: Vec<f64>,
    /// `qs[sample][algorithm]`
    qs: Vec<Vec<f64>>,
}

fn subject_block(spec: &SyntheticSpec, subject: usize) -> SubjectBlock {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(subject as u64);
    let mut utilities = Vec::with_capacity(spec.samples_per_subject);
    let mut qs = Vec::with_capacity(spec.samples_per_subject);
    for _ in 0..spec.samples_per_subject {
        let u = rng.random_range(-1.0..=1.0);
        utilities.push(u);
        qs.push(
            spec.offset_scales
                .iter()
                .map(|&s| u + s * rng.random_range(-1.0..=1.0))
                .collect(),
        );
    }
    SubjectBlock { utilities, qs }
}

/// Generate a dataset. Subject `i` draws from ChaCha stream `i` of `seed`, so
/// the output does not depend on thread scheduling.
pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticDataset> {
    spec.validate()?;
    let blocks: Vec<SubjectBlock> = (0..spec.n_subjects)
        .into_par_iter()
        .map(|s| subject_block(spec, s))
        .collect();

    let algorithms: Vec<String> = (0..spec.offset_scales.len()).map(algorithm_name).collect();
    let mut utilities = Vec::with_capacity(spec.n_subjects * spec.samples_per_subject);
    let mut mated = Vec::with_capacity(spec.mated_pair_count());
    let mut quality = QualityScoreTable::new();
    for (subject, block) in blocks.iter().enumerate() {
        let ids: Vec<SampleId> = (0..spec.samples_per_subject)
            .map(|j| SampleId::new(sample_name(subject, j)))
            .collect::<Result<_>>()?;
        for (j, id) in ids.iter().enumerate() {
            utilities.push(SampleUtility {
                sample: id.clone(),
                subject,
                utility: block.utilities[j],
            });
            for (k, alg) in algorithms.iter().enumerate() {
                quality.insert(id.clone(), alg, block.qs[j][k])?;
            }
        }
        for a in 0..ids.len() {
            for b in a + 1..ids.len() {
                let cs = block.utilities[a].min(block.utilities[b]);
                mated.push(Comparison::new(
                    ids[a].clone(),
                    ids[b].clone(),
                    cs,
                    ComparisonKind::Mated,
                )?);
            }
        }
    }
    Ok(SyntheticDataset {
        utilities,
        mated: ComparisonSet::new(mated),
        quality,
        algorithms,
    })
}

/// Min-max normalised offset scales: the placement each synthetic algorithm
/// is expected to reach.
pub fn expected_placements(offset_scales: &[f64]) -> Result<Vec<f64>> {
    let min = offset_scales.iter().copied().fold(f64::INFINITY, f64::min);
    let max = offset_scales.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if offset_scales.len() < 2 || !(max > min) {
        return Err(Error::DegenerateScales);
    }
    Ok(offset_scales.iter().map(|s| (s - min) / (max - min)).collect())
}

/// Non-mated test fixture: `n_pairs` random cross-subject pairs with score
/// `min(utility_a, utility_b) - NONMATED_MARGIN`. Not part of the synthetic
/// model itself.
pub fn cross_subject_nonmated(dataset: &SyntheticDataset, n_pairs: usize, seed: u64) -> Result<ComparisonSet> {
    let n = dataset.utilities.len();
    let subjects = dataset.utilities.iter().map(|u| u.subject).max().map_or(0, |m| m + 1);
    if subjects < 2 {
        return Err(Error::Config("cross-subject pairs need at least two subjects".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_pairs);
    while out.len() < n_pairs {
        let a = &dataset.utilities[rng.random_range(0..n)];
        let b = &dataset.utilities[rng.random_range(0..n)];
        if a.subject == b.subject {
            continue;
        }
        let cs = a.utility.min(b.utility) - NONMATED_MARGIN;
        out.push(Comparison::new(
            a.sample.clone(),
            b.sample.clone(),
            cs,
            ComparisonKind::Nonmated,
        )?);
    }
    Ok(ComparisonSet::new(out))
}

/// Write the oracle-only `sample_id,utility` CSV.
pub fn write_utilities<W: Write>(utilities: &[SampleUtility], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sample_id", "utility"]).map_err(csv_io)?;
    for u in utilities {
        w.write_record([u.sample.as_str(), &u.utility.to_string()])
            .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(e.into())
}
