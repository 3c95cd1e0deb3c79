use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::json;

use edc_eval::report::RunManifest;
use edc_eval::score_data::{write_comparisons, write_quality_scores, ComparisonSet};
use edc_eval::synthetic::{
    cross_subject_nonmated, expected_placements, generate, write_utilities, SyntheticSpec, NONMATED_MARGIN,
};
use edc_eval::Error;

use super::{write_json, CmdResult, Failure, Global};

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    subjects: usize,
    #[arg(long)]
    samples_per_subject: usize,
    /// Comma-separated offset scales, one synthetic algorithm each.
    #[arg(long, value_delimiter = ',', required = true)]
    scales: Vec<f64>,
    /// Output directory; falls back to `--out`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Also emit this many cross-subject non-mated comparisons (test fixture).
    #[arg(long, default_value_t = 0)]
    nonmated_pairs: usize,
}

fn create(path: &Path) -> CmdResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::at(path)(e.into()))
}

pub fn run(args: SynthArgs, global: &Global) -> CmdResult {
    let dir = args
        .out_dir
        .as_deref()
        .or(global.out.as_deref())
        .ok_or_else(|| Failure::validation("--out-dir is required"))?;
    let spec = SyntheticSpec {
        n_subjects: args.subjects,
        samples_per_subject: args.samples_per_subject,
        offset_scales: args.scales.clone(),
        seed: global.seed,
    };
    spec.validate()?;
    std::fs::create_dir_all(dir).map_err(|e| Failure::at(dir)(e.into()))?;

    let data = generate(&spec)?;
    log::info!(
        "{} samples, {} mated comparisons, {} algorithms",
        data.utilities.len(),
        data.mated.len(),
        data.algorithms.len()
    );
    let mut comparisons = data.mated.comparisons.clone();
    if args.nonmated_pairs > 0 {
        let nm = cross_subject_nonmated(&data, args.nonmated_pairs, global.seed)?;
        comparisons.extend(nm.comparisons);
    }

    let scores_path = dir.join("scores.csv");
    let comparisons_path = dir.join("comparisons.csv");
    let utilities_path = dir.join("utilities.csv");
    write_quality_scores(&data.quality, create(&scores_path)?).map_err(Failure::at(&scores_path))?;
    write_comparisons(&ComparisonSet::new(comparisons), create(&comparisons_path)?)
        .map_err(Failure::at(&comparisons_path))?;
    write_utilities(&data.utilities, create(&utilities_path)?).map_err(Failure::at(&utilities_path))?;

    let expected = match expected_placements(&spec.offset_scales) {
        Ok(e) => {
            let path = dir.join("expected.csv");
            let io = |e: csv::Error| Failure::at(&path)(Error::Io(e.into()));
            let mut w = csv::Writer::from_path(&path).map_err(io)?;
            w.write_record(["algorithm", "expected_placement"]).map_err(io)?;
            for (alg, p) in data.algorithms.iter().zip(&e) {
                w.write_record([alg.as_str(), &p.to_string()]).map_err(io)?;
            }
            w.flush().map_err(|e| Failure::at(&path)(e.into()))?;
            Some(e)
        }
        Err(Error::DegenerateScales) => {
            log::warn!("offset scales are all equal, no expected ranking written");
            None
        }
        Err(e) => return Err(e.into()),
    };

    let manifest = RunManifest::new(
        "synth",
        Some(global.seed),
        json!({
            "subjects": spec.n_subjects,
            "samples_per_subject": spec.samples_per_subject,
            "offset_scales": spec.offset_scales,
            "algorithms": data.algorithms,
            "utility_distribution": "uniform [-1, 1]",
            "offset_distribution": "uniform [-scale, scale], drawn independently per algorithm",
            "mated_comparison_score": "minimum of the two utilities",
            "nonmated_pairs": args.nonmated_pairs,
            "nonmated_comparison_score": format!("minimum of the two utilities minus {NONMATED_MARGIN}, test fixture only"),
            "utilities_file": "oracle only",
            "expected_placements": expected,
        }),
    );
    write_json(&dir.join("manifest.json"), &manifest)
}
