use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;

use edc_eval::pauc::{pauc, rank, Adjustment, Interpolation, PaucConfig, RankingReport};
use edc_eval::report::{read_json, CurveFile, RunManifest};
use edc_eval::Error;

use super::{open, write_json, AdjustArg, CmdResult, Failure, Global, InterpolationArg};

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Curve file written by `edc`.
    #[arg(long, required_unless_present = "paucs", conflicts_with = "paucs")]
    curves: Option<PathBuf>,
    /// CSV of precomputed values (`algorithm,pauc`); needs `--starting-error`.
    #[arg(long)]
    paucs: Option<PathBuf>,
    /// Starting error the `--paucs` values were computed at.
    #[arg(long)]
    starting_error: Option<f64>,
    /// Upper end of the discard range.
    #[arg(long)]
    pauc_limit: f64,
    /// Lower end of the discard range.
    #[arg(long, default_value_t = 0.0)]
    pauc_lower: f64,
    #[arg(long, value_enum, default_value = "stepwise")]
    interpolation: InterpolationArg,
    #[arg(long, value_enum, default_value = "best")]
    adjust: AdjustArg,
}

#[derive(Debug, Serialize)]
struct RankFile {
    manifest: RunManifest,
    /// Set when the interpolation differs from the stepwise default.
    non_default_interpolation: bool,
    report: RankingReport,
}

#[derive(Debug, Deserialize)]
struct PaucRow {
    algorithm: String,
    pauc: f64,
}

fn read_paucs(path: &Path) -> CmdResult<Vec<(String, f64)>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open(path)?);
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<PaucRow>().enumerate() {
        let row = row.map_err(|e| {
            Failure::at(path)(Error::Parse {
                line: i as u64 + 2,
                message: e.to_string(),
            })
        })?;
        if out.iter().any(|(a, _): &(String, f64)| *a == row.algorithm) {
            return Err(Failure::validation(format!(
                "{}: algorithm `{}` listed twice",
                path.display(),
                row.algorithm
            )));
        }
        out.push((row.algorithm, row.pauc));
    }
    Ok(out)
}

pub fn run(args: RankArgs, global: &Global) -> CmdResult {
    let out = global.out()?;
    let interpolation: Interpolation = args.interpolation.into();
    let adjustment: Adjustment = args.adjust.into();
    let config = PaucConfig::with_range(args.pauc_lower, args.pauc_limit, interpolation)?;

    let (paucs, starting_error, input) = match (&args.curves, &args.paucs) {
        (Some(path), _) => {
            let file: CurveFile = read_json(path).map_err(Failure::at(path))?;
            let first = file
                .curves
                .first()
                .ok_or_else(|| Failure::validation(format!("{}: no curves", path.display())))?;
            let e0 = first.starting_error;
            if file.curves.iter().any(|c| c.starting_error != e0) {
                return Err(Failure::validation(format!(
                    "{}: curves have different starting errors",
                    path.display()
                )));
            }
            let paucs = file
                .curves
                .iter()
                .map(|c| (c.algorithm.clone(), pauc(&c.to_curve(), &config)))
                .collect();
            (paucs, e0, path)
        }
        (None, Some(path)) => {
            let e0 = args
                .starting_error
                .ok_or_else(|| Failure::validation("--paucs needs --starting-error"))?;
            (read_paucs(path)?, e0, path)
        }
        (None, None) => unreachable!("clap requires one input"),
    };
    if !(0.0..=1.0).contains(&starting_error) {
        return Err(Failure::validation(format!(
            "starting error {starting_error} outside [0, 1]"
        )));
    }
    let report = rank(&paucs, starting_error, &config, adjustment)?;
    let manifest = RunManifest::new(
        "rank",
        None,
        json!({
            "starting_error": starting_error,
            "discard_lower": args.pauc_lower,
            "discard_limit": args.pauc_limit,
            "interpolation": interpolation,
            "adjustment": adjustment,
        }),
    )
    .with_input(input)?;
    if interpolation != Interpolation::Stepwise {
        log::warn!("using {interpolation:?} interpolation instead of the stepwise default");
    }
    write_json(
        out,
        &RankFile {
            manifest,
            non_default_interpolation: interpolation != Interpolation::Stepwise,
            report,
        },
    )
}
