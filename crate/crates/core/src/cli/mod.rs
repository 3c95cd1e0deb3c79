//! Command-line front end. Every command reads files, writes files and
//! records a manifest; exit status 1 means invalid input, 2 an I/O failure.

mod altmetrics;
mod edc;
mod normalise;
mod rank;
mod stability;
mod synth;

use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use edc_eval::edc::{threshold_for_fmr, threshold_for_starting_error, ErrorMode, ThresholdResult};
use edc_eval::pauc::{Adjustment, Interpolation};
use edc_eval::score_data::{self, pairwise_min_qs, ComparisonKind, ComparisonSet, QualityScoreTable};
use edc_eval::Error;

pub const THREADS_ENV: &str = "EDC_EVAL_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "edc-eval",
    version,
    about = "Error-versus-Discard evaluation of quality assessment algorithms"
)]
pub struct Cli {
    /// Seed for commands that draw random numbers.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (output directory for `synth`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Only report errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute one EDC per quality assessment algorithm.
    Edc(edc::EdcArgs),
    /// Rank algorithms by partial area under their EDCs.
    Rank(rank::RankArgs),
    /// Calibrate bins and normalise quality scores to [0, 100].
    Normalise(normalise::NormaliseArgs),
    /// Area between raw and normalised EDCs relative to the raw pAUC.
    Divergence(normalise::DivergenceArgs),
    /// Ranking stability over a grid of starting errors and pAUC limits.
    Stability(stability::StabilityArgs),
    /// Generate a synthetic dataset with a known expected ranking.
    Synth(synth::SynthArgs),
    /// Mean EDC of random quality scores.
    Baseline(edc::BaselineArgs),
    /// Alternative discard-based metrics.
    Altmetrics(altmetrics::AltArgs),
}

/// Flags shared by every command.
pub struct Global {
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Global {
    pub fn out(&self) -> Result<&Path, Failure> {
        self.out
            .as_deref()
            .ok_or_else(|| Failure::validation("--out is required for this command"))
    }
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    /// Library error with the offending file named.
    pub fn at(path: &Path) -> impl Fn(Error) -> Failure + '_ {
        move |e| {
            let mut f = Failure::from(e);
            f.message = format!("{}: {}", path.display(), f.message);
            f
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Io(_)) { 2 } else { 1 };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Mated,
    Nonmated,
}

impl From<KindArg> for ComparisonKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Mated => ComparisonKind::Mated,
            KindArg::Nonmated => ComparisonKind::Nonmated,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ErrorModeArg {
    Without,
    With,
}

impl From<ErrorModeArg> for ErrorMode {
    fn from(m: ErrorModeArg) -> Self {
        match m {
            ErrorModeArg::Without => ErrorMode::WithoutDiscarded,
            ErrorModeArg::With => ErrorMode::WithDiscarded,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InterpolationArg {
    Stepwise,
    Linear,
}

impl From<InterpolationArg> for Interpolation {
    fn from(i: InterpolationArg) -> Self {
        match i {
            InterpolationArg::Stepwise => Interpolation::Stepwise,
            InterpolationArg::Linear => Interpolation::Linear,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AdjustArg {
    None,
    Best,
    #[value(name = "best+upper")]
    BestUpper,
}

impl From<AdjustArg> for Adjustment {
    fn from(a: AdjustArg) -> Self {
        match a {
            AdjustArg::None => Adjustment::None,
            AdjustArg::Best => Adjustment::Best,
            AdjustArg::BestUpper => Adjustment::BestUpper,
        }
    }
}

pub fn open(path: &Path) -> CmdResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::at(path)(Error::Io(e)))
}

pub fn load_scores(path: &Path) -> CmdResult<QualityScoreTable> {
    score_data::load_quality_scores(open(path)?).map_err(Failure::at(path))
}

pub fn load_comparisons(path: &Path) -> CmdResult<ComparisonSet> {
    score_data::load_comparisons(open(path)?).map_err(Failure::at(path))
}

/// Comparisons of one kind; an empty selection is an error.
pub fn of_kind(set: &ComparisonSet, kind: ComparisonKind, path: &Path) -> CmdResult<ComparisonSet> {
    let selected = set.of_kind(kind);
    if selected.is_empty() {
        return Err(Failure::validation(format!(
            "{}: no {kind} comparisons",
            path.display()
        )));
    }
    Ok(selected)
}

/// Requested algorithms, or all in the table when none are named.
pub fn select_algorithms(table: &QualityScoreTable, requested: &[String]) -> CmdResult<Vec<String>> {
    if requested.is_empty() {
        let all = table.algorithm_names();
        if all.is_empty() {
            return Err(Failure::validation("quality score table is empty"));
        }
        return Ok(all);
    }
    for a in requested {
        if !table.has_algorithm(a) {
            return Err(Error::UnknownAlgorithm(a.clone()).into());
        }
    }
    Ok(requested.to_vec())
}

/// Pairwise quality scores per algorithm, computed in parallel.
pub fn pairwise_all(
    set: &ComparisonSet,
    table: &QualityScoreTable,
    algorithms: &[String],
) -> CmdResult<Vec<(String, Vec<f64>)>> {
    algorithms
        .par_iter()
        .map(|a| Ok((a.clone(), pairwise_min_qs(set, table, a)?)))
        .collect()
}

/// Threshold for a starting-error target: FNMR for mated, FMR for non-mated.
pub fn threshold_for(kind: ComparisonKind, scores: &[f64], target: f64) -> CmdResult<ThresholdResult> {
    let r = match kind {
        ComparisonKind::Mated => threshold_for_starting_error(scores, target)?,
        ComparisonKind::Nonmated => threshold_for_fmr(scores, target)?,
    };
    log::info!(
        "achieved starting error {} (target {target}), threshold {}",
        r.achieved_starting_error,
        r.threshold
    );
    Ok(r)
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CmdResult {
    edc_eval::report::write_json(path, value).map_err(Failure::at(path))
}

fn init_threads() -> CmdResult {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::validation(format!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
    // a pool that already exists is fine
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn dispatch(cli: Cli) -> CmdResult {
    init_threads()?;
    let global = Global {
        seed: cli.seed,
        out: cli.out,
    };
    match cli.command {
        Command::Edc(a) => edc::run_edc(a, &global),
        Command::Baseline(a) => edc::run_baseline(a, &global),
        Command::Rank(a) => rank::run(a, &global),
        Command::Normalise(a) => normalise::run_normalise(a, &global),
        Command::Divergence(a) => normalise::run_divergence(a, &global),
        Command::Stability(a) => stability::run(a, &global),
        Command::Synth(a) => synth::run(a, &global),
        Command::Altmetrics(a) => altmetrics::run(a, &global),
    }
}

pub fn main_with_args<I: IntoIterator<Item = OsString>>(args: I) -> ExitCode {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = if cli.quiet {
        log::LevelFilter::Error
    } else {
        log::LevelFilter::Info
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .format_target(false)
        .init();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
