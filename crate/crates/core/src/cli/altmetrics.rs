use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use edc_eval::alt_metrics::{
    cs_dc, det_vs_discard, dprime_dc, error_proxy_correlation, fc_edc, qs_cs_correlation, sample_utility_scores,
    CorrelationMethod,
};
use edc_eval::report::RunManifest;
use edc_eval::score_data::{ComparisonKind, ComparisonSet, QualityScoreTable};

use super::{
    load_comparisons, load_scores, of_kind, pairwise_all, select_algorithms, threshold_for, write_json, CmdResult,
    Failure, Global, KindArg,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    /// Mean comparison score versus discard fraction.
    CsDc,
    /// d′ versus discard fraction.
    DprimeDc,
    /// FNMR at a re-fixed FMR versus discard fraction.
    FcEdc,
    /// Correlation between pairwise quality and comparison scores.
    Correlation,
    /// Correlation between pairwise quality and a 0/1 error proxy.
    ErrorProxy,
    /// Per-sample d′-style utility.
    Utility,
    /// DET curves for a list of quality thresholds.
    Det,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Pearson,
    Spearman,
}

#[derive(Debug, Args)]
pub struct AltArgs {
    #[arg(long, value_enum)]
    metric: MetricArg,
    /// Quality-score CSV; not needed for `utility`.
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long)]
    comparisons: PathBuf,
    /// Comparison kind for single-kind metrics.
    #[arg(long, value_enum, default_value = "mated")]
    kind: KindArg,
    #[arg(long, value_delimiter = ',')]
    algorithms: Vec<String>,
    /// FMR to hold for `fc-edc`.
    #[arg(long)]
    fmr_target: Option<f64>,
    /// Starting-error target fixing the decision threshold for `error-proxy`.
    #[arg(long)]
    starting_error: Option<f64>,
    #[arg(long, value_enum, default_value = "pearson")]
    method: MethodArg,
    /// Comma-separated quality thresholds for `det`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    qs_thresholds: Vec<f64>,
}

struct Inputs {
    table: QualityScoreTable,
    algorithms: Vec<String>,
}

fn need<T: Copy>(v: Option<T>, flag: &str, metric: &str) -> CmdResult<T> {
    v.ok_or_else(|| Failure::validation(format!("--metric {metric} needs {flag}")))
}

pub fn run(args: AltArgs, global: &Global) -> CmdResult {
    let out = global.out()?;
    let all = load_comparisons(&args.comparisons)?;
    let metric_name = args
        .metric
        .to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_owned();
    let inputs = match (&args.scores, args.metric) {
        (_, MetricArg::Utility) => None,
        (Some(p), _) => {
            let table = load_scores(p)?;
            let algorithms = select_algorithms(&table, &args.algorithms)?;
            Some(Inputs { table, algorithms })
        }
        (None, _) => return Err(Failure::validation(format!("--metric {metric_name} needs --scores"))),
    };
    let kind: ComparisonKind = args.kind.into();
    let mut config = json!({ "metric": metric_name });

    let results: Value = match args.metric {
        MetricArg::CsDc | MetricArg::Correlation | MetricArg::ErrorProxy => {
            let inputs = inputs.expect("scores loaded");
            let set = of_kind(&all, kind, &args.comparisons)?;
            config["kind"] = json!(kind);
            let pairwise = pairwise_all(&set, &inputs.table, &inputs.algorithms)?;
            let threshold = match args.metric {
                MetricArg::ErrorProxy => {
                    let target = need(args.starting_error, "--starting-error", &metric_name)?;
                    let th = threshold_for(kind, &set.scores(), target)?;
                    config["starting_error_target"] = json!(target);
                    config["starting_error_achieved"] = json!(th.achieved_starting_error);
                    config["threshold"] = json!(th.threshold);
                    Some(th.threshold)
                }
                _ => None,
            };
            let method = match args.method {
                MethodArg::Pearson => CorrelationMethod::Pearson,
                MethodArg::Spearman => CorrelationMethod::Spearman,
            };
            if args.metric == MetricArg::Correlation {
                config["method"] = json!(method);
            }
            let scores = set.scores();
            let rows = pairwise
                .par_iter()
                .map(|(alg, qs)| {
                    Ok(match args.metric {
                        MetricArg::CsDc => json!({ "algorithm": alg, "curve": cs_dc(&set, qs)? }),
                        MetricArg::Correlation => {
                            json!({ "algorithm": alg, "coefficient": qs_cs_correlation(qs, &scores, method)? })
                        }
                        _ => json!({
                            "algorithm": alg,
                            "coefficient": error_proxy_correlation(&set, qs, threshold.expect("set above"))?,
                        }),
                    })
                })
                .collect::<edc_eval::Result<Vec<Value>>>()?;
            Value::Array(rows)
        }
        MetricArg::DprimeDc | MetricArg::FcEdc | MetricArg::Det => {
            let inputs = inputs.expect("scores loaded");
            let mated = of_kind(&all, ComparisonKind::Mated, &args.comparisons)?;
            let nonmated = of_kind(&all, ComparisonKind::Nonmated, &args.comparisons)?;
            let m_qs = pairwise_all(&mated, &inputs.table, &inputs.algorithms)?;
            let n_qs = pairwise_all(&nonmated, &inputs.table, &inputs.algorithms)?;
            let fmr_target = if args.metric == MetricArg::FcEdc {
                let t = need(args.fmr_target, "--fmr-target", &metric_name)?;
                config["fmr_target"] = json!(t);
                t
            } else {
                0.0
            };
            if args.metric == MetricArg::Det {
                if args.qs_thresholds.is_empty() {
                    return Err(Failure::validation("--metric det needs --qs-thresholds"));
                }
                config["qs_thresholds"] = json!(args.qs_thresholds);
            }
            let rows = m_qs
                .par_iter()
                .zip(&n_qs)
                .map(|((alg, mq), (_, nq))| {
                    Ok(match args.metric {
                        MetricArg::DprimeDc => {
                            json!({ "algorithm": alg, "curve": dprime_dc(&mated, &nonmated, mq, nq)? })
                        }
                        MetricArg::FcEdc => {
                            json!({ "algorithm": alg, "curve": fc_edc(&mated, &nonmated, mq, nq, fmr_target)? })
                        }
                        _ => json!({
                            "algorithm": alg,
                            "det": det_vs_discard(&mated, &nonmated, mq, nq, &args.qs_thresholds)?,
                        }),
                    })
                })
                .collect::<edc_eval::Result<Vec<Value>>>()?;
            Value::Array(rows)
        }
        MetricArg::Utility => {
            let mated: ComparisonSet = all.of_kind(ComparisonKind::Mated);
            let nonmated: ComparisonSet = all.of_kind(ComparisonKind::Nonmated);
            json!(sample_utility_scores(&mated, &nonmated)?)
        }
    };

    let mut manifest = RunManifest::new("altmetrics", None, config);
    if let Some(p) = &args.scores {
        manifest = manifest.with_input(p)?;
    }
    manifest = manifest.with_input(&args.comparisons)?;
    write_json(out, &json!({ "manifest": manifest, "results": results }))
}
