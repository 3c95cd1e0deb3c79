use proptest::prelude::*;

use edc_eval::edc::{compute_edc, threshold_for_fmr, threshold_for_starting_error, ErrorMode};
use edc_eval::normalisation::{apply_normalisation, calibrate, CalibrationFunction};
use edc_eval::pauc::{pauc, relative_ranks, Interpolation, PaucConfig};
use edc_eval::score_data::{Comparison, ComparisonKind, ComparisonSet, SampleId};
use edc_eval::stability::{placement_stats, RankingGrid};

fn mated(scores: &[f64]) -> ComparisonSet {
    scores
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            Comparison::new(
                SampleId::new(format!("p{i}")).unwrap(),
                SampleId::new(format!("q{i}")).unwrap(),
                s,
                ComparisonKind::Mated,
            )
            .unwrap()
        })
        .collect()
}

fn scored_pairs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..60).prop_flat_map(|n| {
        (
            prop::collection::vec((0u8..20).prop_map(|v| v as f64 / 20.0), n),
            prop::collection::vec((0u8..8).prop_map(f64::from), n),
        )
    })
}

proptest! {
    #[test]
    fn discard_fractions_are_counts_over_total((scores, qs) in scored_pairs(), t in 0.0f64..1.0) {
        let curve = compute_edc(&mated(&scores), &qs, t, ErrorMode::WithoutDiscarded).unwrap();
        let n = scores.len() as f64;
        prop_assert_eq!(curve.points[0].discard_fraction, 0.0);
        for w in curve.points.windows(2) {
            prop_assert!(w[0].discard_fraction < w[1].discard_fraction);
        }
        for p in &curve.points {
            let k = (p.discard_fraction * n).round();
            prop_assert_eq!(p.discard_fraction, k / n);
            prop_assert!(p.discard_fraction < 1.0);
        }
    }

    #[test]
    fn both_modes_share_fractions_and_with_discarded_never_rises((scores, qs) in scored_pairs(), t in 0.0f64..1.0) {
        let set = mated(&scores);
        let without = compute_edc(&set, &qs, t, ErrorMode::WithoutDiscarded).unwrap();
        let with = compute_edc(&set, &qs, t, ErrorMode::WithDiscarded).unwrap();
        let xs = |c: &edc_eval::EdcCurve| c.points.iter().map(|p| p.discard_fraction).collect::<Vec<_>>();
        prop_assert_eq!(xs(&without), xs(&with));
        for w in with.points.windows(2) {
            prop_assert!(w[1].value <= w[0].value);
        }
        for (a, b) in without.points.iter().zip(&with.points) {
            prop_assert!(b.value <= a.value);
        }
    }

    #[test]
    fn achieved_rates_never_exceed_target(
        scores in prop::collection::vec((0u8..30).prop_map(|v| v as f64 / 30.0), 1..80),
        target in 0.0f64..=1.0,
    ) {
        let fnmr = threshold_for_starting_error(&scores, target).unwrap();
        prop_assert!(fnmr.achieved_starting_error <= target);
        let observed = scores.iter().filter(|&&s| s < fnmr.threshold).count() as f64 / scores.len() as f64;
        prop_assert_eq!(observed, fnmr.achieved_starting_error);

        let fmr = threshold_for_fmr(&scores, target).unwrap();
        prop_assert!(fmr.achieved_starting_error <= target);
    }

    #[test]
    fn pauc_grows_with_limit((scores, qs) in scored_pairs(), t in 0.0f64..1.0, a in 0.001f64..1.0, b in 0.001f64..1.0) {
        let curve = compute_edc(&mated(&scores), &qs, t, ErrorMode::WithoutDiscarded).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for interp in [Interpolation::Stepwise, Interpolation::Linear] {
            let small = pauc(&curve, &PaucConfig::new(lo, interp).unwrap());
            let large = pauc(&curve, &PaucConfig::new(hi, interp).unwrap());
            prop_assert!(small >= 0.0);
            prop_assert!(small <= large + 1e-15);
        }
    }

    #[test]
    fn normalisation_is_monotone(
        cal in prop::collection::vec(-10.0f64..10.0, 2..50),
        a in -15.0f64..15.0,
        b in -15.0f64..15.0,
    ) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for f in [CalibrationFunction::MinMax, CalibrationFunction::Proportional] {
            if let Ok(bins) = calibrate(f, &cal) {
                prop_assert!(apply_normalisation(lo, &bins) <= apply_normalisation(hi, &bins));
                prop_assert!(apply_normalisation(hi, &bins) <= 100);
            }
        }
    }

    #[test]
    fn relative_ranks_span_unit_interval(values in prop::collection::vec(0.0f64..1.0, 1..20)) {
        let r = relative_ranks(&values);
        prop_assert!(r.iter().all(|v| (0.0..=1.0).contains(v)));
        let best = values.iter().copied().fold(f64::INFINITY, f64::min);
        for (v, rr) in values.iter().zip(&r) {
            if *v == best {
                prop_assert_eq!(*rr, 0.0);
            }
        }
    }

    #[test]
    fn placement_stats_ignore_cell_order(
        rows in prop::collection::vec(prop::collection::vec(1.0f64..5.0, 3), 1..30),
        seed in any::<u64>(),
    ) {
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let mut shuffled = rows.clone();
        let len = shuffled.len();
        for i in (1..len).rev() {
            let j = (seed.wrapping_mul(i as u64 + 7) % (i as u64 + 1)) as usize;
            shuffled.swap(i, j);
        }
        let a = placement_stats(&RankingGrid::from_placements(names.clone(), rows).unwrap());
        let b = placement_stats(&RankingGrid::from_placements(names, shuffled).unwrap());
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(&x.algorithm, &y.algorithm);
            prop_assert_eq!(x.best, y.best);
            prop_assert_eq!(x.worst, y.worst);
            prop_assert_eq!(x.median, y.median);
            prop_assert!((x.mean - y.mean).abs() < 1e-12);
            prop_assert!((x.std_dev - y.std_dev).abs() < 1e-12);
        }
    }
}
