use extlab::cli::{parse_config, parse_number, report_csv};
use extlab::experiments::endpoint::log_times;
use extlab::experiments::{evaluate_check, loglog_fit, spread, CheckKind, ExperimentReport};
use extlab::exponents::{classify_region, knapp_predicted_slope, s_c, RegionTag};
use extlab::norms::{lq_of_profile, weak_lq_of_profile};
use proptest::prelude::*;

#[test]
fn synthetic_endpoint_profile() {
    // G(t) = t^{−1/q} on [1, T]: ‖G‖_q^q = log T, so S(T²)/S(T) = 2^{1/q},
    // while the weak norm is (1 − 1/T)^{1/q} → 1.
    let q = 4.0;
    let times = log_times(1e6, 32);
    let g: Vec<f64> = times.iter().map(|t| t.powf(-1.0 / q)).collect();
    let upto = |tmax: f64| -> (Vec<f64>, Vec<f64>) {
        times.iter().zip(&g).filter(|(t, _)| **t <= tmax * (1.0 + 1e-12)).map(|(t, g)| (*t, *g)).unzip()
    };
    let (t3, g3) = upto(1e3);
    let (t6, g6) = upto(1e6);
    let strong3 = lq_of_profile(&t3, &g3, q);
    let strong6 = lq_of_profile(&t6, &g6, q);
    assert!((strong3 / (1e3f64).ln().powf(1.0 / q) - 1.0).abs() < 1e-3);
    assert!((strong6 / strong3 / 2f64.powf(1.0 / q) - 1.0).abs() < 1e-3);
    let weak3 = weak_lq_of_profile(&t3, &g3, q);
    let weak6 = weak_lq_of_profile(&t6, &g6, q);
    assert!((weak6 - 1.0).abs() < 0.05, "{weak6}");
    assert!((weak6 / weak3 - 1.0).abs() < 0.01);
}

#[test]
fn constant_profile_grows_like_t_to_one_over_q() {
    for q in [2.0, 4.0, 6.0] {
        let ladder: Vec<f64> = (2..=7).map(|k| 2f64.powi(k)).collect();
        let norms: Vec<f64> = ladder
            .iter()
            .map(|&t| {
                let ts: Vec<f64> = (0..=256).map(|i| t * i as f64 / 256.0).collect();
                lq_of_profile(&ts, &vec![1.0; ts.len()], q)
            })
            .collect();
        let (slope, r2) = loglog_fit(&ladder, &norms).unwrap();
        assert!((slope - 1.0 / q).abs() < 1e-12 && r2 > 1.0 - 1e-12);
    }
}

fn synthetic_report(n: usize) -> ExperimentReport {
    let x: Vec<f64> = (0..n).map(|i| 2f64.powi(i as i32)).collect();
    let y: Vec<f64> = x.iter().map(|x| x.sqrt()).collect();
    ExperimentReport::new("synthetic", CheckKind::Slope, 0.5, 0.5, 0.01).with_points(&x, &y, &y)
}

proptest! {
    #[test]
    fn fractions_parse_exactly(p in -1000i64..1000, q in 1i64..1000) {
        prop_assert_eq!(parse_number(&format!("{p}/{q}")), Some(p as f64 / q as f64));
        prop_assert_eq!(parse_number(&format!(" {p} / {q} ")), Some(p as f64 / q as f64));
    }

    #[test]
    fn endpoint_line_is_recognised(d in 1usize..=2, q in 2.2f64..50.0) {
        // d/r + 1/q = d/2 solved for r.
        let r = d as f64 / (d as f64 / 2.0 - 1.0 / q);
        prop_assume!(r > 0.0);
        let c = classify_region(d, q, r);
        prop_assert_eq!(c.tag, RegionTag::EndpointLine);
        prop_assert!((c.scaling_witness - 1.0 / q).abs() < 1e-12);
    }

    #[test]
    fn knapp_slope_is_affine_in_s(d in 1usize..=2, q in 2.0f64..20.0, r in 2.0f64..20.0, s in -2.0f64..2.0) {
        let k = knapp_predicted_slope(d, q, r, s);
        prop_assert!((k - (s_c(d, q, r) - s)).abs() < 1e-14);
    }

    #[test]
    fn config_echo_round_trips_exponents(q in 4.01f64..5.99, s in -1.0f64..1.0) {
        let text = format!("[experiment]\nname = sphere\n[parameters]\nq = {q}\ns = {s}\n");
        let cfg = parse_config(&text).unwrap();
        let echo = cfg.echo();
        prop_assert_eq!(echo["q"].parse::<f64>().unwrap(), q);
        prop_assert_eq!(echo["s"].parse::<f64>().unwrap(), s);
        prop_assert_eq!(cfg.plan.r, q);
    }

    #[test]
    fn csv_has_one_row_per_point(n in 0usize..40) {
        prop_assert_eq!(report_csv(&synthetic_report(n)).lines().count(), n + 1);
    }

    #[test]
    fn power_laws_are_recovered(slope in -3.0f64..3.0, c in 0.01f64..100.0, n in 4usize..12) {
        let x: Vec<f64> = (0..n).map(|i| 1.5f64.powi(i as i32)).collect();
        let y: Vec<f64> = x.iter().map(|x| c * x.powf(slope)).collect();
        let (fit, r2) = loglog_fit(&x, &y).unwrap();
        prop_assert!((fit - slope).abs() < 1e-10);
        prop_assert!(r2 > 1.0 - 1e-10 || slope.abs() < 1e-8);
    }

    #[test]
    fn spread_is_scale_invariant(v in proptest::collection::vec(0.1f64..10.0, 1..20), c in 0.01f64..100.0) {
        let s = spread(&v);
        let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
        prop_assert!(s >= 1.0);
        prop_assert!((spread(&scaled) / s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn checks_are_monotone_in_tolerance(fitted in -2.0f64..2.0, predicted in 0.1f64..2.0, tol in 0.0f64..1.0) {
        for kind in [CheckKind::Slope, CheckKind::SlopeUpperBound, CheckKind::SlopeLowerBound, CheckKind::Spread, CheckKind::Bound, CheckKind::Ratio] {
            if evaluate_check(kind, fitted, predicted, tol) {
                prop_assert!(evaluate_check(kind, fitted, predicted, tol + 0.5));
            }
        }
    }
}
