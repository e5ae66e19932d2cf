use super::*;
use crate::cocycle::{band_ranges, CocycleConfig};
use crate::process::{ensemble_run, SerialExecutor};
use crate::stable_core::scale_shift;
use crate::triangular_array::nonzero_prob;

fn draws(p: &StableParams, m: usize, seed: u64) -> Vec<f64> {
    let mut rng = substream(seed, &[999]);
    (0..m).map(|_| sample(p, &mut rng)).collect()
}

#[test]
fn ks_critical_matches_the_asymptotic_constant() {
    // 99% point of the Kolmogorov law: 1.62762.
    let m = 1_000_000;
    let c = ks_critical(m, 0.99).unwrap() * libm::sqrt(m as f64);
    assert!((c - 1.62762).abs() < 2e-3, "{c}");
    assert!((kolmogorov_sf(1.35810) - 0.05).abs() < 1e-4);
    assert!(ks_critical(0, 0.99).is_err());
}

#[test]
fn ranks_and_correlations() {
    assert_eq!(stats::ranks(&[3.0, 1.0, 2.0, 2.0]), vec![4.0, 1.0, 2.5, 2.5]);
    let x: Vec<f64> = (0..50).map(|i| i as f64).collect();
    let y: Vec<f64> = x.iter().map(|v| libm::exp(*v / 10.0)).collect();
    assert!((spearman(&x, &y).unwrap() - 1.0).abs() < 1e-15);
    let z: Vec<f64> = x.iter().map(|v| -v * v * v).collect();
    assert!((spearman(&x, &z).unwrap() + 1.0).abs() < 1e-15);
    let (slope, icpt) = ols(&[1.0, 2.0, 3.0, 4.0], &[3.0, 5.0, 7.0, 9.0]).unwrap();
    assert!((slope - 2.0).abs() < 1e-15 && (icpt - 1.0).abs() < 1e-15);
    assert!(ols(&[1.0, 1.0], &[0.0, 1.0]).is_err());
}

#[test]
fn median_cases() {
    assert_eq!(median_with_se(&[5.0, 1.0, 3.0]).unwrap().0, 3.0);
    assert_eq!(median_with_se(&[4.0, 1.0, 3.0, 2.0]).unwrap().0, 2.5);
    assert_eq!(median_with_se(&[0.0; 100]).unwrap(), (0.0, 0.0));
    // Uniform(0,1): SE of the median ≈ 1/(2√M).
    let m = 10_000;
    let mut rng = substream(3, &[1]);
    let u: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
    let (_, se) = median_with_se(&u).unwrap();
    assert!((se * 2.0 * libm::sqrt(m as f64) - 1.0).abs() < 0.15, "{se}");
}

#[test]
fn ecf_distance_under_the_null() {
    let p = StableParams::new(1.3, 1.0, 0.4, 0.0).unwrap();
    let m = 10_000;
    for seed in 0..3 {
        let d = ecf_distance(&draws(&p, m, seed), &p, &default_grid()).unwrap();
        assert!(d < 4.0 / libm::sqrt(m as f64), "{d}");
    }
    assert!(ecf_distance(&[1.0], &p, &[]).is_err());
}

#[test]
fn ecf_distance_of_a_point_mass() {
    let (alpha, sigma) = (0.8, 1.5);
    let p = StableParams::symmetric(alpha, sigma).unwrap();
    let d = ecf_distance(&[0.0; 200], &p, &default_grid()).unwrap();
    let bound = 1.0 - libm::exp(-libm::pow(sigma * 2.0, alpha));
    assert!(d >= bound - 1e-15, "{d} < {bound}");
}

#[test]
fn limit_targets() {
    let ln2 = core::f64::consts::LN_2;
    let t = LimitTarget::new(Regime::SkewedSub1 { beta: 0.5 }, 0.7).unwrap();
    assert!((t.params.dispersion() - ln2).abs() < 1e-14);
    assert_eq!(t.params.beta, 0.5);
    let t = LimitTarget::new(Regime::Symmetric, 1.4).unwrap();
    assert!((t.params.dispersion() - 2.0 * ln2).abs() < 1e-14);
    assert_eq!(t.params.beta, 0.0);
    let t = LimitTarget::new(Regime::SkewedSuper1 { beta: 1.0 }, 1.4).unwrap();
    assert!((t.params.dispersion() - ln2).abs() < 1e-14);
    assert!(LimitTarget::new(Regime::SkewedSuper1 { beta: 1.0 }, 1.0).is_err());
}

#[test]
fn middle_dispersion_is_a_partial_harmonic_sum() {
    let direct: f64 = (21..=40).map(|k| 1.0 / k as f64).sum();
    let d = middle_dispersion(1 << 20, 0.5);
    assert!((d - direct).abs() < 1e-15);
    assert!((d - 0.680803).abs() < 1e-6);
    // ∫ bounds: ln((m+1)/(s+1)) ≤ Σ_{s<k≤m} 1/k ≤ ln(m/s).
    for (n, a) in [(1u64 << 12, 0.5), (1 << 20, 1.4), (1 << 30, 0.7)] {
        let (_, s, m) = band_edges(n, a);
        let d = middle_dispersion(n, a);
        assert!(d >= libm::log((m + 1) as f64 / (s + 1) as f64) && d <= libm::log(m as f64 / s as f64));
    }
}

#[test]
fn exact_aggregate_matches_its_law() {
    let th = Thresholds::default();
    let r = exact_stability_check(1 << 20, 0.5, 10_000, 17, &th, &SerialExecutor).unwrap();
    assert!(r.pass, "{r:?}");
    assert!((r.threshold - 0.04).abs() < 1e-15);
    assert!(exact_stability_check(1 << 10, 1.0, 100, 1, &th, &SerialExecutor).is_err());
    // n = 2, α = 1.4 has no middle rows.
    assert!(exact_stability_check(2, 1.4, 100, 1, &th, &SerialExecutor).is_err());
}

#[test]
fn exact_aggregate_increments_are_independent_and_self_similar() {
    let th = Thresholds::default();
    let (n, a, m) = (1u64 << 12, 1.4, 4000);
    let bp = [0.0, 0.5, 1.0];
    let marks = exact_aggregate_marks(n, a, &bp, m, 5, &SerialExecutor).unwrap();
    let law = StableParams::new(a, libm::pow(middle_dispersion(n, a), 1.0 / a), 1.0, 0.0).unwrap();
    let thr = th.ecf_coef / libm::sqrt(m as f64);
    let rs = increment_tests("x", &marks, n, &bp, &law, thr, &th).unwrap();
    assert_eq!(rs.len(), 3);
    assert!(rs.iter().all(|r| r.pass), "{rs:?}");
    let single = increment_tests(
        "x",
        &marks.iter().map(|v| vec![0.0, v[2]]).collect::<Vec<_>>(),
        n,
        &[0.0, 1.0],
        &law,
        thr,
        &th,
    )
    .unwrap();
    assert!(!single[0].applicable && single[0].pass);
    assert!(increment_tests("x", &marks, 4, &[0.0, 0.1, 1.0], &law, thr, &th).is_err());
}

#[test]
fn fclt_on_the_x_level_reduces_to_the_exact_check() {
    let th = Thresholds::default();
    let a = 0.5;
    let m = 4000;
    let ladder = [1u64 << 12, 1 << 16, 1 << 20];
    let samples: Vec<Vec<f64>> = ladder
        .iter()
        .map(|n| {
            exact_aggregate_marks(*n, a, &[0.0, 1.0], m, 9, &SerialExecutor).unwrap().iter().map(|v| v[1]).collect()
        })
        .collect();
    // Against each rung's exact law the distances are pure noise.
    for (n, s) in ladder.iter().zip(&samples) {
        let law = StableParams::new(a, libm::pow(middle_dispersion(*n, a), 1.0 / a), 1.0, 0.0).unwrap();
        assert!(ecf_distance(s, &law, &default_grid()).unwrap() < th.ecf_coef / libm::sqrt(m as f64));
    }
    let target = LimitTarget::new(Regime::SkewedSub1 { beta: 1.0 }, a).unwrap();
    let rungs: Vec<Rung<'_>> = ladder.iter().zip(&samples).map(|(n, s)| Rung { n: *n, samples: s }).collect();
    let [trend, cap] = fclt_marginal_test("x", &rungs, &target, &th).unwrap();
    assert!(trend.pass && cap.pass, "{trend:?} {cap:?}");
    assert_eq!(trend.trend.len(), 3);
    assert!(fclt_marginal_test("x", &rungs[..1], &target, &th).is_err());
}

#[test]
fn scaling_keeps_decisions() {
    let th = Thresholds::default();
    let p = StableParams::new(1.5, 0.8, 0.3, 0.0).unwrap();
    let m = 4000;
    let x = draws(&p, m, 21);
    let thr = th.ecf_coef / libm::sqrt(m as f64);
    let base = ecf_distance(&x, &p, &default_grid()).unwrap() <= thr;
    for c in [0.5, 2.0] {
        let y: Vec<f64> = x.iter().map(|v| c * v).collect();
        let q = scale_shift(&p, c, 0.0).unwrap();
        assert_eq!(ecf_distance(&y, &q, &default_grid()).unwrap() <= thr, base);
    }
    assert!(base);
}

#[test]
fn skewness_mirror_and_symmetric_imaginary_part() {
    let bp = [0.0, 1.0];
    let run = |regime: Regime, alpha: f64, m: usize| {
        let model = CocycleModel::new(CocycleConfig::new(regime, alpha, 1 << 10).unwrap()).unwrap();
        ensemble_run(&model, m, 8, &bp, false, &SerialExecutor).unwrap().w1()
    };
    let m = 1000;
    let up = run(Regime::SkewedSub1 { beta: 1.0 }, 0.7, m);
    let down: Vec<f64> = run(Regime::SkewedSub1 { beta: -1.0 }, 0.7, m).iter().map(|v| -v).collect();
    let d = ecf_distance_two_sample(&up, &down, &default_grid()).unwrap();
    assert!(d < 2.0 * 4.0 / libm::sqrt(m as f64), "{d}");
    let sym = run(Regime::Symmetric, 1.4, m);
    assert!(ecf_imag_max(&sym, &default_grid()).unwrap() < 4.0 / libm::sqrt(m as f64));
}

#[test]
fn large_band_frequency_is_below_the_union_bound() {
    let (n, alpha, m) = (1u64 << 8, 0.7, 4000);
    let model = CocycleModel::new(CocycleConfig::new(Regime::SkewedSub1 { beta: 1.0 }, alpha, n).unwrap()).unwrap();
    let e = ensemble_run(&model, m, 4, &[0.0, 1.0], false, &SerialExecutor).unwrap();
    let freq = e.replicas.iter().filter(|r| r.large_nonzero).count() as f64 / m as f64;
    let num = NumericConfig::default();
    let br = band_ranges(n, alpha, 1e-3, &num).unwrap();
    let mass: f64 = br.rows(Band::Large).map(|k| nonzero_prob(RowIndex::new(k).unwrap(), alpha, &num).unwrap()).sum();
    let bound = n as f64 * mass + br.truncated_mass;
    assert!(freq > 0.0 && freq < bound, "{freq} vs {bound}");
}

#[test]
fn empty_bands_give_zero_statistics() {
    let th = Thresholds::default();
    // n = 2: s_edge = 0 at α = 0.7, so the small band is empty.
    let model = CocycleModel::new(CocycleConfig::new(Regime::SkewedSub1 { beta: 1.0 }, 0.7, 2).unwrap()).unwrap();
    let e = ensemble_run(&model, 50, 1, &[0.0, 1.0], false, &SerialExecutor).unwrap();
    let sups: Vec<f64> = e.replicas.iter().map(|r| r.sup_small).collect();
    assert_eq!(median_with_se(&sups).unwrap().0, 0.0);
    // n = 2 at α = 1.4 has no middle rows: both routes are identically 0.
    let model = CocycleModel::new(CocycleConfig::new(Regime::SkewedSuper1 { beta: 1.0 }, 1.4, 2).unwrap()).unwrap();
    let r = equal_distribution_test(&model, 100, 1, &th, &SerialExecutor).unwrap();
    assert_eq!(r.statistic, 0.0);
    assert!(r.pass);
}

#[test]
fn band_vanishing_needs_three_rungs() {
    let th = Thresholds::default();
    let model = CocycleModel::new(CocycleConfig::new(Regime::SkewedSub1 { beta: 1.0 }, 0.7, 64).unwrap()).unwrap();
    let e = ensemble_run(&model, 10, 1, &[0.0, 1.0], false, &SerialExecutor).unwrap();
    assert!(band_vanishing_test("x", &[&e, &e], &th).is_err());
    let [s, l] = band_vanishing_test("x", &[&e, &e, &e], &th).unwrap();
    assert!(s.pass && l.pass);
    assert_eq!(s.statistic, 0.0);
}

#[test]
fn equal_distribution_two_routes_agree() {
    let th = Thresholds::default();
    let model = CocycleModel::new(CocycleConfig::new(Regime::SkewedSub1 { beta: 1.0 }, 0.7, 1 << 6).unwrap()).unwrap();
    let r = equal_distribution_test(&model, 4000, 2, &th, &SerialExecutor).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn appendix_filters_and_validates() {
    let th = Thresholds::default();
    let num = NumericConfig::default();
    let mut cfg = AppendixConfig::default_for(0.7, 1);
    cfg.samples = 20_000;
    cfg.doubling_samples = 20_000;
    cfg.r_grid = vec![0.7, 1.0];
    let rs = appendix_moment_suite(&cfg, &th, &num).unwrap();
    assert!(rs.iter().any(|r| !r.applicable));
    // Tail, one family above α and the second moment, each with a slope and a doubling result.
    assert_eq!(rs.iter().filter(|r| r.applicable).count(), 6);
    cfg.k_grid.truncate(4);
    assert!(appendix_moment_suite(&cfg, &th, &num).is_err());
}

#[test]
fn result_invariants() {
    let r = TestResult::new("a", f64::NAN, 1.0, Metadata::default());
    assert!(!r.pass && r.gating_failure());
    let r = TestResult::new("a", 1.0, 1.0, Metadata::default());
    assert!(r.pass);
    let d = TestResult::diagnostic("d", 1e9, Metadata::default());
    assert!(d.pass && !d.gating_failure() && d.statistic <= d.threshold);
}

#[test]
fn calibration_supports_the_default_coefficient() {
    let p = StableParams::new(0.7, 1.0, 1.0, 0.0).unwrap();
    let c = calibrate_ecf_coef(&p, 1000, 200, 0.99, 4, &SerialExecutor).unwrap();
    assert!(c > 1.0 && c < Thresholds::default().ecf_coef, "{c}");
}

#[test]
fn closed_forms_and_truncation_bound_are_exact() {
    let th = Thresholds::default();
    let r = closed_form_test(200, 64, 256, 3, &th).unwrap();
    assert!(r.pass && r.metadata.values["boundary_instances"] > 0.0);
    let r = truncation_bound_test(0.7, 6, 10_000, 3, &SerialExecutor).unwrap();
    assert_eq!(r.statistic, 0.0);
}
