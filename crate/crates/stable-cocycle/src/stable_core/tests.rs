use super::*;
use crate::rng::substream;
use core::f64::consts::PI;
use proptest::prelude::*;

fn cfg() -> NumericConfig {
    NumericConfig::default()
}

#[test]
fn cf_at_zero_is_one() {
    let p = StableParams::new(0.7, 2.0, -0.3, 1.5).unwrap();
    assert_eq!(cf(&p, 0.0), Complex64::new(1.0, 0.0));
}

#[test]
fn cf_cauchy_at_one() {
    let p = StableParams::symmetric(1.0, 1.0).unwrap();
    let v = cf(&p, 1.0);
    assert!((v.re - (-1.0f64).exp()).abs() < 1e-15);
    assert!(v.im.abs() < 1e-15);
}

#[test]
fn cf_half_totally_skewed() {
    // exp(−|θ|^α (1 − iβ tan(πα/2))) at θ = 1, α = 1/2, β = 1.
    let p = StableParams::new(0.5, 1.0, 1.0, 0.0).unwrap();
    let v = cf(&p, 1.0);
    let want = Complex64::new(-1.0, 1.0).exp();
    assert!((v - want).norm() < 1e-14, "{v} vs {want}");
}

#[test]
fn alpha_two_drops_skewness() {
    let p = StableParams::new(2.0, 1.0, 0.8, 0.0).unwrap();
    assert_eq!(p.beta, 0.0);
}

#[test]
fn rejects_bad_params() {
    assert!(StableParams::new(0.0, 1.0, 0.0, 0.0).is_err());
    assert!(StableParams::new(2.1, 1.0, 0.0, 0.0).is_err());
    assert!(StableParams::new(1.5, 0.0, 0.0, 0.0).is_err());
    assert!(StableParams::new(1.5, 1.0, 1.5, 0.0).is_err());
    assert!(StableParams::new(f64::NAN, 1.0, 0.0, 0.0).is_err());
}

#[test]
fn cauchy_cdf_closed_form() {
    let p = StableParams::symmetric(1.0, 1.0).unwrap();
    for x in [-30.0, -1.0, 0.0, 0.3, 1.0, 7.0, 1e5] {
        let want = 0.5 + libm::atan(x) / PI;
        assert!((p.cdf(x, &cfg()).unwrap() - want).abs() < 1e-12);
    }
    assert!((p.cdf(1.0, &cfg()).unwrap() - 0.75).abs() < 1e-12);
}

#[test]
fn gaussian_cdf_closed_form() {
    let p = StableParams::symmetric(2.0, 1.0).unwrap();
    // N(0, 2): P(X ≤ √2) = Φ(1).
    let v = p.cdf(core::f64::consts::SQRT_2, &cfg()).unwrap();
    assert!((v - 0.841_344_746_068_542_9).abs() < 1e-12);
}

#[test]
fn levy_cdf_closed_form() {
    // S_{1/2}(1, 1, 0) is Lévy with scale 1: P(X ≤ x) = erfc(√(1/(2x))).
    let p = StableParams::new(0.5, 1.0, 1.0, 0.0).unwrap();
    for x in [0.05, 0.3, 1.0, 4.0, 50.0, 3e3, 1e6, 1e9] {
        let want = libm::erfc(libm::sqrt(0.5 / x));
        let got = p.cdf(x, &cfg()).unwrap();
        assert!((got - want).abs() < 1e-10, "x={x}: {got} vs {want}");
        let sf = p.sf(x, &cfg()).unwrap();
        let want_sf = libm::erf(libm::sqrt(0.5 / x));
        assert!((sf / want_sf - 1.0).abs() < 1e-7, "x={x}: sf {sf} vs {want_sf}");
    }
    assert_eq!(p.cdf(-1.0, &cfg()).unwrap(), 0.0);
}

#[test]
fn symmetric_median_is_zero() {
    for alpha in [0.4, 0.9, 1.0, 1.3, 1.8, 2.0] {
        let p = StableParams::symmetric(alpha, 1.7).unwrap();
        assert!((p.cdf(0.0, &cfg()).unwrap() - 0.5).abs() < 1e-12, "alpha={alpha}");
    }
}

#[test]
fn density_integrates_to_cdf() {
    for (alpha, beta) in [(0.7, 0.5), (1.4, -0.6), (1.0, 0.8)] {
        let p = StableParams::new(alpha, 1.0, beta, 0.0).unwrap();
        let mass = crate::quad::integrate1(
            |x| p.pdf(x, &cfg()).unwrap(),
            -1.0,
            2.0,
            &crate::quad::QuadConfig { rel_tol: 1e-9, abs_tol: 1e-13, max_intervals: 500 },
        )
        .unwrap();
        let diff = p.cdf(2.0, &cfg()).unwrap() - p.cdf(-1.0, &cfg()).unwrap();
        assert!((mass - diff).abs() < 1e-8, "alpha={alpha} beta={beta}: {mass} vs {diff}");
    }
}

#[test]
fn tail_series_matches_quadrature_at_switch() {
    let c = cfg();
    for (alpha, beta) in [(0.6, 1.0), (0.8, 0.0), (1.3, 1.0), (1.7, -0.5)] {
        let z = c.tail_threshold;
        let below = dist::standard_eval(alpha, beta, z * (1.0 - 1e-9), &c).unwrap();
        let above = dist::standard_eval(alpha, beta, z * (1.0 + 1e-9), &c).unwrap();
        assert!((below.sf / above.sf - 1.0).abs() < 1e-6, "alpha={alpha}: {} vs {}", below.sf, above.sf);
        assert!((below.pdf / above.pdf - 1.0).abs() < 1e-5);
    }
}

#[test]
fn quantile_round_trip() {
    for alpha in [0.5, 0.7, 1.0, 1.4, 1.9] {
        for beta in [-1.0, 0.0, 1.0] {
            let p = StableParams::new(alpha, 1.3, beta, 0.2).unwrap();
            for i in 1..=99 {
                let q = i as f64 / 100.0;
                let x = p.quantile(q, &cfg()).unwrap();
                let back = p.cdf(x, &cfg()).unwrap();
                assert!((back - q).abs() < 1e-6, "alpha={alpha} beta={beta} q={q}: {back}");
            }
        }
    }
}

#[test]
fn quantile_rejects_out_of_range() {
    let p = StableParams::symmetric(1.5, 1.0).unwrap();
    for q in [0.0, 1.0, -0.1, f64::NAN] {
        assert!(matches!(p.quantile(q, &cfg()), Err(Error::InvalidParameter(_))));
    }
}

#[test]
fn sampler_is_deterministic() {
    let p = StableParams::new(1.3, 1.0, 0.4, 0.0).unwrap();
    let a = sample(&p, &mut substream(5, &[1]));
    let b = sample(&p, &mut substream(5, &[1]));
    assert_eq!(a.to_bits(), b.to_bits());
}

#[test]
fn gaussian_sample_variance() {
    let p = StableParams::symmetric(2.0, 1.0).unwrap();
    let mut rng = substream(11, &[1]);
    let n = 1_000_000;
    let (mut s1, mut s2, mut s4) = (0.0, 0.0, 0.0);
    for _ in 0..n {
        let x = sample(&p, &mut rng);
        s1 += x;
        s2 += x * x;
        s4 += x * x * x * x;
    }
    let nf = n as f64;
    let var = s2 / nf - (s1 / nf).powi(2);
    // Var of the sample second moment: (E X⁴ − (E X²)²)/n = (12 − 4)/n.
    let se = libm::sqrt((s4 / nf - (s2 / nf).powi(2)) / nf);
    assert!((var - 2.0).abs() < 3.0 * se, "var={var} se={se}");
}

#[test]
fn cauchy_sample_cdf_at_one() {
    let p = StableParams::symmetric(1.0, 1.0).unwrap();
    let mut rng = substream(12, &[1]);
    let n = 100_000;
    let hits = (0..n).filter(|_| sample(&p, &mut rng) <= 1.0).count() as f64;
    let se = libm::sqrt(0.75 * 0.25 / n as f64);
    assert!((hits / n as f64 - 0.75).abs() < 3.0 * se);
}

#[test]
fn sampler_matches_cdf_ks() {
    for (alpha, beta) in [(0.6, 1.0), (1.0, 0.5), (1.5, -0.7)] {
        let p = StableParams::new(alpha, 1.0, beta, 0.0).unwrap();
        let mut rng = substream(13, &[alpha.to_bits()]);
        let n = 100_000;
        let mut xs: alloc::vec::Vec<f64> = (0..n).map(|_| sample(&p, &mut rng)).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut d: f64 = 0.0;
        // Evaluate the CDF on a thinned set of order statistics.
        for i in (0..n).step_by(97) {
            let f = p.cdf(xs[i], &cfg()).unwrap();
            d = d.max((f - i as f64 / n as f64).abs()).max((f - (i + 1) as f64 / n as f64).abs());
        }
        // 99% KS band.
        assert!(d < 1.63 / libm::sqrt(n as f64), "alpha={alpha}: D={d}");
    }
}

#[test]
fn sum_of_two_unit_symmetric() {
    for alpha in [0.5, 1.0, 1.5] {
        let p = StableParams::symmetric(alpha, 1.0).unwrap();
        let s = sum_independent(&p, &p).unwrap();
        assert!((s.sigma - libm::pow(2.0, 1.0 / alpha)).abs() < 1e-14);
        assert_eq!(s.beta, 0.0);
    }
}

#[test]
fn skew_combination_recovers_beta() {
    // ((1+β)/2)^{1/α} W − ((1−β)/2)^{1/α} W′ with W, W′ ~ S_α(s, 1, 0).
    let (alpha, s, beta) = (1.3, libm::pow(core::f64::consts::LN_2, 1.0 / 1.3), 0.4);
    let w = StableParams::new(alpha, s, 1.0, 0.0).unwrap();
    let a = scale_shift(&w, libm::pow((1.0 + beta) / 2.0, 1.0 / alpha), 0.0).unwrap();
    let b = scale_shift(&w, -libm::pow((1.0 - beta) / 2.0, 1.0 / alpha), 0.0).unwrap();
    let c = sum_independent(&a, &b).unwrap();
    assert!((c.sigma - s).abs() < 1e-14);
    assert!((c.beta - beta).abs() < 1e-14);
    assert_eq!(c.mu, 0.0);
}

#[test]
fn scale_shift_identity_and_errors() {
    let p = StableParams::new(1.0, 2.0, 0.3, 0.5).unwrap();
    assert_eq!(scale_shift(&p, 1.0, 0.0).unwrap(), p);
    assert!(matches!(scale_shift(&p, -1.0, 0.0), Err(Error::Unsupported(_))));
    let q = StableParams::symmetric(1.2, 1.0).unwrap();
    assert!(sum_independent(&p, &q).is_err());
}

#[test]
fn alpha_one_scaling_shift_matches_cf() {
    // aY has CF φ(aθ); compare against the parameters from scale_shift.
    let p = StableParams::new(1.0, 1.5, 0.7, 0.2).unwrap();
    let a = 3.0;
    let q = scale_shift(&p, a, 0.0).unwrap();
    for theta in [-2.0, -0.3, 0.5, 1.7] {
        assert!((cf(&p, a * theta) - cf(&q, theta)).norm() < 1e-12);
    }
}

#[test]
fn symmetric_first_moment_vanishes() {
    let p = StableParams::symmetric(1.5, 1.0).unwrap();
    let w = TruncationWindow::new(f64::NEG_INFINITY, f64::INFINITY).unwrap();
    let m = p.truncated_moment(1.0, &w, MomentMethod::Quadrature, &cfg()).unwrap();
    assert!(m.value.abs() < 1e-8, "{}", m.value);
}

#[test]
fn first_moment_of_skewed_law_is_mu() {
    let p = StableParams::new(1.5, 1.0, 1.0, 0.25).unwrap();
    let w = TruncationWindow::new(f64::NEG_INFINITY, f64::INFINITY).unwrap();
    let m = p.truncated_moment(1.0, &w, MomentMethod::Quadrature, &cfg()).unwrap();
    assert!((m.value - 0.25).abs() < 1e-7, "{}", m.value);
}

#[test]
fn cauchy_truncated_second_moment() {
    // E[Y² 1{|Y| ≤ K}] = (2/π)(K − atan K) for the standard Cauchy law.
    let p = StableParams::symmetric(1.0, 1.0).unwrap();
    for k in [1.0, 20.0, 3e4] {
        let w = TruncationWindow::new(-k, k).unwrap();
        let m = p.truncated_moment(2.0, &w, MomentMethod::Quadrature, &cfg()).unwrap();
        let want = 2.0 / PI * (k - libm::atan(k));
        assert!((m.value / want - 1.0).abs() < 1e-7, "K={k}: {} vs {want}", m.value);
    }
}

#[test]
fn levy_tail_probability_far_out() {
    // P(Y ≥ K) for Lévy uses the series beyond the switch.
    let p = StableParams::new(0.5, 1.0, 1.0, 0.0).unwrap();
    let k = 1e7;
    let w = TruncationWindow::above(k).unwrap();
    let m = p.truncated_moment(0.0, &w, MomentMethod::Quadrature, &cfg()).unwrap();
    let want = libm::erf(libm::sqrt(0.5 / k));
    assert!((m.value / want - 1.0).abs() < 1e-6);
}

#[test]
fn quadrature_and_monte_carlo_agree() {
    let p = StableParams::new(0.7, 1.0, 1.0, 0.0).unwrap();
    let w = TruncationWindow::new(0.0, 16.0).unwrap();
    let q = p.truncated_moment(0.5, &w, MomentMethod::Quadrature, &cfg()).unwrap();
    let mc = p.truncated_moment(0.5, &w, MomentMethod::MonteCarlo { samples: 200_000, seed: 3 }, &cfg()).unwrap();
    assert!((q.value - mc.value).abs() < 3.0 * mc.std_error, "{} vs {} ± {}", q.value, mc.value, mc.std_error);
}

#[test]
fn importance_weights_are_unbiased_for_tail_mass() {
    let p = StableParams::new(1.4, 1.0, 1.0, 0.0).unwrap();
    let k = 500.0;
    let exact = p.sf(k, &cfg()).unwrap();
    let w = TruncationWindow::above(k).unwrap();
    let mc = p.truncated_moment(0.0, &w, MomentMethod::MonteCarlo { samples: 200_000, seed: 9 }, &cfg()).unwrap();
    assert!((mc.value - exact).abs() < 3.5 * mc.std_error, "{} vs {exact} ± {}", mc.value, mc.std_error);
    // The proposal should beat plain sampling by a wide margin.
    let plain_se = libm::sqrt(exact * (1.0 - exact) / 200_000.0);
    assert!(mc.std_error < 0.3 * plain_se);
}

#[test]
fn divergent_moments_are_rejected() {
    let p = StableParams::new(1.4, 1.0, 1.0, 0.0).unwrap();
    let up = TruncationWindow::above(1.0).unwrap();
    assert!(matches!(p.truncated_moment(1.5, &up, MomentMethod::Quadrature, &cfg()), Err(Error::DivergentMoment(_))));
    // β = 1 with α > 1 has a light left tail, so the lower side converges.
    let low = TruncationWindow::below(1.0).unwrap();
    assert!(p.truncated_moment(2.0, &low, MomentMethod::Quadrature, &cfg()).is_ok());
    let sym = StableParams::symmetric(1.4, 1.0).unwrap();
    assert!(matches!(
        sym.truncated_moment(2.0, &low, MomentMethod::Quadrature, &cfg()),
        Err(Error::DivergentMoment(_))
    ));
    assert!(matches!(
        sym.truncated_moment(0.5, &low, MomentMethod::Quadrature, &cfg()),
        Err(Error::InvalidParameter(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cf_modulus(alpha in 0.1f64..=2.0, sigma in 0.1f64..5.0, beta in -1.0f64..=1.0,
                  mu in -3.0f64..3.0, theta in -20.0f64..20.0) {
        let p = StableParams::new(alpha, sigma, beta, mu).unwrap();
        let want = libm::exp(-libm::pow(sigma * theta.abs(), alpha));
        prop_assert!((cf(&p, theta).norm() - want).abs() < 1e-12);
    }

    #[test]
    fn cdf_is_monotone(alpha in 0.3f64..=2.0, beta in -1.0f64..=1.0, x in -50.0f64..50.0, dx in 0.0f64..5.0) {
        let p = StableParams::new(alpha, 1.0, beta, 0.0).unwrap();
        let a = p.cdf(x, &cfg()).unwrap();
        let b = p.cdf(x + dx, &cfg()).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a - 1e-10);
        let e = p.eval(x, &cfg()).unwrap();
        prop_assert!((e.cdf + e.sf - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sums_commute_and_associate(alpha in 0.2f64..=2.0, s in prop::array::uniform3(0.1f64..4.0),
                                  b in prop::array::uniform3(-1.0f64..=1.0)) {
        let ps: alloc::vec::Vec<_> = (0..3).map(|i| StableParams::new(alpha, s[i], b[i], i as f64).unwrap()).collect();
        let ab = sum_independent(&ps[0], &ps[1]).unwrap();
        let ba = sum_independent(&ps[1], &ps[0]).unwrap();
        prop_assert!((ab.sigma - ba.sigma).abs() <= 1e-12 * ab.sigma);
        prop_assert!((ab.beta - ba.beta).abs() < 1e-12);
        let l = sum_independent(&ab, &ps[2]).unwrap();
        let r = sum_independent(&ps[0], &sum_independent(&ps[1], &ps[2]).unwrap()).unwrap();
        prop_assert!((l.dispersion() - r.dispersion()).abs() <= 1e-12 * l.dispersion());
        prop_assert!((l.beta - r.beta).abs() < 1e-12);
        prop_assert!((l.mu - r.mu).abs() < 1e-12);
    }

    #[test]
    fn scale_round_trip(alpha in 0.2f64..=2.0, sigma in 0.1f64..10.0, beta in -1.0f64..=1.0,
                        mu in -5.0f64..5.0, a in 0.01f64..100.0) {
        let p = StableParams::new(alpha, sigma, beta, mu).unwrap();
        let q = scale_shift(&scale_shift(&p, a, 0.0).unwrap(), 1.0 / a, 0.0).unwrap();
        prop_assert_eq!(q.alpha, p.alpha);
        prop_assert_eq!(q.beta, p.beta);
        prop_assert!((q.sigma - p.sigma).abs() <= 4.0 * f64::EPSILON * p.sigma);
        prop_assert!((q.mu - p.mu).abs() <= 1e-12 * (1.0 + p.mu.abs() + p.sigma));
    }
}
