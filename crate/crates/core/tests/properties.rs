use std::f64::consts::PI;

use num_rational::Ratio;
use proptest::prelude::*;
use statrs::function::erf::erfc;

use tpgabor_core::lattice::{reduce, select_perturbation};
use tpgabor_core::window::tp_samples_matrix;
use tpgabor_core::zak::zak;
use tpgabor_core::TpWindow;

fn window_strategy() -> impl Strategy<Value = TpWindow> {
    prop_oneof![
        (0.2f64..4.0).prop_map(|g| TpWindow::gaussian(g).unwrap()),
        (0.3f64..3.0).prop_map(|g| TpWindow::one_sided_exp(g).unwrap()),
        (0.3f64..3.0).prop_map(|a| TpWindow::sech(a).unwrap()),
        (0.3f64..3.0).prop_map(|l| TpWindow::two_sided_exp(l).unwrap()),
        prop::collection::vec(prop_oneof![0.3f64..1.5, -1.5f64..-0.3], 2..5)
            .prop_map(|nus| TpWindow::finite_product(0.0, 0.0, nus, 1.0).unwrap()),
    ]
}

/// `n` strictly increasing points in `[-3, 3]` with gaps of at least `1e-3`.
fn increasing(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-3f64..1.0, n).prop_map(|gaps| {
        let mut t = -3.0;
        gaps.iter()
            .map(|g| {
                t += g * 6.0 / gaps.len() as f64;
                t
            })
            .collect()
    })
}

fn nodes() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=6).prop_flat_map(|n| (increasing(n), increasing(n)))
}

/// Exponentially modified normal density with mean 0, variance `s2` and
/// exponential rate `lambda`.
fn emg(x: f64, s2: f64, lambda: f64) -> f64 {
    let s = s2.sqrt();
    0.5 * lambda * (0.5 * lambda * (lambda * s2 - 2.0 * x)).exp() * erfc((lambda * s2 - x) / (2f64.sqrt() * s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn sampled_minors_are_nonnegative(w in window_strategy(), (xs, ys) in nodes()) {
        let m = tp_samples_matrix(&w, &xs, &ys).unwrap().entries;
        let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let det = m.determinant();
        prop_assert!(det >= -1e-10 * scale.powi(xs.len() as i32), "det {det:e} scale {scale:e}");
    }

    #[test]
    fn decay_envelope_dominates(w in window_strategy(), t in -40.0f64..40.0) {
        prop_assert!(w.evaluate(t).abs() <= w.decay().envelope(t) * (1.0 + 1e-12));
    }

    #[test]
    fn zak_quasi_periodicity(w in window_strategy(), p in 1u32..4, x in -2.0f64..2.0, xi in 0.0f64..1.0) {
        let p = p as f64;
        let tol = 1e-10;
        let base = zak(&w, p, x, xi, tol).unwrap();
        let shifted = zak(&w, p, x + p, xi, tol).unwrap();
        let (c, s) = ((2.0 * PI * p * xi).cos(), (2.0 * PI * p * xi).sin());
        let (re, im) = (c * base.re - s * base.im, s * base.re + c * base.im);
        prop_assert!((shifted.re - re).hypot(shifted.im - im) < 2.0 * tol);
        let freq = zak(&w, p, x, xi + 1.0 / p, tol).unwrap();
        prop_assert!((freq.re - base.re).hypot(freq.im - base.im) < 2.0 * tol);
    }

    #[test]
    fn perturbations_stay_on_the_lattice(
        q in 2i64..=50,
        num in 1i64..50,
        beta_num in 1i64..4,
        beta_den in 1i64..4,
        x in -1.0f64..1.0,
        x0 in 0.0f64..1.0,
        eps_frac in 0.05f64..0.95,
    ) {
        // alpha * beta = num/q reduced, kept below 1
        let ab = Ratio::new(num % q + if num % q == 0 { 1 } else { 0 }, q);
        prop_assume!(ab < Ratio::from_integer(1));
        let beta = Ratio::new(beta_num, beta_den);
        let lat = reduce(ab / beta, beta).unwrap();
        prop_assert_eq!(lat.alpha_ratio(), ab);
        let eps = eps_frac * (1.0 - lat.alpha()) / 2.0;
        let m = tpgabor_core::lattice::choose_m(x0);
        let pert = select_perturbation(&lat, x, x0, eps, m).unwrap();
        prop_assert_eq!(pert.period(), lat.p() as usize);
        prop_assert!(pert.js.windows(2).all(|w| w[0] < w[1]));
        pert.check(&lat, 3 * lat.p() as i64).unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadrature_matches_partial_fractions(
        nus in prop::collection::vec(prop_oneof![0.4f64..1.2, -1.2f64..-0.4], 4..6),
        t in -4.0f64..4.0,
    ) {
        let w = TpWindow::finite_product(0.0, 0.0, nus, 1.0).unwrap();
        let quad = w.evaluate_by_quadrature(t).unwrap();
        prop_assert!((quad - w.evaluate(t)).abs() < 1e-9, "{quad} vs {}", w.evaluate(t));
    }

    #[test]
    fn gaussian_factor_matches_modified_normal(
        gamma in 0.5f64..3.0,
        nu in prop_oneof![0.3f64..2.0, -2.0f64..-0.3],
        t in -4.0f64..4.0,
    ) {
        let w = TpWindow::finite_product(gamma, 0.0, vec![nu], 1.0).unwrap();
        let s2 = gamma / (2.0 * PI * PI);
        let lambda = 1.0 / nu.abs();
        // the factor e^{-2πiνξ} moves the exponential onset back to the origin
        let arg = if nu > 0.0 { t - nu } else { nu - t };
        let oracle = emg(arg, s2, lambda);
        prop_assert!((w.evaluate(t) - oracle).abs() < 1e-10, "{} vs {oracle}", w.evaluate(t));
    }
}
