use num_complex::Complex64;
use proptest::prelude::*;

use couette_lab::bench::{fit_decay, DecayModel};
use couette_lab::grid::{Grid, SpectralField};
use couette_lab::linprop::{exact_evolve_sheared, laplacian_l, stream_function, viscous_integral};
use couette_lab::nlsolve::{checkpoint_bytes, checkpoint_from_bytes, SimState};

fn field(g: Grid, seed: u64) -> SpectralField {
    let mut f = SpectralField::from_fn(g, |k, eta| {
        let h = (seed as f64 * 0.618 + k as f64 * 1.3 + eta * 0.7).sin();
        let r = k.unsigned_abs() as f64 + eta.abs();
        Complex64::new(h * (-0.5 * r).exp(), (1.0 - h) * (-0.5 * r).exp())
    });
    f.enforce_hermitian();
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn viscous_integral_is_additive(k in -40i64..40, eta in -300.0f64..300.0,
                                    a in 0.0f64..50.0, b in 0.0f64..50.0, c in 0.0f64..50.0) {
        let mut ts = [a, b, c];
        ts.sort_by(f64::total_cmp);
        let whole = viscous_integral(k, eta, ts[0], ts[2]);
        let parts = viscous_integral(k, eta, ts[0], ts[1]) + viscous_integral(k, eta, ts[1], ts[2]);
        prop_assert!((whole - parts).abs() <= 1e-11 * whole.max(1.0));
        prop_assert!(whole >= 0.0);
    }

    #[test]
    fn sheared_evolution_never_grows(seed in 0u64..1000, t in 0.0f64..40.0, nu in 0.0f64..1e-2) {
        let g = Grid::new(6, 12, 1.5).unwrap();
        let w = field(g, seed);
        let e = exact_evolve_sheared(&w, t, nu).unwrap();
        prop_assert!(e.l2_norm() <= w.l2_norm() * (1.0 + 1e-14));
        prop_assert!(e.hermitian_defect() <= 1e-15 * w.max_abs());
    }

    #[test]
    fn stream_function_inverts_sheared_laplacian(seed in 0u64..1000, t in 0.0f64..20.0) {
        let g = Grid::new(5, 10, 2.0).unwrap();
        let mut w = field(g, seed);
        w.set(0, 0, Complex64::new(0.0, 0.0));
        let back = laplacian_l(&stream_function(&w, t), t);
        prop_assert!((&back - &w).max_abs() <= 1e-13 * w.max_abs());
    }

    #[test]
    fn checkpoints_round_trip(seed in 0u64..1000, t in 0.0f64..1e3, steps in 0u64..1_000_000) {
        let g = Grid::new(3, 7, 0.5).unwrap();
        let st = SimState { omega: field(g, seed), t, steps, max_mean_defect: 1e-17 };
        prop_assert_eq!(checkpoint_from_bytes(&checkpoint_bytes(&st)).unwrap(), st);
    }

    #[test]
    fn exponential_fit_recovers_exact_parameters(c in 0.1f64..10.0, rate in 0.01f64..5.0, nu in 1e-6f64..1e-2) {
        let times: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let vals: Vec<f64> = times.iter().map(|t| c * (-rate * nu.cbrt() * t).exp()).collect();
        let fit = fit_decay(&times, &vals, DecayModel::ExpNu13, (5.0, 39.0), nu).unwrap();
        prop_assert!((fit.rate - rate).abs() <= 1e-8 * rate);
        prop_assert!((fit.big_c - c).abs() <= 1e-8 * c);
    }
}
