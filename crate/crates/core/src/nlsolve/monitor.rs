//! Weighted energies and Cauchy-Kovalevskaya terms of a sheared-frame field.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::{l1, SpectralField};
use crate::weights::{iota, MultiplierEvaluator};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyDiagnostics {
    /// `||A f||^2`.
    pub a_sq: f64,
    /// `||A^gamma P_!= f||^2`.
    pub a_gamma_neq_sq: f64,
    /// `|lambda'| || |k,eta|^{s/2} A f||^2`.
    pub ck_lambda: f64,
    /// `sum (d_t w / w) |A f|^2`.
    pub ck_w: f64,
    /// `sum (d_t g / g) |A f|^2`.
    pub ck_g: f64,
    /// `sum (d_t m / m) |A f|^2`.
    pub ck_m: f64,
    /// `nu || |Delta_L|^{1/2} A f ||^2`.
    pub dissipation: f64,
}

/// Warm the weight-table cache for every `|iota(k, eta)|` on the grid.
pub fn prefetch_tables(ev: &MultiplierEvaluator, f: &SpectralField) {
    let mut keys: Vec<f64> = f.modes().map(|(k, _, eta, _)| iota(k, eta).abs()).collect();
    keys.sort_by(f64::total_cmp);
    keys.dedup();
    ev.prefetch(&keys);
}

pub fn energy_monitor(f: &SpectralField, t: f64, ev: &MultiplierEvaluator) -> EnergyDiagnostics {
    let slice = ev.at(t);
    let p = ev.params();
    let lambda_dot = p.lambda_dot(t).abs();
    let nu = p.nu;
    let d_eta = f.grid().d_eta();
    let modes: Vec<_> = f.modes().filter(|m| m.3.norm_sqr() > 0.0).collect();
    let parts: Vec<EnergyDiagnostics> = modes
        .par_iter()
        .map(|&(k, _, eta, c)| {
            let a = slice.a(k, eta);
            let log_c = c.norm().ln();
            let af = (2.0 * (log_c + a.log_value)).exp() * d_eta;
            let kf = k as f64;
            let shear = kf * kf + (eta - kf * t).powi(2);
            EnergyDiagnostics {
                a_sq: af,
                a_gamma_neq_sq: if k != 0 {
                    (2.0 * (log_c + slice.log_a_gamma(k, eta))).exp() * d_eta
                } else {
                    0.0
                },
                ck_lambda: lambda_dot * l1(k, eta).powf(p.s) * af,
                ck_w: a.dlog_w * af,
                ck_g: a.dlog_g * af,
                ck_m: a.dlog_m * af,
                dissipation: nu * shear * af,
            }
        })
        .collect();
    parts.into_iter().fold(EnergyDiagnostics::default(), |acc, d| EnergyDiagnostics {
        a_sq: acc.a_sq + d.a_sq,
        a_gamma_neq_sq: acc.a_gamma_neq_sq + d.a_gamma_neq_sq,
        ck_lambda: acc.ck_lambda + d.ck_lambda,
        ck_w: acc.ck_w + d.ck_w,
        ck_g: acc.ck_g + d.ck_g,
        ck_m: acc.ck_m + d.ck_m,
        dissipation: acc.dissipation + d.dissipation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::weights::MultiplierParams;
    use num_complex::Complex64;

    fn field(g: Grid) -> SpectralField {
        let mut f = SpectralField::from_fn(g, |k, eta| {
            let r = k.unsigned_abs() as f64 + eta.abs();
            Complex64::new((-2.0 * r).exp(), 0.2 * (-2.0 * r).exp())
        });
        f.set(0, 0, Complex64::new(0.0, 0.0));
        f.enforce_hermitian();
        f
    }

    #[test]
    fn zero_field_gives_zero() {
        let g = Grid::with_resolution(32, 32, 1.0).unwrap();
        let ev = MultiplierEvaluator::new(MultiplierParams::new(0.25, 1e-3).unwrap());
        assert_eq!(energy_monitor(&SpectralField::zeros(g), 3.0, &ev), EnergyDiagnostics::default());
    }

    #[test]
    fn ck_terms_nonnegative_over_time() {
        let g = Grid::with_resolution(48, 48, 2.0).unwrap();
        let f = field(g);
        for &beta in &[0.0, 0.25, 1.0 / 3.0] {
            let ev = MultiplierEvaluator::new(MultiplierParams::new(beta, 1e-3).unwrap());
            prefetch_tables(&ev, &f);
            for i in 0..40 {
                let d = energy_monitor(&f, 0.37 * i as f64, &ev);
                for v in [d.ck_lambda, d.ck_w, d.ck_g, d.ck_m, d.dissipation, d.a_sq, d.a_gamma_neq_sq] {
                    assert!(v >= 0.0 && v.is_finite());
                }
            }
        }
    }

    #[test]
    fn sobolev_limit_ck_lambda() {
        let g = Grid::with_resolution(32, 32, 1.0).unwrap();
        let f = field(g);
        let ev = MultiplierEvaluator::new(MultiplierParams::new(1.0 / 3.0, 1e-3).unwrap());
        let t = 5.0;
        let d = energy_monitor(&f, t, &ev);
        let expect = ev.params().lambda_dot(t).abs() * d.a_sq;
        assert!((d.ck_lambda - expect).abs() <= 1e-14 * expect);
    }

    #[test]
    fn quadratic_in_amplitude() {
        let g = Grid::with_resolution(32, 32, 1.0).unwrap();
        let f = field(g);
        let ev = MultiplierEvaluator::new(MultiplierParams::new(0.25, 1e-3).unwrap());
        let a = energy_monitor(&f, 2.0, &ev);
        let b = energy_monitor(&(&f * 2.0), 2.0, &ev);
        assert!((b.a_sq - 4.0 * a.a_sq).abs() <= 1e-13 * b.a_sq);
        assert!((b.ck_w - 4.0 * a.ck_w).abs() <= 1e-13 * b.ck_w.max(1e-300));
    }
}
