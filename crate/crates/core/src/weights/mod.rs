//! Time-frequency weights and the composite multipliers built from them.
//!
//! Everything that can grow like `e^{c |eta|^s}` is carried in log space.

mod layout;
mod multiplier;
mod params;
mod table;

pub use layout::{classify, interval_index, t_crit, Classification, CriticalLayout, Region};
pub use multiplier::{frak_g, frak_w, iota, m_eval, MultiplierEvaluator, MultiplierValue};
pub use params::{MultiplierParams, MultiplierSpec, C_1, C_M, DEFAULT_KAPPA};
pub use table::{write_table_csv, WeightTable};

use crate::error::{LabError, Result};

/// `s(beta) = (1 - 3 beta) / (2 - 3 beta)`.
pub fn s_of_beta(beta: f64) -> Result<f64> {
    if !(0.0..=1.0 / 3.0).contains(&beta) {
        return Err(LabError::InvalidParameter(format!("beta must lie in [0, 1/3], got {beta}")));
    }
    Ok(((1.0 - 3.0 * beta) / (2.0 - 3.0 * beta)).max(0.0))
}

/// Integer part `E(x)` for `x >= 0`, robust to `x` landing a few ulps below
/// an integer (e.g. `16^(1/2)` through `powf`).
pub fn e_floor(x: f64) -> usize {
    let n = x.floor();
    if n + 1.0 - x <= 1e-12 * x.max(1.0) {
        (n + 1.0) as usize
    } else {
        n as usize
    }
}

/// `|eta|^s` with the exact square root when `s = 1/2`.
pub fn pow_s(x: f64, s: f64) -> f64 {
    if s == 0.5 {
        x.sqrt()
    } else {
        x.powf(s)
    }
}

/// `rho_{k,eta} = |eta|^{1-3 beta} / |k|^{2-3 beta}`.
pub fn rho(k: f64, eta: f64, beta: f64) -> f64 {
    (eta.abs().ln() * (1.0 - 3.0 * beta) - k.abs().ln() * (2.0 - 3.0 * beta)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s_values() {
        assert_eq!(s_of_beta(0.0).unwrap(), 0.5);
        assert_eq!(s_of_beta(1.0 / 3.0).unwrap(), 0.0);
        assert!((s_of_beta(1.0 / 6.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(s_of_beta(-0.1).is_err());
        assert!(s_of_beta(0.34).is_err());
        let mut prev = 1.0;
        for i in 0..=100 {
            let s = s_of_beta(i as f64 / 300.0).unwrap();
            assert!(s < prev && (0.0..=0.5).contains(&s));
            prev = s;
        }
    }

    #[test]
    fn integer_part() {
        assert_eq!(e_floor(pow_s(16.0, 0.5)), 4);
        assert_eq!(e_floor(1000f64.powf(1.0 / 3.0)), 10);
        assert_eq!(e_floor(3.999), 3);
        assert_eq!(e_floor(0.5), 0);
        assert_eq!(e_floor(7.0), 7);
    }

    #[test]
    fn rho_values() {
        assert!((rho(1.0, 16.0, 0.0) - 16.0).abs() < 1e-13);
        assert!((rho(2.0, 16.0, 0.0) - 4.0).abs() < 1e-13);
        assert!((rho(3.0, 7.0, 1.0 / 3.0) - 1.0 / 3.0).abs() < 1e-15);
    }
}
