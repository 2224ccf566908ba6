//! Littlewood–Paley decomposition in the vertical frequency.
//!
//! `phi` is a smooth cutoff equal to 1 on `|xi| <= 1/2` and 0 on `|xi| >= 3/4`;
//! the shell multiplier is `rho(xi) = phi(xi / 2) - phi(xi)` and
//! `rho_N(xi) = rho(xi / N)`. Together with the low block `phi(|d_v|)` they
//! form a partition of unity.

use serde::{Deserialize, Serialize};

use super::SpectralField;

/// Dyadic scale `N = 2^e` with `e >= -1`; `e = -1` is the low block `N = 1/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Dyadic(i32);

impl Dyadic {
    pub const HALF: Dyadic = Dyadic(-1);

    pub fn from_exponent(e: i32) -> Option<Self> {
        (e >= -1).then_some(Dyadic(e))
    }

    /// Dyadic with value `n`, if `n` is one of `1/2, 1, 2, 4, ...`.
    pub fn from_value(n: f64) -> Option<Self> {
        let e = n.log2().round();
        (e >= -1.0 && (2f64.powi(e as i32) - n).abs() == 0.0).then_some(Dyadic(e as i32))
    }

    pub fn exponent(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        2f64.powi(self.0)
    }

    pub fn next(self) -> Self {
        Dyadic(self.0 + 1)
    }

    /// All scales from `1/2` up to the first `N` whose shell covers `eta_max`.
    pub fn covering(eta_max: f64) -> Vec<Dyadic> {
        let mut out = vec![Dyadic::HALF];
        let mut n = Dyadic(0);
        // shells up to N reconstruct phi(xi / 2N), which is 1 once 2N >= 2 eta_max
        while n.value() < eta_max {
            out.push(n);
            n = n.next();
        }
        out.push(n);
        out
    }
}

fn smooth_step(x: f64) -> f64 {
    // 0 for x <= 0, 1 for x >= 1, C-infinity in between
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}

pub fn phi(xi: f64) -> f64 {
    1.0 - smooth_step((xi.abs() - 0.5) * 4.0)
}

pub fn rho(xi: f64) -> f64 {
    phi(xi / 2.0) - phi(xi)
}

/// Multiplier of block `n` at vertical frequency `eta`.
pub fn block_weight(eta: f64, n: Dyadic) -> f64 {
    if n == Dyadic::HALF {
        phi(eta)
    } else {
        rho(eta / n.value())
    }
}

/// `f_N = rho_N(|d_v|) f`, or `phi(|d_v|) f` for `N = 1/2`.
pub fn lp_project(f: &SpectralField, n: Dyadic) -> SpectralField {
    f.apply_symbol(|_, eta| block_weight(eta, n))
}

/// `f_{<N}`: the low block plus every shell strictly below `N`.
pub fn lp_low(f: &SpectralField, n: Dyadic) -> SpectralField {
    if n == Dyadic::HALF {
        SpectralField::zeros(*f.grid())
    } else {
        f.apply_symbol(|_, eta| phi(eta / n.value()))
    }
}

/// Full decomposition over [`Dyadic::covering`] of the grid band.
pub fn decompose(f: &SpectralField) -> Vec<(Dyadic, SpectralField)> {
    Dyadic::covering(f.grid().eta_max())
        .into_iter()
        .map(|n| (n, lp_project(f, n)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use num_complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn cutoff_shape() {
        assert_eq!(phi(0.0), 1.0);
        assert_eq!(phi(0.5), 1.0);
        assert_eq!(phi(-0.5), 1.0);
        assert_eq!(phi(0.75), 0.0);
        assert_eq!(phi(3.0), 0.0);
        assert!(phi(0.6) > 0.0 && phi(0.6) < 1.0);
        let mut prev = 1.0;
        for i in 0..=1000 {
            let v = phi(i as f64 * 1e-3);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn eta_three_lives_in_shells_two_and_four() {
        let scales = Dyadic::covering(100.0);
        let mut total = 0.0;
        for n in scales {
            let w = block_weight(3.0, n);
            if n.value() != 2.0 && n.value() != 4.0 {
                assert_eq!(w, 0.0, "scale {}", n.value());
            }
            total += w;
        }
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dyadic_values() {
        assert_eq!(Dyadic::from_value(0.5), Some(Dyadic::HALF));
        assert_eq!(Dyadic::from_value(8.0).unwrap().exponent(), 3);
        assert_eq!(Dyadic::from_value(3.0), None);
        assert_eq!(Dyadic::from_value(0.25), None);
    }

    fn random_field(seed: u64) -> SpectralField {
        use rand::{Rng, SeedableRng};
        let grid = Grid::new(3, 60, 2.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut f = SpectralField::zeros(grid);
        for c in f.coef_mut() {
            *c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        f.enforce_hermitian();
        f
    }

    #[test]
    fn low_pass_telescopes() {
        let f = random_field(3);
        let blocks = decompose(&f);
        for i in 1..blocks.len() {
            let n = blocks[i].0;
            let mut acc = SpectralField::zeros(*f.grid());
            for (_, b) in &blocks[..i] {
                acc += b;
            }
            assert!((&acc - &lp_low(&f, n)).max_abs() < 1e-14);
        }
    }

    #[test]
    fn shell_frequency_localization() {
        let f = random_field(11);
        let d_eta = f.grid().d_eta();
        for (n, fnb) in decompose(&f) {
            let norm = fnb.l2_norm();
            if norm == 0.0 {
                continue;
            }
            let ratio = fnb.dv().l2_norm() / norm;
            let (lo, hi) = if n == Dyadic::HALF {
                (0.0, 0.75)
            } else {
                ((n.value() / 2.0 - d_eta).max(0.0), 1.5 * n.value())
            };
            assert!(ratio >= lo && ratio <= hi, "N={} ratio={ratio}", n.value());
        }
    }

    proptest! {
        #[test]
        fn reconstruction_exact(seed in 0u64..5000) {
            let f = random_field(seed);
            let mut acc = SpectralField::zeros(*f.grid());
            for (_, b) in decompose(&f) {
                acc += &b;
            }
            for (a, b) in acc.coef().iter().zip(f.coef()) {
                prop_assert!((a - b).norm() < 1e-14);
            }
        }
    }
}
