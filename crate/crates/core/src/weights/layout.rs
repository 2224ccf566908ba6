//! Critical times and intervals for a vertical frequency `eta`.
//!
//! All intervals are half-open on the right, `[lo, hi)`, so every `t >= 0`
//! falls in exactly one piece and derivatives at breakpoints are right-sided.

use serde::{Deserialize, Serialize};

use super::{e_floor, pow_s, rho, s_of_beta};

/// `t_{k,eta} = 2|eta| / (2|k| + 1)`, with `t_{0,eta} = 2|eta|`.
#[inline]
pub fn t_crit(k: usize, eta: f64) -> f64 {
    2.0 * eta.abs() / (2 * k + 1) as f64
}

/// Index `k >= 1` with `t in [t_{k,eta}, t_{k-1,eta})`, or 0 for `t >= 2|eta|`.
#[inline]
pub fn interval_index(t: f64, eta: f64) -> usize {
    let eta = eta.abs();
    if t >= 2.0 * eta {
        0
    } else if t <= 0.0 {
        usize::MAX
    } else {
        let x = ((2.0 * eta / t - 1.0) / 2.0).ceil();
        let mut k = if x >= usize::MAX as f64 { usize::MAX } else { x.max(1.0) as usize };
        // guard rounding at the breakpoints
        if k != usize::MAX {
            while k > 1 && t >= t_crit(k - 1, eta) {
                k -= 1;
            }
            while t < t_crit(k, eta) {
                k += 1;
            }
        }
        k
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriticalLayout {
    pub eta: f64,
    pub beta: f64,
    pub s: f64,
    /// `E(|eta|^s)`: last index carrying a resonant interval.
    pub e_s: usize,
    /// `E(|eta|)`: last index carrying a critical interval.
    pub e_full: usize,
    /// `t_{k,eta}` for `k = 0..=e_full`.
    pub t_k: Vec<f64>,
    /// `t^-_{k,eta}`, `t^+_{k,eta}`, `rho_{k,eta}`, `a_{k,eta}` for `k = 1..=e_full`
    /// (index 0 unused).
    pub t_minus: Vec<f64>,
    pub t_plus: Vec<f64>,
    pub rho: Vec<f64>,
    pub a: Vec<f64>,
}

impl CriticalLayout {
    pub fn new(eta: f64, beta: f64) -> Self {
        let abs = eta.abs();
        let s = s_of_beta(beta).expect("beta validated by caller");
        let (e_s, e_full) = if abs >= 1.0 {
            (e_floor(pow_s(abs, s)), e_floor(abs))
        } else {
            (0, 0)
        };
        let mut layout = CriticalLayout {
            eta,
            beta,
            s,
            e_s,
            e_full,
            t_k: (0..=e_full).map(|k| t_crit(k, abs)).collect(),
            t_minus: vec![f64::NAN; e_full + 1],
            t_plus: vec![f64::NAN; e_full + 1],
            rho: vec![f64::NAN; e_full + 1],
            a: vec![f64::NAN; e_full + 1],
        };
        for k in 1..=e_full {
            let r = rho(k as f64, abs, beta);
            let c = abs / k as f64;
            layout.rho[k] = r;
            layout.a[k] = 8.0 * (1.0 - 1.0 / r);
            layout.t_minus[k] = c - r / 8.0;
            layout.t_plus[k] = c + r / 8.0;
        }
        layout
    }

    pub fn critical_time(&self, k: usize) -> f64 {
        self.eta.abs() / k as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// No critical interval applies: `k = 0`, `|eta| < 1`, `t >= 2|eta|`,
    /// `t < t_{E(|eta|),eta}` or `|k| > E(|eta|)`.
    Outside,
    /// Inside the critical window of `eta` but not in `I_{k,eta}`.
    Gap,
    IL,
    IR,
    TildeIL,
    TildeIR,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub region: Region,
    /// `k eta > 0` and `t` in the very critical interval.
    pub resonant: bool,
}

/// Position of `t` relative to the intervals of mode `k` at frequency `eta`.
/// Geometry uses `|k|` and `|eta|`; the sign condition only enters `resonant`.
pub fn classify(t: f64, k: i64, eta: f64, beta: f64) -> Classification {
    let outside = Classification {
        region: Region::Outside,
        resonant: false,
    };
    let abs = eta.abs();
    let ka = k.unsigned_abs() as usize;
    if k == 0 || abs < 1.0 || t >= 2.0 * abs {
        return outside;
    }
    let s = s_of_beta(beta).expect("beta validated by caller");
    let e_full = e_floor(abs);
    if ka > e_full || t < t_crit(e_full, abs) {
        return outside;
    }
    let j = interval_index(t, abs);
    if j != ka {
        return Classification {
            region: Region::Gap,
            resonant: false,
        };
    }
    let c = abs / ka as f64;
    let e_s = e_floor(pow_s(abs, s));
    let r = rho(ka as f64, abs, beta);
    let in_tilde = ka <= e_s && t >= c - r / 8.0 && t < c + r / 8.0;
    let region = match (in_tilde, t < c) {
        (true, true) => Region::TildeIL,
        (true, false) => Region::TildeIR,
        (false, true) => Region::IL,
        (false, false) => Region::IR,
    };
    Classification {
        region,
        resonant: in_tilde && (k as f64) * eta > 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert!((t_crit(1, 10.0) - 20.0 / 3.0).abs() < 1e-15);
        let l = CriticalLayout::new(16.0, 0.0);
        assert_eq!(l.t_minus[1], 14.0);
        assert_eq!(l.t_plus[1], 18.0);
        assert_eq!(l.a[1], 7.5);
        assert_eq!(l.e_s, 4);
        assert_eq!(l.e_full, 16);
        assert_eq!(l.t_k[0], 32.0);
        let c = classify(16.0, 1, 16.0, 0.0);
        assert_eq!(c.region, Region::TildeIR);
        assert!(c.resonant);
        assert_eq!(classify(100.0, 1, 16.0, 0.0).region, Region::Outside);
        let neg = classify(16.0, -1, 16.0, 0.0);
        assert_eq!(neg.region, Region::TildeIR);
        assert!(!neg.resonant);
        assert_eq!(classify(15.0, 1, 16.0, 0.0).region, Region::TildeIL);
        assert_eq!(classify(11.0, 1, 16.0, 0.0).region, Region::IL);
        assert_eq!(classify(20.0, 1, 16.0, 0.0).region, Region::IR);
        assert_eq!(classify(20.0, 2, 16.0, 0.0).region, Region::Gap);
        assert_eq!(classify(0.5, 1, 16.0, 0.0).region, Region::Outside);
        assert_eq!(classify(1.0, 1, 16.0, 0.0).region, Region::Gap);
        assert_eq!(classify(5.0, 0, 16.0, 0.0).region, Region::Outside);
        assert_eq!(classify(0.5, 1, 0.5, 0.0).region, Region::Outside);
    }

    #[test]
    fn layout_invariants() {
        for &beta in &[0.0, 1.0 / 6.0, 0.25, 1.0 / 3.0] {
            for &eta in &[1.0, 2.5, 16.0, 333.3, 1e4] {
                let l = CriticalLayout::new(eta, beta);
                for k in 1..l.t_k.len() {
                    assert!(l.t_k[k] < l.t_k[k - 1]);
                }
                for k in 1..=l.e_s {
                    assert!((0.0..8.0).contains(&l.a[k]), "a={} beta={beta} eta={eta} k={k}", l.a[k]);
                    assert!(l.t_k[k] <= l.t_minus[k] && l.t_plus[k] <= l.t_k[k - 1]);
                }
            }
        }
    }

    #[test]
    fn interval_index_at_breakpoints() {
        let eta = 37.0;
        for k in 1..=37usize {
            assert_eq!(interval_index(t_crit(k, eta), eta), k);
            let mid = 0.5 * (t_crit(k, eta) + t_crit(k - 1, eta));
            assert_eq!(interval_index(mid, eta), k);
        }
        assert_eq!(interval_index(74.0, eta), 0);
    }

    proptest! {
        #[test]
        fn labels_partition_time(t in 0.0f64..100.0, k in -20i64..20, eta in -50.0f64..50.0,
                                 beta in 0.0f64..0.3333) {
            let c = classify(t, k, eta, beta);
            if (k as f64) * eta <= 0.0 {
                prop_assert!(!c.resonant);
            }
            if c.resonant {
                prop_assert!(matches!(c.region, Region::TildeIL | Region::TildeIR));
            }
            // exactly one k owns any t inside the critical window
            let abs = eta.abs();
            if abs >= 1.0 && t < 2.0 * abs && t >= t_crit(e_floor(abs), abs) {
                let owners = (1..=e_floor(abs) as i64)
                    .filter(|&m| classify(t, m, eta, beta).region != Region::Gap)
                    .count();
                prop_assert_eq!(owners, 1);
            }
        }
    }
}
