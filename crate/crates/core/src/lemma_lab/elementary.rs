//! Elementary power inequalities and the enhanced-dissipation floor.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{exact_audit, log_uniform, random_sign, AuditReport, Offender};
use crate::error::{LabError, Result};
use crate::weights::m_eval;

/// Relative growth allowed for the fitted constant when the sample doubles.
const DOUBLING_DRIFT: f64 = 0.01;

/// `|x^s - y^s| (x^{1-s} + y^{1-s}) / |x - y|` for `y = x (1 - delta)`,
/// `0 < delta <= 1`, evaluated without cancellation.
pub fn power_difference_ratio(s: f64, delta: f64) -> f64 {
    let l = (-delta).ln_1p();
    let num = -(s * l).exp_m1();
    let r_pow = ((1.0 - s) * l).exp();
    num * (1.0 + r_pow) / delta
}

/// Uniform, near-diagonal (`delta` small) and near-axis (`y << x`) draws.
fn draw_delta(rng: &mut ChaCha8Rng) -> f64 {
    match rng.random_range(0..8) {
        0..=2 => rng.random_range(f64::EPSILON..=1.0),
        3..=5 => log_uniform(rng, 1e-12, 1.0),
        6 => 1.0 - log_uniform(rng, 1e-300, 1.0),
        _ => 1.0,
    }
}

fn fitted_bound(s: f64, n: usize, seed: u64) -> AuditReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let deltas: Vec<f64> = (0..2 * n).map(|_| draw_delta(&mut rng)).collect();
    let ratios: Vec<f64> = deltas.par_iter().map(|&d| power_difference_ratio(s, d)).collect();
    let argmax = |slice: &[f64]| {
        slice
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &r)| if r > acc.1 { (i, r) } else { acc })
    };
    let (_, c_half) = argmax(&ratios[..n]);
    let (i_full, c_full) = argmax(&ratios);
    let mut rep = AuditReport::new(
        "power_difference_fitted",
        Some(seed),
        2 * n,
        format!("constant drifts by at most {DOUBLING_DRIFT} when the sample doubles"),
    )
    .with_extra("constant_n", c_half)
    .with_extra("constant_2n", c_full);
    rep.fitted_constant = Some(c_full);
    rep.distribution = super::Distribution::of(&ratios);
    if !(c_full.is_finite() && c_full <= c_half * (1.0 + DOUBLING_DRIFT)) {
        rep.offend(Offender::new(&[("s", s), ("delta", deltas[i_full])], c_full));
    }
    rep
}

/// Lipschitz-type bound with explicit constant `s / (K-1)^{1-s}`, valid
/// when `|x - y| <= x / K`.
fn near_diagonal(s: f64, n: usize, seed: u64) -> AuditReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0002);
    let draws: Vec<(f64, f64, f64)> = (0..n)
        .map(|_| {
            let k = 1.0 + log_uniform(&mut rng, 1e-3, 1e3);
            let x = log_uniform(&mut rng, 1e-6, 1e6);
            let u = rng.random_range(-1.0..=1.0);
            (k, x, u)
        })
        .collect();
    let rows: Vec<_> = draws
        .par_iter()
        .map(|&(k, x, u)| {
            let y = x * (1.0 + u / k);
            let xs = x.powf(s);
            let lhs = xs * (s * (u / k).ln_1p()).exp_m1().abs();
            let rhs = s * (k - 1.0).powf(s - 1.0) * xs * (u / k).abs().powf(s);
            let slack = if rhs > 0.0 { 1.0 - lhs / rhs } else { -lhs };
            (vec![("s", s), ("K", k), ("x", x), ("y", y)], slack)
        })
        .collect();
    exact_audit(
        "power_difference_near_diagonal",
        Some(seed),
        "relative slack >= -1e-12",
        &rows,
    )
}

/// Subadditivity bound `(x+y)^s <= (K/(1+K))^{1-s} (x^s + y^s)` for `y <= x <= K y`.
fn comparable_sum(s: f64, n: usize, seed: u64) -> AuditReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0003);
    let draws: Vec<(f64, f64, f64)> = (0..n)
        .map(|_| {
            let k = if rng.random_bool(0.1) { 1.0 } else { log_uniform(&mut rng, 1.0, 1e3) };
            (k, log_uniform(&mut rng, 1e-6, 1e6), rng.random_range(0.0..=1.0))
        })
        .collect();
    let rows: Vec<_> = draws
        .par_iter()
        .map(|&(k, y, u)| {
            let x = y * (1.0 + (k - 1.0) * u);
            let lhs = (x + y).powf(s);
            let rhs = (k / (1.0 + k)).powf(1.0 - s) * (x.powf(s) + y.powf(s));
            (vec![("s", s), ("K", k), ("x", x), ("y", y)], 1.0 - lhs / rhs)
        })
        .collect();
    exact_audit("power_sum_comparable", Some(seed), "relative slack >= -1e-12", &rows)
}

/// Audit of the three power inequalities for `0 < s < 1`. The first has no
/// explicit constant; its fitted value must be stable under sample doubling.
pub fn check_elementary(s: f64, n_samples: usize, seed: u64) -> Result<AuditReport> {
    if !(s > 0.0 && s < 1.0) {
        return Err(LabError::InvalidParameter(format!("s must lie in (0, 1), got {s}")));
    }
    let n = n_samples.max(1);
    Ok(AuditReport::from_parts(
        "elementary_power",
        Some(seed),
        vec![fitted_bound(s, n, seed), near_diagonal(s, n, seed), comparable_sum(s, n, seed)],
    ))
}

/// `nu (eta - k t)^2 + d_t m / m - nu^{1/3} / 2`.
fn dissipation_slack(t: f64, k: i64, eta: f64, nu: f64) -> f64 {
    let kf = k as f64;
    nu * (eta - kf * t).powi(2) + m_eval(t, k, eta, nu).1 - 0.5 * nu.cbrt()
}

/// Sweep of the enhanced-dissipation floor over `nu in {1e-2, 1e-4, 1e-6}`,
/// `1 <= k <= 64`, `|eta| <= 1e3`, `0 <= t <= 2e3`. Half the samples sit
/// near the crossover `|eta - k t| ~ nu^{-1/3}`.
pub fn check_nu13(n_samples: usize, seed: u64) -> AuditReport {
    const NUS: [f64; 3] = [1e-2, 1e-4, 1e-6];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(f64, i64, f64, f64)> = (0..n_samples)
        .map(|i| {
            let nu = NUS[i % NUS.len()];
            let k: i64 = rng.random_range(1..=64);
            let eta = rng.random_range(-1e3..=1e3);
            let t = if rng.random_bool(0.5) {
                rng.random_range(0.0..=2e3)
            } else {
                let off = random_sign(&mut rng) * log_uniform(&mut rng, 1e-3, 10.0) / nu.cbrt();
                ((eta + off) / k as f64).clamp(0.0, 2e3)
            };
            (nu, k, eta, t)
        })
        .collect();
    let rows: Vec<_> = draws
        .par_iter()
        .map(|&(nu, k, eta, t)| {
            (
                vec![("nu", nu), ("k", k as f64), ("eta", eta), ("t", t)],
                dissipation_slack(t, k, eta, nu),
            )
        })
        .collect();
    let ratio_min = draws
        .iter()
        .zip(&rows)
        .map(|(d, r)| (r.1 + 0.5 * d.0.cbrt()) / d.0.cbrt())
        .fold(f64::INFINITY, f64::min);
    exact_audit("dissipation_floor", Some(seed), "slack >= -1e-12", &rows).with_extra("min_lhs_over_nu13", ratio_min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Instant;

    #[test]
    fn worked_values() {
        // |2 - sqrt(3.5)| <= 0.5 / sqrt(3) * sqrt(0.5)
        let (s, k, x, y) = (0.5, 4.0f64, 4.0f64, 3.5f64);
        let lhs = (x.sqrt() - y.sqrt()).abs();
        let rhs = s / (k - 1.0).powf(1.0 - s) * (x - y).abs().powf(s);
        assert!(lhs <= rhs);
        assert!((rhs - 0.5 / 3f64.sqrt() * 0.5f64.sqrt()).abs() < 1e-15);
        // equality at x = y, K = 1
        let (x, y) = (2.7f64, 2.7f64);
        let l = (x + y).powf(0.3);
        let r = 0.5f64.powf(0.7) * 2.0 * x.powf(0.3);
        assert!((l - r).abs() < 1e-14 * r);
        // s = 1/2 makes the first ratio identically one
        for d in [1e-9, 0.3, 1.0] {
            assert!((power_difference_ratio(0.5, d) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn elementary_audit_passes_and_is_deterministic() {
        for s in [0.1, 1.0 / 3.0, 0.5, 0.9] {
            let a = check_elementary(s, 20_000, 7).unwrap();
            assert!(a.pass, "{}", a.to_json().unwrap());
            assert_eq!(a.parts.len(), 3);
            assert_eq!(a, check_elementary(s, 20_000, 7).unwrap());
            // doubling never flips the exact parts
            let b = check_elementary(s, 40_000, 7).unwrap();
            assert!(b.parts[1].pass && b.parts[2].pass);
        }
        assert!(check_elementary(1.0, 10, 0).is_err());
    }

    #[test]
    fn dissipation_points() {
        // nu = 1e-3, k = 1, eta = 0, t = 0: 0.1 >= 0.05
        let v = dissipation_slack(0.0, 1, 0.0, 1e-3) + 0.5 * 0.1;
        assert!((v - 0.1).abs() < 1e-12);
        // crossover |eta - k t| = nu^{-1/3}
        let nu: f64 = 1e-6;
        let t = nu.cbrt().recip();
        let lhs = dissipation_slack(t, 1, 0.0, nu) + 0.5 * nu.cbrt();
        assert!((lhs - 1.5 * nu.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn dissipation_sweep_million_points() {
        let start = Instant::now();
        let r = check_nu13(1_000_000, 3);
        assert!(r.pass, "{:?}", r.offenders);
        assert!(r.worst_slack.unwrap() >= 0.0);
        assert!(r.extra["min_lhs_over_nu13"] >= 1.0 - 1e-9);
        assert!(start.elapsed().as_secs_f64() < 30.0);
    }
}
