//! Logarithmic growth rate of `w_NR` inside very critical intervals against
//! the model rate `a_{k,eta} / (1 + |t - eta/k|)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{log_eta_grid, AuditReport, Distribution, Offender};
use crate::error::Result;
use crate::weights::{e_floor, pow_s, rho, MultiplierParams, WeightTable};

/// Accepted ratio band `[1/RATE_FACTOR, RATE_FACTOR]`.
pub const RATE_FACTOR: f64 = 10.0;

/// Frequencies are drawn from this many log-spaced values so tables are shared.
const ETA_LEVELS: usize = 96;

/// Sample `t` uniformly in `tilde I_{k,eta}` with `1 <= k <= |eta|^s / 2`
/// and `|eta|` log-spaced in `[16, 1e6]`.
pub fn check_w_rate(beta: f64, n_samples: usize, seed: u64) -> Result<AuditReport> {
    let p = MultiplierParams::new(beta, 1e-4)?;
    let levels = log_eta_grid(16.0, 1e6, ETA_LEVELS);
    let tables: Vec<WeightTable> = levels.par_iter().map(|&e| WeightTable::new(e, &p)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = Vec::with_capacity(n_samples);
    while draws.len() < n_samples {
        let level = rng.random_range(0..ETA_LEVELS);
        let eta = levels[level];
        let half = (0.5 * pow_s(eta, p.s)).floor() as usize;
        if half < 1 || half > e_floor(pow_s(eta, p.s)) {
            continue;
        }
        let k = rng.random_range(1..=half);
        let r = rho(k as f64, eta, beta);
        let t = eta / k as f64 + r / 8.0 * rng.random_range(-1.0..1.0);
        draws.push((level, k, t));
    }
    let rows: Vec<(f64, usize, f64, f64)> = draws
        .par_iter()
        .map(|&(level, k, t)| {
            let tb = &tables[level];
            let eta = levels[level];
            let a = 8.0 * (1.0 - 1.0 / rho(k as f64, eta, beta));
            let model = a / (1.0 + (t - eta / k as f64).abs());
            (eta, k, t, tb.log_w_nr(t).1 / model)
        })
        .collect();
    let ratios: Vec<f64> = rows.iter().map(|r| r.3).collect();
    let mut rep = AuditReport::new(
        "w_rate_consistency",
        Some(seed),
        n_samples,
        format!("rate ratio in [1/{RATE_FACTOR}, {RATE_FACTOR}]"),
    )
    .with_extra("beta", beta);
    rep.distribution = Distribution::of(&ratios);
    let mut bad = 0usize;
    for &(eta, k, t, q) in &rows {
        if !(q >= 1.0 / RATE_FACTOR && q <= RATE_FACTOR) {
            bad += 1;
            rep.offend(Offender::new(&[("beta", beta), ("eta", eta), ("k", k as f64), ("t", t)], q));
        }
    }
    rep.extra.insert("outside_band".into(), bad as f64);
    Ok(rep)
}

/// Gap between the right-hand rate used everywhere and the two-sided average
/// at the breakpoints of `w_NR` and `g`. Reported only; the time integrals do
/// not see a measure-zero set, so this fails only on non-finite rates.
pub fn breakpoint_sensitivity(beta: f64, nu: f64, eta_grid: &[f64]) -> Result<AuditReport> {
    let p = MultiplierParams::new(beta, nu)?;
    let rows: Vec<(f64, f64, f64)> = eta_grid
        .par_iter()
        .map(|&eta| {
            let tb = WeightTable::new(eta, &p);
            let (mut gap, mut rel) = (0.0f64, 0.0f64);
            for (_, t) in tb.breakpoints() {
                let left = t - 1e-9 * t.max(1.0);
                for (r, l) in [(tb.log_w_nr(t).1, tb.log_w_nr(left).1), (tb.log_g(t).1, tb.log_g(left).1)] {
                    let half = 0.5 * (r - l).abs();
                    gap = gap.max(half);
                    if r.abs().max(l.abs()) > 0.0 {
                        rel = rel.max(half / r.abs().max(l.abs()));
                    }
                }
            }
            (eta, gap, rel)
        })
        .collect();
    let mut rep = AuditReport::new("breakpoint_rate_sensitivity", None, rows.len(), "rates finite")
        .with_extra("beta", beta);
    let gaps: Vec<f64> = rows.iter().map(|r| r.1).collect();
    rep.distribution = Distribution::of(&gaps);
    rep.extra.insert("max_abs_gap".into(), gaps.iter().cloned().fold(0.0, f64::max));
    rep.extra
        .insert("max_rel_gap".into(), rows.iter().map(|r| r.2).fold(0.0, f64::max));
    for &(eta, gap, _) in &rows {
        if !gap.is_finite() {
            rep.offend(Offender::new(&[("beta", beta), ("eta", eta)], gap));
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn left_half_rate_is_in_band() {
        // on the left half the weight rises like (1 + C1 kappa) a / x
        let p = MultiplierParams::new(0.0, 1e-4).unwrap();
        let eta = 1e4;
        let tb = WeightTable::new(eta, &p);
        let (k, r) = (3usize, rho(3.0, eta, 0.0));
        let c = eta / k as f64;
        for frac in [0.01, 0.3, 0.9] {
            let t = c - frac * r / 8.0;
            let a = 8.0 * (1.0 - 1.0 / r);
            let q = tb.log_w_nr(t).1 / (a / (1.0 + (c - t)));
            assert!((0.1..=10.0).contains(&q), "{q}");
        }
    }

    #[test]
    fn one_sided_gap_is_finite_and_nonzero() {
        let rep = breakpoint_sensitivity(0.0, 1e-4, &[100.0, 1e4]).unwrap();
        assert!(rep.pass);
        assert!(rep.extra["max_abs_gap"] > 0.0);
    }

    #[test]
    fn audit_is_deterministic() {
        let a = check_w_rate(0.25, 500, 4).unwrap();
        assert_eq!(a, check_w_rate(0.25, 500, 4).unwrap());
        assert_eq!(a.samples, 500);
    }
}
