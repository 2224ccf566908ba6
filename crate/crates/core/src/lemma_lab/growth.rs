//! Growth of `1/w(0, eta)` and `1/g(0, eta)` with the frequency.

use super::{AuditReport, Distribution, Offender, EXACT_SLACK};
use crate::error::{LabError, Result};
use crate::weights::{pow_s, MultiplierParams, WeightTable};

/// Band for the normalized growth of `w` once `eta >= BAND_FROM`.
pub const W_BAND: (f64, f64) = (0.8, 1.2);
pub const BAND_FROM: f64 = 1e4;
/// Allowed relative rise of the `g` exponent over the last decade of the grid.
const G_DECADE_DRIFT: f64 = 0.1;
/// `w` does not depend on the viscosity; any admissible value builds the table.
const NU_FOR_W: f64 = 1e-4;

/// `n` log-spaced points in `[lo, hi]`.
pub fn log_eta_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// `mu = 2 (2 - 3 beta)(1 + 2 C1 kappa)`.
pub fn w_growth_exponent(p: &MultiplierParams) -> f64 {
    2.0 * (2.0 - 3.0 * p.beta) * p.jump_exponent()
}

fn validate_grid(eta_grid: &[f64]) -> Result<()> {
    if eta_grid.is_empty() || eta_grid.iter().any(|e| !(e.is_finite() && *e >= 1.0)) {
        return Err(LabError::InvalidParameter("frequency grid must be nonempty with entries >= 1".into()));
    }
    Ok(())
}

/// `log(1/w(0, eta))` against `(mu/2)|eta|^s - (mu s / 4) log|eta|`.
/// For `s = 0` the weight has a single bounded factor and only boundedness
/// is audited.
pub fn check_w_growth(beta: f64, eta_grid: &[f64]) -> Result<AuditReport> {
    validate_grid(eta_grid)?;
    let p = MultiplierParams::new(beta, NU_FOR_W)?;
    let mu = w_growth_exponent(&p);
    let s = p.s;
    let logs: Vec<f64> = eta_grid.iter().map(|&e| -WeightTable::new(e, &p).log_w_floor()).collect();

    if s == 0.0 {
        let (lo, hi) = logs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, &l| (a.0.min(l), a.1.max(l)));
        let mut rep = AuditReport::new("w_growth", None, eta_grid.len(), "log(1/w(0,eta)) bounded and constant")
            .with_extra("mu", mu)
            .with_extra("min_log", lo)
            .with_extra("max_log", hi);
        rep.distribution = Distribution::of(&logs);
        if !(hi.is_finite() && hi - lo <= EXACT_SLACK * hi.abs().max(1.0)) {
            rep.offend(Offender::new(&[("beta", beta)], hi - lo));
        }
        return Ok(rep);
    }

    let ratios: Vec<f64> = eta_grid
        .iter()
        .zip(&logs)
        .map(|(&e, &l)| l / (0.5 * mu * pow_s(e, s) - 0.25 * mu * s * e.ln()))
        .collect();
    let mut rep = AuditReport::new(
        "w_growth",
        None,
        eta_grid.len(),
        format!("ratio in [{}, {}] for eta >= {BAND_FROM:e}, tightening with eta", W_BAND.0, W_BAND.1),
    )
    .with_extra("mu", mu);
    let banded: Vec<(f64, f64)> = eta_grid
        .iter()
        .zip(&ratios)
        .filter(|(e, _)| **e >= BAND_FROM)
        .map(|(e, r)| (*e, *r))
        .collect();
    rep.distribution = Distribution::of(&banded.iter().map(|x| x.1).collect::<Vec<_>>());
    for &(e, r) in &banded {
        if !(W_BAND.0..=W_BAND.1).contains(&r) {
            rep.offend(Offender::new(&[("beta", beta), ("eta", e)], r));
        }
    }
    if let (Some(first), Some(last)) = (banded.first(), banded.last()) {
        rep.extra.insert("ratio_at_band_start".into(), first.1);
        rep.extra.insert("ratio_at_max_eta".into(), last.1);
        if (last.1 - 1.0).abs() > (first.1 - 1.0).abs() + EXACT_SLACK {
            rep.offend(Offender::new(&[("beta", beta), ("eta", last.0)], last.1));
        }
    }
    for (&e, &l) in eta_grid.iter().zip(&logs) {
        if !l.is_finite() {
            rep.offend(Offender::new(&[("beta", beta), ("eta", e)], l));
        }
    }
    Ok(rep)
}

/// Sampled times per frequency for the pointwise `g` bounds.
const G_TIME_SAMPLES: usize = 64;

/// Fits `mu~ = sup log(1/g(0, eta)) / |eta|^s`, checks that the sup has
/// settled over the last decade of the grid, and checks
/// `1 <= 1/g(t, eta) <= e^{mu~ |eta|^s}` with `g` nondecreasing in `t`.
pub fn check_g_growth(beta: f64, nu: f64, eta_grid: &[f64]) -> Result<AuditReport> {
    validate_grid(eta_grid)?;
    let p = MultiplierParams::new(beta, nu)?;
    let s = p.s;
    let tables: Vec<WeightTable> = eta_grid.iter().map(|&e| WeightTable::new(e, &p)).collect();
    let ratios: Vec<f64> = tables
        .iter()
        .map(|tb| -tb.log_g_floor() / pow_s(tb.eta(), s))
        .collect();
    let mu_tilde = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let eta_max = eta_grid.iter().copied().fold(0.0, f64::max);
    let early = eta_grid
        .iter()
        .zip(&ratios)
        .filter(|(e, _)| **e <= eta_max / 10.0)
        .map(|x| *x.1)
        .fold(f64::NEG_INFINITY, f64::max);

    let mut rep = AuditReport::new(
        "g_growth",
        None,
        eta_grid.len() * (1 + G_TIME_SAMPLES),
        format!("sup rises by at most {G_DECADE_DRIFT} over the last decade; 1 <= 1/g <= exp(mu~ |eta|^s)"),
    )
    .with_extra("mu_tilde", mu_tilde)
    .with_extra("mu_tilde_before_last_decade", early);
    rep.fitted_constant = Some(mu_tilde);
    rep.distribution = Distribution::of(&ratios);
    if !mu_tilde.is_finite() {
        rep.offend(Offender::new(&[("beta", beta), ("nu", nu)], mu_tilde));
    }
    if early.is_finite() && mu_tilde > early * (1.0 + G_DECADE_DRIFT) {
        let i = ratios.iter().position(|&r| r == mu_tilde).unwrap_or(0);
        rep.offend(Offender::new(&[("beta", beta), ("nu", nu), ("eta", eta_grid[i])], mu_tilde));
    }

    let mut worst = f64::INFINITY;
    for tb in &tables {
        let e = tb.eta();
        let cap = mu_tilde * pow_s(e, s);
        let mut prev = f64::NEG_INFINITY;
        for j in 0..=G_TIME_SAMPLES {
            let t = 2.5 * e * j as f64 / G_TIME_SAMPLES as f64;
            let lg = tb.log_g(t).0;
            let slack = (-lg).min(cap + lg).min(lg - prev);
            let tol = EXACT_SLACK * cap.max(1.0);
            worst = worst.min(slack);
            if !(slack >= -tol) {
                rep.offend(Offender::new(&[("beta", beta), ("nu", nu), ("eta", e), ("t", t)], slack));
            }
            prev = lg;
        }
    }
    rep.worst_slack = Some(worst);
    Ok(rep)
}
