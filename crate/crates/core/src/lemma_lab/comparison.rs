//! Comparison of `w_NR` and `g` at nearby frequencies.
//!
//! The statistic `log(F(t,xi)/F(t,eta)) - P(|xi - eta|) - C |xi - eta|^s`
//! must have a finite supremum. `C` is fitted on a calibration sample and
//! frozen; a second, independent sample may not exceed the calibration
//! supremum by more than `AUDIT_MARGIN`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::growth::w_growth_exponent;
use super::{log_uniform, random_sign, AuditReport, Distribution, Offender};
use crate::error::Result;
use crate::weights::{e_floor, pow_s, t_crit, MultiplierParams, WeightTable};

pub const AUDIT_MARGIN: f64 = 0.5;
/// Headroom applied to the calibrated constant before freezing.
const FREEZE_FACTOR: f64 = 1.1;
const ETA_MAX: f64 = 4e3;

#[derive(Clone, Copy, Debug)]
struct Sample {
    eta: f64,
    xi: f64,
    t: f64,
}

fn draw(rng: &mut ChaCha8Rng, s: f64) -> Sample {
    let eta = random_sign(rng) * log_uniform(rng, 0.5, ETA_MAX);
    let abs = eta.abs();
    let xi = match rng.random_range(0..3) {
        0 => eta + random_sign(rng) * log_uniform(rng, 1e-2, abs.max(1.0)),
        1 => random_sign(rng) * log_uniform(rng, 0.5, ETA_MAX),
        _ => -eta * rng.random_range(0.5..=2.0),
    };
    let e_s = if abs >= 1.0 { e_floor(pow_s(abs, s)) } else { 0 };
    let t = if e_s >= 1 && rng.random_bool(0.6) {
        // interval-relative time inside a resonant interval of eta
        let k = rng.random_range(1..=e_s);
        let (lo, hi) = (t_crit(k, abs), t_crit(k - 1, abs));
        lo + (hi - lo) * rng.random_range(0.0..1.0)
    } else {
        log_uniform(rng, 1.0, 2.0 * abs.max(xi.abs()).max(1.0))
    };
    Sample { eta, xi, t: t.max(1.0) }
}

struct Evaluated {
    sample: Sample,
    log_ratio: f64,
    dist: f64,
}

fn evaluate(samples: &[Sample], p: &MultiplierParams, f: fn(&WeightTable, f64) -> f64) -> Vec<Evaluated> {
    samples
        .par_iter()
        .map(|&sm| {
            let a = f(&WeightTable::new(sm.xi, p), sm.t);
            let b = f(&WeightTable::new(sm.eta, p), sm.t);
            Evaluated {
                sample: sm,
                log_ratio: a - b,
                dist: (sm.xi - sm.eta).abs(),
            }
        })
        .collect()
}

/// Shared calibration/audit driver. `poly` is the polynomial prefactor in
/// log form, `scale` the exponent multiplying the fitted constant.
fn comparison_audit(
    lemma: &str,
    p: &MultiplierParams,
    n_samples: usize,
    seed: u64,
    f: fn(&WeightTable, f64) -> f64,
    poly: impl Fn(f64) -> f64 + Sync,
    scale: f64,
) -> AuditReport {
    let n = n_samples.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let calibration: Vec<Sample> = (0..n).map(|_| draw(&mut rng, p.s)).collect();
    let audit: Vec<Sample> = (0..n).map(|_| draw(&mut rng, p.s)).collect();
    let cal = evaluate(&calibration, p, f);
    let aud = evaluate(&audit, p, f);

    // smallest constant that makes the statistic nonpositive for |xi - eta| >= 1
    let fitted = cal
        .iter()
        .filter(|e| e.dist >= 1.0)
        .map(|e| (e.log_ratio - poly(e.dist)) / (scale * pow_s(e.dist, p.s)))
        .fold(0.0, f64::max);
    let c = FREEZE_FACTOR * fitted;
    let stat = |e: &Evaluated| e.log_ratio - poly(e.dist) - c * scale * pow_s(e.dist, p.s);
    let cal_stats: Vec<f64> = cal.iter().map(stat).collect();
    let aud_stats: Vec<f64> = aud.iter().map(stat).collect();
    let cal_max = cal_stats.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let aud_max = aud_stats.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut rep = AuditReport::new(
        lemma,
        Some(seed),
        2 * n,
        format!("audit sup <= calibration sup + {AUDIT_MARGIN}"),
    )
    .with_extra("calibrated_constant", fitted)
    .with_extra("calibration_max", cal_max)
    .with_extra("audit_max", aud_max)
    .with_extra("beta", p.beta)
    .with_extra("scale", scale);
    rep.fitted_constant = Some(c);
    rep.distribution = Distribution::of(&aud_stats);
    for (e, &v) in aud.iter().zip(&aud_stats) {
        if !(v.is_finite() && v <= cal_max + AUDIT_MARGIN) {
            let sm = e.sample;
            rep.offend(Offender::new(&[("eta", sm.eta), ("xi", sm.xi), ("t", sm.t)], v));
        }
    }
    if !(c.is_finite() && cal_max.is_finite()) {
        rep.offend(Offender::new(&[("beta", p.beta)], c));
    }
    rep
}

/// `w_NR(t,xi)/w_NR(t,eta) <~ <xi-eta>^{1+2 C1 kappa} e^{C mu |xi-eta|^s}` for `t >= 1`.
pub fn check_w_comparison(beta: f64, n_samples: usize, seed: u64) -> Result<AuditReport> {
    let p = MultiplierParams::new(beta, 1e-4)?;
    let jump = p.jump_exponent();
    let mu = w_growth_exponent(&p);
    Ok(comparison_audit(
        "w_comparison",
        &p,
        n_samples,
        seed,
        |tb, t| tb.log_w_nr(t).0,
        move |d| 0.5 * jump * d.mul_add(d, 1.0).ln(),
        mu,
    ))
}

/// `g(t,xi)/g(t,eta) <~ e^{C mu~ |xi-eta|^s}` for `t >= 1`. The reported
/// constant is the product `C mu~`.
pub fn check_g_comparison(beta: f64, nu: f64, n_samples: usize, seed: u64) -> Result<AuditReport> {
    let p = MultiplierParams::new(beta, nu)?;
    Ok(comparison_audit(
        "g_comparison",
        &p,
        n_samples,
        seed,
        |tb, t| tb.log_g(t).0,
        |_| 0.0,
        1.0,
    )
    .with_extra("nu", nu))
}
