//! Separation of critical times for comparable frequencies.
//!
//! For `t` in `I_{m,xi}` and `I_{k,eta}` (same signs, `|eta|/alpha <= |xi| <= alpha |eta|`)
//! one of five alternatives holds; two of them need a constant `C_alpha`,
//! fitted here once on a calibration sample and frozen for the audit.
//! The resonance window `|t - eta/k| < rho_{k,eta}/8` is used for every
//! `1 <= k <= E(|eta|)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{log_uniform, random_sign, AuditReport, Distribution, Offender};
use crate::error::{LabError, Result};
use crate::weights::{e_floor, interval_index, pow_s, rho, s_of_beta, t_crit};

/// Safety factor applied to the calibrated minimum before freezing.
const FREEZE_FACTOR: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationSample {
    pub beta: f64,
    pub xi: f64,
    pub eta: f64,
    pub m: i64,
    pub k: i64,
    pub t: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationCases {
    /// Same index, both in the resonance windows.
    pub a: bool,
    /// Same index, far from both strong resonances.
    pub b: bool,
    /// Same index, frequencies separated on the strong scale.
    pub c: bool,
    /// Far from both weak resonances.
    pub d: bool,
    /// Frequencies separated on the scale `|eta/k|`.
    pub e: bool,
    /// `t` in the resonance window of `(m, xi)`.
    pub in_window_xi: bool,
    /// Largest `C_alpha` for which the disjunction (and the refinement for
    /// `t` in the `xi` window) holds; `None` when no constant is needed.
    pub needed_constant: Option<f64>,
}

impl SeparationCases {
    pub fn holds(&self) -> bool {
        self.a || self.b || self.c || self.d || self.e
    }
}

fn in_window(t: f64, k: u64, freq: f64, beta: f64) -> bool {
    let c = freq / k as f64;
    let r = rho(k as f64, freq, beta);
    t >= c - r / 8.0 && t < c + r / 8.0
}

/// Evaluate all alternatives for one admissible sample at constant `c_alpha`.
pub fn separation_cases(sm: &SeparationSample, alpha: f64, c_alpha: f64) -> SeparationCases {
    let (xi, eta) = (sm.xi.abs(), sm.eta.abs());
    let (m, k) = (sm.m.unsigned_abs(), sm.k.unsigned_abs());
    let (mf, kf) = (m as f64, k as f64);
    let beta = sm.beta;
    let t = sm.t;
    let wx = in_window(t, m, xi, beta);
    let we = in_window(t, k, eta, beta);
    let same = m == k;
    let dx = (t - xi / mf).abs();
    let de = (t - eta / kf).abs();
    let dist = (sm.xi - sm.eta).abs();
    let strong = (eta / kf).powf(1.0 - 3.0 * beta);
    let a = same && wx && we;
    let b = same && dx >= rho(mf, xi, beta) / (10.0 * alpha) && de >= rho(kf, eta, beta) / (10.0 * alpha);
    let d = dx >= xi / (10.0 * alpha * mf * mf) && de >= eta / (10.0 * alpha * kf * kf);
    let c = same && dist >= c_alpha * strong;
    let e = dist >= c_alpha * eta / kf;

    let mut need: Option<f64> = None;
    if !(a || b || d) {
        need = Some(if same { (dist / strong).max(dist * kf / eta) } else { dist * kf / eta });
    }
    if wx && !same {
        let c2 = dist * kf / eta;
        need = Some(need.map_or(c2, |n| n.min(c2)));
    }
    SeparationCases {
        a,
        b,
        c,
        d,
        e,
        in_window_xi: wx,
        needed_constant: need,
    }
}

fn draw(rng: &mut ChaCha8Rng, alpha: f64) -> Option<SeparationSample> {
    let beta = rng.random_range(0.0..=1.0 / 3.0);
    let s = s_of_beta(beta).ok()?;
    let sign = random_sign(rng);
    let eta = log_uniform(rng, 2.0, 1e4);
    let e_full = e_floor(eta);
    let e_s = e_floor(pow_s(eta, s)).max(1);
    let k = if rng.random_bool(0.5) {
        rng.random_range(1..=e_s.min(e_full))
    } else {
        (log_uniform(rng, 1.0, e_full as f64 + 0.999).floor() as usize).clamp(1, e_full)
    };
    let (lo, hi) = (t_crit(k, eta), t_crit(k - 1, eta));
    let center = eta / k as f64;
    let t = if rng.random_bool(0.5) {
        lo + (hi - lo) * rng.random_range(0.0..1.0)
    } else {
        let r = rho(k as f64, eta, beta);
        center + rng.random_range(-1.0..=1.0) * r * log_uniform(rng, 1e-3, 1.0)
    };
    if !(t >= lo && t < hi) {
        return None;
    }
    let xi = match rng.random_range(0..3) {
        0 => eta * log_uniform(rng, 1.0 / alpha, alpha),
        1 => eta + rng.random_range(-1.0..=1.0) * (eta / k as f64).powf(1.0 - 3.0 * beta) * log_uniform(rng, 1e-2, 10.0),
        // frequency whose own critical time sits near t
        _ => {
            let m = (k as i64 + rng.random_range(-1..=1)).max(1) as f64;
            m * t * (1.0 + rng.random_range(-1.0..=1.0) * log_uniform(rng, 1e-4, 0.2))
        }
    };
    if !(xi >= 1.0 && xi >= eta / alpha && xi <= eta * alpha) {
        return None;
    }
    let m = interval_index(t, xi);
    if m == 0 || m > e_floor(xi) {
        return None;
    }
    Some(SeparationSample {
        beta,
        xi: sign * xi,
        eta: sign * eta,
        m: sign as i64 * m as i64,
        k: sign as i64 * k as i64,
        t,
    })
}

fn draw_many(rng: &mut ChaCha8Rng, n: usize, alpha: f64) -> Vec<SeparationSample> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        if let Some(sm) = draw(rng, alpha) {
            out.push(sm);
        }
    }
    out
}

/// Calibrate `C_alpha` on `n_samples` admissible samples, freeze
/// `FREEZE_FACTOR` times the calibrated minimum, then count samples of a
/// fresh set of the same size that no alternative covers.
pub fn check_separation(n_samples: usize, seed: u64, alpha: f64) -> Result<AuditReport> {
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(LabError::InvalidParameter(format!("alpha must be >= 1, got {alpha}")));
    }
    let n = n_samples.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let calibration = draw_many(&mut rng, n, alpha);
    let audit = draw_many(&mut rng, n, alpha);
    let needed = |set: &[SeparationSample]| -> Vec<Option<f64>> {
        set.par_iter()
            .map(|sm| separation_cases(sm, alpha, 0.0).needed_constant)
            .collect()
    };
    let cal_need = needed(&calibration);
    let fitted = cal_need.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let frozen = FREEZE_FACTOR * fitted;
    let aud_need = needed(&audit);
    let constrained: Vec<f64> = aud_need.iter().flatten().copied().collect();

    let mut rep = AuditReport::new(
        "critical_time_separation",
        Some(seed),
        2 * n,
        "every audit sample covered with the frozen constant",
    )
    .with_extra("alpha", alpha)
    .with_extra("calibrated_min", fitted)
    .with_extra("constrained_calibration", cal_need.iter().flatten().count() as f64)
    .with_extra("constrained_audit", constrained.len() as f64);
    rep.fitted_constant = Some(frozen);
    rep.distribution = Distribution::of(&constrained);
    if !(frozen.is_finite() && frozen > 0.0) {
        rep.offend(Offender::new(&[("alpha", alpha)], fitted));
    }
    let mut uncovered = 0usize;
    for (sm, need) in audit.iter().zip(&aud_need) {
        if let Some(v) = need {
            if !(*v >= frozen) {
                uncovered += 1;
                rep.offend(Offender::new(
                    &[
                        ("beta", sm.beta),
                        ("xi", sm.xi),
                        ("eta", sm.eta),
                        ("m", sm.m as f64),
                        ("k", sm.k as f64),
                        ("t", sm.t),
                    ],
                    *v,
                ));
            }
        }
    }
    rep.extra.insert("uncovered".into(), uncovered as f64);
    Ok(rep)
}
