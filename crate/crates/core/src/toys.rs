//! Strong- and weak-resonance toy models.
//!
//! The strong model couples a non-resonant and a resonant amplitude across a
//! very critical interval; the weak model is the scalar ODE whose solution
//! defines `g`. Both are integrated with classical RK4 and a Richardson check.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::weights::{e_floor, frak_g, pow_s, rho, MultiplierParams};

// two orders of margin below the 1e-8 accuracy we report
const RICHARDSON_TOL: f64 = 1e-10;
const MAX_STEPS: usize = 1 << 26;
const DENSE_LIMIT: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ToyKind {
    Strong,
    Weak,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ToyMeta {
    pub kind: ToyKind,
    pub k: i64,
    pub eta: f64,
    pub beta: f64,
    pub kappa: f64,
    pub nu: f64,
    pub steps: usize,
    /// Richardson estimate of the relative error of the final value.
    pub error_estimate: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ToyTrajectory {
    pub times: Vec<f64>,
    /// `f_NR` for the strong model, `g` for the weak model.
    pub first: Vec<f64>,
    /// `f_R` for the strong model; empty for the weak model.
    pub second: Vec<f64>,
    pub meta: ToyMeta,
}

impl ToyTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_value(&self) -> (f64, Option<f64>) {
        (*self.first.last().unwrap(), self.second.last().copied())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        match self.meta.kind {
            ToyKind::Strong => {
                w.write_record(["t", "f_NR", "f_R"])?;
                for i in 0..self.len() {
                    w.serialize((self.times[i], self.first[i], self.second[i]))?;
                }
            }
            ToyKind::Weak => {
                w.write_record(["t", "g"])?;
                for i in 0..self.len() {
                    w.serialize((self.times[i], self.first[i]))?;
                }
            }
        }
        w.flush().map_err(|e| LabError::io("<csv>", e))?;
        Ok(())
    }
}

/// Data of the very critical interval `[t^-, t^+]` of `(k, eta)`.
#[derive(Clone, Copy, Debug)]
pub struct StrongSetup {
    pub rho: f64,
    pub center: f64,
    pub t_minus: f64,
    pub t_plus: f64,
    pub kappa: f64,
}

impl StrongSetup {
    pub fn new(k: i64, eta: f64, p: &MultiplierParams) -> Result<Self> {
        let abs = eta.abs();
        let ka = k.unsigned_abs() as usize;
        if (k as f64) * eta <= 0.0 {
            return Err(LabError::EmptyInterval(format!("k eta must be positive, got k={k}, eta={eta}")));
        }
        let e_s = if abs >= 1.0 { e_floor(pow_s(abs, p.s)) } else { 0 };
        if ka < 1 || ka > e_s {
            return Err(LabError::EmptyInterval(format!(
                "|k|={ka} outside 1..=E(|eta|^s)={e_s} for eta={eta}"
            )));
        }
        let r = rho(ka as f64, abs, p.beta);
        let center = abs / ka as f64;
        Ok(StrongSetup {
            rho: r,
            center,
            t_minus: center - r / 8.0,
            t_plus: center + r / 8.0,
            kappa: p.kappa,
        })
    }

    fn rhs(&self, t: f64, y: [f64; 2]) -> [f64; 2] {
        let tau = t - self.center;
        [
            self.kappa * self.rho / (1.0 + tau * tau) * y[1],
            self.kappa / self.rho * y[0],
        ]
    }

    pub fn default_steps(&self) -> usize {
        let len = self.t_plus - self.t_minus;
        256usize.max((16.0 * len).ceil() as usize)
    }

    /// Fixed-step RK4 over the interval; returns the sampled trajectory.
    pub fn integrate_fixed(&self, init: (f64, f64), n: usize, record: bool) -> (Vec<f64>, Vec<[f64; 2]>) {
        let h = (self.t_plus - self.t_minus) / n as f64;
        let mut y = [init.0, init.1];
        let mut times = vec![self.t_minus];
        let mut ys = vec![y];
        for i in 0..n {
            let t = self.t_minus + i as f64 * h;
            let k1 = self.rhs(t, y);
            let k2 = self.rhs(t + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
            let k3 = self.rhs(t + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
            let k4 = self.rhs(t + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
            for c in 0..2 {
                y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
            if record || i + 1 == n {
                times.push(if i + 1 == n { self.t_plus } else { t + h });
                ys.push(y);
            }
        }
        (times, ys)
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Integrate the strong-resonance model across the very critical interval of
/// `(k, eta)` starting from `init = (f_NR(t^-), f_R(t^-))`.
pub fn integrate_strong(k: i64, eta: f64, p: &MultiplierParams, init: (f64, f64)) -> Result<ToyTrajectory> {
    let setup = StrongSetup::new(k, eta, p)?;
    let mut n = setup.default_steps();
    let mut coarse = setup.integrate_fixed(init, n, false).1.pop().unwrap();
    loop {
        if 2 * n > MAX_STEPS {
            return Err(LabError::DegenerateSeries(format!("strong model did not converge at {n} steps")));
        }
        let (times, ys) = setup.integrate_fixed(init, 2 * n, 2 * n <= DENSE_LIMIT);
        let fine = *ys.last().unwrap();
        let err = rel_diff(fine[0], coarse[0]).max(rel_diff(fine[1], coarse[1])) / 15.0;
        if err < RICHARDSON_TOL {
            return Ok(ToyTrajectory {
                first: ys.iter().map(|y| y[0]).collect(),
                second: ys.iter().map(|y| y[1]).collect(),
                times,
                meta: ToyMeta {
                    kind: ToyKind::Strong,
                    k,
                    eta,
                    beta: p.beta,
                    kappa: p.kappa,
                    nu: p.nu,
                    steps: 2 * n,
                    error_estimate: err,
                },
            });
        }
        n *= 2;
        coarse = fine;
    }
}

/// Growth of `f_NR` across a very critical interval next to the weight jump `rho^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StrongAmplification {
    pub k: i64,
    pub eta: f64,
    pub rho: f64,
    /// `f_NR(t^+) / f_NR(t^-)` from data `(1, 0)`.
    pub amplification: f64,
    /// Same ratio from data `(1, 1)`.
    pub amplification_mixed: f64,
    pub weight_jump: f64,
}

impl StrongAmplification {
    pub fn ratio(&self) -> f64 {
        self.amplification / self.weight_jump
    }
}

pub fn strong_amplification(k: i64, eta: f64, p: &MultiplierParams) -> Result<StrongAmplification> {
    let traj = integrate_strong(k, eta, p, (1.0, 0.0))?;
    let mixed = integrate_strong(k, eta, p, (1.0, 1.0))?;
    let r = StrongSetup::new(k, eta, p)?.rho;
    Ok(StrongAmplification {
        k,
        eta,
        rho: r,
        amplification: traj.final_value().0,
        amplification_mixed: mixed.final_value().0,
        weight_jump: r * r,
    })
}

/// Rate `d/dt log g` on `I_k` written out directly from the ODE.
pub fn weak_rate(t: f64, k: usize, eta: f64, p: &MultiplierParams) -> f64 {
    let abs = eta.abs();
    let kf = k as f64;
    let tau = t - abs / kf;
    let e_s = e_floor(pow_s(abs, p.s));
    if k <= e_s {
        let r = rho(kf, abs, p.beta);
        p.kappa * r / (r * r + tau * tau)
    } else {
        let x = p.nu.cbrt() * abs / kf;
        p.kappa * frak_g(p.nu, abs, p.s, p.beta) * (1.0 + x * x).powf(-0.75) * p.nu.powf(p.beta) * abs / (kf * kf)
            / (1.0 + tau * tau)
    }
}

fn weak_steps(k: usize, eta: f64, p: &MultiplierParams, mult: usize) -> usize {
    let abs = eta.abs();
    let kf = k as f64;
    let len = 2.0 * abs / (2.0 * kf - 1.0) - 2.0 * abs / (2.0 * kf + 1.0);
    let scale = if k <= e_floor(pow_s(abs, p.s)) { rho(kf, abs, p.beta) } else { 1.0 };
    mult * 8usize.max((4.0 * len / scale).ceil() as usize)
}

/// Backward RK4 on `g` itself from `g(2|eta|) = 1` down to `t_{E(|eta|),eta}`.
/// Returns the samples in increasing time.
pub fn weak_fixed(eta: f64, p: &MultiplierParams, mult: usize, record: bool) -> (Vec<f64>, Vec<f64>) {
    let abs = eta.abs();
    let e_full = e_floor(abs);
    let mut g = 1.0;
    let mut times = vec![2.0 * abs];
    let mut vals = vec![1.0];
    for k in 1..=e_full {
        let (hi, lo) = (2.0 * abs / (2 * k - 1) as f64, 2.0 * abs / (2 * k + 1) as f64);
        let n = weak_steps(k, abs, p, mult);
        let h = -(hi - lo) / n as f64;
        let f = |t: f64, y: f64| weak_rate(t, k, abs, p) * y;
        for i in 0..n {
            let t = hi + i as f64 * h;
            let k1 = f(t, g);
            let k2 = f(t + 0.5 * h, g + 0.5 * h * k1);
            let k3 = f(t + 0.5 * h, g + 0.5 * h * k2);
            let k4 = f(t + h, g + h * k3);
            g += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if record || i + 1 == n {
                times.push(if i + 1 == n { lo } else { t + h });
                vals.push(g);
            }
        }
    }
    times.reverse();
    vals.reverse();
    (times, vals)
}

/// Integrate the ODE defining `g` over `[t_{E(|eta|),eta}, 2|eta|]`.
pub fn integrate_weak(eta: f64, p: &MultiplierParams) -> Result<ToyTrajectory> {
    if eta.abs() < 1.0 {
        return Err(LabError::EmptyInterval(format!("weak model needs |eta| >= 1, got {eta}")));
    }
    let total = |m: usize| (1..=e_floor(eta.abs())).map(|k| weak_steps(k, eta, p, m)).sum::<usize>();
    let mut mult = 1;
    let mut coarse = weak_fixed(eta, p, mult, false).1[0];
    loop {
        if total(2 * mult) > MAX_STEPS {
            return Err(LabError::DegenerateSeries(format!("weak model did not converge for eta={eta}")));
        }
        let record = total(2 * mult) <= DENSE_LIMIT;
        let (times, vals) = weak_fixed(eta, p, 2 * mult, record);
        let err = rel_diff(vals[0], coarse) / 15.0;
        if err < RICHARDSON_TOL {
            return Ok(ToyTrajectory {
                times,
                first: vals,
                second: Vec::new(),
                meta: ToyMeta {
                    kind: ToyKind::Weak,
                    k: 0,
                    eta,
                    beta: p.beta,
                    kappa: p.kappa,
                    nu: p.nu,
                    steps: total(2 * mult),
                    error_estimate: err,
                },
            });
        }
        coarse = vals[0];
        mult *= 2;
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CascadeReport {
    pub eta: f64,
    pub beta: f64,
    /// `E(|eta|^s)`, the number of resonant intervals.
    pub intervals: usize,
    /// `log prod_k rho_k^{1 + 2 C1 kappa}`.
    pub log_growth: f64,
    /// `(mu/2)|eta|^s - (mu s/4) log|eta|` with `mu = 2 (2 - 3 beta)(1 + 2 C1 kappa)`.
    pub stirling: f64,
    /// Stirling constant `-(1 + 2 C1 kappa)(2 - 3 beta) log(2 pi) / 2`.
    pub stirling_constant: f64,
}

impl CascadeReport {
    pub fn ratio(&self) -> f64 {
        self.log_growth / self.stirling
    }
}

pub fn mu(p: &MultiplierParams) -> f64 {
    2.0 * (2.0 - 3.0 * p.beta) * p.jump_exponent()
}

/// Total growth of the strong cascade from `k = E(|eta|^s)` down to `k = 1`.
pub fn cascade_amplification(eta: f64, p: &MultiplierParams) -> Result<CascadeReport> {
    let abs = eta.abs();
    if abs < 1.0 {
        return Err(LabError::EmptyInterval(format!("cascade needs |eta| >= 1, got {eta}")));
    }
    let n = e_floor(pow_s(abs, p.s));
    let j = p.jump_exponent();
    let log_growth = (1..=n).map(|k| j * rho(k as f64, abs, p.beta).ln()).sum();
    let m = mu(p);
    Ok(CascadeReport {
        eta,
        beta: p.beta,
        intervals: n,
        log_growth,
        stirling: 0.5 * m * pow_s(abs, p.s) - 0.25 * m * p.s * abs.ln(),
        stirling_constant: -0.5 * j * (2.0 - 3.0 * p.beta) * (2.0 * std::f64::consts::PI).ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightTable;

    fn params(beta: f64) -> MultiplierParams {
        MultiplierParams::new(beta, 1e-4).unwrap()
    }

    #[test]
    fn zero_data_stays_zero() {
        let tr = integrate_strong(1, 100.0, &params(0.0), (0.0, 0.0)).unwrap();
        assert!(tr.first.iter().chain(&tr.second).all(|&v| v == 0.0));
    }

    #[test]
    fn out_of_range_modes_rejected() {
        let p = params(0.0);
        assert!(matches!(integrate_strong(11, 100.0, &p, (1.0, 0.0)), Err(LabError::EmptyInterval(_))));
        assert!(matches!(integrate_strong(-1, 100.0, &p, (1.0, 0.0)), Err(LabError::EmptyInterval(_))));
        assert!(matches!(integrate_strong(0, 100.0, &p, (1.0, 0.0)), Err(LabError::EmptyInterval(_))));
        assert!(integrate_weak(0.5, &p).is_err());
        assert!(integrate_strong(-2, -100.0, &p, (1.0, 0.0)).is_ok());
    }

    #[test]
    fn large_eta_single_resonance_is_finite_and_positive() {
        let tr = integrate_strong(1, 1e4, &params(0.0), (1.0, 0.0)).unwrap();
        let (nr, r) = tr.final_value();
        let ratio = r.unwrap() / tr.first[0];
        assert!(ratio.is_finite() && ratio > 0.0);
        assert!(nr.is_finite() && nr > 1.0);
        assert!(tr.meta.error_estimate < 1e-10);
    }

    #[test]
    fn energy_nondecreasing() {
        for init in [(1.0, 0.0), (1.0, 1.0), (0.2, 3.0)] {
            let tr = integrate_strong(2, 400.0, &params(0.0), init).unwrap();
            let e: Vec<f64> = tr.first.iter().zip(&tr.second).map(|(a, b)| a * a + b * b).collect();
            assert!(e.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-15)));
            assert!(tr.first[1..].iter().chain(&tr.second[1..]).all(|&v| v > 0.0));
        }
    }

    fn order(errs: [f64; 3]) -> f64 {
        ((errs[0] - errs[1]).abs() / (errs[1] - errs[2]).abs()).log2()
    }

    #[test]
    fn strong_integrator_fourth_order() {
        let setup = StrongSetup::new(1, 64.0, &params(0.0)).unwrap();
        let run = |n: usize| setup.integrate_fixed((1.0, 0.5), n, false).1.last().unwrap()[0];
        let o = order([run(512), run(1024), run(2048)]);
        assert!((o - 4.0).abs() <= 0.5, "order {o}");
    }

    #[test]
    fn weak_integrator_fourth_order() {
        let p = params(1.0 / 6.0);
        let run = |m: usize| weak_fixed(50.0, &p, m, false).1[0];
        let o = order([run(4), run(8), run(16)]);
        assert!((o - 4.0).abs() <= 0.5, "order {o}");
    }

    #[test]
    fn weak_model_matches_closed_form() {
        for &(beta, eta) in &[(0.0, 37.5), (0.25, 1e4), (1.0 / 6.0, 2000.0)] {
            let p = params(beta);
            let tr = integrate_weak(eta, &p).unwrap();
            assert_eq!(*tr.first.last().unwrap(), 1.0);
            assert_eq!(*tr.times.last().unwrap(), 2.0 * eta);
            let closed = WeightTable::new(eta, &p).log_g_floor().exp();
            assert!(rel_diff(tr.first[0], closed) < 1e-8, "beta {beta} eta {eta}: {} vs {closed}", tr.first[0]);
        }
    }

    #[test]
    fn cascade_examples() {
        let c = cascade_amplification(16.0, &params(0.0)).unwrap();
        let oracle: f64 = (1..=4).map(|k| 2.0 * (16.0 / (k * k) as f64).ln()).sum();
        assert!((c.log_growth - oracle).abs() < 1e-12);
        assert!((c.log_growth - 2.0 * (1024.0f64 / 9.0).ln()).abs() < 1e-12);
        let s0 = cascade_amplification(1e5, &MultiplierParams::new(1.0 / 3.0, 1e-4).unwrap()).unwrap();
        assert_eq!(s0.intervals, 1);
        assert_eq!(s0.log_growth, 0.0);
        let big = cascade_amplification(1e6, &params(0.0)).unwrap();
        assert!((big.ratio() - 1.0).abs() < 0.01);
    }

    #[test]
    fn csv_schema() {
        let tr = integrate_strong(1, 16.0, &params(0.0), (1.0, 0.0)).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,f_NR,f_R");
        assert_eq!(lines.count(), tr.len());
    }
}
