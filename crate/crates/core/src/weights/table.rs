//! Per-frequency tables for `w_NR`, `w_R` and `g`, built by backward
//! recursion from large times where every weight equals one.

use std::io::Write;

use serde::Serialize;

use super::layout::{interval_index, t_crit};
use super::multiplier::frak_g;
use super::{e_floor, pow_s, rho, MultiplierParams};
use crate::error::Result;

#[derive(Clone, Copy, Debug)]
struct ResonantSegment {
    rho: f64,
    a: f64,
    center: f64,
    t_minus: f64,
    t_plus: f64,
    /// `log w_NR(t^+_{k,eta})`.
    log_w_plus: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug)]
pub struct WeightTable {
    eta: f64,
    e_s: usize,
    e_full: usize,
    c1_kappa: f64,
    jump: f64,
    /// Index `k - 1` holds the data of resonant interval `k`.
    segments: Vec<ResonantSegment>,
    log_w_floor: f64,
    /// `log g(t_{k,eta})` for `k = 0..=e_full`.
    log_g_at: Vec<f64>,
    /// `(amplitude, scale)` of the `g` rate `amp * scale / (scale^2 + tau^2)` on `I_k`.
    g_rate: Vec<(f64, f64)>,
}

impl WeightTable {
    pub fn new(eta: f64, p: &MultiplierParams) -> Self {
        let abs = eta.abs();
        let (e_s, e_full) = if abs >= 1.0 {
            (e_floor(pow_s(abs, p.s)), e_floor(abs))
        } else {
            (0, 0)
        };
        let c1_kappa = p.c1_kappa();
        let jump = p.jump_exponent();

        let mut segments = Vec::with_capacity(e_s);
        let mut log_w = 0.0;
        for k in 1..=e_s {
            let r = rho(k as f64, abs, p.beta);
            let center = abs / k as f64;
            segments.push(ResonantSegment {
                rho: r,
                a: 8.0 * (1.0 - 1.0 / r),
                center,
                t_minus: center - r / 8.0,
                t_plus: center + r / 8.0,
                log_w_plus: log_w,
            });
            log_w -= jump * r.ln();
        }

        let mut log_g_at = vec![0.0; e_full + 1];
        let mut g_rate = vec![(0.0, 1.0); e_full + 1];
        if e_full > 0 {
            let fg = frak_g(p.nu, abs, p.s, p.beta);
            let nu13 = p.nu.cbrt();
            for k in 1..=e_full {
                let kf = k as f64;
                let (amp, scale) = if k <= e_s {
                    (p.kappa, rho(kf, abs, p.beta))
                } else {
                    let x = nu13 * abs / kf;
                    let damp = (1.0 + x * x).powf(-0.75);
                    (p.kappa * fg * damp * p.nu.powf(p.beta) * abs / (kf * kf), 1.0)
                };
                g_rate[k] = (amp, scale);
                let full = (abs / ((2.0 * kf - 1.0) * kf) / scale).atan() + (abs / ((2.0 * kf + 1.0) * kf) / scale).atan();
                log_g_at[k] = log_g_at[k - 1] - amp * full;
            }
        }

        WeightTable {
            eta: abs,
            e_s,
            e_full,
            c1_kappa,
            jump,
            segments,
            log_w_floor: log_w,
            log_g_at,
            g_rate,
        }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn e_s(&self) -> usize {
        self.e_s
    }
    pub fn e_full(&self) -> usize {
        self.e_full
    }

    /// `log w(0, eta)`, the floor reached below the last resonant interval.
    pub fn log_w_floor(&self) -> f64 {
        self.log_w_floor
    }

    /// `log g(0, eta)`.
    pub fn log_g_floor(&self) -> f64 {
        self.log_g_at[self.e_full]
    }

    fn locate(&self, t: f64) -> Option<(&ResonantSegment, Option<Side>)> {
        if self.e_s == 0 {
            return None;
        }
        let k = interval_index(t, self.eta);
        if k == 0 || k > self.e_s {
            return None;
        }
        let seg = &self.segments[k - 1];
        let side = if t < seg.t_minus || t >= seg.t_plus {
            None
        } else if t < seg.center {
            Some(Side::Left)
        } else {
            Some(Side::Right)
        };
        Some((seg, side))
    }

    /// `(log w_NR, d/dt log w_NR)` at `t`.
    pub fn log_w_nr(&self, t: f64) -> (f64, f64) {
        if self.e_s == 0 || t >= self.segments[0].t_plus {
            return (0.0, 0.0);
        }
        let Some((seg, side)) = self.locate(t) else {
            return (self.log_w_floor, 0.0);
        };
        match side {
            None if t < seg.t_minus => (seg.log_w_plus - self.jump * seg.rho.ln(), 0.0),
            None => (seg.log_w_plus, 0.0),
            Some(Side::Right) => {
                let x = 1.0 + seg.a * (t - seg.center);
                (
                    seg.log_w_plus + self.c1_kappa * (x.ln() - seg.rho.ln()),
                    self.c1_kappa * seg.a / x,
                )
            }
            Some(Side::Left) => {
                let x = 1.0 + seg.a * (seg.center - t);
                let at_center = seg.log_w_plus - self.c1_kappa * seg.rho.ln();
                (
                    at_center - (1.0 + self.c1_kappa) * x.ln(),
                    (1.0 + self.c1_kappa) * seg.a / x,
                )
            }
        }
    }

    /// `(log w_R, d/dt log w_R)`; differs from `w_NR` only on very critical intervals.
    pub fn log_w_r(&self, t: f64) -> (f64, f64) {
        let (lw, dw) = self.log_w_nr(t);
        match self.locate(t) {
            Some((seg, Some(side))) => {
                let tau = (t - seg.center).abs();
                let x = 1.0 + seg.a * tau;
                let d = match side {
                    Side::Right => seg.a / x,
                    Side::Left => -seg.a / x,
                };
                (lw + x.ln() - seg.rho.ln(), dw + d)
            }
            _ => (lw, dw),
        }
    }

    /// True when `t` lies in the very critical interval of `|k|`.
    pub fn in_resonant_interval(&self, t: f64, k: usize) -> bool {
        k >= 1 && k <= self.e_s && {
            let seg = &self.segments[k - 1];
            t >= seg.t_minus && t < seg.t_plus
        }
    }

    /// `(log w_k, d/dt log w_k)`; the resonant branch requires `k eta > 0`.
    pub fn log_w_k(&self, t: f64, k: i64, same_sign: bool) -> (f64, f64) {
        if same_sign && self.in_resonant_interval(t, k.unsigned_abs() as usize) {
            self.log_w_r(t)
        } else {
            self.log_w_nr(t)
        }
    }

    /// `(log g, d/dt log g)` at `t`.
    pub fn log_g(&self, t: f64) -> (f64, f64) {
        if self.e_full == 0 {
            return (0.0, 0.0);
        }
        let k = interval_index(t, self.eta);
        if k == 0 {
            return (0.0, 0.0);
        }
        if k > self.e_full {
            return (self.log_g_floor(), 0.0);
        }
        let kf = k as f64;
        let (amp, scale) = self.g_rate[k];
        let tau = t - self.eta / kf;
        let offset = (self.eta / ((2.0 * kf + 1.0) * kf) / scale).atan();
        (
            self.log_g_at[k] + amp * ((tau / scale).atan() + offset),
            amp * scale / (scale * scale + tau * tau),
        )
    }

    /// Right-hand side of the `g` ODE divided by `g`, the rate on `I_k`.
    pub fn g_rate(&self, t: f64) -> f64 {
        self.log_g(t).1
    }

    /// Breakpoints of the table: `(k, t)` for `t_{k,eta}` and, for resonant
    /// `k`, `t^-`, `eta/k`, `t^+`.
    pub fn breakpoints(&self) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for k in 0..=self.e_full {
            out.push((k, t_crit(k, self.eta)));
            if k >= 1 && k <= self.e_s {
                let seg = &self.segments[k - 1];
                out.extend([(k, seg.t_minus), (k, seg.center), (k, seg.t_plus)]);
            }
        }
        out
    }
}

#[derive(Serialize)]
struct TableRow {
    eta: f64,
    k: usize,
    t_breakpoint: f64,
    w_nr: f64,
    w_r: f64,
    g: f64,
}

/// Audit dump with columns `eta, k, t_breakpoint, w_NR, w_R, g`.
pub fn write_table_csv<W: Write>(out: W, tables: &[&WeightTable]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(["eta", "k", "t_breakpoint", "w_NR", "w_R", "g"])?;
    for table in tables {
        for (k, t) in table.breakpoints() {
            w.serialize(TableRow {
                eta: table.eta,
                k,
                t_breakpoint: t,
                w_nr: table.log_w_nr(t).0.exp(),
                w_r: table.log_w_r(t).0.exp(),
                g: table.log_g(t).0.exp(),
            })?;
        }
    }
    w.flush().map_err(|e| crate::error::LabError::io("<csv>", e))?;
    Ok(())
}


#[cfg(test)]
impl WeightTable {
    /// Rate on `I_k` evaluated without interval lookup, for oracles.
    fn g_rate_on(&self, k: usize, t: f64) -> f64 {
        let (amp, scale) = self.g_rate[k];
        let tau = t - self.eta / k as f64;
        amp * scale / (scale * scale + tau * tau)
    }
}
