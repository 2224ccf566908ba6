//! One-dimensional coordinate functions `v(t,y)`, `h`, `q`, `h_bar` rebuilt
//! from the zero mode of a sheared-frame run.
//!
//! Profiles are spectral in `y` with the frequencies `eta_j = j / L_v` of the
//! simulation grid. Quantities the analysis writes in the `v` variable are
//! evaluated at `v = y`; `||h||_{L^inf}` measures how far that is from exact.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::bracket;
use crate::nlsolve::ZeroModeSample;
use crate::numerics::gauss_legendre;
use crate::weights::MultiplierEvaluator;

/// Real function of `y` on `[-pi L_v, pi L_v)` given by its coefficients
/// for `j in [-M, M]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub lv: f64,
    pub coef: Vec<Complex64>,
}

impl Profile {
    pub fn zeros(lv: f64, mv: usize) -> Self {
        Profile {
            lv,
            coef: vec![Complex64::new(0.0, 0.0); 2 * mv + 1],
        }
    }

    pub fn from_coefficients(lv: f64, coef: Vec<Complex64>) -> Result<Self> {
        if coef.len() % 2 == 0 {
            return Err(LabError::GridIncompatible(format!("profile needs 2M+1 coefficients, got {}", coef.len())));
        }
        Ok(Profile { lv, coef })
    }

    pub fn mv(&self) -> usize {
        (self.coef.len() - 1) / 2
    }

    pub fn eta(&self, idx: usize) -> f64 {
        (idx as f64 - self.mv() as f64) / self.lv
    }

    pub fn map(&self, mut f: impl FnMut(f64, Complex64) -> Complex64) -> Profile {
        Profile {
            lv: self.lv,
            coef: self.coef.iter().enumerate().map(|(i, &c)| f(self.eta(i), c)).collect(),
        }
    }

    pub fn zip(&self, other: &Profile, mut f: impl FnMut(f64, Complex64, Complex64) -> Complex64) -> Profile {
        Profile {
            lv: self.lv,
            coef: (0..self.coef.len()).map(|i| f(self.eta(i), self.coef[i], other.coef[i])).collect(),
        }
    }

    pub fn dy(&self) -> Profile {
        self.map(|eta, c| c * Complex64::new(0.0, eta))
    }

    pub fn scale(&self, a: f64) -> Profile {
        self.map(|_, c| c * a)
    }

    /// `sum |c_j|^2 m(eta_j)^2 d_eta`, with `m` given in log form.
    pub fn weighted_norm_sq(&self, log_m: impl Fn(f64) -> f64) -> f64 {
        self.coef
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(i, c)| (2.0 * (c.norm().ln() + log_m(self.eta(i)))).exp())
            .sum::<f64>()
            / self.lv
    }

    pub fn l2_norm(&self) -> f64 {
        self.weighted_norm_sq(|_| 0.0).sqrt()
    }

    /// Samples at `y_b = -pi L_v + 2 pi L_v b / n`.
    pub fn to_physical(&self, n: usize) -> Vec<f64> {
        let m = self.mv() as i64;
        (0..n)
            .map(|b| {
                let y = -std::f64::consts::PI * self.lv + std::f64::consts::TAU * self.lv * b as f64 / n as f64;
                (-m..=m)
                    .map(|j| {
                        let c = self.coef[(j + m) as usize];
                        (c * Complex64::from_polar(1.0, j as f64 * y / self.lv)).re
                    })
                    .sum()
            })
            .collect()
    }

    pub fn sup_norm(&self, n: usize) -> f64 {
        self.to_physical(n).iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

/// `u_0(eta) = -i eta psi_0 = i w_0(eta) / eta`, the x-average of the
/// horizontal velocity perturbation.
pub fn velocity_from_vorticity(lv: f64, omega0: &[Complex64]) -> Result<Profile> {
    let p = Profile::from_coefficients(lv, omega0.to_vec())?;
    Ok(p.map(|eta, c| if eta == 0.0 { Complex64::new(0.0, 0.0) } else { c * Complex64::new(0.0, 1.0 / eta) }))
}

#[derive(Clone, Debug)]
pub struct ForcingSeries {
    pub times: Vec<f64>,
    pub u0: Vec<Profile>,
}

impl ForcingSeries {
    /// Zero-mode velocity series from recorded zero-mode vorticity rows.
    pub fn from_zero_modes(lv: f64, samples: &[ZeroModeSample]) -> Result<Self> {
        let u0 = samples
            .iter()
            .map(|s| velocity_from_vorticity(lv, &s.profile))
            .collect::<Result<Vec<_>>>()?;
        Ok(ForcingSeries {
            times: samples.iter().map(|s| s.t).collect(),
            u0,
        })
    }

    fn cadence(&self) -> Result<f64> {
        if self.times.is_empty() {
            return Err(LabError::DegenerateSeries("empty forcing series".into()));
        }
        if self.times[0] != 0.0 {
            return Err(LabError::InvalidParameter("forcing series must start at t = 0".into()));
        }
        if self.times.len() == 1 {
            return Ok(0.0);
        }
        let dt = self.times[1];
        for (n, &t) in self.times.iter().enumerate() {
            if (t - n as f64 * dt).abs() > 1e-9 * dt.max(t) {
                return Err(LabError::InvalidParameter(format!("forcing series is not uniform at sample {n}")));
            }
        }
        Ok(dt)
    }
}

#[derive(Clone, Debug)]
pub struct VSolution {
    pub nu: f64,
    pub times: Vec<f64>,
    /// `Phi = t (v - y)`.
    pub phi: Vec<Profile>,
    /// `v - y`; at `t = 0` the limit `u_0(0, y)`.
    pub v_minus_y: Vec<Profile>,
    /// Largest relative gap between the Duhamel sum and an independent
    /// Gauss-Legendre quadrature of the cubic interpolant.
    pub quadrature_residual: f64,
}

/// Weights `(p0, p1)` with `int_0^h e^{-a(h-s)} (u0 (1 - s/h) + u1 s/h) ds = p0 u0 + p1 u1`.
fn linear_heat_weights(a: f64, h: f64) -> (f64, f64) {
    let x = a * h;
    if x < 1e-2 {
        let p0 = 0.5 - x / 3.0 + x * x / 8.0 - x.powi(3) / 30.0 + x.powi(4) / 144.0 - x.powi(5) / 840.0;
        let p1 = 0.5 - x / 6.0 + x * x / 24.0 - x.powi(3) / 120.0 + x.powi(4) / 720.0 - x.powi(5) / 5040.0;
        (h * p0, h * p1)
    } else {
        let e = (-x).exp();
        (h * (1.0 - (1.0 + x) * e) / (x * x), h * (x - 1.0 + e) / (x * x))
    }
}

/// Duhamel solution of `(d_t - nu d_yy) Phi = u_0`, `Phi(0) = 0`. The forcing
/// is interpolated linearly between samples (trapezoid in time) and the heat
/// factors are integrated exactly against it.
pub fn solve_v(series: &ForcingSeries, nu: f64) -> Result<VSolution> {
    let dt = series.cadence()?;
    let first = &series.u0[0];
    let mut phi = vec![Profile::zeros(first.lv, first.mv())];
    for n in 1..series.times.len() {
        let prev = &phi[n - 1];
        let (u_prev, u_now) = (&series.u0[n - 1], &series.u0[n]);
        let next = prev.zip(u_prev, |eta, p, up| {
            let (w0, _) = linear_heat_weights(nu * eta * eta, dt);
            (-nu * eta * eta * dt).exp() * p + w0 * up
        });
        phi.push(next.zip(u_now, |eta, a, un| a + linear_heat_weights(nu * eta * eta, dt).1 * un));
    }
    let reference = gauss_duhamel(series, nu, dt);
    let quadrature_residual = phi
        .iter()
        .zip(&reference)
        .skip(1)
        .map(|(a, b)| {
            let d = a.zip(b, |_, x, y| x - y).l2_norm();
            let s = b.l2_norm();
            if s == 0.0 {
                d
            } else {
                d / s
            }
        })
        .fold(0.0, f64::max);
    let v_minus_y = phi
        .iter()
        .zip(&series.times)
        .enumerate()
        .map(|(n, (p, &t))| if n == 0 { series.u0[0].clone() } else { p.scale(1.0 / t) })
        .collect();
    Ok(VSolution {
        nu,
        times: series.times.clone(),
        phi,
        v_minus_y,
        quadrature_residual,
    })
}

/// Duhamel integral with cubic Lagrange interpolation of the forcing in time
/// and 8-point Gauss-Legendre on each cadence interval.
fn gauss_duhamel(series: &ForcingSeries, nu: f64, dt: f64) -> Vec<Profile> {
    let n_t = series.times.len();
    let (x, w) = gauss_legendre(8);
    let first = &series.u0[0];
    let mut out = vec![Profile::zeros(first.lv, first.mv())];
    for n in 1..n_t {
        // stencil of four samples around [t_{n-1}, t_n]
        let lo = (n as i64 - 2).clamp(0, (n_t as i64 - 4).max(0)) as usize;
        let hi = (lo + 4).min(n_t);
        let nodes: Vec<usize> = (lo..hi).collect();
        let prev = &out[n - 1];
        let t_n = series.times[n];
        let step = prev.map(|eta, c| c * (-nu * eta * eta * dt).exp());
        let mut add = Profile::zeros(first.lv, first.mv());
        for (xi, wi) in x.iter().zip(&w) {
            let tau = series.times[n - 1] + 0.5 * dt * (1.0 + xi);
            let weights: Vec<f64> = nodes
                .iter()
                .map(|&a| {
                    nodes
                        .iter()
                        .filter(|&&b| b != a)
                        .map(|&b| (tau - series.times[b]) / (series.times[a] - series.times[b]))
                        .product()
                })
                .collect();
            for (i, c) in add.coef.iter_mut().enumerate() {
                let eta = first.eta(i);
                let u: Complex64 = nodes.iter().zip(&weights).map(|(&a, &l)| series.u0[a].coef[i] * l).sum();
                *c += u * (0.5 * dt * wi * (-nu * eta * eta * (t_n - tau)).exp());
            }
        }
        out.push(step.zip(&add, |_, a, b| a + b));
    }
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CoordResiduals {
    /// `|| v' d_v v' - v'' || / ||v''||`, sup over samples.
    pub chain_rule: f64,
    /// `|| [d_t v] - q - nu v'' || / ||[d_t v]||` with centred differences in time.
    pub time_identity: Option<f64>,
    pub min_v_prime: f64,
    pub h_sup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordState {
    pub t: f64,
    pub v_minus_y: Profile,
    /// `h = v' - 1`.
    pub h: Profile,
    /// `v'' = d_yy v`.
    pub v_second: Profile,
    /// `q_bar = v - y`.
    pub q_bar: Profile,
    /// `q = (u_0 - q_bar) / t`, only for `t >= 1`.
    pub q: Option<Profile>,
    /// `h_bar = -(f_0 + h) / t`.
    pub h_bar: Profile,
    pub residuals: CoordResiduals,
    /// `v' > 0` everywhere on the sample grid.
    pub diffeomorphism: bool,
}

/// Number of physical samples for pointwise checks.
fn samples(p: &Profile) -> usize {
    4 * p.coef.len()
}

/// Coordinate fields at sample `n` of `v`; `f0` is the zero-mode vorticity and
/// `u0` the zero-mode velocity at that time.
pub fn derived_fields(v: &VSolution, n: usize, f0: &Profile, u0: &Profile) -> Result<CoordState> {
    let t = v.times[n];
    if !(t > 0.0) {
        return Err(LabError::InvalidParameter("coordinate fields need t > 0".into()));
    }
    let vy = &v.v_minus_y[n];
    let h = vy.dy();
    let v2 = h.dy();
    let q = if t >= 1.0 { Some(u0.zip(vy, |_, a, b| (a - b) / t)) } else { None };
    let h_bar = f0.zip(&h, |_, a, b| -(a + b) / t);

    let m = samples(vy);
    let v1: Vec<f64> = h.to_physical(m).into_iter().map(|x| x + 1.0).collect();
    let dv1 = v2.to_physical(m);
    // d_v v' through the chain rule: d_y (v'(t, v(t,y))) = (d_v v') v'
    let chain: f64 = v1.iter().zip(&dv1).map(|(a, b)| (a * (b / a) - b).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = dv1.iter().map(|b| b * b).sum::<f64>().sqrt();
    let min_v1 = v1.iter().cloned().fold(f64::INFINITY, f64::min);

    let time_identity = if n >= 1 && n + 1 < v.times.len() {
        let q_any = u0.zip(vy, |_, a, b| (a - b) / t);
        let dt = v.times[n + 1] - v.times[n - 1];
        let dtv = v.v_minus_y[n + 1].zip(&v.v_minus_y[n - 1], |_, a, b| (a - b) / dt);
        let rhs = q_any.zip(&v2, |_, a, b| a + v.nu * b);
        let d = dtv.zip(&rhs, |_, a, b| a - b).l2_norm();
        let s = dtv.l2_norm();
        Some(if s > 0.0 { d / s } else { d })
    } else {
        None
    };
    Ok(CoordState {
        t,
        v_minus_y: vy.clone(),
        h_bar,
        q,
        q_bar: vy.clone(),
        residuals: CoordResiduals {
            chain_rule: if scale > 0.0 { chain / scale } else { chain },
            time_identity,
            min_v_prime: min_v1,
            h_sup: h.sup_norm(m),
        },
        diffeomorphism: min_v1 > 0.0,
        h,
        v_second: v2,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CoordEnergy {
    /// `nu^beta t^3 ||(A / <d_v>^s) q||^2`.
    pub q_weighted: f64,
    /// `t^4 ||A^gamma q||^2`.
    pub q_gamma: f64,
    /// `nu^beta t^3 ||(A / <d_v>^s) h_bar||^2`.
    pub h_bar_weighted: f64,
    /// `epsilon nu^beta ||A^R h||^2`.
    pub h_resonant: f64,
}

/// Components of the coordinate energy; `q` terms vanish before `t = 1`.
pub fn coord_energy(c: &CoordState, ev: &MultiplierEvaluator, epsilon: f64) -> CoordEnergy {
    let p = ev.params();
    let slice = ev.at(c.t);
    let nub = p.nu.powf(p.beta);
    let a_over = |eta: f64| slice.a(0, eta).log_value - p.s * bracket(eta).ln();
    let (qw, qg) = match &c.q {
        Some(q) => (
            nub * c.t.powi(3) * q.weighted_norm_sq(a_over),
            c.t.powi(4) * q.weighted_norm_sq(|eta| slice.log_a_gamma(0, eta)),
        ),
        None => (0.0, 0.0),
    };
    CoordEnergy {
        q_weighted: qw,
        q_gamma: qg,
        h_bar_weighted: nub * c.t.powi(3) * c.h_bar.weighted_norm_sq(a_over),
        h_resonant: epsilon * nub * c.h.weighted_norm_sq(|eta| slice.a_r(eta).log_value),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordRow {
    pub t: f64,
    pub residuals: CoordResiduals,
    pub energy: Option<CoordEnergy>,
}

/// Coordinate diagnostics at every sample with `t > 0`.
pub fn coordinate_series(
    lv: f64,
    zero_modes: &[ZeroModeSample],
    nu: f64,
    ev: Option<&MultiplierEvaluator>,
    epsilon: f64,
) -> Result<(VSolution, Vec<CoordRow>)> {
    let series = ForcingSeries::from_zero_modes(lv, zero_modes)?;
    let v = solve_v(&series, nu)?;
    let rows = (1..v.times.len())
        .into_par_iter()
        .map(|n| {
            let f0 = Profile::from_coefficients(lv, zero_modes[n].profile.clone())?;
            let c = derived_fields(&v, n, &f0, &series.u0[n])?;
            Ok(CoordRow {
                t: c.t,
                residuals: c.residuals,
                energy: ev.map(|e| coord_energy(&c, e, epsilon)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((v, rows))
}

pub const COORD_COLUMNS: [&str; 10] = [
    "t",
    "chain_rule",
    "time_identity",
    "min_v_prime",
    "h_sup",
    "q_weighted",
    "q_gamma",
    "h_bar_weighted",
    "h_resonant",
    "energy_enabled",
];

pub fn write_coord_csv<W: Write>(rows: &[CoordRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COORD_COLUMNS)?;
    for r in rows {
        let e = r.energy.unwrap_or(CoordEnergy {
            q_weighted: f64::NAN,
            q_gamma: f64::NAN,
            h_bar_weighted: f64::NAN,
            h_resonant: f64::NAN,
        });
        let rec: Vec<String> = [
            r.t,
            r.residuals.chain_rule,
            r.residuals.time_identity.unwrap_or(f64::NAN),
            r.residuals.min_v_prime,
            r.residuals.h_sup,
            e.q_weighted,
            e.q_gamma,
            e.h_bar_weighted,
            e.h_resonant,
        ]
        .iter()
        .map(|v| format!("{v:e}"))
        .chain(std::iter::once(u8::from(r.energy.is_some()).to_string()))
        .collect();
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| LabError::io("<csv>", e))?;
    Ok(())
}
