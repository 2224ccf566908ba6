//! One Lawson step: the sheared Laplacian is integrated exactly, the
//! transport term with the three-stage Heun scheme.

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::grid::{Grid, SpectralField, SpectralTransform};
use crate::linprop::{stream_function, viscous_integral};

/// Heun's third-order tableau.
const C2: f64 = 1.0 / 3.0;
const C3: f64 = 2.0 / 3.0;
const A21: f64 = 1.0 / 3.0;
const A32: f64 = 2.0 / 3.0;
const B1: f64 = 0.25;
const B3: f64 = 0.75;

/// Transport term `-(d_z psi d_v w - d_v psi d_z w)` and the peak advecting speed.
pub struct Transport {
    pub rhs: SpectralField,
    pub max_speed: f64,
    /// `|N(0,0)| / max |N|`, the mean of the nonlinear term (zero for a divergence).
    pub mean_defect: f64,
}

#[derive(Clone)]
pub struct Stepper {
    transform: SpectralTransform,
    nu: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepInfo {
    pub dt: f64,
    /// Largest admissible step at the start of the step.
    pub cfl_dt: f64,
    pub mean_defect: f64,
}

fn integrating_factor(f: &SpectralField, nu: f64, t0: f64, t1: f64) -> SpectralField {
    if nu == 0.0 {
        return f.clone();
    }
    f.apply_symbol(|k, eta| (-nu * viscous_integral(k, eta, t0, t1)).exp())
}

impl Stepper {
    pub fn new(grid: Grid, nu: f64) -> Self {
        Stepper {
            transform: SpectralTransform::new(grid),
            nu,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.transform.grid()
    }

    pub fn transform(&self) -> &SpectralTransform {
        &self.transform
    }

    pub fn transport(&self, omega: &SpectralField, t: f64) -> Result<Transport> {
        let psi = stream_function(omega, t);
        let (psi_z, psi_v) = self.transform.to_physical_pair(&psi.dz(), &psi.dv());
        let (w_z, w_v) = self.transform.to_physical_pair(&omega.dz(), &omega.dv());
        let mut speed: f64 = 0.0;
        let prod: Vec<f64> = (0..psi_z.len())
            .map(|i| {
                speed = speed.max(psi_z[i].abs()).max(psi_v[i].abs());
                psi_v[i] * w_z[i] - psi_z[i] * w_v[i]
            })
            .collect();
        let rhs = self.transform.from_physical(&prod)?;
        let max = rhs.max_abs();
        let mean = rhs.get(0, 0).norm();
        Ok(Transport {
            rhs,
            max_speed: speed,
            mean_defect: if max > 0.0 { mean / max } else { 0.0 },
        })
    }

    /// `safety * min(dz, dv) / max |u|`, infinite for a motionless state.
    pub fn cfl_limit(&self, max_speed: f64, safety: f64) -> f64 {
        let g = self.grid();
        if max_speed == 0.0 {
            f64::INFINITY
        } else {
            safety * g.dz().min(g.dv()) / max_speed
        }
    }

    /// Advance `omega` from `t` by `dt`. Steps longer than the CFL limit are
    /// rejected with the admissible value.
    pub fn step(&self, omega: &SpectralField, t: f64, dt: f64, safety: f64) -> Result<(SpectralField, StepInfo)> {
        let nu = self.nu;
        let s1 = self.transport(omega, t)?;
        let cfl_dt = self.cfl_limit(s1.max_speed, safety);
        if dt > cfl_dt {
            return Err(LabError::CflViolation {
                requested: dt,
                suggested: cfl_dt,
            });
        }
        let (t2, t3, t4) = (t + C2 * dt, t + C3 * dt, t + dt);
        let k1 = s1.rhs;

        let mut y2 = omega.clone();
        y2.axpy(A21 * dt, &k1);
        let y2 = integrating_factor(&y2, nu, t, t2);
        let k2 = self.transport(&y2, t2)?.rhs;

        let mut y3 = integrating_factor(omega, nu, t, t3);
        y3.axpy(A32 * dt, &integrating_factor(&k2, nu, t2, t3));
        let k3 = self.transport(&y3, t3)?.rhs;

        let mut head = omega.clone();
        head.axpy(B1 * dt, &k1);
        let mut out = integrating_factor(&head, nu, t, t4);
        out.axpy(B3 * dt, &integrating_factor(&k3, nu, t3, t4));
        out.set(0, 0, Complex64::new(out.get(0, 0).re, 0.0));
        out.check_finite()?;
        Ok((
            out,
            StepInfo {
                dt,
                cfl_dt,
                mean_defect: s1.mean_defect,
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linprop::exact_evolve_sheared;

    fn grid() -> Grid {
        Grid::with_resolution(48, 48, 1.0).unwrap()
    }

    fn smooth(g: Grid, amp: f64) -> SpectralField {
        let mut f = SpectralField::from_fn(g, |k, eta| {
            let r = k.unsigned_abs() as f64 + eta.abs();
            Complex64::new(amp * (-r).exp(), amp * 0.5 * (k as f64 - eta) * (-r).exp())
        });
        f.set(0, 0, Complex64::new(0.0, 0.0));
        f.enforce_hermitian();
        f
    }

    #[test]
    fn zero_stays_zero() {
        let g = grid();
        let st = Stepper::new(g, 1e-2);
        let (out, info) = st.step(&SpectralField::zeros(g), 0.0, 0.1, 0.4).unwrap();
        assert_eq!(out.max_abs(), 0.0);
        assert_eq!(info.cfl_dt, f64::INFINITY);
    }

    #[test]
    fn shear_mode_has_no_self_advection() {
        let g = grid();
        let mut w = SpectralField::zeros(g);
        w.set_real_mode(1, 0, Complex64::new(0.3, 0.1));
        let nu = 1e-2;
        let st = Stepper::new(g, nu);
        let mut f = w.clone();
        let mut t = 0.0;
        for _ in 0..40 {
            f = st.step(&f, t, 0.05, 0.4).unwrap().0;
            t += 0.05;
        }
        let exact = exact_evolve_sheared(&w, t, nu).unwrap();
        assert!((&f - &exact).max_abs() < 1e-10 * w.max_abs());
    }

    #[test]
    fn cfl_violation_reports_admissible_step() {
        let g = grid();
        let st = Stepper::new(g, 0.0);
        let w = smooth(g, 50.0);
        match st.step(&w, 0.0, 10.0, 0.4) {
            Err(LabError::CflViolation { requested, suggested }) => {
                assert_eq!(requested, 10.0);
                assert!(suggested < 10.0 && suggested > 0.0);
                assert!(st.step(&w, 0.0, suggested, 0.4).is_ok());
            }
            other => panic!("expected CFL violation, got {:?}", other.map(|x| x.1)),
        }
    }

    #[test]
    fn nonlinear_term_has_zero_mean_and_conserves_enstrophy() {
        let g = grid();
        let st = Stepper::new(g, 0.0);
        let w = smooth(g, 1.0);
        let tr = st.transport(&w, 0.7).unwrap();
        assert!(tr.mean_defect < 1e-13);
        // <w, N(w)> = 0 for the Galerkin-truncated transport
        let ip = w.inner(&tr.rhs).re;
        assert!(ip.abs() < 1e-13 * w.l2_norm() * tr.rhs.l2_norm(), "{ip}");
    }

    #[test]
    fn third_order_in_time() {
        let g = Grid::with_resolution(24, 24, 1.0).unwrap();
        let w = smooth(g, 1.0);
        let st = Stepper::new(g, 1e-2);
        let run = |n: usize| {
            let dt = 1.0 / n as f64;
            let mut f = w.clone();
            for i in 0..n {
                f = st.step(&f, i as f64 * dt, dt, 1.0).unwrap().0;
            }
            f
        };
        let (a, b, c) = (run(20), run(40), run(80));
        let order = ((&a - &b).l2_norm() / (&b - &c).l2_norm()).log2();
        assert!((order - 3.0).abs() < 0.3, "order {order}");
    }
}
