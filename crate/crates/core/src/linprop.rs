//! Exact propagator of the linearised problem around Couette flow.
//!
//! In the lab frame a mode is transported `eta + k t -> eta` and damped by the
//! time integral of the sheared Laplacian symbol. In the moving frame
//! `z = x - t y` the transport disappears and only the damping remains, which
//! is what the decay diagnostics use since it is exact at every `t`.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::{bracket, l1, SpectralField};
use crate::numerics::linear_fit;

/// `int_{t0}^{t1} k^2 + (eta - k tau)^2 dtau`, written without cancellation.
pub fn viscous_integral(k: i64, eta: f64, t0: f64, t1: f64) -> f64 {
    let k = k as f64;
    let a = eta - k * t0;
    let b = eta - k * t1;
    (t1 - t0) * (k * k + (a * a + a * b + b * b) / 3.0)
}

/// Lab-frame exponent `int_0^t |k|^2 + |eta - k s + k t|^2 ds`.
pub fn lab_viscous_integral(k: i64, eta: f64, t: f64) -> f64 {
    viscous_integral(k, eta + k as f64 * t, 0.0, t)
}

/// Symbol of the sheared Laplacian, `-(k^2 + (eta - k t)^2)`.
#[inline]
pub fn laplacian_l_symbol(k: i64, eta: f64, t: f64) -> f64 {
    let kf = k as f64;
    let e = eta - kf * t;
    -(kf * kf + e * e)
}

#[derive(Clone, Debug)]
pub struct LinearState {
    pub omega: SpectralField,
    pub t: f64,
    pub nu: f64,
}

impl LinearState {
    pub fn new(omega: SpectralField, nu: f64) -> Result<Self> {
        if !(nu >= 0.0) {
            return Err(LabError::InvalidParameter(format!("viscosity must be >= 0, got {nu}")));
        }
        Ok(LinearState { omega, t: 0.0, nu })
    }

    /// Advance the moving-frame vorticity to time `t`.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        if t < self.t {
            return Err(LabError::InvalidParameter(format!("cannot step back from {} to {t}", self.t)));
        }
        let (t0, nu) = (self.t, self.nu);
        self.omega
            .apply_symbol_in_place(|k, eta| (-nu * viscous_integral(k, eta, t0, t)).exp());
        self.t = t;
        Ok(())
    }

    pub fn stream_function(&self) -> SpectralField {
        stream_function(&self.omega, self.t)
    }
}

/// Moving-frame solution at time `t`.
pub fn exact_evolve_sheared(omega_in: &SpectralField, t: f64, nu: f64) -> Result<SpectralField> {
    let mut st = LinearState::new(omega_in.clone(), nu)?;
    st.advance_to(t)?;
    Ok(st.omega)
}

#[derive(Clone, Debug)]
pub struct Propagated {
    pub field: SpectralField,
    /// Output modes whose source `eta + k t` lies off the grid.
    pub truncated_modes: usize,
    /// Squared L2 norm of the input carried off the grid.
    pub lost_l2_sq: f64,
}

/// Lab-frame solution `w(t,k,eta) = w_in(k, eta + k t) exp(-nu int ...)`.
///
/// The shift is done by index arithmetic, so `t L_v` must be an integer
/// (up to 1e-9 relative); other times are rejected.
pub fn exact_evolve(omega_in: &SpectralField, t: f64, nu: f64) -> Result<Propagated> {
    if !(t >= 0.0) || !(nu >= 0.0) {
        return Err(LabError::InvalidParameter(format!("need t >= 0 and nu >= 0, got t={t}, nu={nu}")));
    }
    let grid = *omega_in.grid();
    let m = t * grid.lv();
    let shift = m.round();
    if (m - shift).abs() > 1e-9 * m.max(1.0) {
        return Err(LabError::GridIncompatible(format!(
            "t L_v = {m} is not an integer; the lab-frame shift would leave the eta lattice"
        )));
    }
    let shift = shift as i64;
    let mut out = SpectralField::zeros(grid);
    let mut truncated = 0;
    let mut kept = 0.0;
    for (k, j, _, _) in omega_in.modes().collect::<Vec<_>>() {
        let src = j + k * shift;
        if grid.contains(k, src) {
            let c = omega_in.get(k, src);
            kept += c.norm_sqr();
            let decay = (-nu * lab_viscous_integral(k, grid.eta(j), t)).exp();
            out.set(k, j, c * decay);
        } else {
            truncated += 1;
        }
    }
    let total: f64 = omega_in.coef().iter().map(|c| c.norm_sqr()).sum();
    Ok(Propagated {
        field: out,
        truncated_modes: truncated,
        lost_l2_sq: (total - kept).max(0.0) * grid.d_eta(),
    })
}

/// `psi = Delta_L^{-1} omega` in the moving frame, gauge `psi(0,0) = 0`.
pub fn stream_function(omega: &SpectralField, t: f64) -> SpectralField {
    omega.apply_symbol(|k, eta| {
        let s = laplacian_l_symbol(k, eta, t);
        if s == 0.0 {
            0.0
        } else {
            1.0 / s
        }
    })
}

pub fn laplacian_l(psi: &SpectralField, t: f64) -> SpectralField {
    psi.apply_symbol(|k, eta| laplacian_l_symbol(k, eta, t))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub t: f64,
    /// `||d_y P_!= psi||`.
    pub dy_psi: f64,
    /// `<t> ||d_x P_!= psi||`.
    pub t_dx_psi: f64,
    /// `||P_!= omega||`.
    pub omega_neq: f64,
}

/// Fit of `log(series / normaliser) = log C - c nu t^3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundFit {
    pub big_c: f64,
    /// `None` when `nu = 0`; then `big_c` is the maximal ratio.
    pub small_c: Option<f64>,
    pub rms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub nu: f64,
    pub rows: Vec<DecayRow>,
    /// `||P_!= omega_in||_{H^2}`, the normaliser of the damping bound.
    pub h2_norm_in: f64,
    pub l2_norm_in: f64,
    /// `(||d_y psi|| + <t>||d_x psi||) <t> / ||omega_in||_{H^2}`.
    pub damping_fit: BoundFit,
    /// `||P_!= omega|| / ||P_!= omega_in||`.
    pub dissipation_fit: BoundFit,
    /// Log-log slopes of `||d_y psi||` and `||d_x psi||` over the full series.
    pub slope_dy_psi: f64,
    pub slope_dx_psi: f64,
}

pub const DECAY_CSV_HEADER: [&str; 4] = ["t", "dy_psi", "t_dx_psi", "omega_neq"];

fn bound_fit(times: &[f64], ratio: &[f64], nu: f64) -> BoundFit {
    let y: Vec<f64> = ratio.iter().map(|r| r.ln()).collect();
    if nu == 0.0 || times.len() < 2 {
        let max = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        return BoundFit {
            big_c: max.exp(),
            small_c: None,
            rms: 0.0,
        };
    }
    let x: Vec<f64> = times.iter().map(|t| nu * t.powi(3)).collect();
    let (a, b, rms) = linear_fit(&x, &y);
    BoundFit {
        big_c: a.exp(),
        small_c: Some(-b),
        rms,
    }
}

/// Evaluate the damping and dissipation norms along `times` and fit them.
pub fn decay_report(omega_in: &SpectralField, nu: f64, times: &[f64]) -> Result<DecayReport> {
    if times.windows(2).any(|w| w[1] <= w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(LabError::InvalidParameter("report times must be nonnegative and increasing".into()));
    }
    let neq = omega_in.nonzero_modes();
    let l2_in = neq.l2_norm();
    let h2_in = neq.sobolev_norm(2.0);
    if l2_in == 0.0 {
        return Err(LabError::DegenerateSeries("initial data has no nonzero modes".into()));
    }
    let rows: Vec<DecayRow> = times
        .iter()
        .map(|&t| {
            let w = exact_evolve_sheared(&neq, t, nu).expect("validated inputs");
            let psi = stream_function(&w, t);
            let dx = psi.weighted_norm_sq(|k, _| k as f64).sqrt();
            let dy = psi.weighted_norm_sq(|k, eta| eta - k as f64 * t).sqrt();
            DecayRow {
                t,
                dy_psi: dy,
                t_dx_psi: bracket(t) * dx,
                omega_neq: w.l2_norm(),
            }
        })
        .collect();
    let positive = rows.iter().all(|r| r.omega_neq > 0.0 && r.dy_psi + r.t_dx_psi > 0.0);
    if !positive {
        return Err(LabError::DegenerateSeries("a norm underflowed to zero; shorten the window".into()));
    }
    let damp: Vec<f64> = rows.iter().map(|r| (r.dy_psi + r.t_dx_psi) * bracket(r.t) / h2_in).collect();
    let diss: Vec<f64> = rows.iter().map(|r| r.omega_neq / l2_in).collect();
    let slope = |vals: Vec<f64>| {
        let pts: Vec<(f64, f64)> = times.iter().zip(vals).filter(|(t, _)| **t > 0.0).map(|(t, v)| (t.ln(), v.ln())).collect();
        if pts.len() < 2 {
            f64::NAN
        } else {
            let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            linear_fit(&x, &y).1
        }
    };
    Ok(DecayReport {
        nu,
        h2_norm_in: h2_in,
        l2_norm_in: l2_in,
        damping_fit: bound_fit(times, &damp, nu),
        dissipation_fit: bound_fit(times, &diss, nu),
        slope_dy_psi: slope(rows.iter().map(|r| r.dy_psi).collect()),
        slope_dx_psi: slope(rows.iter().map(|r| r.t_dx_psi / bracket(r.t)).collect()),
        rows,
    })
}

impl DecayReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(DECAY_CSV_HEADER)?;
        for r in &self.rows {
            w.serialize((r.t, r.dy_psi, r.t_dx_psi, r.omega_neq))?;
        }
        w.flush().map_err(|e| LabError::io("<csv>", e))?;
        Ok(())
    }

    pub fn summary_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Some(obj) = v.as_object_mut() {
            obj.remove("rows");
        }
        Ok(serde_json::to_string_pretty(&v)?)
    }
}

/// Data `|w(k,eta)| = exp(-lambda |k,eta|^s) <k,eta>^{-sigma}` on the nonzero
/// modes with zero phase; handy smooth input for linear experiments.
pub fn gevrey_profile(grid: crate::grid::Grid, s: f64, lambda: f64, sigma: f64) -> SpectralField {
    SpectralField::from_fn(grid, |k, eta| {
        if k == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let r = l1(k, eta);
        Complex64::new((-lambda * r.powf(s) - sigma * bracket(r).ln()).exp(), 0.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::numerics::adaptive_simpson;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid() -> Grid {
        Grid::new(8, 64, 2.0).unwrap()
    }

    fn data(g: Grid) -> SpectralField {
        let mut f = SpectralField::from_fn(g, |k, eta| {
            let r = l1(k, eta);
            Complex64::new((-r).exp() * (1.0 + 0.1 * k as f64), 0.3 * eta * (-r).exp())
        });
        f.enforce_hermitian();
        f
    }

    #[test]
    fn closed_form_against_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let k = rng.random_range(-20i64..=20);
            let eta = rng.random_range(-200.0..200.0);
            let t = rng.random_range(0.0..50.0);
            let f = |s: f64| {
                let e = eta - k as f64 * s + k as f64 * t;
                (k * k) as f64 + e * e
            };
            let scale = t * ((k * k) as f64 + (eta.abs() + (k as f64).abs() * t).powi(2));
            let q = adaptive_simpson(&f, 0.0, t, 1e-13 * scale);
            let c = lab_viscous_integral(k, eta, t);
            assert!((q - c).abs() <= 1e-10 * c.abs().max(1e-300), "{k} {eta} {t}: {q} {c}");
        }
    }

    #[test]
    fn factor_examples() {
        let (nu, t) = (1e-3, 7.0);
        let f = (-nu * lab_viscous_integral(1, 0.0, t)).exp();
        assert!((f - (-nu * (t + t * t * t / 3.0)).exp()).abs() < 1e-15);
        let h = (-nu * lab_viscous_integral(0, 3.0, t)).exp();
        assert!((h - (-nu * 9.0 * t).exp()).abs() < 1e-15);
        // matches the expanded cubic form away from cancellation
        let (k, eta) = (3i64, 2.5);
        let cubic = (k * k) as f64 * t + ((eta + k as f64 * t).powi(3) - eta.powi(3)) / (3.0 * k as f64);
        assert!((lab_viscous_integral(k, eta, t) - cubic).abs() < 1e-12 * cubic);
    }

    #[test]
    fn inviscid_shift_is_isometry_up_to_bookkeeping() {
        let g = grid();
        let w = data(g);
        let p = exact_evolve(&w, 3.0, 0.0).unwrap();
        let lhs = p.field.l2_norm_sq() + p.lost_l2_sq;
        assert!((lhs - w.l2_norm_sq()).abs() < 1e-14 * w.l2_norm_sq());
        assert_eq!(p.field.get(1, 0), w.get(1, 6));
        assert_eq!(p.field.get(-2, 5), w.get(-2, -7));
        assert!(p.truncated_modes > 0);
        assert!(p.field.hermitian_defect() < 1e-15);
        let z = exact_evolve(&w, 0.0, 0.0).unwrap();
        assert_eq!(z.truncated_modes, 0);
        assert_eq!(z.field.coef(), w.coef());
    }

    #[test]
    fn off_lattice_time_rejected() {
        assert!(matches!(exact_evolve(&data(grid()), 0.3, 0.0), Err(LabError::GridIncompatible(_))));
    }

    #[test]
    fn lab_semigroup() {
        let g = grid();
        let w = data(g);
        let nu = 1e-2;
        let once = exact_evolve(&w, 2.5, nu).unwrap().field;
        let twice = exact_evolve(&exact_evolve(&w, 1.0, nu).unwrap().field, 1.5, nu).unwrap().field;
        let diff = (&once - &twice).max_abs();
        assert!(diff <= 1e-12 * w.max_abs(), "{diff}");
    }

    #[test]
    fn frames_agree() {
        // shifting the moving-frame solution back to the lab frame reproduces exact_evolve
        let g = grid();
        let w = data(g);
        let (t, nu) = (2.0, 3e-3);
        let lab = exact_evolve(&w, t, nu).unwrap().field;
        let moving = exact_evolve_sheared(&w, t, nu).unwrap();
        let shift = (t * g.lv()) as i64;
        for (k, j, _, c) in lab.modes() {
            let src = j + k * shift;
            if g.contains(k, src) {
                assert!((c - moving.get(k, src)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn stream_function_examples() {
        let g = grid();
        let mut w = SpectralField::zeros(g);
        w.set_real_mode(1, 0, Complex64::new(2.0, 1.0));
        let t = 3.0;
        let psi = stream_function(&w, t);
        assert!((psi.get(1, 0) - w.get(1, 0) * (-1.0 / (1.0 + t * t))).norm() < 1e-15);
        let w = data(g);
        let back = laplacian_l(&stream_function(&w, 0.7), 0.7);
        let mut expect = w.clone();
        expect.set(0, 0, Complex64::new(0.0, 0.0));
        assert!((&back - &expect).max_abs() <= 1e-14 * w.max_abs());
    }

    #[test]
    fn single_mode_dissipation_report() {
        let g = grid();
        let mut w = SpectralField::zeros(g);
        w.set_real_mode(1, 0, Complex64::new(1.0, 0.0));
        let nu = 1e-3;
        let times: Vec<f64> = (0..20).map(|i| i as f64 * 2.0).collect();
        let rep = decay_report(&w, nu, &times).unwrap();
        for r in &rep.rows {
            let exact = (-nu * (r.t + r.t.powi(3) / 3.0)).exp();
            assert!((r.omega_neq / rep.l2_norm_in - exact).abs() < 1e-14);
            assert!(exact <= (-0.25 * nu * r.t.powi(3)).exp());
        }
        let c = rep.dissipation_fit.small_c.unwrap();
        assert!(c > 0.25 && c < 0.4, "{c}");
    }

    #[test]
    fn zero_mode_data_is_degenerate() {
        let g = grid();
        let mut w = SpectralField::zeros(g);
        w.set_real_mode(0, 3, Complex64::new(1.0, 0.0));
        assert!(matches!(decay_report(&w, 0.0, &[1.0, 2.0]), Err(LabError::DegenerateSeries(_))));
        assert!(decay_report(&w, 0.0, &[2.0, 1.0]).is_err());
    }

    #[test]
    fn csv_and_summary() {
        let g = grid();
        let rep = decay_report(&gevrey_profile(g, 0.5, 1.0, 2.0), 0.0, &[1.0, 2.0, 4.0]).unwrap();
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "t,dy_psi,t_dx_psi,omega_neq");
        assert_eq!(text.lines().count(), 4);
        let v: serde_json::Value = serde_json::from_str(&rep.summary_json().unwrap()).unwrap();
        assert!(v.get("rows").is_none());
        assert!(v["damping_fit"]["small_c"].is_null());
    }

    proptest! {
        #[test]
        fn viscous_factor_in_unit_interval(k in -50i64..50, eta in -500.0f64..500.0,
                                           t in 0.0f64..100.0, nu in 0.0f64..1e-1) {
            let f = (-nu * lab_viscous_integral(k, eta, t)).exp();
            prop_assert!(f > 0.0 || nu * lab_viscous_integral(k, eta, t) > 700.0);
            prop_assert!(f <= 1.0);
        }

        #[test]
        fn moving_frame_semigroup(t1 in 0.0f64..20.0, t2 in 0.0f64..20.0, nu in 0.0f64..1e-2) {
            let w = data(grid());
            let a = exact_evolve_sheared(&w, t1 + t2, nu).unwrap();
            let mut st = LinearState::new(w.clone(), nu).unwrap();
            st.advance_to(t1).unwrap();
            st.advance_to(t1 + t2).unwrap();
            prop_assert!((&a - &st.omega).max_abs() <= 1e-12 * w.max_abs());
            prop_assert!(a.l2_norm() <= w.l2_norm() * (1.0 + 1e-15));
        }
    }
}
