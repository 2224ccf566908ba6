//! Pseudospectral solver for the vorticity perturbation in the sheared frame
//! `z = x - t y, v = y`:
//!
//! `d_t w + d_z psi d_v w - d_v psi d_z w = nu Delta_L w`, `Delta_L psi = w`,
//!
//! with `Delta_L = d_z^2 + (d_v - t d_z)^2`.

mod checkpoint;
mod config;
mod monitor;
mod step;

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use checkpoint::{checkpoint_bytes, checkpoint_from_bytes, read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC};
pub use config::{GridSpec, InitProfile, InitSpec, MultiplierOverrides, SimConfig};
pub use monitor::{energy_monitor, prefetch_tables, EnergyDiagnostics};
pub use step::{StepInfo, Stepper, Transport};

use crate::error::{LabError, Result};
use crate::grid::{gevrey_power, l1, bracket, SpectralField};
use crate::weights::MultiplierEvaluator;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub omega: SpectralField,
    pub t: f64,
    pub steps: u64,
    /// Largest relative mean of the nonlinear term seen so far.
    pub max_mean_defect: f64,
}

/// Initial vorticity with Gevrey norm `epsilon nu^beta` and zero mean.
pub fn init_data(config: &SimConfig) -> Result<SpectralField> {
    config.validate()?;
    let grid = config.grid.build()?;
    let (s, lambda0, sigma) = (config.s(), config.lambda0(), config.sigma() as f64);
    let mut f = SpectralField::zeros(grid);
    match config.init.profile {
        InitProfile::Gevrey => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.init.seed);
            for k in 0..=grid.kx() as i64 {
                for j in -(grid.mv() as i64)..=grid.mv() as i64 {
                    if k == 0 && j <= 0 {
                        continue;
                    }
                    let r = l1(k, grid.eta(j));
                    let mag = (-lambda0 * gevrey_power(r, s) - (sigma + 1.0) * bracket(r).ln()).exp();
                    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    f.set_real_mode(k, j, Complex64::from_polar(mag, theta));
                }
            }
        }
        InitProfile::SingleMode { k, j } => f.set_real_mode(k, j, Complex64::new(1.0, 0.0)),
    }
    let norm = f.gevrey_norm(s, lambda0, sigma);
    f.scale(config.amplitude() / norm);
    Ok(f)
}

/// One diagnostic sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagRow {
    pub t: f64,
    pub steps: u64,
    pub l2: f64,
    pub l2_neq: f64,
    pub l2_zero: f64,
    pub mean: f64,
    pub max_mean_defect: f64,
    /// Physical mass share in the outer [`BOUNDARY_WIDTH`] of the `v` box.
    pub boundary_fraction: f64,
    pub energy: Option<EnergyDiagnostics>,
}

pub const BOUNDARY_WIDTH: f64 = 0.1;

pub const DIAG_COLUMNS: [&str; 16] = [
    "t",
    "steps",
    "l2",
    "l2_neq",
    "l2_zero",
    "mean",
    "max_mean_defect",
    "boundary_fraction",
    "a_sq",
    "a_gamma_neq_sq",
    "ck_lambda",
    "ck_w",
    "ck_g",
    "ck_m",
    "dissipation",
    "energy_enabled",
];

/// Write diagnostics as CSV with [`DIAG_COLUMNS`]; energy columns are `NaN`
/// when the energy monitor is off.
pub fn write_diagnostics_csv<W: Write>(rows: &[DiagRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DIAG_COLUMNS)?;
    for r in rows {
        let e = r.energy.unwrap_or(EnergyDiagnostics {
            a_sq: f64::NAN,
            a_gamma_neq_sq: f64::NAN,
            ck_lambda: f64::NAN,
            ck_w: f64::NAN,
            ck_g: f64::NAN,
            ck_m: f64::NAN,
            dissipation: f64::NAN,
        });
        let mut rec = vec![r.t.to_string(), r.steps.to_string()];
        for v in [
            r.l2,
            r.l2_neq,
            r.l2_zero,
            r.mean,
            r.max_mean_defect,
            r.boundary_fraction,
            e.a_sq,
            e.a_gamma_neq_sq,
            e.ck_lambda,
            e.ck_w,
            e.ck_g,
            e.ck_m,
            e.dissipation,
        ] {
            rec.push(format!("{v:e}"));
        }
        rec.push(u8::from(r.energy.is_some()).to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| LabError::io("<csv>", e))?;
    Ok(())
}

/// Zero-mode row `w(t, 0, eta_j)` recorded at a diagnostic time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroModeSample {
    pub t: f64,
    pub profile: Vec<Complex64>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub rows: Vec<DiagRow>,
    pub zero_modes: Vec<ZeroModeSample>,
    pub final_state: SimState,
}

pub struct Simulation {
    config: SimConfig,
    stepper: Stepper,
    evaluator: Option<MultiplierEvaluator>,
    state: SimState,
    reference_l2: f64,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self> {
        let omega = init_data(&config)?;
        let state = SimState {
            omega,
            t: 0.0,
            steps: 0,
            max_mean_defect: 0.0,
        };
        Self::resume(config, state)
    }

    /// Continue from a saved state; the blow-up reference is the initial data.
    pub fn resume(config: SimConfig, state: SimState) -> Result<Self> {
        config.validate()?;
        let grid = config.grid.build()?;
        if !state.omega.grid().same_spectral_shape(&grid) {
            return Err(LabError::GridIncompatible("checkpoint grid differs from the configured grid".into()));
        }
        let reference_l2 = init_data(&config)?.l2_norm();
        let evaluator = match (config.energy, config.multiplier_params()?) {
            (true, Some(p)) => {
                let ev = MultiplierEvaluator::new(p);
                prefetch_tables(&ev, &state.omega);
                Some(ev)
            }
            _ => None,
        };
        Ok(Simulation {
            stepper: Stepper::new(grid, config.nu),
            config,
            evaluator,
            state,
            reference_l2,
        })
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn stepper(&self) -> &Stepper {
        &self.stepper
    }

    pub fn diagnostics(&self) -> DiagRow {
        let w = &self.state.omega;
        let (zero, neq) = w.project_modes();
        DiagRow {
            t: self.state.t,
            steps: self.state.steps,
            l2: w.l2_norm(),
            l2_neq: neq.l2_norm(),
            l2_zero: zero.l2_norm(),
            mean: w.mean(),
            max_mean_defect: self.state.max_mean_defect,
            boundary_fraction: w.boundary_fraction(BOUNDARY_WIDTH),
            energy: self.evaluator.as_ref().map(|ev| energy_monitor(w, self.state.t, ev)),
        }
    }

    /// One step of at most `dt`, shortened to the CFL limit if needed.
    pub fn step(&mut self, dt: f64) -> Result<StepInfo> {
        let safety = self.config.cfl_safety;
        let st = &self.state;
        let (omega, info) = match self.stepper.step(&st.omega, st.t, dt, safety) {
            Err(LabError::CflViolation { suggested, .. }) => self.stepper.step(&st.omega, st.t, suggested, safety)?,
            other => other?,
        };
        let l2 = omega.l2_norm();
        let t = st.t + info.dt;
        if !(l2 <= self.config.blowup_factor * self.reference_l2) {
            return Err(LabError::Unstable {
                t,
                growth: l2 / self.reference_l2,
            });
        }
        self.state = SimState {
            omega,
            t,
            steps: st.steps + 1,
            max_mean_defect: st.max_mean_defect.max(info.mean_defect),
        };
        Ok(info)
    }

    /// Step until `t_target`, landing on it exactly. The step size depends only
    /// on the current state and the target, so restarts reproduce the run.
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        loop {
            let remaining = t_target - self.state.t;
            if remaining <= 1e-12 * t_target.abs().max(1.0) {
                self.state.t = t_target.max(self.state.t);
                return Ok(());
            }
            let dt = self.config.dt_max.min(remaining);
            let info = self.step(dt)?;
            if info.dt == remaining {
                self.state.t = t_target;
            }
        }
    }

    /// Diagnostic times after the current time, ending at `t_final`.
    fn output_times(&self) -> Vec<f64> {
        let c = &self.config;
        let mut times: Vec<f64> = (1..)
            .map(|i| i as f64 * c.diag_every)
            .take_while(|&t| t < c.t_final * (1.0 - 1e-12))
            .filter(|&t| t > self.state.t * (1.0 + 1e-12))
            .collect();
        if c.t_final > self.state.t {
            times.push(c.t_final);
        }
        times
    }

    pub fn run_with(&mut self, mut observer: impl FnMut(&SimState, &DiagRow) -> Result<()>) -> Result<RunOutput> {
        let mut rows = vec![self.diagnostics()];
        let mut zero_modes = vec![ZeroModeSample {
            t: self.state.t,
            profile: self.state.omega.zero_mode_profile(),
        }];
        observer(&self.state, &rows[0])?;
        for t in self.output_times() {
            self.advance_to(t)?;
            let row = self.diagnostics();
            observer(&self.state, &row)?;
            rows.push(row);
            zero_modes.push(ZeroModeSample {
                t,
                profile: self.state.omega.zero_mode_profile(),
            });
        }
        Ok(RunOutput {
            rows,
            zero_modes,
            final_state: self.state.clone(),
        })
    }
}

/// Run a configuration from its initial data to `t_final`.
pub fn run(config: &SimConfig) -> Result<RunOutput> {
    Simulation::new(config.clone())?.run_with(|_, _| Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linprop::exact_evolve_sheared;

    fn small(nu: f64, beta: f64, t_final: f64, eps: f64) -> SimConfig {
        SimConfig::new(GridSpec { nz: 32, nv: 32, lv: 1.0 }, nu, beta, t_final, eps)
    }

    #[test]
    fn init_normalised_and_deterministic() {
        let mut c = small(1e-3, 0.25, 1.0, 0.3);
        c.init.seed = 42;
        let a = init_data(&c).unwrap();
        let target = c.amplitude();
        assert!((a.gevrey_norm(c.s(), c.lambda0(), c.sigma() as f64) - target).abs() <= 1e-10 * target);
        assert_eq!(a.get(0, 0), Complex64::new(0.0, 0.0));
        assert!(a.hermitian_defect() == 0.0);
        let b = init_data(&c).unwrap();
        assert_eq!(a.coef(), b.coef());
        c.init.seed = 43;
        assert_ne!(init_data(&c).unwrap().coef(), a.coef());
    }

    #[test]
    fn run_to_zero_time_gives_initial_row() {
        let out = run(&small(1e-3, 0.25, 0.0, 0.1)).unwrap();
        assert_eq!(out.rows.len(), 1);
        assert_eq!(out.rows[0].t, 0.0);
        assert_eq!(out.final_state.steps, 0);
        let e = out.rows[0].energy.unwrap();
        assert!(e.a_sq > 0.0);
    }

    #[test]
    fn tiny_data_follows_linear_propagator() {
        let mut c = small(1e-2, 0.0, 3.0, 1e-8);
        c.energy = false;
        let out = run(&c).unwrap();
        let w0 = init_data(&c).unwrap();
        let lin = exact_evolve_sheared(&w0, 3.0, c.nu).unwrap();
        let err = (&out.final_state.omega - &lin).l2_norm() / lin.l2_norm();
        assert!(err < 1e-6, "{err}");
        for r in &out.rows {
            let l = exact_evolve_sheared(&w0, r.t, c.nu).unwrap().nonzero_modes().l2_norm();
            assert!((r.l2_neq - l).abs() <= 0.01 * l);
        }
    }

    #[test]
    fn inviscid_run_conserves_mean_and_enstrophy() {
        let mut c = small(0.0, 0.0, 2.0, 2.0);
        c.diag_every = 0.5;
        let out = run(&c).unwrap();
        let e0 = out.rows[0].l2;
        for r in &out.rows {
            assert!((r.l2 - e0).abs() < 1e-6 * e0, "{} vs {e0}", r.l2);
            assert!(r.mean.abs() < 1e-15);
            assert!(r.max_mean_defect < 1e-13);
            assert!(r.energy.is_none());
        }
        assert!(out.final_state.steps > 0);
    }

    #[test]
    fn restart_matches_uninterrupted_run() {
        let mut c = small(1e-3, 0.0, 2.0, 5.0);
        c.diag_every = 0.5;
        let full = run(&c).unwrap();
        let mut half = c.clone();
        half.t_final = 1.0;
        let first = run(&half).unwrap();
        let saved = checkpoint_from_bytes(&checkpoint_bytes(&first.final_state)).unwrap();
        let rest = Simulation::resume(c, saved).unwrap().run_with(|_, _| Ok(())).unwrap();
        let tail = &full.rows[full.rows.len() - rest.rows.len()..];
        for (a, b) in tail.iter().zip(&rest.rows) {
            assert_eq!(a.t, b.t);
            assert!((a.l2 - b.l2).abs() <= 1e-12 * a.l2);
            let (ea, eb) = (a.energy.unwrap(), b.energy.unwrap());
            assert!((ea.a_sq - eb.a_sq).abs() <= 1e-12 * ea.a_sq);
        }
    }

    #[test]
    fn blowup_is_reported() {
        let mut c = small(1e-3, 0.0, 1.0, 1.0);
        c.blowup_factor = 1.0 + 1e-15;
        c.init.profile = InitProfile::Gevrey;
        let mut sim = Simulation::new(c).unwrap();
        // inflate the state past the threshold
        let mut st = sim.state().clone();
        st.omega.scale(2.0);
        sim.state = st;
        assert!(matches!(sim.step(0.01), Err(LabError::Unstable { .. })));
    }

    #[test]
    fn diagnostics_csv_schema() {
        let out = run(&small(1e-3, 0.25, 1.0, 0.1)).unwrap();
        let mut buf = Vec::new();
        write_diagnostics_csv(&out.rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
        assert_eq!(header, DIAG_COLUMNS);
        for line in text.lines().skip(1) {
            assert_eq!(line.split(',').count(), DIAG_COLUMNS.len());
        }
        let mut empty = Vec::new();
        write_diagnostics_csv(&[], &mut empty).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap().lines().count(), 1);
    }
}
