//! Stability scans over viscosity and amplitude.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit_decay, DecayModel};
use crate::error::{LabError, Result};
use crate::linprop::exact_evolve_sheared;
use crate::nlsolve::{init_data, run, SimConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// A cell is stable only if its fitted rate is at least this fraction of the linear rate.
    #[serde(default = "default_rate_fraction")]
    pub rate_fraction: f64,
    /// and its amplification over the linear evolution stays below this bound.
    #[serde(default = "default_amplification_bound")]
    pub amplification_bound: f64,
}

fn default_rate_fraction() -> f64 {
    0.5
}
fn default_amplification_bound() -> f64 {
    2.0
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            rate_fraction: default_rate_fraction(),
            amplification_bound: default_amplification_bound(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub base: SimConfig,
    pub nus: Vec<f64>,
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub thresholds: Thresholds,
    /// Start of the decay-fit window; defaults to `2 max|eta|` of the grid.
    #[serde(default)]
    pub fit_window_start: Option<f64>,
}

impl ScanConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    Unstable,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub nu: f64,
    pub epsilon: f64,
    /// Fitted `c` of `C exp(-c nu^{1/3} t)` for `||P_!= omega||` on the fit window.
    pub fitted_rate: Option<f64>,
    pub linear_rate: Option<f64>,
    /// `max_t ||P_!= omega(t)|| / ||P_!= omega_lin(t)||`.
    pub amplification: Option<f64>,
    pub t_amplification: Option<f64>,
    /// `||P_!= omega||` at the time of largest amplification and at the end.
    pub norm_at_amplification: Option<f64>,
    pub final_norm: Option<f64>,
    /// First sample where the amplification reaches the declared bound, and
    /// `||P_!= omega||` there.
    pub t_onset: Option<f64>,
    pub norm_at_onset: Option<f64>,
    pub verdict: Verdict,
    pub error: Option<String>,
}

impl ScanCell {
    fn failed(nu: f64, epsilon: f64, e: LabError) -> Self {
        ScanCell {
            nu,
            epsilon,
            fitted_rate: None,
            linear_rate: None,
            amplification: None,
            t_amplification: None,
            norm_at_amplification: None,
            final_norm: None,
            t_onset: None,
            norm_at_onset: None,
            verdict: Verdict::Failed,
            error: Some(e.to_string()),
        }
    }

    /// The peak amplification is followed by a smaller final norm.
    pub fn decays_after_peak(&self) -> bool {
        matches!((self.norm_at_amplification, self.final_norm), (Some(a), Some(b)) if b < a)
    }

    /// The amplification bound was reached and the norm kept falling afterwards.
    pub fn decays_after_onset(&self) -> bool {
        matches!((self.norm_at_onset, self.final_norm), (Some(a), Some(b)) if b < a)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub thresholds: Thresholds,
    pub cells: Vec<ScanCell>,
}

pub const SCAN_COLUMNS: [&str; 14] = [
    "nu",
    "epsilon",
    "fitted_rate",
    "linear_rate",
    "amplification",
    "t_amplification",
    "norm_at_amplification",
    "final_norm",
    "t_onset",
    "norm_at_onset",
    "verdict",
    "decays_after_peak",
    "decays_after_onset",
    "error",
];

fn run_cell(base: &SimConfig, nu: f64, epsilon: f64, th: &Thresholds, window_start: Option<f64>) -> Result<ScanCell> {
    let mut cfg = base.clone();
    cfg.nu = nu;
    cfg.init.epsilon = epsilon;
    cfg.energy = false;
    cfg.validate()?;
    let grid = cfg.grid.build()?;
    let start = window_start.unwrap_or(2.0 * grid.eta_max());
    let window = (start, cfg.t_final);
    if start >= cfg.t_final {
        return Err(LabError::DegenerateSeries(format!(
            "fit window starts at {start}, after t_final = {}",
            cfg.t_final
        )));
    }
    let w0 = init_data(&cfg)?;
    let out = run(&cfg)?;
    let times: Vec<f64> = out.rows.iter().map(|r| r.t).collect();
    let nl: Vec<f64> = out.rows.iter().map(|r| r.l2_neq).collect();
    let lin: Vec<f64> = times
        .par_iter()
        .map(|&t| exact_evolve_sheared(&w0, t, nu).map(|f| f.project_modes().1.l2_norm()))
        .collect::<Result<_>>()?;

    let (mut amp, mut t_amp, mut n_amp) = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..times.len() {
        if lin[i] > 0.0 {
            let r = nl[i] / lin[i];
            if r > amp {
                (amp, t_amp, n_amp) = (r, times[i], nl[i]);
            }
        }
    }
    let onset = (0..times.len()).find(|&i| lin[i] > 0.0 && nl[i] / lin[i] >= th.amplification_bound);
    let fitted = fit_decay(&times, &nl, DecayModel::ExpNu13, window, nu)?.rate;
    let linear = fit_decay(&times, &lin, DecayModel::ExpNu13, window, nu)?.rate;
    let stable = fitted >= th.rate_fraction * linear && amp < th.amplification_bound;
    Ok(ScanCell {
        nu,
        epsilon,
        fitted_rate: Some(fitted),
        linear_rate: Some(linear),
        amplification: amp.is_finite().then_some(amp),
        t_amplification: amp.is_finite().then_some(t_amp),
        norm_at_amplification: amp.is_finite().then_some(n_amp),
        final_norm: nl.last().copied(),
        t_onset: onset.map(|i| times[i]),
        norm_at_onset: onset.map(|i| nl[i]),
        verdict: if stable { Verdict::Stable } else { Verdict::Unstable },
        error: None,
    })
}

/// Run every `(nu, epsilon)` cell of the scan; failures are recorded per
/// cell. Cells are ordered by `nu`, then `epsilon`, as listed.
pub fn threshold_scan(cfg: &ScanConfig) -> ScanResult {
    let pairs: Vec<(f64, f64)> = cfg
        .nus
        .iter()
        .flat_map(|&nu| cfg.epsilons.iter().map(move |&e| (nu, e)))
        .collect();
    let cells = pairs
        .par_iter()
        .map(|&(nu, eps)| {
            run_cell(&cfg.base, nu, eps, &cfg.thresholds, cfg.fit_window_start)
                .unwrap_or_else(|e| ScanCell::failed(nu, eps, e))
        })
        .collect();
    ScanResult {
        thresholds: cfg.thresholds,
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlsolve::GridSpec;

    fn base() -> SimConfig {
        let mut c = SimConfig::new(GridSpec { nz: 32, nv: 32, lv: 1.0 }, 1e-2, 0.0, 40.0, 1e-3);
        c.dt_max = 0.1;
        c
    }

    #[test]
    fn empty_epsilon_list_gives_empty_result() {
        let cfg = ScanConfig {
            base: base(),
            nus: vec![1e-2],
            epsilons: vec![],
            thresholds: Thresholds::default(),
            fit_window_start: None,
        };
        assert!(threshold_scan(&cfg).cells.is_empty());
    }

    #[test]
    fn small_amplitude_cell_tracks_linear_rate() {
        let cfg = ScanConfig {
            base: base(),
            nus: vec![1e-2],
            epsilons: vec![1e-4],
            thresholds: Thresholds::default(),
            fit_window_start: None,
        };
        let r = threshold_scan(&cfg);
        let c = &r.cells[0];
        assert_eq!(c.verdict, Verdict::Stable, "{c:?}");
        let (f, l) = (c.fitted_rate.unwrap(), c.linear_rate.unwrap());
        assert!((f / l - 1.0).abs() < 0.2, "{f} {l}");
        assert!(c.amplification.unwrap() < 1.1);
    }

    #[test]
    fn failures_are_recorded_per_cell() {
        let mut b = base();
        b.t_final = 5.0; // window would start after the end
        let cfg = ScanConfig {
            base: b,
            nus: vec![1e-2, 0.5],
            epsilons: vec![1e-3],
            thresholds: Thresholds::default(),
            fit_window_start: None,
        };
        let r = threshold_scan(&cfg);
        assert_eq!(r.cells.len(), 2);
        assert!(r.cells.iter().all(|c| c.verdict == Verdict::Failed && c.error.is_some()));
        let text = serde_json::to_string(&r).unwrap();
        let back: ScanResult = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}
