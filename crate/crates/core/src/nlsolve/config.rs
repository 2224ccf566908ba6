use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::Grid;
use crate::weights::{s_of_beta, MultiplierParams, MultiplierSpec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nz: usize,
    pub nv: usize,
    #[serde(default = "default_lv")]
    pub lv: f64,
}

fn default_lv() -> f64 {
    1.0
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        Grid::with_resolution(self.nz, self.nv, self.lv)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitProfile {
    /// `|w(k,eta)| ~ exp(-lambda0 |k,eta|^s) <k,eta>^{-sigma-1}` with random phases.
    Gevrey,
    /// One real Fourier pair `(k, j)`, `(-k, -j)` with zero phase.
    SingleMode { k: i64, j: i64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSpec {
    #[serde(default = "default_profile")]
    pub profile: InitProfile,
    /// Data are scaled to Gevrey norm `epsilon nu^beta`.
    pub epsilon: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_profile() -> InitProfile {
    InitProfile::Gevrey
}

/// Optional overrides of the multiplier constants.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiplierOverrides {
    #[serde(default)]
    pub sigma: Option<u32>,
    #[serde(default)]
    pub gamma: Option<u32>,
    #[serde(default)]
    pub lambda0: Option<f64>,
    #[serde(default)]
    pub lambda1: Option<f64>,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub c1_const: Option<f64>,
    #[serde(default)]
    pub delta_lambda: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub grid: GridSpec,
    pub nu: f64,
    pub beta: f64,
    pub t_final: f64,
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
    /// Upper bound on the step regardless of the CFL limit.
    #[serde(default = "default_dt_max")]
    pub dt_max: f64,
    pub init: InitSpec,
    #[serde(default)]
    pub multiplier: MultiplierOverrides,
    /// Time between diagnostic rows.
    #[serde(default = "default_cadence")]
    pub diag_every: f64,
    /// Evaluate the weighted energies and CK terms at each diagnostic time.
    #[serde(default = "default_true")]
    pub energy: bool,
    /// Abort when `||w||` exceeds this multiple of its initial value.
    #[serde(default = "default_blowup")]
    pub blowup_factor: f64,
}

fn default_cfl() -> f64 {
    0.4
}
fn default_dt_max() -> f64 {
    0.05
}
fn default_cadence() -> f64 {
    1.0
}
fn default_true() -> bool {
    true
}
fn default_blowup() -> f64 {
    1e6
}

impl SimConfig {
    /// Config with defaults for everything but the essentials.
    pub fn new(grid: GridSpec, nu: f64, beta: f64, t_final: f64, epsilon: f64) -> Self {
        SimConfig {
            grid,
            nu,
            beta,
            t_final,
            cfl_safety: default_cfl(),
            dt_max: default_dt_max(),
            init: InitSpec {
                profile: InitProfile::Gevrey,
                epsilon,
                seed: 0,
            },
            multiplier: MultiplierOverrides::default(),
            diag_every: default_cadence(),
            energy: true,
            blowup_factor: default_blowup(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: SimConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn s(&self) -> f64 {
        s_of_beta(self.beta).unwrap_or(0.0)
    }

    pub fn lambda0(&self) -> f64 {
        self.multiplier.lambda0.unwrap_or(1.0)
    }

    pub fn sigma(&self) -> u32 {
        self.multiplier.sigma.unwrap_or(11)
    }

    /// `epsilon nu^beta`.
    pub fn amplitude(&self) -> f64 {
        self.init.epsilon * self.nu.powf(self.beta)
    }

    /// Multiplier parameters, or `None` when `nu = 0` (the weights need `nu > 0`).
    pub fn multiplier_params(&self) -> Result<Option<MultiplierParams>> {
        if self.nu == 0.0 {
            return Ok(None);
        }
        let m = &self.multiplier;
        MultiplierParams::try_from(MultiplierSpec {
            beta: self.beta,
            nu: self.nu,
            sigma: m.sigma,
            gamma: m.gamma,
            lambda0: m.lambda0,
            lambda1: m.lambda1,
            kappa: m.kappa,
            c1_const: m.c1_const,
            delta_lambda: m.delta_lambda,
        })
        .map(Some)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(LabError::Config(m));
        self.grid.build()?;
        s_of_beta(self.beta)?;
        if !(self.nu >= 0.0 && self.nu < 1.0) {
            return cfg(format!("nu must lie in [0, 1), got {}", self.nu));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return cfg(format!("t_final must be finite and >= 0, got {}", self.t_final));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return cfg(format!("cfl_safety must lie in (0, 1], got {}", self.cfl_safety));
        }
        if !(self.dt_max > 0.0) {
            return cfg(format!("dt_max must be positive, got {}", self.dt_max));
        }
        if !(self.diag_every > 0.0) {
            return cfg(format!("diag_every must be positive, got {}", self.diag_every));
        }
        if !(self.blowup_factor > 1.0) {
            return cfg(format!("blowup_factor must exceed 1, got {}", self.blowup_factor));
        }
        if !(self.amplitude() > 0.0 && self.amplitude().is_finite()) {
            return cfg(format!(
                "amplitude epsilon nu^beta must be positive, got {} (epsilon={}, nu={}, beta={})",
                self.amplitude(),
                self.init.epsilon,
                self.nu,
                self.beta
            ));
        }
        if let InitProfile::SingleMode { k, j } = self.init.profile {
            let g = self.grid.build()?;
            if !g.contains(k, j) || (k == 0 && j == 0) {
                return cfg(format!("single mode ({k}, {j}) is not a retained nonzero mode"));
            }
        }
        self.multiplier_params()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_defaults_and_round_trip() {
        let text = r#"{"grid": {"nz": 64, "nv": 64}, "nu": 1e-3, "beta": 0.25, "t_final": 2.0,
                       "init": {"epsilon": 0.01}}"#;
        let c = SimConfig::from_json(text).unwrap();
        assert_eq!(c.cfl_safety, 0.4);
        assert_eq!(c.grid.lv, 1.0);
        assert_eq!(c.init.profile, InitProfile::Gevrey);
        let again = SimConfig::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn rejects_bad_configs() {
        let base = SimConfig::new(GridSpec { nz: 32, nv: 32, lv: 1.0 }, 1e-3, 0.25, 1.0, 0.1);
        assert!(base.validate().is_ok());
        let mut c = base.clone();
        c.nu = 0.0;
        assert!(matches!(c.validate(), Err(LabError::Config(_))));
        c.beta = 0.0;
        assert!(c.validate().is_ok());
        assert!(c.multiplier_params().unwrap().is_none());
        let mut c = base.clone();
        c.init.profile = InitProfile::SingleMode { k: 0, j: 0 };
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.multiplier.delta_lambda = Some(10.0);
        assert!(matches!(c.validate(), Err(LabError::Config(_))));
        assert!(SimConfig::from_json(r#"{"grid": {"nz": 8, "nv": 8}, "bogus": 1}"#).is_err());
    }
}
