use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::numerics::adaptive_simpson;

use super::s_of_beta;

/// Optional-field form used for deserialization; every omitted constant
/// takes its standard value.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiplierSpec {
    pub beta: f64,
    #[serde(default)]
    pub sigma: Option<u32>,
    #[serde(default)]
    pub gamma: Option<u32>,
    #[serde(default)]
    pub lambda0: Option<f64>,
    #[serde(default)]
    pub lambda1: Option<f64>,
    pub nu: f64,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub c1_const: Option<f64>,
    #[serde(default)]
    pub delta_lambda: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MultiplierSpec", into = "MultiplierSpec")]
pub struct MultiplierParams {
    pub beta: f64,
    pub s: f64,
    pub sigma: u32,
    pub gamma: u32,
    pub lambda0: f64,
    pub lambda1: f64,
    pub nu: f64,
    pub kappa: f64,
    /// Constant `C1`; together with `kappa` it satisfies `1 + 2 C1 kappa = 2`.
    pub c1_const: f64,
    pub c_m: f64,
    pub c_1: f64,
    pub delta_lambda: f64,
}

pub const C_M: f64 = 1.0 / 8.0;
pub const C_1: f64 = 5.0 / 8.0;
pub const DEFAULT_KAPPA: f64 = 0.5;

/// `int_1^inf <tau>^{-2 c_1} d tau`, via `tau = w^{-4}`:
/// `int_1^t (1 + tau^2)^{-5/8} d tau = int_{t^{-1/4}}^1 4 (1 + w^8)^{-5/8} dw`.
fn lambda_integral(t: f64) -> f64 {
    if t <= 1.0 {
        return 0.0;
    }
    let lo = if t.is_infinite() { 0.0 } else { t.powf(-0.25) };
    adaptive_simpson(&|w: f64| 4.0 * (1.0 + w.powi(8)).powf(-0.625), lo, 1.0, 1e-14)
}

impl MultiplierParams {
    /// Parameters with standard `sigma = 11`, `gamma = 7`, `lambda0 = 1`,
    /// `lambda1 = 1/2`, `kappa = 1/2`, `C1 = 1` and automatic `delta_lambda`.
    pub fn new(beta: f64, nu: f64) -> Result<Self> {
        Self::try_from(MultiplierSpec {
            beta,
            nu,
            ..Default::default()
        })
    }

    pub fn with_lambdas(beta: f64, nu: f64, lambda0: f64, lambda1: f64) -> Result<Self> {
        Self::try_from(MultiplierSpec {
            beta,
            nu,
            lambda0: Some(lambda0),
            lambda1: Some(lambda1),
            ..Default::default()
        })
    }

    /// Exponent `1 + 2 C1 kappa` of the weight jump across a resonant interval.
    pub fn jump_exponent(&self) -> f64 {
        1.0 + 2.0 * self.c1_const * self.kappa
    }

    /// `C1 kappa`, the right-side exponent of the non-resonant weight.
    pub fn c1_kappa(&self) -> f64 {
        self.c1_const * self.kappa
    }

    pub fn lambda_at_one(&self) -> f64 {
        0.75 * self.lambda0 + 0.25 * self.lambda1
    }

    pub fn lambda_floor(&self) -> f64 {
        0.5 * (self.lambda0 + self.lambda1)
    }

    /// Largest `delta_lambda` keeping `lambda(inf)` at the floor.
    pub fn saturating_delta(lambda0: f64, lambda1: f64) -> f64 {
        let l1 = 0.75 * lambda0 + 0.25 * lambda1;
        let floor = 0.5 * (lambda0 + lambda1);
        ((1.0 + l1) / (1.0 + floor)).ln() / lambda_integral(f64::INFINITY)
    }

    pub fn lambda_of_t(&self, t: f64) -> f64 {
        let l1 = self.lambda_at_one();
        if t <= 1.0 {
            l1
        } else {
            (1.0 + l1) * (-self.delta_lambda * lambda_integral(t)).exp() - 1.0
        }
    }

    pub fn lambda_infinity(&self) -> f64 {
        (1.0 + self.lambda_at_one()) * (-self.delta_lambda * lambda_integral(f64::INFINITY)).exp() - 1.0
    }

    /// `d lambda / dt`, zero on `t <= 1`.
    pub fn lambda_dot(&self, t: f64) -> f64 {
        if t <= 1.0 {
            0.0
        } else {
            -self.delta_lambda * (1.0 + t * t).powf(-self.c_1) * (1.0 + self.lambda_of_t(t))
        }
    }
}

impl TryFrom<MultiplierSpec> for MultiplierParams {
    type Error = LabError;

    fn try_from(spec: MultiplierSpec) -> Result<Self> {
        let bad = |m: String| Err(LabError::InvalidParameter(m));
        let beta = spec.beta;
        if !(0.0..=1.0 / 3.0).contains(&beta) {
            return bad(format!("beta must lie in [0, 1/3], got {beta}"));
        }
        let sigma = spec.sigma.unwrap_or(11);
        let gamma = spec.gamma.unwrap_or(7);
        if sigma < 11 {
            return bad(format!("sigma must be at least 11, got {sigma}"));
        }
        if gamma < 7 || gamma + 4 > sigma {
            return bad(format!("gamma must lie in [7, sigma - 4], got {gamma}"));
        }
        let lambda0 = spec.lambda0.unwrap_or(1.0);
        let lambda1 = spec.lambda1.unwrap_or(0.5);
        if !(lambda0 > lambda1 && lambda1 > 0.0 && lambda0.is_finite()) {
            return bad(format!("need lambda0 > lambda1 > 0, got {lambda0}, {lambda1}"));
        }
        let nu = spec.nu;
        if !(nu > 0.0 && nu < 1.0) {
            return bad(format!("nu must lie in (0, 1), got {nu}"));
        }
        let kappa = spec.kappa.unwrap_or(DEFAULT_KAPPA);
        let c1_const = spec.c1_const.unwrap_or(1.0 / (2.0 * kappa));
        if !(kappa > 0.0) || (1.0 + 2.0 * c1_const * kappa - 2.0).abs() > 1e-12 {
            return bad(format!("kappa={kappa}, C1={c1_const} violate 1 + 2 C1 kappa = 2"));
        }
        let sat = Self::saturating_delta(lambda0, lambda1);
        let delta_lambda = match spec.delta_lambda {
            None => ((lambda0 - lambda1) / 8.0).min(0.5 * sat),
            Some(d) if d > 0.0 && d < sat => d,
            Some(d) => {
                return Err(LabError::Config(format!(
                    "delta_lambda={d} must lie in (0, {sat:.6}) to keep lambda above (lambda0+lambda1)/2"
                )))
            }
        };
        Ok(MultiplierParams {
            beta,
            s: s_of_beta(beta)?,
            sigma,
            gamma,
            lambda0,
            lambda1,
            nu,
            kappa,
            c1_const,
            c_m: C_M,
            c_1: C_1,
            delta_lambda,
        })
    }
}

impl From<MultiplierParams> for MultiplierSpec {
    fn from(p: MultiplierParams) -> Self {
        MultiplierSpec {
            beta: p.beta,
            sigma: Some(p.sigma),
            gamma: Some(p.gamma),
            lambda0: Some(p.lambda0),
            lambda1: Some(p.lambda1),
            nu: p.nu,
            kappa: Some(p.kappa),
            c1_const: Some(p.c1_const),
            delta_lambda: Some(p.delta_lambda),
        }
    }
}
