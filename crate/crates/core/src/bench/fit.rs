//! Least-squares decay fits in log space.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::numerics::linear_fit;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    /// `C exp(-c nu^{1/3} t)`.
    ExpNu13,
    /// `C exp(-c nu t^3)`.
    ExpCubic,
    /// `C t^{-p}`.
    Power,
}

impl DecayModel {
    fn abscissa(self, t: f64, nu: f64) -> f64 {
        match self {
            DecayModel::ExpNu13 => nu.cbrt() * t,
            DecayModel::ExpCubic => nu * t.powi(3),
            DecayModel::Power => t.ln(),
        }
    }

    pub fn eval(self, fit: &DecayFit, t: f64) -> f64 {
        fit.big_c * (-fit.rate * self.abscissa(t, fit.nu)).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub model: DecayModel,
    pub big_c: f64,
    /// `c` for the exponential models, `p` for the power law.
    pub rate: f64,
    /// RMS residual of `log data - log model`.
    pub residual: f64,
    pub window: (f64, f64),
    pub points: usize,
    pub nu: f64,
}

impl DecayFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.model.eval(self, t)
    }
}

/// Fit `model` to the samples with `t` in the closed `window`. `nu` scales
/// the exponential abscissae and is ignored by the power law.
pub fn fit_decay(times: &[f64], values: &[f64], model: DecayModel, window: (f64, f64), nu: f64) -> Result<DecayFit> {
    if times.len() != values.len() {
        return Err(LabError::InvalidParameter("times and values differ in length".into()));
    }
    if model != DecayModel::Power && !(nu > 0.0) {
        return Err(LabError::InvalidParameter(format!("exponential decay models need nu > 0, got {nu}")));
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if t < window.0 || t > window.1 {
            continue;
        }
        if !(v > 0.0 && v.is_finite()) {
            return Err(LabError::DegenerateSeries(format!("nonpositive value {v} at t={t} inside the fit window")));
        }
        if model == DecayModel::Power && t <= 0.0 {
            return Err(LabError::DegenerateSeries("power-law fit needs t > 0".into()));
        }
        x.push(model.abscissa(t, nu));
        y.push(v.ln());
    }
    if x.len() < 2 {
        return Err(LabError::DegenerateSeries(format!(
            "{} points in window [{}, {}]",
            x.len(),
            window.0,
            window.1
        )));
    }
    let (a, b, rms) = linear_fit(&x, &y);
    Ok(DecayFit {
        model,
        big_c: a.exp(),
        rate: -b,
        residual: rms,
        window,
        points: x.len(),
        nu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn times() -> Vec<f64> {
        (1..=200).map(|i| i as f64 * 0.5).collect()
    }

    #[test]
    fn exact_models_recovered() {
        let t = times();
        let v: Vec<f64> = t.iter().map(|t| (-0.1 * t).exp()).collect();
        let f = fit_decay(&t, &v, DecayModel::ExpNu13, (0.0, 100.0), 1.0).unwrap();
        assert!((f.rate - 0.1).abs() < 1e-10 && (f.big_c - 1.0).abs() < 1e-10);
        let v: Vec<f64> = t.iter().map(|t| 3.0 * t.powi(-2)).collect();
        let f = fit_decay(&t, &v, DecayModel::Power, (1.0, 100.0), 0.0).unwrap();
        assert!((f.rate - 2.0).abs() < 1e-10 && (f.big_c - 3.0).abs() < 1e-9);
        let nu = 1e-5;
        let v: Vec<f64> = t.iter().map(|t| 0.5 * (-0.7 * nu * t.powi(3)).exp()).collect();
        let f = fit_decay(&t, &v, DecayModel::ExpCubic, (5.0, 100.0), nu).unwrap();
        assert!((f.rate - 0.7).abs() < 1e-9);
        assert!((f.eval(10.0) - 0.5 * (-0.7 * nu * 1000.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn noisy_rate_within_three_percent() {
        let t = times();
        let noise = Normal::new(0.0, 0.01).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v: Vec<f64> = t
            .iter()
            .map(|t| (-0.1 * t).exp() * (1.0 + noise.sample(&mut rng)))
            .collect();
        let f = fit_decay(&t, &v, DecayModel::ExpNu13, (0.0, 100.0), 1.0).unwrap();
        assert!((f.rate - 0.1).abs() < 0.003, "{}", f.rate);
        assert!(f.residual > 0.0);
    }

    #[test]
    fn rejects_bad_windows() {
        let t = times();
        let mut v: Vec<f64> = t.iter().map(|t| (-t).exp()).collect();
        v[10] = 0.0;
        assert!(matches!(
            fit_decay(&t, &v, DecayModel::ExpNu13, (0.0, 100.0), 1.0),
            Err(LabError::DegenerateSeries(_))
        ));
        assert!(fit_decay(&t, &v, DecayModel::ExpNu13, (50.0, 50.2), 1.0).is_err());
        assert!(fit_decay(&t, &v, DecayModel::ExpNu13, (20.0, 30.0), 1.0).is_ok());
    }
}
