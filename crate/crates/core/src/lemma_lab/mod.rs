//! Sampled audits of the quantitative estimates behind the weights.
//!
//! Exact inequalities are checked with a `1e-12` float allowance. Estimates
//! that only hold up to an unnamed constant are audited as bounded
//! statistics: the constant is fitted on a calibration sample, frozen, and
//! then checked on fresh samples.

mod comparison;
mod elementary;
mod growth;
mod rate;
mod separation;

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub use comparison::{check_g_comparison, check_w_comparison};
pub use elementary::{check_elementary, check_nu13, power_difference_ratio};
pub use growth::{check_g_growth, check_w_growth, log_eta_grid, w_growth_exponent};
pub use rate::{breakpoint_sensitivity, check_w_rate, RATE_FACTOR};
pub use separation::{check_separation, separation_cases, SeparationCases, SeparationSample};

/// Float allowance for exact inequalities.
pub const EXACT_SLACK: f64 = 1e-12;
/// Offending samples kept per report.
pub const MAX_OFFENDERS: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Offender {
    pub sample: BTreeMap<String, f64>,
    /// Offending value; `None` when it was not finite.
    pub value: Option<f64>,
}

impl Offender {
    pub fn new(sample: &[(&str, f64)], value: f64) -> Self {
        Offender {
            sample: sample.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            value: value.is_finite().then_some(value),
        }
    }
}

/// Order statistics of the audited quantity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub min: f64,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
    pub max: f64,
}

impl Distribution {
    /// `None` for an empty or non-finite sample.
    pub fn of(values: &[f64]) -> Option<Self> {
        let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let q = |p: f64| v[((v.len() - 1) as f64 * p).round() as usize];
        Some(Distribution {
            min: v[0],
            p50: q(0.5),
            p90: q(0.9),
            p99: q(0.99),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub lemma: String,
    pub seed: Option<u64>,
    pub samples: usize,
    /// Smallest slack of an exact inequality.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub worst_slack: Option<f64>,
    /// Frozen constant of a bounded-statistic audit.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fitted_constant: Option<f64>,
    /// Human-readable acceptance rule.
    pub band: String,
    pub pass: bool,
    pub offenders: Vec<Offender>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub distribution: Option<Distribution>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub extra: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub parts: Vec<AuditReport>,
}

impl AuditReport {
    pub fn new(lemma: &str, seed: Option<u64>, samples: usize, band: impl Into<String>) -> Self {
        AuditReport {
            lemma: lemma.to_string(),
            seed,
            samples,
            worst_slack: None,
            fitted_constant: None,
            band: band.into(),
            pass: true,
            offenders: Vec::new(),
            distribution: None,
            extra: BTreeMap::new(),
            parts: Vec::new(),
        }
    }

    pub fn with_extra(mut self, key: &str, value: f64) -> Self {
        self.extra.insert(key.to_string(), value);
        self
    }

    pub fn offend(&mut self, o: Offender) {
        self.pass = false;
        if self.offenders.len() < MAX_OFFENDERS {
            self.offenders.push(o);
        }
    }

    /// Combine sub-audits; passes iff every part does.
    pub fn from_parts(lemma: &str, seed: Option<u64>, parts: Vec<AuditReport>) -> Self {
        let mut out = AuditReport::new(lemma, seed, parts.iter().map(|p| p.samples).sum(), "all parts pass");
        out.pass = parts.iter().all(|p| p.pass);
        out.offenders = parts
            .iter()
            .flat_map(|p| p.offenders.iter().cloned())
            .take(MAX_OFFENDERS)
            .collect();
        out.worst_slack = parts.iter().filter_map(|p| p.worst_slack).reduce(f64::min);
        out.parts = parts;
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| LabError::io(path, e))
    }
}

/// Audit of `slack >= -EXACT_SLACK` over labelled samples; the first
/// offenders in sample order are kept.
pub(crate) fn exact_audit(
    lemma: &str,
    seed: Option<u64>,
    band: &str,
    rows: &[(Vec<(&'static str, f64)>, f64)],
) -> AuditReport {
    let mut rep = AuditReport::new(lemma, seed, rows.len(), band);
    let slacks: Vec<f64> = rows.iter().map(|r| r.1).collect();
    rep.worst_slack = slacks.iter().copied().reduce(f64::min);
    rep.distribution = Distribution::of(&slacks);
    for (sample, slack) in rows {
        if !(*slack >= -EXACT_SLACK) {
            rep.offend(Offender::new(sample, *slack));
        }
    }
    rep
}

pub(crate) fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..=hi.ln())).exp()
}

pub(crate) fn random_sign(rng: &mut impl Rng) -> f64 {
    if rng.random_bool(0.5) {
        1.0
    } else {
        -1.0
    }
}
