//! Composite multipliers `A`, `A^gamma`, `A^R` and their scalar ingredients.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use super::{e_floor, pow_s, MultiplierParams, WeightTable};
use super::layout::t_crit;
use crate::grid::{bracket, gevrey_power, l1};

/// `(m_k, d/dt log m_k)` for the enhanced-dissipation ghost weight.
pub fn m_eval(t: f64, k: i64, eta: f64, nu: f64) -> (f64, f64) {
    if k == 0 {
        return (1.0, 0.0);
    }
    let (l, d) = log_m(t, k, eta, nu);
    (l.exp(), d)
}

fn log_m(t: f64, k: i64, eta: f64, nu: f64) -> (f64, f64) {
    if k == 0 {
        return (0.0, 0.0);
    }
    let c = nu.cbrt();
    let kf = k as f64;
    let x = c * (kf * t - eta);
    ((x.atan() + (c * eta).atan()) / kf, c / (1.0 + x * x))
}

/// `iota(k, eta)`: `k` when `|k| > |eta|`, otherwise `eta`.
pub fn iota(k: i64, eta: f64) -> f64 {
    if (k as f64).abs() > eta.abs() {
        k as f64
    } else {
        eta
    }
}

/// `<nu^{-1/3} |eta|^{s-1}>^{3 beta}`.
pub fn frak_g(nu: f64, eta: f64, s: f64, beta: f64) -> f64 {
    bracket(eta.abs().powf(s - 1.0) / nu.cbrt()).powf(3.0 * beta)
}

/// `<nu^{1/3} |eta|^{1-s}>^{-3/2 + 3 beta}` from `t_{E(|eta|^s),|eta|}` on, else 1.
pub fn frak_w(nu: f64, t: f64, eta: f64, s: f64, beta: f64) -> f64 {
    let abs = eta.abs();
    let k = if abs > 0.0 { e_floor(pow_s(abs, s)) } else { 0 };
    if t >= t_crit(k, abs) {
        bracket(nu.cbrt() * abs.powf(1.0 - s)).powf(-1.5 + 3.0 * beta)
    } else {
        1.0
    }
}

/// Log value of a multiplier and the log-derivatives of its weight factors.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MultiplierValue {
    pub log_value: f64,
    /// `d/dt log w_k(t, iota(k, eta))`.
    pub dlog_w: f64,
    /// `d/dt log g(t, iota(k, eta))`.
    pub dlog_g: f64,
    /// `d/dt log m_k(t, eta)`.
    pub dlog_m: f64,
}

impl MultiplierValue {
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }
}

/// Shared read-only evaluator that caches one [`WeightTable`] per `|eta|`.
#[derive(Debug)]
pub struct MultiplierEvaluator {
    params: MultiplierParams,
    tables: RwLock<HashMap<u64, Arc<WeightTable>>>,
}

impl Clone for MultiplierEvaluator {
    fn clone(&self) -> Self {
        MultiplierEvaluator {
            params: self.params.clone(),
            tables: RwLock::new(self.tables.read().unwrap().clone()),
        }
    }
}

impl MultiplierEvaluator {
    pub fn new(params: MultiplierParams) -> Self {
        MultiplierEvaluator {
            params,
            tables: RwLock::new(HashMap::new()),
        }
    }

    pub fn params(&self) -> &MultiplierParams {
        &self.params
    }

    pub fn table(&self, eta: f64) -> Arc<WeightTable> {
        let key = eta.abs().to_bits();
        if let Some(t) = self.tables.read().unwrap().get(&key) {
            return t.clone();
        }
        let table = Arc::new(WeightTable::new(eta, &self.params));
        self.tables.write().unwrap().entry(key).or_insert(table).clone()
    }

    /// Build tables for many frequencies in parallel.
    pub fn prefetch(&self, etas: &[f64]) {
        use rayon::prelude::*;
        let missing: Vec<f64> = {
            let cache = self.tables.read().unwrap();
            etas.iter()
                .copied()
                .filter(|e| !cache.contains_key(&e.abs().to_bits()))
                .collect()
        };
        let built: Vec<(u64, Arc<WeightTable>)> = missing
            .par_iter()
            .map(|&e| (e.abs().to_bits(), Arc::new(WeightTable::new(e, &self.params))))
            .collect();
        let mut cache = self.tables.write().unwrap();
        for (k, t) in built {
            cache.entry(k).or_insert(t);
        }
    }

    pub fn cached_tables(&self) -> usize {
        self.tables.read().unwrap().len()
    }

    /// `(w_k(t, eta), d/dt log w_k)`.
    pub fn w_eval(&self, t: f64, k: i64, eta: f64) -> (f64, f64) {
        let (l, d) = self.log_w_k(t, k, eta);
        (l.exp(), d)
    }

    pub fn log_w_k(&self, t: f64, k: i64, eta: f64) -> (f64, f64) {
        self.table(eta).log_w_k(t, k, (k as f64) * eta > 0.0)
    }

    /// `(w^R(t, eta), d/dt log w^R)`.
    pub fn w_r_special(&self, t: f64, eta: f64) -> (f64, f64) {
        let (l, d) = self.table(eta).log_w_r(t);
        (l.exp(), d)
    }

    /// `(g(t, eta), d/dt log g)`.
    pub fn g_eval(&self, t: f64, eta: f64) -> (f64, f64) {
        let (l, d) = self.table(eta).log_g(t);
        (l.exp(), d)
    }

    pub fn m_eval(&self, t: f64, k: i64, eta: f64) -> (f64, f64) {
        m_eval(t, k, eta, self.params.nu)
    }

    pub fn frak_g(&self, eta: f64) -> f64 {
        frak_g(self.params.nu, eta, self.params.s, self.params.beta)
    }

    pub fn frak_w(&self, t: f64, eta: f64) -> f64 {
        frak_w(self.params.nu, t, eta, self.params.s, self.params.beta)
    }

    pub fn lambda_of_t(&self, t: f64) -> f64 {
        self.params.lambda_of_t(t)
    }

    /// Evaluation context with `lambda(t)` computed once.
    pub fn at(&self, t: f64) -> MultiplierSlice<'_> {
        MultiplierSlice {
            ev: self,
            t,
            lambda: self.params.lambda_of_t(t),
        }
    }

    pub fn a_eval(&self, t: f64, k: i64, eta: f64) -> f64 {
        self.at(t).a(k, eta).value()
    }

    pub fn a_gamma_eval(&self, t: f64, k: i64, eta: f64) -> f64 {
        self.at(t).log_a_gamma(k, eta).exp()
    }

    pub fn a_r_eval(&self, t: f64, eta: f64) -> f64 {
        self.at(t).a_r(eta).value()
    }
}

#[derive(Clone, Copy)]
pub struct MultiplierSlice<'a> {
    ev: &'a MultiplierEvaluator,
    t: f64,
    lambda: f64,
}

impl MultiplierSlice<'_> {
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn gevrey_log(&self, k: i64, eta: f64, sobolev: u32) -> f64 {
        let r = l1(k, eta);
        self.lambda * gevrey_power(r, self.ev.params.s) + sobolev as f64 * bracket(r).ln()
    }

    /// `A_k(t, eta) = e^{1_{k!=0} c_M nu^{1/3} t} e^{lambda |k,eta|^s} <k,eta>^sigma
    /// / w_k(t, iota) / g(t, iota) / m_k(t, eta)`.
    pub fn a(&self, k: i64, eta: f64) -> MultiplierValue {
        let p = &self.ev.params;
        let i = iota(k, eta);
        let table = self.ev.table(i);
        let (lw, dw) = table.log_w_k(self.t, k, (k as f64) * i > 0.0);
        let (lg, dg) = table.log_g(self.t);
        let (lm, dm) = log_m(self.t, k, eta, p.nu);
        let ed = if k != 0 { p.c_m * p.nu.cbrt() * self.t } else { 0.0 };
        MultiplierValue {
            log_value: ed + self.gevrey_log(k, eta, p.sigma) - lw - lg - lm,
            dlog_w: dw,
            dlog_g: dg,
            dlog_m: dm,
        }
    }

    pub fn log_a_gamma(&self, k: i64, eta: f64) -> f64 {
        let p = &self.ev.params;
        let base = self.gevrey_log(k, eta, p.gamma);
        if k == 0 {
            base
        } else {
            let x = p.c_m * p.nu.cbrt() * self.t;
            (1.0 + x).ln() + x + base - log_m(self.t, k, eta, p.nu).0
        }
    }

    /// `A^R(t, eta) = e^{lambda |eta|^s} <eta>^sigma / w^R(t, eta) / g(t, eta)`.
    pub fn a_r(&self, eta: f64) -> MultiplierValue {
        let p = &self.ev.params;
        let table = self.ev.table(eta);
        let (lw, dw) = table.log_w_r(self.t);
        let (lg, dg) = table.log_g(self.t);
        MultiplierValue {
            log_value: self.gevrey_log(0, eta, p.sigma) - lw - lg,
            dlog_w: dw,
            dlog_g: dg,
            dlog_m: 0.0,
        }
    }
}
