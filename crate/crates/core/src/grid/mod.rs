//! Spectral fields on the truncated sheared domain `T_z x [-pi L_v, pi L_v)`.
//!
//! Coefficients are stored for `k in [-K_x, K_x]` and `j in [-M_v, M_v]`,
//! with vertical frequency `eta = j / L_v`. Frequency integrals are
//! rectangle-rule sums weighted by `d_eta = 1 / L_v`, so a single mode of unit
//! amplitude has squared L2 norm `d_eta`.

mod io;
pub mod lp;
mod transform;

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub use io::{read_field, write_field, FIELD_HEADER_BYTES, FIELD_MAGIC};
pub use transform::SpectralTransform;

/// `|k, eta|^s` with the convention that the exponent vanishes identically
/// when `s == 0`, so the Gevrey weight degenerates to the Sobolev one.
#[inline]
pub fn gevrey_power(r: f64, s: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        r.powf(s)
    }
}

/// Japanese bracket `(1 + r^2)^(1/2)`.
#[inline]
pub fn bracket(r: f64) -> f64 {
    (1.0 + r * r).sqrt()
}

/// l1 frequency magnitude `|k| + |eta|`.
#[inline]
pub fn l1(k: i64, eta: f64) -> f64 {
    k.unsigned_abs() as f64 + eta.abs()
}

fn fft_friendly(min: usize) -> usize {
    let mut n = min.max(1);
    loop {
        let mut m = n;
        for p in [2, 3, 5] {
            while m % p == 0 {
                m /= p;
            }
        }
        if m == 1 {
            return n;
        }
        n += 1;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    kx: usize,
    mv: usize,
    lv: f64,
    nz: usize,
    nv: usize,
}

impl Grid {
    /// Grid with the smallest FFT-friendly physical resolution that satisfies
    /// the 2/3 dealiasing margin.
    pub fn new(kx: usize, mv: usize, lv: f64) -> Result<Self> {
        Self::with_physical(kx, mv, lv, fft_friendly(3 * kx + 1), fft_friendly(3 * mv + 1))
    }

    /// Grid for a given physical resolution, retaining the largest
    /// dealiased band.
    pub fn with_resolution(nz: usize, nv: usize, lv: f64) -> Result<Self> {
        if nz == 0 || nv == 0 {
            return Err(LabError::GridIncompatible("empty physical grid".into()));
        }
        Self::with_physical((nz - 1) / 3, (nv - 1) / 3, lv, nz, nv)
    }

    pub fn with_physical(kx: usize, mv: usize, lv: f64, nz: usize, nv: usize) -> Result<Self> {
        if !(lv.is_finite() && lv > 0.0) {
            return Err(LabError::GridIncompatible(format!("L_v must be positive, got {lv}")));
        }
        if nz < 3 * kx + 1 || nv < 3 * mv + 1 {
            return Err(LabError::GridIncompatible(format!(
                "physical resolution {nz}x{nv} violates 2/3 margin for K_x={kx}, M_v={mv}"
            )));
        }
        Ok(Grid { kx, mv, lv, nz, nv })
    }

    pub fn kx(&self) -> usize {
        self.kx
    }
    pub fn mv(&self) -> usize {
        self.mv
    }
    pub fn lv(&self) -> f64 {
        self.lv
    }
    pub fn nz(&self) -> usize {
        self.nz
    }
    pub fn nv(&self) -> usize {
        self.nv
    }
    pub fn d_eta(&self) -> f64 {
        1.0 / self.lv
    }
    pub fn dz(&self) -> f64 {
        std::f64::consts::TAU / self.nz as f64
    }
    pub fn dv(&self) -> f64 {
        std::f64::consts::TAU * self.lv / self.nv as f64
    }
    pub fn eta(&self, j: i64) -> f64 {
        j as f64 / self.lv
    }
    pub fn eta_max(&self) -> f64 {
        self.mv as f64 / self.lv
    }
    pub fn n_k(&self) -> usize {
        2 * self.kx + 1
    }
    pub fn n_j(&self) -> usize {
        2 * self.mv + 1
    }
    pub fn len(&self) -> usize {
        self.n_k() * self.n_j()
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, k: i64, j: i64) -> bool {
        k.unsigned_abs() as usize <= self.kx && j.unsigned_abs() as usize <= self.mv
    }

    #[inline]
    pub fn index(&self, k: i64, j: i64) -> usize {
        debug_assert!(self.contains(k, j));
        (k + self.kx as i64) as usize * self.n_j() + (j + self.mv as i64) as usize
    }

    #[inline]
    pub fn mode_of(&self, idx: usize) -> (i64, i64) {
        let nj = self.n_j();
        ((idx / nj) as i64 - self.kx as i64, (idx % nj) as i64 - self.mv as i64)
    }

    /// Physical coordinates `(z_a, v_b)` of a grid point.
    pub fn point(&self, a: usize, b: usize) -> (f64, f64) {
        (
            a as f64 * self.dz(),
            -std::f64::consts::PI * self.lv + b as f64 * self.dv(),
        )
    }

    pub fn same_spectral_shape(&self, other: &Grid) -> bool {
        self.kx == other.kx && self.mv == other.mv && self.lv == other.lv
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    grid: Grid,
    coef: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        SpectralField {
            coef: vec![Complex64::new(0.0, 0.0); grid.len()],
            grid,
        }
    }

    pub fn from_coefficients(grid: Grid, coef: Vec<Complex64>) -> Result<Self> {
        if coef.len() != grid.len() {
            return Err(LabError::GridIncompatible(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coef.len()
            )));
        }
        Ok(SpectralField { grid, coef })
    }

    /// Field built from a per-mode closure; the caller is responsible for
    /// Hermitian symmetry.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(i64, f64) -> Complex64) -> Self {
        let mut out = Self::zeros(grid);
        for idx in 0..grid.len() {
            let (k, j) = grid.mode_of(idx);
            out.coef[idx] = f(k, grid.eta(j));
        }
        out
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn coef(&self) -> &[Complex64] {
        &self.coef
    }
    pub fn coef_mut(&mut self) -> &mut [Complex64] {
        &mut self.coef
    }

    pub fn get(&self, k: i64, j: i64) -> Complex64 {
        if self.grid.contains(k, j) {
            self.coef[self.grid.index(k, j)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn set(&mut self, k: i64, j: i64, c: Complex64) {
        let idx = self.grid.index(k, j);
        self.coef[idx] = c;
    }

    /// Set a mode and its Hermitian partner.
    pub fn set_real_mode(&mut self, k: i64, j: i64, c: Complex64) {
        self.set(k, j, c);
        self.set(-k, -j, c.conj());
        if k == 0 && j == 0 {
            self.coef[self.grid.index(0, 0)] = Complex64::new(c.re, 0.0);
        }
    }

    /// Iterate `(k, j, eta, coefficient)` over all retained modes.
    pub fn modes(&self) -> impl Iterator<Item = (i64, i64, f64, Complex64)> + '_ {
        self.coef.iter().enumerate().map(move |(idx, c)| {
            let (k, j) = self.grid.mode_of(idx);
            (k, j, self.grid.eta(j), *c)
        })
    }

    /// Multiply every coefficient by a real symbol `m(k, eta)`.
    pub fn apply_symbol(&self, mut m: impl FnMut(i64, f64) -> f64) -> Self {
        let mut out = self.clone();
        out.apply_symbol_in_place(&mut m);
        out
    }

    pub fn apply_symbol_in_place(&mut self, mut m: impl FnMut(i64, f64) -> f64) {
        let grid = self.grid;
        for (idx, c) in self.coef.iter_mut().enumerate() {
            let (k, j) = grid.mode_of(idx);
            *c *= m(k, grid.eta(j));
        }
    }

    /// Multiply by a complex symbol, e.g. `i k` for a derivative.
    pub fn apply_complex_symbol(&self, mut m: impl FnMut(i64, f64) -> Complex64) -> Self {
        let mut out = self.clone();
        let grid = self.grid;
        for (idx, c) in out.coef.iter_mut().enumerate() {
            let (k, j) = grid.mode_of(idx);
            *c *= m(k, grid.eta(j));
        }
        out
    }

    pub fn dz(&self) -> Self {
        self.apply_complex_symbol(|k, _| Complex64::new(0.0, k as f64))
    }

    pub fn dv(&self) -> Self {
        self.apply_complex_symbol(|_, eta| Complex64::new(0.0, eta))
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.coef {
            *c *= a;
        }
    }

    pub fn axpy(&mut self, a: f64, other: &SpectralField) {
        debug_assert!(self.grid.same_spectral_shape(&other.grid));
        for (c, o) in self.coef.iter_mut().zip(&other.coef) {
            *c += o * a;
        }
    }

    pub fn check_compatible(&self, other: &SpectralField) -> Result<()> {
        if self.grid.same_spectral_shape(&other.grid) {
            Ok(())
        } else {
            Err(LabError::GridIncompatible(format!(
                "fields on different grids: {:?} vs {:?}",
                self.grid, other.grid
            )))
        }
    }

    /// Replace each coefficient pair by its Hermitian average.
    pub fn enforce_hermitian(&mut self) {
        let grid = self.grid;
        for idx in 0..grid.len() {
            let (k, j) = grid.mode_of(idx);
            let partner = grid.index(-k, -j);
            if partner < idx {
                continue;
            }
            if partner == idx {
                self.coef[idx].im = 0.0;
                continue;
            }
            let avg = (self.coef[idx] + self.coef[partner].conj()) * 0.5;
            self.coef[idx] = avg;
            self.coef[partner] = avg.conj();
        }
    }

    /// Largest violation of `c(-k,-j) = conj(c(k,j))`.
    pub fn hermitian_defect(&self) -> f64 {
        let grid = self.grid;
        (0..grid.len())
            .map(|idx| {
                let (k, j) = grid.mode_of(idx);
                (self.coef[idx] - self.coef[grid.index(-k, -j)].conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.coef.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            None => Ok(()),
            Some(idx) => {
                let (k, j) = self.grid.mode_of(idx);
                Err(LabError::NonFinite { k, j })
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coef.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Weighted squared norm `sum |c|^2 m(k, eta)^2 d_eta`.
    pub fn weighted_norm_sq(&self, mut m: impl FnMut(i64, f64) -> f64) -> f64 {
        let d_eta = self.grid.d_eta();
        self.modes()
            .map(|(k, _, eta, c)| {
                let w = m(k, eta);
                c.norm_sqr() * w * w
            })
            .sum::<f64>()
            * d_eta
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.coef.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.d_eta()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn sobolev_norm(&self, sigma: f64) -> f64 {
        self.weighted_norm_sq(|k, eta| bracket(l1(k, eta)).powf(sigma)).sqrt()
    }

    /// Gevrey-`1/s` norm with Sobolev correction,
    /// `sum_k sum_eta |f_k(eta)|^2 e^{2 lambda |k,eta|^s} <k,eta>^{2 sigma} d_eta`.
    ///
    /// The exponential is evaluated in log space together with the Sobolev
    /// factor so large frequencies do not overflow before the coefficient
    /// has been applied.
    pub fn gevrey_norm(&self, s: f64, lambda: f64, sigma: f64) -> f64 {
        let d_eta = self.grid.d_eta();
        self.modes()
            .filter(|(_, _, _, c)| c.norm_sqr() > 0.0)
            .map(|(k, _, eta, c)| {
                let r = l1(k, eta);
                let log_w = lambda * gevrey_power(r, s) + sigma * bracket(r).ln();
                (2.0 * (c.norm().ln() + log_w)).exp()
            })
            .sum::<f64>()
            .mul(d_eta)
            .sqrt()
    }

    pub fn inner(&self, other: &SpectralField) -> Complex64 {
        self.coef
            .iter()
            .zip(&other.coef)
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            * self.grid.d_eta()
    }

    /// `P_0 f`: the z-average.
    pub fn zero_mode(&self) -> Self {
        self.apply_symbol(|k, _| if k == 0 { 1.0 } else { 0.0 })
    }

    /// `P_{!=} f`: everything but the z-average.
    pub fn nonzero_modes(&self) -> Self {
        self.apply_symbol(|k, _| if k == 0 { 0.0 } else { 1.0 })
    }

    pub fn project_modes(&self) -> (Self, Self) {
        (self.zero_mode(), self.nonzero_modes())
    }

    pub fn mean(&self) -> f64 {
        self.get(0, 0).re
    }

    /// Zero-mode profile `c(0, j)` for `j in [-M_v, M_v]`.
    pub fn zero_mode_profile(&self) -> Vec<Complex64> {
        (-(self.grid.mv as i64)..=self.grid.mv as i64)
            .map(|j| self.get(0, j))
            .collect()
    }

    pub fn to_physical(&self) -> Vec<f64> {
        SpectralTransform::new(self.grid).to_physical(self)
    }

    pub fn from_physical(u: &[f64], grid: Grid) -> Result<Self> {
        SpectralTransform::new(grid).from_physical(u)
    }

    /// Share of the physical `L^2` mass with `|v| >= (1 - width) pi L_v`,
    /// the part of the box where periodization starts to matter.
    pub fn boundary_fraction(&self, width: f64) -> f64 {
        let g = self.grid;
        let u = self.to_physical();
        let edge = (1.0 - width) * std::f64::consts::PI * g.lv();
        let (mut shell, mut total) = (0.0, 0.0);
        for (i, x) in u.iter().enumerate() {
            let (_, v) = g.point(i / g.nv(), i % g.nv());
            total += x * x;
            if v.abs() >= edge {
                shell += x * x;
            }
        }
        if total > 0.0 {
            shell / total
        } else {
            0.0
        }
    }
}

impl Add<&SpectralField> for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&SpectralField> for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&SpectralField> for SpectralField {
    fn add_assign(&mut self, rhs: &SpectralField) {
        debug_assert!(self.grid.same_spectral_shape(&rhs.grid));
        for (a, b) in self.coef.iter_mut().zip(&rhs.coef) {
            *a += b;
        }
    }
}

impl SubAssign<&SpectralField> for SpectralField {
    fn sub_assign(&mut self, rhs: &SpectralField) {
        debug_assert!(self.grid.same_spectral_shape(&rhs.grid));
        for (a, b) in self.coef.iter_mut().zip(&rhs.coef) {
            *a -= b;
        }
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        let mut out = self.clone();
        out.scale(rhs);
        out
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self * -1.0
    }
}
