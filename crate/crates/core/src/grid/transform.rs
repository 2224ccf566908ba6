//! Discrete transforms between retained spectral modes and the physical grid.
//!
//! Physical samples are stored row-major as `u[a * nv + b]` at
//! `z_a = 2 pi a / nz` and `v_b = -pi L_v + 2 pi L_v b / nv`. The shifted
//! origin in `v` contributes a `(-1)^j` phase to every mode.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::{Grid, SpectralField};
use crate::error::{LabError, Result};

#[derive(Clone)]
pub struct SpectralTransform {
    grid: Grid,
    z_fwd: Arc<dyn Fft<f64>>,
    z_inv: Arc<dyn Fft<f64>>,
    v_fwd: Arc<dyn Fft<f64>>,
    v_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralTransform").field("grid", &self.grid).finish()
    }
}

#[inline]
fn wrap(i: i64, n: usize) -> usize {
    i.rem_euclid(n as i64) as usize
}

#[inline]
fn parity(j: i64) -> f64 {
    if j % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl SpectralTransform {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        SpectralTransform {
            z_fwd: planner.plan_fft_forward(grid.nz()),
            z_inv: planner.plan_fft_inverse(grid.nz()),
            v_fwd: planner.plan_fft_forward(grid.nv()),
            v_inv: planner.plan_fft_inverse(grid.nv()),
            grid,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Complex physical values of the (not necessarily Hermitian) coefficient
    /// array, returned row-major `[a * nv + b]`.
    pub fn synthesize(&self, coef: &[Complex64]) -> Vec<Complex64> {
        let g = &self.grid;
        let (nz, nv, kx, mv) = (g.nz(), g.nv(), g.kx() as i64, g.mv() as i64);
        let zero = Complex64::new(0.0, 0.0);

        // v-direction on the retained k rows only.
        let mut rows: Vec<Vec<Complex64>> = (-kx..=kx)
            .into_par_iter()
            .map(|k| {
                let mut row = vec![zero; nv];
                for j in -mv..=mv {
                    row[wrap(j, nv)] = coef[g.index(k, j)] * parity(j);
                }
                self.v_inv.process(&mut row);
                row
            })
            .collect();

        // transpose into [b * nz + a] and run the z-direction.
        let mut t = vec![zero; nz * nv];
        for (r, k) in (-kx..=kx).enumerate() {
            let a = wrap(k, nz);
            for (b, val) in rows[r].drain(..).enumerate() {
                t[b * nz + a] = val;
            }
        }
        t.par_chunks_mut(nz).for_each(|col| self.z_inv.process(col));

        let mut out = vec![zero; nz * nv];
        out.par_chunks_mut(nv).enumerate().for_each(|(a, row)| {
            for (b, o) in row.iter_mut().enumerate() {
                *o = t[b * nz + a];
            }
        });
        out
    }

    /// Retained-mode coefficients of complex physical data.
    pub fn analyze(&self, u: &[Complex64]) -> Result<Vec<Complex64>> {
        let g = &self.grid;
        let (nz, nv, kx, mv) = (g.nz(), g.nv(), g.kx() as i64, g.mv() as i64);
        if u.len() != nz * nv {
            return Err(LabError::GridIncompatible(format!(
                "physical array has {} samples, grid needs {}x{}",
                u.len(),
                nz,
                nv
            )));
        }
        let zero = Complex64::new(0.0, 0.0);
        let mut t = vec![zero; nz * nv];
        t.par_chunks_mut(nz).enumerate().for_each(|(b, col)| {
            for (a, c) in col.iter_mut().enumerate() {
                *c = u[a * nv + b];
            }
            self.z_fwd.process(col);
        });

        let norm = 1.0 / (nz * nv) as f64;
        let rows: Vec<Vec<Complex64>> = (-kx..=kx)
            .into_par_iter()
            .map(|k| {
                let a = wrap(k, nz);
                let mut row: Vec<Complex64> = (0..nv).map(|b| t[b * nz + a]).collect();
                self.v_fwd.process(&mut row);
                (-mv..=mv)
                    .map(|j| row[wrap(j, nv)] * (parity(j) * norm))
                    .collect()
            })
            .collect();
        Ok(rows.into_iter().flatten().collect())
    }

    pub fn to_physical(&self, f: &SpectralField) -> Vec<f64> {
        self.synthesize(f.coef()).into_iter().map(|c| c.re).collect()
    }

    pub fn from_physical(&self, u: &[f64]) -> Result<SpectralField> {
        let data: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let mut f = SpectralField::from_coefficients(self.grid, self.analyze(&data)?)?;
        f.enforce_hermitian();
        Ok(f)
    }

    /// Two real fields through one complex transform.
    pub fn to_physical_pair(&self, f: &SpectralField, g: &SpectralField) -> (Vec<f64>, Vec<f64>) {
        let i = Complex64::new(0.0, 1.0);
        let packed: Vec<Complex64> = f.coef().iter().zip(g.coef()).map(|(a, b)| a + i * b).collect();
        self.synthesize(&packed).into_iter().map(|c| (c.re, c.im)).unzip()
    }

    /// Inverse of [`Self::to_physical_pair`].
    pub fn from_physical_pair(&self, u: &[f64], v: &[f64]) -> Result<(SpectralField, SpectralField)> {
        if u.len() != v.len() {
            return Err(LabError::GridIncompatible("paired arrays differ in length".into()));
        }
        let packed: Vec<Complex64> = u.iter().zip(v).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let c = self.analyze(&packed)?;
        let grid = self.grid;
        let mut f = SpectralField::zeros(grid);
        let mut g = SpectralField::zeros(grid);
        for idx in 0..grid.len() {
            let (k, j) = grid.mode_of(idx);
            let a = c[idx];
            let b = c[grid.index(-k, -j)].conj();
            f.coef_mut()[idx] = (a + b) * 0.5;
            g.coef_mut()[idx] = (a - b) * Complex64::new(0.0, -0.5);
        }
        f.enforce_hermitian();
        g.enforce_hermitian();
        Ok((f, g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paired_transforms_match_single() {
        let grid = Grid::new(5, 7, 1.2).unwrap();
        let mut f = SpectralField::zeros(grid);
        let mut g = SpectralField::zeros(grid);
        f.set_real_mode(1, 2, Complex64::new(0.3, -0.2));
        f.set_real_mode(0, 4, Complex64::new(0.1, 0.5));
        g.set_real_mode(2, -3, Complex64::new(-0.7, 0.1));
        g.set_real_mode(0, 0, Complex64::new(0.25, 0.0));
        let tr = SpectralTransform::new(grid);
        let (u, v) = tr.to_physical_pair(&f, &g);
        let u1 = tr.to_physical(&f);
        let v1 = tr.to_physical(&g);
        for i in 0..u.len() {
            assert!((u[i] - u1[i]).abs() < 1e-14);
            assert!((v[i] - v1[i]).abs() < 1e-14);
        }
        let (f2, g2) = tr.from_physical_pair(&u, &v).unwrap();
        assert!((&f2 - &f).max_abs() < 1e-14);
        assert!((&g2 - &g).max_abs() < 1e-14);
    }

    #[test]
    fn product_is_dealiased() {
        // cos(K z) * cos(K z) = (1 + cos(2K z)) / 2; the 2K harmonic is outside
        // the retained band and must not alias back into it.
        let grid = Grid::new(6, 2, 1.0).unwrap();
        let tr = SpectralTransform::new(grid);
        let mut f = SpectralField::zeros(grid);
        f.set_real_mode(6, 0, Complex64::new(0.5, 0.0));
        let u = tr.to_physical(&f);
        let sq: Vec<f64> = u.iter().map(|x| x * x).collect();
        let p = tr.from_physical(&sq).unwrap();
        assert!((p.get(0, 0).re - 0.5).abs() < 1e-14);
        let rest: f64 = p.modes().filter(|m| !(m.0 == 0 && m.1 == 0)).map(|m| m.3.norm()).sum();
        assert!(rest < 1e-13);
    }
}
