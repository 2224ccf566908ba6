//! Field serialization. Binary layout (little endian):
//!
//! | offset | type   | content            |
//! |--------|--------|--------------------|
//! | 0      | [u8;4] | magic `CLSF`       |
//! | 4      | u32    | format version (1) |
//! | 8      | u32    | K_x                |
//! | 12     | u32    | M_v                |
//! | 16     | f64    | L_v                |
//! | 24     | u32    | N_z                |
//! | 28     | u32    | N_v                |
//! | 32     | f64 x2 | (re, im) per mode, k outer from -K_x, j inner from -M_v |
//!
//! Files ending in `.json` use `{"K_x", "M_v", "L_v", "N_z", "N_v", "coef": [[re, im], ...]}`.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Grid, SpectralField};
use crate::error::{LabError, Result};

pub const FIELD_MAGIC: &[u8; 4] = b"CLSF";
pub const FIELD_HEADER_BYTES: usize = 32;
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct JsonField {
    #[serde(rename = "K_x")]
    kx: usize,
    #[serde(rename = "M_v")]
    mv: usize,
    #[serde(rename = "L_v")]
    lv: f64,
    #[serde(rename = "N_z", default)]
    nz: Option<usize>,
    #[serde(rename = "N_v", default)]
    nv: Option<usize>,
    coef: Vec<[f64; 2]>,
}

impl SpectralField {
    pub fn to_bytes(&self) -> Vec<u8> {
        let g = self.grid();
        let mut out = Vec::with_capacity(FIELD_HEADER_BYTES + 16 * g.len());
        out.extend_from_slice(FIELD_MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(g.kx() as u32).to_le_bytes());
        out.extend_from_slice(&(g.mv() as u32).to_le_bytes());
        out.extend_from_slice(&g.lv().to_le_bytes());
        out.extend_from_slice(&(g.nz() as u32).to_le_bytes());
        out.extend_from_slice(&(g.nv() as u32).to_le_bytes());
        for c in self.coef() {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < FIELD_HEADER_BYTES || &bytes[0..4] != FIELD_MAGIC {
            return Err(LabError::Format("missing CLSF header".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != VERSION {
            return Err(LabError::Format(format!("unsupported version {version}")));
        }
        let grid = Grid::with_physical(
            u32_at(8) as usize,
            u32_at(12) as usize,
            f64_at(16),
            u32_at(24) as usize,
            u32_at(28) as usize,
        )?;
        let body = &bytes[FIELD_HEADER_BYTES..];
        if body.len() != 16 * grid.len() {
            return Err(LabError::Format(format!(
                "payload holds {} bytes, header implies {}",
                body.len(),
                16 * grid.len()
            )));
        }
        let coef = body
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[0..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..16].try_into().unwrap()),
                )
            })
            .collect();
        let f = SpectralField::from_coefficients(grid, coef)?;
        f.check_finite()?;
        Ok(f)
    }

    pub fn to_json(&self) -> Result<String> {
        let g = self.grid();
        let j = JsonField {
            kx: g.kx(),
            mv: g.mv(),
            lv: g.lv(),
            nz: Some(g.nz()),
            nv: Some(g.nv()),
            coef: self.coef().iter().map(|c| [c.re, c.im]).collect(),
        };
        Ok(serde_json::to_string(&j)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: JsonField = serde_json::from_str(s)?;
        let grid = match (j.nz, j.nv) {
            (Some(nz), Some(nv)) => Grid::with_physical(j.kx, j.mv, j.lv, nz, nv)?,
            _ => Grid::new(j.kx, j.mv, j.lv)?,
        };
        let coef = j.coef.iter().map(|c| Complex64::new(c[0], c[1])).collect();
        let f = SpectralField::from_coefficients(grid, coef)?;
        f.check_finite()?;
        Ok(f)
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

pub fn write_field(path: impl AsRef<Path>, f: &SpectralField) -> Result<()> {
    let path = path.as_ref();
    let data = if is_json(path) {
        f.to_json()?.into_bytes()
    } else {
        f.to_bytes()
    };
    fs::write(path, data).map_err(|e| LabError::io(path, e))
}

pub fn read_field(path: impl AsRef<Path>) -> Result<SpectralField> {
    let path = path.as_ref();
    let data = fs::read(path).map_err(|e| LabError::io(path, e))?;
    if is_json(path) {
        let s = String::from_utf8(data).map_err(|e| LabError::Format(e.to_string()))?;
        SpectralField::from_json(&s)
    } else {
        SpectralField::from_bytes(&data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SpectralField {
        let grid = Grid::new(3, 4, 1.5).unwrap();
        let mut f = SpectralField::zeros(grid);
        f.set_real_mode(1, -2, Complex64::new(0.25, -1.0 / 3.0));
        f.set_real_mode(0, 3, Complex64::new(1e-300, 7.0));
        f
    }

    #[test]
    fn binary_round_trip_is_bitwise() {
        let f = sample();
        let bytes = f.to_bytes();
        assert_eq!(bytes.len(), FIELD_HEADER_BYTES + 16 * f.grid().len());
        assert_eq!(SpectralField::from_bytes(&bytes).unwrap(), f);
    }

    #[test]
    fn json_round_trip_is_bitwise() {
        let f = sample();
        assert_eq!(SpectralField::from_json(&f.to_json().unwrap()).unwrap(), f);
    }

    #[test]
    fn corrupt_inputs_rejected() {
        let f = sample();
        let mut bytes = f.to_bytes();
        assert!(SpectralField::from_bytes(&bytes[..40]).is_err());
        bytes[0] = b'X';
        assert!(matches!(SpectralField::from_bytes(&bytes), Err(LabError::Format(_))));
        let mut bytes = f.to_bytes();
        bytes[FIELD_HEADER_BYTES..FIELD_HEADER_BYTES + 8].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(matches!(SpectralField::from_bytes(&bytes), Err(LabError::NonFinite { .. })));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let f = sample();
        for name in ["f.bin", "f.json"] {
            let p = dir.path().join(name);
            write_field(&p, &f).unwrap();
            assert_eq!(read_field(&p).unwrap(), f);
        }
        assert!(matches!(read_field(dir.path().join("missing.bin")), Err(LabError::Io { .. })));
    }
}
