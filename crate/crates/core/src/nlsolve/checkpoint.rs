//! Checkpoint layout (little endian): magic `CLCK`, u32 version, f64 time,
//! u64 step count, f64 largest mean defect so far, then a complete `CLSF`
//! field blob.

use std::fs;
use std::path::Path;

use super::SimState;
use crate::error::{LabError, Result};
use crate::grid::SpectralField;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"CLCK";
const VERSION: u32 = 1;
const HEADER: usize = 32;

pub fn checkpoint_bytes(state: &SimState) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER);
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&state.t.to_le_bytes());
    out.extend_from_slice(&state.steps.to_le_bytes());
    out.extend_from_slice(&state.max_mean_defect.to_le_bytes());
    out.extend_from_slice(&state.omega.to_bytes());
    out
}

pub fn checkpoint_from_bytes(bytes: &[u8]) -> Result<SimState> {
    if bytes.len() < HEADER || &bytes[..4] != CHECKPOINT_MAGIC {
        return Err(LabError::Format("not a checkpoint (bad magic or truncated header)".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(LabError::Format(format!("unsupported checkpoint version {version}")));
    }
    let steps = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    Ok(SimState {
        t: f64_at(8),
        steps,
        max_mean_defect: f64_at(24),
        omega: SpectralField::from_bytes(&bytes[HEADER..])?,
    })
}

pub fn write_checkpoint(path: impl AsRef<Path>, state: &SimState) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, checkpoint_bytes(state)).map_err(|e| LabError::io(path, e))
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<SimState> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| LabError::io(path, e))?;
    checkpoint_from_bytes(&bytes)
}
