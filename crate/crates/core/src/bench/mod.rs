//! Experiment orchestration: decay fits, stability scans and report output.

mod emit;
mod fit;
mod scan;

pub use emit::{emit, sha256_hex, Format, Manifest, Tabular};
pub use fit::{fit_decay, DecayFit, DecayModel};
pub use scan::{threshold_scan, ScanCell, ScanConfig, ScanResult, Thresholds, Verdict, SCAN_COLUMNS};
