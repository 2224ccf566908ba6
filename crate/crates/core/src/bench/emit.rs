//! Writing reports as CSV, JSON or CSV plus a gnuplot script.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::scan::{ScanCell, ScanResult, SCAN_COLUMNS};
use crate::error::{LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Plotdata,
}

/// A report with a fixed column schema.
pub trait Tabular: Serialize {
    fn columns(&self) -> Vec<&'static str>;
    fn rows(&self) -> Vec<Vec<String>>;
    /// `(x column, y columns, log-scale y)` for the plot script.
    fn plot(&self) -> (&'static str, Vec<&'static str>, bool);
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn cell_row(c: &ScanCell) -> Vec<String> {
    vec![
        c.nu.to_string(),
        c.epsilon.to_string(),
        opt(c.fitted_rate),
        opt(c.linear_rate),
        opt(c.amplification),
        opt(c.t_amplification),
        opt(c.norm_at_amplification),
        opt(c.final_norm),
        opt(c.t_onset),
        opt(c.norm_at_onset),
        serde_json::to_value(c.verdict)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default(),
        c.decays_after_peak().to_string(),
        c.decays_after_onset().to_string(),
        c.error.clone().unwrap_or_default(),
    ]
}

impl Tabular for ScanResult {
    fn columns(&self) -> Vec<&'static str> {
        SCAN_COLUMNS.to_vec()
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.cells.iter().map(cell_row).collect()
    }
    fn plot(&self) -> (&'static str, Vec<&'static str>, bool) {
        ("epsilon", vec!["amplification", "fitted_rate", "linear_rate"], true)
    }
}

fn write_csv_file<T: Tabular>(report: &T, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| LabError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(report.columns())?;
    for row in report.rows() {
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

fn plot_script(csv_name: &str, x: &str, ys: &[&str], log_y: bool, columns: &[&str]) -> String {
    let col = |name: &str| columns.iter().position(|c| *c == name).map_or(1, |i| i + 1);
    let mut s = String::new();
    s.push_str("set datafile separator ','\nset key autotitle columnhead\n");
    s.push_str(&format!("set xlabel '{x}'\n"));
    if log_y {
        s.push_str("set logscale xy\n");
    }
    let parts: Vec<String> = ys
        .iter()
        .map(|y| format!("'{csv_name}' using {}:{} with linespoints title '{y}'", col(x), col(y)))
        .collect();
    s.push_str(&format!("plot {}\n", parts.join(", \\\n     ")));
    s
}

/// Write `report` under `dir` with file stem `stem`; returns the written paths.
pub fn emit<T: Tabular>(report: &T, format: Format, dir: impl AsRef<Path>, stem: &str) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    match format {
        Format::Csv => {
            let p = dir.join(format!("{stem}.csv"));
            write_csv_file(report, &p)?;
            Ok(vec![p])
        }
        Format::Json => {
            let p = dir.join(format!("{stem}.json"));
            fs::write(&p, serde_json::to_string_pretty(report)?).map_err(|e| LabError::io(&p, e))?;
            Ok(vec![p])
        }
        Format::Plotdata => {
            let csv_name = format!("{stem}.csv");
            let p = dir.join(&csv_name);
            write_csv_file(report, &p)?;
            let (x, ys, log_y) = report.plot();
            let g = dir.join(format!("{stem}.gnuplot"));
            fs::write(&g, plot_script(&csv_name, x, &ys, log_y, &report.columns())).map_err(|e| LabError::io(&g, e))?;
            Ok(vec![p, g])
        }
    }
}

/// Artifacts of one CLI invocation and the hash of the config that produced them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub artifacts: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Manifest {
    pub fn new(command: &str, config_bytes: &[u8], seed: Option<u64>) -> Self {
        Manifest {
            command: command.to_string(),
            config_sha256: sha256_hex(config_bytes),
            seed,
            artifacts: Vec::new(),
        }
    }

    /// Record paths relative to `dir` when possible.
    pub fn add(&mut self, dir: &Path, paths: &[PathBuf]) {
        for p in paths {
            let rel = p.strip_prefix(dir).unwrap_or(p);
            self.artifacts.push(rel.to_string_lossy().into_owned());
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let p = dir.join("manifest.json");
        fs::write(&p, serde_json::to_string_pretty(self)?).map_err(|e| LabError::io(&p, e))?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::scan::{Thresholds, Verdict};

    fn report(n: usize) -> ScanResult {
        ScanResult {
            thresholds: Thresholds::default(),
            cells: (0..n)
                .map(|i| ScanCell {
                    nu: 1e-3,
                    epsilon: 10f64.powi(-(i as i32)),
                    fitted_rate: Some(0.3),
                    linear_rate: Some(0.31),
                    amplification: Some(1.0),
                    t_amplification: Some(4.0),
                    norm_at_amplification: Some(0.2),
                    final_norm: Some(0.01),
                    t_onset: None,
                    norm_at_onset: None,
                    verdict: Verdict::Stable,
                    error: None,
                })
                .collect(),
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let paths = emit(&report(0), Format::Csv, dir.path(), "scan").unwrap();
        let text = fs::read_to_string(&paths[0]).unwrap();
        assert_eq!(text.trim_end(), SCAN_COLUMNS.join(","));
    }

    #[test]
    fn json_round_trip_and_column_count() {
        let dir = tempfile::tempdir().unwrap();
        let r = report(3);
        let p = emit(&r, Format::Json, dir.path(), "scan").unwrap();
        let back: ScanResult = serde_json::from_str(&fs::read_to_string(&p[0]).unwrap()).unwrap();
        assert_eq!(back, r);
        let p = emit(&r, Format::Plotdata, dir.path(), "scan").unwrap();
        let mut rd = csv::Reader::from_path(&p[0]).unwrap();
        assert_eq!(rd.headers().unwrap().len(), SCAN_COLUMNS.len());
        for rec in rd.records() {
            assert_eq!(rec.unwrap().len(), SCAN_COLUMNS.len());
        }
        let script = fs::read_to_string(&p[1]).unwrap();
        assert!(script.contains("'scan.csv' using 2:5"));
        assert!(!script.contains(".json"));
    }

    #[test]
    fn manifest_hash_is_stable() {
        let a = Manifest::new("scan", b"{}", Some(1));
        assert_eq!(a.config_sha256, "44136fa355b3678a1146ad16f7e8649e94fb4fc21fe77e8310c060f61caaff8a");
        let dir = tempfile::tempdir().unwrap();
        let mut m = a.clone();
        m.add(dir.path(), &[dir.path().join("x.csv")]);
        assert_eq!(m.artifacts, vec!["x.csv"]);
        let p = m.write(dir.path()).unwrap();
        assert!(p.exists());
    }

    #[test]
    fn io_errors_carry_path() {
        let err = emit(&report(1), Format::Json, "/proc/forbidden-dir", "x").unwrap_err();
        assert!(err.to_string().contains("/proc/forbidden-dir"), "{err}");
    }
}
