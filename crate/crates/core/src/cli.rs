//! Subcommand drivers behind the `couette-lab` binary. Each reads one JSON
//! config, writes its artifacts plus `manifest.json` under the output
//! directory and is deterministic given config and seed.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bench::{emit, threshold_scan, Format, Manifest, ScanConfig};
use crate::coordsys::{coordinate_series, write_coord_csv};
use crate::error::{LabError, Result};
use crate::lemma_lab::{
    breakpoint_sensitivity, check_elementary, check_g_comparison, check_g_growth, check_nu13, check_separation, check_w_comparison,
    check_w_growth, check_w_rate, log_eta_grid, AuditReport,
};
use crate::linprop::decay_report;
use crate::nlsolve::{init_data, write_checkpoint, write_diagnostics_csv, SimConfig, Simulation};
use crate::toys::{cascade_amplification, integrate_strong, integrate_weak, strong_amplification};
use crate::weights::{write_table_csv, MultiplierEvaluator, MultiplierParams, MultiplierSpec, WeightTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Lin,
    Nl,
    Weights,
    Toys,
    Audit,
    Scan,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Lin => "lin",
            Command::Nl => "nl",
            Command::Weights => "weights",
            Command::Toys => "toys",
            Command::Audit => "audit",
            Command::Scan => "scan",
        }
    }
}

/// Result of one subcommand; `ok` is false when a declared audit failed.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub manifest: Manifest,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    pub params: MultiplierSpec,
    /// Frequencies whose breakpoint tables are dumped.
    pub etas: Vec<f64>,
    #[serde(default)]
    pub growth_grid: Option<EtaGrid>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl EtaGrid {
    pub fn points(&self) -> Vec<f64> {
        log_eta_grid(self.lo, self.hi, self.n)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToysConfig {
    pub params: MultiplierSpec,
    /// `(k, eta)` pairs for the strong model, started from `(1, 0)`.
    #[serde(default)]
    pub strong: Vec<(i64, f64)>,
    #[serde(default)]
    pub weak: Vec<f64>,
    #[serde(default)]
    pub cascade: Vec<f64>,
}

fn default_samples() -> usize {
    20_000
}
fn default_nu13_samples() -> usize {
    1_000_000
}
fn default_alpha() -> f64 {
    2.0
}
fn default_s_values() -> Vec<f64> {
    vec![0.25, 0.5, 0.75]
}
fn default_betas() -> Vec<f64> {
    vec![0.0, 1.0 / 6.0, 0.25]
}
fn default_nu() -> f64 {
    1e-4
}
fn default_audit_grid() -> EtaGrid {
    EtaGrid { lo: 10.0, hi: 1e6, n: 41 }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_nu13_samples")]
    pub nu13_samples: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_s_values")]
    pub s_values: Vec<f64>,
    #[serde(default = "default_betas")]
    pub betas: Vec<f64>,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default = "default_audit_grid")]
    pub eta_grid: EtaGrid,
    /// Samples for the weight-rate consistency audit; 0 skips it.
    #[serde(default)]
    pub rate_samples: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

fn parse<T: for<'de> Deserialize<'de>>(bytes: &[u8]) -> Result<T> {
    serde_json::from_slice(bytes).map_err(|e| LabError::Config(e.to_string()))
}

fn write_with<F>(path: PathBuf, f: F) -> Result<PathBuf>
where
    F: FnOnce(&mut dyn std::io::Write) -> Result<()>,
{
    let mut file = fs::File::create(&path).map_err(|e| LabError::io(&path, e))?;
    f(&mut file)?;
    Ok(path)
}

fn write_json<T: Serialize>(path: PathBuf, value: &T) -> Result<PathBuf> {
    fs::write(&path, serde_json::to_string_pretty(value)?).map_err(|e| LabError::io(&path, e))?;
    Ok(path)
}

fn sim_config(bytes: &[u8], seed: Option<u64>) -> Result<SimConfig> {
    let mut c = SimConfig::from_json(std::str::from_utf8(bytes).map_err(|e| LabError::Config(e.to_string()))?)?;
    if let Some(s) = seed {
        c.init.seed = s;
    }
    c.validate()?;
    Ok(c)
}

fn lin(bytes: &[u8], seed: Option<u64>, out: &Path) -> Result<(Vec<PathBuf>, bool)> {
    let c = sim_config(bytes, seed)?;
    let w0 = init_data(&c)?;
    let n = (c.t_final / c.diag_every).ceil().max(1.0) as usize;
    let times: Vec<f64> = (0..=n).map(|i| (i as f64 * c.diag_every).min(c.t_final)).collect();
    let rep = decay_report(&w0, c.nu, &times)?;
    let csv = write_with(out.join("decay.csv"), |w| rep.write_csv(w))?;
    let json = out.join("decay_summary.json");
    fs::write(&json, rep.summary_json()?).map_err(|e| LabError::io(&json, e))?;
    Ok((vec![csv, json], true))
}

fn nl(bytes: &[u8], seed: Option<u64>, out: &Path) -> Result<(Vec<PathBuf>, bool)> {
    let c = sim_config(bytes, seed)?;
    let mut sim = Simulation::new(c.clone())?;
    let run = sim.run_with(|_, _| Ok(()))?;
    let mut paths = vec![write_with(out.join("diagnostics.csv"), |w| write_diagnostics_csv(&run.rows, w))?];
    let ev = c.multiplier_params()?.map(MultiplierEvaluator::new);
    let ev = if c.energy { ev } else { None };
    match coordinate_series(c.grid.lv, &run.zero_modes, c.nu, ev.as_ref(), c.init.epsilon) {
        Ok((_, rows)) => paths.push(write_with(out.join("coordinates.csv"), |w| write_coord_csv(&rows, w))?),
        // a non-uniform output cadence only disables the coordinate diagnostics
        Err(LabError::InvalidParameter(msg)) => eprintln!("coordinate diagnostics skipped: {msg}"),
        Err(e) => return Err(e),
    }
    let ckpt = out.join("final.ckpt");
    write_checkpoint(&ckpt, &run.final_state)?;
    paths.push(ckpt);
    Ok((paths, true))
}

fn weights(bytes: &[u8], out: &Path) -> Result<(Vec<PathBuf>, bool)> {
    let c: WeightsConfig = parse(bytes)?;
    let p = MultiplierParams::try_from(c.params.clone())?;
    let tables: Vec<WeightTable> = c.etas.iter().map(|&e| WeightTable::new(e, &p)).collect();
    let refs: Vec<&WeightTable> = tables.iter().collect();
    let mut paths = vec![write_with(out.join("weights.csv"), |w| write_table_csv(w, &refs))?];
    let mut ok = true;
    if let Some(g) = c.growth_grid {
        let grid = g.points();
        let reps = vec![check_w_growth(p.beta, &grid)?, check_g_growth(p.beta, p.nu, &grid)?];
        ok = reps.iter().all(|r| r.pass);
        paths.push(write_json(out.join("growth.json"), &reps)?);
    }
    Ok((paths, ok))
}

fn toys(bytes: &[u8], out: &Path) -> Result<(Vec<PathBuf>, bool)> {
    let c: ToysConfig = parse(bytes)?;
    let p = MultiplierParams::try_from(c.params.clone())?;
    let mut paths = Vec::new();
    let mut amps = Vec::new();
    for &(k, eta) in &c.strong {
        let traj = integrate_strong(k, eta, &p, (1.0, 0.0))?;
        paths.push(write_with(out.join(format!("strong_k{k}_eta{eta}.csv")), |w| traj.write_csv(w))?);
        amps.push(strong_amplification(k, eta, &p)?);
    }
    for &eta in &c.weak {
        let traj = integrate_weak(eta, &p)?;
        paths.push(write_with(out.join(format!("weak_eta{eta}.csv")), |w| traj.write_csv(w))?);
    }
    if !amps.is_empty() {
        paths.push(write_json(out.join("strong_amplification.json"), &amps)?);
    }
    if !c.cascade.is_empty() {
        let reps = c
            .cascade
            .iter()
            .map(|&e| cascade_amplification(e, &p))
            .collect::<Result<Vec<_>>>()?;
        paths.push(write_json(out.join("cascade.json"), &reps)?);
    }
    Ok((paths, true))
}

/// Every declared audit for `c`; the returned reports pass iff the lemmas hold.
pub fn run_audits(c: &AuditConfig) -> Result<Vec<AuditReport>> {
    let seed = c.seed;
    let mut reps = Vec::new();
    for (i, &s) in c.s_values.iter().enumerate() {
        reps.push(check_elementary(s, c.samples, seed.wrapping_add(i as u64))?);
    }
    reps.push(check_nu13(c.nu13_samples, seed));
    reps.push(check_separation(c.samples, seed, c.alpha)?);
    let grid = c.eta_grid.points();
    for &b in &c.betas {
        reps.push(check_w_growth(b, &grid)?);
        reps.push(check_g_growth(b, c.nu, &grid)?);
        reps.push(check_w_comparison(b, c.samples / 4, seed)?);
        reps.push(check_g_comparison(b, c.nu, c.samples / 4, seed)?);
        reps.push(breakpoint_sensitivity(b, c.nu, &grid)?);
        if c.rate_samples > 0 {
            reps.push(check_w_rate(b, c.rate_samples, seed)?);
        }
    }
    Ok(reps)
}

fn audit(bytes: &[u8], seed: Option<u64>, out: &Path) -> Result<(Vec<PathBuf>, bool)> {
    let mut c: AuditConfig = parse(bytes)?;
    if let Some(s) = seed {
        c.seed = s;
    }
    let reps = run_audits(&c)?;
    let mut paths = Vec::new();
    for (i, r) in reps.iter().enumerate() {
        paths.push(write_json(out.join(format!("audit_{i:02}_{}.json", r.lemma)), r)?);
    }
    Ok((paths, reps.iter().all(|r| r.pass)))
}

fn scan(bytes: &[u8], seed: Option<u64>, out: &Path) -> Result<(Vec<PathBuf>, bool)> {
    let mut c: ScanConfig = parse(bytes)?;
    if let Some(s) = seed {
        c.base.init.seed = s;
    }
    let r = threshold_scan(&c);
    let mut paths = emit(&r, Format::Json, out, "scan")?;
    paths.extend(emit(&r, Format::Plotdata, out, "scan")?);
    Ok((paths, true))
}

/// Run `cmd` on the config at `config` and write everything under `out`.
pub fn run_command(cmd: Command, config: &Path, seed: Option<u64>, out: &Path) -> Result<Outcome> {
    let bytes = fs::read(config).map_err(|e| LabError::io(config, e))?;
    fs::create_dir_all(out).map_err(|e| LabError::io(out, e))?;
    let (paths, ok) = match cmd {
        Command::Lin => lin(&bytes, seed, out)?,
        Command::Nl => nl(&bytes, seed, out)?,
        Command::Weights => weights(&bytes, out)?,
        Command::Toys => toys(&bytes, out)?,
        Command::Audit => audit(&bytes, seed, out)?,
        Command::Scan => scan(&bytes, seed, out)?,
    };
    let mut manifest = Manifest::new(cmd.name(), &bytes, seed);
    manifest.add(out, &paths);
    manifest.write(out)?;
    Ok(Outcome { manifest, ok })
}
