use std::path::PathBuf;

use calabi_core::analysis::{CHECK_TOL, DEFAULT_A_GRID};
use calabi_core::MapSpec;
use serde::Serialize;

use crate::args::{Command, Format};
use crate::error::CliError;

/// Every setting a run depends on, with defaults filled in. This is what
/// output headers echo; the output directory and worker count are left
/// out because results do not depend on them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub spec: String,
    pub k_max: u32,
    pub grid: u32,
    pub tol: f64,
    pub check_tol: f64,
    pub a: Vec<f64>,
    pub birkhoff_n: u32,
    pub birkhoff_starts: u32,
    pub seed: u64,
    pub normalization: String,
    pub formats: Vec<String>,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub workers: usize,
}

pub fn resolve(command: &Command) -> Result<(RunConfig, MapSpec), CliError> {
    let o = command.opts();
    let text = std::fs::read_to_string(&o.spec).map_err(|e| CliError::Io(o.spec.clone(), e))?;
    let spec = MapSpec::parse(&text).map_err(|e| CliError::Spec(o.spec.clone(), e))?;
    let t = spec.tasks;
    let a = match (&o.a, command) {
        (Some(list), _) => list.clone(),
        (None, Command::Verify(_)) => DEFAULT_A_GRID.to_vec(),
        (None, _) => vec![t.a],
    };
    let formats = match (&o.format, command) {
        (Some(f), _) => f.clone(),
        (None, Command::Diagram(_)) => vec![Format::Csv, Format::Svg],
        (None, _) => vec![Format::Json],
    };
    let cfg = RunConfig {
        command: command.name().into(),
        spec: o.spec.display().to_string(),
        k_max: o.k_max.unwrap_or(t.k_max),
        grid: o.grid.unwrap_or(t.grid),
        tol: o.tol.unwrap_or(t.tol),
        check_tol: o.check_tol.unwrap_or(CHECK_TOL),
        a,
        birkhoff_n: o.birkhoff_n.unwrap_or(t.birkhoff_n),
        birkhoff_starts: o.birkhoff_starts.unwrap_or(t.birkhoff_starts),
        seed: o.seed.unwrap_or(t.seed),
        normalization: spec.normalization.describe(),
        formats: formats.iter().map(|f| f.extension().to_string()).collect(),
        out: o.out.clone(),
        workers: o.workers.unwrap_or(0),
    };
    validate(&cfg)?;
    Ok((cfg, spec))
}

fn validate(c: &RunConfig) -> Result<(), CliError> {
    let bad = |m: String| Err(CliError::Usage(m));
    if !(c.tol > 0.0) || !(c.check_tol > 0.0) {
        return bad("tolerances must be positive".into());
    }
    if c.a.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return bad(format!("embedding parameters must be finite and >= 0, got {:?}", c.a));
    }
    if c.a.is_empty() {
        return bad("--a needs at least one value".into());
    }
    Ok(())
}

impl RunConfig {
    pub fn formats(&self) -> impl Iterator<Item = &str> {
        self.formats.iter().map(String::as_str)
    }
}
