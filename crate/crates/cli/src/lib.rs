//! Command-line front end: spec loading, config resolution and report
//! files for the `invariants`, `orbits`, `verify`, `diagram` and `embed`
//! commands.

pub mod args;
pub mod config;
pub mod error;

use std::path::PathBuf;
use std::sync::Arc;

use calabi_core::analysis::{
    build_diagram, check_conjecture, check_hutchings_disk, check_main_theorem, check_sandwich, disk_atlas,
    lebesgue_point, HypothesisValues, Verdict,
};
use calabi_core::embedding::{
    annulus_invariants, calabi_of_fa_formula, embed, embedding_report_with, AnnulusInvariants,
};
use calabi_core::orbits::{birkhoff_samples, random_starts};
use calabi_core::report::{birkhoff_value, diagram_csv, diagram_svg, header, orbit_value, to_json, to_value};
use calabi_core::{
    find_periodic_orbits, invariants, pt, ActionField, AreaMap, DiskMap, InvariantReport, MapSpec, Normalization,
    PeriodicOrbit, SearchParams,
};
use serde_json::{json, Value};

pub use args::{Cli, Command, Format, Opts};
pub use config::{resolve, RunConfig};
pub use error::CliError;

/// One output file: name inside the output directory and its contents.
pub type Output = (String, String);

/// Resolves the config, runs the command on a pool of `workers` threads
/// and writes the outputs. Returns the written paths.
pub fn run(command: &Command) -> Result<Vec<PathBuf>, CliError> {
    let (cfg, spec) = resolve(command)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let outputs = pool.install(|| execute(&cfg, &spec))?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::Io(cfg.out.clone(), e))?;
    let mut written = Vec::new();
    for (name, text) in outputs {
        let path = cfg.out.join(name);
        std::fs::write(&path, text).map_err(|e| CliError::Io(path.clone(), e))?;
        written.push(path);
    }
    Ok(written)
}

/// Computes the output files of a resolved run without touching the disk.
pub fn execute(cfg: &RunConfig, spec: &MapSpec) -> Result<Vec<Output>, CliError> {
    let ctx = Ctx::new(cfg, spec)?;
    match cfg.command.as_str() {
        "invariants" => ctx.invariants(),
        "orbits" => ctx.orbits(),
        "verify" => ctx.verify(),
        "diagram" => ctx.diagram(),
        "embed" => ctx.embed(),
        other => Err(CliError::Usage(format!("unknown command `{other}`"))),
    }
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    map: Arc<dyn AreaMap>,
    field: ActionField,
    header: Value,
}

fn with_header(header: &Value, body: Value) -> String {
    let mut v = json!({ "header": header });
    if let (Value::Object(out), Value::Object(body)) = (&mut v, body) {
        out.extend(body);
    }
    to_json(&v)
}

impl<'a> Ctx<'a> {
    fn new(cfg: &'a RunConfig, spec: &MapSpec) -> Result<Self, CliError> {
        let map: Arc<dyn AreaMap> = Arc::new(spec.map.clone());
        let field = ActionField::new(map.clone(), spec.map.chart.standard_form(), spec.normalization, cfg.tol)?;
        Ok(Ctx { cfg, map, field, header: header(spec, cfg)? })
    }

    fn is_disk(&self) -> bool {
        self.map.chart().is_disk()
    }

    fn report(&self) -> Result<InvariantReport, CliError> {
        Ok(invariants(&self.field, self.cfg.tol)?)
    }

    /// `g` on the inner and outer boundary (the center on the disk).
    fn boundary_actions(&self) -> Result<(f64, f64), CliError> {
        let (lo, hi) = self.map.chart().radial_range();
        Ok((self.field.value(&pt(lo, 0.0))?, self.field.value(&pt(hi, 0.0))?))
    }

    fn atlas(&self) -> Result<(Vec<PeriodicOrbit>, usize, usize), CliError> {
        if self.cfg.k_max == 0 {
            return Ok((Vec::new(), 0, 0));
        }
        let params = SearchParams { k_max: self.cfg.k_max, grid: self.cfg.grid, m_range: None };
        let out = find_periodic_orbits(&self.field, &params)?;
        Ok((out.orbits, out.seeds, out.dropped))
    }

    /// Invariants of the unit-chart map behind every embedding. Reuses the
    /// report when the map already lives on `[0, 1]` with the default
    /// normalization.
    fn unit_invariants(&self, r: Option<&InvariantReport>, dm: &DiskMap) -> Result<AnnulusInvariants, CliError> {
        match (dm.renormalization, r.and_then(|r| r.flux.map(|f| (r, f)))) {
            (None, Some((r, flux))) if self.field.normalization() == Normalization::default() => {
                Ok(AnnulusInvariants { theta0: r.theta0, theta1: r.theta1, flux, calabi: r.calabi })
            }
            _ => Ok(annulus_invariants(dm, self.cfg.tol)?),
        }
    }

    fn values(&self, r: &InvariantReport) -> HypothesisValues {
        HypothesisValues { theta0: r.theta0, theta1: r.theta1, flux: r.flux.unwrap_or(f64::NAN), calabi: r.calabi }
    }

    fn invariants(&self) -> Result<Vec<Output>, CliError> {
        let r = self.report()?;
        let (g_inner, g_outer) = self.boundary_actions()?;
        let body = json!({
            "theta0": r.theta0,
            "theta1": r.theta1,
            "flux": r.flux,
            "calabi": r.calabi,
            "g_inner": g_inner,
            "g_outer": g_outer,
            "normalization": r.normalization,
            "chart": r.chart,
            "tol": r.tol,
        });
        Ok(vec![("invariants.json".into(), with_header(&self.header, body))])
    }

    fn orbits(&self) -> Result<Vec<Output>, CliError> {
        let (atlas, seeds, dropped) = self.atlas()?;
        let body = json!({
            "k_max": self.cfg.k_max,
            "grid": self.cfg.grid,
            "seeds": seeds,
            "dropped": dropped,
            "count": atlas.len(),
            "orbits": atlas.iter().map(orbit_value).collect::<Vec<_>>(),
        });
        Ok(vec![("atlas.json".into(), with_header(&self.header, body))])
    }

    fn verify(&self) -> Result<Vec<Output>, CliError> {
        let r = self.report()?;
        let values = self.values(&r);
        let (atlas, _, _) = self.atlas()?;
        let tol = self.cfg.check_tol;
        let mut checked: Vec<(Verdict, bool)> = Vec::new();
        let mut push = |v: Verdict, atlas: &[PeriodicOrbit]| {
            let ok = v.recheck(atlas);
            checked.push((v, ok));
        };
        push(check_sandwich(values, &atlas, tol), &atlas);
        if self.is_disk() {
            push(check_hutchings_disk(r.calabi, r.theta1, &atlas, tol), &atlas);
        } else {
            for v in check_main_theorem(values, &atlas, &self.cfg.a, tol) {
                push(v, &atlas);
            }
            let (g_inner, _) = self.boundary_actions()?;
            for v in check_conjecture(values, g_inner, &atlas, tol) {
                push(v, &atlas);
            }
            let mut unit = None;
            for &a in &self.cfg.a {
                let dm = embed(self.map.clone(), a)?;
                let inv = match unit {
                    Some(inv) => inv,
                    None => *unit.insert(self.unit_invariants(Some(&r), &dm)?),
                };
                let disk = disk_atlas(&dm, &atlas, self.cfg.tol)?;
                let cal = calabi_of_fa_formula(a, &inv);
                let mut v = check_hutchings_disk(cal, dm.boundary.theta_upper, &disk, tol);
                v.check = format!("{} with a = {a}", v.check);
                push(v, &disk);
            }
        }
        let verdicts = checked
            .iter()
            .map(|(v, ok)| {
                let mut j = to_value(v)?;
                j["rechecked"] = Value::Bool(*ok);
                Ok(j)
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let body = json!({
            "values": to_value(&values)?,
            "atlas_size": atlas.len(),
            "verdicts": verdicts,
        });
        Ok(vec![("verdicts.json".into(), with_header(&self.header, body))])
    }

    fn diagram(&self) -> Result<Vec<Output>, CliError> {
        let (atlas, _, _) = self.atlas()?;
        let lebesgue = lebesgue_point(&self.field, self.cfg.tol)?;
        let starts = random_starts(&self.map.chart(), self.cfg.birkhoff_starts as usize, self.cfg.seed);
        let samples = if starts.is_empty() || self.cfg.birkhoff_n < 2 {
            Vec::new()
        } else {
            birkhoff_samples(&self.field, &starts, self.cfg.birkhoff_n as usize)?
        };
        let values = if self.is_disk() { None } else { Some(self.values(&self.report()?)) };
        let d = build_diagram(&atlas, Some(lebesgue), &samples, values.as_ref())?;
        let mut out = Vec::new();
        for f in self.cfg.formats() {
            match f {
                "csv" => out.push(("diagram.csv".into(), diagram_csv(&d, &self.header))),
                "svg" => out.push(("diagram.svg".into(), diagram_svg(&d, &self.header, &self.cfg.spec))),
                _ => {
                    let (rlo, rhi) = d.rho_span();
                    let (alo, ahi) = d.action_span();
                    let body = json!({
                        "diagram": to_value(&d)?,
                        "birkhoff": samples.iter().map(birkhoff_value).collect::<Vec<_>>(),
                        "rho_span": [rlo, rhi],
                        "action_span": [alo, ahi],
                    });
                    out.push(("diagram.json".into(), with_header(&self.header, body)));
                }
            }
        }
        Ok(out)
    }

    fn embed(&self) -> Result<Vec<Output>, CliError> {
        let (atlas, _, _) = self.atlas()?;
        let dm = embed(self.map.clone(), self.cfg.a[0])?;
        let r = if dm.renormalization.is_none() { Some(self.report()?) } else { None };
        let inv = self.unit_invariants(r.as_ref(), &dm)?;
        let reports = self
            .cfg
            .a
            .iter()
            .map(|&a| Ok(to_value(&embedding_report_with(self.map.clone(), a, &atlas, &inv, self.cfg.tol)?)?))
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(vec![("embedding.json".into(), with_header(&self.header, json!({ "reports": reports })))])
    }
}
