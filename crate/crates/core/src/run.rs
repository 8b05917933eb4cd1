//! Orchestration of a configured run: solve, compare, write artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::bie::{BieSolver, DensityVector};
use crate::config::{Format, RunConfig};
use crate::contours::Deformation;
use crate::directivity::{DirectivityTable, OeSolver};
use crate::error::{Error, Result};
use crate::linalg::Cx;
use crate::march::{median_residual_with, residual_sample_points_on, AlphaValidation};
use crate::Case;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "OESTRIP_THREADS";

/// Process exit status for an error: 2 configuration, 4 I/O, 3 numerical.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        Error::Io(_) => 4,
        _ => 3,
    }
}

/// Discrepancy between OE and BIE directivity magnitudes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareReport {
    /// Angles present in both tables, radians.
    pub theta: Vec<f64>,
    /// `| |S_oe| - |S_bie| |` per component.
    pub abs_diff: BTreeMap<String, Vec<f64>>,
    /// `|| |S_oe| - |S_bie| ||_2 / || S_bie ||_2` per component.
    pub l2_rel: BTreeMap<String, f64>,
    /// `max | |S_oe| - |S_bie| | / max |S_bie|` per component.
    pub linf_rel: BTreeMap<String, f64>,
    /// Wall-clock seconds per stage. Logged, never written, so output files
    /// stay reproducible.
    #[serde(skip)]
    pub runtime: Vec<(String, f64)>,
}

fn components(t: &DirectivityTable) -> [(&'static str, Option<&Vec<Cx>>); 3] {
    [("s_a", t.s_a.as_ref()), ("s_s", t.s_s.as_ref()), ("s_total", t.s_total.as_ref())]
}

impl CompareReport {
    /// Compare on the angles common to both tables.
    pub fn new(oe: &DirectivityTable, bie: &DirectivityTable) -> Result<Self> {
        let pairs: Vec<(usize, usize)> = oe
            .theta
            .iter()
            .enumerate()
            .filter_map(|(i, t)| bie.theta.iter().position(|u| u == t).map(|j| (i, j)))
            .collect();
        if pairs.is_empty() {
            return Err(Error::Config("OE and BIE tables share no angles".into()));
        }
        let mut report = Self {
            theta: pairs.iter().map(|&(i, _)| oe.theta[i]).collect(),
            abs_diff: BTreeMap::new(),
            l2_rel: BTreeMap::new(),
            linf_rel: BTreeMap::new(),
            runtime: Vec::new(),
        };
        for ((name, a), (_, b)) in components(oe).into_iter().zip(components(bie)) {
            let (Some(a), Some(b)) = (a, b) else { continue };
            let diff: Vec<f64> = pairs.iter().map(|&(i, j)| (a[i].norm() - b[j].norm()).abs()).collect();
            let refs: Vec<f64> = pairs.iter().map(|&(_, j)| b[j].norm()).collect();
            let l2 = diff.iter().map(|d| d * d).sum::<f64>().sqrt() / refs.iter().map(|r| r * r).sum::<f64>().sqrt();
            let linf = diff.iter().cloned().fold(0.0, f64::max) / refs.iter().cloned().fold(0.0, f64::max);
            report.abs_diff.insert(name.into(), diff);
            report.l2_rel.insert(name.into(), l2);
            report.linf_rel.insert(name.into(), linf);
        }
        Ok(report)
    }

    pub fn to_csv(&self) -> String {
        let names: Vec<&String> = self.abs_diff.keys().collect();
        let mut s = String::new();
        for n in &names {
            let _ = writeln!(s, "# {n}: l2_rel = {}, linf_rel = {}", self.l2_rel[*n], self.linf_rel[*n]);
        }
        s.push_str("theta_deg");
        for n in &names {
            let _ = write!(s, ",absdiff_{n}");
        }
        s.push('\n');
        for (i, t) in self.theta.iter().enumerate() {
            let _ = write!(s, "{}", t.to_degrees());
            for n in &names {
                let _ = write!(s, ",{}", self.abs_diff[*n][i]);
            }
            s.push('\n');
        }
        s
    }
}

/// Diagnostics recorded next to the tables.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Metadata {
    pub version: String,
    /// Outcome of the eigenvector sign check.
    pub alpha_validation: Option<AlphaValidation>,
    pub gamma_nodes: Option<usize>,
    pub gamma_height: Option<f64>,
    pub deformation: Option<Deformation>,
    /// Median OE residual on the cut, per case.
    pub oe_residual: BTreeMap<String, f64>,
    pub n_panels: Option<usize>,
}

/// Everything a run produced.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub metadata: Metadata,
    pub oe: Option<DirectivityTable>,
    pub bie: Option<DirectivityTable>,
    pub densities: Vec<DensityVector>,
    pub compare: Option<CompareReport>,
}

fn timed<T>(stages: &mut Vec<(String, f64)>, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let t0 = Instant::now();
    let out = f()?;
    let dt = t0.elapsed().as_secs_f64();
    log::info!("{name}: {dt:.3} s");
    stages.push((name.to_string(), dt));
    Ok(out)
}

/// Solve without touching the filesystem.
pub fn compute(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let params = config.problem()?;
    let grid = config.theta_grid()?;
    let cases = config.case.cases();
    let mut stages = Vec::new();
    let mut metadata = Metadata { version: env!("CARGO_PKG_VERSION").to_string(), ..Metadata::default() };

    let oe = if config.mode.runs_oe() {
        let solver = timed(&mut stages, "oe march", || OeSolver::for_cases(params, &config.oe_options(), cases))?;
        metadata.alpha_validation = solver.alpha_validation().copied();
        metadata.gamma_nodes = Some(solver.mesh().len());
        metadata.gamma_height = Some(solver.mesh().height());
        metadata.deformation = solver.mesh().deformation().copied();
        let points = residual_sample_points_on(solver.mesh(), 5);
        let step = config.oe_options().step;
        for &case in cases {
            let r = median_residual_with(solver.table(case)?, &points, config.tolerances.eps_shore, &step)?;
            metadata.oe_residual.insert(case.name().to_string(), r);
        }
        Some(timed(&mut stages, "oe directivity", || solver.directivity(&grid, config.case))?)
    } else {
        None
    };

    let (bie, densities) = if config.mode.runs_bie() {
        metadata.n_panels = Some(config.mesh.n_panels);
        let solver = BieSolver::new(params, config.mesh.n_panels)?;
        let (t, d) = timed(&mut stages, "bie", || solver.directivity(&grid, config.case))?;
        (Some(t), d)
    } else {
        (None, Vec::new())
    };

    let compare = match (&oe, &bie) {
        (Some(o), Some(b)) => {
            let mut r = CompareReport::new(o, b)?;
            for (name, v) in &r.l2_rel {
                log::info!("{name}: L2 {v:.3e}, Linf {:.3e}", r.linf_rel[name]);
            }
            r.runtime = stages;
            Some(r)
        }
        _ => None,
    };
    Ok(RunOutput { metadata, oe, bie, densities, compare })
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn echo_header(config: &RunConfig, metadata: &Metadata) -> String {
    let mut s = String::new();
    for line in config.to_toml().lines().filter(|l| !l.trim().is_empty()) {
        let _ = writeln!(s, "# {line}");
    }
    let meta = serde_json::to_string(metadata).expect("metadata serialises");
    let _ = writeln!(s, "# metadata = {meta}");
    s
}

#[derive(Serialize)]
struct JsonOutput<'a> {
    config: &'a RunConfig,
    metadata: &'a Metadata,
    table: Vec<&'a DirectivityTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    compare: Option<&'a CompareReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    densities: Vec<&'a DensityVector>,
}

/// Write the artifacts of `output` to the configured directory.
pub fn write_outputs(config: &RunConfig, output: &RunOutput) -> Result<Vec<PathBuf>> {
    let dir = &config.output.dir;
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut files: Vec<(PathBuf, String)> = Vec::new();
    match config.output.format {
        Format::Csv => {
            let header = echo_header(config, &output.metadata);
            if let Some(t) = &output.oe {
                files.push((dir.join("directivity_oe.csv"), format!("{header}{}", t.to_csv())));
            }
            if let Some(t) = &output.bie {
                files.push((dir.join("directivity_bie.csv"), format!("{header}{}", t.to_csv())));
            }
            if let Some(c) = &output.compare {
                files.push((dir.join("compare.csv"), format!("{header}{}", c.to_csv())));
            }
            for d in &output.densities {
                let name = format!("density_{}.csv", d.case.name());
                files.push((dir.join(name), format!("{header}{}", d.to_csv())));
            }
        }
        Format::Json => {
            let doc = JsonOutput {
                config,
                metadata: &output.metadata,
                table: output.oe.iter().chain(output.bie.iter()).collect(),
                compare: output.compare.as_ref(),
                densities: output.densities.iter().collect(),
            };
            let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Io(e.to_string()))?;
            files.push((dir.join("result.json"), text + "\n"));
        }
    }
    for (path, text) in &files {
        std::fs::write(path, text).map_err(|e| io_err(path, e))?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

/// Solve and write outputs, honouring the thread cap.
pub fn run(config: &RunConfig) -> Result<(RunOutput, Vec<PathBuf>)> {
    let go = || -> Result<(RunOutput, Vec<PathBuf>)> {
        let out = compute(config)?;
        let files = write_outputs(config, &out)?;
        Ok((out, files))
    };
    match thread_cap()? {
        None => go(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(go),
    }
}

/// Components stored in a table, for callers that only need the names.
pub fn stored_cases(t: &DirectivityTable) -> Vec<Case> {
    Case::BOTH.into_iter().filter(|&c| t.component(c).is_some()).collect()
}
