//! Far-field directivity from RH solutions via the embedding formula.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contours::{build_gamma_with, xi_principal, GammaMesh, MeshSpec, ProblemParams};
use crate::error::{Error, Result};
use crate::kernel::{variable_change, Direction};
use crate::linalg::{Cx, Mat2, I};
use crate::march::{march_with, validate_alpha_sign, AlphaValidation, CoefficientTable, MarchOptions};
use crate::ode1::{solve_at, StepPolicy};
use crate::{Case, CaseSelection};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "OE")]
    Oe,
    #[serde(rename = "BIE")]
    Bie,
}

/// Directivity samples over a grid of observation angles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectivityTable {
    pub method: Method,
    pub params: ProblemParams,
    /// Observation angles in radians, strictly increasing.
    pub theta: Vec<f64>,
    pub s_a: Option<Vec<Cx>>,
    pub s_s: Option<Vec<Cx>>,
    pub s_total: Option<Vec<Cx>>,
    /// Angles removed because `-k0 cos(theta)` hit `k*`.
    pub dropped: Vec<f64>,
}

impl DirectivityTable {
    pub fn new(method: Method, params: ProblemParams, theta: Vec<f64>) -> Self {
        Self { method, params, theta, s_a: None, s_s: None, s_total: None, dropped: Vec::new() }
    }

    pub fn component(&self, case: Case) -> Option<&[Cx]> {
        match case {
            Case::Antisym => self.s_a.as_deref(),
            Case::Sym => self.s_s.as_deref(),
        }
    }

    /// Store one component and refresh the total.
    pub fn set_component(&mut self, case: Case, values: Vec<Cx>) -> Result<()> {
        if values.len() != self.theta.len() {
            return Err(Error::Config(format!(
                "component has {} values for {} angles",
                values.len(),
                self.theta.len()
            )));
        }
        match case {
            Case::Antisym => self.s_a = Some(values),
            Case::Sym => self.s_s = Some(values),
        }
        self.s_total = match (&self.s_a, &self.s_s) {
            (Some(a), Some(s)) => Some(a.iter().zip(s).map(|(x, y)| x + y).collect()),
            _ => None,
        };
        Ok(())
    }

    /// Drop `theta[i]` for every `i` in `indices` from the grid and all
    /// stored components.
    fn drop_indices(&mut self, indices: &[usize]) {
        if indices.is_empty() {
            return;
        }
        let keep = |i: usize| !indices.contains(&i);
        self.dropped.extend(indices.iter().map(|&i| self.theta[i]));
        let filter = |v: &mut Option<Vec<Cx>>| {
            if let Some(vals) = v {
                *vals = vals.iter().enumerate().filter(|(i, _)| keep(*i)).map(|(_, z)| *z).collect();
            }
        };
        filter(&mut self.s_a);
        filter(&mut self.s_s);
        filter(&mut self.s_total);
        self.theta = self.theta.iter().enumerate().filter(|(i, _)| keep(*i)).map(|(_, t)| *t).collect();
    }

    /// `theta_deg` then `re/im/abs` triples for each stored component.
    pub fn to_csv(&self) -> String {
        let cols: Vec<(&str, &Vec<Cx>)> = [("s_a", &self.s_a), ("s_s", &self.s_s), ("s_total", &self.s_total)]
            .into_iter()
            .filter_map(|(n, v)| v.as_ref().map(|v| (n, v)))
            .collect();
        let mut s = String::from("theta_deg");
        for (name, _) in &cols {
            let _ = write!(s, ",re_{name},im_{name},abs_{name}");
        }
        s.push('\n');
        for (i, t) in self.theta.iter().enumerate() {
            let _ = write!(s, "{}", t.to_degrees());
            for (_, v) in &cols {
                let z = v[i];
                let _ = write!(s, ",{},{},{}", z.re, z.im, z.norm());
            }
            s.push('\n');
        }
        s
    }
}

/// `n` angles uniform on `[delta, pi - delta]`.
pub fn theta_grid(n: usize, delta: f64) -> Result<Vec<f64>> {
    if n < 2 || !(delta > 0.0 && delta < PI / 2.0) {
        return Err(Error::Config(format!("theta grid needs n >= 2 and 0 < delta < pi/2 (n = {n}, delta = {delta})")));
    }
    let span = PI - 2.0 * delta;
    Ok((0..n).map(|i| delta + span * (i as f64 / (n - 1) as f64)).collect())
}

/// `(U~0^1, U~0^2)` or `(V~0^1, V~0^2)` from the RH solution at `k`.
///
/// For the antisymmetric case `solution` is `U`, i.e. after undoing the
/// variable change. `xi` is `xi(k)` on the caller's branch.
pub fn u0_tilde(case: Case, solution: &Mat2, xi: Cx, params: &ProblemParams, k: Cx) -> Result<[Cx; 2]> {
    let d = params.eta - I * xi;
    if d.norm() <= 1e-14 * (params.eta.norm() + xi.norm()) {
        return Err(Error::DenominatorVanishes { k });
    }
    let sums = solution.row_sums();
    let factor = match case {
        Case::Antisym => -d.inv(),
        Case::Sym => xi / (I * d),
    };
    Ok([factor * sums[0], factor * sums[1]])
}

/// Embedding formula combining the auxiliary solutions at `k` and `k*`.
pub fn embed(
    case: Case,
    k: Cx,
    k_star: Cx,
    at_k: [Cx; 2],
    at_kstar: [Cx; 2],
    xi_kstar: Cx,
    params: &ProblemParams,
    delta_k: f64,
) -> Result<Cx> {
    if (k - k_star).norm() <= delta_k {
        return Err(Error::CoincidentWavenumbers { k, k_star });
    }
    let inv = (k - k_star).inv();
    Ok(match case {
        Case::Antisym => xi_kstar * inv * (at_kstar[0] * at_k[1] - at_k[0] * at_kstar[1]),
        Case::Sym => I * params.eta * inv * (at_kstar[1] * at_k[0] - at_k[1] * at_kstar[0]),
    })
}

/// Scale factor turning the embedding value into the directivity.
fn directivity_factor(case: Case, theta: f64, params: &ProblemParams) -> Cx {
    let phase = Cx::from_polar(1.0, -FRAC_PI_4);
    match case {
        Case::Antisym => -phase * params.k0 * theta.sin(),
        Case::Sym => phase,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OeOptions {
    pub mesh: MeshSpec,
    pub march: MarchOptions,
    pub step: StepPolicy,
    /// Exclusion radius around `k*`, in units of `|k0|`.
    pub delta_k: f64,
    /// Pick the eigenvector sign by residual; otherwise use `mesh.alpha_sign`.
    pub validate_alpha: bool,
}

impl Default for OeOptions {
    fn default() -> Self {
        Self {
            mesh: MeshSpec::default(),
            march: MarchOptions::default(),
            step: StepPolicy::default(),
            delta_k: 1e-6,
            validate_alpha: true,
        }
    }
}

/// The OE pipeline: mesh, marched coefficient tables, and evaluation.
#[derive(Debug)]
pub struct OeSolver {
    params: ProblemParams,
    mesh: Arc<GammaMesh>,
    tables: Vec<CoefficientTable>,
    alpha: Option<AlphaValidation>,
    options: OeOptions,
}

impl OeSolver {
    /// Build the mesh and march both cases.
    pub fn new(params: ProblemParams, options: &OeOptions) -> Result<Self> {
        Self::for_cases(params, options, &Case::BOTH)
    }

    pub fn for_cases(params: ProblemParams, options: &OeOptions, cases: &[Case]) -> Result<Self> {
        let mut spec = options.mesh;
        let alpha = if options.validate_alpha && cases.contains(&Case::Antisym) {
            let v = validate_alpha_sign(&params, &spec, &options.march)?;
            spec.alpha_sign = v.sign;
            Some(v)
        } else {
            None
        };
        let mesh = Arc::new(build_gamma_with(&params, &spec)?);
        log::info!("gamma: {} nodes, T = {:e}", mesh.len(), mesh.height());
        let tables = cases
            .iter()
            .map(|&c| march_with(mesh.clone(), c, &options.march))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { params, mesh, tables, alpha, options: *options })
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn mesh(&self) -> &GammaMesh {
        &self.mesh
    }

    pub fn alpha_validation(&self) -> Option<&AlphaValidation> {
        self.alpha.as_ref()
    }

    pub fn table(&self, case: Case) -> Result<&CoefficientTable> {
        self.tables
            .iter()
            .find(|t| t.case() == case)
            .ok_or_else(|| Error::Config(format!("case {} was not solved", case.name())))
    }

    /// RH solution `U^` (antisymmetric) or `V` (symmetric) at `k`.
    pub fn solve_at(&self, case: Case, k: Cx) -> Result<Mat2> {
        solve_at(k, self.table(case)?, &self.options.step)
    }

    /// `(U~0^1, U~0^2)` at a real-segment `k`.
    pub fn u0_pair(&self, case: Case, k: Cx) -> Result<[Cx; 2]> {
        let mut sol = self.solve_at(case, k)?;
        if case == Case::Antisym {
            sol = variable_change(Direction::Inverse, sol, k, &self.params)?;
        }
        u0_tilde(case, &sol, xi_principal(self.params.k0, k), &self.params, k)
    }

    /// One directivity component at observation angle `theta`.
    pub fn component(&self, case: Case, theta: f64) -> Result<Cx> {
        let k_star = self.params.k_star();
        let at_kstar = self.u0_pair(case, k_star)?;
        self.component_with(case, theta, at_kstar)
    }

    fn component_with(&self, case: Case, theta: f64, at_kstar: [Cx; 2]) -> Result<Cx> {
        let p = &self.params;
        let k = -p.k0 * theta.cos();
        let k_star = p.k_star();
        let delta_k = self.options.delta_k * p.k0.norm();
        if (k - k_star).norm() <= delta_k {
            return Err(Error::CoincidentWavenumbers { k, k_star });
        }
        let at_k = self.u0_pair(case, k)?;
        let e = embed(case, k, k_star, at_k, at_kstar, xi_principal(p.k0, k_star), p, delta_k)?;
        Ok(directivity_factor(case, theta, p) * e)
    }

    /// Directivity on `grid`; angles colliding with `k*` are dropped.
    pub fn directivity(&self, grid: &[f64], selection: CaseSelection) -> Result<DirectivityTable> {
        check_grid(grid)?;
        let mut table = DirectivityTable::new(Method::Oe, self.params, grid.to_vec());
        let p = &self.params;
        let delta_k = self.options.delta_k * p.k0.norm();
        let collide: Vec<usize> = grid
            .iter()
            .enumerate()
            .filter(|(_, &t)| (-p.k0 * t.cos() - p.k_star()).norm() <= delta_k)
            .map(|(i, _)| i)
            .collect();
        for &case in selection.cases() {
            let at_kstar = self.u0_pair(case, p.k_star())?;
            let values = grid
                .par_iter()
                .enumerate()
                .map(|(i, &t)| {
                    if collide.contains(&i) {
                        Ok(Cx::new(f64::NAN, f64::NAN))
                    } else {
                        self.component_with(case, t, at_kstar)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            table.set_component(case, values)?;
        }
        table.drop_indices(&collide);
        Ok(table)
    }
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || !grid.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::Config("theta grid must be non-empty and strictly increasing".into()));
    }
    if !(grid[0] > 0.0 && *grid.last().unwrap() < PI) {
        return Err(Error::Config("theta grid must lie inside (0, pi)".into()));
    }
    Ok(())
}
