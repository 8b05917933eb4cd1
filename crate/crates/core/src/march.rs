//! Riccati marching for the OE-equation.
//!
//! The residue of the ODE1 coefficient at node `b_j` is parametrised as
//! `r = P diag(xi1, 0) P^-1` with `P = [[1, p2], [p1, 1]]`. For each `j` a
//! pair of Riccati equations is integrated from `b_1` (RK4 up to `b_{j-1}`,
//! one Euler step to `b_j`), and the value reached becomes `p(b_j)`.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::contours::{build_gamma_with, GammaMesh, MeshSpec, ProblemParams};
use crate::error::{Error, Result};
use crate::kernel::{self, alpha_for_case};
use crate::linalg::{cx, Cx, Mat2, I, ZERO};
use crate::ode1::{self, StepPolicy};
use crate::Case;

/// `(p1, p2, xi1)` at one point of `gamma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeCoeffs {
    pub p1: Cx,
    pub p2: Cx,
    pub xi1: Cx,
}

impl NodeCoeffs {
    fn lerp(a: &NodeCoeffs, b: &NodeCoeffs, t: Cx) -> NodeCoeffs {
        NodeCoeffs {
            p1: a.p1 + (b.p1 - a.p1) * t,
            p2: a.p2 + (b.p2 - a.p2) * t,
            xi1: a.xi1 + (b.xi1 - a.xi1) * t,
        }
    }

    pub fn degeneracy(&self) -> f64 {
        (self.p1 * self.p2 - 1.0).norm()
    }

    /// `P diag(xi1, 0) P^-1`.
    pub fn residue(&self) -> Mat2 {
        let s = self.xi1 / (1.0 - self.p1 * self.p2);
        Mat2::new(s, -s * self.p2, s * self.p1, -s * self.p1 * self.p2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarchOptions {
    /// RK4 steps per mesh segment in the inner solves.
    pub substeps: usize,
    /// Chart switch threshold for `q <-> 1/q`.
    pub chart_threshold: f64,
    /// Smallest admissible `|p1 p2 - 1|`.
    pub eps_deg: f64,
}

impl Default for MarchOptions {
    fn default() -> Self {
        Self { substeps: 1, chart_threshold: 10.0, eps_deg: 1e-10 }
    }
}

/// Value of `(q1, q2)` with a chart per component: `value` is `q` or `1/q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiccatiState {
    pub value: [Cx; 2],
    pub inverted: [bool; 2],
}

impl RiccatiState {
    pub fn new(q: [Cx; 2], threshold: f64) -> Self {
        let mut s = Self { value: q, inverted: [false; 2] };
        s.normalise(threshold);
        s
    }

    /// Move any component above the threshold to the other chart.
    pub fn normalise(&mut self, threshold: f64) {
        for c in 0..2 {
            if self.value[c].norm() > threshold {
                self.value[c] = self.value[c].inv();
                self.inverted[c] = !self.inverted[c];
            }
        }
    }

    pub fn q(&self) -> [Cx; 2] {
        let mut out = self.value;
        for c in 0..2 {
            if self.inverted[c] {
                out[c] = self.value[c].inv();
            }
        }
        out
    }

    fn is_finite(&self) -> bool {
        self.value.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn axpy(&self, h: Cx, d: &[Cx; 2]) -> Self {
        Self { value: [self.value[0] + h * d[0], self.value[1] + h * d[1]], inverted: self.inverted }
    }
}

/// Quadratic coefficients `(c0, c1, c2)` of `q' = c0 + c1 q + c2 q^2` for
/// both components.
fn riccati_coefficients(beta: Cx, c: &NodeCoeffs, k: Cx, k0: Cx, eps_deg: f64) -> Result<[[Cx; 3]; 2]> {
    let det = c.p1 * c.p2 - 1.0;
    if det.norm() <= eps_deg {
        return Err(Error::DegenerateP { node: usize::MAX, value: det.norm() });
    }
    let u = (k - k0 - beta).inv();
    let v = (k + k0 + beta).inv();
    let quad = |amp: Cx, pa: Cx, pb: Cx| {
        [amp * (pa * u + pb * v), -amp * (1.0 + pa * pb) * (u + v), amp * (pb * u + pa * v)]
    };
    Ok([quad(-c.xi1 / det, c.p1, c.p2), quad(c.xi1 / det, c.p2, c.p1)])
}

/// Derivative of the Riccati state in its active charts.
///
/// Direct chart:
/// `q1' = xi1/(1 - p1 p2) [(p1-q1)(1-p2 q1)/(k-k0-beta) + (p2-q1)(1-p1 q1)/(k+k0+beta)]`,
/// `q2'` the same with `p1 <-> p2` and the opposite sign.
/// For `w = 1/q` the derivative is `-(c2 + c1 w + c0 w^2)`.
pub fn riccati_rhs(beta: Cx, state: &RiccatiState, c: &NodeCoeffs, k: Cx, k0: Cx, eps_deg: f64) -> Result<[Cx; 2]> {
    let coef = riccati_coefficients(beta, c, k, k0, eps_deg)?;
    let mut out = [ZERO; 2];
    for comp in 0..2 {
        let [c0, c1, c2] = coef[comp];
        let x = state.value[comp];
        out[comp] = if state.inverted[comp] {
            -(c2 + c1 * x + c0 * x * x)
        } else {
            c0 + c1 * x + c2 * x * x
        };
    }
    Ok(out)
}

/// Solution of the OE-equation on a mesh.
#[derive(Clone, Debug)]
pub struct CoefficientTable {
    case: Case,
    mesh: Arc<GammaMesh>,
    p1: Vec<Cx>,
    p2: Vec<Cx>,
    start: Vec<[Cx; 2]>,
    reached: Vec<[Cx; 2]>,
}

impl CoefficientTable {
    pub fn case(&self) -> Case {
        self.case
    }

    pub fn mesh(&self) -> &GammaMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> Arc<GammaMesh> {
        self.mesh.clone()
    }

    pub fn params(&self) -> &ProblemParams {
        self.mesh.params()
    }

    pub fn p1(&self) -> &[Cx] {
        &self.p1
    }

    pub fn p2(&self) -> &[Cx] {
        &self.p2
    }

    /// Initial value `(q1, q2)` of the inner solve that produced node `j`.
    pub fn start_values(&self) -> &[[Cx; 2]] {
        &self.start
    }

    /// Value of `(q1, q2)` reached at `b_j` by that inner solve.
    pub fn reached_values(&self) -> &[[Cx; 2]] {
        &self.reached
    }

    pub fn node(&self, j: usize) -> NodeCoeffs {
        NodeCoeffs { p1: self.p1[j], p2: self.p2[j], xi1: self.mesh.eig()[j].xi1 }
    }

    /// Complex-linear model of segment `seg` evaluated at `b` (which need
    /// not lie on the segment).
    pub fn coeffs_at(&self, seg: usize, b: Cx) -> NodeCoeffs {
        let nodes = self.mesh.nodes();
        let seg = seg.min(nodes.len() - 2);
        let t = (b - nodes[seg]) / (nodes[seg + 1] - nodes[seg]);
        NodeCoeffs::lerp(&self.node(seg), &self.node(seg + 1), t)
    }

    /// ODE1 coefficient `r(b)/(k - (k0+b)) - r*(b)/(k + (k0+b))` with `r`
    /// rebuilt from the interpolated eigen-parameters.
    pub fn kernel_at(&self, seg: usize, b: Cx, k: Cx) -> Result<Mat2> {
        let c = self.coeffs_at(seg, b);
        let r = c.residue();
        let k0 = self.params().k0;
        Ok(r * (k - k0 - b).inv() - r.star() * (k + k0 + b).inv())
    }

    /// Debug dump: `j, Re b, Im b, Re p1, Im p1, Re p2, Im p2`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("j,re_b,im_b,re_p1,im_p1,re_p2,im_p2\n");
        for (j, b) in self.mesh.nodes().iter().enumerate() {
            let _ = writeln!(
                s,
                "{j},{},{},{},{},{},{}",
                b.re, b.im, self.p1[j].re, self.p1[j].im, self.p2[j].re, self.p2[j].im
            );
        }
        s
    }
}

/// `r(b_j) = P diag(xi1, 0) P^-1`.
pub fn r_of_b(table: &CoefficientTable, j: usize) -> Result<Mat2> {
    let c = table.node(j);
    if c.degeneracy() <= MarchOptions::default().eps_deg {
        return Err(Error::DegenerateP { node: j, value: c.degeneracy() });
    }
    Ok(c.residue())
}

pub fn march(mesh: &GammaMesh, case: Case) -> Result<CoefficientTable> {
    march_with(Arc::new(mesh.clone()), case, &MarchOptions::default())
}

pub fn march_with(mesh: Arc<GammaMesh>, case: Case, opts: &MarchOptions) -> Result<CoefficientTable> {
    if opts.substeps == 0 {
        return Err(Error::Config("march needs at least one substep".into()));
    }
    let params = *mesh.params();
    let k0 = params.k0;
    let nodes = mesh.nodes();
    let n = nodes.len();
    let eig = mesh.eig();
    let mut p1 = vec![ZERO; n];
    let mut p2 = vec![ZERO; n];
    let mut start = vec![[ZERO; 2]; n];
    let mut reached = vec![[ZERO; 2]; n];
    let node_at = |p1: &[Cx], p2: &[Cx], i: usize| NodeCoeffs { p1: p1[i], p2: p2[i], xi1: eig[i].xi1 };
    let tag = |e: Error, j: usize| match e {
        Error::DegenerateP { value, .. } => Error::DegenerateP { node: j, value },
        other => other,
    };

    for j in 1..n {
        let k = k0 + nodes[j];
        let alpha = match case {
            Case::Antisym => eig[j].alpha,
            Case::Sym => alpha_for_case(case, k, &params, mesh.alpha_sign()),
        };
        let q0 = [alpha * (2.0 * I * params.a * k).exp(), ZERO];
        start[j] = q0;
        let mut state = RiccatiState::new(q0, opts.chart_threshold);
        for i in 0..j - 1 {
            let (ca, cb) = (node_at(&p1, &p2, i), node_at(&p1, &p2, i + 1));
            let h = (nodes[i + 1] - nodes[i]) / opts.substeps as f64;
            for s in 0..opts.substeps {
                let t0 = s as f64 / opts.substeps as f64;
                let t1 = (s + 1) as f64 / opts.substeps as f64;
                let th = 0.5 * (t0 + t1);
                let c0 = NodeCoeffs::lerp(&ca, &cb, cx(t0, 0.0));
                let chf = NodeCoeffs::lerp(&ca, &cb, cx(th, 0.0));
                let c1 = if s + 1 == opts.substeps { cb } else { NodeCoeffs::lerp(&ca, &cb, cx(t1, 0.0)) };
                let beta = nodes[i] + (nodes[i + 1] - nodes[i]) * t0;
                let f = |b: Cx, st: &RiccatiState, c: &NodeCoeffs| {
                    riccati_rhs(b, st, c, k, k0, opts.eps_deg).map_err(|e| tag(e, i))
                };
                let k1 = f(beta, &state, &c0)?;
                let k2 = f(beta + h * 0.5, &state.axpy(h * 0.5, &k1), &chf)?;
                let k3 = f(beta + h * 0.5, &state.axpy(h * 0.5, &k2), &chf)?;
                let k4 = f(beta + h, &state.axpy(h, &k3), &c1)?;
                for c in 0..2 {
                    state.value[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
                }
                if !state.is_finite() {
                    return Err(Error::ChartOverflow { node: j });
                }
                state.normalise(opts.chart_threshold);
            }
        }
        let h = nodes[j] - nodes[j - 1];
        let d = riccati_rhs(nodes[j - 1], &state, &node_at(&p1, &p2, j - 1), k, k0, opts.eps_deg)
            .map_err(|e| tag(e, j - 1))?;
        state = state.axpy(h, &d);
        let q = state.q();
        if !q.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::ChartOverflow { node: j });
        }
        reached[j] = q;
        p1[j] = q[0];
        p2[j] = q[1];
        let deg = (p1[j] * p2[j] - 1.0).norm();
        if deg <= opts.eps_deg {
            return Err(Error::DegenerateP { node: j, value: deg });
        }
    }
    Ok(CoefficientTable { case, mesh, p1, p2, start, reached })
}

/// Default shore detour radius at `b*`: `0.05 min(|k0|, |b*|)`.
pub fn default_shore_radius(params: &ProblemParams, b_star: Cx) -> f64 {
    0.05 * params.k0.norm().min(b_star.norm())
}

/// `|| Pi^-1 OE_{loop} Pi - M ||_inf` at `k = k0 + b*` on the cut, where
/// `M` is the `G'_2` connection matrix of the table's case.
pub fn oe_residual(table: &CoefficientTable, k: Cx) -> Result<f64> {
    let b_star = k - table.params().k0;
    oe_residual_with(table, k, default_shore_radius(table.params(), b_star), &StepPolicy::default())
}

pub fn oe_residual_with(table: &CoefficientTable, k: Cx, eps: f64, policy: &StepPolicy) -> Result<f64> {
    let params = table.params();
    let (u_r, u_l) = ode1::shore_values(k, table, eps, policy)?;
    let lhs = u_l.inverse()? * u_r;
    let seg = ode1::locate_on_mesh(table.mesh(), k - params.k0)?.0;
    let xi = table.mesh().xi_near(seg, k)?;
    let m = kernel::connection_matrix(kernel::MatrixKind::on_g2(table.case()), k, xi, params)?;
    let res = (lhs - m).norm_inf();
    if res.is_finite() {
        Ok(res)
    } else {
        Err(Error::SolveFailed(format!("non-finite OE residual at k = {k}")))
    }
}

/// Median residual at `points` (values of `b*` on `gamma`).
pub fn median_residual(table: &CoefficientTable, points: &[Cx]) -> Result<f64> {
    median_residual_with(table, points, 0.05, &StepPolicy::default())
}

/// As [`median_residual`] with shore radius `eps_rel * min(|k0|, |b*|)`.
pub fn median_residual_with(table: &CoefficientTable, points: &[Cx], eps_rel: f64, policy: &StepPolicy) -> Result<f64> {
    let k0 = table.params().k0;
    let mut r = points
        .iter()
        .map(|&b| oe_residual_with(table, k0 + b, eps_rel * k0.norm().min(b.norm()), policy))
        .collect::<Result<Vec<_>>>()?;
    r.sort_by(|a, b| a.total_cmp(b));
    let n = r.len();
    Ok(if n % 2 == 1 { r[n / 2] } else { 0.5 * (r[n / 2 - 1] + r[n / 2]) })
}

/// `n` points `i beta` with `beta` geometric in `[0.05, 2.5]`.
pub fn residual_sample_points(n: usize) -> Vec<Cx> {
    sample_points_in(n, 0.05, 2.5)
}

/// As [`residual_sample_points`], starting above any detour so that every
/// point lies on `mesh`.
pub fn residual_sample_points_on(mesh: &GammaMesh, n: usize) -> Vec<Cx> {
    let lo = mesh.deformation().map_or(0.05, |d| (1.5 * d.radius).max(0.05));
    sample_points_in(n, lo, 2.5f64.max(4.0 * lo))
}

fn sample_points_in(n: usize, lo: f64, hi: f64) -> Vec<Cx> {
    (0..n)
        .map(|i| {
            let t = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
            cx(0.0, lo * (hi / lo).powf(t))
        })
        .collect()
}

/// Outcome of trying both eigenvector-parameter signs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaValidation {
    pub sign: f64,
    pub residual_plus: f64,
    pub residual_minus: f64,
    pub mesh_nodes: usize,
}

/// March the antisymmetric problem on a coarse mesh with both signs and keep
/// the one with the smaller median OE residual.
pub fn validate_alpha_sign(params: &ProblemParams, spec: &MeshSpec, opts: &MarchOptions) -> Result<AlphaValidation> {
    let coarse = MeshSpec { n: 40, ..*spec };
    let mesh = build_gamma_with(params, &coarse)?;
    let points = [cx(0.0, 0.2), cx(0.0, 0.5), cx(0.0, 1.0)];
    let score = |sign: f64| -> f64 {
        let m = Arc::new(mesh.with_alpha_sign(sign));
        march_with(m, Case::Antisym, opts)
            .and_then(|t| median_residual(&t, &points))
            .ok()
            .filter(|r| r.is_finite())
            .unwrap_or(f64::INFINITY)
    };
    let (rp, rm) = (score(1.0), score(-1.0));
    if rp.is_infinite() && rm.is_infinite() {
        return Err(Error::SolveFailed("march failed for both eigenvector signs".into()));
    }
    let sign = if rm <= rp { -1.0 } else { 1.0 };
    log::info!("eigenvector sign {sign:+}: residual(+) = {rp:.3e}, residual(-) = {rm:.3e}");
    Ok(AlphaValidation { sign, residual_plus: rp, residual_minus: rm, mesh_nodes: mesh.len() })
}
