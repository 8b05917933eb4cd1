//! The contour `gamma` in the `b`-plane, its discretisation, and the branch
//! of `xi(k) = sqrt(k0^2 - k^2)` along it.
//!
//! `gamma` runs from `iT` (standing in for `i*inf`) down to `0`. When the
//! impedance has `Re eta <= 0` the zero `b' = k' - k0` of `m(b)` may sit where
//! the straight path would pass on the wrong side of it; the mesh then takes
//! a detour, chosen so that the continuous `lambda` ends at `-1/2`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{self, EigData};
use crate::linalg::{cx, Cx, I};

/// Physical parameters of the strip problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub k0: Cx,
    /// Half-width of the strip.
    pub a: f64,
    pub eta: Cx,
    /// Incidence angle in radians.
    pub theta_inc: f64,
}

impl ProblemParams {
    pub fn new(k0: Cx, a: f64, eta: Cx, theta_inc: f64) -> Result<Self> {
        let finite = [k0.re, k0.im, a, eta.re, eta.im, theta_inc]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("parameters must be finite".into()));
        }
        if k0.re <= 0.0 || k0.im < 0.0 {
            return Err(Error::Config(format!("k0 = {k0} needs Re k0 > 0 and Im k0 >= 0")));
        }
        if a <= 0.0 {
            return Err(Error::Config(format!("strip half-width a = {a} must be positive")));
        }
        if eta.im > 0.0 {
            return Err(Error::Config(format!("eta = {eta} needs Im eta <= 0")));
        }
        if eta.norm() == 0.0 {
            return Err(Error::Config("eta must be nonzero".into()));
        }
        if !(theta_inc > 0.0 && theta_inc < PI) {
            return Err(Error::Config(format!("incidence angle {theta_inc} outside (0, pi)")));
        }
        Ok(Self { k0, a, eta, theta_inc })
    }

    /// Unit half-width, `k0 = k0a * (1 + i * im_ratio)`.
    pub fn from_k0a(k0a: f64, im_ratio: f64, eta: Cx, theta_inc: f64) -> Result<Self> {
        Self::new(cx(k0a, k0a * im_ratio), 1.0, eta, theta_inc)
    }

    /// `k0 a = 8`, `eta = 1 - 0.25i`, incidence at 30 degrees.
    pub fn reference() -> Self {
        Self::from_k0a(8.0, 1e-3, cx(1.0, -0.25), PI / 6.0).expect("reference parameters are valid")
    }

    pub fn k_star(&self) -> Cx {
        self.k0 * self.theta_inc.cos()
    }

    pub fn with_eta(self, eta: Cx) -> Result<Self> {
        Self::new(self.k0, self.a, eta, self.theta_inc)
    }
}

/// `sqrt(k0^2 + eta^2)` with `Re >= 0` (ties broken towards `Im >= 0`).
pub fn kprime(k0: Cx, eta: Cx) -> Cx {
    let r = (k0 * k0 + eta * eta).sqrt();
    if r.re < 0.0 || (r.re == 0.0 && r.im < 0.0) {
        -r
    } else {
        r
    }
}

/// Principal value of `sqrt(k0^2 - k^2)`.
pub fn xi_principal(k0: Cx, k: Cx) -> Cx {
    (k0 * k0 - k * k).sqrt()
}

/// Analytic continuation of `xi(k) = sqrt(k0^2 - k^2)` from `xi(0) = k0`.
#[derive(Clone, Copy, Debug)]
pub struct BranchedSqrtTracker {
    k0: Cx,
    rho_min: f64,
}

impl BranchedSqrtTracker {
    pub fn new(k0: Cx) -> Self {
        Self { k0, rho_min: 1e-6 * k0.norm() }
    }

    pub fn with_rho_min(mut self, rho_min: f64) -> Self {
        self.rho_min = rho_min;
        self
    }

    pub fn k0(&self) -> Cx {
        self.k0
    }

    fn branch_distance(&self, z: Cx) -> f64 {
        (z - self.k0).norm().min((z + self.k0).norm())
    }

    /// Values of `xi` at each vertex of a polyline starting at `k = 0`.
    pub fn along(&self, path: &[Cx]) -> Result<Vec<Cx>> {
        match path.first() {
            None => Ok(Vec::new()),
            Some(&z0) => {
                if z0.norm() > 1e-14 * self.k0.norm() {
                    return Err(Error::Config(format!(
                        "continuation path must start at k = 0, got {z0}"
                    )));
                }
                let mut out = vec![self.k0];
                out.extend(self.continue_from(z0, self.k0, &path[1..])?);
                Ok(out)
            }
        }
    }

    /// `xi(k)` continued along the straight segment `0 -> k`.
    pub fn xi(&self, k: Cx) -> Result<Cx> {
        Ok(*self.along(&[cx(0.0, 0.0), k])?.last().unwrap())
    }

    /// Continue from a known value `xi_start` at `start` through `vertices`.
    ///
    /// Only the final vertex may coincide with a branch point, where the value
    /// is 0.
    pub fn continue_from(&self, start: Cx, xi_start: Cx, vertices: &[Cx]) -> Result<Vec<Cx>> {
        let mut out = Vec::with_capacity(vertices.len());
        let mut z = start;
        let mut xi = xi_start;
        for (idx, &target) in vertices.iter().enumerate() {
            let last = idx + 1 == vertices.len();
            let end_at_branch = last && self.branch_distance(target) <= self.rho_min;
            let d_plus = segment_distance(z, target, self.k0);
            let d_minus = segment_distance(z, target, -self.k0);
            let dist = d_plus.min(d_minus);
            if dist < self.rho_min && !end_at_branch {
                let branch_point = if d_plus <= d_minus { self.k0 } else { -self.k0 };
                return Err(Error::BranchPointTooClose { branch_point, distance: dist });
            }
            if end_at_branch {
                out.push(cx(0.0, 0.0));
                z = target;
                xi = cx(0.0, 0.0);
                continue;
            }
            let mut guard = 0usize;
            while z != target {
                let remaining = (target - z).norm();
                let step = remaining.min(0.25 * self.branch_distance(z));
                let next = if step >= remaining { target } else { z + (target - z) * (step / remaining) };
                let s = xi_principal(self.k0, next);
                xi = if (s - xi).norm() <= (-s - xi).norm() { s } else { -s };
                z = next;
                guard += 1;
                if guard > 100_000 {
                    return Err(Error::StepUnderflow { at: z });
                }
            }
            out.push(xi);
        }
        Ok(out)
    }
}

fn segment_distance(p: Cx, q: Cx, z: Cx) -> f64 {
    let d = q - p;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (z - p).norm();
    }
    let t = ((z - p) * d.conj()).re / len2;
    let t = t.clamp(0.0, 1.0);
    (p + d * t - z).norm()
}

/// Node distribution along the imaginary axis.
///
/// `TwoRate` is uniform in `s(beta) = ln(1 + beta/c) - kappa ln(1 + beta/beta_t)`:
/// logarithmic clustering near `b = 0` and a tail that coarsens with rate
/// `1 - kappa` for `beta >> beta_t`. Lengths are in units of `|k0|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshGrading {
    TwoRate { knee: f64, tail_start: f64, tail_coarsening: f64 },
    Geometric { ratio: f64 },
}

impl Default for MeshGrading {
    fn default() -> Self {
        MeshGrading::TwoRate { knee: 0.0025, tail_start: 1.25, tail_coarsening: 0.85 }
    }
}

impl MeshGrading {
    fn validate(&self) -> Result<()> {
        match *self {
            MeshGrading::TwoRate { knee, tail_start, tail_coarsening } => {
                if !(knee > 0.0 && tail_start >= knee && (0.0..1.0).contains(&tail_coarsening)) {
                    return Err(Error::Config(format!("invalid two-rate grading {self:?}")));
                }
            }
            MeshGrading::Geometric { ratio } => {
                if !(ratio > 1.0 && ratio.is_finite()) {
                    return Err(Error::Config(format!("geometric ratio {ratio} must exceed 1")));
                }
            }
        }
        Ok(())
    }

    /// `n` increasing heights from `0` to `top`, both included.
    pub fn heights(&self, n: usize, top: f64, scale: f64) -> Result<Vec<f64>> {
        self.validate()?;
        if n < 2 || !(top > 0.0) {
            return Err(Error::Config(format!("need n >= 2 and positive height, got {n}, {top}")));
        }
        let mut out = vec![0.0; n];
        match *self {
            MeshGrading::TwoRate { knee, tail_start, tail_coarsening } => {
                let c = knee * scale;
                let bt = tail_start * scale;
                let s = |beta: f64| (beta / c).ln_1p() - tail_coarsening * (beta / bt).ln_1p();
                let s_top = s(top);
                for (i, slot) in out.iter_mut().enumerate().take(n - 1).skip(1) {
                    let target = s_top * (i as f64 / (n - 1) as f64);
                    let (mut lo, mut hi) = (0.0, top);
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        if s(mid) < target {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    *slot = 0.5 * (lo + hi);
                }
            }
            MeshGrading::Geometric { ratio } => {
                let h0 = top * (ratio - 1.0) / (ratio.powi(n as i32 - 1) - 1.0);
                let mut acc = 0.0;
                let mut h = h0;
                for slot in out.iter_mut().take(n - 1).skip(1) {
                    acc += h;
                    *slot = acc;
                    h *= ratio;
                }
            }
        }
        out[n - 1] = top;
        Ok(out)
    }
}

/// Which side of `b'` the detour passes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetourSide {
    /// Radial approach at half the argument of `b'` (passes `b'` on its left).
    Right,
    /// Radial approach between `b'` and the negative real axis.
    Left,
}

/// Record of a detour inserted into `gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Deformation {
    pub side: DetourSide,
    pub b_prime: Cx,
    /// Radius at which the path leaves the imaginary axis.
    pub radius: f64,
    /// Argument of the final radial segment into `b = 0`.
    pub approach_angle: f64,
}

/// Everything needed to build a mesh.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    /// Nominal node count. Straight meshes have exactly this many; detours
    /// are bisected further wherever `lambda` moves by more than `lambda_step`.
    pub n: usize,
    /// Truncation height; chosen from `tol_start` when absent.
    pub height: Option<f64>,
    pub grading: MeshGrading,
    pub tol_start: f64,
    /// Branch point exclusion, in units of `|k0|`.
    pub rho_min: f64,
    /// Sign multiplying `-i (k0 + k)/eta` in the eigenvector parameter.
    pub alpha_sign: f64,
    /// Largest `|lambda|` increment tolerated before a segment is bisected.
    pub lambda_step: f64,
}

impl Default for MeshSpec {
    fn default() -> Self {
        Self {
            n: 200,
            height: None,
            grading: MeshGrading::default(),
            tol_start: 1e-8,
            rho_min: 1e-6,
            alpha_sign: -1.0,
            lambda_step: 0.1,
        }
    }
}

/// Discretised `gamma` with cached eigen-data.
#[derive(Clone, Debug)]
pub struct GammaMesh {
    params: ProblemParams,
    nodes: Vec<Cx>,
    xi: Vec<Cx>,
    eig: Vec<EigData>,
    height: f64,
    deformation: Option<Deformation>,
    alpha_sign: f64,
}

impl GammaMesh {
    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    /// `b_1 = iT, ..., b_N = 0`.
    pub fn nodes(&self) -> &[Cx] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `xi(k0 + b_j)` on the tracked branch.
    pub fn xi(&self) -> &[Cx] {
        &self.xi
    }

    pub fn eig(&self) -> &[EigData] {
        &self.eig
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn deformation(&self) -> Option<&Deformation> {
        self.deformation.as_ref()
    }

    pub fn alpha_sign(&self) -> f64 {
        self.alpha_sign
    }

    pub fn lambda(&self) -> Vec<Cx> {
        self.eig.iter().map(|e| e.lambda).collect()
    }

    /// Same nodes with the eigenvector parameter recomputed for another sign.
    pub fn with_alpha_sign(&self, sign: f64) -> GammaMesh {
        let mut out = self.clone();
        out.alpha_sign = sign;
        for (e, &b) in out.eig.iter_mut().zip(&self.nodes) {
            e.alpha = kernel::alpha_of_k(self.params.k0 + b, &self.params, sign);
            e.sign_alpha = sign;
        }
        out
    }

    /// Continue `xi` from node `j` to an arbitrary nearby `k`.
    pub fn xi_near(&self, j: usize, k: Cx) -> Result<Cx> {
        let j = j.min(self.len() - 2);
        let tracker = BranchedSqrtTracker::new(self.params.k0);
        let vals = tracker.continue_from(self.params.k0 + self.nodes[j], self.xi[j], &[k])?;
        Ok(vals[0])
    }

    /// Debug dump: `index, Re b, Im b, Re m, Im m, Re lambda, Im lambda`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,re_b,im_b,re_m,im_m,re_lambda,im_lambda\n");
        for (j, (b, e)) in self.nodes.iter().zip(&self.eig).enumerate() {
            let _ = writeln!(
                s,
                "{j},{},{},{},{},{},{}",
                b.re, b.im, e.m.re, e.m.im, e.lambda.re, e.lambda.im
            );
        }
        s
    }
}

/// Smallest power-of-two multiple of `|k0|` at which `m` and the start factor
/// `exp(2ia(k0 + iT))` are both within `tol_start` of their limits.
pub fn choose_height(params: &ProblemParams, tol_start: f64) -> Result<f64> {
    let tracker = BranchedSqrtTracker::new(params.k0);
    let mut t = params.k0.norm();
    for _ in 0..80 {
        if truncation_defect(params, &tracker, t)? < tol_start {
            return Ok(t);
        }
        t *= 2.0;
    }
    Err(Error::TruncationTooLow {
        height: t,
        reason: format!("no height below {t:e} meets tolerance {tol_start:e}"),
    })
}

fn truncation_defect(params: &ProblemParams, tracker: &BranchedSqrtTracker, t: f64) -> Result<f64> {
    let b = cx(0.0, t);
    let xi = tracker.xi(params.k0 + b)?;
    let m = kernel::m_of_b(b, xi, params)?;
    let decay = (2.0 * I * params.a * (params.k0 + b)).exp().norm();
    Ok((m - 1.0).norm().max(decay))
}

/// Mesh `gamma` from `iT` to `0` with `n` nodes and default options.
pub fn build_gamma(params: &ProblemParams, height: f64, n: usize, grading: MeshGrading) -> Result<GammaMesh> {
    let spec = MeshSpec { n, height: Some(height), grading, ..MeshSpec::default() };
    build_gamma_with(params, &spec)
}

pub fn build_gamma_with(params: &ProblemParams, spec: &MeshSpec) -> Result<GammaMesh> {
    if spec.n < 16 {
        return Err(Error::Config(format!("mesh needs at least 16 nodes, got {}", spec.n)));
    }
    let height = match spec.height {
        Some(t) => t,
        None => choose_height(params, spec.tol_start)?,
    };
    let tracker = BranchedSqrtTracker::new(params.k0).with_rho_min(spec.rho_min * params.k0.norm());
    let defect = truncation_defect(params, &tracker, height)?;
    if !(defect < spec.tol_start) {
        return Err(Error::TruncationTooLow {
            height,
            reason: format!("start defect {defect:e} exceeds tol_start {:e}", spec.tol_start),
        });
    }

    let scale = params.k0.norm();
    let straight: Vec<Cx> = spec
        .grading
        .heights(spec.n, height, scale)?
        .into_iter()
        .rev()
        .map(|beta| cx(0.0, beta))
        .collect();

    if params.eta.re > 0.0 {
        let exact = MeshSpec { lambda_step: f64::INFINITY, ..*spec };
        let mesh = assemble(params, &exact, &tracker, straight, height, None)?;
        check_endpoint(&mesh)?;
        return Ok(mesh);
    }

    let b_prime = kprime(params.k0, params.eta) - params.k0;
    let rho = (0.1 * b_prime.norm()).clamp(1e-3 * scale, 0.5 * scale);
    let radius = b_prime.norm() + rho;
    let mut best_end = None;
    for side in [DetourSide::Right, DetourSide::Left] {
        let angle = match side {
            DetourSide::Right => b_prime.arg() / 2.0,
            DetourSide::Left => (b_prime.arg() + PI) / 2.0,
        };
        let nodes = detour_nodes(spec, height, scale, radius, angle)?;
        let deformation = Deformation { side, b_prime, radius, approach_angle: angle };
        match assemble(params, spec, &tracker, nodes, height, Some(deformation)) {
            Ok(mesh) => {
                let end = mesh.eig.last().unwrap().lambda;
                if (end + 0.5).norm() < 1e-6 {
                    log::debug!("gamma detour {side:?} around b' = {b_prime}");
                    return Ok(mesh);
                }
                best_end = Some(end);
            }
            Err(e) => log::debug!("detour {side:?} rejected: {e}"),
        }
    }
    // b' can lie where the undeformed path is already admissible.
    if let Ok(mesh) = assemble(params, spec, &tracker, straight, height, None) {
        let end = mesh.eig.last().unwrap().lambda;
        if (end + 0.5).norm() < 1e-6 {
            return Ok(mesh);
        }
        best_end = Some(end);
    }
    Err(Error::DeformationFailed { lambda_end: best_end.unwrap_or(cx(f64::NAN, f64::NAN)) })
}

fn check_endpoint(mesh: &GammaMesh) -> Result<()> {
    let end = mesh.eig.last().unwrap().lambda;
    if (end + 0.5).norm() < 1e-6 {
        Ok(())
    } else {
        Err(Error::IndexMismatch { computed: -2.0 * PI * I * end })
    }
}

/// Down the imaginary axis to `i R`, along the arc `|b| = R` to `angle`,
/// then radially into `0`.
fn detour_nodes(spec: &MeshSpec, height: f64, scale: f64, radius: f64, angle: f64) -> Result<Vec<Cx>> {
    let mut nodes: Vec<Cx> = spec
        .grading
        .heights(spec.n, height, scale)?
        .into_iter()
        .rev()
        .filter(|&beta| beta > radius * 1.05)
        .map(|beta| cx(0.0, beta))
        .collect();
    let n_arc = (spec.n / 10).max(8);
    for i in 0..=n_arc {
        let phi = FRAC_PI_2 + (angle - FRAC_PI_2) * (i as f64 / n_arc as f64);
        nodes.push(Cx::from_polar(radius, phi));
    }
    let n_rad = (spec.n / 4).max(16);
    let dir = Cx::from_polar(1.0, angle);
    let radial = spec.grading.heights(n_rad, radius, scale)?;
    for &r in radial.iter().rev().skip(1) {
        nodes.push(dir * r);
    }
    Ok(nodes)
}

fn assemble(
    params: &ProblemParams,
    spec: &MeshSpec,
    tracker: &BranchedSqrtTracker,
    mut nodes: Vec<Cx>,
    height: f64,
    deformation: Option<Deformation>,
) -> Result<GammaMesh> {
    for _pass in 0..12 {
        let xi = track_nodes(params, tracker, &nodes)?;
        let m = nodes
            .iter()
            .zip(&xi)
            .map(|(&b, &x)| kernel::m_of_b(b, x, params))
            .collect::<Result<Vec<_>>>()?;
        let lambda = kernel::lambda_chain_unchecked(&m);
        let coarse: Vec<usize> = lambda
            .windows(2)
            .enumerate()
            .filter(|(_, w)| (w[1] - w[0]).norm() > spec.lambda_step)
            .map(|(j, _)| j)
            .collect();
        if coarse.is_empty() {
            kernel::check_lambda_chain(&lambda)?;
            let eig = nodes
                .iter()
                .zip(m.iter().zip(&lambda))
                .map(|(&b, (&m, &lam))| EigData::new(m, lam, kernel::alpha_of_k(params.k0 + b, params, spec.alpha_sign), spec.alpha_sign))
                .collect();
            return Ok(GammaMesh {
                params: *params,
                nodes,
                xi,
                eig,
                height,
                deformation,
                alpha_sign: spec.alpha_sign,
            });
        }
        let mut refined = Vec::with_capacity(nodes.len() + coarse.len());
        let mut it = coarse.iter().peekable();
        for j in 0..nodes.len() {
            refined.push(nodes[j]);
            if it.peek() == Some(&&j) {
                it.next();
                refined.push(0.5 * (nodes[j] + nodes[j + 1]));
            }
        }
        nodes = refined;
    }
    let lambda = {
        let xi = track_nodes(params, tracker, &nodes)?;
        let m = nodes
            .iter()
            .zip(&xi)
            .map(|(&b, &x)| kernel::m_of_b(b, x, params))
            .collect::<Result<Vec<_>>>()?;
        kernel::lambda_chain_unchecked(&m)
    };
    kernel::check_lambda_chain(&lambda)?;
    Err(Error::DeformationFailed { lambda_end: *lambda.last().unwrap() })
}

/// `xi(k0 + b_j)` continued from `k = 0` to `k0 + b_1`, then along the nodes.
fn track_nodes(params: &ProblemParams, tracker: &BranchedSqrtTracker, nodes: &[Cx]) -> Result<Vec<Cx>> {
    let ks: Vec<Cx> = nodes.iter().map(|&b| params.k0 + b).collect();
    let first = tracker.xi(ks[0])?;
    let mut out = vec![first];
    out.extend(tracker.continue_from(ks[0], first, &ks[1..])?);
    Ok(out)
}

/// The cut `G'_2(b_j) = gamma(b_j) + k0` as the nodes `k0 + b_1 .. k0 + b_j`,
/// and `G'_1 = -G'_2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cut(pub Vec<Cx>);

pub fn cuts_from_gamma(mesh: &GammaMesh, j: usize) -> Result<(Cut, Cut)> {
    if j >= mesh.len() {
        return Err(Error::Config(format!("node {j} outside mesh of {} nodes", mesh.len())));
    }
    let k0 = mesh.params.k0;
    let g2: Vec<Cx> = mesh.nodes[..=j].iter().map(|&b| b + k0).collect();
    let g1: Vec<Cx> = g2.iter().map(|&k| -k).collect();
    Ok((Cut(g1), Cut(g2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kprime_examples() {
        assert!(kprime(cx(1.0, 0.0), cx(0.0, -1.0)).norm() < 1e-15);
        let kp = kprime(cx(1.0, 0.0), cx(0.7, 0.0));
        assert!(kp.im.abs() < 1e-15 && kp.re > 1.0);
        // mpmath: sqrt(1 + (1-0.25j)^2) at 30 digits
        let kp = kprime(cx(1.0, 0.0), cx(1.0, -0.25));
        assert_relative_eq!(kp.re, 1.4032954650033195, epsilon = 1e-14);
        assert_relative_eq!(kp.im, -0.17815207576360879, epsilon = 1e-14);
    }

    #[test]
    fn tracker_starts_at_k0_and_vanishes_at_branch() {
        let k0 = cx(8.0, 0.008);
        let t = BranchedSqrtTracker::new(k0);
        assert_eq!(t.along(&[cx(0.0, 0.0)]).unwrap(), vec![k0]);
        let v = t.along(&[cx(0.0, 0.0), k0]).unwrap();
        assert_eq!(v[1], cx(0.0, 0.0));
    }

    #[test]
    fn tracker_matches_fine_step_oracle() {
        let k0 = cx(8.0, 0.008);
        let t = BranchedSqrtTracker::new(k0);
        for beta in [0.01, 0.3, 2.0, 50.0, 1e4] {
            let k = k0 + cx(0.0, beta);
            let v = t.xi(k).unwrap();
            // oracle: 10^5 equal steps with nearest-sign selection
            let mut xi = k0;
            let n = 100_000;
            for i in 1..=n {
                let z = k * (i as f64 / n as f64);
                let s = xi_principal(k0, z);
                xi = if (s - xi).norm() < (s + xi).norm() { s } else { -s };
            }
            assert!((v - xi).norm() < 1e-12 * xi.norm().max(1.0));
            let res = (v * v - (k0 * k0 - k * k)).norm();
            assert!(res < 1e-12 * (k0 * k0).norm().max((k * k).norm()));
        }
    }

    #[test]
    fn tracker_rejects_passing_through_branch() {
        let k0 = cx(1.0, 0.0);
        let t = BranchedSqrtTracker::new(k0);
        let err = t.along(&[cx(0.0, 0.0), cx(2.0, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::BranchPointTooClose { .. }));
    }

    #[test]
    fn heights_span_and_increase() {
        for g in [MeshGrading::default(), MeshGrading::Geometric { ratio: 1.15 }] {
            let h = g.heights(40, 1e8, 8.0).unwrap();
            assert_eq!(h[0], 0.0);
            assert_eq!(h[39], 1e8);
            assert!(h.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn straight_mesh_for_positive_real_eta() {
        let p = ProblemParams::reference();
        let mesh = build_gamma_with(&p, &MeshSpec { n: 64, ..MeshSpec::default() }).unwrap();
        assert!(mesh.deformation().is_none());
        assert_eq!(*mesh.nodes().last().unwrap(), cx(0.0, 0.0));
        assert!(mesh.nodes().iter().all(|b| b.re == 0.0));
        assert!(mesh.nodes().windows(2).all(|w| w[0].im > w[1].im));
        assert_eq!(mesh.nodes()[0], cx(0.0, mesh.height()));
    }

    #[test]
    fn straight_meshes_nest_under_doubling() {
        let p = ProblemParams::reference();
        let t = choose_height(&p, 1e-8).unwrap();
        let coarse = build_gamma(&p, t, 16, MeshGrading::default()).unwrap();
        let fine = build_gamma(&p, t, 31, MeshGrading::default()).unwrap();
        for (j, b) in coarse.nodes().iter().enumerate() {
            assert_eq!(*b, fine.nodes()[2 * j]);
        }
    }

    #[test]
    fn straight_mesh_branch_is_principal() {
        let p = ProblemParams::reference();
        let mesh = build_gamma_with(&p, &MeshSpec { n: 50, ..MeshSpec::default() }).unwrap();
        for (b, x) in mesh.nodes().iter().zip(mesh.xi()) {
            let pr = xi_principal(p.k0, p.k0 + b);
            assert!((pr - x).norm() <= 1e-12 * pr.norm().max(1e-300));
        }
    }

    #[test]
    fn deformed_mesh_for_negative_real_eta() {
        let p = ProblemParams::reference().with_eta(cx(-1.0, -0.25)).unwrap();
        let mesh = build_gamma_with(&p, &MeshSpec { n: 100, ..MeshSpec::default() }).unwrap();
        assert!(mesh.deformation().is_some());
        let lam = mesh.lambda();
        assert!((lam.last().unwrap() + 0.5).norm() < 1e-6);
        assert!(lam.windows(2).all(|w| (w[1] - w[0]).norm() < 0.25));
        assert_eq!(*mesh.nodes().last().unwrap(), cx(0.0, 0.0));
    }

    #[test]
    fn height_is_too_low_when_forced() {
        let p = ProblemParams::reference();
        let err = build_gamma(&p, 10.0, 32, MeshGrading::default()).unwrap_err();
        assert!(matches!(err, Error::TruncationTooLow { .. }));
    }

    #[test]
    fn cuts_are_negatives() {
        let p = ProblemParams::reference();
        let mesh = build_gamma_with(&p, &MeshSpec { n: 20, ..MeshSpec::default() }).unwrap();
        let last = mesh.len() - 1;
        let (g1, g2) = cuts_from_gamma(&mesh, last).unwrap();
        assert_eq!(*g2.0.last().unwrap(), p.k0);
        assert_eq!(*g1.0.last().unwrap(), -p.k0);
        for (a, b) in g1.0.iter().zip(&g2.0) {
            assert_eq!(*a, -*b);
        }
        let (g1, g2) = cuts_from_gamma(&mesh, 0).unwrap();
        assert_eq!(g1.0.len(), 1);
        assert_eq!(g2.0.len(), 1);
    }
}
