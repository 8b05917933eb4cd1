//! Ordered exponentials `OE_h[K dtau]`: the solution at the end of `h` of
//! `X' = K(tau) X` with `X = I` at the start of `h`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::contours::GammaMesh;
use crate::error::{Error, Result};
use crate::linalg::{Cx, Mat2, I};
use crate::march::CoefficientTable;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepPolicy {
    /// RK4 steps per contour edge away from poles.
    pub substeps: usize,
    /// Steps are capped at this fraction of the distance to the nearest pole.
    pub pole_fraction: f64,
    /// Contours closer than this to a pole are rejected.
    pub pole_guard: f64,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self { substeps: 4, pole_fraction: 0.2, pole_guard: 1e-9 }
    }
}

/// A polyline with a tag per edge (the mesh segment whose coefficient model
/// applies on it).
#[derive(Clone, Debug, PartialEq)]
pub struct Contour {
    pub points: Vec<Cx>,
    pub tags: Vec<usize>,
}

impl Contour {
    pub fn new(points: Vec<Cx>, tags: Vec<usize>) -> Result<Self> {
        if points.is_empty() || tags.len() + 1 != points.len() {
            return Err(Error::Config(format!(
                "contour with {} points needs {} tags, got {}",
                points.len(),
                points.len().saturating_sub(1),
                tags.len()
            )));
        }
        Ok(Self { points, tags })
    }

    /// Untagged polyline.
    pub fn polyline(points: Vec<Cx>) -> Self {
        let tags = vec![0; points.len().saturating_sub(1)];
        Self { points, tags }
    }

    /// `gamma` from `b_1` to `b_N`, tagged by segment.
    pub fn from_mesh(mesh: &GammaMesh) -> Self {
        let points = mesh.nodes().to_vec();
        let tags = (0..points.len() - 1).collect();
        Self { points, tags }
    }

    pub fn start(&self) -> Cx {
        self.points[0]
    }

    pub fn end(&self) -> Cx {
        *self.points.last().unwrap()
    }

    /// The same path traversed backwards.
    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        let mut tags = self.tags.clone();
        tags.reverse();
        Self { points, tags }
    }

    /// `self` followed by `next`; `next` must start where `self` ends.
    pub fn then(&self, next: &Contour) -> Result<Self> {
        if self.end() != next.start() {
            return Err(Error::Config("contours do not join".into()));
        }
        let mut points = self.points.clone();
        points.extend_from_slice(&next.points[1..]);
        let mut tags = self.tags.clone();
        tags.extend_from_slice(&next.tags);
        Ok(Self { points, tags })
    }

    /// Split at vertex `i` into `[0..=i]` and `[i..]`.
    pub fn split_at(&self, i: usize) -> (Contour, Contour) {
        let a = Contour { points: self.points[..=i].to_vec(), tags: self.tags[..i].to_vec() };
        let b = Contour { points: self.points[i..].to_vec(), tags: self.tags[i..].to_vec() };
        (a, b)
    }
}

fn distance_to_segment(p: Cx, q: Cx, z: Cx) -> f64 {
    let d = q - p;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (z - p).norm();
    }
    let t = (((z - p) * d.conj()).re / len2).clamp(0.0, 1.0);
    (p + d * t - z).norm()
}

/// Integrate `X' = K(tau, tag) X` along `contour` with classical RK4.
pub fn oe_evaluate<F>(contour: &Contour, mut kernel: F, poles: &[Cx], policy: &StepPolicy) -> Result<Mat2>
where
    F: FnMut(Cx, usize) -> Result<Mat2>,
{
    let mut x = Mat2::identity();
    for (e, w) in contour.points.windows(2).enumerate() {
        let (from, to) = (w[0], w[1]);
        let tag = contour.tags[e];
        let len = (to - from).norm();
        if len == 0.0 {
            continue;
        }
        for &pole in poles {
            let d = distance_to_segment(from, to, pole);
            if d < policy.pole_guard {
                return Err(Error::PoleTooClose { pole, distance: d });
            }
        }
        let dir = (to - from) / len;
        let h_max = len / policy.substeps.max(1) as f64;
        let mut s = 0.0;
        while len - s > 1e-13 * len {
            let z = from + dir * s;
            let pole_dist = poles.iter().map(|&p| (z - p).norm()).fold(f64::INFINITY, f64::min);
            let step = (len - s).min(h_max).min(policy.pole_fraction * pole_dist);
            if step <= 1e-14 * (len + z.norm()) {
                return Err(Error::StepUnderflow { at: z });
            }
            let last = step >= (len - s) * (1.0 - 1e-12);
            let z_end = if last { to } else { z + dir * step };
            let h = z_end - z;
            let zm = z + h * 0.5;
            let k1 = kernel(z, tag)? * x;
            let k2 = kernel(zm, tag)? * (x + k1 * (h * 0.5));
            let k3 = kernel(zm, tag)? * (x + k2 * (h * 0.5));
            let k4 = kernel(z_end, tag)? * (x + k3 * h);
            x = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            s = if last { len } else { s + step };
        }
        if !x.is_finite() {
            return Err(Error::SolveFailed(format!("ordered exponential diverged near {to}")));
        }
    }
    Ok(x)
}

/// `Pi(k) = diag(e^{-iak}, e^{iak})`.
pub fn pi_matrix(k: Cx, a: f64) -> Mat2 {
    Mat2::diag((-I * a * k).exp(), (I * a * k).exp())
}

/// Poles of the ODE1 coefficient in `b` for fixed `k`.
pub fn poles_for(table: &CoefficientTable, k: Cx) -> [Cx; 2] {
    let k0 = table.params().k0;
    [k - k0, -k - k0]
}

/// Ordered exponential of the ODE1 coefficient of `table` along `contour`.
pub fn oe_of_table(table: &CoefficientTable, contour: &Contour, k: Cx, policy: &StepPolicy) -> Result<Mat2> {
    oe_evaluate(contour, |b, seg| table.kernel_at(seg, b, k), &poles_for(table, k), policy)
}

/// RH solution at `k`: `OE_gamma[R db] Pi(k)` with `gamma` from `b_1` to `0`.
pub fn solve_at(k: Cx, table: &CoefficientTable, policy: &StepPolicy) -> Result<Mat2> {
    let x = oe_of_table(table, &Contour::from_mesh(table.mesh()), k, policy)?;
    Ok(x * pi_matrix(k, table.params().a))
}

/// Solution of the RH problem with parameter `i beta` on the straight top
/// part of `gamma`: the ODE is integrated from `b_1` down to `i beta` only.
pub fn solve_at_parameter(k: Cx, table: &CoefficientTable, beta: f64, policy: &StepPolicy) -> Result<Mat2> {
    let nodes = table.mesh().nodes();
    let stop = Cx::new(0.0, beta);
    let mut points = vec![nodes[0]];
    let mut tags = Vec::new();
    for (j, w) in nodes.windows(2).enumerate() {
        if w[0].re != 0.0 || w[1].re != 0.0 {
            return Err(Error::Config("parameter height below the detour".into()));
        }
        if w[1].im > beta {
            points.push(w[1]);
            tags.push(j);
        } else {
            points.push(stop);
            tags.push(j);
            break;
        }
    }
    let x = oe_of_table(table, &Contour::new(points, tags)?, k, policy)?;
    Ok(x * pi_matrix(k, table.params().a))
}

/// Nearest mesh segment to `b` and the distance to it.
pub fn locate_on_mesh(mesh: &GammaMesh, b: Cx) -> Result<(usize, f64)> {
    let nodes = mesh.nodes();
    let mut best = (0, f64::INFINITY);
    for (j, w) in nodes.windows(2).enumerate() {
        let d = distance_to_segment(w[0], w[1], b);
        if d < best.1 {
            best = (j, d);
        }
    }
    Ok(best)
}

/// Which side of the evaluation point a shore contour passes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shore {
    /// Right of the direction of travel (`Re b < 0` on the straight mesh).
    Plus,
    Minus,
}

/// `gamma` with a semicircular detour of radius `eps` around `b*`.
pub fn shore_contour(mesh: &GammaMesh, b_star: Cx, eps: f64, side: Shore, arc_nodes: usize) -> Result<Contour> {
    let nodes = mesh.nodes();
    let (seg, dist) = locate_on_mesh(mesh, b_star)?;
    if dist > 1e-9 * (1.0 + b_star.norm()) {
        return Err(Error::Config(format!("b* = {b_star} is not on gamma")));
    }
    let mut arclen = vec![0.0; nodes.len()];
    for j in 1..nodes.len() {
        arclen[j] = arclen[j - 1] + (nodes[j] - nodes[j - 1]).norm();
    }
    let s_star = arclen[seg] + (b_star - nodes[seg]).norm();
    let total = *arclen.last().unwrap();
    if !(eps > 0.0 && s_star - eps > 0.0 && s_star + eps < total) {
        return Err(Error::Config(format!("detour radius {eps} does not fit around b* = {b_star}")));
    }
    let point_at = |s: f64| -> (Cx, usize) {
        let j = match arclen.iter().position(|&l| l > s) {
            Some(p) => p - 1,
            None => nodes.len() - 2,
        };
        let t = (s - arclen[j]) / (arclen[j + 1] - arclen[j]);
        (nodes[j] + (nodes[j + 1] - nodes[j]) * t, j)
    };
    let (p_in, seg_in) = point_at(s_star - eps);
    let (p_out, seg_out) = point_at(s_star + eps);

    let mut points = Vec::new();
    let mut tags = Vec::new();
    for j in 0..=seg_in {
        points.push(nodes[j]);
        if j < seg_in {
            tags.push(j);
        }
    }
    if p_in != nodes[seg_in] {
        points.push(p_in);
        tags.push(seg_in);
    }
    let (r_in, r_out) = ((p_in - b_star).norm(), (p_out - b_star).norm());
    let a_in = (p_in - b_star).arg();
    let mut sweep = (p_out - b_star).arg() - a_in;
    match side {
        Shore::Plus => {
            while sweep <= 0.0 {
                sweep += 2.0 * PI;
            }
        }
        Shore::Minus => {
            while sweep >= 0.0 {
                sweep -= 2.0 * PI;
            }
        }
    }
    let n_arc = arc_nodes.max(2);
    for i in 1..n_arc {
        let t = i as f64 / n_arc as f64;
        points.push(b_star + Cx::from_polar(r_in + (r_out - r_in) * t, a_in + sweep * t));
        tags.push(seg);
    }
    points.push(p_out);
    tags.push(seg);
    for (j, &node) in nodes.iter().enumerate().skip(seg_out + 1) {
        points.push(node);
        tags.push(j - 1);
    }
    Contour::new(points, tags)
}

/// Shore values `(U_R, U_L)` at `k` on `G'_2`, both integrated downwards:
/// `U_R` passes `b* = k - k0` on the right, `U_L` on the left, so that
/// `U_R = U_L M` with `M` the connection matrix.
pub fn shore_values(k: Cx, table: &CoefficientTable, eps: f64, policy: &StepPolicy) -> Result<(Mat2, Mat2)> {
    let b_star = k - table.params().k0;
    let pi = pi_matrix(k, table.params().a);
    let plus = shore_contour(table.mesh(), b_star, eps, Shore::Plus, 8)?;
    let minus = shore_contour(table.mesh(), b_star, eps, Shore::Minus, 8)?;
    let u_r = oe_of_table(table, &plus, k, policy)? * pi;
    let u_l = oe_of_table(table, &minus, k, policy)? * pi;
    Ok((u_r, u_l))
}

/// `|| OE_{h1 h2} - OE_{h2} OE_{h1} ||_inf`.
pub fn concat_property_check<F>(h1: &Contour, h2: &Contour, kernel: F, poles: &[Cx], policy: &StepPolicy) -> Result<f64>
where
    F: Fn(Cx, usize) -> Result<Mat2>,
{
    let whole = h1.then(h2)?;
    let x = oe_evaluate(&whole, &kernel, poles, policy)?;
    let x1 = oe_evaluate(h1, &kernel, poles, policy)?;
    let x2 = oe_evaluate(h2, &kernel, poles, policy)?;
    Ok((x - x2 * x1).norm_inf())
}
