//! Connection matrices of the two RH problems and their eigen-data.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::contours::{GammaMesh, ProblemParams};
use crate::error::{Error, Result};
use crate::linalg::{cx, Cx, Mat2, I, ONE, ZERO};
use crate::Case;

/// Largest tolerated jump of `lambda` between neighbouring nodes.
pub const LAMBDA_JUMP_MAX: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixKind {
    M1,
    M2,
    Mtilde1,
    Mtilde2,
    N1,
    N2,
}

impl MatrixKind {
    /// Kind used on `G'_2` by the OE pipeline for each case.
    pub fn on_g2(case: Case) -> Self {
        match case {
            Case::Antisym => MatrixKind::Mtilde2,
            Case::Sym => MatrixKind::N2,
        }
    }
}

fn nonzero(d: Cx, scale: f64, k: Cx) -> Result<Cx> {
    if d.norm() <= 1e-14 * scale.max(f64::MIN_POSITIVE) || !d.re.is_finite() || !d.im.is_finite() {
        Err(Error::DenominatorVanishes { k })
    } else {
        Ok(d)
    }
}

/// Connection matrix of the given kind at `k`, with `xi = xi(k)` on the
/// caller's branch.
pub fn connection_matrix(kind: MatrixKind, k: Cx, xi: Cx, params: &ProblemParams) -> Result<Mat2> {
    let eta = params.eta;
    let k0 = params.k0;
    let scale = xi.norm() + eta.norm();
    let ix = I * xi;
    let m = match kind {
        MatrixKind::M1 => {
            let d = nonzero(eta - ix, scale, k)?;
            Mat2::new(ONE, 2.0 * ix / d, ZERO, (eta + ix) / d)
        }
        MatrixKind::M2 => {
            let d = nonzero(eta - ix, scale, k)?;
            Mat2::new((eta + ix) / d, ZERO, 2.0 * ix / d, ONE)
        }
        MatrixKind::Mtilde1 => {
            let d = nonzero(ix - eta, scale, k)?;
            Mat2::new(ONE, 2.0 * I * (k0 - k) / d, ZERO, (ix + eta) / d)
        }
        MatrixKind::Mtilde2 => {
            let d = nonzero(ix - eta, scale, k)?;
            Mat2::new((ix + eta) / d, ZERO, 2.0 * I * (k0 + k) / d, ONE)
        }
        MatrixKind::N1 => {
            let d = nonzero(eta - ix, scale, k)?;
            Mat2::new(ONE, -2.0 * eta / d, ZERO, -(eta + ix) / d)
        }
        MatrixKind::N2 => {
            let d = nonzero(eta - ix, scale, k)?;
            Mat2::new(-(eta + ix) / d, ZERO, -2.0 * eta / d, ONE)
        }
    };
    Ok(m)
}

/// Nontrivial eigenvalue `m(b) = (i xi + eta)/(i xi - eta)` of the `G'_2`
/// connection matrix at `k = k0 + b`; `xi = xi(k0 + b)`.
pub fn m_of_b(b: Cx, xi: Cx, params: &ProblemParams) -> Result<Cx> {
    let ix = I * xi;
    let d = nonzero(ix - params.eta, xi.norm() + params.eta.norm(), params.k0 + b)?;
    Ok((ix + params.eta) / d)
}

/// Eigen-data of the connection matrix at one node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigData {
    pub m: Cx,
    pub lambda: Cx,
    /// Nonzero eigenvalue of the ODE coefficient residue, `-lambda`.
    pub xi1: Cx,
    /// Lower-left entry of the eigenvector frame (antisymmetric problem).
    pub alpha: Cx,
    pub sign_alpha: f64,
}

impl EigData {
    pub fn new(m: Cx, lambda: Cx, alpha: Cx, sign_alpha: f64) -> Self {
        Self { m, lambda, xi1: -lambda, alpha, sign_alpha }
    }
}

/// Continuous `log(m)/(2 pi i)` along a node sequence starting near `i*inf`.
///
/// The first value is the principal one, which is the continuous branch
/// provided `m(b_1)` is close to 1.
pub fn lambda_chain(ms: &[Cx]) -> Result<Vec<Cx>> {
    let lam = lambda_chain_unchecked(ms);
    check_lambda_chain(&lam)?;
    Ok(lam)
}

pub fn lambda_chain_unchecked(ms: &[Cx]) -> Vec<Cx> {
    let two_pi_i = cx(0.0, 2.0 * PI);
    let mut out = Vec::with_capacity(ms.len());
    let mut acc = match ms.first() {
        Some(m) => m.ln() / two_pi_i,
        None => return out,
    };
    out.push(acc);
    for w in ms.windows(2) {
        acc += (w[1] / w[0]).ln() / two_pi_i;
        out.push(acc);
    }
    out
}

pub fn check_lambda_chain(lam: &[Cx]) -> Result<()> {
    for (node, w) in lam.windows(2).enumerate() {
        let jump = (w[1] - w[0]).norm();
        if !(jump < LAMBDA_JUMP_MAX) {
            return Err(Error::BranchJump { node, jump });
        }
    }
    Ok(())
}

/// `lambda(b_j)` cached on the mesh.
pub fn lambda_of_b(mesh: &GammaMesh) -> Vec<Cx> {
    mesh.lambda()
}

/// Index of the RH problem by argument tracking of `f1 = i xi + eta` and
/// `f2 = i xi - eta` from `b = 0` to `b_1`; the stretch from `b_1` to `i*inf`,
/// where `m` is within `tol_start` of 1, is closed with the principal log.
pub fn index(mesh: &GammaMesh) -> Result<Cx> {
    let p = mesh.params();
    if !(p.eta.im < 0.0 || p.eta.re > 0.0) {
        return Err(Error::Config(format!("index undefined for eta = {}", p.eta)));
    }
    let f: Vec<(Cx, Cx)> = mesh.xi().iter().rev().map(|&x| (I * x + p.eta, I * x - p.eta)).collect();
    let mut arg1 = 0.0;
    let mut arg2 = 0.0;
    for w in f.windows(2) {
        arg1 += (w[1].0 / w[0].0).arg();
        arg2 += (w[1].1 / w[0].1).arg();
    }
    let (first, last) = (f[0], f[f.len() - 1]);
    let modulus = (last.0.norm() / last.1.norm()).ln() - (first.0.norm() / first.1.norm()).ln();
    let m_top = mesh.eig()[0].m;
    let idx = cx(modulus, arg1 - arg2) - m_top.ln();
    check_index(idx)
}

/// Same quantity from the cached `lambda` chain: `2 pi i (lambda(i inf) - lambda(0))`.
pub fn index_via_lambda(mesh: &GammaMesh) -> Result<Cx> {
    let lam_end = mesh.eig().last().map(|e| e.lambda).unwrap_or(ZERO);
    check_index(-cx(0.0, 2.0 * PI) * lam_end)
}

fn check_index(idx: Cx) -> Result<Cx> {
    if (idx - cx(0.0, PI)).norm() > 1e-8 {
        Err(Error::IndexMismatch { computed: idx })
    } else {
        Ok(idx)
    }
}

/// `sign * (-i) (k0 + k) / eta`. The direct eigenvector computation of the
/// `G'_2` matrix gives `sign = -1`.
pub fn alpha_of_k(k: Cx, params: &ProblemParams, sign: f64) -> Cx {
    sign * (-I) * (params.k0 + k) / params.eta
}

/// Eigenvector parameter for the given case: `alpha_of_k` or the constant 1.
pub fn alpha_for_case(case: Case, k: Cx, params: &ProblemParams, sign: f64) -> Cx {
    match case {
        Case::Antisym => alpha_of_k(k, params, sign),
        Case::Sym => ONE,
    }
}

/// Frame `H = [[1, 0], [alpha, 1]]` with `M = H diag(m, 1) H^-1` for the
/// correct `alpha`.
pub fn eigen_frame(alpha: Cx) -> Mat2 {
    Mat2::new(ONE, ZERO, alpha, ONE)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// `U -> U diag(e^{i pi/4} (k0-k)^{-1/2}, e^{i pi/4} (k0+k)^{-1/2})` and back.
pub fn variable_change(dir: Direction, u: Mat2, k: Cx, params: &ProblemParams) -> Result<Mat2> {
    let k0 = params.k0;
    let tiny = 1e-14 * k0.norm();
    if (k - k0).norm() <= tiny || (k + k0).norm() <= tiny {
        return Err(Error::AtBranchPoint { k });
    }
    let phase = Cx::from_polar(1.0, FRAC_PI_4);
    let d1 = phase / (k0 - k).sqrt();
    let d2 = phase / (k0 + k).sqrt();
    let d = match dir {
        Direction::Forward => Mat2::diag(d1, d2),
        Direction::Inverse => Mat2::diag(d1.inv(), d2.inv()),
    };
    Ok(u * d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contours::{build_gamma_with, MeshSpec};
    use proptest::prelude::*;

    fn params() -> ProblemParams {
        ProblemParams::reference()
    }

    #[test]
    fn m2_at_origin() {
        let p = params();
        let (k0, eta) = (p.k0, p.eta);
        let m = connection_matrix(MatrixKind::M2, ZERO, k0, &p).unwrap();
        let d = eta - I * k0;
        assert_eq!(m, Mat2::new((eta + I * k0) / d, ZERO, 2.0 * I * k0 / d, ONE));
    }

    #[test]
    fn mtilde2_determinant_is_m() {
        let p = params();
        for k in [cx(8.0, 0.1), cx(8.0, 3.0), cx(9.0, 20.0)] {
            let xi = crate::contours::BranchedSqrtTracker::new(p.k0).xi(k).unwrap();
            let m = connection_matrix(MatrixKind::Mtilde2, k, xi, &p).unwrap();
            let expect = (I * xi + p.eta) / (I * xi - p.eta);
            assert!((m.determinant() - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn n2_tends_to_identity() {
        let p = params();
        let mesh = build_gamma_with(&p, &MeshSpec { n: 40, ..MeshSpec::default() }).unwrap();
        let k = p.k0 + mesh.nodes()[0];
        let n2 = connection_matrix(MatrixKind::N2, k, mesh.xi()[0], &p).unwrap();
        assert!((n2 - Mat2::identity()).norm_inf() < 1e-6);
    }

    #[test]
    fn denominator_guard() {
        let p = params();
        let xi = -I * p.eta;
        assert!(matches!(
            connection_matrix(MatrixKind::Mtilde2, ZERO, xi, &p),
            Err(Error::DenominatorVanishes { .. })
        ));
    }

    #[test]
    fn m_endpoints() {
        let p = params();
        assert_eq!(m_of_b(ZERO, ZERO, &p).unwrap(), cx(-1.0, 0.0));
        let mesh = build_gamma_with(&p, &MeshSpec { n: 40, ..MeshSpec::default() }).unwrap();
        assert!((mesh.eig()[0].m - 1.0).norm() < 1e-8);
    }

    #[test]
    fn lambda_endpoints_and_identities() {
        let p = params();
        let mesh = build_gamma_with(&p, &MeshSpec { n: 60, ..MeshSpec::default() }).unwrap();
        let e = mesh.eig();
        assert!(e[0].lambda.norm() < 1e-8);
        assert!((e.last().unwrap().lambda + 0.5).norm() < 1e-12);
        for d in e {
            assert!(((cx(0.0, 2.0 * PI) * d.lambda).exp() - d.m).norm() < 1e-12);
            assert!((d.xi1 + d.lambda).norm() < 1e-12);
        }
    }

    #[test]
    fn lambda_refinement_oracle() {
        // ten intermediate points per segment with a continuous log
        let p = params();
        let mesh = build_gamma_with(&p, &MeshSpec { n: 40, ..MeshSpec::default() }).unwrap();
        let t = crate::contours::BranchedSqrtTracker::new(p.k0);
        let mut fine = Vec::new();
        for w in mesh.nodes().windows(2) {
            for s in 0..10 {
                fine.push(w[0] + (w[1] - w[0]) * (s as f64 / 10.0));
            }
        }
        fine.push(ZERO);
        let ks: Vec<Cx> = fine.iter().map(|b| p.k0 + b).collect();
        let x0 = t.xi(ks[0]).unwrap();
        let mut xs = vec![x0];
        xs.extend(t.continue_from(ks[0], x0, &ks[1..]).unwrap());
        let ms: Vec<Cx> = fine.iter().zip(&xs).map(|(&b, &x)| m_of_b(b, x, &p).unwrap()).collect();
        let lam = lambda_chain(&ms).unwrap();
        for (j, e) in mesh.eig().iter().enumerate() {
            assert!((lam[10 * j] - e.lambda).norm() < 1e-10);
        }
    }

    #[test]
    fn index_equals_i_pi() {
        for eta in [cx(1.0, -0.25), cx(2.0, -1e-6), cx(-1.0, -0.5)] {
            let p = params().with_eta(eta).unwrap();
            let mesh = build_gamma_with(&p, &MeshSpec { n: 100, ..MeshSpec::default() }).unwrap();
            let idx = index(&mesh).unwrap();
            assert!((idx - cx(0.0, PI)).norm() < 1e-8, "{eta}: {idx}");
            let idx2 = index_via_lambda(&mesh).unwrap();
            assert!((idx2 - cx(0.0, PI)).norm() < 1e-8);
        }
    }

    #[test]
    fn alpha_examples() {
        let p = params();
        assert_eq!(alpha_of_k(-p.k0, &p, 1.0), ZERO);
        assert_eq!(alpha_for_case(Case::Sym, cx(3.0, 1.0), &p, 1.0), ONE);
        let p1 = p.with_eta(ONE).unwrap();
        assert_eq!(alpha_of_k(ZERO, &p1, 1.0), -I * p.k0);
        assert_eq!(alpha_of_k(ZERO, &p1, -1.0), I * p.k0);
    }

    #[test]
    fn eigen_reconstruction_selects_sign() {
        let p = params();
        let mesh = build_gamma_with(&p, &MeshSpec { n: 60, ..MeshSpec::default() }).unwrap();
        // alpha m - alpha cancels badly once |alpha| ~ 1e8, so stay below |b| = 100
        for (j, (&b, &x)) in mesh.nodes().iter().zip(mesh.xi()).enumerate().skip(1) {
            if b.norm() > 100.0 {
                continue;
            }
            let k = p.k0 + b;
            let m = mesh.eig()[j].m;
            for (case, alpha) in [(Case::Antisym, alpha_of_k(k, &p, -1.0)), (Case::Sym, ONE)] {
                let target = connection_matrix(MatrixKind::on_g2(case), k, x, &p).unwrap();
                let h = eigen_frame(alpha);
                let rec = h * Mat2::diag(m, ONE) * eigen_frame(-alpha);
                assert!((rec - target).norm_inf() < 1e-10 * target.norm_inf());
            }
            if (m - 1.0).norm() > 1e-3 {
                let alpha = alpha_of_k(k, &p, 1.0);
                let rec = eigen_frame(alpha) * Mat2::diag(m, ONE) * eigen_frame(-alpha);
                let target = connection_matrix(MatrixKind::Mtilde2, k, x, &p).unwrap();
                assert!((rec - target).norm_inf() > 1e-3);
            }
        }
    }

    #[test]
    fn variable_change_at_origin() {
        let p = params();
        let u = variable_change(Direction::Forward, Mat2::identity(), ZERO, &p).unwrap();
        let f = Cx::from_polar(1.0, FRAC_PI_4) / p.k0.sqrt();
        assert!((u - Mat2::diag(f, f)).norm_inf() < 1e-15);
        assert!(matches!(
            variable_change(Direction::Forward, u, p.k0, &p),
            Err(Error::AtBranchPoint { .. })
        ));
    }

    proptest! {
        #[test]
        fn variable_change_roundtrip(v in prop::array::uniform8(-2.0f64..2.0)) {
            let p = params();
            let u = Mat2::new(cx(v[0], v[1]), cx(v[2], v[3]), cx(v[4], v[5]), cx(v[6], v[7]));
            let k = p.k0 * 0.3;
            let f = variable_change(Direction::Forward, u, k, &p).unwrap();
            let back = variable_change(Direction::Inverse, f, k, &p).unwrap();
            prop_assert!((back - u).norm_inf() < 1e-13 * (1.0 + u.norm_inf()));
        }
    }
}
