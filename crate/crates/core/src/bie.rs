//! Boundary integral reference solver on a uniform panelization of the strip.
//!
//! Both sub-problems are collocated at panel centres. The single-layer
//! operator integrates the logarithmic part of the Green function exactly
//! over each panel and the smooth remainder by the midpoint rule. The
//! antisymmetric equation applies `d^2/dx^2 + k0^2` to the single-layer
//! potential by central differences, using potential values at one ghost
//! point beyond each end of the strip.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::{hankel0_first, EULER_GAMMA};
use crate::contours::ProblemParams;
use crate::directivity::{check_grid, DirectivityTable, Method};
use crate::error::{Error, Result};
use crate::linalg::{Cx, I, ZERO};
use crate::{Case, CaseSelection};

/// Smallest supported panel count.
pub const MIN_PANELS: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Panelization {
    pub n_panels: usize,
    pub half_width: f64,
    pub h: f64,
    pub centers: Vec<f64>,
}

impl Panelization {
    pub fn new(n_panels: usize, half_width: f64) -> Result<Self> {
        if n_panels < MIN_PANELS {
            return Err(Error::Config(format!("need at least {MIN_PANELS} panels, got {n_panels}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Config(format!("strip half-width must be positive, got {half_width}")));
        }
        let h = 2.0 * half_width / n_panels as f64;
        let centers = (0..n_panels).map(|j| -half_width + h * (j as f64 + 0.5)).collect();
        Ok(Self { n_panels, half_width, h, centers })
    }

    pub fn len(&self) -> usize {
        self.n_panels
    }

    pub fn is_empty(&self) -> bool {
        self.n_panels == 0
    }

    /// Collocation points plus one ghost point beyond each end.
    fn with_ghosts(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.n_panels + 2);
        x.push(self.centers[0] - self.h);
        x.extend_from_slice(&self.centers);
        x.push(self.centers[self.n_panels - 1] + self.h);
        x
    }
}

/// `-(i/4) H0^(1)(k0 |dx|)` on the strip axis.
pub fn green(dx: f64, k0: Cx) -> Result<Cx> {
    if dx == 0.0 {
        return Err(Error::DomainError { z: ZERO });
    }
    Ok(-0.25 * I * hankel0_first(k0 * dx.abs())?)
}

/// `G(r) - ln(r) / (2 pi)`, continuous at `r = 0`.
pub fn green_smooth(r: f64, k0: Cx) -> Result<Cx> {
    if r == 0.0 {
        return Ok(-0.25 * I + ((k0 / 2.0).ln() + EULER_GAMMA) / (2.0 * PI));
    }
    Ok(green(r, k0)? - r.abs().ln() / (2.0 * PI))
}

/// `int_{xl}^{xr} ln|x - t| dt` in closed form.
pub fn panel_log_integral(x: f64, xl: f64, xr: f64) -> f64 {
    let f = |u: f64| if u == 0.0 { 0.0 } else { u * u.abs().ln() - u };
    f(x - xl) - f(x - xr)
}

/// Row of the single-layer matrix: `(S mu)(x) = sum_j A_j mu_j`.
fn single_layer_row(x: f64, panels: &Panelization, k0: Cx) -> Result<Vec<Cx>> {
    let h = panels.h;
    panels
        .centers
        .iter()
        .map(|&c| {
            let log_part = panel_log_integral(x, c - h / 2.0, c + h / 2.0) / (2.0 * PI);
            Ok(h * green_smooth((x - c).abs(), k0)? + log_part)
        })
        .collect()
}

fn single_layer_rows(points: &[f64], panels: &Panelization, k0: Cx) -> Result<Vec<Vec<Cx>>> {
    points.par_iter().map(|&x| single_layer_row(x, panels, k0)).collect()
}

/// Single-layer matrix at the collocation points.
pub fn single_layer_matrix(panels: &Panelization, k0: Cx) -> Result<DMatrix<Cx>> {
    let rows = single_layer_rows(&panels.centers, panels, k0)?;
    let n = panels.len();
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// System matrix of the antisymmetric (hypersingular) equation.
pub fn antisym_matrix(params: &ProblemParams, panels: &Panelization) -> Result<DMatrix<Cx>> {
    let k0 = params.k0;
    let rows = single_layer_rows(&panels.with_ghosts(), panels, k0)?;
    let n = panels.len();
    let h2 = panels.h * panels.h;
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let d2 = (rows[i + 2][j] - 2.0 * rows[i + 1][j] + rows[i][j]) / h2;
        let diag = if i == j { params.eta / 2.0 } else { ZERO };
        d2 + k0 * k0 * rows[i + 1][j] + diag
    }))
}

/// System matrix of the symmetric (single-layer) equation.
pub fn sym_matrix(params: &ProblemParams, panels: &Panelization) -> Result<DMatrix<Cx>> {
    let s = single_layer_matrix(panels, params.k0)?;
    let n = panels.len();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let diag = if i == j { Cx::new(0.5, 0.0) } else { ZERO };
        diag - params.eta * s[(i, j)]
    }))
}

fn incident(params: &ProblemParams, x: f64) -> Cx {
    (-I * params.k0 * x * params.theta_inc.cos()).exp()
}

fn solve_dense(m: DMatrix<Cx>, rhs: DVector<Cx>) -> Result<Vec<Cx>> {
    let x = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SolveFailed("singular BIE system".into()))?;
    if !x.iter().all(|z| z.is_finite()) {
        return Err(Error::SolveFailed("non-finite BIE density".into()));
    }
    Ok(x.iter().copied().collect())
}

/// Layer density at the panel centres: `nu` (antisym) or `mu` (sym).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityVector {
    pub case: Case,
    pub x: Vec<f64>,
    pub values: Vec<Cx>,
}

impl DensityVector {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,re,im\n");
        for (x, v) in self.x.iter().zip(&self.values) {
            let _ = writeln!(s, "{x},{},{}", v.re, v.im);
        }
        s
    }
}

/// Directivity quadrature (midpoint over panels) for one density.
pub fn bie_directivity_values(density: &DensityVector, h: f64, theta: &[f64], params: &ProblemParams) -> Vec<Cx> {
    let k0 = params.k0;
    let phase = Cx::from_polar(1.0, -FRAC_PI_4);
    theta
        .iter()
        .map(|&t| {
            let sum: Cx = density
                .x
                .iter()
                .zip(&density.values)
                .map(|(&x, &v)| v * (-I * k0 * x * t.cos()).exp())
                .sum::<Cx>()
                * h;
            match density.case {
                // boundary trace is -nu/2
                Case::Antisym => -phase * k0 * t.sin() * (-0.5 * sum),
                // normal derivative is mu/2
                Case::Sym => phase * 0.5 * sum,
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct BieSolver {
    params: ProblemParams,
    panels: Panelization,
}

impl BieSolver {
    pub fn new(params: ProblemParams, n_panels: usize) -> Result<Self> {
        Ok(Self { params, panels: Panelization::new(n_panels, params.a)? })
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn panels(&self) -> &Panelization {
        &self.panels
    }

    pub fn solve_antisym(&self) -> Result<DensityVector> {
        let p = &self.params;
        let m = antisym_matrix(p, &self.panels)?;
        let amp = I * p.k0 * p.theta_inc.sin();
        let rhs = DVector::from_iterator(self.panels.len(), self.panels.centers.iter().map(|&x| amp * incident(p, x)));
        Ok(DensityVector { case: Case::Antisym, x: self.panels.centers.clone(), values: solve_dense(m, rhs)? })
    }

    pub fn solve_sym(&self) -> Result<DensityVector> {
        let p = &self.params;
        let m = sym_matrix(p, &self.panels)?;
        let rhs = DVector::from_iterator(self.panels.len(), self.panels.centers.iter().map(|&x| p.eta * incident(p, x)));
        Ok(DensityVector { case: Case::Sym, x: self.panels.centers.clone(), values: solve_dense(m, rhs)? })
    }

    pub fn solve(&self, case: Case) -> Result<DensityVector> {
        match case {
            Case::Antisym => self.solve_antisym(),
            Case::Sym => self.solve_sym(),
        }
    }

    /// Directivity table for a density already solved with these parameters.
    pub fn directivity_of(&self, density: &DensityVector, grid: &[f64]) -> Result<DirectivityTable> {
        check_grid(grid)?;
        if density.values.len() != self.panels.len() {
            return Err(Error::Config("density does not match the panelization".into()));
        }
        let mut table = DirectivityTable::new(Method::Bie, self.params, grid.to_vec());
        table.set_component(density.case, bie_directivity_values(density, self.panels.h, grid, &self.params))?;
        Ok(table)
    }

    /// Solve the selected cases and evaluate their directivity on `grid`.
    pub fn directivity(&self, grid: &[f64], selection: CaseSelection) -> Result<(DirectivityTable, Vec<DensityVector>)> {
        check_grid(grid)?;
        let mut table = DirectivityTable::new(Method::Bie, self.params, grid.to_vec());
        let mut densities = Vec::new();
        for &case in selection.cases() {
            let d = self.solve(case)?;
            table.set_component(case, bie_directivity_values(&d, self.panels.h, grid, &self.params))?;
            densities.push(d);
        }
        Ok((table, densities))
    }
}
