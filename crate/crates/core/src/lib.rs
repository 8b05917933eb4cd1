//! Diffraction of a plane wave by an impedance strip, solved two ways.
//!
//! The main route formulates the problem as a pair of matrix Riemann-Hilbert
//! problems, embeds them in a family indexed by a parameter `b` running along
//! a contour `gamma`, and recovers the coefficient of the resulting ODE by
//! marching a Riccati system (the OE-equation). The RH solution, and hence
//! the far-field directivity, then follows from an ordered exponential.
//!
//! A boundary integral solver in [`bie`] provides an independent reference.
//!
//! ```no_run
//! use oestrip::prelude::*;
//!
//! let params = ProblemParams::reference();
//! let solver = OeSolver::new(params, &OeOptions::default()).unwrap();
//! let grid = theta_grid(181, 3f64.to_radians()).unwrap();
//! let table = solver.directivity(&grid, CaseSelection::Total).unwrap();
//! println!("{}", table.to_csv());
//! ```

pub mod bessel;
pub mod bie;
pub mod config;
pub mod contours;
pub mod directivity;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod march;
pub mod ode1;
pub mod run;

use serde::{Deserialize, Serialize};

pub use error::{Error, Result};
pub use linalg::{cx, Cx, Mat2};

/// The two scalar sub-problems obtained by splitting the incident field into
/// parts odd and even in `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    Antisym,
    Sym,
}

impl Case {
    pub const BOTH: [Case; 2] = [Case::Antisym, Case::Sym];

    pub fn name(self) -> &'static str {
        match self {
            Case::Antisym => "antisym",
            Case::Sym => "sym",
        }
    }
}

/// Which directivity components a run should produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseSelection {
    Antisym,
    Sym,
    Total,
}

impl CaseSelection {
    pub fn cases(self) -> &'static [Case] {
        match self {
            CaseSelection::Antisym => &[Case::Antisym],
            CaseSelection::Sym => &[Case::Sym],
            CaseSelection::Total => &Case::BOTH,
        }
    }
}

pub mod prelude {
    pub use crate::bie::{BieSolver, Panelization};
    pub use crate::contours::{build_gamma, GammaMesh, MeshGrading, MeshSpec, ProblemParams};
    pub use crate::directivity::{theta_grid, DirectivityTable, Method, OeOptions, OeSolver};
    pub use crate::linalg::{cx, Cx, Mat2};
    pub use crate::march::{march, CoefficientTable};
    pub use crate::{Case, CaseSelection, Error, Result};
}
