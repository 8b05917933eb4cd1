use thiserror::Error;

use crate::linalg::Cx;

/// Every failure the solver pipeline can report.
///
/// Variants carry enough context (node index, offending point) to locate the
/// problem without re-running under a debugger.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("singular matrix: |det| = {det:e} below tolerance {tol:e}")]
    SingularMatrix { det: f64, tol: f64 },

    #[error("continuation path passes within {distance:e} of branch point {branch_point}")]
    BranchPointTooClose { branch_point: Cx, distance: f64 },

    #[error("no detour side gives lambda(0) = -1/2 (best candidate ended at {lambda_end})")]
    DeformationFailed { lambda_end: Cx },

    #[error("truncation height {height} too low: {reason}")]
    TruncationTooLow { height: f64, reason: String },

    #[error("denominator vanishes at k = {k}")]
    DenominatorVanishes { k: Cx },

    #[error("lambda jumps by {jump:e} between nodes {node} and {next}", next = node + 1)]
    BranchJump { node: usize, jump: f64 },

    #[error("index {computed} differs from i*pi")]
    IndexMismatch { computed: Cx },

    #[error("variable change is singular at branch point k = {k}")]
    AtBranchPoint { k: Cx },

    #[error("eigenvector parametrisation degenerate at node {node}: |p1 p2 - 1| = {value:e}")]
    DegenerateP { node: usize, value: f64 },

    #[error("Riccati solution left both charts at node {node}")]
    ChartOverflow { node: usize },

    #[error("integration path comes within {distance:e} of pole {pole}")]
    PoleTooClose { pole: Cx, distance: f64 },

    #[error("step size underflow near {at}")]
    StepUnderflow { at: Cx },

    #[error("k = {k} too close to k* = {k_star} for the embedding formula")]
    CoincidentWavenumbers { k: Cx, k_star: Cx },

    #[error("Hankel function undefined at z = {z}")]
    DomainError { z: Cx },

    #[error("linear solve failed: {0}")]
    SolveFailed(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O failure: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
