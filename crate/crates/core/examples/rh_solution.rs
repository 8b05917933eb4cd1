//! Evaluate the RH solution from the marched coefficient table and check
//! the jump across the cut and the behaviour far from it.
//!
//! cargo run --release --example rh_solution

use oestrip::contours::{MeshSpec, ProblemParams};
use oestrip::directivity::{OeOptions, OeSolver};
use oestrip::march::oe_residual;
use oestrip::ode1::pi_matrix;
use oestrip::{cx, Case};

fn main() -> oestrip::Result<()> {
    let params = ProblemParams::reference();
    let opts = OeOptions { mesh: MeshSpec { n: 200, ..MeshSpec::default() }, ..OeOptions::default() };
    let solver = OeSolver::new(params, &opts)?;
    if let Some(v) = solver.alpha_validation() {
        println!("eigenvector sign {:+} (residuals {:.2e} / {:.2e})", v.sign, v.residual_plus, v.residual_minus);
    }
    for case in Case::BOTH {
        let table = solver.table(case)?;
        println!("{}:", case.name());
        for b in [cx(0.0, 0.1), cx(0.0, 0.5), cx(0.0, 2.0)] {
            println!("  jump residual at k0 + {b}: {:.3e}", oe_residual(table, params.k0 + b)?);
        }
        for k in [cx(0.0, 0.0), cx(4.0, 0.0), cx(-6.0, 0.0)] {
            let u = solver.solve_at(case, k)?;
            let rel = u * pi_matrix(k, params.a).inverse()?;
            println!("  U(k) Pi(k)^-1 at k = {:>4}: diag {:.4} {:.4}", k.re, rel.a11, rel.a22);
        }
    }
    Ok(())
}
