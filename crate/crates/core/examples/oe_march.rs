//! Solve the OE-equation by Riccati marching and report how well the
//! recovered coefficient reproduces the connection matrix on the cut.
//!
//! cargo run --release --example oe_march

use std::sync::Arc;

use oestrip::contours::{build_gamma_with, MeshSpec, ProblemParams};
use oestrip::march::{march_with, median_residual, residual_sample_points, MarchOptions};
use oestrip::Case;

fn main() -> oestrip::Result<()> {
    let params = ProblemParams::reference();
    let points = residual_sample_points(10);
    println!("{:>6} {:>14} {:>14}", "N", "antisym", "sym");
    for n in [50, 100, 200] {
        let mesh = Arc::new(build_gamma_with(&params, &MeshSpec { n, ..MeshSpec::default() })?);
        let mut row = Vec::new();
        for case in Case::BOTH {
            let table = march_with(mesh.clone(), case, &MarchOptions::default())?;
            row.push(median_residual(&table, &points)?);
        }
        println!("{n:>6} {:>14.4e} {:>14.4e}", row[0], row[1]);
    }
    Ok(())
}
