//! OE directivity against the integral-equation reference for k0 a = 8,
//! eta = 1 - 0.25i, incidence at 30 degrees.
//!
//! cargo run --release --example directivity_compare

use oestrip::prelude::*;

fn main() -> oestrip::Result<()> {
    let params = ProblemParams::reference();
    let grid = theta_grid(181, 3f64.to_radians())?;
    let oe = OeSolver::new(params, &OeOptions::default())?.directivity(&grid, CaseSelection::Total)?;
    let (bie, _) = BieSolver::new(params, 256)?.directivity(&grid, CaseSelection::Total)?;

    println!("{:>7} {:>10} {:>10} {:>10} {:>10}", "theta", "|Sa| OE", "|Sa| BIE", "|Ss| OE", "|Ss| BIE");
    for i in (0..grid.len()).step_by(15) {
        println!(
            "{:>7.1} {:>10.5} {:>10.5} {:>10.5} {:>10.5}",
            grid[i].to_degrees(),
            oe.s_a.as_ref().unwrap()[i].norm(),
            bie.s_a.as_ref().unwrap()[i].norm(),
            oe.s_s.as_ref().unwrap()[i].norm(),
            bie.s_s.as_ref().unwrap()[i].norm(),
        );
    }
    for case in Case::BOTH {
        let (a, b) = (oe.component(case).unwrap(), bie.component(case).unwrap());
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x.norm() - y.norm()).powi(2)).sum();
        let l2 = (num / b.iter().map(|y| y.norm_sqr()).sum::<f64>()).sqrt();
        println!("{}: relative L2 discrepancy of |S| = {l2:.3e}", case.name());
    }
    Ok(())
}
