//! Integral-equation reference: densities, directivity and self-convergence.
//!
//! cargo run --release --example bie_reference

use oestrip::prelude::*;

fn main() -> oestrip::Result<()> {
    let params = ProblemParams::reference();
    let grid = theta_grid(181, 3f64.to_radians())?;
    let mut previous: Option<DirectivityTable> = None;
    println!("{:>6} {:>14} {:>14}", "n", "change S_a", "change S_s");
    for n in [32, 64, 128, 256] {
        let (table, densities) = BieSolver::new(params, n)?.directivity(&grid, CaseSelection::Total)?;
        if let Some(prev) = &previous {
            let change = |c: Case| {
                let (a, b) = (prev.component(c).unwrap(), table.component(c).unwrap());
                let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
                (num / b.iter().map(|y| y.norm_sqr()).sum::<f64>()).sqrt()
            };
            println!("{n:>6} {:>14.3e} {:>14.3e}", change(Case::Antisym), change(Case::Sym));
        }
        if n == 256 {
            let nu = &densities[0];
            println!("nu at the centre panels: {:.5} {:.5}", nu.values[127], nu.values[128]);
        }
        previous = Some(table);
    }
    Ok(())
}
