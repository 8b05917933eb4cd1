//! Build the contour `gamma` for a passive and an active-looking impedance
//! and check the index and the endpoint exponent.
//!
//! cargo run --example gamma_mesh

use oestrip::contours::{build_gamma_with, MeshSpec, ProblemParams};
use oestrip::cx;
use oestrip::kernel::{index, index_via_lambda};

fn main() -> oestrip::Result<()> {
    for eta in [cx(1.0, -0.25), cx(-1.0, -0.5)] {
        let params = ProblemParams::reference().with_eta(eta)?;
        let mesh = build_gamma_with(&params, &MeshSpec::default())?;
        let lam = mesh.lambda();
        println!("eta = {eta}");
        println!("  nodes {}, height {:.3e}", mesh.len(), mesh.height());
        match mesh.deformation() {
            Some(d) => println!("  detour {:?} around b' = {:.4}, radius {:.4}", d.side, d.b_prime, d.radius),
            None => println!("  straight path"),
        }
        println!("  lambda(b1) = {:.2e}, lambda(0) = {:.6}", lam[0], lam[lam.len() - 1]);
        println!("  Idx = {:.12} (log m), {:.12} (lambda)", index(&mesh)?, index_via_lambda(&mesh)?);
    }
    Ok(())
}
