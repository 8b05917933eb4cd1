//! Drive a full run from a TOML string, as the command-line tool does.
//!
//! cargo run --release --example run_config

use oestrip::config::RunConfig;
use oestrip::run::compute;

fn main() -> oestrip::Result<()> {
    let config = RunConfig::from_toml_str(
        r#"
        mode = "compare"
        case = "total"
        [params]
        k0a = 8.0
        eta_re = -1.0
        eta_im = -0.5
        [grid]
        n_theta = 91
        "#,
    )?;
    let out = compute(&config)?;
    println!("gamma nodes: {:?}, detour: {:?}", out.metadata.gamma_nodes, out.metadata.deformation.map(|d| d.side));
    println!("OE residuals: {:?}", out.metadata.oe_residual);
    if let Some(report) = &out.compare {
        for (name, l2) in &report.l2_rel {
            println!("{name}: L2 {l2:.3e}, Linf {:.3e}", report.linf_rel[name]);
        }
    }
    Ok(())
}
