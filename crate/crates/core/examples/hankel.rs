//! Hankel function `H0^(1)` across the series/asymptotic boundary.
//!
//! cargo run --example hankel

use oestrip::bessel::{asymptotic, hankel0_first, series, SERIES_RADIUS};
use oestrip::cx;

fn main() -> oestrip::Result<()> {
    println!("{:>8} {:>24} {:>24}", "z", "H0(z)", "|series - asymptotic|");
    for x in [0.1, 1.0, 5.0, 10.0, 12.0, 14.0, 30.0] {
        let z = cx(x, 0.008 * x / 8.0);
        let h = hankel0_first(z)?;
        let (s, a) = (series(z)?, asymptotic(z)?);
        let gap = (s.j0 - a.j0).norm().max((s.y0 - a.y0).norm());
        println!("{x:>8.2} {:>11.7}{:+.7}i {gap:>24.3e}", h.re, h.im);
    }
    println!("series used for |z| <= {SERIES_RADIUS}");
    Ok(())
}
