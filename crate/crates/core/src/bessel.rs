//! Bessel functions of orders 0 and 1 and the Hankel function `H0^(1)` for
//! complex argument.
//!
//! Small arguments use the ascending series, large ones the Hankel
//! asymptotic expansion. Accuracy target is `1e-10` relative for
//! `-pi/2 <= arg z <= pi/16`, which covers `k0 r` with a lightly damped `k0`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::linalg::{Cx, I, ONE, ZERO};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Boundary between the series and asymptotic regimes.
pub const SERIES_RADIUS: f64 = 12.0;

/// `J0, Y0, J1, Y1` at one argument.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesselJY {
    pub j0: Cx,
    pub y0: Cx,
    pub j1: Cx,
    pub y1: Cx,
}

fn check(z: Cx) -> Result<()> {
    if z == ZERO || !z.is_finite() || (z.im == 0.0 && z.re < 0.0) {
        return Err(Error::DomainError { z });
    }
    Ok(())
}

/// Ascending series, usable for any `z` but accurate only for moderate `|z|`.
pub fn series(z: Cx) -> Result<BesselJY> {
    check(z)?;
    let t = z / 2.0;
    let mt2 = -t * t;
    let log_t = t.ln();

    // term_k = (-t^2)^k / (k! k!),  term1_k = (-t^2)^k / (k! (k+1)!)
    let mut term = ONE;
    let mut term1 = ONE;
    let mut j0 = ONE;
    let mut j1s = ONE;
    let mut y0s = ZERO;
    // psi(k+1) + psi(k+2) at k = 0
    let mut harmonic = 0.0;
    let mut y1s = Cx::new(-2.0 * EULER_GAMMA + 1.0, 0.0);
    for k in 1..200 {
        let kf = k as f64;
        term *= mt2 / (kf * kf);
        term1 *= mt2 / (kf * (kf + 1.0));
        harmonic += 1.0 / kf;
        j0 += term;
        j1s += term1;
        y0s -= term * harmonic;
        let psi_sum = 2.0 * (harmonic - EULER_GAMMA) + 1.0 / (kf + 1.0);
        y1s += term1 * psi_sum;
        let scale = j0.norm().max(y0s.norm()).max(1.0);
        if term.norm() * (harmonic + 1.0) < 1e-17 * scale && term1.norm() * (harmonic + 2.0) < 1e-17 * scale {
            break;
        }
    }
    let j1 = t * j1s;
    let y0 = (2.0 / PI) * ((log_t + EULER_GAMMA) * j0 + y0s);
    let y1 = (2.0 / PI) * j1 * log_t - 2.0 / (PI * z) - t * y1s / PI;
    Ok(BesselJY { j0, y0, j1, y1 })
}

/// Hankel asymptotic series `sum_k c^k a_k(nu) / z^k` with `c = +i` or `-i`,
/// truncated at its smallest term.
fn hankel_sum(nu: f64, z: Cx, c: Cx) -> Cx {
    let mu = 4.0 * nu * nu;
    let mut term = ONE;
    let mut sum = ONE;
    let mut prev = f64::INFINITY;
    for k in 1..100 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = term * c * (mu - odd * odd) / (kf * 8.0 * z);
        let size = next.norm();
        if size >= prev || size < 1e-17 * sum.norm() {
            if size < 1e-17 * sum.norm() {
                sum += next;
            }
            break;
        }
        sum += next;
        term = next;
        prev = size;
    }
    sum
}

/// `H_nu^(1)(z)` and `H_nu^(2)(z)` for `nu` in `{0, 1}` from the asymptotic expansion.
pub fn hankel_asymptotic(nu: u8, z: Cx) -> Result<(Cx, Cx)> {
    check(z)?;
    let nuf = nu as f64;
    let pre = (2.0 / (PI * z)).sqrt();
    let omega = z - nuf * FRAC_PI_2 - FRAC_PI_4;
    let h1 = pre * (I * omega).exp() * hankel_sum(nuf, z, I);
    let h2 = pre * (-I * omega).exp() * hankel_sum(nuf, z, -I);
    Ok((h1, h2))
}

/// Asymptotic regime for all four functions.
pub fn asymptotic(z: Cx) -> Result<BesselJY> {
    let (h10, h20) = hankel_asymptotic(0, z)?;
    let (h11, h21) = hankel_asymptotic(1, z)?;
    Ok(BesselJY {
        j0: (h10 + h20) / 2.0,
        y0: (h10 - h20) / (2.0 * I),
        j1: (h11 + h21) / 2.0,
        y1: (h11 - h21) / (2.0 * I),
    })
}

/// `J0, Y0, J1, Y1` with the regime chosen by `|z|`.
pub fn bessel_jy(z: Cx) -> Result<BesselJY> {
    if z.norm() <= SERIES_RADIUS {
        series(z)
    } else {
        asymptotic(z)
    }
}

pub fn j0(z: Cx) -> Result<Cx> {
    bessel_jy(z).map(|b| b.j0)
}

pub fn y0(z: Cx) -> Result<Cx> {
    bessel_jy(z).map(|b| b.y0)
}

pub fn j1(z: Cx) -> Result<Cx> {
    bessel_jy(z).map(|b| b.j1)
}

pub fn y1(z: Cx) -> Result<Cx> {
    bessel_jy(z).map(|b| b.y1)
}

/// `H0^(1)(z) = J0(z) + i Y0(z)`.
///
/// Beyond the series radius the first-kind expansion is used directly, so the
/// result keeps full relative accuracy where `H0^(1)` is exponentially small.
pub fn hankel0_first(z: Cx) -> Result<Cx> {
    if z.norm() <= SERIES_RADIUS {
        let b = series(z)?;
        Ok(b.j0 + I * b.y0)
    } else {
        hankel_asymptotic(0, z).map(|(h1, _)| h1)
    }
}

/// `H1^(1)(z)`.
pub fn hankel1_first(z: Cx) -> Result<Cx> {
    if z.norm() <= SERIES_RADIUS {
        let b = series(z)?;
        Ok(b.j1 + I * b.y1)
    } else {
        hankel_asymptotic(1, z).map(|(h1, _)| h1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cx;

    fn rel(a: Cx, b: Cx) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn value_at_one() {
        // J0(1), Y0(1) to 16 digits
        let h = hankel0_first(cx(1.0, 0.0)).unwrap();
        assert!(rel(h, cx(0.765_197_686_557_966_6, 0.088_256_964_215_676_96)) < 1e-14);
    }

    #[test]
    fn order_one_at_two() {
        let b = bessel_jy(cx(2.0, 0.0)).unwrap();
        assert!((b.j1 - cx(0.576_724_807_756_873_4, 0.0)).norm() < 1e-14);
        assert!((b.y1 - cx(-0.107_032_431_540_937_5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn matches_high_precision_reference() {
        let data = include_str!("../tests/data/hankel_ref.csv");
        let mut count = 0;
        for line in data.lines().skip(1) {
            let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            let z = cx(v[0], v[1]);
            assert!(rel(hankel0_first(z).unwrap(), cx(v[2], v[3])) < 1e-10, "H0 at {z}");
            assert!(rel(hankel1_first(z).unwrap(), cx(v[4], v[5])) < 1e-10, "H1 at {z}");
            count += 1;
        }
        assert_eq!(count, 50);
    }

    #[test]
    fn wronskian() {
        for x in [0.5, 5.0, 20.0] {
            let b = bessel_jy(cx(x, 0.0)).unwrap();
            let w = b.j1 * b.y0 - b.j0 * b.y1;
            assert!((w - cx(2.0 / (PI * x), 0.0)).norm() < 1e-9, "x = {x}");
        }
    }

    #[test]
    fn regimes_overlap() {
        for r in [10.0, 11.0, 12.0, 13.0, 14.0] {
            for arg in [-FRAC_PI_2, -0.7, -0.2, 0.0, 0.001, 0.1, PI / 16.0] {
                let z = Cx::from_polar(r, arg);
                let (s, a) = (series(z).unwrap(), asymptotic(z).unwrap());
                for (u, v) in [(s.j0, a.j0), (s.y0, a.y0), (s.j1, a.j1), (s.y1, a.y1)] {
                    assert!(rel(u, v) < 1e-8, "z = {z}: {u} vs {v}");
                }
            }
        }
    }

    #[test]
    fn large_argument_modulus() {
        let h = hankel0_first(cx(50.0, 0.0)).unwrap();
        assert!((h.norm() / (2.0 / (PI * 50.0)).sqrt() - 1.0).abs() < 0.01);
    }

    #[test]
    fn domain() {
        assert!(matches!(hankel0_first(ZERO), Err(Error::DomainError { .. })));
        assert!(matches!(hankel0_first(cx(-1.0, 0.0)), Err(Error::DomainError { .. })));
    }

    #[test]
    fn conjugate_symmetry() {
        let z = cx(3.0, 0.4);
        let (a, b) = (series(z).unwrap(), series(z.conj()).unwrap());
        assert!(rel(a.j0.conj(), b.j0) < 1e-15 && rel(a.y1.conj(), b.y1) < 1e-14);
    }
}
