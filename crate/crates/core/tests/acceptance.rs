//! Acceptance criteria. Each test prints one PASS/FAIL line with the measured
//! values, then asserts. Run with `--nocapture` to see the lines on success.

use std::sync::Arc;

use oestrip::bessel::{asymptotic, bessel_jy, hankel0_first, series};
use oestrip::bie::BieSolver;
use oestrip::config::{Format, Mode, RunConfig};
use oestrip::contours::{build_gamma_with, GammaMesh, MeshSpec, ProblemParams};
use oestrip::directivity::{theta_grid, OeOptions, OeSolver};
use oestrip::kernel::{alpha_of_k, index, index_via_lambda};
use oestrip::march::{march_with, median_residual, residual_sample_points, MarchOptions};
use oestrip::ode1::{concat_property_check, oe_of_table, pi_matrix, poles_for, solve_at_parameter, Contour, StepPolicy};
use oestrip::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn report(n: u32, name: &str, ok: bool, detail: String) {
    println!("criterion {n:>2} {name}: {} | {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {detail}");
}

fn abs_rel_l2(a: &[Cx], b: &[Cx]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x.norm() - y.norm()).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

fn abs_rel_linf(a: &[Cx], b: &[Cx]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x.norm() - y.norm()).abs()).fold(0.0, f64::max);
    num / b.iter().map(|y| y.norm()).fold(0.0, f64::max)
}

const ETAS: [(f64, f64); 8] = [
    (1.0, -0.25),
    (2.0, -0.01),
    (0.5, -1.0),
    (-1.0, -0.5),
    (-0.3, -0.1),
    (3.0, -2.0),
    (-2.0, -0.05),
    (0.1, -0.9),
];

fn index_meshes() -> Vec<GammaMesh> {
    ETAS.iter()
        .map(|&(re, im)| {
            let p = ProblemParams::reference().with_eta(cx(re, im)).unwrap();
            build_gamma_with(&p, &MeshSpec::default()).unwrap()
        })
        .collect()
}

#[test]
fn c01_cross_method_agreement() {
    let params = ProblemParams::reference();
    let grid = theta_grid(181, 3f64.to_radians()).unwrap();
    let opts = OeOptions { mesh: MeshSpec { n: 200, ..MeshSpec::default() }, ..OeOptions::default() };
    let oe = OeSolver::new(params, &opts).unwrap().directivity(&grid, CaseSelection::Total).unwrap();
    let (bie, _) = BieSolver::new(params, 256).unwrap().directivity(&grid, CaseSelection::Total).unwrap();
    assert_eq!(oe.theta, bie.theta);
    let mut ok = true;
    let mut detail = String::new();
    for case in Case::BOTH {
        let (a, b) = (oe.component(case).unwrap(), bie.component(case).unwrap());
        let (l2, linf) = (abs_rel_l2(a, b), abs_rel_linf(a, b));
        ok &= l2 <= 0.05 && linf <= 0.12;
        detail += &format!("{}: L2 {l2:.3e} Linf {linf:.3e}; ", case.name());
    }
    report(1, "cross-method agreement", ok, detail);
}

#[test]
fn c02_oe_residual_convergence() {
    let params = ProblemParams::reference();
    let points = residual_sample_points(10);
    let mut ok = true;
    let mut detail = String::new();
    for case in Case::BOTH {
        let med: Vec<f64> = [50, 100, 200]
            .iter()
            .map(|&n| {
                let mesh = Arc::new(build_gamma_with(&params, &MeshSpec { n, ..MeshSpec::default() }).unwrap());
                median_residual(&march_with(mesh, case, &MarchOptions::default()).unwrap(), &points).unwrap()
            })
            .collect();
        ok &= med[1] < med[0] && med[2] < med[1] && med[2] <= 5e-2;
        detail += &format!("{}: {:.3e} {:.3e} {:.3e}; ", case.name(), med[0], med[1], med[2]);
    }
    report(2, "OE residual convergence", ok, detail);
}

#[test]
fn c03_index() {
    let mut worst: f64 = 0.0;
    for mesh in index_meshes() {
        let target = cx(0.0, std::f64::consts::PI);
        let a = index(&mesh).unwrap();
        let b = index_via_lambda(&mesh).unwrap();
        worst = worst.max((a - target).norm()).max((b - target).norm());
    }
    report(3, "index equals i pi", worst <= 1e-8, format!("max |Idx - i pi| = {worst:.2e} over {} impedances", ETAS.len()));
}

#[test]
fn c04_lambda_boundary_values() {
    let (mut top, mut bottom): (f64, f64) = (0.0, 0.0);
    let mut ok = true;
    for mesh in index_meshes() {
        let lam = mesh.lambda();
        let t = lam[0].norm();
        let b = (lam[lam.len() - 1] + 0.5).norm();
        ok &= t <= MeshSpec::default().tol_start && b <= 1e-6;
        top = top.max(t);
        bottom = bottom.max(b);
    }
    report(4, "lambda boundary values", ok, format!("max |lambda(b1)| = {top:.2e}, max |lambda(0) + 1/2| = {bottom:.2e}"));
}

#[test]
fn c05_oe_algebra() {
    let params = ProblemParams::reference();
    let mesh = Arc::new(build_gamma_with(&params, &MeshSpec { n: 60, ..MeshSpec::default() }).unwrap());
    let policy = StepPolicy { substeps: 16, ..StepPolicy::default() };
    let mut rng = StdRng::seed_from_u64(7);
    let (mut rev, mut cat, mut liou): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for case in Case::BOTH {
        let t = march_with(mesh.clone(), case, &MarchOptions::default()).unwrap();
        let c = Contour::from_mesh(t.mesh());
        for _ in 0..4 {
            let k = cx(rng.gen_range(-6.0..6.0), 0.0);
            let poles = poles_for(&t, k);
            let kern = |b: Cx, s: usize| t.kernel_at(s, b, k);
            let split = rng.gen_range(1..c.points.len() - 1);
            let (h1, h2) = c.split_at(split);
            cat = cat.max(concat_property_check(&h1, &h2, kern, &poles, &policy).unwrap());

            let fwd = oe_of_table(&t, &h1, k, &policy).unwrap();
            let back = oe_of_table(&t, &h1.reversed(), k, &policy).unwrap();
            rev = rev.max((back * fwd - Mat2::identity()).norm_inf());

            let x = oe_of_table(&t, &c, k, &policy).unwrap();
            let tr = trace_integral(&t, &c, k);
            let det = x.determinant();
            liou = liou.max((det - tr.exp()).norm() / det.norm().max(1.0));
        }
    }
    let ok = rev <= 1e-8 && cat <= 1e-8 && liou <= 1e-8;
    report(5, "OE algebra", ok, format!("reversal {rev:.2e}, concatenation {cat:.2e}, Liouville {liou:.2e}"));
}

/// `int tr K db` along `c` by 8-point Gauss-Legendre on 64 sub-panels per edge.
fn trace_integral(t: &CoefficientTable, c: &Contour, k: Cx) -> Cx {
    const X: [f64; 4] = [0.1834346424956498, 0.525532409916329, 0.7966664774136267, 0.9602898564975363];
    const W: [f64; 4] = [0.362683783378362, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763];
    let mut total = cx(0.0, 0.0);
    for (seg, w) in c.points.windows(2).enumerate() {
        let sub = 64;
        for s in 0..sub {
            let a = w[0] + (w[1] - w[0]) * (s as f64 / sub as f64);
            let b = w[0] + (w[1] - w[0]) * ((s + 1) as f64 / sub as f64);
            let (mid, half) = ((a + b) * 0.5, (b - a) * 0.5);
            for (x, wt) in X.iter().zip(W) {
                for z in [mid + half * *x, mid - half * *x] {
                    total += t.kernel_at(seg, z, k).unwrap().trace() * half * wt;
                }
            }
        }
    }
    total
}

#[test]
fn c06_initial_condition() {
    let params = ProblemParams::reference();
    let mesh = Arc::new(build_gamma_with(&params, &MeshSpec::default()).unwrap());
    let policy = StepPolicy::default();
    let knee = 10.0;
    let mut ok = true;
    let mut detail = String::new();
    for case in Case::BOTH {
        let t = march_with(mesh.clone(), case, &MarchOptions::default()).unwrap();
        for k in [cx(-3.0, 0.0), cx(2.0, 0.0)] {
            let pi = pi_matrix(k, params.a);
            let d: Vec<f64> = [knee, 2.0 * knee, 4.0 * knee]
                .iter()
                .map(|&h| (solve_at_parameter(k, &t, h, &policy).unwrap() - pi).norm_inf())
                .collect();
            ok &= d[1] < d[0] && d[2] < d[1];
            detail += &format!("{} k={}: {:.2e} {:.2e} {:.2e}; ", case.name(), k.re, d[0], d[1], d[2]);
        }
    }
    report(6, "initial condition at i infinity", ok, detail);
}

#[test]
fn c07_riccati_boundary_conditions() {
    let params = ProblemParams::reference();
    let mesh = Arc::new(build_gamma_with(&params, &MeshSpec::default()).unwrap());
    let mut ok = true;
    let mut checked = 0;
    for case in Case::BOTH {
        let t = march_with(mesh.clone(), case, &MarchOptions::default()).unwrap();
        for j in 1..mesh.len() {
            let k = params.k0 + mesh.nodes()[j];
            let alpha = match case {
                Case::Antisym => alpha_of_k(k, &params, mesh.alpha_sign()),
                Case::Sym => cx(1.0, 0.0),
            };
            let expected = [alpha * (2.0 * Cx::i() * params.a * k).exp(), cx(0.0, 0.0)];
            ok &= t.start_values()[j] == expected;
            ok &= t.reached_values()[j] == [t.p1()[j], t.p2()[j]];
            checked += 1;
        }
    }
    report(7, "Riccati boundary conditions (bitwise)", ok, format!("{checked} inner solves checked"));
}

#[test]
fn c08_special_functions() {
    let rel = |a: Cx, b: Cx| (a - b).norm() / b.norm();
    let data = include_str!("data/hankel_ref.csv");
    let mut oracle: f64 = 0.0;
    let mut count = 0;
    for line in data.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let z = cx(v[0], v[1]);
        assert!(z.norm() <= 12.0);
        oracle = oracle.max(rel(hankel0_first(z).unwrap(), cx(v[2], v[3])));
        count += 1;
    }
    let mut overlap: f64 = 0.0;
    for i in 0..=16 {
        let r = 10.0 + 4.0 * i as f64 / 16.0;
        for arg in [-1.5, -1.0, -0.5, -0.1, 0.0, 0.001, 0.1, 0.19] {
            let z = Cx::from_polar(r, arg);
            let (s, a) = (series(z).unwrap(), asymptotic(z).unwrap());
            for (u, w) in [(s.j0, a.j0), (s.y0, a.y0), (s.j1, a.j1), (s.y1, a.y1)] {
                overlap = overlap.max(rel(u, w));
            }
        }
    }
    let mut wronskian: f64 = 0.0;
    for x in [0.5, 5.0, 20.0] {
        let b = bessel_jy(cx(x, 0.0)).unwrap();
        let w = b.j1 * b.y0 - b.j0 * b.y1;
        wronskian = wronskian.max((w - cx(2.0 / (std::f64::consts::PI * x), 0.0)).norm());
    }
    let ok = count == 50 && oracle <= 1e-10 && overlap <= 1e-8 && wronskian <= 1e-9;
    report(8, "special functions", ok, format!("oracle {oracle:.2e} ({count} pts), overlap {overlap:.2e}, Wronskian {wronskian:.2e}"));
}

#[test]
fn c09_bie_self_convergence() {
    let params = ProblemParams::reference();
    let grid = theta_grid(181, 3f64.to_radians()).unwrap();
    let tables: Vec<DirectivityTable> = [64, 128, 256]
        .iter()
        .map(|&n| BieSolver::new(params, n).unwrap().directivity(&grid, CaseSelection::Total).unwrap().0)
        .collect();
    let mut ok = true;
    let mut detail = String::new();
    for case in Case::BOTH {
        let s: Vec<&[Cx]> = tables.iter().map(|t| t.component(case).unwrap()).collect();
        let d1 = rel_l2_complex(s[0], s[1]);
        let d2 = rel_l2_complex(s[1], s[2]);
        ok &= d2 < d1;
        detail += &format!("{}: {d1:.2e} -> {d2:.2e}; ", case.name());
    }
    let zero = ProblemParams { eta: cx(0.0, 0.0), ..params };
    let mu = BieSolver::new(zero, 64).unwrap().solve_sym().unwrap();
    let exact_zero = mu.values.iter().all(|v| *v == cx(0.0, 0.0));
    ok &= exact_zero;
    detail += &format!("eta = 0 density identically zero: {exact_zero}");
    report(9, "BIE self-convergence", ok, detail);
}

fn rel_l2_complex(a: &[Cx], b: &[Cx]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

#[test]
fn c10_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut files_checked = 0;
    for format in [Format::Csv, Format::Json] {
        let mut config = RunConfig::default();
        config.mode = Mode::Compare;
        config.output.dir = dir.path().join(format!("{format:?}"));
        config.output.format = format;
        let snapshot = |files: &[std::path::PathBuf]| -> Vec<(std::path::PathBuf, Vec<u8>)> {
            files.iter().map(|f| (f.clone(), std::fs::read(f).unwrap())).collect()
        };
        let (_, first) = oestrip::run::run(&config).unwrap();
        let a = snapshot(&first);
        let (_, second) = oestrip::run::run(&config).unwrap();
        let b = snapshot(&second);
        ok &= a == b;
        files_checked += a.len();
    }
    report(10, "determinism", ok, format!("{files_checked} files bit-identical across two compare runs"));
}
