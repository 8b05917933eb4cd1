//! Relations between the OE and integral-equation directivities beyond the
//! magnitude comparison.

use oestrip::prelude::*;

#[test]
fn components_agree_as_complex_numbers_up_to_antisymmetric_sign() {
    let params = ProblemParams::reference();
    let grid = theta_grid(37, 3f64.to_radians()).unwrap();
    let oe = OeSolver::new(params, &OeOptions::default()).unwrap().directivity(&grid, CaseSelection::Total).unwrap();
    let (bie, _) = BieSolver::new(params, 256).unwrap().directivity(&grid, CaseSelection::Total).unwrap();
    let rel = |a: &[Cx], b: &[Cx], s: f64| -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y * s).norm_sqr()).sum();
        (num / b.iter().map(|y| y.norm_sqr()).sum::<f64>()).sqrt()
    };
    let (sa_oe, sa_bie) = (oe.s_a.as_ref().unwrap(), bie.s_a.as_ref().unwrap());
    let (ss_oe, ss_bie) = (oe.s_s.as_ref().unwrap(), bie.s_s.as_ref().unwrap());
    // the two formulations use opposite orientations for the antisymmetric part
    assert!(rel(sa_oe, sa_bie, -1.0) < 0.05, "{}", rel(sa_oe, sa_bie, -1.0));
    assert!(rel(sa_oe, sa_bie, 1.0) > 1.5);
    assert!(rel(ss_oe, ss_bie, 1.0) < 1e-3, "{}", rel(ss_oe, ss_bie, 1.0));
}

#[test]
fn oe_symmetric_component_converges_to_reference() {
    let params = ProblemParams::reference();
    let grid = theta_grid(19, 5f64.to_radians()).unwrap();
    let (bie, _) = BieSolver::new(params, 256).unwrap().directivity(&grid, CaseSelection::Sym).unwrap();
    let reference = bie.s_s.unwrap();
    let errors: Vec<f64> = [50, 100, 200]
        .iter()
        .map(|&n| {
            let opts = OeOptions { mesh: MeshSpec { n, ..MeshSpec::default() }, ..OeOptions::default() };
            let s = OeSolver::for_cases(params, &opts, &[Case::Sym]).unwrap();
            let v = s.directivity(&grid, CaseSelection::Sym).unwrap().s_s.unwrap();
            let num: f64 = v.iter().zip(&reference).map(|(x, y)| (x - y).norm_sqr()).sum();
            (num / reference.iter().map(|y| y.norm_sqr()).sum::<f64>()).sqrt()
        })
        .collect();
    assert!(errors[1] < errors[0] && errors[2] < errors[1], "{errors:?}");
}
