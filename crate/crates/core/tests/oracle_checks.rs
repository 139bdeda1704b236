use exvortex::mesh::{perturbed_mesh, uniform_mesh};
use exvortex::oracle::{plemelj_check, riemann_harness, riemann_sum};
use exvortex::{BoundaryCurve, CurveSpec, MeshFlavor};
use proptest::prelude::*;
use std::f64::consts::PI;

fn ellipse() -> BoundaryCurve {
    BoundaryCurve::from_spec(CurveSpec::ellipse(2.0, 1.0)).unwrap()
}

#[test]
fn plemelj_jump_on_ellipse() {
    let c = ellipse();
    let l = c.length();
    let g = move |s: f64| 1.0 + 0.5 * (2.0 * PI * s / l).cos() + 0.3 * (6.0 * PI * s / l).sin();
    let table = plemelj_check(&c, &g, 0.37 * l, &[1e-2, 1e-3]).unwrap();
    let last = table.rows.last().unwrap();
    assert!(last.jump_error < 0.02 * g(0.37 * l).abs(), "{}", last.jump_error);
    assert!(last.tangential_out_error < 0.02 && last.normal_out_error < 0.02);
    assert!(table.rows[1].jump_error <= table.rows[0].jump_error);
}

#[test]
fn riemann_sums_converge_on_perturbed_meshes() {
    let c = ellipse();
    let l = c.length();
    let g = move |s: f64| (2.0 * PI * s / l).sin().exp();
    let ens: Vec<Vec<_>> = [16, 32, 64, 128]
        .iter()
        .map(|&n| (0..8u64).map(|seed| perturbed_mesh(&c, n, MeshFlavor::Charge, 2, 1.0, seed).unwrap()).collect())
        .collect();
    let rep = riemann_harness(&g, &ens).unwrap();
    assert!(rep.errors.windows(2).all(|w| w[1] < w[0]));
    assert!(rep.fit.slope.unwrap() < -1.5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn uniform_riemann_sum_is_exact_for_low_modes(k in 1i32..6, n in 16usize..64) {
        let c = ellipse();
        let l = c.length();
        let m = uniform_mesh(&c, n, MeshFlavor::Vortex).unwrap();
        let g = move |s: f64| 2.0 + (2.0 * PI * k as f64 * s / l).cos();
        prop_assert!((riemann_sum(&m, &g) - 2.0 * l).abs() < 1e-10);
    }
}
