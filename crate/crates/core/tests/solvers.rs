use exvortex::charge_method::{build_charge_system, charge_matrix, dominance_margin, solve_charge, LambdaSpec};
use exvortex::experiments::{disk_error, solve_static, total_velocity, StaticProblem};
use exvortex::fields::{velocity_density, Blob, DensityMethod, HStarSpec, VorticityField};
use exvortex::kernel_ops::assemble;
use exvortex::mesh::{uniform_mesh, MeshSpec};
use exvortex::vortex_method::{build_system, solve};
use exvortex::{BoundaryCurve, CurveSpec, Error, MeshFlavor, Vec2};
use proptest::prelude::*;

fn circle() -> BoundaryCurve {
    BoundaryCurve::from_spec(CurveSpec::circle(1.0)).unwrap()
}

fn ellipse() -> BoundaryCurve {
    BoundaryCurve::from_spec(CurveSpec::ellipse(1.5, 1.0)).unwrap()
}

fn problem(curve: BoundaryCurve, n: usize, method: DensityMethod, blobs: Vec<Blob>, gamma: f64) -> StaticProblem {
    StaticProblem {
        curve,
        mesh: MeshSpec::uniform(n),
        omega: VorticityField::new(blobs),
        gamma,
        method,
        hstar: HStarSpec::DiskHarmonic,
        lambda: Some(LambdaSpec::Constant(0.5)),
    }
}

/// Image-vortex velocity outside the unit disk, written out directly.
fn image_velocity(blobs: &[Blob], gamma: f64, x: Vec2) -> Vec2 {
    let k = |d: Vec2| Vec2::new(-d.y, d.x) * (1.0 / (2.0 * std::f64::consts::PI * d.norm_sq()));
    let mut u = k(x) * gamma;
    for b in blobs {
        let img = b.center * (1.0 / b.center.norm_sq());
        u += (k(x - b.center) - k(x - img) + k(x)) * b.strength;
    }
    u
}

#[test]
fn vortex_system_is_solved_on_ellipse() {
    let c = ellipse();
    let mesh = uniform_mesh(&c, 64, MeshFlavor::Vortex).unwrap();
    let omega = VorticityField::new(vec![Blob::point(Vec2::new(2.5, 0.3), 1.0)]);
    let sol = solve(&build_system(&c, &mesh, &omega, 0.0).unwrap()).unwrap();
    assert!(sol.relative_residual < 1e-12);
    assert!(sol.mean_error < 1e-12);
    assert!(sol.condition.is_finite() && sol.condition >= 1.0);
}

#[test]
fn vortex_and_charge_agree_off_boundary() {
    let c = ellipse();
    let blobs = vec![Blob::point(Vec2::new(2.5, 0.5), 1.0), Blob::point(Vec2::new(-2.0, -1.5), -0.5)];
    let x = Vec2::new(0.0, 3.0);
    let v = solve_static(&problem(c.clone(), 256, DensityMethod::Vortex, blobs.clone(), 0.4)).unwrap();
    let q = solve_static(&problem(c, 256, DensityMethod::Charge, blobs.clone(), 0.4)).unwrap();
    let omega = VorticityField::new(blobs);
    let uv = total_velocity(&v.density, &omega, x).unwrap();
    let uq = total_velocity(&q.density, &omega, x).unwrap();
    assert!((uv - uq).norm() < 1e-6, "{:?} {:?}", uv, uq);
}

#[test]
fn lambda_variant_matches_basic_far_field() {
    let blobs = vec![Blob::point(Vec2::new(2.0, 0.0), 1.0)];
    let pts = [Vec2::new(3.0, 1.0), Vec2::new(-2.0, 2.0)];
    let p = problem(circle(), 128, DensityMethod::ChargeLambda, blobs, 0.0);
    let o = solve_static(&p).unwrap();
    assert!(o.rank_one_discrepancy.unwrap() < 1e-6);
    assert!(disk_error(&p, &o.density, &pts).unwrap() < 1e-8);
}

#[test]
fn lambda_mass_at_two_pi_is_rejected() {
    let c = circle();
    let mesh = uniform_mesh(&c, 32, MeshFlavor::Charge).unwrap();
    let r = build_charge_system(&c, &mesh, &VorticityField::empty(), 0.0, HStarSpec::DiskHarmonic, Some(&LambdaSpec::Constant(1.0)));
    assert!(matches!(r, Err(Error::LambdaMeanNearTwoPi { .. })));
}

#[test]
fn charge_on_vortex_mesh_is_rejected() {
    let c = circle();
    let mesh = uniform_mesh(&c, 16, MeshFlavor::Vortex).unwrap();
    let r = build_charge_system(&c, &mesh, &VorticityField::empty(), 0.0, HStarSpec::DiskHarmonic, None);
    assert!(matches!(r, Err(Error::WrongFlavor { .. })));
}

#[test]
fn charge_density_integrates_to_zero() {
    let c = ellipse();
    let mesh = uniform_mesh(&c, 64, MeshFlavor::Charge).unwrap();
    let omega = VorticityField::new(vec![Blob::point(Vec2::new(0.0, 2.0), 1.0)]);
    let sys = build_charge_system(&c, &mesh, &omega, 0.7, HStarSpec::DiskHarmonic, None).unwrap();
    let sol = solve_charge(&sys).unwrap();
    assert!(sys.rhs_mean().abs() < 1e-12);
    assert!(sol.density.mean().abs() < 1e-10);
    assert!(velocity_density(&sol.density, Vec2::new(10.0, 0.0)).unwrap().norm() < 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn disk_solvers_match_image_vortices(
        r in 1.6f64..3.0,
        phi in 0.0f64..std::f64::consts::TAU,
        strength in -2.0f64..2.0,
        gamma in -1.0f64..1.0,
        charge in any::<bool>(),
    ) {
        let blobs = vec![Blob::point(Vec2::new(r * phi.cos(), r * phi.sin()), strength)];
        let method = if charge { DensityMethod::Charge } else { DensityMethod::Vortex };
        let p = problem(circle(), 128, method, blobs.clone(), gamma);
        let o = solve_static(&p).unwrap();
        let omega = VorticityField::new(blobs.clone());
        for k in 0..6 {
            let t = k as f64 * 1.1 + 0.2;
            let x = Vec2::new(4.0 * t.cos(), 4.0 * t.sin());
            let u = total_velocity(&o.density, &omega, x).unwrap();
            prop_assert!((u - image_velocity(&blobs, gamma, x)).norm() < 1e-7);
        }
    }

    #[test]
    fn circle_charge_matrix_is_dominant(n in 4usize..80) {
        let c = circle();
        let mesh = uniform_mesh(&c, n, MeshFlavor::Charge).unwrap();
        let rep = dominance_margin(&charge_matrix(&assemble(&c, &mesh).unwrap()));
        prop_assert!(rep.strictly_dominant);
        prop_assert!((rep.min_margin - 1.0 / n as f64).abs() < 1e-10);
    }

    #[test]
    fn vortex_mean_equals_gamma(gamma in -3.0f64..3.0, n in 8usize..48) {
        let c = ellipse();
        let mesh = uniform_mesh(&c, n, MeshFlavor::Vortex).unwrap();
        let omega = VorticityField::new(vec![Blob::point(Vec2::new(0.0, 2.2), 0.8)]);
        let sol = solve(&build_system(&c, &mesh, &omega, gamma).unwrap()).unwrap();
        prop_assert!((sol.density.mean() - gamma).abs() < 1e-10);
    }
}
