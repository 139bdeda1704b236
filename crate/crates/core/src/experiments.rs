//! Static solves and convergence sweeps shared by the command line and the test suites.

use crate::charge_method::{build_charge_system, solve_charge, LambdaSpec};
use crate::fields::{eval_batch, velocity_density, velocity_fullplane, BoundaryDensity, DensityMethod, HStarSpec, VorticityField};
use crate::fit::{fit_with_floor, OrderFit};
use crate::mesh::MeshSpec;
use crate::oracle::{exact_disk_velocity, DiskExactSolution, ROUNDOFF_FLOOR};
use crate::vortex_method::{build_system, solve};
use crate::{BoundaryCurve, Error, MeshFlavor, Result, Vec2};

#[derive(Clone, Debug)]
pub struct StaticProblem {
    pub curve: BoundaryCurve,
    pub mesh: MeshSpec,
    pub omega: VorticityField,
    pub gamma: f64,
    pub method: DensityMethod,
    pub hstar: HStarSpec,
    pub lambda: Option<LambdaSpec>,
}

#[derive(Clone, Debug)]
pub struct StaticOutcome {
    pub density: BoundaryDensity,
    pub relative_residual: f64,
    pub condition: f64,
    /// |<g> - gamma| for the vortex method
    pub mean_error: Option<f64>,
    pub rank_one_discrepancy: Option<f64>,
    /// <f> for the charge methods
    pub rhs_mean: Option<f64>,
}

impl StaticProblem {
    pub fn flavor(&self) -> MeshFlavor {
        match self.method {
            DensityMethod::Vortex => MeshFlavor::Vortex,
            DensityMethod::Charge | DensityMethod::ChargeLambda => MeshFlavor::Charge,
        }
    }

    pub fn with_n(&self, n: usize) -> StaticProblem {
        StaticProblem { mesh: self.mesh.with_n(n), ..self.clone() }
    }
}

pub fn solve_static(p: &StaticProblem) -> Result<StaticOutcome> {
    let mesh = p.mesh.build(&p.curve, p.flavor())?;
    match p.method {
        DensityMethod::Vortex => {
            let sol = solve(&build_system(&p.curve, &mesh, &p.omega, p.gamma)?)?;
            Ok(StaticOutcome {
                density: sol.density,
                relative_residual: sol.relative_residual,
                condition: sol.condition,
                mean_error: Some(sol.mean_error),
                rank_one_discrepancy: None,
                rhs_mean: None,
            })
        }
        DensityMethod::Charge | DensityMethod::ChargeLambda => {
            let lambda = match p.method {
                DensityMethod::ChargeLambda => Some(
                    p.lambda.as_ref().ok_or_else(|| Error::InvalidArgument("charge_lambda needs a lambda spec".into()))?,
                ),
                _ => None,
            };
            let sys = build_charge_system(&p.curve, &mesh, &p.omega, p.gamma, p.hstar, lambda)?;
            let sol = solve_charge(&sys)?;
            Ok(StaticOutcome {
                density: sol.density,
                relative_residual: sol.relative_residual,
                condition: sol.condition,
                mean_error: None,
                rank_one_discrepancy: sol.rank_one_discrepancy,
                rhs_mean: Some(sys.rhs_mean()),
            })
        }
    }
}

/// u_app + u_P at x.
pub fn total_velocity(density: &BoundaryDensity, omega: &VorticityField, x: Vec2) -> Result<Vec2> {
    Ok(velocity_density(density, x)? + velocity_fullplane(omega, x)?)
}

/// max over points of |u_app + u_P - u_exact| on a circle obstacle.
pub fn disk_error(p: &StaticProblem, density: &BoundaryDensity, points: &[Vec2]) -> Result<f64> {
    let exact = DiskExactSolution::for_curve(&p.curve, p.omega.blobs.clone(), p.gamma)?;
    let errs = eval_batch(points, |x| Ok(total_velocity(density, &p.omega, x)? - exact_disk_velocity(&exact, x)?))?;
    Ok(errs.iter().map(|e| e.norm()).fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StaticConvergence {
    pub ns: Vec<usize>,
    pub errors: Vec<f64>,
    /// slope of the first k+1 points, k = 0..
    pub slopes_so_far: Vec<Option<f64>>,
    pub fit: OrderFit,
}

/// Disk error for each N in `n_list`; at least three values are needed for the fit.
pub fn static_convergence(p: &StaticProblem, n_list: &[usize], points: &[Vec2]) -> Result<StaticConvergence> {
    if n_list.len() < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: n_list.len() });
    }
    let errors = n_list
        .iter()
        .map(|&n| {
            let q = p.with_n(n);
            let out = solve_static(&q)?;
            disk_error(&q, &out.density, points)
        })
        .collect::<Result<Vec<f64>>>()?;
    let nf: Vec<f64> = n_list.iter().map(|&n| n as f64).collect();
    let slopes_so_far = (0..n_list.len()).map(|k| fit_with_floor(&nf[..=k], &errors[..=k], ROUNDOFF_FLOOR).slope).collect();
    Ok(StaticConvergence { ns: n_list.to_vec(), fit: fit_with_floor(&nf, &errors, ROUNDOFF_FLOOR), errors, slopes_so_far })
}
