//! Blob transport: RK4 on blob positions with the boundary density re-solved at
//! every stage.

use crate::charge_method::{ChargeSolver, LambdaSpec};
use crate::fields::{
    point_kernel, velocity_charge, velocity_fullplane_excluding, velocity_vortex_sheet, Blob, HStarSpec,
    VorticityField,
};
use crate::fit::{fit_with_floor, OrderFit};
use crate::mesh::MeshSpec;
use crate::oracle::{exact_disk_advection, DiskExactSolution, ROUNDOFF_FLOOR};
use crate::vortex_method::VortexSolver;
use crate::{BoundaryCurve, Error, MeshFlavor, Result, Vec2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Collision distance as a fraction of the boundary length.
pub const COLLISION_FRACTION: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicsMethod {
    Vortex,
    Charge,
    ChargeLambda,
    ExactDisk,
    /// no obstacle
    FreeSpace,
}

impl DynamicsMethod {
    pub fn name(self) -> &'static str {
        match self {
            DynamicsMethod::Vortex => "vortex",
            DynamicsMethod::Charge => "charge",
            DynamicsMethod::ChargeLambda => "charge_lambda",
            DynamicsMethod::ExactDisk => "exact_disk",
            DynamicsMethod::FreeSpace => "free_space",
        }
    }
}

#[derive(Clone, Debug)]
pub struct DynamicsSetup {
    pub method: DynamicsMethod,
    pub curve: Option<BoundaryCurve>,
    pub mesh: Option<MeshSpec>,
    pub gamma: f64,
    pub hstar: HStarSpec,
    pub lambda: Option<LambdaSpec>,
}

impl DynamicsSetup {
    pub fn new(method: DynamicsMethod, curve: Option<BoundaryCurve>, mesh: Option<MeshSpec>, gamma: f64) -> Self {
        DynamicsSetup { method, curve, mesh, gamma, hstar: HStarSpec::DiskHarmonic, lambda: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationState {
    pub blobs: Vec<Blob>,
    pub t: f64,
}

impl SimulationState {
    pub fn new(blobs: Vec<Blob>) -> Self {
        SimulationState { blobs, t: 0.0 }
    }

    pub fn positions(&self) -> Vec<Vec2> {
        self.blobs.iter().map(|b| b.center).collect()
    }

    pub fn total_circulation(&self) -> f64 {
        self.blobs.iter().map(|b| b.strength).sum()
    }
}

#[derive(Clone, Debug)]
enum Boundary {
    Vortex(VortexSolver),
    Charge(ChargeSolver),
    ExactDisk { center: Vec2, radius: f64 },
    FreeSpace,
}

/// Fixed-step integrator for one setup. Solvers are factored once.
#[derive(Clone, Debug)]
pub struct Simulation {
    method: DynamicsMethod,
    curve: Option<BoundaryCurve>,
    boundary: Boundary,
    gamma: f64,
    direction: f64,
}

impl Simulation {
    pub fn new(setup: &DynamicsSetup) -> Result<Self> {
        let need_curve = || {
            setup.curve.clone().ok_or_else(|| Error::InvalidArgument(format!("{} needs a curve", setup.method.name())))
        };
        let need_mesh = || {
            setup.mesh.ok_or_else(|| Error::InvalidArgument(format!("{} needs a mesh", setup.method.name())))
        };
        let (curve, boundary) = match setup.method {
            DynamicsMethod::Vortex => {
                let c = need_curve()?;
                let mesh = need_mesh()?.build(&c, MeshFlavor::Vortex)?;
                let b = Boundary::Vortex(VortexSolver::new(&c, &mesh)?);
                (Some(c), b)
            }
            DynamicsMethod::Charge | DynamicsMethod::ChargeLambda => {
                let c = need_curve()?;
                let mesh = need_mesh()?.build(&c, MeshFlavor::Charge)?;
                let lambda = match setup.method {
                    DynamicsMethod::ChargeLambda => Some(
                        setup
                            .lambda
                            .as_ref()
                            .ok_or_else(|| Error::InvalidArgument("charge_lambda needs a lambda spec".into()))?,
                    ),
                    _ => None,
                };
                let b = Boundary::Charge(ChargeSolver::new(&c, &mesh, setup.hstar, lambda)?);
                (Some(c), b)
            }
            DynamicsMethod::ExactDisk => {
                let c = need_curve()?;
                let probe = DiskExactSolution::for_curve(&c, vec![], 0.0)?;
                let b = Boundary::ExactDisk { center: probe.center, radius: probe.radius };
                (Some(c), b)
            }
            DynamicsMethod::FreeSpace => (None, Boundary::FreeSpace),
        };
        Ok(Simulation { method: setup.method, curve, boundary, gamma: setup.gamma, direction: 1.0 })
    }

    pub fn method(&self) -> DynamicsMethod {
        self.method
    }

    pub fn curve(&self) -> Option<&BoundaryCurve> {
        self.curve.as_ref()
    }

    /// Same dynamics with every velocity negated.
    pub fn reversed(&self) -> Simulation {
        Simulation { direction: -self.direction, ..self.clone() }
    }

    pub fn collision_tol(&self) -> f64 {
        self.curve.as_ref().map_or(0.0, |c| COLLISION_FRACTION * c.length())
    }

    /// Distance of each blob to the boundary; empty without an obstacle.
    pub fn boundary_distances(&self, blobs: &[Blob]) -> Vec<f64> {
        match (&self.boundary, &self.curve) {
            (Boundary::FreeSpace, _) | (_, None) => vec![],
            (Boundary::ExactDisk { center, radius }, _) => {
                blobs.iter().map(|b| (b.center - *center).norm() - radius).collect()
            }
            (_, Some(c)) => blobs
                .par_iter()
                .map(|b| {
                    let d = c.distance_to(b.center).0;
                    if c.is_inside_obstacle(b.center) {
                        -d
                    } else {
                        d
                    }
                })
                .collect(),
        }
    }

    fn check_collision(&self, blobs: &[Blob], t: f64) -> Result<f64> {
        let tol = self.collision_tol();
        let d = self.boundary_distances(blobs);
        let mut min = f64::INFINITY;
        for (blob, &distance) in d.iter().enumerate() {
            if distance < tol {
                return Err(Error::BoundaryCollision { blob, t, distance });
            }
            min = min.min(distance);
        }
        Ok(min)
    }

    /// Advection velocity of every blob for the given configuration.
    pub fn velocities(&self, blobs: &[Blob]) -> Result<Vec<Vec2>> {
        let omega = VorticityField::new(blobs.to_vec());
        let idx: Vec<usize> = (0..blobs.len()).collect();
        let u: Result<Vec<Vec2>> = match &self.boundary {
            Boundary::FreeSpace => {
                idx.par_iter().map(|&k| velocity_fullplane_excluding(&omega, blobs[k].center, k)).collect()
            }
            Boundary::ExactDisk { center, radius } => {
                let sol = DiskExactSolution::with_disk(*center, *radius, blobs.to_vec(), self.gamma)?;
                idx.par_iter().map(|&k| exact_disk_advection(&sol, k)).collect()
            }
            Boundary::Vortex(solver) => {
                let density = solver.solve(&omega, self.gamma)?;
                idx.par_iter()
                    .map(|&k| {
                        let y = blobs[k].center;
                        Ok(velocity_fullplane_excluding(&omega, y, k)? + velocity_vortex_sheet(&density, y)?)
                    })
                    .collect()
            }
            Boundary::Charge(solver) => {
                let density = solver.solve(&omega, self.gamma)?;
                idx.par_iter()
                    .map(|&k| {
                        let y = blobs[k].center;
                        Ok(velocity_fullplane_excluding(&omega, y, k)? + velocity_charge(&density, y)?)
                    })
                    .collect()
            }
        };
        let d = self.direction;
        Ok(u?.into_iter().map(|v| v * d).collect())
    }

    fn shifted(blobs: &[Blob], k: &[Vec2], h: f64) -> Vec<Blob> {
        blobs.iter().zip(k).map(|(b, v)| Blob { center: b.center + *v * h, ..*b }).collect()
    }

    /// One classical RK4 step of size h.
    pub fn step(&self, state: &SimulationState, h: f64) -> Result<SimulationState> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("step size must be positive, got {h}")));
        }
        self.check_collision(&state.blobs, state.t)?;
        let b0 = &state.blobs;
        let k1 = self.velocities(b0)?;
        let b1 = Self::shifted(b0, &k1, 0.5 * h);
        self.check_collision(&b1, state.t + 0.5 * h)?;
        let k2 = self.velocities(&b1)?;
        let b2 = Self::shifted(b0, &k2, 0.5 * h);
        self.check_collision(&b2, state.t + 0.5 * h)?;
        let k3 = self.velocities(&b2)?;
        let b3 = Self::shifted(b0, &k3, h);
        self.check_collision(&b3, state.t + h)?;
        let k4 = self.velocities(&b3)?;
        let blobs: Vec<Blob> = b0
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let v = (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (1.0 / 6.0);
                Blob { center: b.center + v * h, ..*b }
            })
            .collect();
        let next = SimulationState { blobs, t: state.t + h };
        self.check_collision(&next.blobs, next.t)?;
        Ok(next)
    }

    fn diagnostics(&self, state: &SimulationState, mass0: f64) -> Diagnostics {
        let d = self.boundary_distances(&state.blobs);
        let center = match &self.boundary {
            Boundary::ExactDisk { center, .. } => *center,
            _ => self.curve.as_ref().map_or(Vec2::ZERO, |c| c.spec().center()),
        };
        let mass = state.total_circulation();
        Diagnostics {
            t: state.t,
            total_circulation: mass,
            circulation_drift: (mass - mass0).abs(),
            min_boundary_distance: d.iter().cloned().fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v)))),
            radii: state.blobs.iter().map(|b| (b.center - center).norm()).collect(),
            free_space_energy: match self.boundary {
                Boundary::FreeSpace => Some(free_space_energy(&state.blobs)),
                _ => None,
            },
        }
    }

    /// Integrates to t_end, keeping every `output_every`-th state and the last one.
    pub fn run(&self, initial: &SimulationState, t_end: f64, h: f64, output_every: usize) -> Result<Trajectory> {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::InvalidArgument(format!("t_end must be positive, got {t_end}")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("step size must be positive, got {h}")));
        }
        if output_every == 0 {
            return Err(Error::InvalidArgument("output_every must be at least 1".into()));
        }
        if let Some(c) = &self.curve {
            VorticityField::new(initial.blobs.clone()).validate_in(c)?;
        }
        let steps = ((t_end / h) - 1e-9).ceil().max(1.0) as usize;
        let mass0 = initial.total_circulation();
        let t0 = initial.t;
        let mut state = initial.clone();
        let mut snapshots = vec![state.clone()];
        let mut diagnostics = vec![self.diagnostics(&state, mass0)];
        let mut max_radius_drift = 0.0f64;
        let r0 = diagnostics[0].radii.clone();
        for k in 1..=steps {
            let target = t0 + (k as f64 * h).min(t_end);
            let dt = if k == steps { t0 + t_end - state.t } else { target - state.t };
            let mut next = self.step(&state, dt)?;
            if k == steps {
                next.t = t0 + t_end;
            }
            state = next;
            let diag = self.diagnostics(&state, mass0);
            for (a, b) in diag.radii.iter().zip(&r0) {
                max_radius_drift = max_radius_drift.max((a - b).abs());
            }
            if k % output_every == 0 || k == steps {
                snapshots.push(state.clone());
                diagnostics.push(diag);
            }
        }
        let circulation_drift = (state.total_circulation() - mass0).abs();
        assert!(circulation_drift == 0.0, "blob strengths changed during transport");
        Ok(Trajectory { method: self.method, h, snapshots, diagnostics, max_radius_drift, circulation_drift })
    }
}

/// -(1/4 pi) sum_{i != j} s_i s_j log |y_i - y_j|
pub fn free_space_energy(blobs: &[Blob]) -> f64 {
    let mut e = 0.0;
    for i in 0..blobs.len() {
        for j in 0..blobs.len() {
            if i != j {
                e -= blobs[i].strength * blobs[j].strength * (blobs[i].center - blobs[j].center).norm().ln();
            }
        }
    }
    e / (4.0 * PI)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub t: f64,
    pub total_circulation: f64,
    pub circulation_drift: f64,
    /// None without an obstacle
    pub min_boundary_distance: Option<f64>,
    /// |y_k - c| with c the obstacle center (origin in free space)
    pub radii: Vec<f64>,
    pub free_space_energy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub method: DynamicsMethod,
    pub h: f64,
    pub snapshots: Vec<SimulationState>,
    pub diagnostics: Vec<Diagnostics>,
    /// max over steps and blobs of ||y(t)| - |y(0)||
    pub max_radius_drift: f64,
    pub circulation_drift: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &SimulationState {
        self.snapshots.last().expect("trajectory has the initial state")
    }

    /// max over shared snapshots and blobs of the position difference.
    pub fn sup_distance(&self, other: &Trajectory) -> Result<f64> {
        if self.snapshots.len() != other.snapshots.len() {
            return Err(Error::InvalidArgument("trajectories have different snapshot counts".into()));
        }
        let mut d = 0.0f64;
        for (a, b) in self.snapshots.iter().zip(&other.snapshots) {
            if (a.t - b.t).abs() > 1e-9 * a.t.abs().max(1.0) || a.blobs.len() != b.blobs.len() {
                return Err(Error::InvalidArgument("trajectories are not aligned".into()));
            }
            for (p, q) in a.blobs.iter().zip(&b.blobs) {
                d = d.max((p.center - q.center).norm());
            }
        }
        Ok(d)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    /// sup over time and blobs of the position error against the exact run
    pub sup_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    pub fit: OrderFit,
}

/// Trajectory errors against the exact disk flow for each mesh size.
pub fn dynamic_convergence_study(
    setup: &DynamicsSetup,
    initial: &SimulationState,
    n_list: &[usize],
    t_end: f64,
    h: f64,
) -> Result<ConvergenceStudy> {
    if n_list.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n_list.len() });
    }
    let base_mesh = setup.mesh.ok_or_else(|| Error::InvalidArgument("study needs a mesh".into()))?;
    let exact = DynamicsSetup { method: DynamicsMethod::ExactDisk, ..setup.clone() };
    let reference = Simulation::new(&exact)?.run(initial, t_end, h, 1)?;
    let rows = n_list
        .iter()
        .map(|&n| {
            let s = DynamicsSetup { mesh: Some(base_mesh.with_n(n)), ..setup.clone() };
            let traj = Simulation::new(&s)?.run(initial, t_end, h, 1)?;
            Ok(ConvergenceRow { n, sup_error: traj.sup_distance(&reference)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let es: Vec<f64> = rows.iter().map(|r| r.sup_error).collect();
    Ok(ConvergenceStudy { fit: fit_with_floor(&ns, &es, ROUNDOFF_FLOOR), rows })
}

/// Velocity of a free point vortex pair; used to cross-check the free-space path.
pub fn pair_velocity(a: &Blob, b: &Blob) -> Result<(Vec2, Vec2)> {
    Ok((point_kernel(a.center - b.center)? * b.strength, point_kernel(b.center - a.center)? * a.strength))
}
