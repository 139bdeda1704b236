//! Boundary vortex method: N-1 tangency conditions at the evaluation nodes plus
//! the total circulation constraint.

use crate::fields::{velocity_fullplane, BoundaryDensity, DensityMethod, VorticityField};
use crate::kernel_ops::{assemble, KernelMatrices};
use crate::linalg::{matvec, norm_inf, DenseLu};
use crate::norms::{l2, linf, mean};
use crate::{BoundaryCurve, BoundaryMesh, CurvePoint, Error, MeshFlavor, Result, Vec2};
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::f64::consts::PI;

#[derive(Clone, Debug)]
pub struct VortexSystem {
    /// rows 1..N-1: (L/N) B_{N-1,N}; row N: (1/N, ..., 1/N)
    pub matrix: DMatrix<f64>,
    /// rows 1..N-1: L f(s~_i); row N: gamma
    pub rhs: Vec<f64>,
    /// f(s~_i) = 2 pi u_P . n(x~_i) for i = 1..N-1
    pub tangency: Vec<f64>,
    pub gamma: f64,
    pub length: f64,
    pub nodes: Vec<CurvePoint>,
    pub eval_nodes: Vec<CurvePoint>,
}

/// Matrix of the vortex system built from assembled kernels.
pub fn vortex_matrix(km: &KernelMatrices) -> Result<DMatrix<f64>> {
    let n = km.n();
    let b = km.b_rect()?;
    let h = km.length / n as f64;
    let mut m = DMatrix::from_element(n, n, 1.0 / n as f64);
    for i in 0..n - 1 {
        for j in 0..n {
            m[(i, j)] = h * b[(i, j)];
        }
    }
    Ok(m)
}

/// f(s~_i) = 2 pi u_P . n(x~_i) on the first N-1 evaluation nodes.
pub fn tangency_data(eval_nodes: &[CurvePoint], omega: &VorticityField) -> Result<Vec<f64>> {
    let n = eval_nodes.len();
    eval_nodes[..n - 1]
        .par_iter()
        .map(|p| Ok(2.0 * PI * velocity_fullplane(omega, p.pos)?.dot(p.normal)))
        .collect()
}

fn assemble_rhs(tangency: &[f64], gamma: f64, length: f64) -> Vec<f64> {
    let mut rhs: Vec<f64> = tangency.iter().map(|f| length * f).collect();
    rhs.push(gamma);
    rhs
}

pub fn build_system(
    curve: &BoundaryCurve,
    mesh: &BoundaryMesh,
    omega: &VorticityField,
    gamma: f64,
) -> Result<VortexSystem> {
    if mesh.flavor != MeshFlavor::Vortex {
        return Err(Error::WrongFlavor { expected: "vortex" });
    }
    omega.validate_in(curve)?;
    let km = assemble(curve, mesh)?;
    let matrix = vortex_matrix(&km)?;
    let tangency = tangency_data(&km.eval_nodes, omega)?;
    let rhs = assemble_rhs(&tangency, gamma, curve.length());
    Ok(VortexSystem { matrix, rhs, tangency, gamma, length: curve.length(), nodes: km.nodes, eval_nodes: km.eval_nodes })
}

#[derive(Clone, Debug)]
pub struct VortexSolution {
    pub density: BoundaryDensity,
    /// ||M g - rhs||_inf / (||M||_inf ||g||_inf + ||rhs||_inf)
    pub relative_residual: f64,
    /// |<g> - gamma|
    pub mean_error: f64,
    pub condition: f64,
    /// ||g||_l2 / (||f||_linf + |gamma| + sqrt(N) |<f>|)
    pub est_l1_ratio: f64,
}

/// Residual tolerance of the post-solve check.
pub const RESIDUAL_TOL: f64 = 1e-10;

fn density_from(values: Vec<f64>, nodes: &[CurvePoint], gamma: f64) -> BoundaryDensity {
    BoundaryDensity {
        method: DensityMethod::Vortex,
        values,
        s: nodes.iter().map(|p| p.s).collect(),
        nodes: nodes.iter().map(|p| p.pos).collect(),
        gamma,
        hstar: None,
    }
}

pub fn solve(system: &VortexSystem) -> Result<VortexSolution> {
    let lu = DenseLu::factor(&system.matrix)?;
    finish(system, &lu)
}

fn finish(system: &VortexSystem, lu: &DenseLu) -> Result<VortexSolution> {
    let g = lu.solve(&system.rhs);
    let r = matvec(&system.matrix, &g);
    let res = r.iter().zip(&system.rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let denom = norm_inf(&system.matrix) * linf(&g) + linf(&system.rhs);
    let relative_residual = if denom > 0.0 { res / denom } else { res };
    let mean_error = (mean(&g) - system.gamma).abs();
    let n = g.len() as f64;
    let f = &system.tangency;
    let scale = linf(f) + system.gamma.abs() + n.sqrt() * mean(f).abs();
    let est_l1_ratio = if scale > 0.0 { l2(&g) / scale } else { 0.0 };
    Ok(VortexSolution {
        density: density_from(g, &system.nodes, system.gamma),
        relative_residual,
        mean_error,
        condition: lu.condition_estimate(),
        est_l1_ratio,
    })
}

/// Factored vortex system for repeated solves on a fixed mesh.
#[derive(Clone, Debug)]
pub struct VortexSolver {
    matrix: DMatrix<f64>,
    lu: DenseLu,
    length: f64,
    nodes: Vec<CurvePoint>,
    eval_nodes: Vec<CurvePoint>,
}

impl VortexSolver {
    pub fn new(curve: &BoundaryCurve, mesh: &BoundaryMesh) -> Result<Self> {
        if mesh.flavor != MeshFlavor::Vortex {
            return Err(Error::WrongFlavor { expected: "vortex" });
        }
        let km = assemble(curve, mesh)?;
        let matrix = vortex_matrix(&km)?;
        let lu = DenseLu::factor(&matrix)?;
        Ok(VortexSolver { matrix, lu, length: curve.length(), nodes: km.nodes, eval_nodes: km.eval_nodes })
    }

    pub fn condition(&self) -> f64 {
        self.lu.condition_estimate()
    }

    pub fn eval_points(&self) -> Vec<Vec2> {
        self.eval_nodes.iter().map(|p| p.pos).collect()
    }

    pub fn solve(&self, omega: &VorticityField, gamma: f64) -> Result<BoundaryDensity> {
        let tangency = tangency_data(&self.eval_nodes, omega)?;
        let rhs = assemble_rhs(&tangency, gamma, self.length);
        Ok(density_from(self.lu.solve(&rhs), &self.nodes, gamma))
    }

    pub fn solve_full(&self, omega: &VorticityField, gamma: f64) -> Result<VortexSolution> {
        let tangency = tangency_data(&self.eval_nodes, omega)?;
        let rhs = assemble_rhs(&tangency, gamma, self.length);
        let system = VortexSystem {
            matrix: self.matrix.clone(),
            rhs,
            tangency,
            gamma,
            length: self.length,
            nodes: self.nodes.clone(),
            eval_nodes: self.eval_nodes.clone(),
        };
        finish(&system, &self.lu)
    }
}
