//! Fluid charge method: ((1/N) A_N + pi/L) g = f and its lambda-corrected variant,
//! with conditioning diagnostics.

use crate::fields::{
    harmonic_field, velocity_fullplane, BoundaryDensity, DensityMethod, HStarSpec, VorticityField,
};
use crate::kernel_ops::{a_kernel, assemble, KernelMatrices};
use crate::linalg::{matvec, norm_inf, DenseLu};
use crate::norms::{linf, mean};
use crate::{BoundaryCurve, BoundaryMesh, CurvePoint, Error, MeshFlavor, Result, Vec2};
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Boundary samples used for sup/inf of the kernel.
pub const KERNEL_SAMPLES: usize = 2048;

/// Largest allowed disagreement between the direct and rank-one lambda solutions.
pub const RANK_ONE_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub enum LambdaSpec {
    Constant(f64),
    /// (1 - sigma) sup_y K(x, y) + sigma inf_y K(x, y)
    Sigma(f64),
    /// values at the evaluation nodes
    Tabulated(Vec<f64>),
}

impl fmt::Display for LambdaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaSpec::Constant(c) => write!(f, "const:{c}"),
            LambdaSpec::Sigma(s) => write!(f, "sigma:{s}"),
            LambdaSpec::Tabulated(v) => write!(f, "tabulated[{}]", v.len()),
        }
    }
}

impl FromStr for LambdaSpec {
    type Err = String;

    /// `const:c` or `sigma:s`
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let num = |r: &str| r.trim().parse::<f64>().map_err(|e| format!("bad number '{r}': {e}"));
        if let Some(r) = s.strip_prefix("const:") {
            return Ok(LambdaSpec::Constant(num(r)?));
        }
        if let Some(r) = s.strip_prefix("sigma:") {
            let v = num(r)?;
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("sigma must lie in [0, 1], got {v}"));
            }
            return Ok(LambdaSpec::Sigma(v));
        }
        Err(format!("expected 'const:c' or 'sigma:s', got '{s}'"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChargeVariant {
    Basic,
    Lambda,
}

#[derive(Clone, Debug)]
pub struct ChargeSystem {
    pub variant: ChargeVariant,
    /// (1/N) A_N + pi/L, minus lambda 1^T / N for the lambda variant
    pub matrix: DMatrix<f64>,
    /// (1/N) A_N + pi/L
    pub base: DMatrix<f64>,
    /// f(s~_i) = -2 pi (u_P + gamma H*) . n(x~_i)
    pub rhs: Vec<f64>,
    pub lambda_values: Option<Vec<f64>>,
    pub hstar: HStarSpec,
    pub gamma: f64,
    pub length: f64,
    pub nodes: Vec<CurvePoint>,
    pub eval_nodes: Vec<CurvePoint>,
}

impl ChargeSystem {
    /// L <lambda^N>, which must stay away from 2 pi.
    pub fn lambda_mass(&self) -> Option<f64> {
        self.lambda_values.as_ref().map(|l| self.length * mean(l))
    }

    pub fn rhs_mean(&self) -> f64 {
        mean(&self.rhs)
    }
}

/// (1/N) A_N + (pi/L) I
pub fn charge_matrix(km: &KernelMatrices) -> DMatrix<f64> {
    let n = km.n();
    let mut m = &km.a * (1.0 / n as f64);
    for i in 0..n {
        m[(i, i)] += PI / km.length;
    }
    m
}

fn with_lambda(base: &DMatrix<f64>, lambda: &[f64]) -> DMatrix<f64> {
    let n = base.nrows();
    let mut m = base.clone();
    for i in 0..n {
        let li = lambda[i] / n as f64;
        for j in 0..n {
            m[(i, j)] -= li;
        }
    }
    m
}

/// sup_y and inf_y of K(x, y) over `samples` boundary points, for each x.
pub fn kernel_extremes(curve: &BoundaryCurve, xs: &[CurvePoint], samples: usize) -> Vec<(f64, f64)> {
    let ys = sample_curve(curve, samples);
    xs.par_iter()
        .map(|x| {
            ys.iter().fold((f64::NEG_INFINITY, f64::INFINITY), |(hi, lo), y| {
                let k = a_kernel(curve, x, y);
                (hi.max(k), lo.min(k))
            })
        })
        .collect()
}

fn sample_curve(curve: &BoundaryCurve, m: usize) -> Vec<CurvePoint> {
    let l = curve.length();
    let s: Vec<f64> = (0..m).map(|k| l * k as f64 / m as f64).collect();
    s.par_iter().map(|&si| curve.point_at(si)).collect()
}

pub fn lambda_values(curve: &BoundaryCurve, eval_nodes: &[CurvePoint], spec: &LambdaSpec) -> Result<Vec<f64>> {
    let n = eval_nodes.len();
    match spec {
        LambdaSpec::Constant(c) => Ok(vec![*c; n]),
        LambdaSpec::Tabulated(v) => {
            if v.len() != n {
                return Err(Error::InvalidArgument(format!("{} tabulated lambda values for N = {n}", v.len())));
            }
            Ok(v.clone())
        }
        LambdaSpec::Sigma(sigma) => {
            if !(0.0..=1.0).contains(sigma) {
                return Err(Error::InvalidArgument(format!("sigma must lie in [0, 1], got {sigma}")));
            }
            Ok(kernel_extremes(curve, eval_nodes, KERNEL_SAMPLES)
                .into_iter()
                .map(|(hi, lo)| (1.0 - sigma) * hi + sigma * lo)
                .collect())
        }
    }
}

/// f(s~_i) = -2 pi (u_P + gamma H*)(x~_i) . n(x~_i)
pub fn charge_rhs(
    eval_nodes: &[CurvePoint],
    omega: &VorticityField,
    gamma: f64,
    hstar: &HStarSpec,
) -> Result<Vec<f64>> {
    eval_nodes
        .par_iter()
        .map(|p| {
            let mut u = velocity_fullplane(omega, p.pos)?;
            if gamma != 0.0 {
                u += harmonic_field(hstar, p.pos)? * gamma;
            }
            Ok(-2.0 * PI * u.dot(p.normal))
        })
        .collect()
}

fn check_lambda(length: f64, lambda: &[f64]) -> Result<()> {
    let value = length * mean(lambda);
    if (value - 2.0 * PI).abs() < 1e-6 {
        return Err(Error::LambdaMeanNearTwoPi { value });
    }
    Ok(())
}

pub fn build_charge_system(
    curve: &BoundaryCurve,
    mesh: &BoundaryMesh,
    omega: &VorticityField,
    gamma: f64,
    hstar: HStarSpec,
    lambda: Option<&LambdaSpec>,
) -> Result<ChargeSystem> {
    if mesh.flavor != MeshFlavor::Charge {
        return Err(Error::WrongFlavor { expected: "charge" });
    }
    omega.validate_in(curve)?;
    hstar.validate_in(curve)?;
    let km = assemble(curve, mesh)?;
    let base = charge_matrix(&km);
    let rhs = charge_rhs(&km.eval_nodes, omega, gamma, &hstar)?;
    let (variant, matrix, lambda_values) = match lambda {
        None => (ChargeVariant::Basic, base.clone(), None),
        Some(spec) => {
            let lam = lambda_values(curve, &km.eval_nodes, spec)?;
            check_lambda(curve.length(), &lam)?;
            (ChargeVariant::Lambda, with_lambda(&base, &lam), Some(lam))
        }
    };
    Ok(ChargeSystem {
        variant,
        matrix,
        base,
        rhs,
        lambda_values,
        hstar,
        gamma,
        length: curve.length(),
        nodes: km.nodes,
        eval_nodes: km.eval_nodes,
    })
}

#[derive(Clone, Debug)]
pub struct ChargeSolution {
    pub density: BoundaryDensity,
    pub relative_residual: f64,
    pub condition: f64,
    /// max |direct - rank-one| / max(1, ||direct||_inf), lambda variant only
    pub rank_one_discrepancy: Option<f64>,
}

fn density_from(system: &ChargeSystem, values: Vec<f64>) -> BoundaryDensity {
    BoundaryDensity {
        method: match system.variant {
            ChargeVariant::Basic => DensityMethod::Charge,
            ChargeVariant::Lambda => DensityMethod::ChargeLambda,
        },
        values,
        s: system.nodes.iter().map(|p| p.s).collect(),
        nodes: system.nodes.iter().map(|p| p.pos).collect(),
        gamma: system.gamma,
        hstar: Some(system.hstar),
    }
}

/// z = M0^-1 (v + <z> lambda) with <z> = <M0^-1 v> / (1 - <M0^-1 lambda>).
pub fn rank_one_solve(base_lu: &DenseLu, v: &[f64], lambda: &[f64]) -> Vec<f64> {
    let z0 = base_lu.solve(v);
    let w = base_lu.solve(lambda);
    let zm = mean(&z0) / (1.0 - mean(&w));
    z0.iter().zip(&w).map(|(a, b)| a + zm * b).collect()
}

pub fn solve_charge(system: &ChargeSystem) -> Result<ChargeSolution> {
    let lu = DenseLu::factor(&system.matrix)?;
    let g = lu.solve(&system.rhs);
    let r = matvec(&system.matrix, &g);
    let res = r.iter().zip(&system.rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let denom = norm_inf(&system.matrix) * linf(&g) + linf(&system.rhs);
    let relative_residual = if denom > 0.0 { res / denom } else { res };
    let rank_one_discrepancy = match &system.lambda_values {
        None => None,
        Some(lam) => {
            let base_lu = DenseLu::factor(&system.base)?;
            let z = rank_one_solve(&base_lu, &system.rhs, lam);
            let d = z.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / linf(&g).max(1.0);
            if d > RANK_ONE_TOL {
                return Err(Error::RankOneMismatch(d));
            }
            Some(d)
        }
    };
    Ok(ChargeSolution {
        density: density_from(system, g),
        relative_residual,
        condition: lu.condition_estimate(),
        rank_one_discrepancy,
    })
}

pub fn condition_estimate(system: &ChargeSystem) -> Result<f64> {
    Ok(DenseLu::factor(&system.matrix)?.condition_estimate())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DominanceReport {
    /// |M_jj| - sum_{i != j} |M_ij| per column
    pub margins: Vec<f64>,
    pub min_margin: f64,
    pub strictly_dominant: bool,
}

pub fn dominance_margin(matrix: &DMatrix<f64>) -> DominanceReport {
    let margins: Vec<f64> = (0..matrix.ncols())
        .map(|j| {
            let col = matrix.column(j);
            let off: f64 = col.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, v)| v.abs()).sum();
            col[j].abs() - off
        })
        .collect();
    let min_margin = margins.iter().cloned().fold(f64::INFINITY, f64::min);
    DominanceReport { margins, min_margin, strictly_dominant: min_margin > 0.0 }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometricRadii {
    pub kernel_sup: f64,
    pub kernel_inf: f64,
    /// 1 / (2 sup K)
    pub r_sup: f64,
    /// 1 / (2 inf K); negative for a non-convex obstacle, infinite when inf K = 0
    pub r_inf: f64,
    /// sup |K| < sqrt(2) pi / L
    pub condition_2: bool,
    /// R_sup > L / (4 pi)
    pub condition_4: bool,
    pub length: f64,
}

/// Brute-force sup/inf of the double-layer kernel over sample pairs.
pub fn geometric_radii(curve: &BoundaryCurve, samples: usize) -> GeometricRadii {
    let pts = sample_curve(curve, samples.max(2));
    let ext = kernel_extremes(curve, &pts, samples.max(2));
    let kernel_sup = ext.iter().map(|e| e.0).fold(f64::NEG_INFINITY, f64::max);
    let kernel_inf = ext.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    let l = curve.length();
    let abs_sup = kernel_sup.abs().max(kernel_inf.abs());
    let r_sup = 0.5 / kernel_sup;
    let r_inf = if kernel_inf == 0.0 { f64::INFINITY } else { 0.5 / kernel_inf };
    GeometricRadii {
        kernel_sup,
        kernel_inf,
        r_sup,
        r_inf,
        condition_2: abs_sup < 2f64.sqrt() * PI / l,
        condition_4: r_sup > l / (4.0 * PI),
        length: l,
    }
}

/// Factored charge system for repeated solves on a fixed mesh.
#[derive(Clone, Debug)]
pub struct ChargeSolver {
    lu: DenseLu,
    template: ChargeSystem,
}

impl ChargeSolver {
    pub fn new(
        curve: &BoundaryCurve,
        mesh: &BoundaryMesh,
        hstar: HStarSpec,
        lambda: Option<&LambdaSpec>,
    ) -> Result<Self> {
        let template = build_charge_system(curve, mesh, &VorticityField::empty(), 0.0, hstar, lambda)?;
        let lu = DenseLu::factor(&template.matrix)?;
        Ok(ChargeSolver { lu, template })
    }

    pub fn condition(&self) -> f64 {
        self.lu.condition_estimate()
    }

    pub fn eval_points(&self) -> Vec<Vec2> {
        self.template.eval_nodes.iter().map(|p| p.pos).collect()
    }

    pub fn solve(&self, omega: &VorticityField, gamma: f64) -> Result<BoundaryDensity> {
        let rhs = charge_rhs(&self.template.eval_nodes, omega, gamma, &self.template.hstar)?;
        let mut d = density_from(&self.template, self.lu.solve(&rhs));
        d.gamma = gamma;
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::uniform_mesh;
    use crate::CurveSpec;

    fn unit_circle() -> BoundaryCurve {
        BoundaryCurve::from_spec(CurveSpec::circle(1.0)).unwrap()
    }

    #[test]
    fn disk_matrix_closed_form() {
        let c = unit_circle();
        for n in [4, 9, 32] {
            let mesh = uniform_mesh(&c, n, MeshFlavor::Charge).unwrap();
            let sys =
                build_charge_system(&c, &mesh, &VorticityField::empty(), 0.0, HStarSpec::DiskHarmonic, None).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let expect = 0.5 / n as f64 + if i == j { 0.5 } else { 0.0 };
                    assert!((sys.matrix[(i, j)] - expect).abs() < 1e-15);
                }
            }
            assert!(sys.rhs.iter().all(|v| *v == 0.0));
            let dom = dominance_margin(&sys.matrix);
            assert!((dom.min_margin - 1.0 / n as f64).abs() < 1e-13);
            assert!(condition_estimate(&sys).unwrap() <= 3.0);
        }
    }

    #[test]
    fn zero_lambda_equals_basic() {
        let c = BoundaryCurve::from_spec(CurveSpec::ellipse(2.0, 1.0)).unwrap();
        let mesh = uniform_mesh(&c, 16, MeshFlavor::Charge).unwrap();
        let w = VorticityField::empty();
        let h = HStarSpec::DiskHarmonic;
        let a = build_charge_system(&c, &mesh, &w, 1.0, h, None).unwrap();
        let b = build_charge_system(&c, &mesh, &w, 1.0, h, Some(&LambdaSpec::Constant(0.0))).unwrap();
        assert_eq!(a.matrix, b.matrix);
        assert_eq!(a.rhs, b.rhs);
    }

    #[test]
    fn lambda_near_two_pi_rejected() {
        let c = unit_circle();
        let mesh = uniform_mesh(&c, 8, MeshFlavor::Charge).unwrap();
        let r = build_charge_system(
            &c,
            &mesh,
            &VorticityField::empty(),
            0.0,
            HStarSpec::DiskHarmonic,
            Some(&LambdaSpec::Constant(1.0)),
        );
        assert!(matches!(r, Err(Error::LambdaMeanNearTwoPi { .. })));
    }

    #[test]
    fn lambda_parsing() {
        assert_eq!("const:0.5".parse::<LambdaSpec>().unwrap(), LambdaSpec::Constant(0.5));
        assert_eq!("sigma:0.25".parse::<LambdaSpec>().unwrap(), LambdaSpec::Sigma(0.25));
        assert!("sigma:2".parse::<LambdaSpec>().is_err());
        assert!("pi".parse::<LambdaSpec>().is_err());
    }

    #[test]
    fn circle_radii() {
        let c = BoundaryCurve::from_spec(CurveSpec::circle(1.5)).unwrap();
        let r = geometric_radii(&c, 256);
        assert!((r.r_sup - 1.5).abs() < 1e-9 && (r.r_inf - 1.5).abs() < 1e-9);
    }
}
