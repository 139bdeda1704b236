//! Dense boundary-kernel matrices and the discrete identity checks built on them.

use crate::norms::{l2, mean, remove_mean};
use crate::{BoundaryCurve, BoundaryMesh, CurvePoint, Error, MeshFlavor, Result};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Nodes closer than this fraction of L count as coincident.
pub const COINCIDENCE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    /// (x - y) . n(x) / |x - y|^2
    Normal,
    /// (x - y) . tau(x) / |x - y|^2
    Tangent,
}

fn coincident(x: &CurvePoint, y: &CurvePoint, length: f64) -> bool {
    let g = (x.s - y.s).rem_euclid(length);
    g.min(length - g) < COINCIDENCE_TOL * length
}

/// Normal kernel with the curvature rule on the diagonal.
pub fn a_kernel(curve: &BoundaryCurve, x: &CurvePoint, y: &CurvePoint) -> f64 {
    if coincident(x, y, curve.length()) {
        return 0.5 * x.curvature;
    }
    let d = curve.chord(x, y);
    d.dot(x.normal) / d.norm_sq()
}

/// Tangent kernel; None when the nodes coincide.
pub fn b_kernel(curve: &BoundaryCurve, x: &CurvePoint, y: &CurvePoint) -> Option<f64> {
    if coincident(x, y, curve.length()) {
        return None;
    }
    let d = curve.chord(x, y);
    Some(d.dot(x.tangent) / d.norm_sq())
}

/// Matrix with rows at `targets` and columns at `sources`.
pub fn assemble_kernel(
    curve: &BoundaryCurve,
    targets: &[CurvePoint],
    sources: &[CurvePoint],
    kind: KernelKind,
) -> Result<DMatrix<f64>> {
    let rows: Vec<Result<Vec<f64>>> = targets
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            sources
                .iter()
                .enumerate()
                .map(|(j, y)| match kind {
                    KernelKind::Normal => Ok(a_kernel(curve, x, y)),
                    KernelKind::Tangent => b_kernel(curve, x, y).ok_or(Error::CoincidentNodesInB { i, j }),
                })
                .collect()
        })
        .collect();
    let mut flat = Vec::with_capacity(targets.len() * sources.len());
    for r in rows {
        flat.extend(r?);
    }
    Ok(DMatrix::from_row_slice(targets.len(), sources.len(), &flat))
}

#[derive(Clone, Debug)]
pub struct KernelMatrices {
    /// rows at s_tilde_i, columns at s_j, normal at s_tilde_i
    pub a: DMatrix<f64>,
    /// rows at s_i, columns at s_tilde_j, normal at s_i
    pub a_tilde: DMatrix<f64>,
    /// tangent versions; only assembled for vortex meshes
    pub b: Option<DMatrix<f64>>,
    pub b_tilde: Option<DMatrix<f64>>,
    pub mesh: BoundaryMesh,
    pub length: f64,
    pub nodes: Vec<CurvePoint>,
    pub eval_nodes: Vec<CurvePoint>,
}

pub fn assemble(curve: &BoundaryCurve, mesh: &BoundaryMesh) -> Result<KernelMatrices> {
    let nodes = curve.points(&mesh.s);
    let eval_nodes = curve.points(&mesh.s_tilde);
    let a = assemble_kernel(curve, &eval_nodes, &nodes, KernelKind::Normal)?;
    let a_tilde = assemble_kernel(curve, &nodes, &eval_nodes, KernelKind::Normal)?;
    let (b, b_tilde) = match mesh.flavor {
        MeshFlavor::Vortex => (
            Some(assemble_kernel(curve, &eval_nodes, &nodes, KernelKind::Tangent)?),
            Some(assemble_kernel(curve, &nodes, &eval_nodes, KernelKind::Tangent)?),
        ),
        MeshFlavor::Charge => (None, None),
    };
    Ok(KernelMatrices { a, a_tilde, b, b_tilde, mesh: mesh.clone(), length: curve.length(), nodes, eval_nodes })
}

impl KernelMatrices {
    pub fn n(&self) -> usize {
        self.mesh.n
    }

    fn vortex_b(&self) -> Result<(&DMatrix<f64>, &DMatrix<f64>)> {
        match (&self.b, &self.b_tilde) {
            (Some(b), Some(bt)) => Ok((b, bt)),
            _ => Err(Error::WrongFlavor { expected: "vortex" }),
        }
    }

    /// Rows 1..N-1 of B_N.
    pub fn b_rect(&self) -> Result<DMatrix<f64>> {
        let (b, _) = self.vortex_b()?;
        Ok(b.rows(0, self.n() - 1).into_owned())
    }

    /// (L/N) A_N
    pub fn scaled_a(&self) -> DMatrix<f64> {
        &self.a * (self.length / self.n() as f64)
    }
}

fn apply(m: &DMatrix<f64>, z: &[f64]) -> Vec<f64> {
    crate::linalg::matvec(m, z)
}

fn cot(x: f64) -> f64 {
    x.cos() / x.sin()
}

/// max_i |sum_j cot(pi (s~_i - s_j) / L)| and max_i |sum_j cot(pi (s~_j - s_i) / L)|.
pub fn cot_sum_deviation(mesh: &BoundaryMesh) -> Result<(f64, f64)> {
    if mesh.flavor != MeshFlavor::Vortex {
        return Err(Error::WrongFlavor { expected: "vortex" });
    }
    let w = PI / mesh.length;
    let row = (0..mesh.n)
        .map(|i| mesh.s.iter().map(|sj| cot(w * (mesh.s_tilde[i] - sj))).sum::<f64>().abs())
        .fold(0.0, f64::max);
    let col = (0..mesh.n)
        .map(|i| mesh.s_tilde.iter().map(|tj| cot(w * (tj - mesh.s[i]))).sum::<f64>().abs())
        .fold(0.0, f64::max);
    Ok((row, col))
}

/// Both sides of the l2 identity for the staggered cotangent matrix on a uniform mesh:
/// lhs = (1/N) || sum_j cot(pi (theta~_k - theta_j)/L) z_j ||, rhs = || z - <z> 1 ||.
pub fn cot_l2_identity_check(mesh: &BoundaryMesh, z: &[f64]) -> Result<(f64, f64)> {
    if mesh.flavor != MeshFlavor::Vortex {
        return Err(Error::WrongFlavor { expected: "vortex" });
    }
    if !mesh.is_uniform() {
        return Err(Error::NonUniformMesh);
    }
    check_len(z, mesh.n)?;
    let n = mesh.n;
    let w = PI / mesh.length;
    let v: Vec<f64> = (0..n)
        .map(|k| (0..n).map(|j| cot(w * (mesh.theta_tilde(k) - mesh.theta(j))) * z[j]).sum::<f64>() / n as f64)
        .collect();
    Ok((l2(&v), l2(&remove_mean(z))))
}

/// Both sides of the collocated off-diagonal inequality:
/// lhs = (1/N) || sum_{j != k} cot(pi (theta_k - theta_j)/L) z_j ||, rhs = || z - <z> 1 ||.
pub fn cot_offdiag_check(mesh: &BoundaryMesh, z: &[f64]) -> Result<(f64, f64)> {
    if !mesh.is_uniform() {
        return Err(Error::NonUniformMesh);
    }
    check_len(z, mesh.n)?;
    let n = mesh.n;
    let w = PI / mesh.length;
    let v: Vec<f64> = (0..n)
        .map(|k| {
            (0..n).filter(|j| *j != k).map(|j| cot(w * (mesh.theta(k) - mesh.theta(j))) * z[j]).sum::<f64>()
                / n as f64
        })
        .collect();
    Ok((l2(&v), l2(&remove_mean(z))))
}

fn check_len(z: &[f64], n: usize) -> Result<()> {
    if z.len() != n {
        return Err(Error::InvalidArgument(format!("vector of length {} for N = {n}", z.len())));
    }
    Ok(())
}

/// Discrete Poincare-Bertrand residuals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PbResidual {
    /// || (L/N)^2 (B B~ - A A~) z + pi^2 z ||
    pub square: f64,
    /// || (L/N)^2 (A B~ + B A~) z ||
    pub cross: f64,
    /// || (L/N)^2 (B~ B - A~ A) z + pi^2 z ||
    pub square_tilde: f64,
    /// || (L/N)^2 (A~ B + B~ A) z ||
    pub cross_tilde: f64,
}

impl PbResidual {
    pub fn first(&self) -> f64 {
        self.square + self.cross
    }

    pub fn second(&self) -> f64 {
        self.square_tilde + self.cross_tilde
    }
}

pub fn discrete_pb_residual(m: &KernelMatrices, z: &[f64]) -> Result<PbResidual> {
    let (b, bt) = m.vortex_b()?;
    check_len(z, m.n())?;
    let h = m.length / m.n() as f64;
    let h2 = h * h;
    let pi2 = PI * PI;
    let (az, atz, bz, btz) = (apply(&m.a, z), apply(&m.a_tilde, z), apply(b, z), apply(bt, z));
    let comb = |p: Vec<f64>, q: Vec<f64>, sign: f64, add: bool| -> f64 {
        let v: Vec<f64> =
            (0..z.len()).map(|i| h2 * (p[i] + sign * q[i]) + if add { pi2 * z[i] } else { 0.0 }).collect();
        l2(&v)
    };
    Ok(PbResidual {
        square: comb(apply(b, &btz), apply(&m.a, &atz), -1.0, true),
        cross: comb(apply(&m.a, &btz), apply(b, &atz), 1.0, false),
        square_tilde: comb(apply(bt, &bz), apply(&m.a_tilde, &az), -1.0, true),
        cross_tilde: comb(apply(&m.a_tilde, &bz), apply(bt, &az), 1.0, false),
    })
}

/// |<(L/N) B z>| + |<(L/N) A z - pi z>| and the same with the tilde matrices.
pub fn mean_residual(m: &KernelMatrices, z: &[f64]) -> Result<(f64, f64)> {
    let (b, bt) = m.vortex_b()?;
    check_len(z, m.n())?;
    let h = m.length / m.n() as f64;
    let part = |bm: &DMatrix<f64>, am: &DMatrix<f64>| {
        let bz = mean(&apply(bm, z)) * h;
        let az: Vec<f64> = apply(am, z).iter().zip(z).map(|(a, zi)| h * a - PI * zi).collect();
        bz.abs() + mean(&az).abs()
    };
    Ok((part(b, &m.a), part(bt, &m.a_tilde)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralEstimate {
    /// spectral radius of (L/N) A_N on mean-zero vectors
    pub rho0: f64,
    /// dominant eigenvalue of (L/N) A_N
    pub rho_full: f64,
    pub iterations: usize,
}

const POWER_MAX_ITER: usize = 20_000;
const POWER_TOL: f64 = 1e-13;

fn project(v: &mut [f64]) {
    let m = mean(v);
    v.iter_mut().for_each(|x| *x -= m);
}

fn normalize(v: &mut [f64]) -> f64 {
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nv > 0.0 {
        v.iter_mut().for_each(|x| *x /= nv);
    }
    nv
}

/// Power iteration for the dominant eigenvalue and for the spectral radius on
/// the mean-zero subspace (constant direction projected out every iterate).
pub fn spectral_radius_meanzero(m: &KernelMatrices) -> Result<SpectralEstimate> {
    spectral_radius_of(&m.scaled_a())
}

pub fn spectral_radius_of(ma: &DMatrix<f64>) -> Result<SpectralEstimate> {
    let n = ma.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let start: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();

    // full matrix: Rayleigh-type estimate on the dominant (real) eigenvalue
    let mut x = start.clone();
    normalize(&mut x);
    let mut full = f64::NAN;
    let mut full_ok = false;
    let mut it_full = 0;
    for k in 0..POWER_MAX_ITER {
        it_full = k + 1;
        let mut y = apply(ma, &x);
        let lam: f64 = y.iter().zip(&x).map(|(a, b)| a * b).sum();
        let nv = normalize(&mut y);
        if nv == 0.0 {
            full = 0.0;
            full_ok = true;
            break;
        }
        let delta = (lam - full).abs();
        full = lam;
        x = y;
        if delta <= POWER_TOL * lam.abs().max(1.0) {
            full_ok = true;
            break;
        }
    }

    // mean-zero subspace: two-step ratio since the spectrum comes in +- pairs
    let mut x = start;
    project(&mut x);
    let mut rho0 = f64::NAN;
    let mut zero_ok = false;
    let mut it_zero = 0;
    let scale = ma.iter().fold(0.0_f64, |a, v| a.max(v.abs())) * n as f64;
    if normalize(&mut x) > 0.0 {
        for k in 0..POWER_MAX_ITER {
            it_zero = k + 1;
            let mut y = apply(ma, &x);
            project(&mut y);
            let mut y2 = apply(ma, &y);
            project(&mut y2);
            let nv = normalize(&mut y2);
            if nv <= 1e-15 * scale * scale {
                rho0 = nv.sqrt();
                zero_ok = true;
                break;
            }
            let est = nv.sqrt();
            let delta = (est - rho0).abs();
            rho0 = est;
            x = y2;
            if delta <= POWER_TOL * est.max(1.0) {
                zero_ok = true;
                break;
            }
        }
    } else {
        rho0 = 0.0;
        zero_ok = true;
    }
    let iterations = it_full.max(it_zero);
    if full_ok && zero_ok {
        Ok(SpectralEstimate { rho0, rho_full: full, iterations })
    } else {
        Err(Error::NoConvergence { iterations, rho0, rho_full: full })
    }
}

/// Fitted constants of the boundedness bounds:
/// (max_ij |A_ij| over A and A~, operator 2-norm of B/N and B~/N).
pub fn boundedness_constants(m: &KernelMatrices) -> Result<(f64, f64)> {
    let (b, bt) = m.vortex_b()?;
    let ca = m.a.iter().chain(m.a_tilde.iter()).fold(0.0_f64, |a, v| a.max(v.abs()));
    let n = m.n() as f64;
    let op = |mat: &DMatrix<f64>| {
        let mt = mat.transpose();
        let mut x = vec![1.0; mat.ncols()];
        x[0] = 2.0;
        normalize(&mut x);
        let mut sigma = 0.0;
        for _ in 0..500 {
            let mut y = apply(&mt, &apply(mat, &x));
            let nv = normalize(&mut y);
            let s = nv.sqrt();
            let done = (s - sigma).abs() <= 1e-10 * s;
            sigma = s;
            x = y;
            if done {
                break;
            }
        }
        sigma / n
    };
    Ok((ca, op(b).max(op(bt))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::uniform_mesh;
    use crate::CurveSpec;

    fn circle() -> BoundaryCurve {
        BoundaryCurve::from_spec(CurveSpec::circle(1.0)).unwrap()
    }

    #[test]
    fn circle_a_entries_are_half() {
        let c = circle();
        for flavor in [MeshFlavor::Charge, MeshFlavor::Vortex] {
            let m = assemble(&c, &uniform_mesh(&c, 4, flavor).unwrap()).unwrap();
            for v in m.a.iter().chain(m.a_tilde.iter()) {
                assert!((v - 0.5).abs() < 1e-15, "{v}");
            }
        }
    }

    #[test]
    fn circle_b_is_half_cot() {
        let c = circle();
        let mesh = uniform_mesh(&c, 4, MeshFlavor::Vortex).unwrap();
        let m = assemble(&c, &mesh).unwrap();
        let b = m.b.as_ref().unwrap();
        for i in 0..4 {
            let mut row = 0.0;
            for j in 0..4 {
                let expect = 0.5 / ((mesh.s_tilde[i] - mesh.s[j]) / 2.0).tan();
                assert!((b[(i, j)] - expect).abs() < 1e-14);
                row += b[(i, j)];
            }
            assert!(row.abs() < 1e-14);
        }
        assert_eq!(m.b_rect().unwrap().nrows(), 3);
    }

    #[test]
    fn charge_mesh_has_no_b() {
        let c = circle();
        let m = assemble(&c, &uniform_mesh(&c, 8, MeshFlavor::Charge).unwrap()).unwrap();
        assert!(m.b.is_none());
        assert!(matches!(m.b_rect(), Err(Error::WrongFlavor { .. })));
        let pts = m.nodes.clone();
        assert!(matches!(
            assemble_kernel(&c, &pts, &pts, KernelKind::Tangent),
            Err(Error::CoincidentNodesInB { i: 0, j: 0 })
        ));
    }

    #[test]
    fn cot_identity_small_cases() {
        let c = circle();
        let m4 = uniform_mesh(&c, 4, MeshFlavor::Vortex).unwrap();
        let (l, r) = cot_l2_identity_check(&m4, &[1.0, -1.0, 1.0, -1.0]).unwrap();
        assert!((l - 1.0).abs() < 1e-12 && (r - 1.0).abs() < 1e-15);
        let (l, r) = cot_l2_identity_check(&m4, &[1.0; 4]).unwrap();
        assert!(l < 1e-15 && r == 0.0);
        let m2 = uniform_mesh(&c, 2, MeshFlavor::Vortex).unwrap();
        let (a, b) = cot_sum_deviation(&m2).unwrap();
        assert!(a < 1e-12 && b < 1e-12);
    }

    #[test]
    fn mean_residual_circle_constant() {
        let c = circle();
        let m = assemble(&c, &uniform_mesh(&c, 32, MeshFlavor::Vortex).unwrap()).unwrap();
        let (r, rt) = mean_residual(&m, &[1.0; 32]).unwrap();
        assert!(r < 1e-10 && rt < 1e-10);
        assert_eq!(mean_residual(&m, &[0.0; 32]).unwrap(), (0.0, 0.0));
        let pb = discrete_pb_residual(&m, &[0.0; 32]).unwrap();
        assert_eq!(pb.first() + pb.second(), 0.0);
    }

    #[test]
    fn circle_spectrum() {
        let c = circle();
        let m = assemble(&c, &uniform_mesh(&c, 64, MeshFlavor::Charge).unwrap()).unwrap();
        let s = spectral_radius_meanzero(&m).unwrap();
        assert!((s.rho_full - PI).abs() < 1e-8);
        assert!(s.rho0 < 1e-8);
    }
}
