//! Reference solutions and continuous-operator checks: the exterior-disk flow
//! built from image vortices, quadratures for A and the principal value of B,
//! one-sided boundary limits of a vortex sheet, and a Riemann-sum harness.

use crate::fields::{point_kernel, Blob};
use crate::fit::{fit_with_floor, OrderFit};
use crate::kernel_ops::{a_kernel, b_kernel};
use crate::norms::linf;
use crate::quad::GaussRule;
use crate::{BoundaryCurve, BoundaryMesh, CurvePoint, CurveSpec, Error, Result, Vec2};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Errors below this are treated as round-off in order fits.
pub const ROUNDOFF_FLOOR: f64 = 1e-13;

/// Node count of the reference integral in the Riemann harness.
pub const REFERENCE_NODES: usize = 4096;

/// Exact flow outside a disk for point vortices and circulation gamma.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskExactSolution {
    pub center: Vec2,
    pub radius: f64,
    /// blobs are treated as point vortices
    pub blobs: Vec<Blob>,
    pub gamma: f64,
}

impl DiskExactSolution {
    /// Unit disk about the origin.
    pub fn new(blobs: Vec<Blob>, gamma: f64) -> Result<Self> {
        Self::with_disk(Vec2::ZERO, 1.0, blobs, gamma)
    }

    pub fn with_disk(center: Vec2, radius: f64, blobs: Vec<Blob>, gamma: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidSpec(format!("disk radius must be positive, got {radius}")));
        }
        for (index, b) in blobs.iter().enumerate() {
            let d = (b.center - center).norm();
            if d <= radius {
                return Err(Error::BlobTouchesBoundary { index, distance: radius - d });
            }
        }
        Ok(DiskExactSolution { center, radius, blobs, gamma })
    }

    /// Same flow for a circle curve; other shapes are rejected.
    pub fn for_curve(curve: &BoundaryCurve, blobs: Vec<Blob>, gamma: f64) -> Result<Self> {
        match curve.spec() {
            CurveSpec::Circle { radius, center } => Self::with_disk(*center, *radius, blobs, gamma),
            _ => Err(Error::InvalidArgument("the exact solution needs a circle".into())),
        }
    }

    /// gamma + sum of strengths
    pub fn alpha(&self) -> f64 {
        self.gamma + self.blobs.iter().map(|b| b.strength).sum::<f64>()
    }

    /// Reflection of y through the circle.
    pub fn image(&self, y: Vec2) -> Vec2 {
        let d = y - self.center;
        self.center + d * (self.radius * self.radius / d.norm_sq())
    }

    fn check_outside(&self, x: Vec2) -> Result<()> {
        if (x - self.center).norm() < self.radius * (1.0 - 1e-12) {
            return Err(Error::InsideObstacle { x: x.x, y: x.y });
        }
        Ok(())
    }
}

/// u = sum_k s_k [K(x - y_k) - K(x - y_k*)] + alpha K(x - c), K(d) = d^perp / (2 pi |d|^2)
pub fn exact_disk_velocity(sol: &DiskExactSolution, x: Vec2) -> Result<Vec2> {
    sol.check_outside(x)?;
    let mut u = exact_disk_remainder(sol, x)?;
    for b in &sol.blobs {
        u += point_kernel(x - b.center).map_err(|_| Error::SingularEvaluation { x: x.x, y: x.y })? * b.strength;
    }
    Ok(u)
}

/// u_R = u - u_P: image vortices plus the circulation term. Finite at the blob centers.
pub fn exact_disk_remainder(sol: &DiskExactSolution, x: Vec2) -> Result<Vec2> {
    sol.check_outside(x)?;
    let sing = |_| Error::SingularEvaluation { x: x.x, y: x.y };
    let mut u = point_kernel(x - sol.center).map_err(sing)? * sol.alpha();
    for b in &sol.blobs {
        u += point_kernel(x - sol.image(b.center)).map_err(sing)? * (-b.strength);
    }
    Ok(u)
}

/// Velocity advecting blob k: u_R at its center plus the other blobs.
pub fn exact_disk_advection(sol: &DiskExactSolution, k: usize) -> Result<Vec2> {
    let y = sol.blobs[k].center;
    let mut u = exact_disk_remainder(sol, y)?;
    for (j, b) in sol.blobs.iter().enumerate() {
        if j != k {
            u += point_kernel(y - b.center)? * b.strength;
        }
    }
    Ok(u)
}

/// Uniform grid s_j = offset + j L / M on the boundary.
#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    pub points: Vec<CurvePoint>,
    pub length: f64,
    pub offset: f64,
}

impl QuadratureGrid {
    pub fn new(curve: &BoundaryCurve, m: usize, offset: f64) -> Result<Self> {
        if m < 2 || m % 2 != 0 {
            return Err(Error::InvalidArgument(format!("grid size must be even and >= 2, got {m}")));
        }
        let l = curve.length();
        let s: Vec<f64> = (0..m).map(|j| (offset + l * j as f64 / m as f64).rem_euclid(l)).collect();
        let points = s.par_iter().map(|&sj| curve.point_at(sj)).collect();
        Ok(QuadratureGrid { points, length: l, offset })
    }

    pub fn m(&self) -> usize {
        self.points.len()
    }

    /// Arc-length parameter of node j, unwrapped from the offset.
    pub fn s(&self, j: usize) -> f64 {
        self.offset + self.length * j as f64 / self.m() as f64
    }

    pub fn sample<F: Fn(f64) -> f64>(&self, g: F) -> Vec<f64> {
        (0..self.m()).map(|j| g(self.s(j))).collect()
    }

    /// (A g)(s_i) by the trapezoid rule; the kernel is smooth.
    pub fn apply_a(&self, curve: &BoundaryCurve, g: &[f64]) -> Vec<f64> {
        let m = self.m();
        assert_eq!(g.len(), m, "density length must match the grid");
        let h = self.length / m as f64;
        (0..m)
            .into_par_iter()
            .map(|i| {
                let x = &self.points[i];
                h * self.points.iter().zip(g).map(|(y, gj)| a_kernel(curve, x, y) * gj).sum::<f64>()
            })
            .collect()
    }

    /// (A* g)(s_i) = -int (x - y) . n(y) / |x - y|^2 g(y) dy by the trapezoid rule.
    pub fn apply_a_adjoint(&self, curve: &BoundaryCurve, g: &[f64]) -> Vec<f64> {
        let m = self.m();
        assert_eq!(g.len(), m, "density length must match the grid");
        let h = self.length / m as f64;
        (0..m)
            .into_par_iter()
            .map(|i| {
                let x = &self.points[i];
                let sum: f64 = self
                    .points
                    .iter()
                    .enumerate()
                    .map(|(j, y)| {
                        let k = if j == i {
                            0.5 * x.curvature
                        } else {
                            let d = curve.chord(x, y);
                            -d.dot(y.normal) / d.norm_sq()
                        };
                        k * g[j]
                    })
                    .sum();
                h * sum
            })
            .collect()
    }

    /// Principal value (B g)(s_i). The (pi/L) cot(pi (s - t)/L) part uses the
    /// alternate-point rule, the smooth remainder the trapezoid rule.
    pub fn apply_b_pv(&self, curve: &BoundaryCurve, g: &[f64]) -> Vec<f64> {
        self.cot_split(g, 1.0, |i, j| b_kernel(curve, &self.points[i], &self.points[j]).expect("distinct grid nodes"))
    }

    /// Principal value (B* g)(s_i) with kernel -(x - y) . tau(y) / |x - y|^2.
    pub fn apply_b_adjoint_pv(&self, curve: &BoundaryCurve, g: &[f64]) -> Vec<f64> {
        self.cot_split(g, -1.0, |i, j| {
            let (x, y) = (&self.points[i], &self.points[j]);
            let d = curve.chord(x, y);
            -d.dot(y.tangent) / d.norm_sq()
        })
    }

    /// Kernel with singular part sign (pi/L) cot(pi (s - t)/L) and a smooth remainder vanishing on the diagonal.
    fn cot_split<K>(&self, g: &[f64], sign: f64, kernel: K) -> Vec<f64>
    where
        K: Fn(usize, usize) -> f64 + Sync,
    {
        let m = self.m();
        assert_eq!(g.len(), m, "density length must match the grid");
        let l = self.length;
        let h = l / m as f64;
        (0..m)
            .into_par_iter()
            .map(|i| {
                let mut acc = 0.0;
                for j in 0..m {
                    if j == i {
                        continue;
                    }
                    let k = i as i64 - j as i64;
                    let c = sign * PI / l / (PI * k as f64 / m as f64).tan();
                    let cot_w = if k.rem_euclid(2) == 1 { 2.0 * h } else { 0.0 };
                    acc += (h * (kernel(i, j) - c) + cot_w * c) * g[j];
                }
                acc
            })
            .collect()
    }
}

pub fn apply_a(curve: &BoundaryCurve, g: &[f64]) -> Result<Vec<f64>> {
    Ok(QuadratureGrid::new(curve, g.len(), 0.0)?.apply_a(curve, g))
}

pub fn apply_b_pv(curve: &BoundaryCurve, g: &[f64]) -> Result<Vec<f64>> {
    Ok(QuadratureGrid::new(curve, g.len(), 0.0)?.apply_b_pv(curve, g))
}

pub fn apply_a_adjoint(curve: &BoundaryCurve, g: &[f64]) -> Result<Vec<f64>> {
    Ok(QuadratureGrid::new(curve, g.len(), 0.0)?.apply_a_adjoint(curve, g))
}

pub fn apply_b_adjoint_pv(curve: &BoundaryCurve, g: &[f64]) -> Result<Vec<f64>> {
    Ok(QuadratureGrid::new(curve, g.len(), 0.0)?.apply_b_adjoint_pv(curve, g))
}

/// ||(A^2 - B^2) phi - pi^2 phi||_inf / ||phi||_inf and ||(AB + BA) phi||_inf / ||phi||_inf
pub fn continuous_pb_residual(curve: &BoundaryCurve, phi: &[f64]) -> Result<(f64, f64)> {
    let grid = QuadratureGrid::new(curve, phi.len(), 0.0)?;
    let a = grid.apply_a(curve, phi);
    let b = grid.apply_b_pv(curve, phi);
    let aa = grid.apply_a(curve, &a);
    let bb = grid.apply_b_pv(curve, &b);
    let ab = grid.apply_a(curve, &b);
    let ba = grid.apply_b_pv(curve, &a);
    let scale = linf(phi);
    let first: Vec<f64> = (0..phi.len()).map(|i| aa[i] - bb[i] - PI * PI * phi[i]).collect();
    let second: Vec<f64> = (0..phi.len()).map(|i| ab[i] + ba[i]).collect();
    Ok((linf(&first) / scale, linf(&second) / scale))
}

/// Nodes used for the principal values in the boundary-limit check.
pub const PLEMELJ_PV_NODES: usize = 1024;

#[derive(Clone, Debug, PartialEq)]
pub struct PlemeljRow {
    pub eps: f64,
    /// v . tau at x0 + eps n and x0 - eps n
    pub tangential_out: f64,
    pub tangential_in: f64,
    pub normal_out: f64,
    pub normal_in: f64,
    /// distance to (1/2 pi) A g + g/2, (1/2 pi) A g - g/2 and -(1/2 pi) B g
    pub tangential_out_error: f64,
    pub tangential_in_error: f64,
    pub normal_out_error: f64,
    pub normal_in_error: f64,
    /// |(v_out - v_in) . tau - g(x0)|
    pub jump_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlemeljTable {
    pub s0: f64,
    pub g0: f64,
    pub a_g: f64,
    pub b_g: f64,
    pub rows: Vec<PlemeljRow>,
}

/// v(x) = (1/2 pi) int (x - l(t))^perp / |x - l(t)|^2 g(t) dt on panels graded
/// geometrically towards s0.
fn sheet_velocity_near<G>(curve: &BoundaryCurve, g: &G, s0: f64, x: Vec2, eps: f64, rule: &GaussRule) -> Vec2
where
    G: Fn(f64) -> f64 + Sync,
{
    let l = curve.length();
    let half = 0.5 * l;
    let mut breaks = vec![0.0];
    let mut a = eps / 8.0;
    while a < half {
        breaks.push(a);
        a *= 2.0;
    }
    breaks.push(half);
    let mut panels = Vec::with_capacity(2 * breaks.len());
    for w in breaks.windows(2) {
        panels.push((s0 + w[0], s0 + w[1]));
        panels.push((s0 - w[1], s0 - w[0]));
    }
    let acc = panels
        .par_iter()
        .map(|&(lo, hi)| {
            let mut u = Vec2::ZERO;
            for (t, w) in rule.points(lo, hi) {
                let y = curve.eval_point(t.rem_euclid(l));
                let d = x - y;
                u += d.perp() * (w * g(t) / d.norm_sq());
            }
            u
        })
        .reduce(|| Vec2::ZERO, |a, b| a + b);
    acc * (1.0 / (2.0 * PI))
}

/// One-sided limits of the vortex sheet with density g at l(s0).
pub fn plemelj_check<G>(curve: &BoundaryCurve, g: &G, s0: f64, eps_list: &[f64]) -> Result<PlemeljTable>
where
    G: Fn(f64) -> f64 + Sync,
{
    if eps_list.is_empty() {
        return Err(Error::InvalidArgument("empty eps list".into()));
    }
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("eps list must be strictly decreasing".into()));
    }
    if eps_list.iter().any(|e| !(*e >= 1e-4)) {
        return Err(Error::InvalidArgument("eps must be at least 1e-4".into()));
    }
    let grid = QuadratureGrid::new(curve, PLEMELJ_PV_NODES, s0)?;
    let gs = grid.sample(g);
    let a_g = grid.apply_a(curve, &gs)[0];
    let b_g = grid.apply_b_pv(curve, &gs)[0];
    let p0 = curve.point_at(s0.rem_euclid(curve.length()));
    let g0 = g(s0);
    let rule = GaussRule::new(16);
    let t_out = a_g / (2.0 * PI) + 0.5 * g0;
    let t_in = a_g / (2.0 * PI) - 0.5 * g0;
    let nrm = -b_g / (2.0 * PI);
    let rows = eps_list
        .iter()
        .map(|&eps| {
            let vo = sheet_velocity_near(curve, g, s0, p0.pos + p0.normal * eps, eps, &rule);
            let vi = sheet_velocity_near(curve, g, s0, p0.pos - p0.normal * eps, eps, &rule);
            let (to, ti) = (vo.dot(p0.tangent), vi.dot(p0.tangent));
            let (no, ni) = (vo.dot(p0.normal), vi.dot(p0.normal));
            PlemeljRow {
                eps,
                tangential_out: to,
                tangential_in: ti,
                normal_out: no,
                normal_in: ni,
                tangential_out_error: (to - t_out).abs(),
                tangential_in_error: (ti - t_in).abs(),
                normal_out_error: (no - nrm).abs(),
                normal_in_error: (ni - nrm).abs(),
                jump_error: (to - ti - g0).abs(),
            }
        })
        .collect();
    Ok(PlemeljTable { s0, g0, a_g, b_g, rows })
}

/// (L/N) sum_i g(s~_i)
pub fn riemann_sum<G: Fn(f64) -> f64>(mesh: &BoundaryMesh, g: &G) -> f64 {
    mesh.length / mesh.n as f64 * mesh.s_tilde.iter().map(|&s| g(s)).sum::<f64>()
}

/// Trapezoid integral of a periodic g over [0, L] on 4096 nodes.
pub fn reference_integral<G: Fn(f64) -> f64>(length: f64, g: &G) -> f64 {
    let h = length / REFERENCE_NODES as f64;
    h * (0..REFERENCE_NODES).map(|j| g(h * j as f64)).sum::<f64>()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RiemannReport {
    pub ns: Vec<usize>,
    /// max error over each ensemble
    pub errors: Vec<f64>,
    pub reference: f64,
    pub fit: OrderFit,
}

/// Riemann-sum errors over mesh ensembles, one ensemble per N.
pub fn riemann_harness<G>(g: &G, ensembles: &[Vec<BoundaryMesh>]) -> Result<RiemannReport>
where
    G: Fn(f64) -> f64 + Sync,
{
    if ensembles.len() < 4 {
        return Err(Error::InsufficientSamples { needed: 4, got: ensembles.len() });
    }
    let mut ns = Vec::with_capacity(ensembles.len());
    for e in ensembles {
        let first = e.first().ok_or_else(|| Error::InvalidArgument("empty mesh ensemble".into()))?;
        if e.iter().any(|m| m.n != first.n) {
            return Err(Error::InvalidArgument("ensemble mixes mesh sizes".into()));
        }
        ns.push(first.n);
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("mesh sizes must increase".into()));
    }
    let reference = reference_integral(ensembles[0][0].length, g);
    let errors: Vec<f64> = ensembles
        .par_iter()
        .map(|e| e.iter().map(|m| (riemann_sum(m, g) - reference).abs()).fold(0.0, f64::max))
        .collect();
    let nf: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let fit = fit_with_floor(&nf, &errors, ROUNDOFF_FLOOR);
    Ok(RiemannReport { ns, errors, reference, fit })
}
