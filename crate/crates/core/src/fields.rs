//! Velocity evaluators: full-plane Biot-Savart of blobs, discrete boundary
//! vortex sheets, discrete fluid charges and the reference harmonic fields.

use crate::{BoundaryCurve, Error, Result, Vec2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Evaluations closer than this to a singularity fail.
pub const SINGULAR_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Blob {
    pub center: Vec2,
    pub strength: f64,
    /// 0 for a point vortex, otherwise the Gaussian mollifier scale.
    #[serde(default)]
    pub core_radius: f64,
}

impl Blob {
    pub fn point(center: Vec2, strength: f64) -> Self {
        Blob { center, strength, core_radius: 0.0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VorticityField {
    pub blobs: Vec<Blob>,
}

fn singular(x: Vec2) -> Error {
    Error::SingularEvaluation { x: x.x, y: x.y }
}

/// d^perp / (2 pi |d|^2)
pub fn point_kernel(d: Vec2) -> Result<Vec2> {
    let r2 = d.norm_sq();
    if r2 < SINGULAR_TOL * SINGULAR_TOL {
        return Err(singular(d));
    }
    Ok(d.perp() * (1.0 / (2.0 * PI * r2)))
}

impl VorticityField {
    pub fn new(blobs: Vec<Blob>) -> Self {
        VorticityField { blobs }
    }

    pub fn empty() -> Self {
        VorticityField::default()
    }

    pub fn total_mass(&self) -> f64 {
        self.blobs.iter().map(|b| b.strength).sum()
    }

    /// Every blob must sit in the fluid with its core clear of the boundary.
    pub fn validate_in(&self, curve: &BoundaryCurve) -> Result<()> {
        for (index, b) in self.blobs.iter().enumerate() {
            if !(b.center.is_finite() && b.strength.is_finite() && b.core_radius >= 0.0) {
                return Err(Error::InvalidArgument(format!("blob {index} has invalid data")));
            }
            let (distance, _) = curve.distance_to(b.center);
            if curve.is_inside_obstacle(b.center) || distance <= b.core_radius || distance < SINGULAR_TOL {
                return Err(Error::BlobTouchesBoundary { index, distance });
            }
        }
        Ok(())
    }
}

/// Velocity induced at x by a single blob.
pub fn blob_velocity(b: &Blob, x: Vec2) -> Result<Vec2> {
    let d = x - b.center;
    if b.core_radius > 0.0 {
        let r2 = d.norm_sq();
        if r2 == 0.0 {
            return Ok(Vec2::ZERO);
        }
        let s2 = b.core_radius * b.core_radius;
        let factor = -(-r2 / (2.0 * s2)).exp_m1();
        return Ok(d.perp() * (b.strength * factor / (2.0 * PI * r2)));
    }
    Ok(point_kernel(d)? * b.strength)
}

/// u_P(x) = sum over blobs of the (mollified) Biot-Savart kernel.
pub fn velocity_fullplane(omega: &VorticityField, x: Vec2) -> Result<Vec2> {
    let mut u = Vec2::ZERO;
    for b in &omega.blobs {
        u += blob_velocity(b, x)?;
    }
    Ok(u)
}

/// Full-plane velocity at blob `skip`'s position from all other blobs.
pub fn velocity_fullplane_excluding(omega: &VorticityField, x: Vec2, skip: usize) -> Result<Vec2> {
    let mut u = Vec2::ZERO;
    for (k, b) in omega.blobs.iter().enumerate() {
        if k != skip {
            u += blob_velocity(b, x)?;
        }
    }
    Ok(u)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HStarSpec {
    /// x^perp / (2 pi |x|^2)
    DiskHarmonic,
    /// (x - x*)^perp / (2 pi |x - x*|^2)
    PointVortexAt(Vec2),
}

impl HStarSpec {
    pub fn singularity(&self) -> Vec2 {
        match self {
            HStarSpec::DiskHarmonic => Vec2::ZERO,
            HStarSpec::PointVortexAt(p) => *p,
        }
    }

    /// The singularity must lie strictly inside the obstacle.
    pub fn validate_in(&self, curve: &BoundaryCurve) -> Result<()> {
        let p = self.singularity();
        if !curve.is_inside_obstacle(p) || curve.distance_to(p).0 < SINGULAR_TOL {
            return Err(Error::InvalidArgument(format!("H* singularity ({}, {}) is not inside the obstacle", p.x, p.y)));
        }
        Ok(())
    }
}

impl fmt::Display for HStarSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HStarSpec::DiskHarmonic => write!(f, "disk"),
            HStarSpec::PointVortexAt(p) => write!(f, "point:{},{}", p.x, p.y),
        }
    }
}

impl FromStr for HStarSpec {
    type Err = String;

    /// `disk` or `point:x,y`
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s == "disk" {
            return Ok(HStarSpec::DiskHarmonic);
        }
        if let Some(rest) = s.strip_prefix("point:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() == 2 {
                let x = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
                let y = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
                return Ok(HStarSpec::PointVortexAt(Vec2::new(x, y)));
            }
        }
        Err(format!("expected 'disk' or 'point:x,y', got '{s}'"))
    }
}

pub fn harmonic_field(hstar: &HStarSpec, x: Vec2) -> Result<Vec2> {
    point_kernel(x - hstar.singularity()).map_err(|_| singular(x))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMethod {
    Vortex,
    Charge,
    ChargeLambda,
}

/// Solved boundary strengths with the node positions they live on.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryDensity {
    pub method: DensityMethod,
    pub values: Vec<f64>,
    /// arc-length positions s_j
    pub s: Vec<f64>,
    /// l(s_j)
    pub nodes: Vec<Vec2>,
    pub gamma: f64,
    pub hstar: Option<HStarSpec>,
}

impl BoundaryDensity {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn mean(&self) -> f64 {
        crate::norms::mean(&self.values)
    }
}

fn check_nodes(density: &BoundaryDensity, x: Vec2) -> Result<()> {
    if density.nodes.iter().any(|p| (x - *p).norm() < SINGULAR_TOL) {
        return Err(singular(x));
    }
    Ok(())
}

/// u_app(x) = (1/2 pi) sum_j (gamma_j / N) (x - x_j)^perp / |x - x_j|^2
pub fn velocity_vortex_sheet(density: &BoundaryDensity, x: Vec2) -> Result<Vec2> {
    check_nodes(density, x)?;
    let n = density.n() as f64;
    let mut u = Vec2::ZERO;
    for (g, p) in density.values.iter().zip(&density.nodes) {
        let d = x - *p;
        u += d.perp() * (g / d.norm_sq());
    }
    Ok(u * (1.0 / (2.0 * PI * n)))
}

/// u_app(x) = (1/2 pi) sum_j (gamma_j / N) (x - x_j) / |x - x_j|^2 + gamma H*(x)
pub fn velocity_charge(density: &BoundaryDensity, x: Vec2) -> Result<Vec2> {
    check_nodes(density, x)?;
    let n = density.n() as f64;
    let mut u = Vec2::ZERO;
    for (g, p) in density.values.iter().zip(&density.nodes) {
        let d = x - *p;
        u += d * (g / d.norm_sq());
    }
    u = u * (1.0 / (2.0 * PI * n));
    if density.gamma != 0.0 {
        let h = density.hstar.ok_or_else(|| Error::InvalidArgument("charge density without H*".into()))?;
        u += harmonic_field(&h, x)? * density.gamma;
    }
    Ok(u)
}

/// Boundary-induced velocity for any density kind.
pub fn velocity_density(density: &BoundaryDensity, x: Vec2) -> Result<Vec2> {
    match density.method {
        DensityMethod::Vortex => velocity_vortex_sheet(density, x),
        DensityMethod::Charge | DensityMethod::ChargeLambda => velocity_charge(density, x),
    }
}

/// Evaluates `f` at every point in parallel, keeping the input order.
pub fn eval_batch<F>(points: &[Vec2], f: F) -> Result<Vec<Vec2>>
where
    F: Fn(Vec2) -> Result<Vec2> + Sync,
{
    points.par_iter().map(|p| f(*p)).collect()
}

/// `count` points equally spaced on the circle of radius r about the origin.
pub fn circle_points(radius: f64, count: usize) -> Vec<Vec2> {
    (0..count)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / count as f64;
            Vec2::new(radius * t.cos(), radius * t.sin())
        })
        .collect()
}

/// Trapezoid circulation of `f` around the origin-centred circle of radius r.
pub fn circulation<F>(radius: f64, count: usize, f: F) -> Result<f64>
where
    F: Fn(Vec2) -> Result<Vec2>,
{
    let mut acc = 0.0;
    for k in 0..count {
        let t = 2.0 * PI * k as f64 / count as f64;
        let (s, c) = t.sin_cos();
        let u = f(Vec2::new(radius * c, radius * s))?;
        acc += u.dot(Vec2::new(-s, c));
    }
    Ok(acc * 2.0 * PI * radius / count as f64)
}
