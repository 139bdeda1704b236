//! Smooth closed obstacle boundaries with an arc-length parametrization.
//!
//! Every curve is traversed counterclockwise by a parameter `theta` in
//! `[0, 2 pi)`. The arc length `s` starts at `theta = 0`. The tangent is
//! `tau = l'(s)` and the normal `n = -tau^perp` points out of the obstacle into
//! the fluid, so `tau = n^perp`.

use crate::quad::GaussRule;
use crate::{Error, Result, Vec2};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CurveSpec {
    Circle {
        radius: f64,
        #[serde(default)]
        center: Vec2,
    },
    Ellipse {
        a: f64,
        b: f64,
        #[serde(default)]
        center: Vec2,
    },
    /// Polar radius r(theta) = r0 + sum_k (cos[k-1] cos k theta + sin[k-1] sin k theta) about `center`.
    Fourier {
        r0: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
        #[serde(default)]
        center: Vec2,
    },
}

impl CurveSpec {
    pub fn circle(radius: f64) -> Self {
        CurveSpec::Circle { radius, center: Vec2::ZERO }
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        CurveSpec::Ellipse { a, b, center: Vec2::ZERO }
    }

    pub fn fourier(r0: f64, cos: Vec<f64>, sin: Vec<f64>) -> Self {
        CurveSpec::Fourier { r0, cos, sin, center: Vec2::ZERO }
    }

    pub fn center(&self) -> Vec2 {
        match self {
            CurveSpec::Circle { center, .. }
            | CurveSpec::Ellipse { center, .. }
            | CurveSpec::Fourier { center, .. } => *center,
        }
    }

    fn check(&self) -> Result<()> {
        if !self.center().is_finite() {
            return Err(Error::InvalidSpec("center must be finite".into()));
        }
        match self {
            CurveSpec::Circle { radius, .. } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidSpec(format!("circle radius {radius} must be positive")));
                }
            }
            CurveSpec::Ellipse { a, b, .. } => {
                if !(a.is_finite() && b.is_finite() && *b > 0.0 && a >= b) {
                    return Err(Error::InvalidSpec(format!("ellipse needs a >= b > 0, got a = {a}, b = {b}")));
                }
            }
            CurveSpec::Fourier { r0, cos, sin, .. } => {
                if !r0.is_finite() || cos.iter().chain(sin).any(|c| !c.is_finite()) {
                    return Err(Error::InvalidSpec("fourier coefficients must be finite".into()));
                }
                let m = 4096;
                for k in 0..m {
                    let t = TAU * k as f64 / m as f64;
                    let r = self.polar(t).0;
                    if r <= 0.0 {
                        return Err(Error::NonPositiveRadius { theta: t, r });
                    }
                }
            }
        }
        Ok(())
    }

    /// r, r', r'' for the fourier kind.
    fn polar(&self, t: f64) -> (f64, f64, f64) {
        match self {
            CurveSpec::Fourier { r0, cos, sin, .. } => {
                let mut r = *r0;
                let mut dr = 0.0;
                let mut ddr = 0.0;
                for (k, a) in cos.iter().enumerate() {
                    let k = (k + 1) as f64;
                    let (s, c) = (k * t).sin_cos();
                    r += a * c;
                    dr -= a * k * s;
                    ddr -= a * k * k * c;
                }
                for (k, b) in sin.iter().enumerate() {
                    let k = (k + 1) as f64;
                    let (s, c) = (k * t).sin_cos();
                    r += b * s;
                    dr += b * k * c;
                    ddr -= b * k * k * s;
                }
                (r, dr, ddr)
            }
            _ => unreachable!("polar radius only defined for fourier curves"),
        }
    }

    /// Position, first and second derivative in theta.
    pub fn param(&self, t: f64) -> (Vec2, Vec2, Vec2) {
        let (s, c) = t.sin_cos();
        let center = self.center();
        match self {
            CurveSpec::Circle { radius: r, .. } => (
                center + Vec2::new(r * c, r * s),
                Vec2::new(-r * s, r * c),
                Vec2::new(-r * c, -r * s),
            ),
            CurveSpec::Ellipse { a, b, .. } => (
                center + Vec2::new(a * c, b * s),
                Vec2::new(-a * s, b * c),
                Vec2::new(-a * c, -b * s),
            ),
            CurveSpec::Fourier { .. } => {
                let (r, dr, ddr) = self.polar(t);
                let e = Vec2::new(c, s);
                let f = Vec2::new(-s, c);
                (center + e * r, e * dr + f * r, e * (ddr - r) + f * (2.0 * dr))
            }
        }
    }

    /// p(ta) - p(tb) computed without cancellation for nearby parameters.
    pub fn chord(&self, ta: f64, tb: f64) -> Vec2 {
        let d = wrap_pi(ta - tb);
        let h = 0.5 * d;
        let m = tb + h;
        // cos(k ta) - cos(k tb) and sin(k ta) - sin(k tb)
        let dcos = |k: f64| -2.0 * (k * m).sin() * (k * h).sin();
        let dsin = |k: f64| 2.0 * (k * m).cos() * (k * h).sin();
        match self {
            CurveSpec::Circle { radius: r, .. } => Vec2::new(r * dcos(1.0), r * dsin(1.0)),
            CurveSpec::Ellipse { a, b, .. } => Vec2::new(a * dcos(1.0), b * dsin(1.0)),
            CurveSpec::Fourier { cos, sin, .. } => {
                let mut dr = 0.0;
                for (k, a) in cos.iter().enumerate() {
                    dr += a * dcos((k + 1) as f64);
                }
                for (k, b) in sin.iter().enumerate() {
                    dr += b * dsin((k + 1) as f64);
                }
                let rb = self.polar(tb).0;
                let (sa, ca) = ta.sin_cos();
                Vec2::new(dr * ca + rb * dcos(1.0), dr * sa + rb * dsin(1.0))
            }
        }
    }
}

/// Reduce an angle to (-pi, pi].
fn wrap_pi(d: f64) -> f64 {
    let mut d = d.rem_euclid(TAU);
    if d > PI {
        d -= TAU;
    }
    d
}

/// Geometric data at one arc-length position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub s: f64,
    pub theta: f64,
    pub pos: Vec2,
    pub tangent: Vec2,
    pub normal: Vec2,
    /// Signed curvature, positive where the obstacle is convex.
    pub curvature: f64,
}

#[derive(Clone, Debug)]
pub struct BoundaryCurve {
    spec: CurveSpec,
    length: f64,
    /// cumulative arc length at theta_k = 2 pi k / M, k = 0..=M
    cum: Vec<f64>,
    rule: GaussRule,
}

impl BoundaryCurve {
    pub fn new(spec: CurveSpec, table_resolution: usize) -> Result<Self> {
        if table_resolution < 64 {
            return Err(Error::InvalidArgument(format!(
                "table resolution {table_resolution} is below 64"
            )));
        }
        spec.check()?;
        let rule = GaussRule::new(16);
        let m = table_resolution;
        let mut cum = Vec::with_capacity(m + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for k in 0..m {
            let a = TAU * k as f64 / m as f64;
            let b = TAU * (k + 1) as f64 / m as f64;
            acc += rule.integrate(a, b, |t| spec.param(t).1.norm());
            cum.push(acc);
        }
        let length = match &spec {
            CurveSpec::Circle { radius, .. } => TAU * radius,
            _ => acc,
        };
        let curve = BoundaryCurve { spec, length, cum, rule };
        curve.check_simple()?;
        Ok(curve)
    }

    /// Table resolution 256.
    pub fn from_spec(spec: CurveSpec) -> Result<Self> {
        Self::new(spec, 256)
    }

    pub fn spec(&self) -> &CurveSpec {
        &self.spec
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    fn table_step(&self) -> f64 {
        TAU / (self.cum.len() - 1) as f64
    }

    /// Arc length from theta = 0 to theta in [0, 2 pi].
    pub fn s_of_theta(&self, t: f64) -> f64 {
        if let CurveSpec::Circle { radius, .. } = self.spec {
            return radius * t;
        }
        let h = self.table_step();
        let k = ((t / h).floor() as usize).min(self.cum.len() - 2);
        let a = h * k as f64;
        self.cum[k] + self.rule.integrate(a, t, |u| self.spec.param(u).1.norm())
    }

    /// Parameter theta in [0, 2 pi) of the point at arc length s (reduced mod L).
    pub fn theta_of_s(&self, s: f64) -> f64 {
        let l = self.length;
        let s = s.rem_euclid(l);
        if let CurveSpec::Circle { radius, .. } = self.spec {
            return s / radius;
        }
        let h = self.table_step();
        let k = (self.cum.partition_point(|c| *c <= s) - 1).min(self.cum.len() - 2);
        let (mut lo, mut hi) = (h * k as f64, h * (k + 1) as f64);
        let (c0, c1) = (self.cum[k], self.cum[k + 1]);
        let mut t = lo + (hi - lo) * (s - c0) / (c1 - c0);
        for _ in 0..60 {
            let f = self.cum[k] + self.rule.integrate(h * k as f64, t, |u| self.spec.param(u).1.norm()) - s;
            if f.abs() <= 1e-16 * l {
                break;
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let speed = self.spec.param(t).1.norm();
            let mut next = t - f / speed;
            if !(next >= lo && next <= hi) {
                next = 0.5 * (lo + hi);
            }
            let done = (next - t).abs() <= 1e-16 * (1.0 + t.abs());
            t = next;
            if done {
                break;
            }
        }
        t
    }

    pub fn point_at_theta(&self, theta: f64, s: f64) -> CurvePoint {
        let (p, dp, ddp) = self.spec.param(theta);
        let speed = dp.norm();
        let tangent = dp * (1.0 / speed);
        CurvePoint {
            s,
            theta,
            pos: p,
            tangent,
            normal: Vec2::new(tangent.y, -tangent.x),
            curvature: dp.cross(ddp) / (speed * speed * speed),
        }
    }

    pub fn point_at(&self, s: f64) -> CurvePoint {
        self.point_at_theta(self.theta_of_s(s), s)
    }

    pub fn eval_point(&self, s: f64) -> Vec2 {
        self.point_at(s).pos
    }

    pub fn eval_tangent(&self, s: f64) -> Vec2 {
        self.point_at(s).tangent
    }

    pub fn eval_normal(&self, s: f64) -> Vec2 {
        self.point_at(s).normal
    }

    pub fn eval_curvature(&self, s: f64) -> f64 {
        self.point_at(s).curvature
    }

    pub fn points(&self, s: &[f64]) -> Vec<CurvePoint> {
        s.iter().map(|&si| self.point_at(si)).collect()
    }

    /// l(s_a) - l(s_b) for two sampled points, accurate when they are close.
    pub fn chord(&self, a: &CurvePoint, b: &CurvePoint) -> Vec2 {
        self.spec.chord(a.theta, b.theta)
    }

    /// Polygon through `m` points equally spaced in theta.
    pub fn polygon(&self, m: usize) -> Vec<Vec2> {
        (0..m).map(|k| self.spec.param(TAU * k as f64 / m as f64).0).collect()
    }

    /// Winding number of the curve around x; +1 inside the obstacle, 0 in the fluid.
    pub fn winding_number(&self, x: Vec2) -> i64 {
        let poly = self.polygon(2048);
        let mut total = 0.0;
        for i in 0..poly.len() {
            let a = poly[i] - x;
            let b = poly[(i + 1) % poly.len()] - x;
            total += a.cross(b).atan2(a.dot(b));
        }
        (total / TAU).round() as i64
    }

    pub fn is_inside_obstacle(&self, x: Vec2) -> bool {
        self.winding_number(x) != 0
    }

    /// Distance from x to the curve, with the parameter of the nearest point.
    pub fn distance_to(&self, x: Vec2) -> (f64, f64) {
        let m = 512;
        let h = TAU / m as f64;
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..m {
            let t = h * k as f64;
            let d = (self.spec.param(t).0 - x).norm_sq();
            if d < best.0 {
                best = (d, t);
            }
        }
        // safeguarded Newton on g(t) = (p - x) . p'
        let (mut lo, mut hi) = (best.1 - h, best.1 + h);
        let mut t = best.1;
        for _ in 0..50 {
            let (p, dp, ddp) = self.spec.param(t);
            let g = (p - x).dot(dp);
            let dg = dp.norm_sq() + (p - x).dot(ddp);
            if g > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let mut next = if dg > 0.0 { t - g / dg } else { 0.5 * (lo + hi) };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() < 1e-15 {
                t = next;
                break;
            }
            t = next;
        }
        let d = (self.spec.param(t).0 - x).norm();
        if d * d <= best.0 {
            (d, t.rem_euclid(TAU))
        } else {
            (best.0.sqrt(), best.1)
        }
    }

    fn check_simple(&self) -> Result<()> {
        let poly = self.polygon(1024);
        let m = poly.len();
        for i in 0..m {
            let (a, b) = (poly[i], poly[(i + 1) % m]);
            for j in i + 2..m {
                if i == 0 && j == m - 1 {
                    continue;
                }
                let (c, d) = (poly[j], poly[(j + 1) % m]);
                if segments_cross(a, b, c, d) {
                    return Err(Error::NonSimpleCurve(i, j));
                }
            }
        }
        Ok(())
    }
}

fn segments_cross(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let o1 = (b - a).cross(c - a);
    let o2 = (b - a).cross(d - a);
    let o3 = (d - c).cross(a - c);
    let o4 = (d - c).cross(b - c);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}
