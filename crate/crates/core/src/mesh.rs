//! Boundary meshes: vortex nodes `s` and evaluation nodes `s_tilde` in arc length.

use crate::fit::loglog_slope;
use crate::{BoundaryCurve, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFlavor {
    /// Staggered: s_tilde_i sits between s_i and s_{i+1}.
    Vortex,
    /// Collocated: s_tilde_i sits near s_i.
    Charge,
}

impl MeshFlavor {
    pub fn name(self) -> &'static str {
        match self {
            MeshFlavor::Vortex => "vortex",
            MeshFlavor::Charge => "charge",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryMesh {
    pub n: usize,
    pub flavor: MeshFlavor,
    pub length: f64,
    pub s: Vec<f64>,
    pub s_tilde: Vec<f64>,
    pub kappa: u32,
    pub amplitude: f64,
    pub seed: u64,
}

impl BoundaryMesh {
    /// theta_i = (i-1) L / N.
    pub fn theta(&self, i: usize) -> f64 {
        self.length * i as f64 / self.n as f64
    }

    /// Reference position of s_tilde_i: the midpoint (vortex) or theta_i (charge).
    pub fn theta_tilde(&self, i: usize) -> f64 {
        match self.flavor {
            MeshFlavor::Vortex => self.length * (i as f64 + 0.5) / self.n as f64,
            MeshFlavor::Charge => self.theta(i),
        }
    }

    pub fn is_uniform(&self) -> bool {
        self.amplitude == 0.0
    }

    /// max_i max(|s_i - theta_i|, |s_tilde_i - theta_tilde_i|)
    pub fn max_deviation(&self) -> f64 {
        (0..self.n)
            .map(|i| (self.s[i] - self.theta(i)).abs().max((self.s_tilde[i] - self.theta_tilde(i)).abs()))
            .fold(0.0, f64::max)
    }

    /// Bound on the offsets: amplitude N^-(kappa+1) (vortex) or amplitude N^-kappa (charge).
    pub fn offset_bound(&self) -> f64 {
        let p = match self.flavor {
            MeshFlavor::Vortex => self.kappa as i32 + 1,
            MeshFlavor::Charge => self.kappa as i32,
        };
        self.amplitude * (self.n as f64).powi(-p)
    }

    fn check_ordering(&self) -> Result<()> {
        let (s, st, l) = (&self.s, &self.s_tilde, self.length);
        if s[0] != 0.0 {
            return Err(Error::OrderingViolated { index: 0 });
        }
        for i in 0..self.n {
            let next = if i + 1 < self.n { s[i + 1] } else { l };
            if !(s[i] < next) {
                return Err(Error::OrderingViolated { index: i });
            }
            match self.flavor {
                MeshFlavor::Vortex => {
                    if !(s[i] < st[i] && st[i] < next) {
                        return Err(Error::OrderingViolated { index: i });
                    }
                }
                MeshFlavor::Charge => {
                    let next_t = if i + 1 < self.n { st[i + 1] } else { st[0] + l };
                    if !(st[i] < next_t) {
                        return Err(Error::OrderingViolated { index: i });
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn uniform_mesh(curve: &BoundaryCurve, n: usize, flavor: MeshFlavor) -> Result<BoundaryMesh> {
    perturbed_mesh(curve, n, flavor, 2, 0.0, 0)
}

/// Uniform mesh plus offsets drawn uniformly in [-1, 1] times `offset_bound`.
/// s_1 stays pinned to 0.
pub fn perturbed_mesh(
    curve: &BoundaryCurve,
    n: usize,
    flavor: MeshFlavor,
    kappa: u32,
    amplitude: f64,
    seed: u64,
) -> Result<BoundaryMesh> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("mesh needs N >= 2, got {n}")));
    }
    if kappa < 2 {
        return Err(Error::InvalidArgument(format!("kappa must be >= 2, got {kappa}")));
    }
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(Error::InvalidArgument(format!("amplitude must be >= 0, got {amplitude}")));
    }
    let mut mesh = BoundaryMesh {
        n,
        flavor,
        length: curve.length(),
        s: Vec::with_capacity(n),
        s_tilde: Vec::with_capacity(n),
        kappa,
        amplitude,
        seed,
    };
    let bound = mesh.offset_bound();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        if bound > 0.0 {
            bound * rng.random_range(-1.0..=1.0)
        } else {
            0.0
        }
    };
    for i in 0..n {
        let off = if i == 0 { 0.0 } else { draw(&mut rng) };
        mesh.s.push(mesh.theta(i) + off);
    }
    for i in 0..n {
        let off = draw(&mut rng);
        mesh.s_tilde.push(mesh.theta_tilde(i) + off);
    }
    mesh.check_ordering()?;
    Ok(mesh)
}

fn default_kappa() -> u32 {
    2
}

/// Mesh parameters as they appear in run configurations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub n: usize,
    #[serde(default = "default_kappa")]
    pub kappa: u32,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub seed: u64,
}

impl MeshSpec {
    pub fn uniform(n: usize) -> Self {
        MeshSpec { n, kappa: 2, amplitude: 0.0, seed: 0 }
    }

    pub fn with_n(self, n: usize) -> Self {
        MeshSpec { n, ..self }
    }

    pub fn build(&self, curve: &BoundaryCurve, flavor: MeshFlavor) -> Result<BoundaryMesh> {
        perturbed_mesh(curve, self.n, flavor, self.kappa, self.amplitude, self.seed)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeshReport {
    pub flavor: MeshFlavor,
    pub samples: Vec<(usize, f64)>,
    /// Fitted slope of log(max deviation) against log N; +inf when every deviation is zero.
    pub order: f64,
}

/// Empirical deviation order over a family of meshes.
pub fn validate_family(meshes: &[BoundaryMesh]) -> Result<MeshReport> {
    if meshes.len() < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: meshes.len() });
    }
    let flavor = meshes[0].flavor;
    if meshes.iter().any(|m| m.flavor != flavor) {
        return Err(Error::InvalidArgument("mesh family mixes flavors".into()));
    }
    for m in meshes {
        m.check_ordering()?;
    }
    let samples: Vec<(usize, f64)> = meshes.iter().map(|m| (m.n, m.max_deviation())).collect();
    let order = if samples.iter().all(|(_, d)| *d == 0.0) {
        f64::INFINITY
    } else {
        let ns: Vec<f64> = samples.iter().map(|(n, _)| *n as f64).collect();
        let ds: Vec<f64> = samples.iter().map(|(_, d)| *d).collect();
        loglog_slope(&ns, &ds).ok_or(Error::InsufficientSamples { needed: 2, got: 0 })?
    };
    Ok(MeshReport { flavor, samples, order })
}
