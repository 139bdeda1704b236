//! Run configuration: JSON schema, command-line overrides and load-time checks.

use crate::error::CliError;
use exvortex::charge_method::LambdaSpec;
use exvortex::fields::{Blob, HStarSpec, VorticityField};
use exvortex::mesh::MeshSpec;
use exvortex::{BoundaryCurve, CurveSpec, MeshFlavor, Vec2};
use serde::Deserialize;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Vortex,
    Charge,
    #[serde(alias = "charge-lambda")]
    ChargeLambda,
    #[serde(alias = "exact-disk")]
    ExactDisk,
    #[serde(alias = "free-space")]
    FreeSpace,
}

impl Method {
    pub fn parse(s: &str) -> Result<Method, CliError> {
        match s.trim().replace('-', "_").as_str() {
            "vortex" => Ok(Method::Vortex),
            "charge" => Ok(Method::Charge),
            "charge_lambda" => Ok(Method::ChargeLambda),
            "exact_disk" => Ok(Method::ExactDisk),
            "free_space" => Ok(Method::FreeSpace),
            other => Err(CliError::Config(format!("unknown method '{other}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Vortex => "vortex",
            Method::Charge => "charge",
            Method::ChargeLambda => "charge_lambda",
            Method::ExactDisk => "exact_disk",
            Method::FreeSpace => "free_space",
        }
    }

    pub fn flavor(self) -> MeshFlavor {
        match self {
            Method::Charge | Method::ChargeLambda => MeshFlavor::Charge,
            _ => MeshFlavor::Vortex,
        }
    }

    pub fn is_charge(self) -> bool {
        matches!(self, Method::Charge | Method::ChargeLambda)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum LambdaConfig {
    Text(String),
    Table(Vec<f64>),
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalCircle {
    pub radius: f64,
    pub count: usize,
    #[serde(default)]
    pub center: Vec2,
}

fn one() -> usize {
    1
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    pub t_end: f64,
    pub h: f64,
    #[serde(default = "one")]
    pub output_every: usize,
}

/// File names inside the output directory.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputNames {
    pub geometry: Option<String>,
    pub geometry_summary: Option<String>,
    pub mesh: Option<String>,
    pub density: Option<String>,
    pub field: Option<String>,
    pub summary: Option<String>,
    pub converge: Option<String>,
    pub converge_summary: Option<String>,
    pub diagnose: Option<String>,
    pub trajectory: Option<String>,
    pub diagnostics: Option<String>,
}

impl OutputNames {
    pub fn pick<'a>(field: &'a Option<String>, default: &'a str) -> &'a str {
        field.as_deref().unwrap_or(default)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub curve: Option<CurveSpec>,
    #[serde(default)]
    pub mesh: Option<MeshSpec>,
    #[serde(default)]
    pub vorticity: Vec<Blob>,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub method: Option<Method>,
    #[serde(default)]
    pub hstar: Option<String>,
    #[serde(default)]
    pub lambda: Option<LambdaConfig>,
    #[serde(default)]
    pub eval_points: Option<Vec<Vec2>>,
    #[serde(default)]
    pub eval_circle: Option<EvalCircle>,
    #[serde(default)]
    pub dynamics: Option<DynamicsConfig>,
    #[serde(default)]
    pub n_list: Option<Vec<usize>>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub outputs: OutputNames,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub method: Option<String>,
    pub hstar: Option<String>,
    pub lambda: Option<String>,
    pub seed: Option<u64>,
    pub n_list: Option<Vec<usize>>,
    pub samples: Option<usize>,
}

/// Checked configuration.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub raw: RunConfig,
    pub curve: Option<BoundaryCurve>,
    pub method: Method,
    pub hstar: HStarSpec,
    pub lambda: Option<LambdaSpec>,
    pub omega: VorticityField,
    pub mesh: Option<MeshSpec>,
    pub n_list: Option<Vec<usize>>,
    pub samples: Option<usize>,
}

impl Resolved {
    pub fn curve(&self) -> Result<&BoundaryCurve, CliError> {
        self.curve.as_ref().ok_or_else(|| CliError::Config("a curve is required".into()))
    }

    pub fn mesh(&self) -> Result<MeshSpec, CliError> {
        self.mesh.ok_or_else(|| CliError::Config("a mesh block is required".into()))
    }

    /// Evaluation points from eval_points and eval_circle, in that order.
    pub fn eval_points(&self) -> Vec<Vec2> {
        let mut pts = self.raw.eval_points.clone().unwrap_or_default();
        if let Some(c) = self.raw.eval_circle {
            for k in 0..c.count {
                let t = 2.0 * std::f64::consts::PI * k as f64 / c.count as f64;
                pts.push(c.center + Vec2::new(c.radius * t.cos(), c.radius * t.sin()));
            }
        }
        pts
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
}

pub fn load(path: Option<&Path>, ov: &Overrides) -> Result<Resolved, CliError> {
    let path = path.ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    resolve(parse_config(&text)?, ov)
}

fn cfg_err(e: exvortex::Error) -> CliError {
    CliError::Config(e.to_string())
}

pub fn resolve(raw: RunConfig, ov: &Overrides) -> Result<Resolved, CliError> {
    let method = match &ov.method {
        Some(m) => Method::parse(m)?,
        None => raw.method.unwrap_or(Method::Vortex),
    };
    let curve = match (&raw.curve, method) {
        (Some(spec), _) => Some(BoundaryCurve::from_spec(spec.clone()).map_err(cfg_err)?),
        (None, Method::FreeSpace) => None,
        (None, _) => return Err(CliError::Config("a curve is required".into())),
    };
    let hstar_text = ov.hstar.clone().or_else(|| raw.hstar.clone());
    let hstar = match hstar_text {
        Some(t) => t.parse::<HStarSpec>().map_err(|e| CliError::Config(format!("hstar: {e}")))?,
        None => match &curve {
            Some(c) if c.spec().center() != Vec2::ZERO => HStarSpec::PointVortexAt(c.spec().center()),
            Some(_) => HStarSpec::DiskHarmonic,
            None => HStarSpec::DiskHarmonic,
        },
    };
    let lambda = match (&ov.lambda, &raw.lambda) {
        (Some(t), _) => Some(t.parse::<LambdaSpec>().map_err(|e| CliError::Config(format!("lambda: {e}")))?),
        (None, Some(LambdaConfig::Text(t))) => {
            Some(t.parse::<LambdaSpec>().map_err(|e| CliError::Config(format!("lambda: {e}")))?)
        }
        (None, Some(LambdaConfig::Table(v))) => Some(LambdaSpec::Tabulated(v.clone())),
        (None, None) => None,
    };
    if method == Method::ChargeLambda && lambda.is_none() {
        return Err(CliError::Config("charge_lambda needs a lambda spec".into()));
    }
    let mut mesh = raw.mesh;
    if let (Some(m), Some(seed)) = (mesh.as_mut(), ov.seed) {
        m.seed = seed;
    }
    let omega = VorticityField::new(raw.vorticity.clone());
    if !raw.gamma.is_finite() {
        return Err(CliError::Config("gamma must be finite".into()));
    }
    if let Some(c) = &curve {
        if method != Method::FreeSpace {
            omega.validate_in(c).map_err(cfg_err)?;
            if method.is_charge() {
                hstar.validate_in(c).map_err(cfg_err)?;
            }
            if let Some(m) = &mesh {
                let built = m.build(c, method.flavor()).map_err(cfg_err)?;
                if let Some(LambdaSpec::Tabulated(v)) = &lambda {
                    if v.len() != built.n {
                        return Err(CliError::Config(format!("{} lambda values for N = {}", v.len(), built.n)));
                    }
                }
            }
        }
    }
    if let Some(d) = raw.dynamics {
        if !(d.t_end > 0.0 && d.t_end.is_finite()) || !(d.h > 0.0 && d.h.is_finite()) || d.output_every == 0 {
            return Err(CliError::Config("dynamics needs t_end > 0, h > 0 and output_every >= 1".into()));
        }
    }
    if let Some(c) = raw.eval_circle {
        if !(c.radius > 0.0) || c.count == 0 {
            return Err(CliError::Config("eval_circle needs radius > 0 and count >= 1".into()));
        }
    }
    let n_list = ov.n_list.clone().or_else(|| raw.n_list.clone());
    let samples = ov.samples.or(raw.samples);
    let resolved = Resolved { raw, curve, method, hstar, lambda, omega, mesh, n_list, samples };
    if let Some(c) = &resolved.curve {
        if method != Method::FreeSpace {
            if let Some(p) = resolved.eval_points().iter().find(|p| c.is_inside_obstacle(**p)) {
                return Err(CliError::Config(format!("evaluation point ({}, {}) lies inside the obstacle", p.x, p.y)));
            }
        }
    }
    Ok(resolved)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        let e = parse_config(r#"{"curve": {"kind": "circle", "radius": 1.0}, "colour": 3}"#).unwrap_err();
        assert!(matches!(e, CliError::Config(_)));
    }

    #[test]
    fn hyphenated_method_names() {
        assert_eq!(Method::parse("charge-lambda").unwrap(), Method::ChargeLambda);
        let c = parse_config(r#"{"curve": {"kind": "circle", "radius": 1.0}, "method": "charge-lambda"}"#).unwrap();
        assert_eq!(c.method, Some(Method::ChargeLambda));
    }

    #[test]
    fn blob_inside_obstacle_is_config_error() {
        let c = parse_config(
            r#"{"curve": {"kind": "circle", "radius": 1.0}, "vorticity": [{"center": [0.1, 0.0], "strength": 1.0}]}"#,
        )
        .unwrap();
        assert!(matches!(resolve(c, &Overrides::default()), Err(CliError::Config(_))));
    }

    #[test]
    fn seed_override() {
        let c = parse_config(r#"{"curve": {"kind": "circle", "radius": 1.0}, "mesh": {"n": 8, "amplitude": 1.0}}"#)
            .unwrap();
        let r = resolve(c, &Overrides { seed: Some(9), ..Default::default() }).unwrap();
        assert_eq!(r.mesh.unwrap().seed, 9);
        assert_eq!(r.mesh.unwrap().kappa, 2);
    }
}
