use crate::config::{Method, OutputNames, Resolved};
use crate::error::CliError;
use crate::output::{write_csv, write_json, Cell};
use exvortex::charge_method::{build_charge_system, charge_matrix, dominance_margin, geometric_radii};
use exvortex::charge_method::{condition_estimate, KERNEL_SAMPLES};
use exvortex::dynamics::{Diagnostics, DynamicsMethod, DynamicsSetup, Simulation, SimulationState};
use exvortex::experiments::{solve_static, static_convergence, total_velocity, StaticProblem};
use exvortex::fields::{circulation, eval_batch, DensityMethod, VorticityField};
use exvortex::kernel_ops::{
    assemble, boundedness_constants, cot_sum_deviation, discrete_pb_residual, mean_residual, spectral_radius_meanzero,
};
use exvortex::oracle::{exact_disk_velocity, DiskExactSolution};
use exvortex::vortex_method::VortexSolver;
use exvortex::{CurveSpec, MeshFlavor, Vec2};
use serde::Serialize;
use serde_json::{json, Value};
use std::path::Path;

const GEOM_SAMPLES: usize = 256;
const CIRCULATION_POINTS: usize = 1024;

fn density_method(m: Method) -> Result<DensityMethod, CliError> {
    match m {
        Method::Vortex => Ok(DensityMethod::Vortex),
        Method::Charge => Ok(DensityMethod::Charge),
        Method::ChargeLambda => Ok(DensityMethod::ChargeLambda),
        other => Err(CliError::Config(format!("method '{}' has no boundary density", other.name()))),
    }
}

fn static_problem(r: &Resolved) -> Result<StaticProblem, CliError> {
    Ok(StaticProblem {
        curve: r.curve()?.clone(),
        mesh: r.mesh()?,
        omega: r.omega.clone(),
        gamma: r.raw.gamma,
        method: density_method(r.method)?,
        hstar: r.hstar,
        lambda: r.lambda.clone(),
    })
}

fn is_circle(r: &Resolved) -> bool {
    matches!(r.curve.as_ref().map(|c| c.spec()), Some(CurveSpec::Circle { .. }))
}

fn kind(spec: &CurveSpec) -> &'static str {
    match spec {
        CurveSpec::Circle { .. } => "circle",
        CurveSpec::Ellipse { .. } => "ellipse",
        CurveSpec::Fourier { .. } => "fourier",
    }
}

fn nonfinite_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

pub fn geom(r: &Resolved, out: &Path) -> Result<(), CliError> {
    let curve = r.curve()?;
    let m = r.samples.unwrap_or(GEOM_SAMPLES);
    if m < 3 {
        return Err(CliError::Config("geom needs at least 3 samples".into()));
    }
    let l = curve.length();
    let pts: Vec<_> = (0..m).map(|k| curve.point_at(l * k as f64 / m as f64)).collect();
    let names = &r.raw.outputs;
    write_csv(
        &out.join(OutputNames::pick(&names.geometry, "geometry.csv")),
        &["i", "s", "theta", "x", "y", "tx", "ty", "nx", "ny", "curvature"],
        pts.iter().enumerate().map(|(i, p)| {
            vec![
                Cell::Int(i as i64),
                Cell::Float(p.s),
                Cell::Float(p.theta),
                Cell::Float(p.pos.x),
                Cell::Float(p.pos.y),
                Cell::Float(p.tangent.x),
                Cell::Float(p.tangent.y),
                Cell::Float(p.normal.x),
                Cell::Float(p.normal.y),
                Cell::Float(p.curvature),
            ]
        }),
    )?;
    let kmin = pts.iter().map(|p| p.curvature).fold(f64::INFINITY, f64::min);
    let kmax = pts.iter().map(|p| p.curvature).fold(f64::NEG_INFINITY, f64::max);
    let mesh = match r.mesh {
        Some(spec) => {
            let mesh = spec.build(curve, r.method.flavor())?;
            let nodes = curve.points(&mesh.s);
            let eval = curve.points(&mesh.s_tilde);
            write_csv(
                &out.join(OutputNames::pick(&names.mesh, "mesh.csv")),
                &["i", "s", "s_tilde", "x", "y", "x_tilde", "y_tilde"],
                (0..mesh.n).map(|i| {
                    vec![
                        Cell::Int(i as i64),
                        Cell::Float(mesh.s[i]),
                        Cell::Float(mesh.s_tilde[i]),
                        Cell::Float(nodes[i].pos.x),
                        Cell::Float(nodes[i].pos.y),
                        Cell::Float(eval[i].pos.x),
                        Cell::Float(eval[i].pos.y),
                    ]
                }),
            )?;
            json!({
                "n": mesh.n,
                "flavor": mesh.flavor.name(),
                "kappa": mesh.kappa,
                "amplitude": mesh.amplitude,
                "seed": mesh.seed,
                "max_deviation": mesh.max_deviation(),
                "offset_bound": mesh.offset_bound(),
            })
        }
        None => Value::Null,
    };
    let summary = json!({
        "kind": kind(curve.spec()),
        "length": l,
        "samples": m,
        "min_curvature": kmin,
        "max_curvature": kmax,
        "convex": kmin > 0.0,
        "mesh": mesh,
    });
    write_json(&out.join(OutputNames::pick(&names.geometry_summary, "geometry.json")), &summary)
}

#[derive(Serialize)]
struct CirculationCheck {
    radius: f64,
    measured: f64,
    expected: f64,
}

#[derive(Serialize)]
struct StaticSummary {
    method: &'static str,
    n: usize,
    gamma: f64,
    hstar: String,
    lambda: Option<String>,
    relative_residual: f64,
    condition_estimate: f64,
    mean_error: Option<f64>,
    rank_one_discrepancy: Option<f64>,
    rhs_mean: Option<f64>,
    density_mean: f64,
    eval_count: usize,
    exact_sup_error: Option<f64>,
    circulation: CirculationCheck,
}

/// Radius of an origin-centred circle enclosing the obstacle and every blob.
fn enclosing_radius(nodes: &[Vec2], omega: &VorticityField) -> f64 {
    let far = nodes
        .iter()
        .map(|p| p.norm())
        .chain(omega.blobs.iter().map(|b| b.center.norm() + b.core_radius))
        .fold(0.0, f64::max);
    1.25 * far + 0.5
}

pub fn run_static(r: &Resolved, out: &Path) -> Result<(), CliError> {
    let p = static_problem(r)?;
    let o = solve_static(&p)?;
    let names = &r.raw.outputs;
    let d = &o.density;
    write_csv(
        &out.join(OutputNames::pick(&names.density, "density.csv")),
        &["i", "s", "x", "y", "value"],
        (0..d.n()).map(|i| {
            vec![
                Cell::Int(i as i64),
                Cell::Float(d.s[i]),
                Cell::Float(d.nodes[i].x),
                Cell::Float(d.nodes[i].y),
                Cell::Float(d.values[i]),
            ]
        }),
    )?;
    let pts = r.eval_points();
    let u = eval_batch(&pts, |x| total_velocity(d, &r.omega, x))?;
    let exact = if is_circle(r) {
        let sol = DiskExactSolution::for_curve(&p.curve, r.omega.blobs.clone(), r.raw.gamma)?;
        Some(eval_batch(&pts, |x| exact_disk_velocity(&sol, x))?)
    } else {
        None
    };
    let header: &[&str] = if exact.is_some() {
        &["x", "y", "u_x", "u_y", "exact_u_x", "exact_u_y"]
    } else {
        &["x", "y", "u_x", "u_y"]
    };
    write_csv(
        &out.join(OutputNames::pick(&names.field, "field.csv")),
        header,
        pts.iter().enumerate().map(|(k, x)| {
            let mut row = vec![Cell::Float(x.x), Cell::Float(x.y), Cell::Float(u[k].x), Cell::Float(u[k].y)];
            if let Some(e) = &exact {
                row.push(Cell::Float(e[k].x));
                row.push(Cell::Float(e[k].y));
            }
            row
        }),
    )?;
    let exact_sup_error = match &exact {
        Some(e) if !pts.is_empty() => Some(u.iter().zip(e).map(|(a, b)| (*a - *b).norm()).fold(0.0, f64::max)),
        _ => None,
    };
    let radius = enclosing_radius(&d.nodes, &r.omega);
    let measured = circulation(radius, CIRCULATION_POINTS, |x| total_velocity(d, &r.omega, x))?;
    let expected = r.raw.gamma + r.omega.total_mass();
    let summary = StaticSummary {
        method: r.method.name(),
        n: d.n(),
        gamma: r.raw.gamma,
        hstar: r.hstar.to_string(),
        lambda: r.lambda.as_ref().map(|l| l.to_string()),
        relative_residual: o.relative_residual,
        condition_estimate: o.condition,
        mean_error: o.mean_error,
        rank_one_discrepancy: o.rank_one_discrepancy,
        rhs_mean: o.rhs_mean,
        density_mean: d.mean(),
        eval_count: pts.len(),
        exact_sup_error,
        circulation: CirculationCheck { radius, measured, expected },
    };
    write_json(&out.join(OutputNames::pick(&names.summary, "summary.json")), &summary)
}

pub fn converge(r: &Resolved, out: &Path) -> Result<(), CliError> {
    let n_list = r.n_list.clone().ok_or_else(|| CliError::Config("converge needs n_list or --n-list".into()))?;
    if n_list.len() < 3 {
        return Err(CliError::Config(format!("cannot fit an order from {} mesh sizes; give at least 3", n_list.len())));
    }
    if !is_circle(r) {
        return Err(CliError::Config("converge compares against the exact disk flow and needs a circle".into()));
    }
    let mut p = static_problem(r)?;
    if r.mesh.is_none() {
        p.mesh = exvortex::mesh::MeshSpec::uniform(n_list[0]);
    }
    let mut pts = r.eval_points();
    if pts.is_empty() {
        if let CurveSpec::Circle { radius, center } = p.curve.spec() {
            pts = (0..360)
                .map(|k| {
                    let t = 2.0 * std::f64::consts::PI * k as f64 / 360.0;
                    *center + Vec2::new(3.0 * radius * t.cos(), 3.0 * radius * t.sin())
                })
                .collect();
        }
    }
    let c = static_convergence(&p, &n_list, &pts)?;
    let names = &r.raw.outputs;
    write_csv(
        &out.join(OutputNames::pick(&names.converge, "converge.csv")),
        &["n", "sup_error", "slope_so_far"],
        (0..c.ns.len()).map(|k| {
            vec![
                Cell::Int(c.ns[k] as i64),
                Cell::Float(c.errors[k]),
                c.slopes_so_far[k].map(Cell::Float).unwrap_or(Cell::Empty),
            ]
        }),
    )?;
    let summary = json!({
        "method": r.method.name(),
        "n_list": c.ns,
        "errors": c.errors,
        "fitted_order": c.fit.slope,
        "at_roundoff": c.fit.at_roundoff,
        "eval_count": pts.len(),
    });
    write_json(&out.join(OutputNames::pick(&names.converge_summary, "converge.json")), &summary)
}

/// Smooth deterministic test vector for the residual checks.
fn probe_vector(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            (3.0 * t).cos() + 0.5 * (5.0 * t).sin() + 0.25
        })
        .collect()
}

pub fn diagnose(r: &Resolved, out: &Path) -> Result<(), CliError> {
    let curve = r.curve()?;
    let spec = r.mesh()?;
    let samples = r.samples.unwrap_or(KERNEL_SAMPLES);
    if samples < 8 {
        return Err(CliError::Config("diagnose needs at least 8 samples".into()));
    }

    let vmesh = spec.build(curve, MeshFlavor::Vortex)?;
    let km = assemble(curve, &vmesh)?;
    let z = probe_vector(vmesh.n);
    let (cot_row, cot_col) = cot_sum_deviation(&vmesh)?;
    let pb = discrete_pb_residual(&km, &z)?;
    let (mean_res, mean_res_tilde) = mean_residual(&km, &z)?;
    let spectral = match spectral_radius_meanzero(&km) {
        Ok(s) => json!({"rho0": s.rho0, "rho_full": s.rho_full, "iterations": s.iterations, "converged": true}),
        Err(exvortex::Error::NoConvergence { iterations, rho0, rho_full }) => {
            json!({"rho0": rho0, "rho_full": rho_full, "iterations": iterations, "converged": false})
        }
        Err(e) => return Err(e.into()),
    };
    let (c_a, c_b) = boundedness_constants(&km)?;
    let vortex_condition = VortexSolver::new(curve, &vmesh)?.condition();

    let cmesh = spec.build(curve, MeshFlavor::Charge)?;
    let empty = VorticityField::empty();
    let basic = build_charge_system(curve, &cmesh, &empty, 0.0, r.hstar, None)?;
    let dominance = if r.method.is_charge() {
        let rep = dominance_margin(&charge_matrix(&assemble(curve, &cmesh)?));
        json!({"margins": rep.margins, "min_margin": rep.min_margin, "strictly_dominant": rep.strictly_dominant})
    } else {
        Value::Null
    };
    let lambda = match &r.lambda {
        Some(l) => {
            let sys = build_charge_system(curve, &cmesh, &empty, 0.0, r.hstar, Some(l))?;
            json!({
                "spec": l.to_string(),
                "mass": sys.lambda_mass(),
                "condition_estimate": condition_estimate(&sys)?,
            })
        }
        None => Value::Null,
    };
    let radii = geometric_radii(curve, samples);
    let mut report = json!({
        "method": r.method.name(),
        "n": spec.n,
        "length": curve.length(),
        "kind": kind(curve.spec()),
        "kernel": {
            "cot_sum_deviation": {"rows": cot_row, "columns": cot_col},
            "pb_residual": {
                "square": pb.square,
                "cross": pb.cross,
                "square_tilde": pb.square_tilde,
                "cross_tilde": pb.cross_tilde,
                "first": pb.first(),
                "second": pb.second(),
            },
            "mean_residual": {"plain": mean_res, "tilde": mean_res_tilde},
            "spectral": spectral,
            "boundedness": {"max_abs_a": c_a, "b_operator_norm": c_b},
        },
        "condition": {
            "vortex": vortex_condition,
            "charge": condition_estimate(&basic)?,
        },
        "dominance": dominance,
        "lambda": lambda,
        "radii": {
            "samples": samples,
            "kernel_sup": radii.kernel_sup,
            "kernel_inf": radii.kernel_inf,
            "r_sup": nonfinite_null(radii.r_sup),
            "r_inf": nonfinite_null(radii.r_inf),
            "condition_2": radii.condition_2,
            "condition_4": radii.condition_4,
        },
    });
    if !r.method.is_charge() {
        report["notes"] = json!(["dominance is defined for the charge matrix; request a charge method to compute it"]);
    }
    write_json(&out.join(OutputNames::pick(&r.raw.outputs.diagnose, "diagnose.json")), &report)
}

fn dynamics_method(m: Method) -> DynamicsMethod {
    match m {
        Method::Vortex => DynamicsMethod::Vortex,
        Method::Charge => DynamicsMethod::Charge,
        Method::ChargeLambda => DynamicsMethod::ChargeLambda,
        Method::ExactDisk => DynamicsMethod::ExactDisk,
        Method::FreeSpace => DynamicsMethod::FreeSpace,
    }
}

#[derive(Serialize)]
struct DynamicsSummary<'a> {
    method: &'static str,
    h: f64,
    t_end: f64,
    output_every: usize,
    snapshots: usize,
    final_time: f64,
    max_radius_drift: f64,
    circulation_drift: f64,
    history: &'a [Diagnostics],
}

pub fn dynamics(r: &Resolved, out: &Path) -> Result<(), CliError> {
    let cfg = r.raw.dynamics.ok_or_else(|| CliError::Config("a dynamics block is required".into()))?;
    if r.omega.blobs.is_empty() {
        return Err(CliError::Config("dynamics needs at least one blob".into()));
    }
    let method = dynamics_method(r.method);
    let needs_mesh = matches!(method, DynamicsMethod::Vortex | DynamicsMethod::Charge | DynamicsMethod::ChargeLambda);
    if needs_mesh && r.mesh.is_none() {
        return Err(CliError::Config(format!("method '{}' needs a mesh block", method.name())));
    }
    if method == DynamicsMethod::ExactDisk && !is_circle(r) {
        return Err(CliError::Config("exact_disk needs a circle".into()));
    }
    let curve = if method == DynamicsMethod::FreeSpace { None } else { r.curve.clone() };
    let setup = DynamicsSetup {
        method,
        curve,
        mesh: r.mesh,
        gamma: r.raw.gamma,
        hstar: r.hstar,
        lambda: r.lambda.clone(),
    };
    let sim = Simulation::new(&setup)?;
    let traj = sim.run(&SimulationState::new(r.omega.blobs.clone()), cfg.t_end, cfg.h, cfg.output_every)?;
    let names = &r.raw.outputs;
    write_csv(
        &out.join(OutputNames::pick(&names.trajectory, "traj.csv")),
        &["t", "blob_index", "x", "y"],
        traj.snapshots.iter().flat_map(|s| {
            s.blobs.iter().enumerate().map(move |(k, b)| {
                vec![Cell::Float(s.t), Cell::Int(k as i64), Cell::Float(b.center.x), Cell::Float(b.center.y)]
            })
        }),
    )?;
    let summary = DynamicsSummary {
        method: method.name(),
        h: cfg.h,
        t_end: cfg.t_end,
        output_every: cfg.output_every,
        snapshots: traj.snapshots.len(),
        final_time: traj.final_state().t,
        max_radius_drift: traj.max_radius_drift,
        circulation_drift: traj.circulation_drift,
        history: &traj.diagnostics,
    };
    write_json(&out.join(OutputNames::pick(&names.diagnostics, "diagnostics.json")), &summary)
}
