//! Experiment dispatch. Every run writes `report.json` (configuration,
//! results, metadata) plus experiment-specific CSV files into the output
//! directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{bubble_grid, Experiment, RunConfig};
use crate::critical::{
    bubble_scaling_table, critical_level_certificate, cutoff_bubble, estimate_S, nonexistence_certificate,
    BubbleParams, BubbleRow, BubbleTable, Verdict,
};
use crate::energies::{eval_energy, gradient, Metric};
use crate::error::{Error, Result};
use crate::manifolds::{project, relative_residual};
use crate::poisson::{brute_force_coulomb, coulomb_energy, solve_poisson};
use crate::problem::{Family, Manifold, Potential, ProblemSpec};
use crate::radial::{energy_inner, RadialField, RadialGrid};
use crate::solver::{
    concentration_profile, continuation_c_of_V, mass_radius, probe_upper_bounds, solve_ground_state, SolveReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_INVALID: i32 = 4;

/// Process exit code for an error that aborted a run.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Stagnation { .. } => EXIT_NOT_CONVERGED,
        Error::Parse { .. } | Error::Validation(_) | Error::Config(_) | Error::Spec(_) => EXIT_INVALID,
        Error::CriticalPureNotEnabled | Error::UnsupportedCombination(_) | Error::NonUniqueFiber { .. } => {
            EXIT_INVALID
        }
        _ => EXIT_CHECK_FAILED,
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: i32,
    /// Deterministic part of the report: everything except `metadata`.
    pub result: Value,
    pub files: Vec<PathBuf>,
}

struct Output<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl Output<'_> {
    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        self.files.push(path);
        Ok(())
    }
}

fn metadata() -> Value {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    json!({
        "timestamp_unix": secs,
        "version": env!("CARGO_PKG_VERSION"),
        "threads": rayon::current_num_threads(),
    })
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

/// Runs `config.experiment` and writes its artifacts into `out`.
pub fn run(config: &RunConfig, out: &Path) -> Result<RunOutcome> {
    let v = config.violations();
    if !v.is_empty() {
        return Err(Error::Validation(v));
    }
    fs::create_dir_all(out)?;
    let mut output = Output { dir: out, files: Vec::new() };
    let (exit_code, body) = match config.experiment {
        Experiment::Solve => run_solve(config, &mut output)?,
        Experiment::CertifyCritical => run_certify(config, &mut output)?,
        Experiment::Nonexistence => run_nonexistence(config, &mut output)?,
        Experiment::Bubbles => run_bubbles(config, &mut output)?,
        Experiment::Continuation => run_continuation(config)?,
        Experiment::Check => run_check(config)?,
    };
    let result = json!({
        "experiment": config.experiment.name(),
        "exit_code": exit_code,
        "config": config.to_json(),
        "result": body,
    });
    let mut report = result.clone();
    report["metadata"] = metadata();
    output.write("report.json", &serde_json::to_string_pretty(&report)?)?;
    Ok(RunOutcome { exit_code, result, files: output.files })
}

fn solve_summary(rep: &SolveReport, spec: &ProblemSpec) -> Result<Value> {
    let u = rep.u_star();
    let radii: Vec<f64> = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0].into_iter().filter(|r| *r < spec.grid.radius()).collect();
    let profile = concentration_profile(u, spec, &radii)?;
    Ok(json!({
        "level": rep.level,
        "level_label": rep.level_label,
        "manifold": rep.manifold,
        "converged": rep.converged,
        "iterations": rep.iterations,
        "residuals": rep.residuals,
        "manifold_norm": rep.manifold_norm,
        "u_at_origin": u.value(0),
        "radius50": mass_radius(u, spec, 0.5)?,
        "radius90": mass_radius(u, spec, 0.9)?,
        "concentration": radii.iter().zip(&profile).map(|(r, m)| json!({"r": r, "mass": m})).collect::<Vec<_>>(),
    }))
}

fn write_fields(rep: &SolveReport, out: &mut Output, prefix: &str) -> Result<()> {
    out.write(&format!("{prefix}u_star.csv"), &rep.u_star().to_csv_string())?;
    out.write(&format!("{prefix}phi_star.csv"), &rep.phi_star().to_csv_string())?;
    let mut hist = String::from("iteration,energy,gradient,step,armijo,radius90\n");
    for h in &rep.history {
        hist.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{},{:.16e}\n",
            h.iteration, h.energy, h.gradient, h.step, h.armijo, h.radius90
        ));
    }
    out.write(&format!("{prefix}history.csv"), &hist)
}

fn run_solve(config: &RunConfig, out: &mut Output) -> Result<(i32, Value)> {
    let spec = config.spec()?;
    let rep = solve_ground_state(&spec, &config.solver)?;
    write_fields(&rep, out, "")?;
    let mut body = solve_summary(&rep, &spec)?;
    if config.probes.count > 0 && spec.family != Family::CriticalPure {
        let probes = probe_upper_bounds(&rep, &spec, config.probes.count, config.seed)?;
        let min = probes.iter().copied().fold(f64::INFINITY, f64::min);
        body["probes"] = json!({
            "count": probes.len(),
            "seed": config.seed,
            "min_level": min,
            "below_level": probes.iter().filter(|l| **l < rep.level - 1e-8 * (1.0 + rep.level.abs())).count(),
        });
    }
    if let Some(c) = &rep.certificate {
        body["certificate"] = to_value(c);
    }
    Ok((if rep.converged { 0 } else { EXIT_NOT_CONVERGED }, body))
}

fn run_certify(config: &RunConfig, out: &mut Output) -> Result<(i32, Value)> {
    let Family::CriticalPerturbed { q } = config.problem.family() else {
        return Err(Error::Config("certify-critical needs a perturbed critical problem".into()));
    };
    let c = &config.certificate;
    let s_estimate = estimate_S(c.sobolev_grid.build()?)?;
    let grid = bubble_grid(&c.epsilons, c.r_cut, c.resolution)?;
    let potential = config.problem.potential().sample(grid)?;
    let params = BubbleParams::new(c.epsilons[0], c.r_cut)?;
    let cert = critical_level_certificate(q, &potential, &c.epsilons, &params, grid, s_estimate, c.margin)?;
    let mut csv = String::from("epsilon,bound\n");
    for (e, b) in &cert.bounds {
        csv.push_str(&format!("{e:.16e},{b:.16e}\n"));
    }
    out.write("bubble_bounds.csv", &csv)?;
    let mut body = json!({
        "bubble_grid": {"R": grid.radius(), "N": grid.intervals()},
        "certificate": to_value(&cert),
    });
    let mut code = if cert.verdict == Verdict::Certified { EXIT_OK } else { EXIT_INCONCLUSIVE };
    if c.solve {
        let spec = config.spec()?;
        let rep = solve_ground_state(&spec, &config.solver)?;
        write_fields(&rep, out, "")?;
        body["solve"] = solve_summary(&rep, &spec)?;
        body["solve"]["below_threshold"] = json!(rep.level < cert.threshold);
        if code == EXIT_OK && !rep.converged {
            code = EXIT_NOT_CONVERGED;
        }
    }
    Ok((code, body))
}

/// Test fields on which the nonexistence certificate is evaluated besides
/// the final iterate.
fn certificate_corpus(grid: RadialGrid) -> Vec<(&'static str, RadialField)> {
    let mut corpus = vec![
        ("gaussian", RadialField::from_fn_dirichlet(grid, |r| (-r * r / 2.0).exp())),
        ("exponential", RadialField::from_fn_dirichlet(grid, |r| (-r).exp())),
        ("shell", RadialField::from_fn_dirichlet(grid, |r| (-(r - 2.0).powi(2)).exp())),
        ("signed", RadialField::from_fn_dirichlet(grid, |r| (1.0 - r * r) * (-r * r / 2.0).exp())),
    ];
    let r_cut = grid.radius() / 4.0;
    for eps in [1e-2, 1e-1] {
        if let Ok(p) = BubbleParams::new(eps, r_cut) {
            if let Ok(v) = cutoff_bubble(&p, grid) {
                corpus.push(("bubble", v));
            }
        }
    }
    corpus
}

fn run_nonexistence(config: &RunConfig, out: &mut Output) -> Result<(i32, Value)> {
    let spec = config.spec()?;
    let mut opts = config.solver.clone();
    opts.allow_critical_pure = true;
    let rep = solve_ground_state(&spec, &opts)?;
    write_fields(&rep, out, "")?;
    let cert = rep.certificate.expect("pure critical runs carry a certificate");
    let trace = rep.radius_trace(100);
    let monotone = trace.windows(2).all(|w| w[1] <= w[0]);
    let corpus: Vec<Value> = certificate_corpus(spec.grid)
        .into_iter()
        .map(|(name, u)| {
            nonexistence_certificate(&u, &spec.potential).map(|c| {
                json!({"field": name, "value": c.value, "lower_bound": c.lower_bound, "excludes": c.excludes_solution()})
            })
        })
        .collect::<Result<_>>()?;
    let all = cert.excludes_solution() && corpus.iter().all(|c| c["excludes"] == json!(true));
    let body = json!({
        "final_energy": rep.level,
        "iterations": rep.iterations,
        "certificate": to_value(&cert),
        "radius90_first": trace.first(),
        "radius90_last": trace.last(),
        "radius90_monotone_last_100": monotone,
        "corpus": corpus,
        "all_excluded": all,
    });
    Ok((if all { EXIT_OK } else { EXIT_CHECK_FAILED }, body))
}

fn run_bubbles(config: &RunConfig, out: &mut Output) -> Result<(i32, Value)> {
    let b = &config.bubbles;
    let s_estimate = estimate_S(config.certificate.sobolev_grid.build()?)?;
    let params = BubbleParams::new(b.epsilons[0], b.r_cut)?;
    let grid = bubble_grid(&b.epsilons, b.r_cut, b.resolution)?;
    let lebesgue = bubble_scaling_table(&b.epsilons, &b.s, &params, grid, s_estimate)?;
    let grid_g = bubble_grid(&b.gradient_epsilons, b.r_cut, b.resolution)?;
    let grad = bubble_scaling_table(&b.gradient_epsilons, &[], &params, grid_g, s_estimate)?;
    let keep = |rows: &[BubbleRow], want_grad: bool| -> Vec<BubbleRow> {
        rows.iter().filter(|r| (r.s == "grad") == want_grad).cloned().collect()
    };
    let mut rows = keep(&grad.rows, true);
    rows.extend(keep(&lebesgue.rows, false));
    let mut fits: Vec<_> = grad.fits.iter().filter(|f| f.s == "grad").cloned().collect();
    fits.extend(lebesgue.fits.iter().filter(|f| f.s != "grad").cloned());
    let table = BubbleTable { s_reference: s_estimate, rows, fits };
    out.write("bubbles.csv", &table.to_csv())?;
    let body = json!({
        "S_estimate": s_estimate,
        "fits": table
            .fits
            .iter()
            .map(|f| json!({
                "s": f.s, "fitted_slope": f.fitted_slope, "expected": f.expected,
                "relative_error": f.relative_error(), "residual": f.residual,
            }))
            .collect::<Vec<_>>(),
    });
    Ok((EXIT_OK, body))
}

fn run_continuation(config: &RunConfig) -> Result<(i32, Value)> {
    let spec = config.spec()?;
    let rep = continuation_c_of_V(&spec.potential, &config.continuation.deltas, &spec, &config.solver)?;
    let mut body = to_value(&rep);
    let mut code = if rep.points.iter().all(|p| p.converged) { EXIT_OK } else { EXIT_NOT_CONVERGED };
    if config.continuation.compare_infinity && !spec.potential.is_constant() {
        let manifold = config.solver.manifold.unwrap_or_else(|| spec.default_manifold());
        let flat = spec.with_potential(Potential::Constant(spec.potential.v_infinity()))?;
        let mut opts = config.solver.clone();
        opts.manifold = Some(manifold);
        let inf = solve_ground_state(&flat, &opts)?;
        if !inf.converged {
            code = EXIT_NOT_CONVERGED;
        }
        body["c_infinity"] = json!({
            "manifold": manifold,
            "level": inf.level,
            "converged": inf.converged,
            "gap": inf.level - rep.base_level,
        });
    }
    Ok((code, body))
}

#[derive(Debug, Clone, Serialize)]
struct Check {
    name: &'static str,
    value: f64,
    tolerance: f64,
    pass: bool,
}

fn check(name: &'static str, value: f64, tolerance: f64) -> Check {
    Check { name, value, tolerance, pass: value.is_finite() && value <= tolerance }
}

/// Self-consistency suite on the configured problem.
fn run_check(config: &RunConfig) -> Result<(i32, Value)> {
    let spec = config.spec()?;
    let grid = spec.grid;
    let mut checks = Vec::new();

    // Coulomb energy of exp(-r^2/2) equals (pi/2)^{3/2}.
    let small = RadialGrid::new(20.0, 2000)?;
    let g = RadialField::from_fn_dirichlet(small, |r| (-r * r / 2.0).exp());
    let exact = (std::f64::consts::PI / 2.0).powf(1.5);
    let fast = coulomb_energy(&g);
    checks.push(check("coulomb_closed_form", (fast - exact).abs() / exact, 1e-8));
    checks.push(check("coulomb_oracle", (fast - brute_force_coulomb(&g)?).abs() / exact, 1e-6));

    let u = RadialField::from_fn_dirichlet(grid, |r| (-r * r / 2.0).exp());
    let phi = solve_poisson(&u);
    checks.push(check("poisson_nonnegative", -phi.values().iter().copied().fold(0.0, f64::min), 0.0));

    let dir = RadialField::from_fn_dirichlet(grid, |r| (1.0 + r * r) * (-r * r).exp());
    let step = 1e-4;
    let plus = eval_energy(&u.axpy(step, &dir)?, &spec)?;
    let minus = eval_energy(&u.axpy(-step, &dir)?, &spec)?;
    let fd = (plus - minus) / (2.0 * step);
    let an = energy_inner(&gradient(&u, &spec, Metric::L2)?, &dir)?;
    checks.push(check("gradient_directional", (fd - an).abs() / an.abs().max(1.0), 1e-6));

    let manifold = config.solver.manifold.unwrap_or_else(|| spec.default_manifold());
    let proj = project(&u, &spec, manifold)?;
    checks.push(check("projection_residual", relative_residual(&proj, spec.family, manifold), 1e-10));
    let again = project(&proj.field, &spec, manifold)?;
    checks.push(check("projection_idempotent", (again.level - proj.level).abs() / proj.level.abs(), 1e-10));
    if manifold != Manifold::M {
        let worst = [0.9, 1.1]
            .iter()
            .map(|t| eval_energy(&proj.field.scaled(*t), &spec).map(|e| e - proj.level))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        checks.push(check("fiber_maximum", worst, 0.0));
    }

    let ok = checks.iter().all(|c| c.pass);
    let body = json!({ "checks": checks, "all_passed": ok });
    Ok((if ok { EXIT_OK } else { EXIT_CHECK_FAILED }, body))
}
