//! Ground states by manifold-projected Sobolev-gradient descent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::critical::{nonexistence_certificate, NonexistenceCertificate};
use crate::energies::{constraint_gradient_with, dual_norm, h1_riesz, j_weights, l2_gradient_with, pohozaev_residual};
use crate::error::{Error, Result};
use crate::manifolds::{fiber_max_on, project, relative_residual, Projection};
use crate::problem::{Family, Manifold, Potential, ProblemSpec};
use crate::radial::{norm, radial_derivative, NormKind, RadialField};
use crate::sum::Accumulator;

pub const LEVEL_LABEL: &str = "variational upper bound consistent with inf-max characterization";

const STAGNATION_WINDOW: usize = 50;
const MIN_STEP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    pub max_iterations: usize,
    /// Bound on the dual `H^1` norm of `I'(u)`.
    pub tol_gradient: f64,
    /// Bound on `|constraint| / (a_grad + a_pot)`.
    pub tol_manifold: f64,
    pub initial_step: f64,
    /// Upper bound for the step after growth on accepted iterations.
    pub max_step: f64,
    pub backtrack_factor: f64,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
    pub seed: u64,
    /// Overrides the default manifold of the problem.
    pub manifold: Option<Manifold>,
    /// The pure critical family has no ground state; solving it must be
    /// requested explicitly.
    pub allow_critical_pure: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            tol_gradient: 1e-7,
            tol_manifold: 1e-9,
            initial_step: 1.0,
            max_step: 100.0,
            backtrack_factor: 0.5,
            armijo: 1e-4,
            seed: 0,
            manifold: None,
            allow_critical_pure: false,
        }
    }
}

impl SolveOptions {
    /// Settings for the pure critical diagnostic: small fixed steps so the
    /// run follows the concentration flow up to the iteration cap.
    pub fn critical_pure_diagnostic() -> Self {
        Self {
            max_iterations: 400,
            initial_step: 0.05,
            max_step: 0.05,
            allow_critical_pure: true,
            ..Self::default()
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.tol_gradient > 0.0) {
            v.push(format!("solver.tol_gradient = {} must be positive", self.tol_gradient));
        }
        if !(self.tol_manifold > 0.0) {
            v.push(format!("solver.tol_manifold = {} must be positive", self.tol_manifold));
        }
        if !(self.initial_step > 0.0) {
            v.push(format!("solver.initial_step = {} must be positive", self.initial_step));
        }
        if !(self.max_step >= self.initial_step) {
            v.push(format!("solver.max_step = {} must be at least initial_step", self.max_step));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            v.push(format!("solver.backtrack_factor = {} must lie in (0, 1)", self.backtrack_factor));
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            v.push(format!("solver.armijo = {} must lie in (0, 1)", self.armijo));
        }
        if self.max_iterations == 0 {
            v.push("solver.max_iterations must be at least 1".into());
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `|G|`, `|\tilde G|` or `|\tilde G^*|` over `a_grad + a_pot`.
    pub manifold: f64,
    /// `|Poh(u)| / |I(u)|`.
    pub pohozaev: f64,
    /// Dual `H^1` norm of the part of `I'(u)` tangent to the manifold:
    /// the stationarity measure of the constrained minimization.
    pub gradient: f64,
    /// Dual `H^1` norm of the full `I'(u)`. On `N` and `N*` it agrees with
    /// `gradient` at convergence; on `M` it carries the multiplier of the
    /// constraint, which is of the size of the discretization error.
    pub gradient_free: f64,
    /// Multiplier `lambda` in `I' = lambda G' + tangential part`.
    pub multiplier: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub energy: f64,
    pub gradient: f64,
    pub step: f64,
    /// The accepted step satisfied the sufficient-decrease test.
    pub armijo: bool,
    pub radius90: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub level: f64,
    pub level_label: String,
    pub manifold: Manifold,
    #[serde(skip)]
    pub u_star: Option<RadialField>,
    #[serde(skip)]
    pub phi_star: Option<RadialField>,
    pub residuals: Residuals,
    pub iterations: usize,
    pub converged: bool,
    /// `\|u\|_{p+1}` (or `q+1`, or 6) at the final point.
    pub manifold_norm: f64,
    pub certificate: Option<NonexistenceCertificate>,
    pub probe_bounds: Vec<f64>,
    pub history: Vec<IterationRecord>,
}

impl SolveReport {
    pub fn u_star(&self) -> &RadialField {
        self.u_star.as_ref().expect("solution field")
    }

    pub fn phi_star(&self) -> &RadialField {
        self.phi_star.as_ref().expect("potential field")
    }

    /// Final 90%-mass radii of the last `n` records.
    pub fn radius_trace(&self, n: usize) -> Vec<f64> {
        let k = self.history.len().saturating_sub(n);
        self.history[k..].iter().map(|r| r.radius90).collect()
    }
}

fn initial_guess(spec: &ProblemSpec) -> RadialField {
    RadialField::from_fn_dirichlet(spec.grid, |r| (-r * r / 2.0).exp())
}

fn sign_normalize(u: RadialField) -> RadialField {
    let s: f64 = crate::sum::sum(u.values().iter().copied());
    if s < 0.0 {
        u.scaled(-1.0)
    } else {
        u
    }
}

fn manifold_exponent(family: Family) -> f64 {
    family.exponent().map_or(6.0, |p| p + 1.0)
}

/// Minimizes the energy over the constraint manifold of `spec`.
///
/// For the pure critical family the run always ends at the iteration cap
/// with a nonexistence certificate and the concentration trace in place of
/// a ground state.
pub fn solve_ground_state(spec: &ProblemSpec, opts: &SolveOptions) -> Result<SolveReport> {
    let v = opts.violations();
    if !v.is_empty() {
        return Err(Error::Config(v.join("; ")));
    }
    let pure = spec.family == Family::CriticalPure;
    if pure && !opts.allow_critical_pure {
        return Err(Error::CriticalPureNotEnabled);
    }
    let manifold = opts.manifold.unwrap_or_else(|| spec.default_manifold());
    spec.check_manifold(manifold)?;

    let mut x = project(&initial_guess(spec), spec, manifold)?;
    let mut history = Vec::new();
    let mut step = opts.initial_step;
    let mut stalled = 0usize;
    let mut converged = false;
    let mut iterations = 0;

    loop {
        let t = tangential(&x, spec, manifold);
        let dir = t.direction;
        let gnorm2 = t.norm * t.norm;
        let gnorm = t.norm;
        let manres = relative_residual(&x, spec.family, manifold);
        if !pure && gnorm <= opts.tol_gradient && manres <= opts.tol_manifold {
            converged = true;
            break;
        }
        if iterations >= opts.max_iterations {
            break;
        }
        iterations += 1;

        let (next, accepted_step, armijo) = line_search(&x, &dir, gnorm2, step, spec, manifold, opts)?;
        let decreased = next.level < x.level;
        stalled = if decreased { 0 } else { stalled + 1 };
        step = if armijo { (accepted_step / opts.backtrack_factor).min(opts.max_step) } else { opts.initial_step };
        x = next;
        let radius90 = if pure { mass_radius(&x.field, spec, 0.9)? } else { f64::NAN };
        history.push(IterationRecord { iteration: iterations, energy: x.level, gradient: gnorm, step: accepted_step, armijo, radius90 });
        if stalled >= STAGNATION_WINDOW {
            return Err(Error::Stagnation { iterations, energy: x.level, gradient: gnorm });
        }
    }

    let t = tangential(&x, spec, manifold);
    let u = x.field;
    let residuals = Residuals {
        manifold: relative_residual_of(&x.coefficients, spec.family, manifold),
        pohozaev: pohozaev_residual(&u, spec)?.abs() / x.level.abs(),
        gradient: t.norm,
        gradient_free: dual_norm(&l2_gradient_with(&u, &x.phi, spec)),
        multiplier: t.multiplier,
    };
    let certificate = if pure { Some(nonexistence_certificate(&u, &spec.potential)?) } else { None };
    Ok(SolveReport {
        level: x.level,
        level_label: LEVEL_LABEL.into(),
        manifold,
        manifold_norm: norm(&u, NormKind::Lebesgue(manifold_exponent(spec.family)))?,
        u_star: Some(u),
        phi_star: Some(x.phi),
        residuals,
        iterations,
        converged,
        certificate,
        probe_bounds: Vec::new(),
        history,
    })
}

fn relative_residual_of(k: &crate::energies::FiberCoefficients, family: Family, manifold: Manifold) -> f64 {
    crate::energies::residual_from(k, family, manifold).abs() / k.a()
}

struct Tangential {
    direction: RadialField,
    norm: f64,
    multiplier: f64,
}

/// `H^1` Riesz representative of `I'` with its component along the
/// constraint normal removed.
fn tangential(x: &Projection, spec: &ProblemSpec, manifold: Manifold) -> Tangential {
    let g = l2_gradient_with(&x.field, &x.phi, spec);
    let n = constraint_gradient_with(&x.field, &x.phi, spec, manifold);
    let gh = h1_riesz(&g);
    let nh = h1_riesz(&n);
    let nn = inner_energy(&n, &nh);
    let multiplier = if nn > 0.0 { inner_energy(&g, &nh) / nn } else { 0.0 };
    let direction = gh.axpy(-multiplier, &nh).expect("same grid");
    let reduced = g.axpy(-multiplier, &n).expect("same grid");
    let norm = inner_energy(&reduced, &direction).max(0.0).sqrt();
    Tangential { direction, norm, multiplier }
}

fn inner_energy(f: &RadialField, g: &RadialField) -> f64 {
    let w = f.grid().energy_weights();
    let mut acc = Accumulator::new();
    for i in 0..f.len() {
        acc.add(w[i] * f.value(i) * g.value(i));
    }
    acc.value()
}

/// Backtracking on `alpha -> I(P(u - alpha d))`. Returns the new point, the
/// step taken and whether the sufficient-decrease test held.
fn line_search(
    x: &Projection,
    dir: &RadialField,
    gnorm2: f64,
    mut step: f64,
    spec: &ProblemSpec,
    manifold: Manifold,
    opts: &SolveOptions,
) -> Result<(Projection, f64, bool)> {
    let mut fallback: Option<(Projection, f64)> = None;
    while step >= MIN_STEP {
        let trial = sign_normalize(x.field.axpy(-step, dir)?);
        match project(&trial, spec, manifold) {
            Ok(p) => {
                if p.level <= x.level - opts.armijo * step * gnorm2 {
                    return Ok((p, step, true));
                }
                if p.level < x.level && fallback.is_none() {
                    fallback = Some((p, step));
                }
            }
            Err(Error::Bracket(_)) | Err(Error::ZeroField) => {}
            Err(e) => return Err(e),
        }
        step *= opts.backtrack_factor;
    }
    Ok(match fallback {
        Some((p, s)) => (p, s, false),
        None => (x.clone(), 0.0, false),
    })
}

/// Levels of `fiber_max` over `n_probes` random positive bump fields.
pub fn probe_upper_bounds(report: &SolveReport, spec: &ProblemSpec, n_probes: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r_max = spec.grid.radius() / 4.0;
    let params: Vec<Vec<(f64, f64, f64)>> = (0..n_probes)
        .map(|_| {
            let bumps = rng.gen_range(1..=3);
            (0..bumps)
                .map(|_| (rng.gen_range(0.2..2.0), rng.gen_range(0.0..r_max), rng.gen_range(0.3..3.0)))
                .collect()
        })
        .collect();
    params
        .par_iter()
        .map(|bumps| {
            let u = random_bump(spec, bumps);
            fiber_max_on(&u, spec, report.manifold).map(|f| f.level)
        })
        .collect()
}

fn random_bump(spec: &ProblemSpec, bumps: &[(f64, f64, f64)]) -> RadialField {
    RadialField::from_fn_dirichlet(spec.grid, |r| {
        bumps
            .iter()
            .map(|(a, c, w)| a * ((-((r - c) / w).powi(2)).exp() + (-((r + c) / w).powi(2)).exp()))
            .sum()
    })
}

/// Weights `(grad, potential, coulomb, sixth)` of the concentration measure
/// natural to `manifold`.
fn measure_weights(family: Family, manifold: Manifold) -> (f64, f64, f64, f64) {
    match (manifold, family) {
        (Manifold::N, Family::Subcritical { p }) => {
            let s = 1.0 / (p + 1.0);
            (0.5 - s, 0.5 - s, 0.25 - s, 0.0)
        }
        _ => j_weights(family),
    }
}

/// Cumulative measure `nu(B_{r_i})` at every node.
fn cumulative_measure(u: &RadialField, spec: &ProblemSpec) -> Result<Vec<f64>> {
    let grid = spec.grid;
    u.ensure_same_grid(&RadialField::zeros(grid))?;
    let manifold = spec.default_manifold();
    let (wg, wp, wb, wd) = measure_weights(spec.family, manifold);
    let du = radial_derivative(u);
    let phi = crate::poisson::solve_poisson(u);
    let v = spec.potential.sampled(&grid);
    let h = grid.spacing();
    let density: Vec<f64> = (0..=grid.intervals())
        .map(|i| {
            let r = grid.node(i);
            let x = u.value(i);
            let x2 = x * x;
            4.0 * std::f64::consts::PI * r * r
                * (wg * du.value(i).powi(2) + wp * v.value(i) * x2 + wb * phi.value(i) * x2 + wd * x2 * x2 * x2)
        })
        .collect();
    let mut out = vec![0.0; density.len()];
    let mut acc = Accumulator::new();
    for i in 1..density.len() {
        acc.add(0.5 * h * (density[i - 1] + density[i]));
        out[i] = acc.value();
    }
    Ok(out)
}

/// `nu(B_r) / nu(R^3)` for each radius; the measure is the one the
/// concentration-compactness argument uses for the family and manifold.
pub fn concentration_profile(u: &RadialField, spec: &ProblemSpec, radii: &[f64]) -> Result<Vec<f64>> {
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    let cum = cumulative_measure(u, spec)?;
    let total = *cum.last().unwrap();
    let grid = spec.grid;
    Ok(radii
        .iter()
        .map(|&r| {
            if r <= 0.0 {
                return 0.0;
            }
            if r >= grid.radius() {
                return 1.0;
            }
            let xi = r / grid.spacing();
            let i = (xi.floor() as usize).min(grid.intervals() - 1);
            let f = xi - i as f64;
            ((1.0 - f) * cum[i] + f * cum[i + 1]) / total
        })
        .collect())
}

/// Smallest radius holding the fraction `mass` of the concentration measure.
pub fn mass_radius(u: &RadialField, spec: &ProblemSpec, mass: f64) -> Result<f64> {
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    let cum = cumulative_measure(u, spec)?;
    let target = mass * cum.last().unwrap();
    let grid = spec.grid;
    for i in 1..cum.len() {
        if cum[i] >= target {
            let f = if cum[i] > cum[i - 1] { (target - cum[i - 1]) / (cum[i] - cum[i - 1]) } else { 1.0 };
            return Ok(grid.node(i - 1) + f * grid.spacing());
        }
    }
    Ok(grid.radius())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationPoint {
    pub delta: f64,
    pub level: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationReport {
    pub base_level: f64,
    pub points: Vec<ContinuationPoint>,
    /// `max |c(V + delta) - c(V)| / |delta|` over nonzero deltas.
    pub lipschitz: f64,
    /// Levels are nondecreasing in delta within `1e-8 (1 + |c|)`.
    pub monotone: bool,
}

/// Levels of `V + delta` for each delta. Solves are independent and run in
/// parallel; the result is ordered as `deltas`.
#[allow(non_snake_case)]
pub fn continuation_c_of_V(
    base: &Potential,
    deltas: &[f64],
    template: &ProblemSpec,
    opts: &SolveOptions,
) -> Result<ContinuationReport> {
    let mut all: Vec<f64> = deltas.to_vec();
    if !all.contains(&0.0) {
        all.push(0.0);
    }
    let solved: Vec<Result<ContinuationPoint>> = all
        .par_iter()
        .map(|&delta| {
            let spec = template.with_potential(base.shifted(delta))?;
            let rep = solve_ground_state(&spec, opts)?;
            Ok(ContinuationPoint { delta, level: rep.level, converged: rep.converged })
        })
        .collect();
    let solved: Vec<ContinuationPoint> = solved.into_iter().collect::<Result<_>>()?;
    let base_level = solved.iter().find(|p| p.delta == 0.0).expect("delta 0").level;
    let points: Vec<ContinuationPoint> =
        deltas.iter().map(|d| *solved.iter().find(|p| p.delta == *d).unwrap()).collect();
    let lipschitz = solved
        .iter()
        .filter(|p| p.delta != 0.0)
        .map(|p| (p.level - base_level).abs() / p.delta.abs())
        .fold(0.0, f64::max);
    let mut sorted = solved.clone();
    sorted.sort_by(|a, b| a.delta.total_cmp(&b.delta));
    let monotone = sorted
        .windows(2)
        .all(|w| w[1].level >= w[0].level - 1e-8 * (1.0 + w[0].level.abs()));
    Ok(ContinuationReport { base_level, points, lipschitz, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energies::eval_energy;
    use crate::manifolds::fiber_max;
    use crate::radial::RadialGrid;

    fn flat(p: f64, n: usize) -> ProblemSpec {
        ProblemSpec::subcritical(p, Potential::Constant(1.0), RadialGrid::new(20.0, n).unwrap()).unwrap()
    }

    #[test]
    fn converges_and_is_consistent() {
        let spec = flat(3.0, 1000);
        let rep = solve_ground_state(&spec, &SolveOptions::default()).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.level, eval_energy(rep.u_star(), &spec).unwrap());
        assert!(rep.residuals.gradient <= 1e-7 && rep.residuals.manifold <= 1e-9);
        assert!(rep.u_star().values().iter().all(|v| *v >= 0.0));
        let fm = fiber_max(rep.u_star(), &spec).unwrap();
        assert!((fm.level - rep.level).abs() <= 1e-9 * rep.level);
        let accepted: Vec<f64> = rep.history.iter().filter(|h| h.armijo).map(|h| h.energy).collect();
        assert!(accepted.windows(2).all(|w| w[1] < w[0]));
        let probes = probe_upper_bounds(&rep, &spec, 8, 1).unwrap();
        assert!(probes.iter().all(|l| *l >= rep.level - 1e-8 * (1.0 + rep.level)));
        assert_eq!(probes, probe_upper_bounds(&rep, &spec, 8, 1).unwrap());
    }

    #[test]
    fn concentration_profile_endpoints() {
        let spec = flat(3.0, 1000);
        let rep = solve_ground_state(&spec, &SolveOptions::default()).unwrap();
        let radii: Vec<f64> = (0..=40).map(|k| k as f64 * 0.5).collect();
        let prof = concentration_profile(rep.u_star(), &spec, &radii).unwrap();
        assert_eq!(prof[0], 0.0);
        assert_eq!(prof[40], 1.0);
        assert!(prof.windows(2).all(|w| w[1] >= w[0]));
        assert!(prof[20] >= 0.99);
        let r90 = mass_radius(rep.u_star(), &spec, 0.9).unwrap();
        let at = concentration_profile(rep.u_star(), &spec, &[r90]).unwrap()[0];
        assert!((at - 0.9).abs() < 1e-9);
    }

    #[test]
    fn guards() {
        let grid = RadialGrid::new(20.0, 400).unwrap();
        let spec = ProblemSpec::new(Family::CriticalPure, Potential::Constant(1.0), grid).unwrap();
        assert!(matches!(solve_ground_state(&spec, &SolveOptions::default()), Err(Error::CriticalPureNotEnabled)));
        let bad = SolveOptions { backtrack_factor: 1.5, tol_gradient: 0.0, ..Default::default() };
        assert_eq!(bad.violations().len(), 2);
        let spec = flat(3.0, 400);
        let opts = SolveOptions { manifold: Some(Manifold::N), ..Default::default() };
        assert!(matches!(solve_ground_state(&spec, &opts), Err(Error::NonUniqueFiber(_))));
    }
}
