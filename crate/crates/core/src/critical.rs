//! Critical-exponent toolkit: Talenti bubbles, the Sobolev constant, the
//! level certificate for `c*` and the Pohozaev nonexistence certificate.

use serde::{Deserialize, Serialize};

use rayon::prelude::*;

use crate::energies::fiber_coefficients;
use crate::error::{Error, Result};
use crate::manifolds::scalar_root;
use crate::poisson::solve_poisson;
use crate::problem::{Family, Potential, ProblemSpec};
use crate::radial::{dirichlet_energy, energy_integral, norm, NormKind, RadialField, RadialGrid};

/// `2 \int V u^2 + \int r V' u^2 + 3/2 \int |\nabla phi_u|^2`, which vanishes
/// for every solution of the pure critical system, against the lower bound
/// `2 C_1 \|u\|_2^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonexistenceCertificate {
    pub value: f64,
    pub lower_bound: f64,
    pub potential_term: f64,
    pub virial_term: f64,
    pub coulomb_term: f64,
    /// `min V` on the grid.
    pub c1: f64,
}

impl NonexistenceCertificate {
    /// `u` is certified not to solve the pure critical system.
    pub fn excludes_solution(&self) -> bool {
        self.value >= self.lower_bound && self.lower_bound > 0.0
    }
}

pub fn nonexistence_certificate(u: &RadialField, potential: &Potential) -> Result<NonexistenceCertificate> {
    let grid = *u.grid();
    let v = potential.sampled(&grid);
    let rv = potential.radial_virial(&grid);
    let potential_term = 2.0 * energy_integral(&u.zip_with(&v, |x, v| v * x * x)?, |_, y| y);
    let virial_term = energy_integral(&u.zip_with(&rv, |x, rv| rv * x * x)?, |_, y| y);
    let coulomb_term = 1.5 * dirichlet_energy(&solve_poisson(u));
    let c1 = potential.min();
    let l2 = energy_integral(u, |_, x| x * x);
    Ok(NonexistenceCertificate {
        value: potential_term + virial_term + coulomb_term,
        lower_bound: 2.0 * c1 * l2,
        potential_term,
        virial_term,
        coulomb_term,
        c1,
    })
}

/// Concentration scale and cutoff radius of a Talenti bubble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BubbleParams {
    pub epsilon: f64,
    /// The cutoff is 1 on `[0, r_cut]` and 0 beyond `2 r_cut`.
    pub r_cut: f64,
}

impl BubbleParams {
    pub fn new(epsilon: f64, r_cut: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidScale(epsilon));
        }
        if !(r_cut > 0.0 && r_cut.is_finite()) {
            return Err(Error::InvalidScale(r_cut));
        }
        Ok(Self { epsilon, r_cut })
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self { epsilon, ..*self }
    }
}

/// `eps^{1/4} (eps + r^2)^{-1/2}`, without cutoff or normalization.
pub fn talenti_bubble(params: &BubbleParams, grid: RadialGrid) -> RadialField {
    let e = params.epsilon;
    RadialField::from_fn(grid, |r| e.powf(0.25) / (e + r * r).sqrt())
}

/// C^2 quintic step: 1 on `[0, a]`, 0 on `[2a, inf)`.
fn cutoff(r: f64, a: f64) -> f64 {
    if r <= a {
        1.0
    } else if r >= 2.0 * a {
        0.0
    } else {
        let s = (r - a) / a;
        1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    }
}

/// `v_eps = phi u_eps / \|phi u_eps\|_6`.
pub fn cutoff_bubble(params: &BubbleParams, grid: RadialGrid) -> Result<RadialField> {
    if 2.0 * params.r_cut > grid.radius() {
        return Err(Error::CutoffTooLarge { r_cut: params.r_cut, radius: grid.radius() });
    }
    let e = params.epsilon;
    let a = params.r_cut;
    let w = RadialField::from_fn(grid, |r| cutoff(r, a) * e.powf(0.25) / (e + r * r).sqrt());
    let n6 = norm(&w, NormKind::Lebesgue(6.0))?;
    Ok(w.scaled(1.0 / n6))
}

/// `\|\nabla u\|_2^2 / \|u\|_6^2`, with `u` continued harmonically past `R`.
pub fn rayleigh_quotient(u: &RadialField) -> Result<f64> {
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    Ok(dirichlet_energy(u) / norm(u, NormKind::Lebesgue(6.0))?.powi(2))
}

/// Grid on which [`estimate_S`] is evaluated by default.
pub fn default_sobolev_grid() -> RadialGrid {
    RadialGrid::new(200.0, 20_000).expect("valid grid")
}

/// Minimum of the Rayleigh quotient over Talenti bubbles with
/// `eps` from `100 h^2` up to `(R/40)^2` (bubble resolved by at least ten
/// nodes, tail close to harmonic at `R`).
#[allow(non_snake_case)]
pub fn estimate_S(grid: RadialGrid) -> Result<f64> {
    let h = grid.spacing();
    let lo = (100.0 * h * h).ln();
    let hi = (grid.radius() / 40.0).powi(2).ln();
    if hi <= lo {
        return Err(Error::InsufficientRange(format!(
            "grid R = {}, h = {h} cannot resolve a bubble",
            grid.radius()
        )));
    }
    let eps: Vec<f64> = (0..=24).map(|k| (lo + (hi - lo) * k as f64 / 24.0).exp()).collect();
    let q: Vec<f64> = eps
        .par_iter()
        .map(|&e| rayleigh_quotient(&talenti_bubble(&BubbleParams { epsilon: e, r_cut: 1.0 }, grid)))
        .collect::<Result<_>>()?;
    Ok(q.into_iter().fold(f64::INFINITY, f64::min))
}

/// Least-squares slope of `ln y` against `ln eps` and the RMS residual.
fn loglog_fit(eps: &[f64], y: &[f64]) -> (f64, f64) {
    let n = eps.len() as f64;
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let rms = (xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum::<f64>() / n).sqrt();
    (slope, rms)
}

/// Exponent predicted for `\|v_eps\|_s^s` (after dividing by `|ln eps|` at
/// `s = 3`).
pub fn expected_exponent(s: f64) -> f64 {
    if s < 3.0 {
        s / 4.0
    } else if s == 3.0 {
        0.75
    } else {
        (6.0 - s) / 4.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BubbleRow {
    pub epsilon: f64,
    /// `"grad"` for `\|\nabla v_eps\|_2^2 - S`, otherwise the exponent `s`.
    pub s: String,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub s: String,
    pub fitted_slope: f64,
    pub expected: f64,
    pub residual: f64,
}

impl SlopeFit {
    pub fn relative_error(&self) -> f64 {
        (self.fitted_slope - self.expected).abs() / self.expected
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BubbleTable {
    pub s_reference: f64,
    pub rows: Vec<BubbleRow>,
    pub fits: Vec<SlopeFit>,
}

impl BubbleTable {
    pub fn fit(&self, s: &str) -> Option<&SlopeFit> {
        self.fits.iter().find(|f| f.s == s)
    }

    /// CSV with columns `epsilon,s,norm,fitted_slope`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,s,norm,fitted_slope\n");
        for r in &self.rows {
            let slope = self.fit(&r.s).map_or(f64::NAN, |f| f.fitted_slope);
            out.push_str(&format!("{:.16e},{},{:.16e},{:.16e}\n", r.epsilon, r.s, r.norm, slope));
        }
        out
    }
}

fn s_label(s: f64) -> String {
    format!("{s}")
}

fn check_range(eps: &[f64]) -> Result<()> {
    let (lo, hi) = eps.iter().fold((f64::INFINITY, 0.0f64), |(l, h), e| (l.min(*e), h.max(*e)));
    if eps.len() < 3 || !(lo > 0.0) || hi / lo < 100.0 - 1e-9 {
        return Err(Error::InsufficientRange(format!(
            "need at least 3 values spanning two decades, got {} in [{lo}, {hi}]",
            eps.len()
        )));
    }
    Ok(())
}

/// Fitted `eps` exponents of `\|v_eps\|_s^s` for each `s` and of
/// `\|\nabla v_eps\|_2^2 - S` (reference `s_reference`).
pub fn bubble_scaling_table(
    eps_list: &[f64],
    s_list: &[f64],
    params: &BubbleParams,
    grid: RadialGrid,
    s_reference: f64,
) -> Result<BubbleTable> {
    check_range(eps_list)?;
    if let Some(s) = s_list.iter().find(|s| !(**s >= 2.0 && **s < 6.0)) {
        return Err(Error::UnsupportedExponent(*s));
    }
    let fields: Vec<RadialField> = eps_list
        .par_iter()
        .map(|&e| cutoff_bubble(&params.with_epsilon(e), grid))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    let grad: Vec<f64> = fields.iter().map(|v| dirichlet_energy(v) - s_reference).collect();
    for (e, g) in eps_list.iter().zip(&grad) {
        rows.push(BubbleRow { epsilon: *e, s: "grad".into(), norm: *g });
    }
    if grad.iter().all(|g| *g > 0.0) {
        let (slope, residual) = loglog_fit(eps_list, &grad);
        fits.push(SlopeFit { s: "grad".into(), fitted_slope: slope, expected: 0.5, residual });
    }
    for &s in s_list {
        let vals: Vec<f64> = fields
            .iter()
            .map(|v| norm(v, NormKind::Lebesgue(s)).map(|n| n.powf(s)))
            .collect::<Result<_>>()?;
        let fitted: Vec<f64> = if s == 3.0 {
            vals.iter().zip(eps_list).map(|(v, e)| v / e.ln().abs()).collect()
        } else {
            vals.clone()
        };
        for (e, v) in eps_list.iter().zip(&vals) {
            rows.push(BubbleRow { epsilon: *e, s: s_label(s), norm: *v });
        }
        let (slope, residual) = loglog_fit(eps_list, &fitted);
        fits.push(SlopeFit { s: s_label(s), fitted_slope: slope, expected: expected_exponent(s), residual });
    }
    Ok(BubbleTable { s_reference, rows, fits })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Certified,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCertificate {
    #[serde(rename = "S_estimate")]
    pub s_estimate: f64,
    pub threshold: f64,
    pub best_bound: f64,
    pub best_epsilon: f64,
    /// `threshold - best_bound`.
    pub margin: f64,
    pub required_margin: f64,
    pub verdict: Verdict,
    /// `(eps, max_t I*(t v_eps))` per bubble.
    pub bounds: Vec<(f64, f64)>,
}

/// Bounds `c*` from above by `min_eps max_t I*(t v_eps)` and compares with
/// `S^{3/2}/3`. `potential` must be sampled on `grid`.
pub fn critical_level_certificate(
    q: f64,
    potential: &Potential,
    eps_list: &[f64],
    params: &BubbleParams,
    grid: RadialGrid,
    s_estimate: f64,
    required_margin: f64,
) -> Result<LevelCertificate> {
    let spec = ProblemSpec::new(Family::CriticalPerturbed { q }, potential.clone(), grid)?;
    let bounds: Vec<(f64, f64)> = eps_list
        .par_iter()
        .map(|&e| {
            let v = cutoff_bubble(&params.with_epsilon(e), grid)?;
            let k = fiber_coefficients(&v, &spec)?;
            let t = scalar_root(&k, spec.family)?;
            Ok((e, k.scaled(t, spec.family).energy(spec.family)))
        })
        .collect::<Result<_>>()?;
    let (best_epsilon, best_bound) =
        bounds.iter().copied().fold((f64::NAN, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let threshold = s_estimate.powf(1.5) / 3.0;
    let margin = threshold - best_bound;
    let verdict = if margin > required_margin { Verdict::Certified } else { Verdict::Inconclusive };
    Ok(LevelCertificate {
        s_estimate,
        threshold,
        best_bound,
        best_epsilon,
        margin,
        required_margin,
        verdict,
        bounds,
    })
}
