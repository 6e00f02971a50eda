//! Reduced functionals, constraint residuals and first variations.
//!
//! Everything here is assembled from the energy (trapezoid) weights of
//! [`RadialGrid::energy_weights`], the fourth-order Dirichlet form and the
//! symmetric Poisson kernel, so [`gradient`] is the exact derivative of
//! [`eval_energy`] under [`energy_inner`](crate::radial::energy_inner).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poisson::{coulomb_energy_with, solve_poisson};
use crate::problem::{Family, Manifold, ProblemSpec};
use crate::radial::{dirichlet_energy, energy_integral, neg_laplacian_variational, RadialField};
use crate::sum::Accumulator;

/// The scalars every fibering map is built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberCoefficients {
    /// `\int |\nabla u|^2`
    pub a_grad: f64,
    /// `\int V u^2`
    pub a_pot: f64,
    /// `\int phi_u u^2`
    pub b: f64,
    /// `\int |u|^{p+1}` (or `q+1`); 0 for the pure critical family.
    pub c: f64,
    /// `\int u^6`; 0 for the subcritical family.
    pub d: f64,
}

impl FiberCoefficients {
    pub fn new(a_grad: f64, a_pot: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a_grad, a_pot, b, c, d }
    }

    pub fn a(&self) -> f64 {
        self.a_grad + self.a_pot
    }

    /// `I` (or `I*`) from the coefficients.
    pub fn energy(&self, family: Family) -> f64 {
        let power = match family.exponent() {
            Some(p) => self.c / (p + 1.0),
            None => 0.0,
        };
        let critical = if family.has_critical_term() { self.d / 6.0 } else { 0.0 };
        0.5 * self.a() + 0.25 * self.b - power - critical
    }

    /// `G = 3/2 a_grad + 1/2 a_pot + 3/4 b - (2p-1)/(p+1) c`.
    pub fn ruiz(&self, p: f64) -> f64 {
        1.5 * self.a_grad + 0.5 * self.a_pot + 0.75 * self.b
            - (2.0 * p - 1.0) / (p + 1.0) * self.c
    }

    /// `a + b - c - d`: the Nehari residual of `N` (with `d = 0`) or `N*`.
    pub fn nehari(&self) -> f64 {
        self.a() + self.b - self.c - self.d
    }

    /// Coefficients of `t u`.
    pub fn scaled(&self, t: f64, family: Family) -> Self {
        let t2 = t * t;
        let pc = family.exponent().map_or(0.0, |p| t.abs().powf(p + 1.0));
        Self {
            a_grad: t2 * self.a_grad,
            a_pot: t2 * self.a_pot,
            b: t2 * t2 * self.b,
            c: pc * self.c,
            d: t2 * t2 * t2 * self.d,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.a_grad, self.a_pot, self.b, self.c, self.d].iter().all(|x| x.is_finite())
    }
}

fn check_grid(u: &RadialField, spec: &ProblemSpec) -> Result<()> {
    if *u.grid() != spec.grid {
        return Err(Error::GridMismatch);
    }
    spec.family.validate()
}

/// Coefficients together with the Poisson solution they used.
pub(crate) fn assemble(u: &RadialField, spec: &ProblemSpec) -> Result<(FiberCoefficients, RadialField)> {
    check_grid(u, spec)?;
    let phi = solve_poisson(u);
    let v = spec.potential.sampled(&spec.grid);
    let w = spec.grid.energy_weights();
    let mut a_pot = Accumulator::new();
    let mut c = Accumulator::new();
    let mut d = Accumulator::new();
    let power = spec.family.exponent();
    for (i, &x) in u.values().iter().enumerate() {
        let x2 = x * x;
        a_pot.add(w[i] * v.value(i) * x2);
        if let Some(p) = power {
            c.add(w[i] * x.abs().powf(p + 1.0));
        }
        if spec.family.has_critical_term() {
            d.add(w[i] * x2 * x2 * x2);
        }
    }
    let coeffs = FiberCoefficients {
        a_grad: dirichlet_energy(u),
        a_pot: a_pot.value(),
        b: coulomb_energy_with(u, &phi),
        c: c.value(),
        d: d.value(),
    };
    Ok((coeffs, phi))
}

pub fn fiber_coefficients(u: &RadialField, spec: &ProblemSpec) -> Result<FiberCoefficients> {
    assemble(u, spec).map(|(c, _)| c)
}

/// `I(u)` for the subcritical family, `I*(u)` for the critical ones.
pub fn eval_energy(u: &RadialField, spec: &ProblemSpec) -> Result<f64> {
    Ok(fiber_coefficients(u, spec)?.energy(spec.family))
}

/// `\int F(u)` with `F' = f` the family nonlinearity.
fn primitive_integral(u: &RadialField, family: Family) -> f64 {
    energy_integral(u, |_, x| {
        let mut f = match family.exponent() {
            Some(p) => x.abs().powf(p + 1.0) / (p + 1.0),
            None => 0.0,
        };
        if family.has_critical_term() {
            f += x.powi(6) / 6.0;
        }
        f
    })
}

/// The two-field action
/// `E(u, phi) = 1/2 \int |\nabla u|^2 + V u^2 - 1/4 \int |\nabla phi|^2
/// + 1/2 \int phi u^2 - \int F(u)`.
pub fn eval_action(u: &RadialField, phi: &RadialField, spec: &ProblemSpec) -> Result<f64> {
    check_grid(u, spec)?;
    u.ensure_same_grid(phi)?;
    let v = spec.potential.sampled(&spec.grid);
    let a_pot = energy_integral(&u.zip_with(&v, |x, v| v * x * x)?, |_, y| y);
    let coupling = coulomb_energy_with(u, phi);
    Ok(0.5 * (dirichlet_energy(u) + a_pot) - 0.25 * dirichlet_energy(phi) + 0.5 * coupling
        - primitive_integral(u, spec.family))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    L2,
    H1,
}

/// First variation of [`eval_energy`].
///
/// `L2` returns `-\Delta u + V u + phi_u u - f(u)` (zero at `R`); `H1` the
/// Riesz representative solving `(-\Delta + 1) g = ` the L2 gradient.
pub fn gradient(u: &RadialField, spec: &ProblemSpec, metric: Metric) -> Result<RadialField> {
    let (_, phi) = assemble(u, spec)?;
    let g = l2_gradient_with(u, &phi, spec);
    Ok(match metric {
        Metric::L2 => g,
        Metric::H1 => h1_riesz(&g),
    })
}

pub(crate) fn l2_gradient_with(u: &RadialField, phi: &RadialField, spec: &ProblemSpec) -> RadialField {
    let grid = spec.grid;
    let n = grid.intervals();
    let lap = neg_laplacian_variational(u);
    let v = spec.potential.sampled(&grid);
    let power = spec.family.exponent();
    let critical = spec.family.has_critical_term();
    let mut g = vec![0.0; n + 1];
    for i in 1..n {
        let x = u.value(i);
        let mut f = match power {
            Some(p) => x.abs().powf(p - 1.0) * x,
            None => 0.0,
        };
        if critical {
            f += x.powi(5);
        }
        g[i] = lap.value(i) + (v.value(i) + phi.value(i)) * x - f;
    }
    g[0] = (4.0 * g[1] - g[2]) / 3.0;
    RadialField::new(grid, g).expect("finite gradient")
}

/// L2 gradient of the constraint functional of `manifold` (`G`, `\tilde G`
/// or `\tilde G^*`), built from the derivatives of the coefficients.
pub(crate) fn constraint_gradient_with(
    u: &RadialField,
    phi: &RadialField,
    spec: &ProblemSpec,
    manifold: Manifold,
) -> RadialField {
    let grid = spec.grid;
    let n = grid.intervals();
    let lap = neg_laplacian_variational(u);
    let v = spec.potential.sampled(&grid);
    // weights on (a_grad, a_pot, b, c, d)
    let (wg, wp, wb, wc, wd) = match (manifold, spec.family) {
        (Manifold::M, Family::Subcritical { p }) => (1.5, 0.5, 0.75, (2.0 * p - 1.0) / (p + 1.0), 0.0),
        _ => (1.0, 1.0, 1.0, 1.0, 1.0),
    };
    let power = spec.family.exponent();
    let critical = spec.family.has_critical_term();
    let mut g = vec![0.0; n + 1];
    for i in 1..n {
        let x = u.value(i);
        let mut val = 2.0 * wg * lap.value(i) + 2.0 * wp * v.value(i) * x + 4.0 * wb * phi.value(i) * x;
        if let Some(p) = power {
            val -= wc * (p + 1.0) * x.abs().powf(p - 1.0) * x;
        }
        if critical {
            val -= wd * 6.0 * x.powi(5);
        }
        g[i] = val;
    }
    g[0] = (4.0 * g[1] - g[2]) / 3.0;
    RadialField::new(grid, g).expect("finite gradient")
}

/// Riesz map of the discrete `H^1` product: solves
/// `(2 w_i - w_{i-1} - w_{i+1})/h^2 + w_i = r_i g_i` with `w_0 = w_N = 0`
/// and returns `w / r`.
pub fn h1_riesz(g: &RadialField) -> RadialField {
    let grid = *g.grid();
    let n = grid.intervals();
    let h = grid.spacing();
    let off = -1.0 / (h * h);
    let diag = 2.0 / (h * h) + 1.0;
    // Thomas algorithm on the interior unknowns 1..n-1.
    let m = n - 1;
    let mut cp = vec![0.0; m];
    let mut dp = vec![0.0; m];
    for k in 0..m {
        let i = k + 1;
        let rhs = grid.node(i) * g.value(i);
        if k == 0 {
            cp[k] = off / diag;
            dp[k] = rhs / diag;
        } else {
            let den = diag - off * cp[k - 1];
            cp[k] = off / den;
            dp[k] = (rhs - off * dp[k - 1]) / den;
        }
    }
    let mut w = vec![0.0; m];
    w[m - 1] = dp[m - 1];
    for k in (0..m - 1).rev() {
        w[k] = dp[k] - cp[k] * w[k + 1];
    }
    let mut out = vec![0.0; n + 1];
    for k in 0..m {
        out[k + 1] = w[k] / grid.node(k + 1);
    }
    out[0] = (4.0 * out[1] - out[2]) / 3.0;
    RadialField::new(grid, out).expect("finite")
}

/// Dual `H^1` norm of `I'(u)`: `sqrt(<g_L2, g_H1>)`.
pub fn gradient_norm(u: &RadialField, spec: &ProblemSpec) -> Result<f64> {
    let (_, phi) = assemble(u, spec)?;
    let g = l2_gradient_with(u, &phi, spec);
    Ok(dual_norm(&g))
}

pub(crate) fn dual_norm(g_l2: &RadialField) -> f64 {
    let riesz = h1_riesz(g_l2);
    let w = g_l2.grid().energy_weights();
    let mut acc = Accumulator::new();
    for i in 0..g_l2.len() {
        acc.add(w[i] * g_l2.value(i) * riesz.value(i));
    }
    acc.value().max(0.0).sqrt()
}

/// `G`, `\tilde G` or `\tilde G^*` at `u`.
pub fn manifold_residual(u: &RadialField, spec: &ProblemSpec, manifold: Manifold) -> Result<f64> {
    spec.check_manifold(manifold).or_else(|e| match (e, manifold) {
        // Residuals are still meaningful outside the uniqueness regime.
        (Error::NonUniqueFiber(_), Manifold::N) => Ok(()),
        (e, _) => Err(e),
    })?;
    let k = fiber_coefficients(u, spec)?;
    Ok(residual_from(&k, spec.family, manifold))
}

pub(crate) fn residual_from(k: &FiberCoefficients, family: Family, manifold: Manifold) -> f64 {
    match (manifold, family) {
        (Manifold::M, Family::Subcritical { p }) => k.ruiz(p),
        _ => k.nehari(),
    }
}

/// `1/2 \int |\nabla u|^2 + 3/2 \int V u^2 + 1/2 \int r V' u^2
/// + 5/4 \int phi_u u^2 - 3 \int F(u)`, zero at solutions.
pub fn pohozaev_residual(u: &RadialField, spec: &ProblemSpec) -> Result<f64> {
    let k = fiber_coefficients(u, spec)?;
    let virial = spec.potential.radial_virial(&spec.grid);
    let dv = energy_integral(&u.zip_with(&virial, |x, rv| rv * x * x)?, |_, y| y);
    Ok(0.5 * k.a_grad + 1.5 * k.a_pot + 0.5 * dv + 1.25 * k.b - 3.0 * primitive_integral(u, spec.family))
}

/// Weights `(w_grad, w_pot, w_coulomb, w_sixth)` of the functional that
/// agrees with `I` on the family's natural manifold (`J`, `J*`).
pub(crate) fn j_weights(family: Family) -> (f64, f64, f64, f64) {
    match family {
        Family::Subcritical { p } => {
            let k = 2.0 * p - 1.0;
            ((p - 2.0) / k, (p - 1.0) / k, (p - 2.0) / (2.0 * k), 0.0)
        }
        Family::CriticalPerturbed { q } => {
            let s = 1.0 / (q + 1.0);
            (0.5 - s, 0.5 - s, 0.25 - s, s - 1.0 / 6.0)
        }
        Family::CriticalPure => (1.0 / 3.0, 1.0 / 3.0, 1.0 / 12.0, 0.0),
    }
}

/// `J` (subcritical) or `J*` (critical families). Constant potentials only.
#[allow(non_snake_case)]
pub fn eval_J(u: &RadialField, spec: &ProblemSpec) -> Result<f64> {
    if !spec.potential.is_constant() {
        return Err(Error::UnsupportedCombination(
            "J is only defined for constant potentials".into(),
        ));
    }
    let k = fiber_coefficients(u, spec)?;
    let (wg, wp, wb, wd) = j_weights(spec.family);
    Ok(wg * k.a_grad + wp * k.a_pot + wb * k.b + wd * k.d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Potential;
    use crate::radial::{energy_inner, RadialGrid};

    const PI32: f64 = 5.568327996831708;
    const GAUSS_COULOMB: f64 = 1.9687012432153025;

    fn gaussian_spec(family: Family) -> (RadialField, ProblemSpec) {
        let grid = RadialGrid::new(20.0, 2000).unwrap();
        let u = RadialField::from_fn_dirichlet(grid, |r| (-r * r / 2.0).exp());
        (u, ProblemSpec::new(family, Potential::Constant(1.0), grid).unwrap())
    }

    fn bump(grid: RadialGrid, amp: f64, centre: f64, width: f64) -> RadialField {
        RadialField::from_fn_dirichlet(grid, |r| {
            amp * ((-(r - centre).powi(2) / width).exp() + (-(r + centre).powi(2) / width).exp())
        })
    }

    #[test]
    fn gaussian_components() {
        let (u, spec) = gaussian_spec(Family::Subcritical { p: 3.0 });
        let k = fiber_coefficients(&u, &spec).unwrap();
        assert!((k.a_grad - 1.5 * PI32).abs() < 1e-6);
        assert!((k.a_pot - PI32).abs() < 1e-8);
        assert!((k.b - GAUSS_COULOMB).abs() < 1e-6);
        assert!((k.c - GAUSS_COULOMB).abs() < 1e-8);
        let expect = 0.5 * (2.5 * PI32) + 0.25 * GAUSS_COULOMB - 0.25 * GAUSS_COULOMB;
        assert!((eval_energy(&u, &spec).unwrap() - expect).abs() < 1e-6);
    }

    #[test]
    fn homogeneity_in_t() {
        let (u, spec) = gaussian_spec(Family::Subcritical { p: 3.0 });
        let k = fiber_coefficients(&u, &spec).unwrap();
        for t in [0.5, 1.0, 2.0] {
            let direct = eval_energy(&u.scaled(t), &spec).unwrap();
            let poly = 0.5 * t * t * k.a() + 0.25 * t.powi(4) * k.b - 0.25 * t.powi(4) * k.c;
            assert!((direct - poly).abs() < 1e-12 * (1.0 + poly.abs()), "t={t}");
        }
    }

    #[test]
    fn zero_field() {
        let grid = RadialGrid::new(10.0, 100).unwrap();
        let z = RadialField::zeros(grid);
        for fam in [Family::Subcritical { p: 3.0 }, Family::CriticalPerturbed { q: 4.0 }, Family::CriticalPure] {
            let spec = ProblemSpec::new(fam, Potential::Constant(1.0), grid).unwrap();
            assert_eq!(eval_energy(&z, &spec).unwrap(), 0.0);
            assert_eq!(eval_action(&z, &z, &spec).unwrap(), 0.0);
            assert_eq!(pohozaev_residual(&z, &spec).unwrap(), 0.0);
            assert_eq!(eval_J(&z, &spec).unwrap(), 0.0);
            assert!(gradient(&z, &spec, Metric::H1).unwrap().is_zero());
        }
    }

    #[test]
    fn reduction_identity() {
        for fam in [Family::Subcritical { p: 3.0 }, Family::CriticalPerturbed { q: 4.0 }] {
            let (u, spec) = gaussian_spec(fam);
            let phi = solve_poisson(&u);
            let e = eval_action(&u, &phi, &spec).unwrap();
            let i = eval_energy(&u, &spec).unwrap();
            assert!((e - i).abs() <= 1e-6 * i.abs());
        }
        let (u, spec) = gaussian_spec(Family::Subcritical { p: 3.0 });
        let zero = RadialField::zeros(spec.grid);
        let k = fiber_coefficients(&u, &spec).unwrap();
        let e0 = eval_action(&u, &zero, &spec).unwrap();
        assert!((e0 - (0.5 * k.a() - 0.25 * k.c)).abs() < 1e-12);
    }

    #[test]
    fn directional_derivatives() {
        let grid = RadialGrid::new(12.0, 600).unwrap();
        let fams = [Family::Subcritical { p: 2.5 }, Family::CriticalPerturbed { q: 4.0 }, Family::CriticalPure];
        for fam in fams {
            let spec = ProblemSpec::new(fam, Potential::gaussian_well(grid, 1.0, 0.4, 1.5), grid).unwrap();
            let u = bump(grid, 0.8, 0.5, 2.0);
            let v = bump(grid, 0.3, 1.5, 1.0);
            let g = gradient(&u, &spec, Metric::L2).unwrap();
            let exact = energy_inner(&g, &v).unwrap();
            let e = 1e-4;
            let fd = (eval_energy(&u.axpy(e, &v).unwrap(), &spec).unwrap()
                - eval_energy(&u.axpy(-e, &v).unwrap(), &spec).unwrap())
                / (2.0 * e);
            assert!((exact - fd).abs() <= 1e-6 * exact.abs(), "{fam:?}: {exact} vs {fd}");
        }
    }

    #[test]
    fn constraint_gradients() {
        let grid = RadialGrid::new(12.0, 600).unwrap();
        let cases = [
            (Family::Subcritical { p: 2.5 }, Manifold::M),
            (Family::Subcritical { p: 3.5 }, Manifold::N),
            (Family::CriticalPerturbed { q: 4.0 }, Manifold::NStar),
        ];
        for (fam, man) in cases {
            let spec = ProblemSpec::new(fam, Potential::Constant(1.0), grid).unwrap();
            let u = bump(grid, 0.8, 0.5, 2.0);
            let v = bump(grid, 0.3, 1.5, 1.0);
            let phi = solve_poisson(&u);
            let g = constraint_gradient_with(&u, &phi, &spec, man);
            let exact = energy_inner(&g, &v).unwrap();
            let e = 1e-4;
            let fd = (manifold_residual(&u.axpy(e, &v).unwrap(), &spec, man).unwrap()
                - manifold_residual(&u.axpy(-e, &v).unwrap(), &spec, man).unwrap())
                / (2.0 * e);
            assert!((exact - fd).abs() <= 1e-6 * exact.abs(), "{fam:?}: {exact} vs {fd}");
        }
    }

    #[test]
    fn riesz_map_represents_the_l2_functional() {
        let grid = RadialGrid::new(10.0, 400).unwrap();
        let g = bump(grid, 1.0, 1.0, 1.0);
        let v = bump(grid, 1.0, 2.0, 0.5);
        let rg = h1_riesz(&g);
        // discrete H1 product of rg and v equals <g, v>
        let h = grid.spacing();
        let mut lhs = 0.0;
        for i in 0..grid.intervals() {
            let dw = grid.node(i + 1) * rg.value(i + 1) - grid.node(i) * rg.value(i);
            let dz = grid.node(i + 1) * v.value(i + 1) - grid.node(i) * v.value(i);
            lhs += 4.0 * std::f64::consts::PI * dw * dz / h;
        }
        lhs += energy_inner(&rg, &v).unwrap();
        let rhs = energy_inner(&g, &v).unwrap();
        assert!((lhs - rhs).abs() < 1e-10 * rhs.abs());
    }

    #[test]
    fn pohozaev_specializations() {
        let grid = RadialGrid::new(12.0, 600).unwrap();
        let u = bump(grid, 0.7, 0.3, 2.0);
        let p = 3.4;
        let spec = ProblemSpec::subcritical(p, Potential::Constant(1.0), grid).unwrap();
        let k = fiber_coefficients(&u, &spec).unwrap();
        let printed = 0.5 * k.a_grad + 1.5 * k.a_pot + 1.25 * k.b - 3.0 / (p + 1.0) * k.c;
        let got = pohozaev_residual(&u, &spec).unwrap();
        assert!((got - printed).abs() < 1e-13 * printed.abs().max(1.0));

        let well = Potential::gaussian_well(grid, 1.0, 0.5, 1.0);
        let spec = ProblemSpec::new(Family::CriticalPure, well.clone(), grid).unwrap();
        let k = fiber_coefficients(&u, &spec).unwrap();
        let rv = well.radial_virial(&grid);
        let dv = energy_integral(&u.zip_with(&rv, |x, r| r * x * x).unwrap(), |_, y| y);
        let po = k.a_grad + 3.0 * k.a_pot + dv + 2.5 * k.b - k.d;
        let got = pohozaev_residual(&u, &spec).unwrap();
        assert!((got - 0.5 * po).abs() < 1e-13 * po.abs().max(1.0));
    }

    #[test]
    fn j_matches_i_minus_constraint() {
        let grid = RadialGrid::new(12.0, 600).unwrap();
        let u = bump(grid, 0.9, 0.0, 3.0);
        let cases = [
            (Family::Subcritical { p: 3.0 }, Manifold::M),
            (Family::CriticalPerturbed { q: 4.0 }, Manifold::NStar),
            (Family::CriticalPure, Manifold::NStar),
        ];
        for (fam, man) in cases {
            let spec = ProblemSpec::new(fam, Potential::Constant(1.0), grid).unwrap();
            let g = manifold_residual(&u, &spec, man).unwrap();
            let scale = match fam {
                Family::Subcritical { p } => 2.0 * p - 1.0,
                Family::CriticalPerturbed { q } => q + 1.0,
                Family::CriticalPure => 6.0,
            };
            let i = eval_energy(&u, &spec).unwrap();
            let j = eval_J(&u, &spec).unwrap();
            assert!((i - (j + g / scale)).abs() < 1e-12 * i.abs().max(1.0), "{fam:?}");
        }
        let well = ProblemSpec::subcritical(3.5, Potential::gaussian_well(grid, 1.0, 0.5, 1.0), grid).unwrap();
        assert!(matches!(eval_J(&u, &well), Err(Error::UnsupportedCombination(_))));
        assert!(manifold_residual(&u, &well, Manifold::M).is_err());
    }

    #[test]
    fn synthetic_nehari_residual() {
        let k = FiberCoefficients::new(0.5, 0.5, 1.0, 2.0, 0.0);
        assert_eq!(residual_from(&k, Family::Subcritical { p: 4.0 }, Manifold::N), 0.0);
    }
}
