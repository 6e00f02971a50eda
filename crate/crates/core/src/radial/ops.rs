use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::sum::{sum, Accumulator};

use super::field::RadialField;
use super::grid::RadialGrid;
use super::interp::MonotoneCubic;

/// Composite-Simpson value of `4 pi \int_0^R r^2 f(r) dr`.
pub fn volume_integrate(f: &RadialField) -> f64 {
    let w = f.grid().volume_weights();
    sum(f.values().iter().zip(&w).map(|(v, w)| v * w))
}

/// `\int f g` over the ball, Simpson weights.
pub fn volume_inner(f: &RadialField, g: &RadialField) -> Result<f64> {
    f.ensure_same_grid(g)?;
    let w = f.grid().volume_weights();
    Ok(sum(f.values().iter().zip(g.values()).zip(&w).map(|((a, b), w)| a * b * w)))
}

/// Discrete inner product with the energy (trapezoid) weights. This is the
/// pairing under which [`crate::energies::gradient`] is exact.
pub fn energy_inner(f: &RadialField, g: &RadialField) -> Result<f64> {
    f.ensure_same_grid(g)?;
    let w = f.grid().energy_weights();
    Ok(sum(f.values().iter().zip(g.values()).zip(&w).map(|((a, b), w)| a * b * w)))
}

/// `\int F(u)` with the energy weights.
pub(crate) fn energy_integral(u: &RadialField, f: impl Fn(f64, f64) -> f64) -> f64 {
    let g = u.grid();
    let w = g.energy_weights();
    sum(u.values().iter().enumerate().map(|(i, &v)| w[i] * f(g.node(i), v)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    /// `(\int |u|^s)^{1/s}`, `s in [1, 6]`.
    Lebesgue(f64),
    /// `(\|\nabla u\|_2^2 + \|u\|_2^2)^{1/2}`.
    H1,
    /// `\|\nabla u\|_2`.
    D,
}

pub fn norm(u: &RadialField, kind: NormKind) -> Result<f64> {
    match kind {
        NormKind::Lebesgue(s) => {
            if !(1.0..=6.0).contains(&s) {
                return Err(Error::UnsupportedExponent(s));
            }
            Ok(volume_integrate(&u.map(|v| v.abs().powf(s))).powf(1.0 / s))
        }
        NormKind::D => Ok(dirichlet_energy(u).sqrt()),
        NormKind::H1 => {
            let l2 = volume_integrate(&u.map(|v| v * v));
            Ok((dirichlet_energy(u) + l2).sqrt())
        }
    }
}

/// `\int_{R^3} |\nabla u|^2`, with `u` continued harmonically (`u(R) R / r`)
/// outside the ball.
///
/// In the variable `w = r u` this is `4 pi \int_0^R (w')^2 dr` exactly; the
/// discretization is the midpoint-difference sum plus its leading error
/// correction `(h^2/12) \int (w'')^2`, which keeps the form symmetric
/// positive-definite and fourth-order accurate.
pub fn dirichlet_energy(u: &RadialField) -> f64 {
    let g = u.grid();
    let h = g.spacing();
    let n = g.intervals();
    let w: Vec<f64> = (0..=n).map(|i| g.node(i) * u.value(i)).collect();
    let mut first = Accumulator::new();
    for i in 0..n {
        let d = w[i + 1] - w[i];
        first.add(d * d);
    }
    let mut second = Accumulator::new();
    for i in 1..n {
        let d = w[i + 1] - 2.0 * w[i] + w[i - 1];
        second.add(d * d);
    }
    4.0 * PI * (first.value() / h + second.value() / (12.0 * h))
}

/// L2 (energy-weight) gradient of `\frac12 \int |\nabla u|^2`: a fourth-order
/// approximation of `-\Delta u` at interior nodes. The value at `R` is 0
/// (Dirichlet), at the origin it is extrapolated evenly.
pub(crate) fn neg_laplacian_variational(u: &RadialField) -> RadialField {
    let g = *u.grid();
    let h = g.spacing();
    let n = g.intervals();
    let w: Vec<f64> = (0..=n).map(|i| g.node(i) * u.value(i)).collect();
    let mut d2 = vec![0.0; n + 1];
    for i in 1..n {
        d2[i] = w[i + 1] - 2.0 * w[i] + w[i - 1];
    }
    let mut out = vec![0.0; n + 1];
    for i in 1..n {
        let d4 = d2[i - 1] - 2.0 * d2[i] + d2[i + 1];
        out[i] = (-d2[i] + d4 / 12.0) / (h * h * g.node(i));
    }
    out[0] = (4.0 * out[1] - out[2]) / 3.0;
    RadialField::new(g, out).expect("finite")
}

/// Second-order radial Laplacian `u'' + 2u'/r`, computed as `w''/r` with
/// `w = r u` and central differences. The origin uses `6 (u_1 - u_0)/h^2`
/// (from `u = u_0 + a r^2`), the outer node extrapolates linearly.
pub fn laplacian(u: &RadialField) -> RadialField {
    let g = *u.grid();
    let h = g.spacing();
    let n = g.intervals();
    let v = u.values();
    let w = |i: usize| g.node(i) * v[i];
    let mut out = vec![0.0; n + 1];
    for i in 1..n {
        out[i] = (w(i + 1) - 2.0 * w(i) + w(i - 1)) / (h * h * g.node(i));
    }
    out[0] = 6.0 * (v[1] - v[0]) / (h * h);
    out[n] = 2.0 * out[n - 1] - out[n - 2];
    RadialField::new(g, out).expect("finite")
}

/// Fourth-order first derivative `du/dr` (even reflection at the origin,
/// one-sided stencils at `R`).
pub fn radial_derivative(u: &RadialField) -> RadialField {
    let g = *u.grid();
    let h = g.spacing();
    let n = g.intervals();
    let v = u.values();
    let at = |k: isize| v[k.unsigned_abs()];
    let mut out = vec![0.0; n + 1];
    for (i, o) in out.iter_mut().enumerate() {
        let k = i as isize;
        *o = if i + 2 <= n {
            (8.0 * (at(k + 1) - at(k - 1)) - (at(k + 2) - at(k - 2))) / (12.0 * h)
        } else if i + 1 == n {
            (3.0 * v[n] + 10.0 * v[n - 1] - 18.0 * v[n - 2] + 6.0 * v[n - 3] - v[n - 4]) / (12.0 * h)
        } else {
            (25.0 * v[n] - 48.0 * v[n - 1] + 36.0 * v[n - 2] - 16.0 * v[n - 3] + 3.0 * v[n - 4])
                / (12.0 * h)
        };
    }
    RadialField::new(g, out).expect("finite")
}

/// `u_tau(r) = tau^2 u(tau r)` on the same grid; zero where `tau r > R`.
pub fn dilate(u: &RadialField, tau: f64) -> Result<RadialField> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidScale(tau));
    }
    if tau == 1.0 {
        return Ok(u.clone());
    }
    let interp = MonotoneCubic::new(u.values());
    let values = (0..u.len()).map(|i| tau * tau * interp.eval(tau * i as f64)).collect();
    RadialField::new(*u.grid(), values)
}

/// Monotone cubic transfer onto `target`, which must cover the same `[0, R]`.
pub fn resample(u: &RadialField, target: &RadialGrid) -> Result<RadialField> {
    let src = u.grid();
    if (src.radius() - target.radius()).abs() > 1e-12 * src.radius() {
        return Err(Error::DomainMismatch {
            source_radius: src.radius(),
            target_radius: target.radius(),
        });
    }
    if src == target {
        return Ok(u.clone());
    }
    let interp = MonotoneCubic::new(u.values());
    let (ns, nt) = (src.intervals() as f64, target.intervals() as f64);
    let values = (0..target.len()).map(|j| interp.eval(j as f64 * ns / nt)).collect();
    RadialField::new(*target, values)
}
