//! Fibering maps: the scalar Nehari fiber `t u`, the dilation fiber `u_tau`
//! and projections onto `M`, `N` and `N*`.

use serde::{Deserialize, Serialize};

use crate::energies::{assemble, residual_from, FiberCoefficients};
use crate::error::{Error, Result};
use crate::problem::{Family, Manifold, ProblemSpec};
use crate::radial::{dilate, RadialField};
use crate::roots::{decreasing_root, local_root};

/// Root `t` of `a/t^2 + b = t^{e-3} c + t^2 d`, where `e` is the power
/// exponent of the family (absent for the pure critical one).
pub fn scalar_root(k: &FiberCoefficients, family: Family) -> Result<f64> {
    let e = family.exponent();
    if let Some(p) = e {
        if p <= 3.0 {
            return Err(Error::NonUniqueFiber(p));
        }
    }
    let crit = if family.has_critical_term() { k.d } else { 0.0 };
    if k.a() <= 0.0 || (k.c <= 0.0 && crit <= 0.0) {
        return Err(Error::ZeroField);
    }
    decreasing_root(|t| {
        let power = e.map_or(0.0, |p| t.powf(p - 3.0) * k.c);
        k.a() / (t * t) + k.b - power - t * t * crit
    })
}

/// Root `tau` of `g'(tau) / tau^2` for the dilation fiber
/// `g(tau) = tau^3/2 a_grad + tau/2 a_pot + tau^3/4 b - tau^{2p-1}/(p+1) c`.
pub fn dilation_root(k: &FiberCoefficients, p: f64) -> Result<f64> {
    if !(p > 2.0 && p < 5.0) {
        return Err(Error::Spec(format!("dilation fiber needs p in (2, 5), got {p}")));
    }
    if k.a() <= 0.0 || k.c <= 0.0 {
        return Err(Error::ZeroField);
    }
    let lead = 1.5 * k.a_grad + 0.75 * k.b;
    let m = (2.0 * p - 1.0) / (p + 1.0);
    decreasing_root(|tau| lead + 0.5 * k.a_pot / (tau * tau) - m * k.c * tau.powf(2.0 * p - 4.0))
}

/// `I(u_tau)` predicted from the coefficients of `u`.
pub fn dilation_fiber_value(k: &FiberCoefficients, p: f64, tau: f64) -> f64 {
    let t3 = tau.powi(3);
    0.5 * t3 * k.a_grad + 0.5 * tau * k.a_pot + 0.25 * t3 * k.b
        - tau.powf(2.0 * p - 1.0) / (p + 1.0) * k.c
}

fn nonzero(u: &RadialField) -> Result<()> {
    if u.is_zero() {
        Err(Error::ZeroField)
    } else {
        Ok(())
    }
}

/// Unique `t > 0` with `t u` on `N` (subcritical, `p > 3`) or `N*`.
pub fn fiber_scalar(u: &RadialField, spec: &ProblemSpec) -> Result<f64> {
    nonzero(u)?;
    if let Family::Subcritical { p } = spec.family {
        if p <= 3.0 {
            return Err(Error::NonUniqueFiber(p));
        }
    }
    let (k, _) = assemble(u, spec)?;
    scalar_root(&k, spec.family)
}

/// Unique maximizer `tau` of `I(u_tau)` (constant `V`, subcritical).
pub fn fiber_dilation(u: &RadialField, spec: &ProblemSpec) -> Result<f64> {
    nonzero(u)?;
    spec.check_manifold(Manifold::M)?;
    let p = spec.family.exponent().expect("subcritical");
    let (k, _) = assemble(u, spec)?;
    dilation_root(&k, p)
}

/// A point on a constraint manifold together with its assembled data.
#[derive(Debug, Clone)]
pub struct Projection {
    pub field: RadialField,
    pub phi: RadialField,
    pub coefficients: FiberCoefficients,
    /// `t` (scalar fiber) or `tau` (dilation fiber).
    pub scale: f64,
    /// Extra scalar factor applied after an on-grid dilation so that the
    /// discrete `G` vanishes; 1 for scalar fibers.
    pub polish: f64,
    pub level: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberMax {
    pub scale: f64,
    pub level: f64,
}

/// Projects `u` onto `manifold`.
///
/// For `M` the dilation scale comes from the analytic scaling laws; the
/// dilated field is then rescaled by a factor `s` close to 1 so that `G`
/// evaluated on the grid vanishes.
pub fn project(u: &RadialField, spec: &ProblemSpec, manifold: Manifold) -> Result<Projection> {
    nonzero(u)?;
    spec.check_manifold(manifold)?;
    let (k, phi) = assemble(u, spec)?;
    match manifold {
        Manifold::N | Manifold::NStar => {
            let t = scalar_root(&k, spec.family)?;
            let field = u.scaled(t);
            let (coefficients, phi) = assemble(&field, spec)?;
            Ok(Projection {
                level: coefficients.energy(spec.family),
                field,
                phi,
                coefficients,
                scale: t,
                polish: 1.0,
            })
        }
        Manifold::M => {
            let p = spec.family.exponent().expect("subcritical");
            let tau = dilation_root(&k, p)?;
            let (v, kv) = if (tau - 1.0).abs() <= 1e-14 {
                (u.clone(), k)
            } else {
                let v = dilate(u, tau)?;
                let (kv, _) = assemble(&v, spec)?;
                (v, kv)
            };
            let _ = phi;
            let quad = 1.5 * kv.a_grad + 0.5 * kv.a_pot;
            let m = (2.0 * p - 1.0) / (p + 1.0);
            let g = |s: f64| quad + 0.75 * kv.b * s * s - m * kv.c * s.powf(p - 1.0);
            let s = local_root(g, 1.0)?;
            let field = if s == 1.0 { v } else { v.scaled(s) };
            let (coefficients, phi) = assemble(&field, spec)?;
            Ok(Projection {
                level: coefficients.energy(spec.family),
                field,
                phi,
                coefficients,
                scale: tau,
                polish: s,
            })
        }
    }
}

/// Projection onto the default manifold of `spec`, returning the scale and
/// the energy there. The level bounds the ground-state level from above.
pub fn fiber_max(u: &RadialField, spec: &ProblemSpec) -> Result<FiberMax> {
    fiber_max_on(u, spec, spec.default_manifold())
}

pub fn fiber_max_on(u: &RadialField, spec: &ProblemSpec, manifold: Manifold) -> Result<FiberMax> {
    let proj = project(u, spec, manifold)?;
    Ok(FiberMax { scale: proj.scale, level: proj.level })
}

/// Relative distance of `u` from `manifold`: `|residual| / (a_grad + a_pot)`.
pub fn relative_residual(proj: &Projection, family: Family, manifold: Manifold) -> f64 {
    let k = &proj.coefficients;
    residual_from(k, family, manifold).abs() / k.a()
}
