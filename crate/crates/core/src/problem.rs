//! Problem families and potentials.

use crate::error::{Error, Result};
use crate::radial::{radial_derivative, RadialField, RadialGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `-Delta u + V u + phi u = |u|^{p-1} u`, `p in (2, 5)`.
    Subcritical { p: f64 },
    /// `... = |u|^{q-1} u + u^5`, `q in (3, 5)`.
    CriticalPerturbed { q: f64 },
    /// `... = u^5`. No nontrivial solutions exist; diagnostic only.
    CriticalPure,
}

impl Family {
    /// Exponent of the lower-order power term, if any.
    pub fn exponent(&self) -> Option<f64> {
        match *self {
            Family::Subcritical { p } => Some(p),
            Family::CriticalPerturbed { q } => Some(q),
            Family::CriticalPure => None,
        }
    }

    pub fn has_critical_term(&self) -> bool {
        !matches!(self, Family::Subcritical { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Family::Subcritical { p } if !(p > 2.0 && p < 5.0) => {
                Err(Error::Spec(format!("subcritical exponent p = {p} outside (2, 5)")))
            }
            Family::CriticalPerturbed { q } if !(q > 3.0 && q < 5.0) => {
                Err(Error::Spec(format!("perturbation exponent q = {q} outside (3, 5)")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Constant(f64),
    /// Tabulated radial potential with its limit at infinity.
    Radial { values: RadialField, v_infinity: f64 },
}

impl Potential {
    /// `V(r) = v_infinity - depth * exp(-(r/width)^2)`.
    pub fn gaussian_well(grid: RadialGrid, v_infinity: f64, depth: f64, width: f64) -> Self {
        let values = RadialField::from_fn(grid, |r| v_infinity - depth * (-(r / width).powi(2)).exp());
        Potential::Radial { values, v_infinity }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Potential::Constant(_))
    }

    pub fn sampled(&self, grid: &RadialGrid) -> RadialField {
        match self {
            Potential::Constant(v) => RadialField::constant(*grid, *v),
            Potential::Radial { values, .. } => values.clone(),
        }
    }

    /// `(\nabla V(x) | x) = r V'(r)`; zero for constant potentials.
    pub fn radial_virial(&self, grid: &RadialGrid) -> RadialField {
        match self {
            Potential::Constant(_) => RadialField::zeros(*grid),
            Potential::Radial { values, .. } => {
                radial_derivative(values).map_with_r(|r, d| r * d)
            }
        }
    }

    pub fn min(&self) -> f64 {
        match self {
            Potential::Constant(v) => *v,
            Potential::Radial { values, .. } => values.values().iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn max(&self) -> f64 {
        match self {
            Potential::Constant(v) => *v,
            Potential::Radial { values, .. } => {
                values.values().iter().copied().fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    pub fn v_infinity(&self) -> f64 {
        match self {
            Potential::Constant(v) => *v,
            Potential::Radial { v_infinity, .. } => *v_infinity,
        }
    }

    /// `V + delta`.
    pub fn shifted(&self, delta: f64) -> Self {
        match self {
            Potential::Constant(v) => Potential::Constant(v + delta),
            Potential::Radial { values, v_infinity } => Potential::Radial {
                values: values.map(|v| v + delta),
                v_infinity: v_infinity + delta,
            },
        }
    }

    /// Checks (V2) and, for tabulated potentials, (V3). Returns every
    /// violation found.
    pub fn violations(&self, grid: &RadialGrid) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            Potential::Constant(v) => {
                if !(v.is_finite() && *v > 0.0) {
                    out.push(format!("(V2) lower bound: constant potential {v} must be positive"));
                }
            }
            Potential::Radial { values, v_infinity } => {
                if values.grid() != grid {
                    out.push("potential table is not sampled on the problem grid".into());
                    return out;
                }
                if let Some((i, v)) = values.values().iter().enumerate().find(|(_, v)| **v <= 0.0) {
                    out.push(format!("(V2) lower bound: V = {v} at node {i} (r = {}) is not positive", grid.node(i)));
                }
                if !(v_infinity.is_finite() && *v_infinity > 0.0) {
                    out.push(format!("(V2) bound: v_infinity = {v_infinity} must be positive"));
                }
                let tol = 1e-12 * v_infinity.abs().max(1.0);
                if let Some((i, v)) = values.values().iter().enumerate().find(|(_, v)| **v > v_infinity + tol) {
                    out.push(format!(
                        "(V3) V <= v_infinity: V = {v} at node {i} exceeds v_infinity = {v_infinity}"
                    ));
                }
                if !values.values().iter().any(|v| *v < v_infinity - tol) {
                    out.push("(V3) strict inequality: V equals v_infinity everywhere; use a constant potential".into());
                }
            }
        }
        out
    }
}

/// Which constraint manifold a solve or residual refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Manifold {
    /// Nehari-Pohozaev manifold `G = 0`, dilation fiber; constant V.
    M,
    /// Nehari manifold of `I`, scalar fiber; `p > 3`.
    N,
    /// Nehari manifold of `I*`, scalar fiber.
    NStar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub family: Family,
    pub potential: Potential,
    pub grid: RadialGrid,
}

impl ProblemSpec {
    pub fn new(family: Family, potential: Potential, grid: RadialGrid) -> Result<Self> {
        family.validate()?;
        let v = potential.violations(&grid);
        if !v.is_empty() {
            return Err(Error::Spec(v.join("; ")));
        }
        Ok(Self { family, potential, grid })
    }

    pub fn subcritical(p: f64, potential: Potential, grid: RadialGrid) -> Result<Self> {
        Self::new(Family::Subcritical { p }, potential, grid)
    }

    /// Manifold used by default: `M` for constant-V subcritical problems,
    /// `N` for subcritical with a tabulated potential, `N*` otherwise.
    pub fn default_manifold(&self) -> Manifold {
        match self.family {
            Family::Subcritical { .. } if self.potential.is_constant() => Manifold::M,
            Family::Subcritical { .. } => Manifold::N,
            _ => Manifold::NStar,
        }
    }

    /// Checks the exponent/potential preconditions of `manifold`.
    pub fn check_manifold(&self, manifold: Manifold) -> Result<()> {
        match (manifold, self.family) {
            (Manifold::M, Family::Subcritical { .. }) => {
                if self.potential.is_constant() {
                    Ok(())
                } else {
                    Err(Error::UnsupportedCombination(
                        "manifold M requires a constant potential".into(),
                    ))
                }
            }
            (Manifold::N, Family::Subcritical { p }) => {
                if p > 3.0 {
                    Ok(())
                } else {
                    Err(Error::NonUniqueFiber(p))
                }
            }
            (Manifold::NStar, Family::CriticalPerturbed { .. } | Family::CriticalPure) => Ok(()),
            (m, f) => Err(Error::UnsupportedCombination(format!(
                "manifold {m:?} does not apply to family {f:?}"
            ))),
        }
    }

    pub fn with_potential(&self, potential: Potential) -> Result<Self> {
        Self::new(self.family, potential, self.grid)
    }
}
