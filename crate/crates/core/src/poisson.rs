//! Newtonian potential `phi_u` of `-Delta phi = u^2` and the Coulomb energy
//! `\int phi_u u^2`, plus an independent O(N^2) quadrature oracle.
//!
//! Green kernel is `1/(4 pi |x|)`, so for radial sources
//! `phi(r) = (1/r) \int_0^r s^2 u^2 ds + \int_r^R s u^2 ds`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::radial::{simpson, RadialField};
use crate::sum::{sum, Accumulator};

/// Kernel normalization for `-Delta phi = u^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoulombConvention {
    pub green_constant: f64,
}

impl Default for CoulombConvention {
    fn default() -> Self {
        Self { green_constant: 1.0 / (4.0 * PI) }
    }
}

/// Largest interval count accepted by [`brute_force_coulomb`].
pub const ORACLE_MAX_INTERVALS: usize = 4096;

/// Single O(N) pass of prefix/suffix sums.
///
/// Both pieces use trapezoid weights split at the evaluation node; the kink
/// of the kernel there is corrected by the Euler-Maclaurin term
/// `-(h^2/12) u_i^2`, which makes the result fourth-order for smooth `u`.
/// Every weight stays nonnegative (`h r_i > h^2/12` for `i >= 1`), so
/// `phi >= 0` node-wise, and the discrete kernel is symmetric, which makes
/// `\frac14 \int phi_u u^2` differentiate to `phi_u u` exactly.
pub fn solve_poisson(u: &RadialField) -> RadialField {
    let g = *u.grid();
    let n = g.intervals();
    let h = g.spacing();
    let v = u.values();
    let omega = |j: usize| if j == n { 0.5 * h } else { h };

    let mut inner = vec![0.0; n + 1];
    let mut acc = Accumulator::new();
    for j in 0..=n {
        let r = g.node(j);
        acc.add(omega(j) * r * r * v[j] * v[j]);
        inner[j] = acc.value();
    }
    let mut outer = vec![0.0; n + 1];
    let mut acc = Accumulator::new();
    for j in (0..n).rev() {
        let r = g.node(j + 1);
        acc.add(omega(j + 1) * r * v[j + 1] * v[j + 1]);
        outer[j] = acc.value();
    }

    let mut phi = vec![0.0; n + 1];
    phi[0] = outer[0] + h * h / 12.0 * v[0] * v[0];
    for i in 1..=n {
        let kink = if i < n { h * h / 12.0 * v[i] * v[i] } else { 0.0 };
        phi[i] = inner[i] / g.node(i) + outer[i] - kink;
    }
    RadialField::new(g, phi).expect("finite")
}

/// `\int phi_u u^2` (without the 1/4 of the energy), energy weights.
pub fn coulomb_energy(u: &RadialField) -> f64 {
    let phi = solve_poisson(u);
    coulomb_energy_with(u, &phi)
}

pub(crate) fn coulomb_energy_with(u: &RadialField, phi: &RadialField) -> f64 {
    let w = u.grid().energy_weights();
    sum(u.values().iter().zip(phi.values()).zip(&w).map(|((v, p), w)| w * p * v * v))
}

/// Direct double radial quadrature of
/// `4 pi \int\int s^2 t^2 u^2(s) u^2(t) / max(s, t) ds dt`.
///
/// Each row integral is split at the diagonal and integrated with composite
/// Simpson on both sides, then the outer integral is Simpson again. Costs
/// O(N^2); shares no code with [`solve_poisson`].
pub fn brute_force_coulomb(u: &RadialField) -> Result<f64> {
    let g = u.grid();
    let n = g.intervals();
    if n > ORACLE_MAX_INTERVALS {
        return Err(Error::OracleSize { intervals: n, limit: ORACLE_MAX_INTERVALS });
    }
    let h = g.spacing();
    let rho: Vec<f64> = u.values().iter().map(|v| v * v).collect();
    let nodes = g.nodes();
    let mut row = vec![0.0; n + 1];
    let mut left = Vec::with_capacity(n + 1);
    let mut right = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let s = nodes[i];
        left.clear();
        right.clear();
        for j in 0..=n {
            let t = nodes[j];
            let k = t * t * rho[j] / s.max(t);
            if j <= i {
                left.push(if s > 0.0 { k } else { 0.0 });
            }
            if j >= i {
                right.push(if t > 0.0 { k } else { 0.0 });
            }
        }
        let li = if left.len() >= 2 { simpson(&left, h) } else { 0.0 };
        let ri = if right.len() >= 2 { simpson(&right, h) } else { 0.0 };
        row[i] = s * s * rho[i] * (li + ri);
    }
    Ok(4.0 * PI * simpson(&row, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{dirichlet_energy, RadialGrid};

    fn ball_source(g: RadialGrid) -> RadialField {
        // sampled indicator of [0, 1]; the node on the jump carries u^2 = 1/2
        RadialField::from_fn(g, |r| {
            if (r - 1.0).abs() < 1e-12 {
                0.5f64.sqrt()
            } else if r < 1.0 {
                1.0
            } else {
                0.0
            }
        })
    }

    #[test]
    fn zero_source() {
        let g = RadialGrid::new(5.0, 64).unwrap();
        let z = RadialField::zeros(g);
        assert!(solve_poisson(&z).is_zero());
        assert_eq!(coulomb_energy(&z), 0.0);
        assert_eq!(brute_force_coulomb(&z).unwrap(), 0.0);
    }

    #[test]
    fn ball_potential_closed_form() {
        let err = |n: usize| {
            let g = RadialGrid::new(2.0, n).unwrap();
            let phi = solve_poisson(&ball_source(g));
            (0..=n)
                .map(|i| {
                    let r = g.node(i);
                    let exact = if r <= 1.0 { 0.5 - r * r / 6.0 } else { 1.0 / (3.0 * r) };
                    (phi.value(i) - exact).abs()
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(400), err(800));
        let h = 2.0 / 400.0;
        assert!(e1 <= h * h, "{e1}");
        assert!(e1 / e2 > 3.0, "{}", e1 / e2);
    }

    #[test]
    fn ball_coulomb_energy() {
        let g = RadialGrid::new(2.0, 2000).unwrap();
        let u = ball_source(g);
        let exact = 8.0 * PI / 15.0;
        assert!((coulomb_energy(&u) - exact).abs() < 1e-4);
        assert!((brute_force_coulomb(&u).unwrap() - exact).abs() < 1e-4);
    }

    #[test]
    fn gaussian_matches_closed_form_and_oracle() {
        // \int phi u^2 for u = exp(-r^2/2) equals (pi/2)^{3/2}
        let exact = 1.968_701_243_215_302_5;
        let g = RadialGrid::new(20.0, 2000).unwrap();
        let u = RadialField::from_fn_dirichlet(g, |r| (-r * r / 2.0).exp());
        let c = coulomb_energy(&u);
        let b = brute_force_coulomb(&u).unwrap();
        assert!((c - exact).abs() / exact < 1e-8, "{c}");
        assert!((c - b).abs() / b < 1e-6, "{c} {b}");
    }

    #[test]
    fn quadratic_scaling_is_exact_for_two() {
        let g = RadialGrid::new(10.0, 500).unwrap();
        let u = RadialField::from_fn_dirichlet(g, |r| (1.0 + r) * (-r).exp());
        let p1 = solve_poisson(&u);
        let p2 = solve_poisson(&u.scaled(2.0));
        for (a, b) in p1.values().iter().zip(p2.values()) {
            assert_eq!(4.0 * a, *b);
        }
    }

    #[test]
    fn energy_identity() {
        let g = RadialGrid::new(20.0, 2000).unwrap();
        let u = RadialField::from_fn_dirichlet(g, |r| (-r * r / 2.0).exp());
        let phi = solve_poisson(&u);
        let lhs = dirichlet_energy(&phi);
        let rhs = coulomb_energy(&u);
        assert!((lhs - rhs).abs() / rhs < 1e-7, "{lhs} {rhs}");
    }

    #[test]
    fn oracle_size_guard() {
        let g = RadialGrid::new(1.0, 5000).unwrap();
        let u = RadialField::zeros(g);
        assert!(matches!(brute_force_coulomb(&u), Err(Error::OracleSize { .. })));
    }
}
