//! A potential well lowers the level below the one of the constant
//! potential at infinity, which is what restores compactness.

use sp_ground::solver::{solve_ground_state, SolveOptions};
use sp_ground::{Manifold, Potential, ProblemSpec, RadialGrid};

fn main() -> sp_ground::Result<()> {
    let grid = RadialGrid::new(20.0, 2000)?;
    let p = 3.5;
    let opts = SolveOptions { manifold: Some(Manifold::N), ..SolveOptions::default() };

    let well = ProblemSpec::subcritical(p, Potential::gaussian_well(grid, 1.0, 0.5, 1.0), grid)?;
    let flat = well.with_potential(Potential::Constant(1.0))?;
    let c_v = solve_ground_state(&well, &opts)?;
    let c_inf = solve_ground_state(&flat, &opts)?;

    println!("V(r) = 1 - 0.5 exp(-r^2), p = {p}");
    println!("c_V   = {:.10}  converged {}", c_v.level, c_v.converged);
    println!("c_inf = {:.10}  converged {}", c_inf.level, c_inf.converged);
    println!("gap   = {:.6}", c_inf.level - c_v.level);
    Ok(())
}
