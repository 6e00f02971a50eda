//! Ground state of the subcritical system with V = 1.
//!
//! cargo run --release --example solve_ground_state -- 3.0 4000

use sp_ground::manifolds::fiber_max;
use sp_ground::solver::{mass_radius, probe_upper_bounds, solve_ground_state, SolveOptions};
use sp_ground::{Potential, ProblemSpec, RadialGrid};

fn main() -> sp_ground::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let p: f64 = args.get(1).map_or(3.0, |s| s.parse().expect("p"));
    let n: usize = args.get(2).map_or(2000, |s| s.parse().expect("N"));
    let spec = ProblemSpec::subcritical(p, Potential::Constant(1.0), RadialGrid::new(20.0, n)?)?;
    let rep = solve_ground_state(&spec, &SolveOptions::default())?;
    println!("p = {p}, N = {n}, manifold {:?}", rep.manifold);
    println!("level      {:.12}  ({})", rep.level, rep.level_label);
    println!("iterations {} converged {}", rep.iterations, rep.converged);
    println!("residuals  {:?}", rep.residuals);
    println!("u(0)       {:.6}", rep.u_star().value(0));
    println!("r50, r90   {:.4}, {:.4}", mass_radius(rep.u_star(), &spec, 0.5)?, mass_radius(rep.u_star(), &spec, 0.9)?);

    let fm = fiber_max(rep.u_star(), &spec)?;
    println!("fiber max at u*: scale {:.3e} level {:.12}", fm.scale, fm.level);
    let probes = probe_upper_bounds(&rep, &spec, 100, 7)?;
    let min = probes.iter().copied().fold(f64::INFINITY, f64::min);
    println!("lowest of {} random fiber maxima: {min:.6}", probes.len());
    Ok(())
}
