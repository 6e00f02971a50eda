//! Levels under small shifts of the potential.

use sp_ground::solver::{continuation_c_of_V, SolveOptions};
use sp_ground::{Manifold, Potential, ProblemSpec, RadialGrid};

fn main() -> sp_ground::Result<()> {
    let spec = ProblemSpec::subcritical(3.5, Potential::Constant(1.0), RadialGrid::new(20.0, 2000)?)?;
    let opts = SolveOptions { manifold: Some(Manifold::N), ..SolveOptions::default() };
    let deltas = [-0.1, -0.01, 0.01, 0.1];
    let rep = continuation_c_of_V(&spec.potential, &deltas, &spec, &opts)?;
    println!("c(V) = {:.10}", rep.base_level);
    for p in &rep.points {
        println!("delta {:+.2}: c = {:.10} ({:+.3e})", p.delta, p.level, p.level - rep.base_level);
    }
    println!("Lipschitz ratio {:.4}, monotone {}", rep.lipschitz, rep.monotone);
    Ok(())
}
