//! The pure critical problem has no ground state: descent concentrates
//! and the Pohozaev certificate excludes every iterate.

use sp_ground::solver::{solve_ground_state, SolveOptions};
use sp_ground::{Family, Potential, ProblemSpec, RadialGrid};

fn main() -> sp_ground::Result<()> {
    let spec = ProblemSpec::new(Family::CriticalPure, Potential::Constant(1.0), RadialGrid::new(20.0, 4000)?)?;
    let rep = solve_ground_state(&spec, &SolveOptions::critical_pure_diagnostic())?;
    for h in rep.history.iter().step_by(50) {
        println!("iter {:4}  energy {:.6}  r90 {:.4}", h.iteration, h.energy, h.radius90);
    }
    let trace = rep.radius_trace(100);
    println!("r90 shrinks monotonically over the last 100: {}", trace.windows(2).all(|w| w[1] <= w[0]));
    let c = rep.certificate.expect("certificate");
    println!("certificate {:.6} >= {:.6}: {}", c.value, c.lower_bound, c.excludes_solution());
    Ok(())
}
