//! Upper bound for the critical level from cut-off Talenti bubbles,
//! compared with S^{3/2}/3.

use sp_ground::cli::{bubble_grid, log_range};
use sp_ground::critical::{critical_level_certificate, default_sobolev_grid, estimate_S, BubbleParams};
use sp_ground::Potential;

fn main() -> sp_ground::Result<()> {
    let q = 4.0;
    let s = estimate_S(default_sobolev_grid())?;
    println!("S estimate {s:.10}");
    for (label, eps) in [("eps in [1e-3, 1e-1]", log_range(1e-3, 1e-1, 9)), ("eps in [1e-6, 1e-2]", log_range(1e-6, 1e-2, 13))] {
        let grid = bubble_grid(&eps, 1.0, 10.0)?;
        for (name, pot) in [("V = 1", Potential::Constant(1.0)), ("well", Potential::gaussian_well(grid, 1.0, 0.5, 1.0))] {
            let cert = critical_level_certificate(q, &pot, &eps, &BubbleParams::new(eps[0], 1.0)?, grid, s, 1e-3)?;
            println!(
                "{label}, {name:6}: best {:.6} at eps {:.2e}, threshold {:.6}, {:?}",
                cert.best_bound, cert.best_epsilon, cert.threshold, cert.verdict
            );
        }
    }
    Ok(())
}
