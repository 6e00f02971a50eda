//! Best Sobolev constant from the minimal Rayleigh quotient over bubbles.

use sp_ground::critical::{default_sobolev_grid, estimate_S};
use sp_ground::RadialGrid;

fn main() -> sp_ground::Result<()> {
    let closed = 3.0 * (std::f64::consts::PI / 2.0).powf(4.0 / 3.0);
    let default = default_sobolev_grid();
    for grid in [RadialGrid::new(100.0, 5000)?, RadialGrid::new(200.0, 10000)?, default] {
        let s = estimate_S(grid)?;
        println!("R = {:5}, N = {:6}: S = {s:.10} (rel. err {:.2e})", grid.radius(), grid.intervals(), (s - closed).abs() / closed);
    }
    Ok(())
}
