//! Fitted eps-exponents of cut-off bubbles against the expected laws.

use sp_ground::cli::{bubble_grid, log_range};
use sp_ground::critical::{bubble_scaling_table, BubbleParams};

const S_SOBOLEV: f64 = 5.477904089531332;

fn main() -> sp_ground::Result<()> {
    let params = BubbleParams::new(1e-6, 1.0)?;
    let eps = log_range(1e-6, 1e-4, 9);
    let table = bubble_scaling_table(&eps, &[2.0, 3.0, 4.0], &params, bubble_grid(&eps, 1.0, 10.0)?, S_SOBOLEV)?;
    let eps_g = log_range(1e-3, 1e-1, 9);
    let grad = bubble_scaling_table(&eps_g, &[], &params, bubble_grid(&eps_g, 1.0, 10.0)?, S_SOBOLEV)?;
    let fits = grad.fits.iter().chain(table.fits.iter().filter(|f| f.s != "grad"));
    println!("{:>5} {:>10} {:>10} {:>9}", "s", "slope", "expected", "rel.err");
    for f in fits {
        println!("{:>5} {:>10.5} {:>10.5} {:>9.2e}", f.s, f.fitted_slope, f.expected, f.relative_error());
    }
    Ok(())
}
