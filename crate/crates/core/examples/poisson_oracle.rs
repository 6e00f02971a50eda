//! Fast Poisson solve against the closed form and the O(N^2) quadrature.

use sp_ground::poisson::{brute_force_coulomb, coulomb_energy};
use sp_ground::{RadialField, RadialGrid};

fn main() -> sp_ground::Result<()> {
    let exact = (std::f64::consts::PI / 2.0).powf(1.5);
    println!("{:>6} {:>12} {:>12}", "N", "err(exact)", "err(oracle)");
    for n in [250, 500, 1000, 2000, 4000] {
        let grid = RadialGrid::new(20.0, n)?;
        let u = RadialField::from_fn_dirichlet(grid, |r| (-r * r / 2.0).exp());
        let c = coulomb_energy(&u);
        let b = brute_force_coulomb(&u)?;
        println!("{n:>6} {:>12.3e} {:>12.3e}", (c - exact).abs() / exact, (c - b).abs() / exact);
    }
    Ok(())
}
