//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! cargo test --release --test acceptance

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sp_ground::cli::{bubble_grid, log_range};
use sp_ground::critical::{
    bubble_scaling_table, critical_level_certificate, cutoff_bubble, default_sobolev_grid, estimate_S,
    nonexistence_certificate, BubbleParams, Verdict,
};
use sp_ground::energies::{eval_energy, gradient, Metric};
use sp_ground::manifolds::fiber_max;
use sp_ground::poisson::{brute_force_coulomb, coulomb_energy, solve_poisson};
use sp_ground::radial::{dilate, dirichlet_energy, energy_inner, norm, volume_integrate, NormKind};
use sp_ground::solver::{continuation_c_of_V, probe_upper_bounds, solve_ground_state, SolveOptions};
use sp_ground::{Family, Manifold, Potential, ProblemSpec, RadialField, RadialGrid};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn grid(r: f64, n: usize) -> RadialGrid {
    RadialGrid::new(r, n).unwrap()
}

fn gaussian(g: RadialGrid) -> RadialField {
    RadialField::from_fn_dirichlet(g, |r| (-r * r / 2.0).exp())
}

/// Sum of one to three smooth bumps with random amplitude, center and width,
/// some of them sign-changing.
fn random_field(rng: &mut ChaCha8Rng, g: RadialGrid) -> RadialField {
    let bumps: Vec<(f64, f64, f64, f64)> = (0..rng.gen_range(1..=3))
        .map(|_| (rng.gen_range(-1.5..2.0), rng.gen_range(0.0..4.0), rng.gen_range(0.4..2.5), rng.gen_range(0.0..0.5)))
        .collect();
    RadialField::from_fn_dirichlet(g, |r| {
        bumps
            .iter()
            .map(|(a, c, w, k)| a * (1.0 + k * r) * ((-((r - c) / w).powi(2)).exp() + (-((r + c) / w).powi(2)).exp()))
            .sum()
    })
}

fn well(g: RadialGrid) -> Potential {
    Potential::gaussian_well(g, 1.0, 0.5, 1.0)
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

fn poisson_oracle() -> Outcome {
    let g = grid(20.0, 1024);
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let u = random_field(&mut rng, g);
        let fast = coulomb_energy(&u);
        let slow = brute_force_coulomb(&u).map_err(e)?;
        worst = worst.max((fast - slow).abs() / slow);
    }
    ensure(worst <= 1e-6, format!("worst relative difference {worst:.2e} > 1e-6"))?;
    let ball_exact = 8.0 * PI / 15.0;
    let mut ball_err: f64 = 0.0;
    // r = 1 is a node on both grids; it carries the midpoint value u^2 = 1/2
    for b in [grid(2.0, 1024), grid(2.0, 2000)] {
        let u = RadialField::from_fn(b, |r| {
            if (r - 1.0).abs() < 1e-12 {
                0.5f64.sqrt()
            } else if r < 1.0 {
                1.0
            } else {
                0.0
            }
        });
        ball_err = ball_err.max((coulomb_energy(&u) - ball_exact).abs());
        ball_err = ball_err.max((brute_force_coulomb(&u).map_err(e)? - ball_exact).abs());
    }
    ensure(ball_err <= 1e-4, format!("ball source error {ball_err:.2e} > 1e-4"))?;
    Ok(format!("50 fields worst rel diff {worst:.2e}; ball 8pi/15 error {ball_err:.2e}"))
}

fn scaling_identities() -> Outcome {
    let g = grid(20.0, 2000);
    let u = gaussian(g);
    let phi = solve_poisson(&u);
    let phi3 = solve_poisson(&u.scaled(3.0));
    let quad = phi
        .values()
        .iter()
        .zip(phi3.values())
        .map(|(a, b)| (9.0 * a - b).abs() / b.abs().max(1e-300))
        .fold(0.0, f64::max);
    ensure(quad <= 1e-14, format!("phi_(tu) = t^2 phi_u off by {quad:.2e}"))?;

    let tau = 2.0;
    let ut = dilate(&u, tau).map_err(e)?;
    let phit = solve_poisson(&ut);
    let mut cov: f64 = 0.0;
    for i in 0..g.len() {
        let r = g.node(i);
        if tau * r <= 8.0 {
            let exact = tau * tau * interpolate_at(&phi, tau * r);
            cov = cov.max((phit.value(i) - exact).abs() / phi.value(0));
        }
    }
    ensure(cov <= 1e-4, format!("dilation covariance {cov:.2e}"))?;

    let l2 = |f: &RadialField| volume_integrate(&f.map(|v| v * v));
    let lp = |f: &RadialField| volume_integrate(&f.map(|v| v.abs().powf(4.0)));
    let p = 3.0;
    let laws = [
        ("L2", l2(&ut) / l2(&u), tau),
        ("grad", dirichlet_energy(&ut) / dirichlet_energy(&u), tau.powi(3)),
        ("L^{p+1}", lp(&ut) / lp(&u), tau.powf(2.0 * p - 1.0)),
    ];
    for (name, ratio, expected) in laws {
        let rel = (ratio - expected).abs() / expected;
        ensure(rel <= 1e-4, format!("{name} dilation law ratio {ratio} vs {expected}"))?;
    }

    let errs: Vec<f64> = [250, 500, 1000]
        .iter()
        .map(|&n| {
            let g = grid(20.0, n);
            let u = gaussian(g);
            let c = coulomb_energy(&u);
            (dirichlet_energy(&solve_poisson(&u)) - c).abs() / c
        })
        .collect();
    let h = [0.08, 0.04, 0.02];
    ensure(errs.windows(2).all(|w| w[1] <= 0.5 * w[0]), format!("energy identity errors {errs:?} do not halve"))?;
    ensure(errs.iter().zip(h).all(|(e, h)| *e <= h * h), format!("energy identity errors {errs:?} above h^2"))?;
    Ok(format!(
        "quadratic {quad:.1e}, covariance {cov:.1e}, laws ok, energy identity {:.1e} -> {:.1e} -> {:.1e}",
        errs[0], errs[1], errs[2]
    ))
}

/// Cubic Lagrange interpolation of a smooth field off the grid.
fn interpolate_at(f: &RadialField, r: f64) -> f64 {
    let g = f.grid();
    let x = r / g.spacing();
    let j = (x.floor() as usize).clamp(1, g.intervals() - 2);
    let t = x - j as f64;
    let v = |k: usize| f.value(j + k - 1);
    v(0) * (-t * (t - 1.0) * (t - 2.0) / 6.0)
        + v(1) * ((t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0)
        + v(2) * (-(t + 1.0) * t * (t - 2.0) / 2.0)
        + v(3) * ((t + 1.0) * t * (t - 1.0) / 6.0)
}

fn gradient_check() -> Outcome {
    let g = grid(20.0, 2000);
    let families = [
        ("subcritical p=3", Family::Subcritical { p: 3.0 }),
        ("perturbed q=4", Family::CriticalPerturbed { q: 4.0 }),
        ("pure", Family::CriticalPure),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut report = Vec::new();
    for (name, family) in families {
        let spec = ProblemSpec::new(family, well(g), g).map_err(e)?;
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let u = random_field(&mut rng, g);
            let v = random_field(&mut rng, g);
            let step = 1e-4 / norm(&v, NormKind::H1).map_err(e)?.max(1.0);
            let plus = eval_energy(&u.axpy(step, &v).unwrap(), &spec).map_err(e)?;
            let minus = eval_energy(&u.axpy(-step, &v).unwrap(), &spec).map_err(e)?;
            let fd = (plus - minus) / (2.0 * step);
            let an = energy_inner(&gradient(&u, &spec, Metric::L2).map_err(e)?, &v).map_err(e)?;
            worst = worst.max((fd - an).abs() / an.abs());
        }
        ensure(worst <= 1e-6, format!("{name}: worst relative error {worst:.2e}"))?;
        report.push(format!("{name} {worst:.1e}"));
    }
    Ok(format!("50 fields each, worst rel error: {}", report.join(", ")))
}

fn subcritical_solves() -> Outcome {
    let opts = SolveOptions::default();
    let mut parts = Vec::new();
    for p in [2.5, 3.0, 4.0] {
        for (n, poh_tol) in [(2000, 1e-3), (4000, 2.5e-4)] {
            let spec = ProblemSpec::subcritical(p, Potential::Constant(1.0), grid(20.0, n)).map_err(e)?;
            let rep = solve_ground_state(&spec, &opts).map_err(e)?;
            let r = rep.residuals;
            let tag = format!("p={p} N={n}");
            ensure(rep.converged, format!("{tag}: not converged"))?;
            ensure(r.gradient <= 1e-7, format!("{tag}: gradient {:.2e}", r.gradient))?;
            ensure(r.manifold <= 1e-9, format!("{tag}: manifold {:.2e}", r.manifold))?;
            ensure(r.pohozaev <= poh_tol, format!("{tag}: pohozaev {:.2e} > {poh_tol:.1e}", r.pohozaev))?;
            let direct = eval_energy(rep.u_star(), &spec).map_err(e)?;
            let fm = fiber_max(rep.u_star(), &spec).map_err(e)?;
            let gap = (direct - fm.level).abs();
            ensure(gap <= 1e-9, format!("{tag}: fiber-max gap {gap:.2e}"))?;
            let probes = probe_upper_bounds(&rep, &spec, 100, 17 + n as u64).map_err(e)?;
            let below = probes.iter().filter(|l| **l < rep.level).count();
            ensure(below == 0, format!("{tag}: {below} probes below the level"))?;
            parts.push(format!("{tag} c={:.6} poh={:.1e}", rep.level, r.pohozaev));
        }
    }
    let spec30 = ProblemSpec::subcritical(3.0, Potential::Constant(1.0), grid(30.0, 3000)).map_err(e)?;
    let spec20 = ProblemSpec::subcritical(3.0, Potential::Constant(1.0), grid(20.0, 2000)).map_err(e)?;
    let c30 = solve_ground_state(&spec30, &opts).map_err(e)?.level;
    let c20 = solve_ground_state(&spec20, &opts).map_err(e)?.level;
    parts.push(format!("R=30 vs R=20 (p=3) rel diff {:.1e}", (c30 - c20).abs() / c20));
    Ok(parts.join("; "))
}

fn nonconstant_potential() -> Outcome {
    let g = grid(20.0, 2000);
    let opts = SolveOptions { manifold: Some(Manifold::N), ..SolveOptions::default() };
    let spec = ProblemSpec::subcritical(3.5, well(g), g).map_err(e)?;
    let cv = solve_ground_state(&spec, &opts).map_err(e)?;
    let cinf = solve_ground_state(&spec.with_potential(Potential::Constant(1.0)).map_err(e)?, &opts).map_err(e)?;
    ensure(cv.converged && cinf.converged, "solve did not converge")?;
    let margin = cinf.level - cv.level;
    ensure(margin >= 1e-3, format!("margin {margin:.2e} < 1e-3"))?;
    Ok(format!("c_V = {:.6}, c_inf = {:.6}, margin {margin:.4}", cv.level, cinf.level))
}

fn continuity() -> Outcome {
    let g = grid(20.0, 2000);
    let opts = SolveOptions { manifold: Some(Manifold::N), ..SolveOptions::default() };
    let mut parts = Vec::new();
    for (name, pot) in [("V=1", Potential::Constant(1.0)), ("well", well(g))] {
        let spec = ProblemSpec::subcritical(3.5, pot, g).map_err(e)?;
        let rep = continuation_c_of_V(&spec.potential, &[0.1, 0.01], &spec, &opts).map_err(e)?;
        ensure(rep.points.iter().all(|p| p.converged), format!("{name}: solve did not converge"))?;
        ensure(rep.lipschitz.is_finite(), format!("{name}: K not finite"))?;
        ensure(rep.monotone, format!("{name}: levels not monotone in delta"))?;
        parts.push(format!("{name} K = {:.4}", rep.lipschitz));
    }
    Ok(parts.join(", "))
}

fn sobolev_constant() -> Outcome {
    let closed = 3.0 * PI * (PI.sqrt() / 4.0).powf(2.0 / 3.0);
    let s = estimate_S(default_sobolev_grid()).map_err(e)?;
    let rel = (s - closed).abs() / closed;
    ensure(rel <= 5e-3, format!("S = {s} vs {closed}: {rel:.2e}"))?;
    Ok(format!("S = {s:.8} vs closed form {closed:.8} (rel {rel:.1e})"))
}

fn bubble_expansions() -> Outcome {
    let s_ref = estimate_S(default_sobolev_grid()).map_err(e)?;
    let params = BubbleParams::new(1e-3, 1.0).map_err(e)?;
    let eps_g = log_range(1e-3, 1e-1, 9);
    let grad = bubble_scaling_table(&eps_g, &[], &params, bubble_grid(&eps_g, 1.0, 10.0).map_err(e)?, s_ref)
        .map_err(e)?;
    let fit = grad.fit("grad").ok_or("gradient excess not positive")?;
    ensure(fit.relative_error() <= 0.25, format!("gradient slope {:.4}", fit.fitted_slope))?;
    let mut parts = vec![format!("grad {:.4}", fit.fitted_slope)];
    let eps = log_range(1e-6, 1e-4, 9);
    let table = bubble_scaling_table(&eps, &[2.0, 3.0, 4.0], &params, bubble_grid(&eps, 1.0, 10.0).map_err(e)?, s_ref)
        .map_err(e)?;
    for s in ["2", "3", "4"] {
        let f = table.fit(s).unwrap();
        ensure(f.relative_error() <= 0.10, format!("s={s}: slope {:.4} vs {}", f.fitted_slope, f.expected))?;
        parts.push(format!("s={s} {:.4}/{}", f.fitted_slope, f.expected));
    }
    Ok(parts.join(", "))
}

fn critical_certificate() -> Outcome {
    let s_est = estimate_S(default_sobolev_grid()).map_err(e)?;
    let eps = log_range(1e-6, 1e-2, 13);
    let bg = bubble_grid(&eps, 1.0, 10.0).map_err(e)?;
    let params = BubbleParams::new(1e-6, 1.0).map_err(e)?;
    let mut parts = Vec::new();
    for (name, pot) in [("V=1", Potential::Constant(1.0)), ("well", well(bg))] {
        let c = critical_level_certificate(4.0, &pot, &eps, &params, bg, s_est, 1e-3).map_err(e)?;
        ensure(c.verdict == Verdict::Certified && c.margin > 0.0, format!("{name}: {:?}, best {:.4}", c.verdict, c.best_bound))?;
        parts.push(format!("{name} best {:.4} < {:.4}", c.best_bound, c.threshold));
    }
    let narrow = log_range(1e-3, 1e-1, 9);
    let ng = bubble_grid(&narrow, 1.0, 10.0).map_err(e)?;
    let nc = critical_level_certificate(4.0, &Potential::Constant(1.0), &narrow, &params, ng, s_est, 1e-3).map_err(e)?;
    println!("  note: eps in [1e-3, 1e-1] alone gives {:?} (best {:.4})", nc.verdict, nc.best_bound);

    let g = grid(20.0, 2000);
    for (name, pot) in [("V=1", Potential::Constant(1.0)), ("well", well(g))] {
        let spec = ProblemSpec::new(Family::CriticalPerturbed { q: 4.0 }, pot, g).map_err(e)?;
        let rep = solve_ground_state(&spec, &SolveOptions::default()).map_err(e)?;
        let r = rep.residuals;
        ensure(rep.converged, format!("perturbed solve ({name}) did not converge"))?;
        parts.push(format!(
            "solve {name}: c={:.4} grad={:.1e} manifold={:.1e} poh={:.1e}",
            rep.level, r.gradient, r.manifold, r.pohozaev
        ));
    }
    Ok(parts.join("; "))
}

fn nonexistence() -> Outcome {
    let g = grid(20.0, 2000);
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut corpus: Vec<RadialField> = (0..50).map(|_| random_field(&mut rng, g)).collect();
    corpus.push(gaussian(g));
    for eps in [1e-3, 1e-2, 1e-1] {
        corpus.push(cutoff_bubble(&BubbleParams::new(eps, 4.0).unwrap(), g).map_err(e)?);
    }
    let mut worst = f64::INFINITY;
    for pot in [Potential::Constant(1.0), well(g)] {
        for u in &corpus {
            let c = nonexistence_certificate(u, &pot).map_err(e)?;
            ensure(c.lower_bound > 0.0 && c.excludes_solution(), format!("{} < {}", c.value, c.lower_bound))?;
            worst = worst.min(c.value / c.lower_bound);
        }
    }
    let spec = ProblemSpec::new(Family::CriticalPure, Potential::Constant(1.0), grid(20.0, 4000)).map_err(e)?;
    let opts = SolveOptions::critical_pure_diagnostic();
    let rep = solve_ground_state(&spec, &opts).map_err(e)?;
    ensure(rep.iterations == opts.max_iterations && !rep.converged, "pure run did not stop at the cap")?;
    let trace = rep.radius_trace(100);
    ensure(trace.len() == 100, "short trace")?;
    ensure(
        trace.windows(2).all(|w| w[1] <= w[0]) && trace[99] < trace[0],
        "90%-mass radius not monotonically shrinking",
    )?;
    let cert = rep.certificate.ok_or("no certificate")?;
    ensure(cert.excludes_solution(), "final iterate not excluded")?;
    Ok(format!(
        "{} corpus fields x 2 potentials, min value/bound {worst:.4}; r90 {:.4} -> {:.4} over last 100 of {}",
        corpus.len(),
        trace[0],
        trace[99],
        rep.iterations
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("Poisson oracle equivalence", poisson_oracle),
        ("scaling identities", scaling_identities),
        ("gradient check", gradient_check),
        ("subcritical constant-V solves", subcritical_solves),
        ("non-constant potential", nonconstant_potential),
        ("level continuity and monotonicity", continuity),
        ("Sobolev constant", sobolev_constant),
        ("bubble expansions", bubble_expansions),
        ("critical level certificate", critical_certificate),
        ("nonexistence", nonexistence),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = f();
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("PASS criterion {} ({name}, {secs:.1}s): {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {} ({name}, {secs:.1}s): {why}", k + 1)
            }
        }
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
