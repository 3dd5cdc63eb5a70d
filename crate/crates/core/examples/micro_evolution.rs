//! Self-consistent disorder-averaged evolution of a cosine-bump occupation.
//!
//! `cargo run --release --example micro_evolution -- [L] [eta] [samples]`

use std::time::Instant;

use fermikin::lattice::{make_grid, PairPotential};
use fermikin::micro::{initial_occupation, self_consistent_evolve, EvolutionConfig, InitialOccupation};

fn main() -> fermikin::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, d: &str| args.get(i).cloned().unwrap_or_else(|| d.to_string());
    let side: usize = arg(0, "8").parse().expect("L");
    let eta: f64 = arg(1, "0.5").parse().expect("eta");
    let samples: usize = arg(2, "4").parse().expect("samples");

    let grid = make_grid(side)?;
    let j = initial_occupation(&InitialOccupation::CosineBump { amplitude: 0.4, offset: 0.5 }, grid)?;
    let potential = PairPotential::gaussian_bump(grid, 1.0, 1.0, 1.0)?;
    let cfg = EvolutionConfig {
        eta,
        lambda: eta * eta,
        t_macro: 0.5,
        n_samples: samples,
        checkpoints: vec![0.0, 0.25, 0.5],
        seed: 1,
        ..Default::default()
    };
    let start = Instant::now();
    let run = self_consistent_evolve(&j, &cfg, &potential)?;
    let h = run.horizon;
    println!("L = {side}, eta = {eta}, lambda = {:.4}, {samples} samples", cfg.lambda);
    println!("horizon: {} steps of dt = {}, t = {:.3}, T = {:.4}", h.steps, cfg.dt, h.t_micro, h.t_macro);
    println!(
        "picard: {} passes, residuals {:?}, converged = {}",
        run.picard.iterations, run.picard.residuals, run.picard.converged
    );
    let t = &run.trajectory;
    for (c, cp) in t.checkpoints.iter().enumerate() {
        let (mass, se) = t.weak_observable(c, &fermikin::ScalarField::constant(grid, 1.0))?;
        println!(
            "T = {:.4}: mass {mass:.12} ± {se:.1e}, min {:.4}, max {:.4}",
            cp.actual,
            t.mu[c].min(),
            t.mu[c].max()
        );
    }
    println!("wall clock {:.2} s", start.elapsed().as_secs_f64());
    Ok(())
}
