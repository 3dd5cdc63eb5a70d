//! Disorder-averaged occupations against the Boltzmann prediction as η shrinks.
//!
//! A reduced version of the full trend check; `cargo run --release` is
//! strongly advised.

use fermikin::lattice::{make_grid, PairPotential};
use fermikin::micro::{
    initial_occupation, kinetic_scaling_experiment, EvolutionConfig, InitialOccupation, KineticScalingSpec,
    TestFunction,
};

fn main() -> fermikin::Result<()> {
    let grid = make_grid(8)?;
    let j = initial_occupation(&InitialOccupation::CosineBump { amplitude: 0.4, offset: 0.5 }, grid)?;
    let potential = PairPotential::gaussian_bump(grid, 1.0, 1.0, 1.0)?;
    let spec = KineticScalingSpec {
        base: EvolutionConfig {
            t_macro: 0.5,
            n_samples: 16,
            seed: 3,
            ..Default::default()
        },
        etas: vec![0.6, 0.45, 0.3],
        lambda_coeff: 1.0,
        delta: 0.5,
        pairs: vec![(TestFunction::One, TestFunction::One), (TestFunction::One, TestFunction::Cos(0))],
    };
    let table = kinetic_scaling_experiment(&spec, &j, &potential)?;
    for r in &table.rows {
        print!("η = {:.2} ({} steps):", r.eta, r.steps);
        for w in &r.weak {
            print!("  {} err {:.2e} ± {:.1e}", w.pair, w.error, w.micro_se);
        }
        println!("  sup {:.3e}", r.sup_error);
    }
    println!("cos pair decreasing beyond noise: {}", table.weak_error_decreasing(1));
    Ok(())
}
