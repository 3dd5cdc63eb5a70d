//! Split-step dynamics against dense matrix exponentials.

mod common;

use common::{column_distance, dense_hamiltonian, dense_propagator};
use fermikin::disorder::{sample_disorder, SeedSpec};
use fermikin::lattice::{make_grid, PairPotential, ScalarField};
use fermikin::micro::{
    evolve_sample, initial_occupation, self_consistent_evolve, step_split, EvolutionConfig, InitialOccupation,
    KappaTrajectory, PropagatorColumns,
};

fn bump(grid: fermikin::GridSpec) -> ScalarField {
    initial_occupation(&InitialOccupation::CosineBump { amplitude: 0.4, offset: 0.5 }, grid).unwrap()
}

#[test]
fn sample_occupation_matches_dense_exponential() {
    let grid = make_grid(8).unwrap();
    let j = bump(grid);
    let potential = PairPotential::gaussian_bump(grid, 1.0, 1.0, 1.0).unwrap();
    let kappa = potential.kappa(&j).unwrap();
    let omega = sample_disorder(grid, SeedSpec::new(5, 0));
    // T = 0.2 at η = 0.5 is t = 0.8; dt keeps the Strang error below 1e-6
    let cfg = EvolutionConfig {
        eta: 0.5,
        lambda: 0.25,
        t_macro: 0.2,
        dt: 2e-3,
        max_steps: 1000,
        ..Default::default()
    };
    let steps = cfg.horizon().steps;
    assert_eq!(steps, 400);
    let traj = KappaTrajectory::constant(kappa.clone(), steps, cfg.dt);
    let mu = &evolve_sample(&j, &omega, &traj, &cfg).unwrap().mu[0];

    let u = dense_propagator(&dense_hamiltonian(&omega, &kappa, cfg.eta, cfg.lambda), 0.8);
    let n = grid.len();
    let reference = ScalarField::from_fn(grid, |q| (0..n).map(|p| j[p] * u[(q, p)].norm_sqr()).sum());
    let err = mu.sup_distance(&reference);
    assert!(err <= 1e-6, "sup error {err:e}");
}

#[test]
fn strang_error_is_second_order() {
    let grid = make_grid(4).unwrap();
    let omega = sample_disorder(grid, SeedSpec::new(9, 2));
    let kappa = ScalarField::from_fn(grid, |p| (p as f64 * 0.37).cos());
    let (eta, lambda, t) = (0.5, 0.3, 1.0);
    let u = dense_propagator(&dense_hamiltonian(&omega, &kappa, eta, lambda), t);
    let err = |dt: f64| {
        let mut cols = PropagatorColumns::identity(grid, 0);
        for _ in 0..(t / dt).round() as usize {
            step_split(&mut cols, &kappa, &omega, eta, lambda, dt).unwrap();
        }
        column_distance(&u, &cols)
    };
    let (e1, e2, e3) = (err(0.02), err(0.01), err(0.005));
    for (a, b) in [(e1, e2), (e2, e3)] {
        let r = a / b;
        assert!((3.6..4.4).contains(&r), "halving ratio {r} ({a:e} -> {b:e})");
    }
}

#[test]
fn picard_converges_quickly_with_a_smooth_potential() {
    let grid = make_grid(8).unwrap();
    let j = bump(grid);
    let potential = PairPotential::gaussian_bump(grid, 1.0, 1.0, 1.0).unwrap();
    let cfg = EvolutionConfig {
        eta: 0.5,
        lambda: 0.25,
        t_macro: 0.5,
        n_samples: 3,
        seed: 21,
        ..Default::default()
    };
    let run = self_consistent_evolve(&j, &cfg, &potential).unwrap();
    let r = &run.picard.residuals;
    assert!(run.picard.converged && run.picard.iterations <= 5, "{:?}", run.picard);
    assert!(r.windows(2).all(|w| w[1] < w[0]), "{r:?}");
}

#[test]
fn mass_and_fermionic_bounds_hold_per_sample() {
    let grid = make_grid(6).unwrap();
    let potential = PairPotential::gaussian_bump(grid, 1.0, 1.0, 1.0).unwrap();
    for (seed, kind) in [
        (1, InitialOccupation::FermiDirac { beta: 2.0, mu_chem: 0.5 }),
        (2, InitialOccupation::FermiDirac { beta: f64::INFINITY, mu_chem: -1.0 }),
        (3, InitialOccupation::CosineBump { amplitude: 0.5, offset: 0.5 }),
    ] {
        let j = initial_occupation(&kind, grid).unwrap();
        let cfg = EvolutionConfig {
            eta: 0.6,
            lambda: 0.36,
            n_samples: 3,
            checkpoints: vec![0.1, 0.3, 0.5],
            seed,
            ..Default::default()
        };
        let run = self_consistent_evolve(&j, &cfg, &potential).unwrap();
        let mass = j.mean();
        for per in &run.trajectory.samples {
            for mu in per {
                assert!((mu.mean() - mass).abs() <= 1e-10);
                assert!(mu.min() >= -1e-12 && mu.max() <= 1.0 + 1e-9);
            }
        }
    }
}
