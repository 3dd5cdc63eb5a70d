//! Damped fixed-point iteration `F = A_{Ẽ(F)}[F]` with `Ẽ = E - λ v̂∗F`.

use fermikin::kinetic::ShellOperator;
use fermikin::lattice::{dispersion, make_grid, PairPotential};
use fermikin::micro::{initial_occupation, InitialOccupation};
use fermikin::stationary::{stationary_fixed_point, FixedPointConfig};

fn main() -> fermikin::Result<()> {
    let grid = make_grid(16)?;
    let potential = PairPotential::gaussian_bump(grid, 1.0, 1.0, 1.0)?;
    let j = initial_occupation(&InitialOccupation::CosineBump { amplitude: 0.4, offset: 0.5 }, grid)?;
    let cfg = FixedPointConfig::default();

    let r0 = stationary_fixed_point(&j, 0.0, &potential, &FixedPointConfig { damping: 1.0, ..cfg.clone() })?;
    let a = ShellOperator::from_dispersion(&dispersion(grid), cfg.delta)?.average(&j)?;
    println!("λ = 0: {} iteration, |F - A_E[J]| = {:.1e}", r0.iterations, r0.f.sup_distance(&a));

    for lambda in [0.05, 0.1, 0.2] {
        let r = stationary_fixed_point(&j, lambda, &potential, &cfg)?;
        println!(
            "λ = {lambda}: converged {} after {} iterations, residual {:.2e}, |Ẽ - E| = {:.3e}",
            r.converged,
            r.iterations,
            r.residual,
            r.dispersion.etilde.sup_distance(&dispersion(grid))
        );
    }
    Ok(())
}
