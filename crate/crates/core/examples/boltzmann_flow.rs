//! Linear Boltzmann flow on energy shells, solved three ways.

use fermikin::kinetic::{duhamel_series, fermi_dirac_stationarity, solve_explicit, solve_rk4, ShellOperator};
use fermikin::lattice::{dispersion, make_grid};
use fermikin::micro::{initial_occupation, InitialOccupation};

fn main() -> fermikin::Result<()> {
    let grid = make_grid(16)?;
    let shells = ShellOperator::from_dispersion(&dispersion(grid), 0.1)?;
    let f0 = initial_occupation(&InitialOccupation::CosineBump { amplitude: 0.4, offset: 0.5 }, grid)?;
    println!("{} bins, max rate {:.4}", shells.binning().n_bins(), shells.max_rate());

    for t in [0.0, 0.5, 1.0, 4.0] {
        let exact = solve_explicit(&f0, t, &shells)?.f;
        let rk4 = solve_rk4(&f0, t, 1e-3, &shells)?.f;
        let series = duhamel_series(&f0, t, 40, &shells)?;
        let last = series.partial_sums.last().expect("order 0");
        println!(
            "T = {t:3.1}: mass {:.14}  |exact - rk4| {:.1e}  |exact - duhamel| {:.1e}  range [{:.4}, {:.4}]",
            exact.mean(),
            exact.sup_distance(&rk4),
            exact.sup_distance(last),
            exact.min(),
            exact.max()
        );
    }

    for delta in [0.1, 0.05, 0.025] {
        let shells = ShellOperator::from_dispersion(&dispersion(make_grid(32)?), delta)?;
        let r = fermi_dirac_stationarity(1.0, 0.0, &shells)?;
        println!("Fermi-Dirac residual at Δ = {delta}: {:.3e} ({:.4} of max m)", r.residual, r.residual / r.max_rate);
    }
    Ok(())
}
