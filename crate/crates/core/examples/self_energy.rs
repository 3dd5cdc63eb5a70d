//! `2 Im Σ(e; ν)` against the binned collision rate.

use fermikin::kinetic::{mollified_rate, self_energy, ShellOperator};
use fermikin::lattice::{dispersion, make_grid};

fn main() -> fermikin::Result<()> {
    let side = std::env::args().nth(1).map(|s| s.parse().expect("L")).unwrap_or(32);
    let e = dispersion(make_grid(side)?);
    println!("L = {side}");
    println!("{:>6} {:>6} {:>10} {:>10} {:>10}", "e", "nu", "2 Im Sigma", "binned m", "mollified");
    for energy in [-4.0, -1.0, 0.0, 1.0, 3.0] {
        for w in [0.1, 0.05] {
            let sigma = self_energy(energy, w, &e)?;
            let shells = ShellOperator::from_dispersion(&e, w)?;
            // rate of the bin holding `energy`
            let m = shells
                .binning()
                .bin_of_energy(energy)
                .map(|b| shells.bin_rate(b))
                .unwrap_or(f64::NAN);
            let g = mollified_rate(energy, w, &e)?;
            println!("{energy:6.2} {w:6.3} {:10.5} {m:10.5} {g:10.5}", 2.0 * sigma.im);
        }
    }
    Ok(())
}
