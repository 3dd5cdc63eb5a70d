//! Histogram of the lattice dispersion `E(p) = 2 Σ cos(2π p_i)`.
//!
//! The binned measure approximates the density of states; the van Hove
//! kinks sit at `E = ±2` and the band edges at `±6`.

use fermikin::kinetic::EnergyBinning;
use fermikin::lattice::{dispersion, make_grid};

fn main() -> fermikin::Result<()> {
    let side = std::env::args().nth(1).map(|s| s.parse().expect("L")).unwrap_or(32);
    let grid = make_grid(side)?;
    let e = dispersion(grid);
    let bins = EnergyBinning::build(&e, 0.5)?;
    println!("L = {side}: {} points, E in [{}, {}]", grid.len(), e.min(), e.max());
    let peak = bins.weights().iter().cloned().fold(0.0, f64::max);
    for b in 0..bins.n_bins() {
        let (lo, hi) = bins.edges(b);
        let dos = bins.weight(b) / bins.delta();
        let bar = "#".repeat((50.0 * bins.weight(b) / peak).round() as usize);
        println!("[{lo:6.2}, {hi:6.2})  {dos:7.4}  {bar}");
    }
    Ok(())
}
