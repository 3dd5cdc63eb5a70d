//! Dense reference objects shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use fermikin::disorder::DisorderField;
use fermikin::lattice::{dispersion, GridSpec, ScalarField};
use fermikin::micro::PropagatorColumns;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_field(grid: GridSpec, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ScalarField::from_fn(grid, |_| rng.gen::<f64>())
}

/// `w(k) = L^{-3} Σ_x e^{-2πi k·x/L} ω_x` by direct summation.
fn disorder_symbol(grid: GridSpec, omega: &ScalarField) -> Vec<Complex64> {
    let l = grid.side() as f64;
    let n = grid.len();
    (0..n)
        .map(|k| {
            let kv = grid.wavevector(k);
            let mut acc = Complex64::new(0.0, 0.0);
            for x in 0..n {
                let xv = grid.coords(x);
                let dot = kv[0] as f64 * xv[0] as f64 + kv[1] as f64 * xv[1] as f64 + kv[2] as f64 * xv[2] as f64;
                acc += Complex64::from_polar(omega[x], -2.0 * PI * dot / l);
            }
            acc / n as f64
        })
        .collect()
}

/// `H_{pq} = (E(p) - λκ(p)) δ_{pq} + η w(p - q)` in the momentum basis.
pub fn dense_hamiltonian(omega: &DisorderField, kappa: &ScalarField, eta: f64, lambda: f64) -> DMatrix<Complex64> {
    let grid = omega.grid();
    let n = grid.len();
    let e = dispersion(grid);
    let w = disorder_symbol(grid, omega.omega());
    DMatrix::from_fn(n, n, |p, q| {
        let mut h = w[grid.sub(p, q)] * eta;
        if p == q {
            h += e[p] - lambda * kappa[p];
        }
        h
    })
}

/// `e^{-itH}` by dense matrix exponentiation.
pub fn dense_propagator(h: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    (h * Complex64::new(0.0, -t)).exp()
}

/// `sup_{p,q} |U_{qp} - φ^{(p)}_q|` over the evolved columns.
pub fn column_distance(u: &DMatrix<Complex64>, columns: &PropagatorColumns) -> f64 {
    let mut worst = 0.0f64;
    for (j, &p) in columns.momenta().iter().enumerate() {
        for (q, z) in columns.column(j).iter().enumerate() {
            worst = worst.max((u[(q, p)] - z).norm());
        }
    }
    worst
}
