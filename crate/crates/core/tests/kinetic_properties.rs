//! Structural invariants of the shell flow on random inputs.

mod common;

use common::random_field;
use fermikin::kinetic::{duhamel_series, solve_explicit, solve_rk4, EnergyBinning, ShellOperator};
use fermikin::lattice::{dispersion, make_grid, ScalarField};
use proptest::prelude::*;

fn shells(side: usize, delta: f64) -> ShellOperator {
    ShellOperator::from_dispersion(&dispersion(make_grid(side).unwrap()), delta).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projection_and_conservation(seed in any::<u64>(), side in prop::sample::select(vec![4usize, 6, 8, 12]), delta in 0.05f64..2.0) {
        let s = shells(side, delta);
        let f = random_field(s.grid(), seed);
        let a = s.average(&f).unwrap();
        prop_assert!(s.average(&a).unwrap().sup_distance(&a) <= 1e-13);
        prop_assert!(s.collision(&f).unwrap().mean().abs() <= 1e-12);
        // self-adjoint with the uniform measure
        let g = random_field(s.grid(), seed ^ 0x55);
        let lhs = s.average(&g).unwrap().inner(&f);
        let rhs = g.inner(&a);
        prop_assert!((lhs - rhs).abs() <= 1e-13);
    }

    #[test]
    fn explicit_flow_is_monotone_and_bounded(seed in any::<u64>(), t1 in 0.0f64..3.0, dt in 0.0f64..3.0) {
        let s = shells(8, 0.3);
        let f = random_field(s.grid(), seed);
        let a = s.average(&f).unwrap();
        let x = solve_explicit(&f, t1, &s).unwrap().f;
        let y = solve_explicit(&f, t1 + dt, &s).unwrap().f;
        prop_assert!(x.min() >= f.min() - 1e-12 && x.max() <= f.max() + 1e-12);
        prop_assert!(y.sup_distance(&a) <= x.sup_distance(&a) + 1e-15);
    }

    #[test]
    fn rk4_is_linear(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let s = shells(6, 0.25);
        let f = random_field(s.grid(), seed);
        let g = random_field(s.grid(), seed.wrapping_add(1));
        let mix = f.zip_with(&g, |u, v| a * u + b * v);
        let lhs = solve_rk4(&mix, 0.7, 0.01, &s).unwrap().f;
        let fr = solve_rk4(&f, 0.7, 0.01, &s).unwrap().f;
        let gr = solve_rk4(&g, 0.7, 0.01, &s).unwrap().f;
        prop_assert!(lhs.sup_distance(&fr.zip_with(&gr, |u, v| a * u + b * v)) <= 1e-10);
    }
}

#[test]
fn rk4_richardson_self_check() {
    let s = shells(8, 0.2);
    let f = random_field(s.grid(), 3);
    let t = 1.0;
    let (h, h2) = (0.02, 0.01);
    let coarse = solve_rk4(&f, t, h, &s).unwrap().f;
    let fine = solve_rk4(&f, t, h2, &s).unwrap().f;
    let exact = solve_explicit(&f, t, &s).unwrap().f;
    // global RK4 error model C·T·dt⁴ with C fitted on the coarse step
    let c = coarse.sup_distance(&exact) / (t * h.powi(4));
    let model = c * t * h2.powi(4);
    let change = coarse.sup_distance(&fine);
    assert!(change <= 16.0 * model, "change {change:e}, model {model:e}");
    let ratio = coarse.sup_distance(&exact) / fine.sup_distance(&exact);
    assert!((12.0..20.0).contains(&ratio), "halving ratio {ratio}");
}

#[test]
fn series_and_resummation_identities() {
    let g = make_grid(16).unwrap();
    let e = dispersion(g);
    let s = ShellOperator::from_dispersion(&e, 0.1).unwrap();
    let f = random_field(g, 8);
    let t = 2.0 / s.max_rate();
    let series = duhamel_series(&f, t, 40, &s).unwrap();
    let exact = solve_explicit(&f, t, &s).unwrap().f;
    assert!(series.partial_sums.last().unwrap().sup_distance(&exact) <= 1e-12);
    assert_eq!(series.partial_sums[0], f);
    assert!(series.resummed.sup_distance(&exact) <= 1e-12);
    // e^{-Tm}(F0 + (e^{Tm} - 1) A[F0])
    let a = s.average(&f).unwrap();
    let m = s.rate();
    let closed = ScalarField::from_fn(g, |p| (-t * m[p]).exp() * (f[p] + (t * m[p]).exp_m1() * a[p]));
    assert!(closed.sup_distance(&exact) <= 1e-12);
}

#[test]
fn fine_grid_histogram_oracle_for_the_zero_energy_bin() {
    // bin weight of the L = 64 bin holding E = 0 against a 128³ histogram
    let coarse = EnergyBinning::build(&dispersion(make_grid(64).unwrap()), 0.05).unwrap();
    let fine = EnergyBinning::build(&dispersion(make_grid(128).unwrap()), 0.05).unwrap();
    let b = coarse.bin_of_energy(0.0).unwrap();
    let bf = fine.bin_of_energy(0.0).unwrap();
    assert_eq!(coarse.edges(b), fine.edges(bf));
    let (w, wf) = (coarse.weight(b), fine.weight(bf));
    assert!(((w - wf) / wf).abs() <= 0.02, "L=64 weight {w}, 128³ weight {wf}");
}
