//! Resolvent bounds behind the crossing estimates.
//!
//! The single-resolvent sup should grow like `log(1/ε)`; the exponent of the
//! three-resolvent crossing sum is fitted on a log-log scale.

use fermikin::lattice::{dispersion, make_grid};
use fermikin::stationary::diagnostics_report;

fn main() -> fermikin::Result<()> {
    let e = dispersion(make_grid(16)?);
    let r = diagnostics_report(&e, &[0.1, 0.03, 0.01, 0.003], &[0.3, 0.2, 0.1], 10_000, 7)?;
    println!("{:>8} {:>10} {:>10} {:>8}", "eps", "sup", "alpha*", "ratio");
    for row in &r.rows_1 {
        println!("{:8.4} {:10.4} {:10.4} {:8.4}", row.epsilon, row.sup_value, row.argmax_alpha, row.ratio);
    }
    println!("fitted C = {:?}, relative change {:?}", r.fitted_c, r.c_relative_change);
    for row in &r.rows_2 {
        println!("crossing eps = {:.3}: {:.4} over {} triples", row.epsilon, row.sup_estimate, row.samples);
    }
    if let Some(fit) = &r.exponent_fit {
        println!("exponent b = {:.3} ± {:.3}", fit.slope, fit.slope_ci95);
    }
    Ok(())
}
