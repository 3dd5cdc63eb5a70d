//! Weak and sup-norm comparison of a microscopic occupation file against a
//! kinetic one.

use std::path::Path;

use serde::Serialize;

use super::io::read_field_csv;
use crate::error::{Error, Result};
use crate::lattice::ScalarField;
use crate::micro::TestFunction;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    /// `L^{-3} Σ f̄ g μ`
    pub micro_weak: f64,
    /// `L^{-3} Σ f̄ g F`
    pub kinetic_weak: f64,
    /// `|L^{-3} Σ f̄ g (μ - F)|`
    pub weak_error: f64,
    /// `L^{-3} Σ |f̄ g| se(p)`: the standard error when the per-point
    /// errors are fully correlated, an upper bound otherwise.
    pub weak_error_se: f64,
    pub sup_error: f64,
    /// Standard error of `μ` at the point attaining `sup_error`.
    pub sup_error_se: f64,
}

pub fn compare_fields(
    mu: &ScalarField,
    kinetic: &ScalarField,
    mu_se: Option<&ScalarField>,
    f: TestFunction,
    g: TestFunction,
) -> Result<ComparisonReport> {
    let grid = mu.grid();
    if kinetic.grid() != grid {
        return Err(Error::GridMismatch(format!(
            "micro file has L = {}, kinetic file has L = {}",
            grid.side(),
            kinetic.grid().side()
        )));
    }
    if let Some(se) = mu_se {
        se.ensure_same_grid(mu)?;
    }
    let w = f.field(grid)?.zip_with(&g.field(grid)?, |a, b| a * b);
    let micro_weak = w.inner(mu);
    let kinetic_weak = w.inner(kinetic);
    let diff = mu.zip_with(kinetic, |a, b| a - b);
    let weak_error = w.inner(&diff).abs();
    let weak_error_se = mu_se.map_or(0.0, |se| w.map(f64::abs).inner(se));
    let (arg, sup_error) = diff
        .values()
        .iter()
        .map(|d| d.abs())
        .enumerate()
        .fold((0, 0.0), |acc, (i, d)| if d > acc.1 { (i, d) } else { acc });
    Ok(ComparisonReport {
        micro_weak,
        kinetic_weak,
        weak_error,
        weak_error_se,
        sup_error,
        sup_error_se: mu_se.map_or(0.0, |se| se[arg]),
    })
}

/// Compares two field CSV files; `micro_se_csv` holds the standard error
/// of the micro file in the same schema.
pub fn compare(
    micro_csv: &Path,
    kinetic_csv: &Path,
    f: TestFunction,
    g: TestFunction,
    micro_se_csv: Option<&Path>,
) -> Result<ComparisonReport> {
    let mu = read_field_csv(micro_csv)?;
    let kinetic = read_field_csv(kinetic_csv)?;
    let se = micro_se_csv.map(read_field_csv).transpose()?;
    compare_fields(&mu, &kinetic, se.as_ref(), f, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_grid;

    #[test]
    fn identical_and_shifted_inputs() {
        let g = make_grid(4).unwrap();
        let mu = ScalarField::from_fn(g, |p| 0.2 + 0.01 * p as f64 / 64.0);
        let r = compare_fields(&mu, &mu, None, TestFunction::Cos(0), TestFunction::Energy).unwrap();
        assert_eq!((r.weak_error, r.sup_error), (0.0, 0.0));
        let shifted = mu.map(|v| v + 0.125);
        let r = compare_fields(&mu, &shifted, None, TestFunction::One, TestFunction::One).unwrap();
        assert!((r.weak_error - 0.125).abs() < 1e-15);
        assert!((r.sup_error - 0.125).abs() < 1e-15);
        let other = ScalarField::constant(make_grid(2).unwrap(), 0.0);
        assert!(compare_fields(&mu, &other, None, TestFunction::One, TestFunction::One).is_err());
    }
}
