use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{dispersion, GridSpec, ScalarField};

/// Translation-invariant initial two-point function `J(p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialOccupation {
    /// `1 / (1 + e^{β(E(p) - μ)})`; `β = ∞` gives the step `χ[E(p) < μ]`.
    FermiDirac { beta: f64, mu_chem: f64 },
    /// `offset + amplitude · cos(2π p₁)`.
    CosineBump { amplitude: f64, offset: f64 },
    Constant { value: f64 },
}

impl InitialOccupation {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InitialOccupation::FermiDirac { beta, mu_chem } => {
                if !(beta >= 0.0) {
                    return Err(Error::invalid("beta", format!("must be >= 0, got {beta}")));
                }
                if !mu_chem.is_finite() {
                    return Err(Error::invalid("mu_chem", "must be finite"));
                }
            }
            InitialOccupation::CosineBump { amplitude, offset } => {
                let (lo, hi) = (offset - amplitude.abs(), offset + amplitude.abs());
                if !(lo >= 0.0 && hi <= 1.0) {
                    return Err(Error::invalid(
                        "amplitude",
                        format!("cosine bump spans [{lo}, {hi}], outside [0, 1]"),
                    ));
                }
            }
            InitialOccupation::Constant { value } => {
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::invalid("value", format!("constant occupation {value} outside [0, 1]")));
                }
            }
        }
        Ok(())
    }
}

fn fermi(beta: f64, mu: f64, e: f64) -> f64 {
    if beta.is_infinite() {
        return if e < mu { 1.0 } else { 0.0 };
    }
    let x = beta * (e - mu);
    if x > 0.0 {
        let y = (-x).exp();
        y / (1.0 + y)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// `J(p)` for the given family, with `0 ≤ J ≤ 1`.
pub fn initial_occupation(kind: &InitialOccupation, grid: GridSpec) -> Result<ScalarField> {
    occupation_from_energy(kind, &dispersion(grid))
}

/// Same as [`initial_occupation`] but for an arbitrary dispersion field.
pub fn occupation_from_energy(kind: &InitialOccupation, energy: &ScalarField) -> Result<ScalarField> {
    kind.validate()?;
    let grid = energy.grid();
    Ok(match *kind {
        InitialOccupation::FermiDirac { beta, mu_chem } => energy.map(|e| fermi(beta, mu_chem, e)),
        InitialOccupation::CosineBump { amplitude, offset } => {
            let c = grid.cos_table();
            ScalarField::from_fn(grid, |p| {
                let phase = c[grid.coords(p)[0]];
                debug_assert!((phase - (2.0 * PI * grid.momentum(p)[0]).cos()).abs() < 1e-12);
                offset + amplitude * phase
            })
        }
        InitialOccupation::Constant { value } => ScalarField::constant(grid, value),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_grid;

    #[test]
    fn zero_temperature_limit_is_the_fermi_sea() {
        let g = make_grid(8).unwrap();
        let e = dispersion(g);
        let j = initial_occupation(&InitialOccupation::FermiDirac { beta: f64::INFINITY, mu_chem: 0.0 }, g).unwrap();
        for p in 0..g.len() {
            assert_eq!(j[p], if e[p] < 0.0 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn half_filling_at_zero_energy() {
        let g = make_grid(8).unwrap();
        let j = initial_occupation(&InitialOccupation::FermiDirac { beta: 1.0, mu_chem: 0.0 }, g).unwrap();
        assert_eq!(j[g.index_of_wavevector([2, 2, 2])], 0.5);
        assert!(j.min() >= 0.0 && j.max() <= 1.0);
        let hot = initial_occupation(&InitialOccupation::FermiDirac { beta: 0.0, mu_chem: 0.0 }, g).unwrap();
        assert!(hot.values().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn constant_and_bump() {
        let g = make_grid(4).unwrap();
        let c = initial_occupation(&InitialOccupation::Constant { value: 0.3 }, g).unwrap();
        assert!(c.values().iter().all(|&v| v == 0.3));
        let b = initial_occupation(&InitialOccupation::CosineBump { amplitude: 0.4, offset: 0.5 }, g).unwrap();
        assert!((b.max() - 0.9).abs() < 1e-15 && (b.min() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn rejects_values_outside_unit_interval() {
        let g = make_grid(4).unwrap();
        assert!(initial_occupation(&InitialOccupation::Constant { value: 1.2 }, g).is_err());
        assert!(initial_occupation(&InitialOccupation::CosineBump { amplitude: 0.6, offset: 0.5 }, g).is_err());
        assert!(initial_occupation(&InitialOccupation::FermiDirac { beta: -1.0, mu_chem: 0.0 }, g).is_err());
    }
}
