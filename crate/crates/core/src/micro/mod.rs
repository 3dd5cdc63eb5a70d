//! Self-consistent one-particle random Schrödinger dynamics.
//!
//! For each disorder sample all `L³` momentum basis columns `ψ^{(p)}` are
//! propagated with a Strang split step of
//! `H = E(p) - λκ_s(p) + η ω_x`, and the sample occupation is
//! `μ^{(ω)}_t(q) = L^{-3} Σ_p J(p) |ψ^{(p)}_q(t)|²`. The exchange source
//! `κ_s = v̂ ∗ μ_s` is held fixed during one ensemble pass and updated by an
//! outer Picard loop.

pub mod experiments;
pub mod initial;
pub mod propagate;
pub mod selfconsistent;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use experiments::{
    kinetic_scaling_experiment, stationarity_experiment, ComparisonRow, ComparisonTable, KineticScalingSpec, RowFields,
    StationaritySpec, TestFunction, WeakError,
};
pub use initial::{initial_occupation, occupation_from_energy, InitialOccupation};
pub use propagate::{evolve_sample, step_split, PropagatorColumns, SampleEvolution, SplitStepper};
pub use selfconsistent::{self_consistent_evolve, KappaTrajectory, OccupationTrajectory, PicardReport, SelfConsistentRun};

/// Largest admissible microscopic step.
pub const MAX_DT: f64 = 0.05;

/// Relation between the macroscopic time `T` and the microscopic time `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    /// `t = T / η²`
    Eta2,
    /// `t = T / λ`
    Lambda,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub eta: f64,
    pub lambda: f64,
    pub t_macro: f64,
    pub scaling: Scaling,
    pub dt: f64,
    pub n_samples: usize,
    /// Macroscopic checkpoint times; empty means `[T]`.
    pub checkpoints: Vec<f64>,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub seed: u64,
    /// Refuse runs needing more microscopic steps than this.
    pub max_steps: usize,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            eta: 0.5,
            lambda: 0.0,
            t_macro: 0.5,
            scaling: Scaling::Eta2,
            dt: MAX_DT,
            n_samples: 1,
            checkpoints: Vec::new(),
            picard_tol: 1e-4,
            picard_max_iter: 20,
            seed: 0,
            max_steps: 100_000,
        }
    }
}

/// A requested checkpoint and the step it was rounded to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRecord {
    pub requested: f64,
    pub step: usize,
    /// Macroscopic time actually reached, `step · dt / scale`.
    pub actual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Horizon {
    pub t_micro_requested: f64,
    pub steps: usize,
    pub t_micro: f64,
    pub t_macro: f64,
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::invalid("eta", format!("must be finite and >= 0, got {}", self.eta)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid("lambda", format!("must be finite and >= 0, got {}", self.lambda)));
        }
        if !(self.t_macro >= 0.0 && self.t_macro.is_finite()) {
            return Err(Error::invalid("T", format!("must be finite and >= 0, got {}", self.t_macro)));
        }
        if !(self.dt > 0.0 && self.dt <= MAX_DT) {
            return Err(Error::invalid("dt", format!("must satisfy 0 < dt <= {MAX_DT}, got {}", self.dt)));
        }
        if self.n_samples == 0 {
            return Err(Error::invalid("n_samples", "must be >= 1"));
        }
        if self.picard_max_iter == 0 {
            return Err(Error::invalid("picard_max_iter", "must be >= 1"));
        }
        if !(self.picard_tol > 0.0) {
            return Err(Error::invalid("picard_tol", "must be > 0"));
        }
        match self.scaling {
            Scaling::Eta2 if self.eta == 0.0 && self.t_macro > 0.0 => {
                return Err(Error::invalid("eta", "eta2 scaling needs eta > 0"));
            }
            Scaling::Lambda if self.lambda == 0.0 && self.t_macro > 0.0 => {
                return Err(Error::invalid("lambda", "lambda scaling needs lambda > 0"));
            }
            _ => {}
        }
        for &c in &self.checkpoints {
            if !(c >= 0.0 && c <= self.t_macro) {
                return Err(Error::invalid("checkpoints", format!("{c} outside [0, T = {}]", self.t_macro)));
            }
        }
        let h = self.horizon();
        if h.steps > self.max_steps {
            return Err(Error::invalid(
                "max_steps",
                format!("horizon needs {} steps, budget is {}", h.steps, self.max_steps),
            ));
        }
        Ok(())
    }

    /// Microscopic time per unit of macroscopic time.
    pub fn time_scale(&self) -> f64 {
        match self.scaling {
            Scaling::Eta2 => 1.0 / (self.eta * self.eta),
            Scaling::Lambda => 1.0 / self.lambda,
        }
    }

    fn micro_time(&self, t_macro: f64) -> f64 {
        if t_macro == 0.0 {
            0.0
        } else {
            t_macro * self.time_scale()
        }
    }

    /// Rounded microscopic horizon.
    pub fn horizon(&self) -> Horizon {
        let t = self.micro_time(self.t_macro);
        let steps = (t / self.dt).round() as usize;
        let t_micro = steps as f64 * self.dt;
        Horizon {
            t_micro_requested: t,
            steps,
            t_micro,
            t_macro: if steps == 0 { 0.0 } else { t_micro / self.time_scale() },
        }
    }

    pub fn checkpoint_records(&self) -> Vec<CheckpointRecord> {
        let steps = self.horizon().steps;
        let list: Vec<f64> = if self.checkpoints.is_empty() {
            vec![self.t_macro]
        } else {
            self.checkpoints.clone()
        };
        list.into_iter()
            .map(|c| {
                let step = ((self.micro_time(c) / self.dt).round() as usize).min(steps);
                let actual = if step == 0 { 0.0 } else { step as f64 * self.dt / self.time_scale() };
                CheckpointRecord {
                    requested: c,
                    step,
                    actual,
                }
            })
            .collect()
    }
}
