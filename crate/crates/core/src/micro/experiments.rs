//! Scaling experiments comparing the microscopic ensemble against the
//! kinetic prediction.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{self_consistent_evolve, EvolutionConfig, Scaling};
use crate::error::{Error, Result};
use crate::kinetic::{solve_explicit, ShellOperator};
use crate::lattice::{dispersion, GridSpec, PairPotential, ScalarField};

/// Smooth real test functions for weak observables `L^{-3} Σ_p f̄ g μ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    One,
    /// `cos(2π p_axis)`
    Cos(usize),
    /// `E(p)`
    Energy,
}

impl TestFunction {
    pub fn field(&self, grid: GridSpec) -> Result<ScalarField> {
        Ok(match *self {
            TestFunction::One => ScalarField::constant(grid, 1.0),
            TestFunction::Cos(axis) => {
                if axis > 2 {
                    return Err(Error::invalid("test_function", format!("axis {axis} > 2")));
                }
                let c = grid.cos_table();
                ScalarField::from_fn(grid, |p| c[grid.coords(p)[axis]])
            }
            TestFunction::Energy => dispersion(grid),
        })
    }

    pub fn label(&self) -> String {
        match self {
            TestFunction::One => "one".into(),
            TestFunction::Cos(a) => format!("cos{}", a + 1),
            TestFunction::Energy => "energy".into(),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "one" | "1" => Some(TestFunction::One),
            "cos1" => Some(TestFunction::Cos(0)),
            "cos2" => Some(TestFunction::Cos(1)),
            "cos3" => Some(TestFunction::Cos(2)),
            "energy" => Some(TestFunction::Energy),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakError {
    pub pair: String,
    pub micro: f64,
    pub micro_se: f64,
    pub kinetic: f64,
    /// `|micro - kinetic|`
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub eta: f64,
    pub lambda: f64,
    pub steps: usize,
    /// Macroscopic time actually reached after rounding to whole steps.
    pub t_macro: f64,
    pub weak: Vec<WeakError>,
    /// `‖μ - reference‖_∞`; the kinetic solution or the initial state.
    pub sup_error: f64,
    pub sup_error_se: f64,
    /// `‖reference‖_∞`
    pub reference_sup: f64,
    pub picard_iterations: usize,
    pub picard_residual: f64,
    pub converged: bool,
    pub in_regime: bool,
    pub label: String,
    /// Wall-clock seconds; excluded from CSV output so reruns compare equal.
    pub runtime_s: f64,
}

/// Fields behind one row: the ensemble mean, its standard error and the
/// reference it was compared with.
#[derive(Clone, Debug, PartialEq)]
pub struct RowFields {
    pub mu: ScalarField,
    pub mu_se: ScalarField,
    pub reference: ScalarField,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub experiment: String,
    pub rows: Vec<ComparisonRow>,
    #[serde(skip)]
    pub fields: Vec<RowFields>,
}

impl ComparisonTable {
    /// Whether the weak error of pair `k` drops across consecutive rows by
    /// more than the combined standard error.
    pub fn weak_error_decreasing(&self, k: usize) -> bool {
        self.rows.windows(2).all(|w| {
            let (a, b) = (&w[0].weak[k], &w[1].weak[k]);
            a.error - b.error > a.micro_se.hypot(b.micro_se)
        })
    }

    /// Whether the sup error drops across consecutive rows.
    pub fn sup_error_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].sup_error < w[0].sup_error)
    }

    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KineticScalingSpec {
    /// Shared settings; `eta`, `lambda`, `scaling` and `checkpoints` are
    /// overridden per row.
    pub base: EvolutionConfig,
    pub etas: Vec<f64>,
    /// `λ = c · η²`
    pub lambda_coeff: f64,
    /// Energy bin width of the kinetic prediction.
    pub delta: f64,
    pub pairs: Vec<(TestFunction, TestFunction)>,
}

/// Runs the ensemble to `t = T/η²` for each `η` and compares with the
/// binned kinetic flow at the rounded macroscopic time.
pub fn kinetic_scaling_experiment(
    spec: &KineticScalingSpec,
    j: &ScalarField,
    potential: &PairPotential,
) -> Result<ComparisonTable> {
    if !(spec.lambda_coeff >= 0.0 && spec.lambda_coeff <= 1.0) {
        return Err(Error::invalid("lambda_coeff", format!("must lie in [0, 1], got {}", spec.lambda_coeff)));
    }
    if spec.etas.is_empty() {
        return Err(Error::invalid("eta_list", "must not be empty"));
    }
    let grid = j.grid();
    let shells = ShellOperator::from_dispersion(&dispersion(grid), spec.delta)?;
    let pairs: Vec<(String, ScalarField)> = spec
        .pairs
        .iter()
        .map(|(f, g)| Ok((format!("{}*{}", f.label(), g.label()), f.field(grid)?.zip_with(&g.field(grid)?, |a, b| a * b))))
        .collect::<Result<_>>()?;
    let configs: Vec<EvolutionConfig> = spec
        .etas
        .iter()
        .map(|&eta| EvolutionConfig {
            eta,
            lambda: spec.lambda_coeff * eta * eta,
            scaling: Scaling::Eta2,
            checkpoints: vec![spec.base.t_macro],
            ..spec.base.clone()
        })
        .collect();
    // fail on any budget violation before spending time on earlier rows
    for c in &configs {
        c.validate()?;
    }

    let mut rows = Vec::with_capacity(configs.len());
    let mut fields = Vec::with_capacity(configs.len());
    for cfg in configs {
        let start = Instant::now();
        let run = self_consistent_evolve(j, &cfg, potential)?;
        let t_eff = run.trajectory.checkpoints[0].actual;
        let kinetic = solve_explicit(j, t_eff, &shells)?.f;
        let weak = pairs
            .iter()
            .map(|(label, w)| {
                let (micro, micro_se) = run.trajectory.weak_observable(0, w)?;
                let k = w.inner(&kinetic);
                Ok(WeakError {
                    pair: label.clone(),
                    micro,
                    micro_se,
                    kinetic: k,
                    error: (micro - k).abs(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let (sup_error, sup_error_se) = run.trajectory.sup_deviation(0, &kinetic)?;
        rows.push(ComparisonRow {
            eta: cfg.eta,
            lambda: cfg.lambda,
            steps: run.horizon.steps,
            t_macro: t_eff,
            weak,
            sup_error,
            sup_error_se,
            reference_sup: kinetic.sup_norm(),
            picard_iterations: run.picard.iterations,
            picard_residual: run.picard.final_residual,
            converged: run.picard.converged,
            in_regime: true,
            label: if run.picard.converged { "ok".into() } else { "picard not converged".into() },
            runtime_s: start.elapsed().as_secs_f64(),
        });
        fields.push(RowFields {
            mu: run.trajectory.mu[0].clone(),
            mu_se: run.trajectory.std_error[0].clone(),
            reference: kinetic,
        });
    }
    Ok(ComparisonTable {
        experiment: "kinetic_scaling".into(),
        rows,
        fields,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaritySpec {
    pub base: EvolutionConfig,
    pub lambdas: Vec<f64>,
    /// `η(λ) = λ^{(1+δ)/2}`; requires `δ > 0`.
    pub delta_exp: f64,
    /// Extra `(λ, η)` rows with a hand-picked disorder strength.
    pub control_rows: Vec<(f64, f64)>,
}

/// Runs to `t = T/λ` and reports `‖μ_t - μ_0‖_∞`. A row is in regime when
/// `η² ≤ λ^{1+δ}`.
pub fn stationarity_experiment(
    spec: &StationaritySpec,
    j: &ScalarField,
    potential: &PairPotential,
) -> Result<ComparisonTable> {
    if !(spec.delta_exp > 0.0) {
        return Err(Error::invalid("delta", format!("must be > 0, got {}", spec.delta_exp)));
    }
    let mut plan: Vec<(f64, f64)> = spec
        .lambdas
        .iter()
        .map(|&l| (l, l.powf(0.5 * (1.0 + spec.delta_exp))))
        .collect();
    plan.extend(spec.control_rows.iter().copied());
    if plan.is_empty() {
        return Err(Error::invalid("lambda_list", "must not be empty"));
    }
    let configs: Vec<EvolutionConfig> = plan
        .iter()
        .map(|&(lambda, eta)| EvolutionConfig {
            eta,
            lambda,
            scaling: Scaling::Lambda,
            checkpoints: vec![spec.base.t_macro],
            ..spec.base.clone()
        })
        .collect();
    for c in &configs {
        c.validate()?;
    }

    let mut rows = Vec::with_capacity(configs.len());
    let mut fields = Vec::with_capacity(configs.len());
    for cfg in configs {
        let start = Instant::now();
        let run = self_consistent_evolve(j, &cfg, potential)?;
        let (sup_error, sup_error_se) = run.trajectory.sup_deviation(0, j)?;
        let in_regime = cfg.eta * cfg.eta <= cfg.lambda.powf(1.0 + spec.delta_exp) * (1.0 + 1e-12);
        let label = match (in_regime, run.picard.converged) {
            (true, true) => "in regime",
            (false, true) => "out of regime",
            (true, false) => "in regime; picard not converged",
            (false, false) => "out of regime; picard not converged",
        };
        rows.push(ComparisonRow {
            eta: cfg.eta,
            lambda: cfg.lambda,
            steps: run.horizon.steps,
            t_macro: run.trajectory.checkpoints[0].actual,
            weak: Vec::new(),
            sup_error,
            sup_error_se,
            reference_sup: j.sup_norm(),
            picard_iterations: run.picard.iterations,
            picard_residual: run.picard.final_residual,
            converged: run.picard.converged,
            in_regime,
            label: label.into(),
            runtime_s: start.elapsed().as_secs_f64(),
        });
        fields.push(RowFields {
            mu: run.trajectory.mu[0].clone(),
            mu_se: run.trajectory.std_error[0].clone(),
            reference: j.clone(),
        });
    }
    Ok(ComparisonTable {
        experiment: "stationarity".into(),
        rows,
        fields,
    })
}
