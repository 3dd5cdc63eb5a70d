//! Disorder ensembles and the outer Picard loop over `κ`-trajectories.

use serde::Serialize;

use super::propagate::{sample_occupation_raw, sorted_unique};
use super::{CheckpointRecord, EvolutionConfig, Horizon};
use crate::disorder::{sample_disorder, SeedSpec};
use crate::error::{Error, Result};
use crate::lattice::{GridSpec, PairPotential, ScalarField};
use crate::reduce::{add_assign, tree_reduce};

/// `κ_s = v̂ ∗ μ_s` at step resolution, piecewise constant on `[s·dt, (s+1)·dt)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KappaTrajectory {
    grid: GridSpec,
    dt: f64,
    fields: Vec<ScalarField>,
}

impl KappaTrajectory {
    pub fn new(grid: GridSpec, dt: f64, fields: Vec<ScalarField>) -> Result<Self> {
        if fields.iter().any(|f| f.grid() != grid) {
            return Err(Error::GridMismatch("kappa fields must share the trajectory grid".into()));
        }
        Ok(KappaTrajectory { grid, dt, fields })
    }

    /// The same field for each of `steps` steps.
    pub fn constant(kappa: ScalarField, steps: usize, dt: f64) -> Self {
        KappaTrajectory {
            grid: kappa.grid(),
            dt,
            fields: vec![kappa; steps],
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn fields(&self) -> &[ScalarField] {
        &self.fields
    }

    pub fn sup_norm(&self) -> f64 {
        self.fields.iter().map(|f| f.sup_norm()).fold(0.0, f64::max)
    }

    pub fn sup_distance(&self, other: &KappaTrajectory) -> f64 {
        self.fields
            .iter()
            .zip(&other.fields)
            .map(|(a, b)| a.sup_distance(b))
            .fold(0.0, f64::max)
    }
}

/// Disorder-averaged occupation at each checkpoint, with per-sample fields.
#[derive(Clone, Debug)]
pub struct OccupationTrajectory {
    pub grid: GridSpec,
    pub checkpoints: Vec<CheckpointRecord>,
    pub mu: Vec<ScalarField>,
    /// Monte Carlo standard error of `mu`; zero for a single sample.
    pub std_error: Vec<ScalarField>,
    pub n_samples: usize,
    /// `samples[c][i]`: sample `i` at checkpoint `c`.
    pub samples: Vec<Vec<ScalarField>>,
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

impl OccupationTrajectory {
    /// `L^{-3} Σ_p w(p) μ_t(p)` and its standard error over samples.
    pub fn weak_observable(&self, checkpoint: usize, weight: &ScalarField) -> Result<(f64, f64)> {
        let per: Vec<f64> = self.samples[checkpoint]
            .iter()
            .map(|m| weight.inner(m))
            .collect::<Vec<_>>();
        weight.ensure_same_grid(&self.mu[checkpoint])?;
        Ok(mean_and_se(&per))
    }

    /// `‖μ_t - reference‖_∞`, and the standard error at the maximizing point.
    pub fn sup_deviation(&self, checkpoint: usize, reference: &ScalarField) -> Result<(f64, f64)> {
        let mu = &self.mu[checkpoint];
        mu.ensure_same_grid(reference)?;
        let (arg, dev) = mu
            .values()
            .iter()
            .zip(reference.values())
            .map(|(a, b)| (a - b).abs())
            .enumerate()
            .fold((0, 0.0), |acc, (i, d)| if d > acc.1 { (i, d) } else { acc });
        Ok((dev, self.std_error[checkpoint][arg]))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PicardReport {
    pub iterations: usize,
    /// `λ · sup_s ‖κ^{(k+1)}_s - κ^{(k)}_s‖_∞` after each pass.
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub final_residual: f64,
}

#[derive(Clone, Debug)]
pub struct SelfConsistentRun {
    pub trajectory: OccupationTrajectory,
    pub kappa: KappaTrajectory,
    pub picard: PicardReport,
    pub horizon: Horizon,
}

struct EnsemblePass {
    /// Sum over samples of the flat recorded-step buffers.
    step_sum: Vec<f64>,
    /// Per-sample flat buffers restricted to checkpoint slots.
    per_sample: Vec<Vec<f64>>,
}

fn ensemble_pass(
    j: &ScalarField,
    cfg: &EvolutionConfig,
    kappa: &KappaTrajectory,
    record: &[usize],
    checkpoint_slots: &[usize],
) -> Result<EnsemblePass> {
    let n = j.grid().len();
    let leaf = |range: std::ops::Range<usize>| -> Result<EnsemblePass> {
        let mut pass = EnsemblePass {
            step_sum: vec![0.0; record.len() * n],
            per_sample: Vec::new(),
        };
        for i in range {
            let omega = sample_disorder(j.grid(), SeedSpec::new(cfg.seed, i as u64));
            let raw = sample_occupation_raw(j, &omega, kappa, cfg, record)?;
            add_assign(&mut pass.step_sum, &raw);
            let mut mine = Vec::with_capacity(checkpoint_slots.len() * n);
            for &slot in checkpoint_slots {
                mine.extend_from_slice(&raw[slot * n..(slot + 1) * n]);
            }
            pass.per_sample.push(mine);
        }
        Ok(pass)
    };
    let combine = |a: Result<EnsemblePass>, b: Result<EnsemblePass>| {
        let (mut a, b) = (a?, b?);
        add_assign(&mut a.step_sum, &b.step_sum);
        a.per_sample.extend(b.per_sample);
        Ok(a)
    };
    tree_reduce(cfg.n_samples, 1, &leaf, &combine).expect("n_samples >= 1")
}

/// Evolves the ensemble with an outer Picard loop on `κ`.
///
/// Iteration 0 freezes `κ_s ≡ v̂ ∗ J`. Each pass evolves every sample with
/// the stored trajectory and sets `κ^{(k+1)}_s = v̂ ∗ μ^{(k)}_s`. The loop
/// stops once `λ · sup_s ‖κ^{(k+1)}_s - κ^{(k)}_s‖_∞ < picard_tol`; the
/// returned occupations are those of the last pass. Hitting
/// `picard_max_iter` is reported, not raised.
pub fn self_consistent_evolve(
    j: &ScalarField,
    cfg: &EvolutionConfig,
    potential: &PairPotential,
) -> Result<SelfConsistentRun> {
    cfg.validate()?;
    j.ensure_same_grid(potential.vhat())?;
    if j.values().iter().any(|&v| !(-1e-12..=1.0 + 1e-12).contains(&v)) {
        return Err(Error::invalid("J", "initial occupation must lie in [0, 1]"));
    }
    let grid = j.grid();
    let n = grid.len();
    let horizon = cfg.horizon();
    let steps = horizon.steps;
    let checkpoints = cfg.checkpoint_records();
    let mut ck_steps: Vec<usize> = checkpoints.iter().map(|c| c.step).collect();

    let interacting = cfg.lambda != 0.0;
    let record: Vec<usize> = if interacting {
        let mut all: Vec<usize> = (0..=steps).collect();
        all.extend(ck_steps.iter().copied());
        sorted_unique(&mut all)
    } else {
        sorted_unique(&mut ck_steps)
    };
    let slots: Vec<usize> = ck_steps
        .iter()
        .map(|s| record.binary_search(s).expect("checkpoint recorded"))
        .collect();

    let mut kappa = KappaTrajectory::constant(potential.kappa(j)?, steps, cfg.dt);
    let mut residuals = Vec::new();
    let mut converged = false;
    let inv = 1.0 / cfg.n_samples as f64;
    let mut pass;
    loop {
        pass = ensemble_pass(j, cfg, &kappa, &record, &slots)?;
        if !interacting {
            residuals.push(0.0);
            converged = true;
            break;
        }
        let mut next = Vec::with_capacity(steps);
        for s in 0..steps {
            let mean: Vec<f64> = pass.step_sum[s * n..(s + 1) * n].iter().map(|v| v * inv).collect();
            next.push(potential.kappa(&ScalarField::from_raw(grid, mean))?);
        }
        let next = KappaTrajectory::new(grid, cfg.dt, next)?;
        let r = cfg.lambda * next.sup_distance(&kappa);
        residuals.push(r);
        if r < cfg.picard_tol {
            converged = true;
            break;
        }
        if residuals.len() >= cfg.picard_max_iter {
            break;
        }
        kappa = next;
    }

    let mut mu = Vec::with_capacity(slots.len());
    let mut std_error = Vec::with_capacity(slots.len());
    let mut samples = Vec::with_capacity(slots.len());
    for c in 0..slots.len() {
        let fields: Vec<ScalarField> = pass
            .per_sample
            .iter()
            .map(|raw| ScalarField::from_raw(grid, raw[c * n..(c + 1) * n].to_vec()))
            .collect();
        let mut m = vec![0.0; n];
        let mut se = vec![0.0; n];
        let mut column = vec![0.0; fields.len()];
        for q in 0..n {
            for (x, f) in column.iter_mut().zip(&fields) {
                *x = f[q];
            }
            let (a, b) = mean_and_se(&column);
            m[q] = a;
            se[q] = b;
        }
        mu.push(ScalarField::from_raw(grid, m));
        std_error.push(ScalarField::from_raw(grid, se));
        samples.push(fields);
    }

    let final_residual = *residuals.last().expect("at least one pass");
    Ok(SelfConsistentRun {
        trajectory: OccupationTrajectory {
            grid,
            checkpoints,
            mu,
            std_error,
            n_samples: cfg.n_samples,
            samples,
        },
        kappa,
        picard: PicardReport {
            iterations: residuals.len(),
            residuals,
            converged,
            final_residual,
        },
        horizon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_grid;
    use crate::micro::{initial_occupation, InitialOccupation};

    fn bump_j(g: GridSpec) -> ScalarField {
        initial_occupation(&InitialOccupation::CosineBump { amplitude: 0.4, offset: 0.5 }, g).unwrap()
    }

    #[test]
    fn non_interacting_needs_one_pass() {
        let g = make_grid(4).unwrap();
        let cfg = EvolutionConfig {
            eta: 0.5,
            lambda: 0.0,
            t_macro: 0.25,
            n_samples: 3,
            checkpoints: vec![0.0, 0.25],
            ..Default::default()
        };
        let v = PairPotential::gaussian_bump(g, 1.0, 1.0, 1.0).unwrap();
        let j = bump_j(g);
        let run = self_consistent_evolve(&j, &cfg, &v).unwrap();
        assert_eq!(run.picard.iterations, 1);
        assert_eq!(run.picard.final_residual, 0.0);
        assert!(run.picard.converged);
        assert_eq!(run.trajectory.mu[0], j);
        let mu = &run.trajectory.mu[1];
        assert!((mu.mean() - j.mean()).abs() < 1e-10 * j.mean());
        assert!(mu.max() <= 1.0 + 1e-9 && mu.min() >= 0.0);
        for s in &run.trajectory.samples[1] {
            assert!((s.mean() - j.mean()).abs() < 1e-10 * j.mean());
        }
    }

    #[test]
    fn zero_disorder_is_stationary() {
        let g = make_grid(4).unwrap();
        let cfg = EvolutionConfig {
            eta: 0.0,
            lambda: 0.3,
            t_macro: 1.0,
            scaling: crate::micro::Scaling::Lambda,
            n_samples: 2,
            ..Default::default()
        };
        let v = PairPotential::gaussian_bump(g, 1.0, 1.0, 1.0).unwrap();
        let j = bump_j(g);
        let run = self_consistent_evolve(&j, &cfg, &v).unwrap();
        assert_eq!(run.picard.iterations, 1);
        assert!(run.trajectory.mu[0].sup_distance(&j) < 1e-13);
    }

    #[test]
    fn picard_contracts_with_smooth_potential() {
        let g = make_grid(4).unwrap();
        let cfg = EvolutionConfig {
            eta: 0.5,
            lambda: 0.25,
            t_macro: 0.5,
            n_samples: 2,
            picard_tol: 1e-8,
            ..Default::default()
        };
        let v = PairPotential::gaussian_bump(g, 2.0, 1.0, 1.0).unwrap();
        let run = self_consistent_evolve(&bump_j(g), &cfg, &v).unwrap();
        assert!(run.picard.converged, "{:?}", run.picard);
        for w in run.picard.residuals.windows(2) {
            assert!(w[1] < w[0], "{:?}", run.picard.residuals);
        }
    }

    #[test]
    fn thread_count_does_not_change_bits() {
        let g = make_grid(4).unwrap();
        let cfg = EvolutionConfig {
            eta: 0.5,
            lambda: 0.25,
            t_macro: 0.3,
            n_samples: 5,
            ..Default::default()
        };
        let v = PairPotential::gaussian_bump(g, 1.0, 1.0, 1.0).unwrap();
        let j = bump_j(g);
        let run = |t: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
            pool.install(|| self_consistent_evolve(&j, &cfg, &v).unwrap())
        };
        let (a, b) = (run(1), run(4));
        assert_eq!(a.trajectory.mu, b.trajectory.mu);
        assert_eq!(a.trajectory.std_error, b.trajectory.std_error);
    }
}
