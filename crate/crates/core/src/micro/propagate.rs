//! Strang split-step propagation of momentum basis columns.
//!
//! Columns are stored as `φ^{(p)} = L^{-3/2} ψ^{(p)}`, i.e. with unit plain
//! `ℓ²` norm and `φ^{(p)}(0) = e_p`. Then `μ(q) = Σ_p J(p)|φ^{(p)}_q|²`
//! without a normalization factor, and `t = 0` reproduces `J` bit-exactly.
//!
//! One step is
//! `φ ← M_s · F · P · F⁻¹ · M_s · φ` with `M_s = e^{-i(dt/2)(E - λκ_s)}`
//! and `P = e^{-i dt η ω}`; the `L^{-3}` of the inverse transform is folded
//! into `P`.

use num_complex::Complex64;

use super::selfconsistent::KappaTrajectory;
use super::EvolutionConfig;
use crate::disorder::DisorderField;
use crate::error::{Error, Result};
use crate::lattice::{dispersion, Fft3, FftWork, GridSpec, ScalarField};
use crate::reduce::{add_assign, tree_reduce};

/// Columns advanced together through one batched transform.
pub const COLUMN_BATCH: usize = 32;

/// A set of evolving columns `φ^{(p)}` for one disorder sample.
#[derive(Clone, Debug)]
pub struct PropagatorColumns {
    grid: GridSpec,
    sample_index: u64,
    momenta: Vec<usize>,
    data: Vec<Complex64>,
}

impl PropagatorColumns {
    /// Columns `e_p` for the given initial momenta.
    pub fn basis(grid: GridSpec, sample_index: u64, momenta: Vec<usize>) -> Result<Self> {
        let n = grid.len();
        if let Some(&bad) = momenta.iter().find(|&&p| p >= n) {
            return Err(Error::invalid("momenta", format!("index {bad} outside grid of {n} points")));
        }
        let mut data = vec![Complex64::new(0.0, 0.0); n * momenta.len()];
        for (j, &p) in momenta.iter().enumerate() {
            data[j * n + p] = Complex64::new(1.0, 0.0);
        }
        Ok(PropagatorColumns {
            grid,
            sample_index,
            momenta,
            data,
        })
    }

    /// All `L³` columns; the identity propagator.
    pub fn identity(grid: GridSpec, sample_index: u64) -> Self {
        Self::basis(grid, sample_index, (0..grid.len()).collect()).expect("indices in range")
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn sample_index(&self) -> u64 {
        self.sample_index
    }

    pub fn momenta(&self) -> &[usize] {
        &self.momenta
    }

    pub fn len(&self) -> usize {
        self.momenta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.momenta.is_empty()
    }

    /// `⟨e_q, U e_p⟩` for the `j`-th column, over `q`.
    pub fn column(&self, j: usize) -> &[Complex64] {
        let n = self.grid.len();
        &self.data[j * n..(j + 1) * n]
    }

    /// `L^{-3} Σ_q |ψ_q|²` of column `j`; 1 for a unitary evolution.
    pub fn norm_sqr(&self, j: usize) -> f64 {
        self.column(j).iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_norm_drift(&self) -> f64 {
        (0..self.len()).map(|j| (self.norm_sqr(j) - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Per-sample step data shared by all columns.
pub struct SplitStepper {
    grid: GridSpec,
    fft: Fft3,
    energy: Vec<f64>,
    position_phase: Vec<Complex64>,
    dt: f64,
}

impl SplitStepper {
    pub fn new(omega: &DisorderField, eta: f64, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
        }
        if !eta.is_finite() {
            return Err(Error::invalid("eta", "must be finite"));
        }
        let grid = omega.grid();
        let scale = 1.0 / grid.len() as f64;
        let position_phase = omega
            .omega()
            .values()
            .iter()
            .map(|&w| Complex64::from_polar(scale, -dt * eta * w))
            .collect();
        Ok(SplitStepper {
            grid,
            fft: Fft3::new(grid),
            energy: dispersion(grid).into_values(),
            position_phase,
            dt,
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn workspace(&self) -> FftWork {
        self.fft.workspace()
    }

    /// `e^{-i(dt/2)(E - λκ)}`; `κ` is ignored when `λ = 0`.
    pub fn half_phase(&self, kappa: Option<&ScalarField>, lambda: f64) -> Vec<Complex64> {
        let h = 0.5 * self.dt;
        match kappa {
            Some(k) if lambda != 0.0 => self
                .energy
                .iter()
                .zip(k.values())
                .map(|(&e, &kv)| Complex64::from_polar(1.0, -h * (e - lambda * kv)))
                .collect(),
            _ => self.energy.iter().map(|&e| Complex64::from_polar(1.0, -h * e)).collect(),
        }
    }

    /// Advances every field in `buf` (a whole number of fields) by one step.
    pub fn step(&self, buf: &mut [Complex64], half: &[Complex64], work: &mut FftWork) {
        let n = self.grid.len();
        for col in buf.chunks_exact_mut(n) {
            for (z, h) in col.iter_mut().zip(half) {
                *z *= h;
            }
        }
        self.fft.inverse_unnormalized(buf, work);
        for col in buf.chunks_exact_mut(n) {
            for (z, p) in col.iter_mut().zip(&self.position_phase) {
                *z *= p;
            }
        }
        self.fft.forward(buf, work);
        for col in buf.chunks_exact_mut(n) {
            for (z, h) in col.iter_mut().zip(half) {
                *z *= h;
            }
        }
    }

    pub fn step_columns(
        &self,
        columns: &mut PropagatorColumns,
        half: &[Complex64],
        work: &mut FftWork,
    ) -> Result<()> {
        if columns.grid != self.grid {
            return Err(Error::GridMismatch(format!(
                "columns on L = {}, stepper on L = {}",
                columns.grid.side(),
                self.grid.side()
            )));
        }
        self.step(&mut columns.data, half, work);
        Ok(())
    }
}

/// One Strang step of all `columns` with a frozen `κ`.
pub fn step_split(
    columns: &mut PropagatorColumns,
    kappa: &ScalarField,
    omega: &DisorderField,
    eta: f64,
    lambda: f64,
    dt: f64,
) -> Result<()> {
    if kappa.grid() != columns.grid() || omega.grid() != columns.grid() {
        return Err(Error::GridMismatch("columns, kappa and disorder must share a grid".into()));
    }
    let stepper = SplitStepper::new(omega, eta, dt)?;
    let half = stepper.half_phase(Some(kappa), lambda);
    let mut work = stepper.workspace();
    stepper.step_columns(columns, &half, &mut work)
}

/// Single-sample occupation at a list of recorded steps.
#[derive(Clone, Debug)]
pub struct SampleEvolution {
    pub steps: Vec<usize>,
    pub mu: Vec<ScalarField>,
}

/// Flat `record.len() × L³` buffer with `Σ_p J(p)|φ^{(p)}_q(s)|²` for every
/// recorded step `s` (strictly increasing, `≤ horizon`).
pub(crate) fn sample_occupation_raw(
    j: &ScalarField,
    omega: &DisorderField,
    kappa: &KappaTrajectory,
    cfg: &EvolutionConfig,
    record: &[usize],
) -> Result<Vec<f64>> {
    let grid = j.grid();
    let n = grid.len();
    if omega.grid() != grid || kappa.grid() != grid {
        return Err(Error::GridMismatch("J, disorder and kappa trajectory must share a grid".into()));
    }
    let steps = record.last().copied().unwrap_or(0);
    if cfg.lambda != 0.0 && kappa.len() < steps {
        return Err(Error::invalid(
            "kappa_traj",
            format!("covers {} steps, horizon needs {steps}", kappa.len()),
        ));
    }
    if kappa.len() > 0 && kappa.dt() != cfg.dt {
        return Err(Error::invalid("kappa_traj", "step size differs from the evolution config"));
    }
    let stepper = SplitStepper::new(omega, cfg.eta, cfg.dt)?;
    let active: Vec<usize> = (0..n).filter(|&p| j[p] != 0.0).collect();
    let n_blocks = active.len().div_ceil(COLUMN_BATCH);

    let leaf = |blocks: std::ops::Range<usize>| -> Vec<f64> {
        let mut acc = vec![0.0; record.len() * n];
        let mut work = stepper.workspace();
        let mut buf = Vec::new();
        for b in blocks {
            let cols = &active[b * COLUMN_BATCH..((b + 1) * COLUMN_BATCH).min(active.len())];
            buf.clear();
            buf.resize(cols.len() * n, Complex64::new(0.0, 0.0));
            for (k, &p) in cols.iter().enumerate() {
                buf[k * n + p] = Complex64::new(1.0, 0.0);
            }
            let mut next = 0;
            let deposit = |buf: &[Complex64], slot: usize, acc: &mut [f64]| {
                let row = &mut acc[slot * n..(slot + 1) * n];
                for (k, &p) in cols.iter().enumerate() {
                    let w = j[p];
                    for (a, z) in row.iter_mut().zip(&buf[k * n..(k + 1) * n]) {
                        *a += w * z.norm_sqr();
                    }
                }
            };
            while next < record.len() && record[next] == 0 {
                deposit(&buf, next, &mut acc);
                next += 1;
            }
            for s in 0..steps {
                let half = stepper.half_phase(kappa.fields().get(s), cfg.lambda);
                stepper.step(&mut buf, &half, &mut work);
                while next < record.len() && record[next] == s + 1 {
                    deposit(&buf, next, &mut acc);
                    next += 1;
                }
            }
        }
        acc
    };
    let combine = |mut a: Vec<f64>, b: Vec<f64>| {
        add_assign(&mut a, &b);
        a
    };
    Ok(tree_reduce(n_blocks, 1, &leaf, &combine).unwrap_or_else(|| vec![0.0; record.len() * n]))
}

/// `μ^{(ω)}_t(q) = L^{-3} Σ_p J(p)|ψ^{(p)}_q(t)|²` at every checkpoint of `cfg`.
pub fn evolve_sample(
    j: &ScalarField,
    omega: &DisorderField,
    kappa: &KappaTrajectory,
    cfg: &EvolutionConfig,
) -> Result<SampleEvolution> {
    cfg.validate()?;
    let mut steps: Vec<usize> = cfg.checkpoint_records().iter().map(|c| c.step).collect();
    let order = sorted_unique(&mut steps);
    let raw = sample_occupation_raw(j, omega, kappa, cfg, &order)?;
    let n = j.grid().len();
    let mu = steps
        .iter()
        .map(|s| {
            let slot = order.binary_search(s).expect("step recorded");
            ScalarField::from_raw(j.grid(), raw[slot * n..(slot + 1) * n].to_vec())
        })
        .collect();
    Ok(SampleEvolution { steps, mu })
}

pub(crate) fn sorted_unique(steps: &mut [usize]) -> Vec<usize> {
    let mut order = steps.to_vec();
    order.sort_unstable();
    order.dedup();
    order
}
