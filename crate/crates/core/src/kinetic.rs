//! Linear Boltzmann equation `∂_T F = 2π ∫du δ(E(u) - E(p)) (F(u) - F(p))`
//! on the momentum grid.
//!
//! The level-set measure is discretized with disjoint uniform energy bins.
//! With `w_b` the fraction of grid points in bin `b` and `A` the bin-mean
//! projection, the collision operator becomes `Q[F] = m (A[F] - F)` where
//! `m(p) = 2π w_{b(p)} / Δ`. Because `A` is an exact projection commuting
//! with multiplication by `m`, the flow is `F_T = A[F_0] + e^{-Tm}(F_0 - A[F_0])`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{GridSpec, ScalarField};
use crate::micro::initial::{occupation_from_energy, InitialOccupation};
use crate::reduce::CompensatedSum;

/// Points closer than this fraction of a bin width to an edge are assigned to
/// the upper bin, so that shifted copies of a dispersion bin identically.
const EDGE_SNAP: f64 = 1e-9;

/// Uniform energy histogram `[e_min + bΔ, e_min + (b+1)Δ)` of a dispersion field.
#[derive(Clone, Debug)]
pub struct EnergyBinning {
    energy: ScalarField,
    delta: f64,
    e_min: f64,
    bin_of: Vec<u32>,
    counts: Vec<usize>,
    weights: Vec<f64>,
}

impl EnergyBinning {
    pub fn build(energy: &ScalarField, delta: f64) -> Result<Self> {
        let (e_min, e_max) = (energy.min(), energy.max());
        let range = e_max - e_min;
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::invalid("delta", format!("bin width must be > 0, got {delta}")));
        }
        if delta < range / 1e6 {
            return Err(Error::invalid(
                "delta",
                format!("bin width {delta} below band width / 1e6 = {}", range / 1e6),
            ));
        }
        let n_bins = ((range / delta + EDGE_SNAP).floor() as usize) + 1;
        let mut counts = vec![0usize; n_bins];
        let bin_of: Vec<u32> = energy
            .values()
            .iter()
            .map(|&e| {
                let b = (((e - e_min) / delta + EDGE_SNAP).floor() as usize).min(n_bins - 1);
                counts[b] += 1;
                b as u32
            })
            .collect();
        let n = energy.values().len() as f64;
        let weights = counts.iter().map(|&c| c as f64 / n).collect();
        Ok(EnergyBinning {
            energy: energy.clone(),
            delta,
            e_min,
            bin_of,
            counts,
            weights,
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.energy.grid()
    }

    pub fn energy(&self) -> &ScalarField {
        &self.energy
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    #[inline]
    pub fn bin_of(&self, p: usize) -> usize {
        self.bin_of[p] as usize
    }

    pub fn count(&self, b: usize) -> usize {
        self.counts[b]
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Fraction of grid points in bin `b`.
    pub fn weight(&self, b: usize) -> f64 {
        self.weights[b]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn edges(&self, b: usize) -> (f64, f64) {
        let lo = self.e_min + b as f64 * self.delta;
        (lo, lo + self.delta)
    }

    /// Bin containing energy `e`, if it lies in the covered range.
    pub fn bin_of_energy(&self, e: f64) -> Option<usize> {
        let x = (e - self.e_min) / self.delta + EDGE_SNAP;
        if x < 0.0 {
            return None;
        }
        let b = x.floor() as usize;
        (b < self.n_bins()).then_some(b)
    }

    /// Per-bin means of `f`, accumulated in grid order with compensation.
    /// Empty bins report 0.
    pub fn bin_means(&self, f: &ScalarField) -> Vec<f64> {
        let mut sums = vec![CompensatedSum::default(); self.n_bins()];
        for (p, &v) in f.values().iter().enumerate() {
            sums[self.bin_of(p)].add(v);
        }
        sums.iter()
            .zip(&self.counts)
            .map(|(s, &c)| if c == 0 { 0.0 } else { s.value() / c as f64 })
            .collect()
    }
}

/// Binned level-set measure together with the collision rate `m`.
pub fn build_binning(grid: GridSpec, energy: &ScalarField, delta: f64) -> Result<EnergyBinning> {
    if energy.grid() != grid {
        return Err(Error::GridMismatch("dispersion field is on a different grid".into()));
    }
    EnergyBinning::build(energy, delta)
}

/// `max(0.02, 4 · (max E - min E) / L)`.
pub fn default_bin_width(energy: &ScalarField) -> f64 {
    let band = energy.max() - energy.min();
    (4.0 * band / energy.grid().side() as f64).max(0.02)
}

#[derive(Clone, Debug)]
pub struct ShellOperator {
    binning: EnergyBinning,
    bin_rate: Vec<f64>,
    m: ScalarField,
}

impl ShellOperator {
    pub fn new(binning: EnergyBinning) -> Self {
        let bin_rate: Vec<f64> = binning
            .weights()
            .iter()
            .map(|w| 2.0 * std::f64::consts::PI * w / binning.delta())
            .collect();
        let grid = binning.grid();
        let m = ScalarField::from_fn(grid, |p| bin_rate[binning.bin_of(p)]);
        ShellOperator { binning, bin_rate, m }
    }

    pub fn from_dispersion(energy: &ScalarField, delta: f64) -> Result<Self> {
        Ok(Self::new(EnergyBinning::build(energy, delta)?))
    }

    pub fn binning(&self) -> &EnergyBinning {
        &self.binning
    }

    pub fn grid(&self) -> GridSpec {
        self.binning.grid()
    }

    /// Collision rate `m(p) = 2π w_{b(p)} / Δ`.
    pub fn rate(&self) -> &ScalarField {
        &self.m
    }

    pub fn bin_rate(&self, b: usize) -> f64 {
        self.bin_rate[b]
    }

    pub fn max_rate(&self) -> f64 {
        self.m.max()
    }

    fn check(&self, f: &ScalarField) -> Result<()> {
        if f.grid() != self.grid() {
            return Err(Error::GridMismatch(format!(
                "field on L = {}, shells on L = {}",
                f.grid().side(),
                self.grid().side()
            )));
        }
        Ok(())
    }

    /// Shell average `A[F]`.
    pub fn average(&self, f: &ScalarField) -> Result<ScalarField> {
        self.check(f)?;
        let means = self.binning.bin_means(f);
        Ok(ScalarField::from_fn(self.grid(), |p| means[self.binning.bin_of(p)]))
    }

    /// `Q[F] = m (A[F] - F)`.
    pub fn collision(&self, f: &ScalarField) -> Result<ScalarField> {
        let a = self.average(f)?;
        Ok(ScalarField::from_fn(self.grid(), |p| self.m[p] * (a[p] - f[p])))
    }
}

pub fn shell_average(f: &ScalarField, shells: &ShellOperator) -> Result<ScalarField> {
    shells.average(f)
}

pub fn collision_apply(f: &ScalarField, shells: &ShellOperator) -> Result<ScalarField> {
    shells.collision(f)
}

/// Distribution at macroscopic time `time`.
#[derive(Clone, Debug)]
pub struct KineticState {
    pub f: ScalarField,
    pub time: f64,
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid("T", format!("must be a finite time >= 0, got {t}")));
    }
    Ok(())
}

/// `F_T = e^{-Tm} F_0 + (1 - e^{-Tm}) A[F_0]`, which equals `F_0` bit-exactly
/// at `T = 0`.
pub fn solve_explicit(f0: &ScalarField, t: f64, shells: &ShellOperator) -> Result<KineticState> {
    check_time(t)?;
    let a = shells.average(f0)?;
    let m = shells.rate();
    let f = ScalarField::from_fn(f0.grid(), |p| {
        let decay = (-t * m[p]).exp();
        decay * f0[p] + (1.0 - decay) * a[p]
    });
    Ok(KineticState { f, time: t })
}

/// Classical RK4 for `∂_T F = Q[F]` with `ceil(T/dt)` equal steps.
pub fn solve_rk4(f0: &ScalarField, t: f64, dt: f64, shells: &ShellOperator) -> Result<KineticState> {
    check_time(t)?;
    let max_m = shells.max_rate();
    if !(dt > 0.0 && dt.is_finite()) || (max_m > 0.0 && dt > 0.1 / max_m) {
        return Err(Error::invalid(
            "dt",
            format!("RK4 step must satisfy 0 < dt <= 0.1 / max(m) = {}", 0.1 / max_m),
        ));
    }
    shells.average(f0)?;
    if t == 0.0 {
        return Ok(KineticState { f: f0.clone(), time: 0.0 });
    }
    let steps = (t / dt - 1e-9).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let n = f0.values().len();
    let mut f = f0.values().to_vec();
    let mut stage = vec![0.0; n];
    let q = |v: &[f64]| -> Result<Vec<f64>> {
        Ok(shells
            .collision(&ScalarField::from_raw(f0.grid(), v.to_vec()))?
            .into_values())
    };
    for _ in 0..steps {
        let k1 = q(&f)?;
        for i in 0..n {
            stage[i] = f[i] + 0.5 * h * k1[i];
        }
        let k2 = q(&stage)?;
        for i in 0..n {
            stage[i] = f[i] + 0.5 * h * k2[i];
        }
        let k3 = q(&stage)?;
        for i in 0..n {
            stage[i] = f[i] + h * k3[i];
        }
        let k4 = q(&stage)?;
        for i in 0..n {
            f[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(KineticState {
        f: ScalarField::from_raw(f0.grid(), f),
        time: t,
    })
}

/// Truncated Duhamel expansions of the Boltzmann flow.
#[derive(Clone, Debug)]
pub struct DuhamelSeries {
    /// `S_Q = Σ_{q≤Q} (T^q/q!) Q^q[F_0]` for `Q = 0..=Q_max`.
    pub partial_sums: Vec<ScalarField>,
    /// Gain-only terms `G_q = (T^q/q!) (mA)^q[F_0]`.
    pub gain_terms: Vec<ScalarField>,
    /// `e^{-Tm} Σ_q G_q`: loss exponential times the gain series.
    pub resummed: ScalarField,
    /// Upper bound on `‖F_T - S_{Q_max}‖_∞` from `‖Q‖_∞ ≤ 2 max(m)`.
    pub tail_bound: f64,
}

pub const MAX_SERIES_ORDER: usize = 60;

pub fn duhamel_series(
    f0: &ScalarField,
    t: f64,
    q_max: usize,
    shells: &ShellOperator,
) -> Result<DuhamelSeries> {
    check_time(t)?;
    if q_max > MAX_SERIES_ORDER {
        return Err(Error::invalid("Q_max", format!("must be <= {MAX_SERIES_ORDER}, got {q_max}")));
    }
    let x = 2.0 * t * shells.max_rate();
    if x > 700.0 {
        return Err(Error::Compute(format!(
            "series exponent 2·T·max(m) = {x} would overflow"
        )));
    }
    let grid = f0.grid();
    let m = shells.rate();

    let mut partial_sums = Vec::with_capacity(q_max + 1);
    let mut gain_terms = Vec::with_capacity(q_max + 1);

    let mut full = f0.clone();
    let mut gain = f0.clone();
    let mut sum = f0.clone();
    partial_sums.push(sum.clone());
    gain_terms.push(gain.clone());
    for q in 1..=q_max {
        let c = t / q as f64;
        full = shells.collision(&full)?.map(|v| c * v);
        let ag = shells.average(&gain)?;
        gain = ScalarField::from_fn(grid, |p| c * m[p] * ag[p]);
        sum = sum.zip_with(&full, |a, b| a + b);
        partial_sums.push(sum.clone());
        gain_terms.push(gain.clone());
    }

    let mut gain_total = vec![CompensatedSum::default(); grid.len()];
    for g in &gain_terms {
        for (acc, v) in gain_total.iter_mut().zip(g.values()) {
            acc.add(*v);
        }
    }
    let resummed = ScalarField::from_fn(grid, |p| (-t * m[p]).exp() * gain_total[p].value());

    let mut next = f0.sup_norm();
    for q in 1..=q_max + 1 {
        next *= x / q as f64;
    }
    let ratio = x / (q_max as f64 + 2.0);
    let tail_bound = if ratio < 1.0 { next / (1.0 - ratio) } else { f64::INFINITY };

    Ok(DuhamelSeries {
        partial_sums,
        gain_terms,
        resummed,
        tail_bound,
    })
}

#[derive(Clone, Debug)]
pub struct StationarityReport {
    /// `‖Q[F_FD]‖_∞`.
    pub residual: f64,
    /// `β · Δ · max(m)`.
    pub predictor: f64,
    /// `max_b max_{p∈b} |Q[F_FD](p)|` per bin.
    pub bin_residuals: Vec<f64>,
    pub max_rate: f64,
    pub pass: bool,
}

/// Residual of the Fermi–Dirac distribution under the binned collision operator.
pub fn fermi_dirac_stationarity(beta: f64, mu_chem: f64, shells: &ShellOperator) -> Result<StationarityReport> {
    if !(beta >= 0.0) {
        return Err(Error::invalid("beta", format!("must be >= 0, got {beta}")));
    }
    let energy = shells.binning().energy();
    let fd = occupation_from_energy(&InitialOccupation::FermiDirac { beta, mu_chem }, energy)?;
    let q = shells.collision(&fd)?;
    let binning = shells.binning();
    let mut bin_residuals = vec![0.0f64; binning.n_bins()];
    for (p, v) in q.values().iter().enumerate() {
        let b = binning.bin_of(p);
        bin_residuals[b] = bin_residuals[b].max(v.abs());
    }
    let residual = q.sup_norm();
    let max_rate = shells.max_rate();
    let predictor = beta * binning.delta() * max_rate;
    Ok(StationarityReport {
        residual,
        predictor,
        bin_residuals,
        max_rate,
        pass: residual <= predictor,
    })
}

/// `Σ(e; ν) = L^{-3} Σ_u 1 / (E(u) - e - iν)`.
pub fn self_energy(e: f64, nu: f64, energy: &ScalarField) -> Result<Complex64> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::invalid("nu", format!("must be > 0, got {nu}")));
    }
    let (mut re, mut im) = (CompensatedSum::default(), CompensatedSum::default());
    for &eu in energy.values() {
        let d = eu - e;
        let den = d * d + nu * nu;
        re.add(d / den);
        im.add(nu / den);
    }
    let n = energy.values().len() as f64;
    Ok(Complex64::new(re.value() / n, im.value() / n))
}

/// `2π ∫du g_w(E(u) - e)` with a normalized Gaussian `g_w`; a smooth cross-check
/// of the binned rate.
pub fn mollified_rate(e: f64, width: f64, energy: &ScalarField) -> Result<f64> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::invalid("width", format!("must be > 0, got {width}")));
    }
    let norm = 1.0 / (width * (2.0 * std::f64::consts::PI).sqrt());
    let mut acc = CompensatedSum::default();
    for &eu in energy.values() {
        let z = (eu - e) / width;
        acc.add(norm * (-0.5 * z * z).exp());
    }
    Ok(2.0 * std::f64::consts::PI * acc.value() / energy.values().len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{dispersion, make_grid};
    use rand::{Rng, SeedableRng};

    fn random_field(grid: GridSpec, seed: u64) -> ScalarField {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        ScalarField::from_fn(grid, |_| rng.gen::<f64>())
    }

    #[test]
    fn single_shell_when_bin_covers_band() {
        let g = make_grid(8).unwrap();
        let e = dispersion(g);
        let shells = ShellOperator::from_dispersion(&e, 12.0 + 1e-3).unwrap();
        assert_eq!(shells.binning().n_bins(), 1);
        assert_eq!(shells.binning().weight(0), 1.0);
        let expect = 2.0 * std::f64::consts::PI / (12.0 + 1e-3);
        assert!(shells.rate().values().iter().all(|&m| (m - expect).abs() < 1e-15));
    }

    #[test]
    fn two_site_grid_histogram() {
        let g = make_grid(2).unwrap();
        let e = dispersion(g);
        let b = build_binning(g, &e, 1.0).unwrap();
        let occupied: Vec<f64> = (0..b.n_bins())
            .filter(|&i| b.count(i) > 0)
            .map(|i| b.weight(i))
            .collect();
        assert_eq!(occupied, vec![0.125, 0.375, 0.375, 0.125]);
        assert_eq!(b.counts().iter().sum::<usize>(), g.len());
        for p in 0..g.len() {
            assert!(b.count(b.bin_of(p)) > 0);
        }
    }

    #[test]
    fn binning_preconditions() {
        let g = make_grid(4).unwrap();
        let e = dispersion(g);
        assert!(EnergyBinning::build(&e, 0.0).is_err());
        assert!(EnergyBinning::build(&e, -1.0).is_err());
        assert!(EnergyBinning::build(&e, 1e-7).is_err());
        assert!(EnergyBinning::build(&e, 12.0 / 1e6).is_ok());
        let other = ScalarField::constant(make_grid(6).unwrap(), 0.0);
        assert!(build_binning(g, &other, 0.5).is_err());
    }

    #[test]
    fn default_width_tracks_resolution() {
        let e = dispersion(make_grid(48).unwrap());
        assert!((default_bin_width(&e) - 1.0).abs() < 1e-12);
        let e = dispersion(make_grid(64).unwrap());
        assert!((default_bin_width(&e) - 0.75).abs() < 1e-12);
        let e = dispersion(make_grid(4).unwrap());
        assert!((default_bin_width(&e) - 12.0).abs() < 1e-12);
    }

    #[test]
    fn shifted_dispersion_bins_identically() {
        let g = make_grid(16).unwrap();
        let e = dispersion(g);
        let a = EnergyBinning::build(&e, 0.05).unwrap();
        for shift in [0.1234, -3.7, 1e-3] {
            let b = EnergyBinning::build(&e.map(|v| v - shift), 0.05).unwrap();
            for p in 0..g.len() {
                assert_eq!(a.bin_of(p), b.bin_of(p));
            }
        }
    }

    #[test]
    fn shell_average_properties() {
        let g = make_grid(8).unwrap();
        let e = dispersion(g);
        let shells = ShellOperator::from_dispersion(&e, 0.5).unwrap();
        let c = ScalarField::constant(g, 0.37);
        assert!(shells.average(&c).unwrap().sup_distance(&c) < 1e-15);
        let f = random_field(g, 5);
        let a = shells.average(&f).unwrap();
        let aa = shells.average(&a).unwrap();
        assert!(aa.sup_distance(&a) <= 1e-13);
        let ae = shells.average(&e).unwrap();
        assert!(ae.sup_distance(&e) <= 0.5);
    }

    #[test]
    fn collision_kills_shell_functions_and_conserves_mass() {
        let g = make_grid(8).unwrap();
        let e = dispersion(g);
        let shells = ShellOperator::from_dispersion(&e, 0.3).unwrap();
        let c = ScalarField::constant(g, 0.8);
        assert!(shells.collision(&c).unwrap().sup_norm() < 1e-15);
        let f = random_field(g, 9);
        let af = shells.average(&f).unwrap();
        assert!(shells.collision(&af).unwrap().sup_norm() <= 1e-13);
        assert!(shells.collision(&f).unwrap().mean().abs() <= 1e-12);
    }

    #[test]
    fn explicit_solution_limits() {
        let g = make_grid(8).unwrap();
        let e = dispersion(g);
        let shells = ShellOperator::from_dispersion(&e, 0.4).unwrap();
        let f0 = random_field(g, 21);
        let s0 = solve_explicit(&f0, 0.0, &shells).unwrap();
        assert_eq!(s0.f, f0);
        let a = shells.average(&f0).unwrap();
        let late = solve_explicit(&f0, 1e6, &shells).unwrap();
        assert!(late.f.sup_distance(&a) <= 1e-12);
        assert!(solve_explicit(&f0, -1.0, &shells).is_err());
    }

    #[test]
    fn rk4_rejects_large_steps() {
        let g = make_grid(8).unwrap();
        let shells = ShellOperator::from_dispersion(&dispersion(g), 0.2).unwrap();
        let f0 = ScalarField::constant(g, 0.5);
        let dt = 0.2 / shells.max_rate();
        assert!(matches!(
            solve_rk4(&f0, 1.0, dt, &shells),
            Err(Error::InvalidParameter { name: "dt", .. })
        ));
    }

    #[test]
    fn rk4_keeps_shell_functions() {
        let g = make_grid(8).unwrap();
        let e = dispersion(g);
        let shells = ShellOperator::from_dispersion(&e, 0.25).unwrap();
        let f0 = shells.average(&random_field(g, 2)).unwrap();
        let out = solve_rk4(&f0, 3.0, 0.01, &shells).unwrap();
        assert!(out.f.sup_distance(&f0) <= 1e-12);
    }

    #[test]
    fn duhamel_first_term_and_guards() {
        let g = make_grid(4).unwrap();
        let shells = ShellOperator::from_dispersion(&dispersion(g), 0.5).unwrap();
        let f0 = random_field(g, 4);
        let s = duhamel_series(&f0, 0.7, 5, &shells).unwrap();
        assert_eq!(s.partial_sums[0], f0);
        assert_eq!(s.gain_terms[0], f0);
        assert_eq!(s.partial_sums.len(), 6);
        assert!(duhamel_series(&f0, 0.7, 61, &shells).is_err());
        assert!(duhamel_series(&f0, 1e6, 10, &shells).is_err());
    }

    #[test]
    fn fermi_dirac_infinite_temperature_is_flat() {
        let g = make_grid(8).unwrap();
        let shells = ShellOperator::from_dispersion(&dispersion(g), 0.1).unwrap();
        let r = fermi_dirac_stationarity(0.0, 0.0, &shells).unwrap();
        assert_eq!(r.residual, 0.0);
        assert!(r.pass);
        assert!(fermi_dirac_stationarity(-1.0, 0.0, &shells).is_err());
    }

    #[test]
    fn zero_temperature_step_residual_is_confined_to_the_cut_bin() {
        let g = make_grid(16).unwrap();
        let e = dispersion(g);
        let delta = 0.25;
        let shells = ShellOperator::from_dispersion(&e, delta).unwrap();
        let binning = shells.binning();
        // chemical potential on a bin edge: the step is a shell function
        let (edge, _) = binning.edges(20);
        let r = fermi_dirac_stationarity(f64::INFINITY, edge, &shells).unwrap();
        assert!(r.residual <= 1e-12);
        // chemical potential inside a bin: only that bin carries residual
        let mu = -0.875;
        let cut = binning.bin_of_energy(mu).unwrap();
        let (lo, _) = binning.edges(cut);
        assert!(mu > lo + 1e-6);
        let r = fermi_dirac_stationarity(f64::INFINITY, mu, &shells).unwrap();
        for (b, res) in r.bin_residuals.iter().enumerate() {
            if b != cut {
                assert!(*res <= 1e-12, "bin {b}: {res}");
            }
        }
        assert!(r.residual <= shells.bin_rate(cut) + 1e-12);
        assert!(r.residual > 0.0);
    }

    #[test]
    fn self_energy_far_from_band() {
        let g = make_grid(16).unwrap();
        let e = dispersion(g);
        let nu = 0.3;
        let s = self_energy(-10.0, nu, &e).unwrap();
        assert!(s.im.abs() <= nu / 16.0);
        assert!(self_energy(0.0, 0.0, &e).is_err());
    }

    #[test]
    fn self_energy_particle_hole_symmetry() {
        let g = make_grid(16).unwrap();
        let e = dispersion(g);
        for en in [0.3, 1.7, 5.5, -2.2] {
            let a = self_energy(en, 0.05, &e).unwrap();
            let b = self_energy(-en, 0.05, &e).unwrap();
            assert!((b + a.conj()).norm() <= 1e-12, "{a} {b}");
        }
    }

    #[test]
    fn mollified_rate_agrees_with_bins_on_a_fine_grid() {
        let g = make_grid(32).unwrap();
        let e = dispersion(g);
        let shells = ShellOperator::from_dispersion(&e, 0.5).unwrap();
        let b = shells.binning().bin_of_energy(-4.0).unwrap();
        let (lo, hi) = shells.binning().edges(b);
        let smooth = mollified_rate(0.5 * (lo + hi), 0.25, &e).unwrap();
        let binned = shells.bin_rate(b);
        assert!((smooth - binned).abs() / binned < 0.2, "{smooth} {binned}");
    }
}
