//! Stationary states on level sets of the renormalized dispersion
//! `Ẽ_λ = E - λ(v̂ ∗ F)`, and numerical probes of the resolvent integral
//! conditions imposed on `Ẽ_λ`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kinetic::{EnergyBinning, ShellOperator};
use crate::lattice::{dispersion, Fft3, PairPotential, ScalarField};

#[derive(Clone, Debug)]
pub struct RenormalizedDispersion {
    pub etilde: ScalarField,
    pub lambda: f64,
    pub source: ScalarField,
}

impl RenormalizedDispersion {
    /// `λ ‖v̂ ∗ F‖_∞`, the bound on `‖Ẽ - E‖_∞`.
    pub fn shift_bound(&self, potential: &PairPotential) -> Result<f64> {
        Ok(self.lambda * potential.kappa(&self.source)?.sup_norm())
    }
}

/// `Ẽ = E - λ (v̂ ∗ F)`; exactly `E` when `λ = 0`.
pub fn renormalized_dispersion(f: &ScalarField, lambda: f64, potential: &PairPotential) -> Result<RenormalizedDispersion> {
    f.ensure_same_grid(potential.vhat())?;
    if !lambda.is_finite() {
        return Err(Error::invalid("lambda", "must be finite"));
    }
    let e = dispersion(f.grid());
    let etilde = if lambda == 0.0 {
        e
    } else {
        let k = potential.kappa(f)?;
        e.zip_with(&k, |a, b| a - lambda * b)
    };
    Ok(RenormalizedDispersion {
        etilde,
        lambda,
        source: f.clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedPointConfig {
    /// `θ ∈ (0, 1]`
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Bin width of the `Ẽ` shells.
    pub delta: f64,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        FixedPointConfig {
            damping: 0.5,
            tol: 1e-8,
            max_iter: 200,
            delta: 0.1,
        }
    }
}

impl FixedPointConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::invalid("damping", format!("must lie in (0, 1], got {}", self.damping)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tol", "must be > 0"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter", "must be >= 1"));
        }
        if !(self.delta > 0.0) {
            return Err(Error::invalid("delta", "must be > 0"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct FixedPointResult {
    pub f: ScalarField,
    /// `‖F - A_{Ẽ(F)}[F]‖_∞` of the returned `F`.
    pub residual: f64,
    /// Number of damped updates applied.
    pub iterations: usize,
    pub converged: bool,
    /// Residual of every iterate, starting with `F_init`.
    pub history: Vec<f64>,
    pub dispersion: RenormalizedDispersion,
}

fn shell_average_on(f: &ScalarField, lambda: f64, potential: &PairPotential, delta: f64) -> Result<(ScalarField, RenormalizedDispersion)> {
    let rd = renormalized_dispersion(f, lambda, potential)?;
    let shells = ShellOperator::new(EnergyBinning::build(&rd.etilde, delta)?);
    Ok((shells.average(f)?, rd))
}

/// Damped Picard iteration `F ← (1-θ)F + θ A_{Ẽ(F)}[F]`, re-binning on the
/// current `Ẽ` every step.
pub fn stationary_fixed_point(
    f_init: &ScalarField,
    lambda: f64,
    potential: &PairPotential,
    cfg: &FixedPointConfig,
) -> Result<FixedPointResult> {
    cfg.validate()?;
    if f_init.min() < 0.0 || f_init.max() > 1.0 {
        return Err(Error::invalid("F_init", "must lie in [0, 1]"));
    }
    let theta = cfg.damping;
    let mut f = f_init.clone();
    let mut history = Vec::new();
    for k in 0..=cfg.max_iter {
        let (a, rd) = shell_average_on(&f, lambda, potential, cfg.delta)?;
        let residual = f.sup_distance(&a);
        history.push(residual);
        if residual < cfg.tol || k == cfg.max_iter {
            let converged = residual < cfg.tol;
            debug_assert!(!converged || residual <= cfg.tol);
            return Ok(FixedPointResult {
                f,
                residual,
                iterations: k,
                converged,
                history,
                dispersion: rd,
            });
        }
        f = if theta == 1.0 { a } else { f.zip_with(&a, |x, y| (1.0 - theta) * x + theta * y) };
    }
    unreachable!("loop returns at k = max_iter")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic1Row {
    pub epsilon: f64,
    /// `sup_α L^{-3} Σ_q 1/|Ẽ(q) - α - iε|` over the α-grid.
    pub sup_value: f64,
    pub argmax_alpha: f64,
    /// `sup_q ∫dα 1/|Ẽ(q) - α - iε|` with α over the padded range.
    pub sup_alpha_integral: f64,
    /// `sup_value / log(1/ε)`
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic2Row {
    pub epsilon: f64,
    pub sup_estimate: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Half-width of the 95% confidence interval of the slope; infinite
    /// with fewer than three points.
    pub slope_ci95: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub rows_1: Vec<Diagnostic1Row>,
    /// Least-squares `C` of `value ≈ C log(1/ε)` through the origin.
    pub fitted_c: Option<f64>,
    /// `|ratio_{finest} - ratio_{second}| / ratio_{second}`.
    pub c_relative_change: Option<f64>,
    pub rows_2: Vec<Diagnostic2Row>,
    /// Fit of `log value` against `log(1/ε)`; the slope is the exponent `b`.
    pub exponent_fit: Option<LinearFit>,
}

/// Padding added to both ends of `range(Ẽ)` for the α search.
pub const ALPHA_PADDING: f64 = 1.0;

fn unique_with_multiplicity(e: &ScalarField) -> (Vec<f64>, Vec<f64>) {
    let mut v = e.values().to_vec();
    v.sort_by(f64::total_cmp);
    let mut vals = Vec::new();
    let mut counts: Vec<f64> = Vec::new();
    for x in v {
        if vals.last() == Some(&x) {
            *counts.last_mut().unwrap() += 1.0;
        } else {
            vals.push(x);
            counts.push(1.0);
        }
    }
    (vals, counts)
}

fn check_epsilons(eps: &[f64]) -> Result<()> {
    if let Some(&e) = eps.iter().find(|&&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::invalid("epsilon", format!("entries must be > 0, got {e}")));
    }
    Ok(())
}

/// Rows of the single-resolvent diagnostic, one per `ε`.
pub fn crossing_diagnostic_1(etilde: &ScalarField, epsilons: &[f64]) -> Result<Vec<Diagnostic1Row>> {
    check_epsilons(epsilons)?;
    let (vals, counts) = unique_with_multiplicity(etilde);
    let n = etilde.values().len() as f64;
    let lo = etilde.min() - ALPHA_PADDING;
    let hi = etilde.max() + ALPHA_PADDING;
    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let steps = ((hi - lo) / (eps / 4.0)).ceil() as usize;
        let h = (hi - lo) / steps as f64;
        let alphas = (0..=steps).map(|i| lo + i as f64 * h).chain(vals.iter().copied());
        let mut best = (f64::NEG_INFINITY, lo);
        for alpha in alphas {
            let mut s = 0.0;
            for (v, c) in vals.iter().zip(&counts) {
                s += c / (v - alpha).hypot(eps);
            }
            let s = s / n;
            if s > best.0 {
                best = (s, alpha);
            }
        }
        let sup_alpha_integral = vals
            .iter()
            .map(|&v| ((hi - v) / eps).asinh() - ((lo - v) / eps).asinh())
            .fold(0.0, f64::max);
        rows.push(Diagnostic1Row {
            epsilon: eps,
            sup_value: best.0,
            argmax_alpha: best.1,
            sup_alpha_integral,
            ratio: best.0 / (1.0 / eps).ln(),
        });
    }
    Ok(rows)
}

/// Least-squares `C` with `value ≈ C log(1/ε)`, using rows with `ε < 1`.
pub fn fit_log_model(rows: &[Diagnostic1Row]) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for r in rows.iter().filter(|r| r.epsilon < 1.0) {
        let l = (1.0 / r.epsilon).ln();
        num += r.sup_value * l;
        den += l * l;
    }
    (den > 0.0).then(|| num / den)
}

/// Two-sided 97.5% Student quantiles for 1..=10 degrees of freedom.
const T_975: [f64; 10] = [12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228];

pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_ci95 = if n > 2 {
        let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        let se = (sse / (nf - 2.0) / sxx).sqrt();
        let t = T_975.get(n - 3).copied().unwrap_or(1.96);
        t * se
    } else {
        f64::INFINITY
    };
    Some(LinearFit {
        slope,
        intercept,
        slope_ci95,
    })
}

/// `sup_{u,±} L^{-6} Σ_{q,p} r₁(q) r₂(p) r₃(p ± q + u)` for one α-triple,
/// with `r_i = 1/|Ẽ - α_i - iε|`. Both signs and all `u` are covered exactly
/// by two correlations evaluated with FFTs.
fn triple_sup(fft: &Fft3, work: &mut crate::lattice::FftWork, etilde: &[f64], alphas: [f64; 3], eps: f64) -> f64 {
    let n = etilde.len();
    let res = |alpha: f64| -> Vec<Complex64> {
        etilde
            .iter()
            .map(|&e| Complex64::new(1.0 / (e - alpha).hypot(eps), 0.0))
            .collect()
    };
    let (mut a, mut b, mut c) = (res(alphas[0]), res(alphas[1]), res(alphas[2]));
    fft.forward(&mut a, work);
    fft.forward(&mut b, work);
    fft.forward(&mut c, work);
    // g(k) = Σ_p r₂(p) r₃(p + k)  <=>  ĝ = conj(r̂₂) r̂₃
    let mut g: Vec<Complex64> = b.iter().zip(&c).map(|(x, y)| x.conj() * y).collect();
    // plus: h(u) = Σ_q r₁(q) g(q + u); minus: h(u) = Σ_q r₁(q) g(u - q)
    let mut plus: Vec<Complex64> = a.iter().zip(&g).map(|(x, y)| x.conj() * y).collect();
    for (z, x) in g.iter_mut().zip(&a) {
        *z *= x;
    }
    fft.inverse(&mut plus, work);
    fft.inverse(&mut g, work);
    let scale = 1.0 / (n as f64 * n as f64);
    plus.iter()
        .chain(g.iter())
        .map(|z| z.re * scale)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Random-search estimate of the triple-resolvent supremum per `ε`.
/// `n_mc` α-triples are drawn from the padded range of `Ẽ` with a fixed
/// seed; the triple with every `α_i` at the most frequent value of `Ẽ` is
/// always included.
pub fn crossing_diagnostic_2(etilde: &ScalarField, epsilons: &[f64], n_mc: usize, seed: u64) -> Result<Vec<Diagnostic2Row>> {
    check_epsilons(epsilons)?;
    if n_mc < 10_000 {
        return Err(Error::invalid("n_mc", format!("must be >= 10000, got {n_mc}")));
    }
    let grid = etilde.grid();
    let fft = Fft3::new(grid);
    let mut work = fft.workspace();
    let lo = etilde.min() - ALPHA_PADDING;
    let hi = etilde.max() + ALPHA_PADDING;
    let (vals, counts) = unique_with_multiplicity(etilde);
    let mode = vals[counts
        .iter()
        .enumerate()
        .fold(0, |best, (i, &c)| if c > counts[best] { i } else { best })];
    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best = triple_sup(&fft, &mut work, etilde.values(), [mode; 3], eps);
        for _ in 0..n_mc {
            let alphas = [rng.gen_range(lo..hi), rng.gen_range(lo..hi), rng.gen_range(lo..hi)];
            best = best.max(triple_sup(&fft, &mut work, etilde.values(), alphas, eps));
        }
        rows.push(Diagnostic2Row {
            epsilon: eps,
            sup_estimate: best,
            samples: n_mc + 1,
        });
    }
    Ok(rows)
}

/// Both diagnostics and their fits.
pub fn diagnostics_report(
    etilde: &ScalarField,
    epsilons_1: &[f64],
    epsilons_2: &[f64],
    n_mc: usize,
    seed: u64,
) -> Result<DiagnosticsReport> {
    let rows_1 = crossing_diagnostic_1(etilde, epsilons_1)?;
    let fitted_c = fit_log_model(&rows_1);
    let mut fine: Vec<&Diagnostic1Row> = rows_1.iter().filter(|r| r.epsilon < 1.0).collect();
    fine.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
    let c_relative_change = (fine.len() >= 2).then(|| (fine[0].ratio - fine[1].ratio).abs() / fine[1].ratio);
    let rows_2 = if epsilons_2.is_empty() {
        Vec::new()
    } else {
        crossing_diagnostic_2(etilde, epsilons_2, n_mc, seed)?
    };
    let exponent_fit = linear_fit(
        &rows_2.iter().map(|r| (1.0 / r.epsilon).ln()).collect::<Vec<_>>(),
        &rows_2.iter().map(|r| r.sup_estimate.ln()).collect::<Vec<_>>(),
    );
    Ok(DiagnosticsReport {
        rows_1,
        fitted_c,
        c_relative_change,
        rows_2,
        exponent_fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_grid;

    fn smooth_f(l: usize) -> ScalarField {
        let g = make_grid(l).unwrap();
        ScalarField::from_fn(g, |p| {
            let m = g.momentum(p);
            0.5 + 0.3 * (2.0 * std::f64::consts::PI * m[0]).cos() * (2.0 * std::f64::consts::PI * m[1]).sin()
        })
    }

    #[test]
    fn renormalization_limits() {
        let f = smooth_f(8);
        let g = f.grid();
        let v = PairPotential::gaussian_bump(g, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(renormalized_dispersion(&f, 0.0, &v).unwrap().etilde, dispersion(g));
        let zero = ScalarField::constant(g, 0.0);
        let rd = renormalized_dispersion(&zero, 0.3, &v).unwrap();
        assert!(rd.etilde.sup_distance(&dispersion(g)) < 1e-14);
        let c = PairPotential::contact(g, 2.0, 1.0).unwrap();
        let rd = renormalized_dispersion(&f, 0.3, &c).unwrap();
        let shift = 0.3 * 2.0 * f.mean();
        let e = dispersion(g);
        for p in 0..g.len() {
            assert!((rd.etilde[p] - (e[p] - shift)).abs() < 1e-13);
        }
        let rd = renormalized_dispersion(&f, 0.3, &v).unwrap();
        assert!(rd.etilde.sup_distance(&e) <= rd.shift_bound(&v).unwrap() + 1e-15);
    }

    #[test]
    fn non_interacting_fixed_point_is_the_shell_average() {
        let f = smooth_f(8);
        let v = PairPotential::gaussian_bump(f.grid(), 1.0, 1.0, 1.0).unwrap();
        let cfg = FixedPointConfig {
            damping: 1.0,
            delta: 0.5,
            ..Default::default()
        };
        let r = stationary_fixed_point(&f, 0.0, &v, &cfg).unwrap();
        let a = ShellOperator::from_dispersion(&dispersion(f.grid()), 0.5).unwrap().average(&f).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.residual <= 1e-13);
        assert!(r.f.sup_distance(&a) <= 1e-15);
    }

    #[test]
    fn contact_potential_keeps_the_free_shells() {
        let f = smooth_f(8);
        let g = f.grid();
        let c = PairPotential::contact(g, 1.0, 1.0).unwrap();
        let cfg = FixedPointConfig {
            delta: 0.5,
            ..Default::default()
        };
        let r = stationary_fixed_point(&f, 0.2, &c, &cfg).unwrap();
        assert!(r.converged);
        let a = ShellOperator::from_dispersion(&dispersion(g), 0.5).unwrap().average(&f).unwrap();
        assert!(r.f.sup_distance(&a) < 1e-7, "{}", r.f.sup_distance(&a));
    }

    #[test]
    fn iterates_preserve_range_and_mass() {
        let f = smooth_f(8);
        let v = PairPotential::gaussian_bump(f.grid(), 1.0, 1.0, 1.0).unwrap();
        let cfg = FixedPointConfig {
            delta: 0.5,
            max_iter: 5,
            ..Default::default()
        };
        let r = stationary_fixed_point(&f, 0.1, &v, &cfg).unwrap();
        assert!(r.f.min() >= f.min() - 1e-15 && r.f.max() <= f.max() + 1e-15);
        assert!((r.f.mean() - f.mean()).abs() < 1e-12);
        assert_eq!(r.history.len(), r.iterations + 1);
    }

    #[test]
    fn diagnostic_1_degenerate_and_unit_epsilon() {
        let g = make_grid(4).unwrap();
        let c = ScalarField::constant(g, 0.7);
        let rows = crossing_diagnostic_1(&c, &[0.5, 0.1]).unwrap();
        assert!((rows[0].sup_value - 2.0).abs() < 1e-12);
        assert!((rows[1].sup_value - 10.0).abs() < 1e-12);
        let e = dispersion(make_grid(8).unwrap());
        let r = crossing_diagnostic_1(&e, &[1.0]).unwrap();
        assert!(r[0].sup_value <= 1.0 + 1e-15);
    }

    #[test]
    fn diagnostic_2_degenerate_has_exponent_three() {
        let g = make_grid(4).unwrap();
        let c = ScalarField::constant(g, -0.4);
        let eps = [0.5, 0.2, 0.1];
        let rows = crossing_diagnostic_2(&c, &eps, 10_000, 7).unwrap();
        for r in &rows {
            assert!((r.sup_estimate - r.epsilon.powi(-3)).abs() < 1e-9 * r.epsilon.powi(-3));
        }
        let fit = linear_fit(
            &rows.iter().map(|r| (1.0 / r.epsilon).ln()).collect::<Vec<_>>(),
            &rows.iter().map(|r| r.sup_estimate.ln()).collect::<Vec<_>>(),
        )
        .unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-9);
        let e = dispersion(g);
        let one = crossing_diagnostic_2(&e, &[1.0], 10_000, 7).unwrap();
        assert!(one[0].sup_estimate <= 1.0 + 1e-12);
    }

    #[test]
    fn triple_sum_matches_direct_evaluation() {
        let g = make_grid(4).unwrap();
        let e = dispersion(g);
        let fft = Fft3::new(g);
        let mut work = fft.workspace();
        let alphas = [0.3, -1.1, 2.0];
        let eps = 0.4;
        let fast = triple_sup(&fft, &mut work, e.values(), alphas, eps);
        let r = |v: f64, a: f64| 1.0 / (v - a).hypot(eps);
        let n = g.len();
        let mut best = f64::NEG_INFINITY;
        for u in 0..n {
            for sign in [1i64, -1] {
                let mut s = 0.0;
                for q in 0..n {
                    for p in 0..n {
                        let kq = g.wavevector(q);
                        let kp = g.wavevector(p);
                        let ku = g.wavevector(u);
                        let k = [0, 1, 2].map(|i| kp[i] + sign * kq[i] + ku[i]);
                        let w = g.index_of_wavevector(k);
                        s += r(e[q], alphas[0]) * r(e[p], alphas[1]) * r(e[w], alphas[2]);
                    }
                }
                best = best.max(s / (n * n) as f64);
            }
        }
        assert!((fast - best).abs() < 1e-12 * best, "{fast} vs {best}");
    }
}
