//! Discrete 3-torus: position lattice `Λ_L = {0..L-1}^3` and dual momentum
//! lattice `Λ*_L = Λ_L / L`, fields on them, the nearest-neighbour
//! dispersion, Fourier transforms, convolutions and weighted norms.
//!
//! # Layout
//!
//! Every field is stored row-major over storage indices `(i_x, i_y, i_z)`
//! with `i ∈ {0, .., L-1}` and `i_z` fastest. A storage index `i` represents
//! the signed wavenumber `k = i` for `i < L/2` and `k = i - L` otherwise, so
//! `k ∈ {-L/2, .., L/2-1}` and the momentum component is `p = k / L`. The
//! same bijection gives the centered representative of a position `x`.
//!
//! Integrals over the torus are always the normalized grid sums
//! `∫dp f(p) = L^{-3} Σ_p f(p)`.

use std::f64::consts::PI;
use std::ops::Index;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cubic periodic grid with `side³` points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    side: usize,
}

impl GridSpec {
    pub const MAX_SIDE: usize = 256;

    pub fn new(side: usize) -> Result<Self> {
        if side < 2 || side > Self::MAX_SIDE {
            return Err(Error::invalid(
                "L",
                format!("must lie in [2, {}], got {side}", Self::MAX_SIDE),
            ));
        }
        if side % 2 != 0 {
            return Err(Error::invalid("L", format!("L must be even, got {side}")));
        }
        Ok(GridSpec { side })
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.side
    }

    /// Total number of grid points, `L³`.
    #[inline]
    pub fn len(&self) -> usize {
        self.side * self.side * self.side
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: [usize; 3]) -> usize {
        (i[0] * self.side + i[1]) * self.side + i[2]
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let l = self.side;
        [idx / (l * l), (idx / l) % l, idx % l]
    }

    /// Signed representative of a storage index, in `[-L/2, L/2)`.
    #[inline]
    pub fn signed(&self, i: usize) -> i64 {
        if i < self.side / 2 {
            i as i64
        } else {
            i as i64 - self.side as i64
        }
    }

    #[inline]
    pub fn wavevector(&self, idx: usize) -> [i64; 3] {
        let c = self.coords(idx);
        [self.signed(c[0]), self.signed(c[1]), self.signed(c[2])]
    }

    /// Momentum `p = k / L` of a grid point.
    pub fn momentum(&self, idx: usize) -> [f64; 3] {
        let k = self.wavevector(idx);
        let l = self.side as f64;
        [k[0] as f64 / l, k[1] as f64 / l, k[2] as f64 / l]
    }

    /// Storage index of an arbitrary integer wavevector, reduced mod `L`.
    pub fn index_of_wavevector(&self, k: [i64; 3]) -> usize {
        let l = self.side as i64;
        let r = |v: i64| v.rem_euclid(l) as usize;
        self.index([r(k[0]), r(k[1]), r(k[2])])
    }

    /// Index of `p_a - p_b` on the torus.
    #[inline]
    pub fn sub(&self, a: usize, b: usize) -> usize {
        let (ca, cb) = (self.coords(a), self.coords(b));
        let l = self.side;
        self.index([
            (ca[0] + l - cb[0]) % l,
            (ca[1] + l - cb[1]) % l,
            (ca[2] + l - cb[2]) % l,
        ])
    }

    /// Index of `-p`.
    #[inline]
    pub fn neg(&self, a: usize) -> usize {
        let c = self.coords(a);
        let l = self.side;
        self.index([(l - c[0]) % l, (l - c[1]) % l, (l - c[2]) % l])
    }

    /// Index of `p + (1/2, 1/2, 1/2)`.
    pub fn shift_half(&self, a: usize) -> usize {
        let c = self.coords(a);
        let (l, h) = (self.side, self.side / 2);
        self.index([(c[0] + h) % l, (c[1] + h) % l, (c[2] + h) % l])
    }

    /// `cos(2π k / L)` for every storage index, with the symmetries
    /// `c(-k) = c(k)` and `c(k + L/2) = -c(k)` holding bit-exactly.
    pub fn cos_table(&self) -> Vec<f64> {
        let l = self.side;
        let base = |s: usize| -> f64 {
            // s <= L/4
            if 4 * s == l {
                0.0
            } else {
                (2.0 * PI * s as f64 / l as f64).cos()
            }
        };
        (0..l)
            .map(|i| {
                let r = i.min(l - i);
                if 4 * r > l {
                    -base(l / 2 - r)
                } else {
                    base(r)
                }
            })
            .collect()
    }
}

/// Checked constructor for the momentum/position grid.
pub fn make_grid(side: usize) -> Result<GridSpec> {
    GridSpec::new(side)
}

fn check_finite(values: &[f64], what: &'static str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::invalid(what, format!("non-finite value at index {i}"))),
        None => Ok(()),
    }
}

/// Real field on the grid (momentum or position lattice, depending on use).
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        check_finite(&values, "field")?;
        Ok(ScalarField { grid, values })
    }

    /// Builds a field from a function of the storage index. Values are not
    /// checked for finiteness.
    pub fn from_fn(grid: GridSpec, f: impl FnMut(usize) -> f64) -> Self {
        ScalarField {
            grid,
            values: (0..grid.len()).map(f).collect(),
        }
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        ScalarField {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub(crate) fn from_raw(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn ensure_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "L = {} vs L = {}",
                self.grid.side(),
                other.grid.side()
            )));
        }
        Ok(())
    }

    /// Grid average `L^{-3} Σ_p f(p)`.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `‖self - other‖_∞`; panics on grid mismatch.
    pub fn sup_distance(&self, other: &ScalarField) -> f64 {
        assert_eq!(self.grid, other.grid, "sup_distance on different grids");
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `L^{-3} Σ_p a(p) b(p)`; panics on grid mismatch.
    pub fn inner(&self, other: &ScalarField) -> f64 {
        assert_eq!(self.grid, other.grid, "inner product on different grids");
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        s / self.values.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination; panics on grid mismatch.
    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        assert_eq!(self.grid, other.grid, "zip_with on different grids");
        ScalarField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn to_complex(&self) -> ComplexField {
        ComplexField {
            grid: self.grid,
            values: self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }
}

impl Index<usize> for ScalarField {
    type Output = f64;
    fn index(&self, idx: usize) -> &f64 {
        &self.values[idx]
    }
}

/// Complex field on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid("field", format!("non-finite value at index {i}")));
        }
        Ok(ComplexField { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        ComplexField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn(grid: GridSpec, f: impl FnMut(usize) -> Complex64) -> Self {
        ComplexField {
            grid,
            values: (0..grid.len()).map(f).collect(),
        }
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn re(&self) -> ScalarField {
        ScalarField::from_raw(self.grid, self.values.iter().map(|z| z.re).collect())
    }

    /// `L^{-3} Σ |f|²`.
    pub fn mean_norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.values.len() as f64
    }

    pub fn sup_distance(&self, other: &ComplexField) -> f64 {
        assert_eq!(self.grid, other.grid, "sup_distance on different grids");
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }
}

impl Index<usize> for ComplexField {
    type Output = Complex64;
    fn index(&self, idx: usize) -> &Complex64 {
        &self.values[idx]
    }
}

/// Reusable 3D FFT for one grid size, built from 1D transforms along the
/// contiguous axis followed by a cyclic axis rotation.
#[derive(Clone)]
pub struct Fft3 {
    grid: GridSpec,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Scratch space for [`Fft3`]; one per thread.
pub struct FftWork {
    rotated: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Fft3 {
    pub fn new(grid: GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        Fft3 {
            grid,
            forward: planner.plan_fft_forward(grid.side()),
            inverse: planner.plan_fft_inverse(grid.side()),
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn workspace(&self) -> FftWork {
        let scratch = self
            .forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len());
        FftWork {
            rotated: vec![Complex64::new(0.0, 0.0); self.grid.len()],
            scratch: vec![Complex64::new(0.0, 0.0); scratch],
        }
    }

    fn run(&self, plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64], work: &mut FftWork) {
        let n = self.grid.len();
        assert!(n > 0 && data.len() % n == 0, "buffer must hold whole fields");
        if work.rotated.len() < n {
            work.rotated.resize(n, Complex64::new(0.0, 0.0));
        }
        let l = self.grid.side();
        for _ in 0..3 {
            // one call over the whole batch lets rustfft vectorize across rows
            plan.process_with_scratch(data, &mut work.scratch);
            for block in data.chunks_exact_mut(n) {
                // (a, b, c) -> (c, a, b): the next axis becomes contiguous.
                let dst = &mut work.rotated[..n];
                for a in 0..l {
                    for b in 0..l {
                        let row = &block[(a * l + b) * l..(a * l + b + 1) * l];
                        for (c, &v) in row.iter().enumerate() {
                            dst[(c * l + a) * l + b] = v;
                        }
                    }
                }
                block.copy_from_slice(dst);
            }
        }
    }

    /// `f̂(p) = Σ_x e^{-2πi p·x} f(x)`, in place. `data` may hold several
    /// consecutive fields.
    pub fn forward(&self, data: &mut [Complex64], work: &mut FftWork) {
        self.run(&self.forward, data, work);
    }

    /// `Σ_p e^{2πi p·x} g(p)` without the `L^{-3}` factor, in place.
    pub fn inverse_unnormalized(&self, data: &mut [Complex64], work: &mut FftWork) {
        self.run(&self.inverse, data, work);
    }

    /// `g^∨(x) = L^{-3} Σ_p e^{2πi p·x} g(p)`, in place.
    pub fn inverse(&self, data: &mut [Complex64], work: &mut FftWork) {
        self.inverse_unnormalized(data, work);
        let scale = 1.0 / self.grid.len() as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }
}

/// `E(p) = 2 Σ_j cos(2π p_j)` on every grid point; exactly even under
/// `p -> -p` and exactly odd under `p -> p + (1/2,1/2,1/2)`.
pub fn dispersion(grid: GridSpec) -> ScalarField {
    let c = grid.cos_table();
    ScalarField::from_fn(grid, |idx| {
        let [a, b, d] = grid.coords(idx);
        2.0 * (c[a] + c[b] + c[d])
    })
}

/// Discrete Fourier transform from the position to the momentum lattice.
pub fn forward_transform(f: &ComplexField) -> ComplexField {
    let fft = Fft3::new(f.grid());
    let mut work = fft.workspace();
    let mut out = f.clone();
    fft.forward(out.values_mut(), &mut work);
    out
}

/// Inverse transform, `g^∨(x) = L^{-3} Σ_p e^{2πi p·x} g(p)`.
pub fn inverse_transform(g: &ComplexField) -> ComplexField {
    let fft = Fft3::new(g.grid());
    let mut work = fft.workspace();
    let mut out = g.clone();
    fft.inverse(out.values_mut(), &mut work);
    out
}

/// `(a ∗ b)(p) = L^{-3} Σ_q a(p - q) b(q)`, evaluated through the transform.
pub fn convolve(a: &ScalarField, b: &ScalarField) -> Result<ScalarField> {
    a.ensure_same_grid(b)?;
    let fft = Fft3::new(a.grid());
    let mut work = fft.workspace();
    let mut xa = a.to_complex();
    let mut xb = b.to_complex();
    fft.inverse(xa.values_mut(), &mut work);
    fft.inverse(xb.values_mut(), &mut work);
    for (u, v) in xa.values_mut().iter_mut().zip(xb.values()) {
        *u *= v;
    }
    fft.forward(xa.values_mut(), &mut work);
    Ok(xa.re())
}

/// Direct `O(L⁶)` evaluation of [`convolve`].
pub fn convolve_direct(a: &ScalarField, b: &ScalarField) -> Result<ScalarField> {
    a.ensure_same_grid(b)?;
    let grid = a.grid();
    let n = grid.len() as f64;
    Ok(ScalarField::from_fn(grid, |p| {
        (0..grid.len())
            .map(|q| a[grid.sub(p, q)] * b[q])
            .sum::<f64>()
            / n
    }))
}

/// Weighted norm `(Σ_x ⟨x⟩^{2s} |v(x)|²)^{1/2}` with `⟨x⟩ = (1 + |x|²)^{1/2}`
/// and `x` the centered representative on the periodic lattice.
pub fn sobolev_norm(v: &ScalarField, s: f64) -> f64 {
    let grid = v.grid();
    v.values()
        .iter()
        .enumerate()
        .map(|(idx, &val)| {
            let k = grid.wavevector(idx);
            let r2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            (1.0 + r2).powf(s) * val * val
        })
        .sum::<f64>()
        .sqrt()
}

/// Real, even pair potential `v` on the position lattice together with its
/// transform `v̂` and the weighted norm that bounds it.
#[derive(Clone, Debug)]
pub struct PairPotential {
    position: ScalarField,
    vhat: ScalarField,
    sigma: f64,
    norm_bound: f64,
}

impl PairPotential {
    pub fn from_position(v: ScalarField, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("sigma", format!("must be > 0, got {sigma}")));
        }
        let grid = v.grid();
        let scale = v.sup_norm().max(f64::MIN_POSITIVE);
        for idx in 0..grid.len() {
            if (v[idx] - v[grid.neg(idx)]).abs() > 1e-12 * scale {
                return Err(Error::invalid(
                    "potential",
                    "pair potential must satisfy v(x) = v(-x)",
                ));
            }
        }
        let hat = forward_transform(&v.to_complex());
        let vhat = hat.re();
        let norm_bound = sobolev_norm(&v, 1.5 + sigma);
        Ok(PairPotential {
            position: v,
            vhat,
            sigma,
            norm_bound,
        })
    }

    /// Gaussian `v(x) ∝ exp(-|x|² / 2w²)` scaled so that `v̂(0) = peak`.
    pub fn gaussian_bump(grid: GridSpec, peak: f64, width: f64, sigma: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::invalid("width", format!("must be > 0, got {width}")));
        }
        if !peak.is_finite() {
            return Err(Error::invalid("amplitude", "must be finite"));
        }
        let shape = ScalarField::from_fn(grid, |idx| {
            let k = grid.wavevector(idx);
            let r2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            (-r2 / (2.0 * width * width)).exp()
        });
        let total: f64 = shape.values().iter().sum();
        Self::from_position(shape.map(|v| v * peak / total), sigma)
    }

    /// Contact interaction `v = c·δ_{x,0}`, so `v̂ ≡ c`.
    pub fn contact(grid: GridSpec, c: f64, sigma: f64) -> Result<Self> {
        let v = ScalarField::from_fn(grid, |idx| if idx == 0 { c } else { 0.0 });
        Self::from_position(v, sigma)
    }

    pub fn zero(grid: GridSpec) -> Self {
        Self::contact(grid, 0.0, 1.0).expect("zero potential is valid")
    }

    pub fn grid(&self) -> GridSpec {
        self.vhat.grid()
    }

    pub fn position(&self) -> &ScalarField {
        &self.position
    }

    pub fn vhat(&self) -> &ScalarField {
        &self.vhat
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    /// Sup bound on `v̂ ∗ μ` valid for every `0 ≤ μ ≤ 1`.
    pub fn kappa_bound(&self) -> f64 {
        self.vhat.values().iter().map(|v| v.abs()).sum::<f64>() / self.vhat.values().len() as f64
    }

    /// Exchange source `κ = v̂ ∗ μ`.
    pub fn kappa(&self, mu: &ScalarField) -> Result<ScalarField> {
        convolve(&self.vhat, mu)
    }
}
