//! Reproducible i.i.d. standard Gaussian disorder `ω_x`.
//!
//! Sample `i` of an ensemble draws from its own ChaCha20 stream seeded by
//! [`derive_child_seed`]`(master, i)`. Uniforms are converted pairwise with
//! Box–Muller, so every site consumes exactly one 64-bit word and the field is
//! a pure function of `(master_seed, sample_index)`.

use std::f64::consts::PI;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::lattice::{GridSpec, ScalarField};

/// Odd multiplier applied to the sample index (the 64-bit golden ratio).
pub const SAMPLE_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub sample_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, sample_index: u64) -> Self {
        SeedSpec {
            master_seed,
            sample_index,
        }
    }

    pub fn child_seed(&self) -> u64 {
        derive_child_seed(self.master_seed, self.sample_index)
    }
}

/// SplitMix64 finalizer (Stafford variant 13).
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `mix64(master ^ (index · SAMPLE_STRIDE))`. Injective in `index` for a
/// fixed master seed, since both the odd multiplication and `mix64` are
/// bijections of `u64`.
#[inline]
pub fn derive_child_seed(master_seed: u64, sample_index: u64) -> u64 {
    mix64(master_seed ^ sample_index.wrapping_mul(SAMPLE_STRIDE))
}

/// One disorder realization on the position lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct DisorderField {
    seed: SeedSpec,
    omega: ScalarField,
}

impl DisorderField {
    pub fn seed(&self) -> SeedSpec {
        self.seed
    }

    pub fn grid(&self) -> GridSpec {
        self.omega.grid()
    }

    pub fn omega(&self) -> &ScalarField {
        &self.omega
    }

    /// Uniform field `ω ≡ c`; used to check that a constant potential only
    /// contributes a global phase.
    pub fn uniform(grid: GridSpec, c: f64) -> Self {
        DisorderField {
            seed: SeedSpec::new(0, 0),
            omega: ScalarField::constant(grid, c),
        }
    }

    pub fn from_values(omega: ScalarField) -> Self {
        DisorderField {
            seed: SeedSpec::new(0, 0),
            omega,
        }
    }
}

#[inline]
fn unit_open_closed(word: u64) -> f64 {
    // (0, 1]: never zero, so the logarithm below is finite.
    ((word >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn unit_closed_open(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Fills `L³` standard normal values for the given seed.
pub fn sample_disorder(grid: GridSpec, seed: SeedSpec) -> DisorderField {
    let mut rng = ChaCha20Rng::seed_from_u64(seed.child_seed());
    let n = grid.len();
    let mut values = Vec::with_capacity(n);
    while values.len() < n {
        let u1 = unit_open_closed(rng.next_u64());
        let u2 = unit_closed_open(rng.next_u64());
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        values.push(r * c);
        if values.len() < n {
            values.push(r * s);
        }
    }
    DisorderField {
        seed,
        omega: ScalarField::from_raw(grid, values),
    }
}
