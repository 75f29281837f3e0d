//! Seeding and Gaussian sampling.
//!
//! Every random draw in the crate flows from a `u64` seed through
//! [`derive_seed`] into a ChaCha8 stream, so results do not depend on thread
//! count or scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::matcore::{CMatrix, C64};

pub type SimRng = ChaCha8Rng;

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Mixes a tag into a seed. Distinct tags give statistically independent
/// streams.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag))
}

/// Seed of Monte Carlo trial `trial` under scenario seed `base`.
pub fn trial_seed(base: u64, trial: u64) -> u64 {
    derive_seed(base, trial.wrapping_add(0x7472_6961_6c00_0000))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// How "unit variance" is read for complex Gaussian draws.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceConvention {
    /// `E|z|² = 1`: real and imaginary parts each have variance 1/2.
    #[default]
    Total,
    /// Real and imaginary parts each have unit variance, so `E|z|² = 2`.
    PerComponent,
}

impl VarianceConvention {
    /// `E|z|²` of a "unit" complex draw.
    pub fn element_variance(self) -> f64 {
        match self {
            Self::Total => 1.0,
            Self::PerComponent => 2.0,
        }
    }
}

/// Circular complex Gaussian with `E|z|² = variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let sd = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(sd * re, sd * im)
}

pub fn real_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    variance.sqrt() * z
}

/// Matrix of i.i.d. circular complex Gaussians, filled row by row.
pub fn complex_gaussian_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    variance: f64,
) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng, variance))
}

/// Matrix of i.i.d. real Gaussians stored with zero imaginary part.
pub fn real_gaussian_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    variance: f64,
) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(real_gaussian(rng, variance), 0.0)
    })
}
