use super::{Config, ConfigSpace};
use crate::error::{Error, Result};

/// Prime bases for the first 32 Halton dimensions.
pub const HALTON_PRIMES: [u64; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109,
    113, 127, 131,
];

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv_base = 1.0 / base as f64;
    let mut scale = inv_base;
    let mut value = 0.0;
    while index > 0 {
        value += (index % base) as f64 * scale;
        index /= base;
        scale *= inv_base;
    }
    value
}

/// Unscrambled Halton points with indices `skip + 1 ..= skip + n`, scaled
/// into the box. Dimension `i` uses the `i`-th prime.
pub fn sample_halton(space: &ConfigSpace, n: usize, skip: u64) -> Result<Vec<Config>> {
    let d = space.dim();
    if d > HALTON_PRIMES.len() {
        return Err(Error::Geometry(format!(
            "Halton sampler supports at most {} dimensions, got {d}",
            HALTON_PRIMES.len()
        )));
    }
    Ok((1..=n as u64)
        .map(|k| {
            let unit: Vec<f64> = HALTON_PRIMES[..d].iter().map(|&b| radical_inverse(skip + k, b)).collect();
            space.from_unit(&unit)
        })
        .collect())
}
