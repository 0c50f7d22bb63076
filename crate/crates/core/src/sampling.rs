//! Initial particle distributions: uniform, Halton, Gaussian mixtures and
//! their threshold-rejection variants.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{radical_inverse, sample_uniform_with, Config, ConfigSpace, HALTON_PRIMES};
use crate::metrics::MAX_ATTEMPTS_PER_SAMPLE;
use crate::models::FeasibilityModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub mean: Config,
    pub std: f64,
}

/// Equal-weight isotropic mixture draws clamped to the box, with the index
/// of the component behind each draw.
pub fn gaussian_mixture_labeled(
    components: &[MixtureComponent],
    space: &ConfigSpace,
    n: usize,
    rng: &mut impl Rng,
) -> Result<Vec<(usize, Config)>> {
    if components.is_empty() {
        return Err(Error::Config("gaussian mixture needs at least one component".into()));
    }
    for c in components {
        if c.mean.len() != space.dim() || !(c.std >= 0.0) {
            return Err(Error::Config("mixture component does not match the space".into()));
        }
    }
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    Ok((0..n)
        .map(|_| {
            let k = rng.random_range(0..components.len());
            let c = &components[k];
            let mut x: Config = c.mean.iter().map(|m| m + c.std * normal.sample(rng)).collect();
            space.clamp(&mut x);
            (k, x)
        })
        .collect())
}

pub fn gaussian_mixture_sampler(
    components: &[MixtureComponent],
    space: &ConfigSpace,
    n: usize,
    seed: u64,
) -> Result<Vec<Config>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(gaussian_mixture_labeled(components, space, n, &mut rng)?.into_iter().map(|(_, x)| x).collect())
}

/// Where initial particles come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Prior {
    #[serde(rename = "uniform")]
    Uniform,
    #[serde(rename = "uniform+rejection")]
    UniformRejection,
    #[serde(rename = "halton")]
    Halton,
    #[serde(rename = "halton+rejection")]
    HaltonRejection,
    #[serde(rename = "gaussian-mixture")]
    GaussianMixture,
}

impl Prior {
    pub fn short(&self) -> &'static str {
        match self {
            Prior::Uniform => "U",
            Prior::UniformRejection => "U+Rej",
            Prior::Halton => "H",
            Prior::HaltonRejection => "H+Rej",
            Prior::GaussianMixture => "GMM",
        }
    }
}

/// Everything a prior may need besides the RNG.
pub struct SamplerContext<'a> {
    pub space: &'a ConfigSpace,
    pub model: &'a dyn FeasibilityModel,
    pub beta: f64,
    pub mixture: &'a [MixtureComponent],
    pub halton_skip: usize,
}

fn halton_point(space: &ConfigSpace, index: u64) -> Config {
    let unit: Vec<f64> = HALTON_PRIMES[..space.dim()].iter().map(|&b| radical_inverse(index, b)).collect();
    space.from_unit(&unit)
}

fn reject_until(
    n: usize,
    mut draw: impl FnMut() -> Config,
    model: &dyn FeasibilityModel,
    beta: f64,
) -> Result<Vec<Config>> {
    let limit = MAX_ATTEMPTS_PER_SAMPLE.saturating_mul(n as u64);
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0u64;
    while out.len() < n {
        if attempts >= limit {
            return Err(Error::Metrics(format!("rejection sampler starved after {attempts} draws")));
        }
        attempts += 1;
        let x = draw();
        if model.probability(&x) >= beta {
            out.push(x);
        }
    }
    Ok(out)
}

/// Draws `n` initial particles from `prior`.
pub fn draw_prior(prior: Prior, ctx: &SamplerContext<'_>, n: usize, rng: &mut impl Rng) -> Result<Vec<Config>> {
    if matches!(prior, Prior::Halton | Prior::HaltonRejection) && ctx.space.dim() > HALTON_PRIMES.len() {
        return Err(Error::Config("too many dimensions for the Halton sequence".into()));
    }
    match prior {
        Prior::Uniform => Ok(sample_uniform_with(ctx.space, n, rng)),
        Prior::UniformRejection => {
            reject_until(n, || sample_uniform_with(ctx.space, 1, rng).pop().expect("one draw"), ctx.model, ctx.beta)
        }
        Prior::Halton => Ok((1..=n as u64).map(|i| halton_point(ctx.space, ctx.halton_skip as u64 + i)).collect()),
        Prior::HaltonRejection => {
            let mut index = ctx.halton_skip as u64;
            reject_until(
                n,
                || {
                    index += 1;
                    halton_point(ctx.space, index)
                },
                ctx.model,
                ctx.beta,
            )
        }
        Prior::GaussianMixture => {
            Ok(gaussian_mixture_labeled(ctx.mixture, ctx.space, n, rng)?.into_iter().map(|(_, x)| x).collect())
        }
    }
}
