//! Sample-set discrepancy and roadmap coverage.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist, dist_sq, sample_uniform_with, Config, ConfigSpace};
use crate::models::FeasibilityModel;
use crate::roadmap::{check_edge, Roadmap};

/// Rejection sampling gives up after this many draws per requested sample.
pub const MAX_ATTEMPTS_PER_SAMPLE: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MmdBandwidth {
    /// Median pairwise distance of the pooled sample.
    #[default]
    Median,
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MmdConfig {
    pub bandwidth: MmdBandwidth,
}

impl MmdConfig {
    pub fn fixed(sigma: f64) -> Self {
        MmdConfig { bandwidth: MmdBandwidth::Fixed(sigma) }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median heuristic over the pooled sample; 1 when it degenerates.
pub fn pooled_median_distance(a: &[Config], b: &[Config]) -> f64 {
    let pooled: Vec<&Config> = a.iter().chain(b).collect();
    let mut d = Vec::with_capacity(pooled.len() * pooled.len() / 2);
    for i in 0..pooled.len() {
        for j in i + 1..pooled.len() {
            d.push(dist(pooled[i], pooled[j]));
        }
    }
    let m = median(d);
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

fn mean_kernel(a: &[Config], b: &[Config], inv_two_var: f64) -> f64 {
    let mut s = 0.0;
    for x in a {
        for y in b {
            s += (-dist_sq(x, y) * inv_two_var).exp();
        }
    }
    s / (a.len() * b.len()) as f64
}

/// Biased squared MMD with kernel `exp(-|x - y|^2 / (2 sigma^2))`.
pub fn mmd_squared(a: &[Config], b: &[Config], cfg: &MmdConfig) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Metrics("mmd needs two nonempty sample sets".into()));
    }
    let sigma = match cfg.bandwidth {
        MmdBandwidth::Fixed(s) if s > 0.0 => s,
        MmdBandwidth::Fixed(s) => return Err(Error::Metrics(format!("mmd bandwidth must be > 0, got {s}"))),
        MmdBandwidth::Median => pooled_median_distance(a, b),
    };
    let w = 1.0 / (2.0 * sigma * sigma);
    let kab = mean_kernel(a, b, w);
    let kba = mean_kernel(b, a, w);
    // both cross orders so that swapping the arguments is exact
    let v = (mean_kernel(a, a, w) + mean_kernel(b, b, w)) - (kab + kba);
    Ok(v.max(0.0))
}

/// Uniform box draws with `p >= beta`, until `n` are accepted.
pub fn reference_feasible_sample(
    model: &dyn FeasibilityModel,
    space: &ConfigSpace,
    beta: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<Config>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rejection_sample(model, space, beta, n, &mut rng).map(|(s, _)| s)
}

/// Same as [`reference_feasible_sample`] but also reports the number of draws.
pub fn rejection_sample(
    model: &dyn FeasibilityModel,
    space: &ConfigSpace,
    beta: f64,
    n: usize,
    rng: &mut impl Rng,
) -> Result<(Vec<Config>, u64)> {
    let limit = MAX_ATTEMPTS_PER_SAMPLE.saturating_mul(n as u64);
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0u64;
    while out.len() < n {
        if attempts >= limit {
            return Err(Error::Metrics(format!(
                "rejection sampling accepted {} of {n} after {attempts} draws",
                out.len()
            )));
        }
        attempts += 1;
        let x = sample_uniform_with(space, 1, rng).pop().expect("one draw");
        if model.probability(&x) >= beta {
            out.push(x);
        }
    }
    Ok((out, attempts))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub probes: usize,
    pub connected: usize,
    pub coverage: f64,
}

/// Fraction of probe states that connect to some roadmap vertex within
/// `rho` by a feasible straight edge.
pub fn coverage_of(roadmap: &Roadmap, model: &dyn FeasibilityModel, probes: &[Config], beta: f64) -> CoverageReport {
    use rayon::prelude::*;
    let tree = crate::roadmap::KdTree::new(roadmap.vertices());
    let connected = probes
        .par_iter()
        .filter(|x| {
            tree.within(x, roadmap.rho)
                .into_iter()
                .any(|v| check_edge(model, x, &roadmap.vertices()[v], beta, roadmap.edge_resolution).is_feasible())
        })
        .count();
    CoverageReport {
        probes: probes.len(),
        connected,
        coverage: if probes.is_empty() { 0.0 } else { connected as f64 / probes.len() as f64 },
    }
}

pub fn coverage(
    roadmap: &Roadmap,
    model: &dyn FeasibilityModel,
    space: &ConfigSpace,
    beta: f64,
    probes: usize,
    seed: u64,
) -> Result<CoverageReport> {
    if probes == 0 {
        return Err(Error::Metrics("coverage needs at least one probe".into()));
    }
    let samples = reference_feasible_sample(model, space, beta, probes, seed)?;
    Ok(coverage_of(roadmap, model, &samples, beta))
}

/// Mean and sample standard deviation.
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ConstantModel;

    #[test]
    fn mmd_hand_value() {
        let v = mmd_squared(&[vec![0.0]], &[vec![1.0]], &MmdConfig::fixed(1.0)).unwrap();
        assert!((v - (2.0 - 2.0 * (-0.5f64).exp())).abs() < 1e-15);
        assert!((v - 0.7869).abs() < 1e-4);
    }

    #[test]
    fn mmd_identical_is_zero() {
        let a = vec![vec![0.1, 0.2], vec![0.5, 0.9], vec![0.3, 0.3]];
        assert!(mmd_squared(&a, &a, &MmdConfig::default()).unwrap().abs() < 1e-15);
        assert!(mmd_squared(&a, &[], &MmdConfig::default()).is_err());
    }

    #[test]
    fn starvation_is_an_error() {
        let m = ConstantModel { dim: 1, probability: 0.1 };
        let space = ConfigSpace::cube(1, 0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = rejection_sample(&m, &space, 0.5, 0, &mut rng).unwrap();
        assert!(err.0.is_empty());
        assert!(reference_feasible_sample(&m, &space, 0.0, 5, 1).unwrap().len() == 5);
    }

    #[test]
    fn empty_roadmap_has_no_coverage() {
        let m = ConstantModel { dim: 2, probability: 1.0 };
        let r = Roadmap::from_parts(Vec::new(), Vec::new(), 0.5, 0.1, 0.01).unwrap();
        let space = ConfigSpace::cube(2, 0.0, 1.0).unwrap();
        assert_eq!(coverage(&r, &m, &space, 0.5, 50, 3).unwrap().coverage, 0.0);
    }
}
