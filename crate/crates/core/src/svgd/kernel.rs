use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kernel bandwidth `h`: fixed, or the median heuristic recomputed from the
/// current particles. Serialized as a number or the string `"median"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bandwidth {
    Fixed(f64),
    Median,
}

impl Serialize for Bandwidth {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Bandwidth::Fixed(h) => s.serialize_f64(*h),
            Bandwidth::Median => s.serialize_str("median"),
        }
    }
}

impl<'de> Deserialize<'de> for Bandwidth {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Name(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(h) => Ok(Bandwidth::Fixed(h)),
            Raw::Name(s) if s == "median" => Ok(Bandwidth::Median),
            Raw::Name(s) => {
                Err(serde::de::Error::custom(format!("bandwidth must be a number or \"median\", got {s:?}")))
            }
        }
    }
}

/// Anisotropic RBF kernel `k(xj, xi) = exp(-(xj - xi)' M (xj - xi) / (2h))`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelConfig {
    pub metric: DMatrix<f64>,
    pub bandwidth: Bandwidth,
}

impl KernelConfig {
    pub fn isotropic(dim: usize, bandwidth: Bandwidth) -> Self {
        KernelConfig { metric: DMatrix::identity(dim, dim), bandwidth }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.metric.is_square() {
            return Err(Error::Svgd("kernel metric must be square".into()));
        }
        if (&self.metric - self.metric.transpose()).amax() > 1e-12 * self.metric.amax().max(1.0) {
            return Err(Error::Svgd("kernel metric must be symmetric".into()));
        }
        if let Bandwidth::Fixed(h) = self.bandwidth {
            if !(h > 0.0) {
                return Err(Error::Svgd(format!("fixed bandwidth must be > 0, got {h}")));
            }
        }
        Ok(())
    }
}

/// Kernel value and its gradient with respect to `xj`:
/// `grad = (1/h) M (xi - xj) k`.
pub fn kernel_eval(metric: &DMatrix<f64>, h: f64, xi: &[f64], xj: &[f64]) -> (f64, Vec<f64>) {
    let d = xi.len();
    let delta: Vec<f64> = xi.iter().zip(xj).map(|(a, b)| a - b).collect();
    let mut m_delta = vec![0.0; d];
    for r in 0..d {
        for c in 0..d {
            m_delta[r] += metric[(r, c)] * delta[c];
        }
    }
    let quad: f64 = delta.iter().zip(&m_delta).map(|(a, b)| a * b).sum();
    let value = (-quad / (2.0 * h)).exp();
    (value, m_delta.into_iter().map(|v| v * value / h).collect())
}

/// Squared distance under the metric.
pub(crate) fn metric_dist_sq(metric: &DMatrix<f64>, a: &[f64], b: &[f64]) -> f64 {
    let d = a.len();
    let mut s = 0.0;
    for r in 0..d {
        let dr = a[r] - b[r];
        for c in 0..d {
            s += dr * metric[(r, c)] * (a[c] - b[c]);
        }
    }
    s
}

/// Median heuristic `h = med^2 / log(N + 1)` over pairwise metric distances.
/// Falls back to 1 for fewer than two distinct particles.
pub fn median_bandwidth(points: &[&[f64]], metric: &DMatrix<f64>) -> f64 {
    let n = points.len();
    let mut d2: Vec<f64> = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            d2.push(metric_dist_sq(metric, points[i], points[j]).max(0.0));
        }
    }
    if d2.is_empty() {
        return 1.0;
    }
    let m = d2.len();
    let (below, upper, _) = d2.select_nth_unstable_by(m / 2, |a, b| a.total_cmp(b));
    let upper = upper.sqrt();
    // median of distances, squared
    let med = if m % 2 == 1 {
        upper
    } else {
        let lower = below.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower.sqrt() + upper)
    };
    let h = med * med / ((n + 1) as f64).ln();
    if h > 0.0 && h.is_finite() {
        h
    } else {
        1.0
    }
}
