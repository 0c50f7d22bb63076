use std::path::Path;

use serde::{Deserialize, Serialize};

use super::features::RbfFeatures;
use super::{log_sigmoid, sigmoid, FeasibilityModel};
use crate::error::{Error, Result};

/// A labeled planar measurement; `free` is the label `z = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabeledPoint {
    pub x: [f64; 2],
    pub free: bool,
}

impl LabeledPoint {
    /// Reads `x,y,z_label` rows. A non-numeric first row is treated as a header.
    pub fn load_csv(path: &Path) -> Result<Vec<LabeledPoint>> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::parse(path, e))?;
        let mut out = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::parse(path, e))?;
            if rec.len() != 3 {
                return Err(Error::parse(path, format!("row {i}: expected x,y,z_label")));
            }
            let x = rec[0].parse::<f64>();
            if i == 0 && x.is_err() {
                continue;
            }
            let bad = |what: &str| Error::parse(path, format!("row {i}: bad {what}"));
            let x = x.map_err(|_| bad("x"))?;
            let y = rec[1].parse::<f64>().map_err(|_| bad("y"))?;
            let free = match &rec[2] {
                "0" => false,
                "1" => true,
                _ => return Err(bad("z_label (must be 0 or 1)")),
            };
            out.push(LabeledPoint { x: [x, y], free });
        }
        Ok(out)
    }

    pub fn save_csv(points: &[LabeledPoint], path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(path, e))?;
        let io = |e: csv::Error| Error::parse(path, e);
        w.write_record(["x", "y", "z_label"]).map_err(io)?;
        for p in points {
            w.write_record([
                format!("{}", p.x[0]),
                format!("{}", p.x[1]),
                if p.free { "1".into() } else { "0".into() },
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BhmFitConfig {
    pub lengthscale: f64,
    pub prior_variance: f64,
    pub max_iters: usize,
    /// Adds a constant feature with its own weight.
    #[serde(default)]
    pub bias: bool,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-6
}

impl Default for BhmFitConfig {
    fn default() -> Self {
        BhmFitConfig { lengthscale: 0.5, prior_variance: 10.0, max_iters: 200, bias: false, tol: default_tol() }
    }
}

/// Bayesian logistic regression over RBF features with a diagonal Gaussian
/// posterior over the weights, `p(z=1 | x, w) = sigmoid(w . phi(x))`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(from = "BhmData", into = "BhmData")]
pub struct BayesianHilbertMap {
    mean: Vec<f64>,
    covariance_diag: Vec<f64>,
    bias: Option<(f64, f64)>,
    features: RbfFeatures,
}

#[derive(Serialize, Deserialize)]
struct BhmData {
    centers: Vec<[f64; 2]>,
    mean: Vec<f64>,
    covariance_diag: Vec<f64>,
    lengthscale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bias_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bias_variance: Option<f64>,
}

impl From<BhmData> for BayesianHilbertMap {
    fn from(d: BhmData) -> Self {
        BayesianHilbertMap {
            mean: d.mean,
            covariance_diag: d.covariance_diag,
            bias: d.bias_mean.map(|m| (m, d.bias_variance.unwrap_or(0.0))),
            features: RbfFeatures::new(d.centers, d.lengthscale),
        }
    }
}

impl From<BayesianHilbertMap> for BhmData {
    fn from(m: BayesianHilbertMap) -> Self {
        BhmData {
            centers: m.features.centers().to_vec(),
            lengthscale: m.features.lengthscale(),
            mean: m.mean,
            covariance_diag: m.covariance_diag,
            bias_mean: m.bias.map(|b| b.0),
            bias_variance: m.bias.map(|b| b.1),
        }
    }
}

/// Jaakkola-Jordan coefficient `tanh(xi/2) / (4 xi)`.
fn jj_lambda(xi: f64) -> f64 {
    if xi.abs() < 1e-6 {
        0.125 - xi * xi / 96.0
    } else {
        (0.5 * xi).tanh() / (4.0 * xi)
    }
}

const MODERATION: f64 = std::f64::consts::PI / 8.0;

impl BayesianHilbertMap {
    pub fn new(
        centers: Vec<[f64; 2]>,
        mean: Vec<f64>,
        covariance_diag: Vec<f64>,
        lengthscale: f64,
        bias: Option<(f64, f64)>,
    ) -> Result<Self> {
        if centers.len() != mean.len() || mean.len() != covariance_diag.len() {
            return Err(Error::Model("BHM centers, mean and covariance lengths differ".into()));
        }
        if covariance_diag.iter().any(|v| !(*v > 0.0)) || !(lengthscale > 0.0) {
            return Err(Error::Model("BHM needs positive variances and lengthscale".into()));
        }
        Ok(BayesianHilbertMap { mean, covariance_diag, bias, features: RbfFeatures::new(centers, lengthscale) })
    }

    /// Variational fit with the local quadratic (Jaakkola-Jordan) bound and a
    /// mean-field diagonal posterior. Each outer iteration refreshes the
    /// local variational parameters and sweeps the weights once.
    pub fn fit(points: &[LabeledPoint], centers: Vec<[f64; 2]>, cfg: &BhmFitConfig) -> Result<Self> {
        if !points.iter().any(|p| p.free) || !points.iter().any(|p| !p.free) {
            return Err(Error::Model("BHM fit needs at least one free (z=1) and one occupied (z=0) point".into()));
        }
        if cfg.max_iters == 0 || !(cfg.prior_variance > 0.0) || !(cfg.lengthscale > 0.0) {
            return Err(Error::Model("BHM fit needs max_iters >= 1, prior_variance > 0 and lengthscale > 0".into()));
        }
        let features = RbfFeatures::new(centers, cfg.lengthscale);
        let k = features.len();
        let nw = k + usize::from(cfg.bias);
        let rows: Vec<Vec<(usize, f64)>> = points
            .iter()
            .map(|p| {
                let mut r = features.row(&p.x);
                if cfg.bias {
                    r.push((k, 1.0));
                }
                r
            })
            .collect();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nw];
        for (m, row) in rows.iter().enumerate() {
            for (j, v) in row {
                cols[*j].push((m, *v));
            }
        }
        let targets: Vec<f64> = points.iter().map(|p| if p.free { 0.5 } else { -0.5 }).collect();
        // sum_m (t_m - 1/2) phi_mj is fixed
        let drive: Vec<f64> = cols.iter().map(|c| c.iter().map(|(m, v)| targets[*m] * v).sum()).collect();

        let prior_prec = 1.0 / cfg.prior_variance;
        let mut mu = vec![0.0; nw];
        let mut var = vec![cfg.prior_variance; nw];
        let mut act = vec![0.0; rows.len()];
        let mut lambda = vec![0.125; rows.len()];
        for _ in 0..cfg.max_iters {
            for (m, row) in rows.iter().enumerate() {
                let second: f64 = row.iter().map(|(j, v)| v * v * var[*j]).sum();
                let xi = (act[m] * act[m] + second).sqrt();
                lambda[m] = jj_lambda(xi);
            }
            let mut change: f64 = 0.0;
            for j in 0..nw {
                let mut prec = prior_prec;
                let mut cross = 0.0;
                for (m, v) in &cols[j] {
                    prec += 2.0 * lambda[*m] * v * v;
                    cross += lambda[*m] * v * (act[*m] - v * mu[j]);
                }
                let new_mu = (drive[j] - 2.0 * cross) / prec;
                let new_var = 1.0 / prec;
                let delta = new_mu - mu[j];
                if delta != 0.0 {
                    for (m, v) in &cols[j] {
                        act[*m] += v * delta;
                    }
                }
                change = change.max(delta.abs()).max((new_var - var[j]).abs());
                mu[j] = new_mu;
                var[j] = new_var;
            }
            if change < cfg.tol {
                break;
            }
        }
        let bias = cfg.bias.then(|| (mu[k], var[k]));
        mu.truncate(k);
        var.truncate(k);
        Ok(BayesianHilbertMap { mean: mu, covariance_diag: var, bias, features })
    }

    pub fn centers(&self) -> &[[f64; 2]] {
        self.features.centers()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance_diag(&self) -> &[f64] {
        &self.covariance_diag
    }

    pub fn bias(&self) -> Option<(f64, f64)> {
        self.bias
    }

    pub fn lengthscale(&self) -> f64 {
        self.features.lengthscale()
    }

    /// Mean activation and predictive variance of `w . phi(x)`.
    pub fn activation_moments(&self, x: &[f64]) -> (f64, f64) {
        let (mut a, mut v) = self.bias.unwrap_or((0.0, 0.0));
        self.features.for_each(x, |k, phi, _| {
            a += self.mean[k] * phi;
            v += self.covariance_diag[k] * phi * phi;
        });
        (a, v)
    }

    fn moderated_activation(&self, x: &[f64]) -> f64 {
        let (a, v) = self.activation_moments(x);
        a / (1.0 + MODERATION * v).sqrt()
    }

    /// Moderated predictive `sigmoid(mu . phi / sqrt(1 + pi/8 phi' S phi))`.
    pub fn predict(&self, x: &[f64]) -> f64 {
        sigmoid(self.moderated_activation(x))
    }
}

impl FeasibilityModel for BayesianHilbertMap {
    fn dim(&self) -> usize {
        2
    }

    fn log_likelihood(&self, x: &[f64]) -> f64 {
        log_sigmoid(self.moderated_activation(x))
    }

    fn grad_log_likelihood(&self, x: &[f64]) -> Vec<f64> {
        let inv_l2 = 1.0 / (self.lengthscale() * self.lengthscale());
        let (mut a, mut v) = self.bias.unwrap_or((0.0, 0.0));
        let mut ga = [0.0; 2];
        let mut gv = [0.0; 2];
        self.features.for_each(x, |k, phi, diff| {
            a += self.mean[k] * phi;
            v += self.covariance_diag[k] * phi * phi;
            for i in 0..2 {
                let dphi = -phi * diff[i] * inv_l2;
                ga[i] += self.mean[k] * dphi;
                gv[i] += 2.0 * self.covariance_diag[k] * phi * dphi;
            }
        });
        let base = 1.0 + MODERATION * v;
        let kappa = base.sqrt().recip();
        let s = a * kappa;
        let outer = sigmoid(-s);
        (0..2).map(|i| outer * (kappa * ga[i] - 0.5 * a * MODERATION * gv[i] / (base * base.sqrt()))).collect()
    }

    fn probability(&self, x: &[f64]) -> f64 {
        self.predict(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_activation_is_one_half() {
        let m = BayesianHilbertMap::new(vec![[0.0, 0.0]], vec![0.0], vec![1.0], 0.5, None).unwrap();
        assert_eq!(m.predict(&[0.1, 0.2]), 0.5);
        let w = BayesianHilbertMap::new(vec![[0.0, 0.0]], vec![3.0], vec![1.0], 0.5, None).unwrap();
        assert!((w.predict(&[50.0, 50.0]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_label_dataset_rejected() {
        let pts = vec![LabeledPoint { x: [0.0, 0.0], free: true }; 5];
        let err = BayesianHilbertMap::fit(&pts, vec![[0.0, 0.0]], &BhmFitConfig::default()).unwrap_err();
        assert!(err.to_string().contains("occupied"));
    }

    #[test]
    fn variance_pulls_toward_one_half() {
        let lo = BayesianHilbertMap::new(vec![[0.0, 0.0]], vec![2.0], vec![0.01], 0.5, None).unwrap();
        let hi = BayesianHilbertMap::new(vec![[0.0, 0.0]], vec![2.0], vec![25.0], 0.5, None).unwrap();
        assert!(hi.predict(&[0.0, 0.0]) < lo.predict(&[0.0, 0.0]));
        assert!(hi.predict(&[0.0, 0.0]) > 0.5);
    }

    #[test]
    fn csv_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pts.csv");
        let pts = vec![LabeledPoint { x: [0.5, 1.0], free: true }, LabeledPoint { x: [-2.0, 3.25], free: false }];
        LabeledPoint::save_csv(&pts, &path).unwrap();
        assert_eq!(LabeledPoint::load_csv(&path).unwrap(), pts);
        std::fs::write(&path, "1,2,3\n").unwrap();
        assert!(LabeledPoint::load_csv(&path).is_err());
    }
}
