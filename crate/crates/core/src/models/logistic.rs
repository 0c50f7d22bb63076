//! Ridge-regularized logistic regression over sparse feature rows, solved by
//! truncated Newton (conjugate-gradient inner solves, Armijo backtracking).

use super::sigmoid;

pub(crate) struct SparseLogistic<'a> {
    pub rows: &'a [Vec<(usize, f64)>],
    pub labels: &'a [f64],
    pub num_features: usize,
    pub ridge: f64,
}

pub(crate) struct LogisticFit {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl SparseLogistic<'_> {
    fn activations(&self, w: &[f64], b: f64) -> Vec<f64> {
        self.rows.iter().map(|row| b + row.iter().map(|(k, v)| w[*k] * v).sum::<f64>()).collect()
    }

    fn loss(&self, w: &[f64], b: f64) -> f64 {
        let m = self.rows.len() as f64;
        let data: f64 = self.activations(w, b).iter().zip(self.labels).map(|(s, t)| softplus(*s) - t * s).sum();
        data / m + 0.5 * self.ridge * w.iter().map(|v| v * v).sum::<f64>()
    }

    /// Gradient (weights then bias) and the curvature weights sigma(1-sigma).
    fn gradient(&self, w: &[f64], b: f64) -> (Vec<f64>, Vec<f64>) {
        let m = self.rows.len() as f64;
        let mut g = vec![0.0; self.num_features + 1];
        let mut curv = Vec::with_capacity(self.rows.len());
        for ((row, s), t) in self.rows.iter().zip(self.activations(w, b)).zip(self.labels) {
            let p = sigmoid(s);
            let r = (p - t) / m;
            for (k, v) in row {
                g[*k] += r * v;
            }
            g[self.num_features] += r;
            curv.push(p * (1.0 - p) / m);
        }
        for k in 0..self.num_features {
            g[k] += self.ridge * w[k];
        }
        (g, curv)
    }

    fn hess_vec(&self, curv: &[f64], v: &[f64]) -> Vec<f64> {
        let nf = self.num_features;
        let mut out = vec![0.0; nf + 1];
        for (row, c) in self.rows.iter().zip(curv) {
            let dot = v[nf] + row.iter().map(|(k, x)| v[*k] * x).sum::<f64>();
            let s = c * dot;
            for (k, x) in row {
                out[*k] += s * x;
            }
            out[nf] += s;
        }
        for k in 0..nf {
            out[k] += self.ridge * v[k];
        }
        out
    }

    pub fn solve(&self, max_newton: usize) -> LogisticFit {
        let nf = self.num_features;
        let mut w = vec![0.0; nf];
        let mut b = 0.0;
        let mut f = self.loss(&w, b);
        for _ in 0..max_newton {
            let (g, curv) = self.gradient(&w, b);
            let gnorm = norm(&g);
            if gnorm < 1e-10 {
                break;
            }
            let tol = gnorm * gnorm.sqrt().min(0.5);
            let step = conjugate_gradient(|v| self.hess_vec(&curv, v), &g, tol, 250);
            let slope: f64 = g.iter().zip(&step).map(|(a, b)| a * b).sum();
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let wn: Vec<f64> = w.iter().zip(&step).map(|(a, s)| a + t * s).collect();
                let bn = b + t * step[nf];
                let fnew = self.loss(&wn, bn);
                if fnew <= f + 1e-4 * t * slope {
                    w = wn;
                    b = bn;
                    f = fnew;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted || t * norm(&step) < 1e-12 {
                break;
            }
        }
        LogisticFit { weights: w, bias: b }
    }
}

/// Solves `A x = -g` for symmetric positive-definite `A` given as a product.
fn conjugate_gradient(apply: impl Fn(&[f64]) -> Vec<f64>, g: &[f64], tol: f64, max_iter: usize) -> Vec<f64> {
    let n = g.len();
    let mut x = vec![0.0; n];
    let mut r: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut p = r.clone();
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    for _ in 0..max_iter {
        if rr.sqrt() <= tol {
            break;
        }
        let ap = apply(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    x
}

fn softplus(s: f64) -> f64 {
    if s > 0.0 {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_one_feature() {
        // feature 1 on positives, 0 on negatives
        let rows: Vec<Vec<(usize, f64)>> = (0..20).map(|i| if i < 10 { vec![(0, 1.0)] } else { vec![] }).collect();
        let labels: Vec<f64> = (0..20).map(|i| if i < 10 { 1.0 } else { 0.0 }).collect();
        let fit = SparseLogistic { rows: &rows, labels: &labels, num_features: 1, ridge: 0.01 }.solve(50);
        assert!(fit.weights[0] > 2.0);
        assert!(fit.bias < -1.0);
        assert!(sigmoid(fit.weights[0] + fit.bias) > 0.5);
    }
}
