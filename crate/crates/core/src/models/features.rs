/// Gaussian RBF features `phi_k(x) = exp(-|x - c_k|^2 / (2 l^2))` over planar
/// centers, truncated beyond `CUTOFF` lengthscales and bucketed on a dense
/// grid so a query touches only nearby centers.
#[derive(Clone, Debug)]
pub(crate) struct RbfFeatures {
    centers: Vec<[f64; 2]>,
    lengthscale: f64,
    cutoff_sq: f64,
    cell: f64,
    origin: [i64; 2],
    shape: [i64; 2],
    buckets: Vec<Vec<usize>>,
}

/// Past this many lengthscales `exp(-r^2 / 2)` is below double precision
/// epsilon, so dropping the tail leaves values and derivatives continuous.
const CUTOFF: f64 = 8.5;
/// Buckets per cutoff radius.
const SPLIT: i64 = 2;

impl RbfFeatures {
    pub fn new(centers: Vec<[f64; 2]>, lengthscale: f64) -> Self {
        let cell = CUTOFF * lengthscale / SPLIT as f64;
        let keys: Vec<[i64; 2]> = centers.iter().map(|c| Self::key(c, cell)).collect();
        let lo = keys.iter().fold([i64::MAX; 2], |m, k| [m[0].min(k[0]), m[1].min(k[1])]);
        let hi = keys.iter().fold([i64::MIN; 2], |m, k| [m[0].max(k[0]), m[1].max(k[1])]);
        let (origin, shape) =
            if keys.is_empty() { ([0, 0], [0, 0]) } else { (lo, [hi[0] - lo[0] + 1, hi[1] - lo[1] + 1]) };
        let mut buckets = vec![Vec::new(); (shape[0] * shape[1]) as usize];
        for (k, key) in keys.iter().enumerate() {
            buckets[((key[1] - origin[1]) * shape[0] + key[0] - origin[0]) as usize].push(k);
        }
        RbfFeatures { centers, lengthscale, cutoff_sq: (CUTOFF * lengthscale).powi(2), cell, origin, shape, buckets }
    }

    fn key(p: &[f64; 2], cell: f64) -> [i64; 2] {
        [(p[0] / cell).floor() as i64, (p[1] / cell).floor() as i64]
    }

    pub fn centers(&self) -> &[[f64; 2]] {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn lengthscale(&self) -> f64 {
        self.lengthscale
    }

    /// Calls `f(k, phi_k, x - c_k)` for every center within the cutoff, in a
    /// fixed order that depends only on the centers and `x`.
    pub fn for_each(&self, x: &[f64], mut f: impl FnMut(usize, f64, [f64; 2])) {
        let p = [x[0], x[1]];
        if !(p[0].is_finite() && p[1].is_finite()) {
            return;
        }
        let b = Self::key(&p, self.cell);
        let inv = 1.0 / (2.0 * self.lengthscale * self.lengthscale);
        let y0 = (b[1] - SPLIT).max(self.origin[1]);
        let y1 = (b[1] + SPLIT).min(self.origin[1] + self.shape[1] - 1);
        let x0 = (b[0] - SPLIT).max(self.origin[0]);
        let x1 = (b[0] + SPLIT).min(self.origin[0] + self.shape[0] - 1);
        for by in y0..=y1 {
            for bx in x0..=x1 {
                let slot = ((by - self.origin[1]) * self.shape[0] + bx - self.origin[0]) as usize;
                for &k in &self.buckets[slot] {
                    let c = self.centers[k];
                    let diff = [p[0] - c[0], p[1] - c[1]];
                    let d2 = diff[0] * diff[0] + diff[1] * diff[1];
                    if d2 <= self.cutoff_sq {
                        f(k, (-d2 * inv).exp(), diff);
                    }
                }
            }
        }
    }

    /// Sparse feature row `(k, phi_k)`.
    pub fn row(&self, x: &[f64]) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        self.for_each(x, |k, phi, _| out.push((k, phi)));
        out
    }
}

/// Regular grid of centers covering `[min, max]` at `spacing`, inclusive of
/// both ends.
pub fn grid_centers(min: [f64; 2], max: [f64; 2], spacing: f64) -> Vec<[f64; 2]> {
    let nx = ((max[0] - min[0]) / spacing).round().max(0.0) as usize + 1;
    let ny = ((max[1] - min[1]) / spacing).round().max(0.0) as usize + 1;
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            out.push([min[0] + i as f64 * spacing, min[1] + j as f64 * spacing]);
        }
    }
    out
}
