//! Statistical estimators over sampled configurations: binned one- and
//! two-point correlation estimates with standard errors, bin-edge policy,
//! and the two-sample Kolmogorov–Smirnov distance.
//!
//! Everything is a pure fold over the draw collection; partial histograms
//! merge associatively, so parallel accumulation is exact.

use crate::ensemble::PointConfiguration;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Binned estimate of the one-point correlation `rho^1`.
///
/// `density(i) = counts[i] / (draws * width_i)`; the per-bin standard error
/// is `sqrt(counts[i]) / (draws * width_i)` (Poisson-scale, conservative for
/// a determinantal process, whose counts are underdispersed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedDensity {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub draws: usize,
}

impl BinnedDensity {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    pub fn center(&self, i: usize) -> f64 {
        0.5 * (self.edges[i] + self.edges[i + 1])
    }

    pub fn density(&self, i: usize) -> f64 {
        self.counts[i] as f64 / (self.draws as f64 * self.width(i))
    }

    pub fn stderr(&self, i: usize) -> f64 {
        (self.counts[i] as f64).sqrt() / (self.draws as f64 * self.width(i))
    }

    /// Total mass `sum_i density_i * width_i`: the mean number of points
    /// landing inside the binned range per draw.
    pub fn total_mass(&self) -> f64 {
        self.counts.iter().sum::<u64>() as f64 / self.draws as f64
    }

    /// Associative merge of partial histograms over disjoint draw sets.
    pub fn merge(&mut self, other: &BinnedDensity) -> Result<()> {
        if self.edges != other.edges {
            return Err(Error::InvalidConfig(
                "cannot merge histograms with different edges".into(),
            ));
        }
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        self.draws += other.draws;
        Ok(())
    }

    /// CSV rows `bin_lo,bin_hi,estimate,stderr`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,estimate,stderr\n");
        for i in 0..self.bins() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.edges[i],
                self.edges[i + 1],
                self.density(i),
                self.stderr(i)
            ));
        }
        out
    }
}

/// Histogram of particle positions across draws.
pub fn estimate_rho1(draws: &[PointConfiguration], edges: &[f64]) -> Result<BinnedDensity> {
    if draws.is_empty() {
        return Err(Error::EmptySample("estimate_rho1 needs draws".into()));
    }
    validate_edges(edges)?;
    let mut counts = vec![0u64; edges.len() - 1];
    for d in draws {
        for &p in d.points() {
            if let Some(b) = locate(edges, p) {
                counts[b] += 1;
            }
        }
    }
    Ok(BinnedDensity {
        edges: edges.to_vec(),
        counts,
        draws: draws.len(),
    })
}

/// Binned estimate of the two-point correlation `rho^2` from ordered pair
/// counts. Cells with coinciding y/z bins use the falling-factorial count
/// `n (n - 1)`, the estimator consistent with correlation functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDensity2D {
    pub edges_y: Vec<f64>,
    pub edges_z: Vec<f64>,
    /// per-cell sums of per-draw ordered pair counts
    pub sum: Vec<f64>,
    /// per-cell sums of squares (for standard errors)
    pub sumsq: Vec<f64>,
    pub draws: usize,
}

impl PairDensity2D {
    fn cells(&self) -> (usize, usize) {
        (self.edges_y.len() - 1, self.edges_z.len() - 1)
    }

    fn area(&self, i: usize, j: usize) -> f64 {
        (self.edges_y[i + 1] - self.edges_y[i]) * (self.edges_z[j + 1] - self.edges_z[j])
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.edges_z.len() - 1) + j
    }

    pub fn density(&self, i: usize, j: usize) -> f64 {
        self.sum[self.idx(i, j)] / (self.draws as f64 * self.area(i, j))
    }

    pub fn stderr(&self, i: usize, j: usize) -> f64 {
        let m = self.draws as f64;
        let k = self.idx(i, j);
        let mean = self.sum[k] / m;
        let var = (self.sumsq[k] / m - mean * mean).max(0.0) * m / (m - 1.0).max(1.0);
        (var / m).sqrt() / self.area(i, j)
    }

    pub fn merge(&mut self, other: &PairDensity2D) -> Result<()> {
        if self.edges_y != other.edges_y || self.edges_z != other.edges_z {
            return Err(Error::InvalidConfig(
                "cannot merge pair histograms with different edges".into(),
            ));
        }
        for (s, o) in self.sum.iter_mut().zip(&other.sum) {
            *s += o;
        }
        for (s, o) in self.sumsq.iter_mut().zip(&other.sumsq) {
            *s += o;
        }
        self.draws += other.draws;
        Ok(())
    }

    /// CSV rows `y_lo,y_hi,z_lo,z_hi,estimate,stderr`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("y_lo,y_hi,z_lo,z_hi,estimate,stderr\n");
        let (ny, nz) = self.cells();
        for i in 0..ny {
            for j in 0..nz {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    self.edges_y[i],
                    self.edges_y[i + 1],
                    self.edges_z[j],
                    self.edges_z[j + 1],
                    self.density(i, j),
                    self.stderr(i, j)
                ));
            }
        }
        out
    }
}

/// Ordered-pair histogram: for each draw and cell `(A, B)` the count is
/// `n_A n_B - n_{A \cap B}` (pairs with distinct members).
pub fn estimate_rho2(
    draws: &[PointConfiguration],
    edges_y: &[f64],
    edges_z: &[f64],
) -> Result<PairDensity2D> {
    if draws.is_empty() {
        return Err(Error::EmptySample("estimate_rho2 needs draws".into()));
    }
    validate_edges(edges_y)?;
    validate_edges(edges_z)?;
    let ny = edges_y.len() - 1;
    let nz = edges_z.len() - 1;
    let mut sum = vec![0.0; ny * nz];
    let mut sumsq = vec![0.0; ny * nz];
    for d in draws {
        let cy = bin_counts(edges_y, d.points());
        let cz = bin_counts(edges_z, d.points());
        for i in 0..ny {
            for j in 0..nz {
                let lo = edges_y[i].max(edges_z[j]);
                let hi = edges_y[i + 1].min(edges_z[j + 1]);
                let overlap = if lo < hi {
                    d.points().iter().filter(|&&p| p >= lo && p < hi).count()
                } else {
                    0
                };
                let v = (cy[i] * cz[j]) as f64 - overlap as f64;
                sum[i * nz + j] += v;
                sumsq[i * nz + j] += v * v;
            }
        }
    }
    Ok(PairDensity2D {
        edges_y: edges_y.to_vec(),
        edges_z: edges_z.to_vec(),
        sum,
        sumsq,
        draws: draws.len(),
    })
}

/// Quantile-based bin edges over the pooled points of `draws`, sized so
/// each bin expects at least `min_expected` counts (capped at `max_bins`
/// bins). The outermost edges are stretched past the extreme points so
/// nothing falls off the histogram.
pub fn edges_with_min_expected(
    draws: &[PointConfiguration],
    min_expected: usize,
    max_bins: usize,
) -> Result<Vec<f64>> {
    if draws.is_empty() {
        return Err(Error::EmptySample("edge policy needs draws".into()));
    }
    let mut pooled: Vec<f64> = draws
        .iter()
        .flat_map(|d| d.points().iter().copied())
        .collect();
    pooled.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let total = pooled.len();
    let bins = (total / min_expected.max(1)).clamp(1, max_bins.max(1));
    let mut edges: Vec<f64> = (0..=bins)
        .map(|k| pooled[(k * (total - 1)) / bins])
        .collect();
    let span = (edges[bins] - edges[0]).max(1e-12);
    edges[0] = (edges[0] - 1e-9 * span).max(0.0);
    edges[bins] += 1e-9 * span;
    edges.dedup();
    if edges.len() < 2 {
        return Err(Error::InvalidConfig(
            "degenerate sample: cannot build bin edges".into(),
        ));
    }
    Ok(edges)
}

/// Two-sample Kolmogorov–Smirnov statistic and its asymptotic p-value.
///
/// Invariant under any common strictly increasing transform of both samples
/// (it only sees ranks).
pub fn ks_distance(sample_a: &[f64], sample_b: &[f64]) -> Result<(f64, f64)> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(Error::EmptySample("ks_distance needs both samples".into()));
    }
    let mut a = sample_a.to_vec();
    let mut b = sample_b.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    Ok((d, ks_q(lambda)))
}

/// Asymptotic survival function `Q(lambda) = 2 sum (-1)^{j-1} e^{-2 j^2 lambda^2}`.
fn ks_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j as f64 * lambda).powi(2)).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn validate_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 || edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(
            "bin edges must be strictly increasing with at least one bin".into(),
        ));
    }
    Ok(())
}

fn locate(edges: &[f64], p: f64) -> Option<usize> {
    if p < edges[0] || p >= edges[edges.len() - 1] {
        return None;
    }
    // binary search for the half-open bin [e_i, e_{i+1})
    let mut lo = 0usize;
    let mut hi = edges.len() - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if p < edges[mid] {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(lo)
}

fn bin_counts(edges: &[f64], points: &[f64]) -> Vec<usize> {
    let mut counts = vec![0usize; edges.len() - 1];
    for &p in points {
        if let Some(b) = locate(edges, p) {
            counts[b] += 1;
        }
    }
    counts
}
