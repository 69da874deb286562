//! Distance covariance and energy statistics on rank clouds.
//!
//! Two families of routines live here. [`dcov_sq`] and [`energy_sq`] take
//! arbitrary clouds and are the reference definitions. The kernels
//! ([`CenteredDistances`], [`DistanceMatrix`]) precompute the grid geometry
//! once and evaluate the same statistics for a relabelling of the grid in
//! `O(n²)` without recomputing distances; observed statistics and null
//! draws both go through the kernels so that equal configurations give
//! bitwise-equal values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranks::PointCloud;

/// Largest negative rounding residue silently reported as zero.
pub const NEGATIVE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatKind {
    Rdcov,
    Energy,
}

/// A statistic together with the factor that scales it for testing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatisticValue {
    pub kind: StatKind,
    pub raw: f64,
    pub scaled: f64,
}

impl StatisticValue {
    pub fn new(kind: StatKind, raw: f64, scale: f64) -> Self {
        StatisticValue {
            kind,
            raw,
            scaled: scale * raw,
        }
    }
}

/// Maps tiny negative rounding residue to zero; anything more negative is
/// a bug because both statistics are nonnegative.
pub fn clamp_nonnegative(value: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -NEGATIVE_SLACK {
        Ok(0.0)
    } else {
        Err(Error::Internal(format!(
            "statistic evaluated to {value:e}, below the rounding slack"
        )))
    }
}

/// Kahan–Babuška compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

#[inline]
fn distance(a: &[f64], b: &[f64]) -> f64 {
    crate::assign::squared_distance(a, b).sqrt()
}

/// Pairwise Euclidean distances, full symmetric `n × n` storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Distances between the `n` points of a flat row-major buffer.
    pub fn from_flat(flat: &[f64], d: usize) -> Self {
        let n = flat.len() / d;
        let row = |i: usize| &flat[i * d..(i + 1) * d];
        let mut data = vec![0.0; n * n];
        for k in 0..n {
            for l in k + 1..n {
                let v = distance(row(k), row(l));
                data[k * n + l] = v;
                data[l * n + k] = v;
            }
        }
        DistanceMatrix { n, data }
    }

    pub fn from_cloud(cloud: &PointCloud) -> Self {
        Self::from_flat(cloud.as_flat(), cloud.d())
    }

    pub(crate) fn from_raw(n: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        DistanceMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.n..(k + 1) * self.n]
    }

    /// Sums of distances between and within groups.
    ///
    /// `labels[k] < groups` is the group of point `k`. Entry `(g, h)` of
    /// the returned row-major `groups × groups` table is the sum over
    /// unordered pairs `{k, l}`, `k != l`, with one point in `g` and the
    /// other in `h`; the table is symmetric.
    pub fn group_sums(&self, labels: &[usize], groups: usize) -> Vec<f64> {
        debug_assert_eq!(labels.len(), self.n);
        let mut totals = vec![Compensated::default(); groups * groups];
        let mut local = vec![0.0; groups];
        for k in 0..self.n {
            local.fill(0.0);
            let row = self.row(k);
            for l in k + 1..self.n {
                local[labels[l]] += row[l];
            }
            let g = labels[k];
            for (h, &s) in local.iter().enumerate() {
                let (lo, hi) = if g <= h { (g, h) } else { (h, g) };
                totals[lo * groups + hi].add(s);
            }
        }
        let mut out = vec![0.0; groups * groups];
        for g in 0..groups {
            for h in g..groups {
                let v = totals[g * groups + h].total();
                out[g * groups + h] = v;
                out[h * groups + g] = v;
            }
        }
        out
    }
}

/// Energy statistic between groups `g` and `h` from [`DistanceMatrix::group_sums`].
pub fn energy_from_group_sums(sums: &[f64], sizes: &[usize], g: usize, h: usize) -> f64 {
    let k = sizes.len();
    let (m, n) = (sizes[g] as f64, sizes[h] as f64);
    2.0 * sums[g * k + h] / (m * n) - 2.0 * sums[g * k + g] / (m * m) - 2.0 * sums[h * k + h] / (n * n)
}

/// Double-centred distance matrix `A_kl = a_kl - ā_k· - ā_·l + ā_··`.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredDistances {
    n: usize,
    data: Vec<f64>,
}

impl CenteredDistances {
    pub fn from_distances(dist: &DistanceMatrix) -> Self {
        let n = dist.n;
        let nf = n as f64;
        let row_means: Vec<f64> = (0..n)
            .map(|k| {
                let mut s = Compensated::default();
                dist.row(k).iter().for_each(|&v| s.add(v));
                s.total() / nf
            })
            .collect();
        let mut g = Compensated::default();
        row_means.iter().for_each(|&v| g.add(v));
        let grand = g.total() / nf;
        let mut data = Vec::with_capacity(n * n);
        for k in 0..n {
            let row = dist.row(k);
            data.extend((0..n).map(|l| row[l] - row_means[k] - row_means[l] + grand));
        }
        CenteredDistances { n, data }
    }

    pub fn from_flat(flat: &[f64], d: usize) -> Self {
        Self::from_distances(&DistanceMatrix::from_flat(flat, d))
    }

    pub fn from_cloud(cloud: &PointCloud) -> Self {
        Self::from_flat(cloud.as_flat(), cloud.d())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.n..(k + 1) * self.n]
    }
}

/// `(1/n²) Σ_kl A[pa(k), pa(l)] · B[pb(k), pb(l)]`, the squared distance
/// covariance of the clouds whose point `k` is point `pa(k)` of the first
/// geometry and point `pb(k)` of the second. `None` means identity.
///
/// Summation runs over `k` in increasing order with each row's upper
/// triangle summed plainly and rows combined with compensation.
pub fn centered_cross(
    a: &CenteredDistances,
    pa: Option<&[usize]>,
    b: &CenteredDistances,
    pb: Option<&[usize]>,
) -> f64 {
    let n = a.n;
    debug_assert_eq!(n, b.n);
    let mut diag = Compensated::default();
    let mut off = Compensated::default();
    for k in 0..n {
        let ka = pa.map_or(k, |p| p[k]);
        let kb = pb.map_or(k, |p| p[k]);
        let ra = a.row(ka);
        let rb = b.row(kb);
        diag.add(ra[ka] * rb[kb]);
        let s: f64 = match (pa, pb) {
            (None, None) => (k + 1..n).map(|l| ra[l] * rb[l]).sum(),
            (None, Some(pb)) => (k + 1..n).map(|l| ra[l] * rb[pb[l]]).sum(),
            (Some(pa), None) => (k + 1..n).map(|l| ra[pa[l]] * rb[l]).sum(),
            (Some(pa), Some(pb)) => (k + 1..n).map(|l| ra[pa[l]] * rb[pb[l]]).sum(),
        };
        off.add(s);
    }
    (diag.total() + 2.0 * off.total()) / (n as f64 * n as f64)
}

/// Squared sample distance covariance of two clouds with equal counts,
/// computed through double-centred distance matrices.
pub fn dcov_sq(rx: &PointCloud, ry: &PointCloud) -> Result<f64> {
    if rx.n() != ry.n() {
        return Err(Error::Shape(format!(
            "distance covariance needs equal counts, got {} and {}",
            rx.n(),
            ry.n()
        )));
    }
    let a = CenteredDistances::from_cloud(rx);
    let b = CenteredDistances::from_cloud(ry);
    clamp_nonnegative(centered_cross(&a, None, &b, None))
}

/// Squared energy distance
/// `(2/mn)ΣΣ|x_i - y_j| - (1/m²)ΣΣ|x_i - x_j| - (1/n²)ΣΣ|y_i - y_j|`.
pub fn energy_sq(rx: &PointCloud, ry: &PointCloud) -> Result<f64> {
    if rx.d() != ry.d() {
        return Err(Error::Shape(format!(
            "energy distance needs equal dimensions, got {} and {}",
            rx.d(),
            ry.d()
        )));
    }
    let (m, n) = (rx.n() as f64, ry.n() as f64);
    let mean_pairwise = |a: &PointCloud, b: &PointCloud| {
        let mut s = Compensated::default();
        for p in a.rows() {
            s.add(b.rows().map(|q| distance(p, q)).sum());
        }
        s.total()
    };
    let value = 2.0 * mean_pairwise(rx, ry) / (m * n)
        - mean_pairwise(rx, rx) / (m * m)
        - mean_pairwise(ry, ry) / (n * n);
    clamp_nonnegative(value)
}

/// `(1/n²) Σ_ij (F_n^{XY}(x_i, y_j) - F_n^X(x_i) F_n^Y(y_j))²` with
/// empirical distribution functions using `≤`.
pub fn hoeffding_integral(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::Shape(format!(
            "paired samples need equal length, got {n} and {}",
            y.len()
        )));
    }
    if n == 0 {
        return Err(Error::Data("empty sample".into()));
    }
    // rank_le(v)[i] = #{k : v_k <= v_i}, in 1..=n
    let rank_le = |v: &[f64]| -> Vec<usize> {
        let mut sorted = v.to_vec();
        sorted.sort_by(f64::total_cmp);
        v.iter()
            .map(|t| sorted.partition_point(|s| s <= t))
            .collect()
    };
    let rx = rank_le(x);
    let ry = rank_le(y);
    // joint[a][b] = #{k : rx_k <= a, ry_k <= b}
    let mut joint = vec![0u32; (n + 1) * (n + 1)];
    for k in 0..n {
        joint[rx[k] * (n + 1) + ry[k]] += 1;
    }
    for a in 0..=n {
        for b in 0..=n {
            let mut v = joint[a * (n + 1) + b];
            if a > 0 {
                v += joint[(a - 1) * (n + 1) + b];
            }
            if b > 0 {
                v += joint[a * (n + 1) + b - 1];
            }
            if a > 0 && b > 0 {
                v -= joint[(a - 1) * (n + 1) + b - 1];
            }
            joint[a * (n + 1) + b] = v;
        }
    }
    let nf = n as f64;
    let mut total = Compensated::default();
    for &a in &rx {
        for &b in &ry {
            let fxy = f64::from(joint[a * (n + 1) + b]) / nf;
            let diff = fxy - (a as f64 / nf) * (b as f64 / nf);
            total.add(diff * diff);
        }
    }
    Ok(total.total() / (nf * nf))
}

/// Two-sample Cramér–von Mises integral
/// `(1/(m+n)) Σ_t (F_m(t) - G_n(t))²` over the pooled observations.
pub fn cvm_integral(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Data("Cramér–von Mises needs two nonempty samples".into()));
    }
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (m, n) = (x.len() as f64, y.len() as f64);
    let mut total = Compensated::default();
    for t in x.iter().chain(y) {
        let f = xs.partition_point(|v| v <= t) as f64 / m;
        let g = ys.partition_point(|v| v <= t) as f64 / n;
        total.add((f - g) * (f - g));
    }
    Ok(total.total() / (m + n))
}
