//! Empirical multivariate ranks.
//!
//! The rank of observation `i` is the grid point that the optimal
//! assignment (minimum total squared distance) pairs with it. In one
//! dimension with the lattice grid this is the classical rank divided by
//! `n`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assign::{self, build_cost};
use crate::error::{Error, Result};
use crate::qmc::{first_duplicate, halton_grid, RankGrid};

/// `n` observations in `d` dimensions, row-major, all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl PointCloud {
    pub fn new(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::Data(format!(
                "point cloud needs n >= 1 and d >= 1, got {n}x{d}"
            )));
        }
        if data.len() != n * d {
            return Err(Error::Shape(format!(
                "{n}x{d} cloud needs {} values, got {}",
                n * d,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite value {} at row {}, column {}",
                data[pos],
                pos / d + 1,
                pos % d + 1
            )));
        }
        Ok(PointCloud { data, n, d })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::Data(format!(
                "row {} has {} values, expected {d}",
                i + 1,
                rows[i].len()
            )));
        }
        Self::new(rows.len(), d, rows.concat())
    }

    /// Single-column cloud.
    pub fn from_column(values: &[f64]) -> Result<Self> {
        Self::new(values.len(), 1, values.to_vec())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.d)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Columns `start..end` of every row.
    pub fn columns(&self, start: usize, end: usize) -> Result<PointCloud> {
        if start >= end || end > self.d {
            return Err(Error::Shape(format!(
                "column range {start}..{end} invalid for dimension {}",
                self.d
            )));
        }
        let data = self
            .rows()
            .flat_map(|r| r[start..end].iter().copied())
            .collect();
        Ok(PointCloud {
            data,
            n: self.n,
            d: end - start,
        })
    }

    /// Stacks clouds of equal dimension, in order.
    pub fn concat(parts: &[&PointCloud]) -> Result<PointCloud> {
        let d = parts
            .first()
            .ok_or_else(|| Error::Shape("nothing to concatenate".into()))?
            .d;
        if let Some(p) = parts.iter().find(|p| p.d != d) {
            return Err(Error::Shape(format!(
                "cannot pool dimension {} with dimension {d}",
                p.d
            )));
        }
        Ok(PointCloud {
            data: parts.iter().flat_map(|p| p.data.iter().copied()).collect(),
            n: parts.iter().map(|p| p.n).sum(),
            d,
        })
    }

    /// Joins clouds with equal `n` side by side.
    pub fn hstack(parts: &[&PointCloud]) -> Result<PointCloud> {
        let n = parts
            .first()
            .ok_or_else(|| Error::Shape("nothing to stack".into()))?
            .n;
        if parts.iter().any(|p| p.n != n) {
            return Err(Error::Shape("all blocks must have the same count".into()));
        }
        let d = parts.iter().map(|p| p.d).sum();
        let mut data = Vec::with_capacity(n * d);
        for i in 0..n {
            for p in parts {
                data.extend_from_slice(p.row(i));
            }
        }
        Ok(PointCloud { data, n, d })
    }

    /// Applies `f` to every coordinate.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Result<PointCloud> {
        PointCloud::new(self.n, self.d, self.data.iter().map(|&x| f(x)).collect())
    }

    pub fn has_duplicate_rows(&self) -> bool {
        first_duplicate(&self.data, self.d).is_some()
    }
}

/// Observation-to-grid bijection produced by the assignment solver.
#[derive(Debug, Clone, PartialEq)]
pub struct RankMap {
    grid: RankGrid,
    perm: Vec<usize>,
    ranks: Vec<f64>,
    warnings: Vec<String>,
}

impl RankMap {
    pub fn grid(&self) -> &RankGrid {
        &self.grid
    }

    /// `perm()[i]` is the zero-based index of the grid point given to
    /// observation `i`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn rank(&self, i: usize) -> &[f64] {
        let d = self.grid.d();
        &self.ranks[i * d..(i + 1) * d]
    }

    /// Ranks in observation order as a cloud.
    pub fn ranks(&self) -> PointCloud {
        PointCloud {
            data: self.ranks.clone(),
            n: self.grid.n(),
            d: self.grid.d(),
        }
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Ranks as CSV in observation order, shortest round-trip decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.grid.n() {
            let row: Vec<String> = self.rank(i).iter().map(|x| format!("{x:?}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Optimal-transport ranks of `data` on `grid`.
pub fn empirical_ranks(data: &PointCloud, grid: &RankGrid) -> Result<RankMap> {
    let cost = build_cost(data, grid)?;
    let assignment = assign::solve(&cost);
    let mut warnings = Vec::new();
    if data.has_duplicate_rows() {
        warnings.push(
            "data contain duplicate rows; ranks depend on the solver's tie-break".to_string(),
        );
    }
    let ranks = assignment
        .perm
        .iter()
        .flat_map(|&j| grid.point(j).iter().copied())
        .collect();
    Ok(RankMap {
        grid: grid.clone(),
        perm: assignment.perm,
        ranks,
        warnings,
    })
}

/// One rank map over the concatenation of several samples.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledRanks {
    map: RankMap,
    bounds: Vec<usize>,
}

impl PooledRanks {
    pub fn map(&self) -> &RankMap {
        &self.map
    }

    pub fn sample_count(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.bounds.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Ranks of sample `j` in its own row order.
    pub fn slice(&self, j: usize) -> PointCloud {
        let d = self.map.grid.d();
        let (lo, hi) = (self.bounds[j], self.bounds[j + 1]);
        PointCloud {
            data: self.map.ranks[lo * d..hi * d].to_vec(),
            n: hi - lo,
            d,
        }
    }

    pub fn slices(&self) -> Vec<PointCloud> {
        (0..self.sample_count()).map(|j| self.slice(j)).collect()
    }

    /// For every grid point, the index of the sample whose observation
    /// received it.
    pub fn labels_by_grid(&self) -> Vec<usize> {
        let mut labels = vec![0; self.map.grid.n()];
        for j in 0..self.sample_count() {
            for i in self.bounds[j]..self.bounds[j + 1] {
                labels[self.map.perm[i]] = j;
            }
        }
        labels
    }
}

/// Ranks all samples jointly on `grid` and splits the result back per
/// sample. Samples are concatenated in the given order.
pub fn pooled_ranks(samples: &[&PointCloud], grid: &RankGrid) -> Result<PooledRanks> {
    let pooled = PointCloud::concat(samples)?;
    if pooled.n() != grid.n() {
        return Err(Error::Shape(format!(
            "samples hold {} observations but the grid has {} points",
            pooled.n(),
            grid.n()
        )));
    }
    let map = empirical_ranks(&pooled, grid)?;
    let mut bounds = vec![0];
    for s in samples {
        bounds.push(bounds.last().unwrap() + s.n());
    }
    Ok(PooledRanks { map, bounds })
}

/// Paired ranks for the symmetry test.
///
/// Each observation `x` is lifted to `z = (x, -x)` and ranked on a
/// `2d`-dimensional Halton grid; the assigned grid point is then split into
/// two halves, and the half closer (in the two-point transport sense) to
/// `x` becomes the rank of `x`, the other the rank of `-x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryRanks {
    grid: RankGrid,
    pair_of: Vec<usize>,
    swapped: Vec<bool>,
    d: usize,
}

impl SymmetryRanks {
    /// The `2d`-dimensional grid whose points are split into halves.
    pub fn grid(&self) -> &RankGrid {
        &self.grid
    }

    /// Grid point assigned to `(x_i, -x_i)`.
    pub fn pair_of(&self) -> &[usize] {
        &self.pair_of
    }

    /// Whether observation `i` took the second half of its grid point.
    pub fn swapped(&self) -> &[bool] {
        &self.swapped
    }

    fn halves(&self, i: usize) -> (&[f64], &[f64]) {
        self.grid.point(self.pair_of[i]).split_at(self.d)
    }

    /// Rank of `x_i`.
    pub fn positive(&self, i: usize) -> &[f64] {
        let (a, b) = self.halves(i);
        if self.swapped[i] {
            b
        } else {
            a
        }
    }

    /// Rank of `-x_i`.
    pub fn negative(&self, i: usize) -> &[f64] {
        let (a, b) = self.halves(i);
        if self.swapped[i] {
            a
        } else {
            b
        }
    }

    pub fn positive_cloud(&self) -> PointCloud {
        self.collect(|i| self.positive(i))
    }

    pub fn negative_cloud(&self) -> PointCloud {
        self.collect(|i| self.negative(i))
    }

    fn collect<'a>(&'a self, f: impl Fn(usize) -> &'a [f64]) -> PointCloud {
        let n = self.pair_of.len();
        PointCloud {
            data: (0..n).flat_map(|i| f(i).iter().copied()).collect(),
            n,
            d: self.d,
        }
    }

    /// For every grid point, whether its first half is the rank of a
    /// positive observation.
    pub fn first_half_positive_by_grid(&self) -> Vec<bool> {
        let mut out = vec![false; self.grid.n()];
        for (i, &g) in self.pair_of.iter().enumerate() {
            out[g] = !self.swapped[i];
        }
        out
    }
}

pub fn paired_symmetry_ranks(data: &PointCloud) -> Result<SymmetryRanks> {
    let (n, d) = (data.n(), data.d());
    let grid = halton_grid(n, 2 * d)?;
    let lifted = PointCloud::new(
        n,
        2 * d,
        data.rows()
            .flat_map(|x| x.iter().copied().chain(x.iter().map(|v| -v)))
            .collect(),
    )?;
    let map = empirical_ranks(&lifted, &grid)?;
    let swapped = data
        .rows()
        .zip(&map.perm)
        .map(|(x, &g)| {
            let (a, b) = grid.point(g).split_at(d);
            let keep = pair_cost(x, a, b);
            let swap = pair_cost(x, b, a);
            swap < keep
        })
        .collect();
    Ok(SymmetryRanks {
        grid,
        pair_of: map.perm,
        swapped,
        d,
    })
}

/// `|x - to_x|² + |-x - to_neg|²`
fn pair_cost(x: &[f64], to_x: &[f64], to_neg: &[f64]) -> f64 {
    x.iter()
        .zip(to_x)
        .zip(to_neg)
        .map(|((v, p), q)| (v - p) * (v - p) + (-v - q) * (-v - q))
        .sum()
}

/// Classical one-dimensional ranks per column, scaled to `{1/n, ..., 1}`.
/// Tied values share their average rank and produce a warning.
pub fn coordinatewise_prerank(data: &PointCloud) -> (PointCloud, Vec<String>) {
    let (n, d) = (data.n(), data.d());
    let mut out = vec![0.0; n * d];
    let mut warnings = Vec::new();
    for j in 0..d {
        let column = data.column(j);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| column[a].total_cmp(&column[b]));
        let mut start = 0;
        let mut tied = false;
        while start < n {
            let mut end = start + 1;
            while end < n && column[order[end]] == column[order[start]] {
                end += 1;
            }
            tied |= end - start > 1;
            // positions start..end hold ranks start+1..=end
            let avg = (start + 1 + end) as f64 / 2.0 / n as f64;
            for &i in &order[start..end] {
                out[i * d + j] = avg;
            }
            start = end;
        }
        if tied {
            warnings.push(format!("column {} contains ties; average ranks used", j + 1));
        }
    }
    (PointCloud { data: out, n, d }, warnings)
}

/// Adds independent uniform noise on `[-scale, scale]` to every coordinate.
pub fn jitter(data: &PointCloud, scale: f64, seed: u64) -> Result<PointCloud> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "jitter scale must be positive, got {scale}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    data.map(|x| x + scale * (2.0 * rng.random::<f64>() - 1.0))
}
