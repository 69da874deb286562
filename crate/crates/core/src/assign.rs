//! Exact dense linear assignment.
//!
//! The solver is the shortest-augmenting-path method with row and column
//! potentials (Jonker–Volgenant family, `O(n³)` worst case). Rows enter
//! one at a time in index order and every scan over columns keeps the
//! first strict minimum, so equal inputs always give equal outputs.
//! Comparisons inside the algorithm are exact; tolerances only appear in
//! [`Assignment::check_certificate`].

use crate::error::{Error, Result};
use crate::qmc::RankGrid;
use crate::ranks::PointCloud;

/// Largest size accepted by [`brute_force`].
pub const BRUTE_FORCE_MAX_N: usize = 10;

/// Square matrix of finite, nonnegative costs, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Shape("cost matrix must be at least 1x1".into()));
        }
        if entries.len() != n * n {
            return Err(Error::Shape(format!(
                "cost matrix of order {n} needs {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        if let Some(pos) = entries.iter().position(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::Data(format!(
                "cost entry ({}, {}) = {} is not a finite nonnegative number",
                pos / n,
                pos % n,
                entries[pos]
            )));
        }
        Ok(CostMatrix { n, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("cost matrix must be square".into()));
        }
        Self::new(n, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Sum of the entries selected by `perm`, accumulated in row order.
    pub fn cost_of(&self, perm: &[usize]) -> f64 {
        perm.iter().enumerate().map(|(i, &j)| self.get(i, j)).sum()
    }
}

/// Squared Euclidean distances between observations (rows) and grid points
/// (columns).
pub fn build_cost(data: &PointCloud, grid: &RankGrid) -> Result<CostMatrix> {
    if data.n() != grid.n() || data.d() != grid.d() {
        return Err(Error::Shape(format!(
            "data is {}x{} but grid is {}x{}",
            data.n(),
            data.d(),
            grid.n(),
            grid.d()
        )));
    }
    let n = data.n();
    let mut entries = Vec::with_capacity(n * n);
    for x in data.rows() {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite observation".into()));
        }
        entries.extend(grid.points().map(|h| squared_distance(x, h)));
    }
    Ok(CostMatrix { n, entries })
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Dual potentials proving optimality: `row[i] + col[j] <= cost(i, j)` with
/// equality on assigned cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Duals {
    pub row: Vec<f64>,
    pub col: Vec<f64>,
}

/// An optimal permutation. `perm[i]` is the (zero-based) column assigned
/// to row `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub perm: Vec<usize>,
    pub total_cost: f64,
    pub duals: Option<Duals>,
}

impl Assignment {
    /// Inverse permutation: `inverse()[j]` is the row assigned to column `j`.
    pub fn inverse(&self) -> Vec<usize> {
        invert(&self.perm)
    }

    /// Checks dual feasibility and complementary slackness, with `tol`
    /// scaled by the largest cost magnitude.
    pub fn check_certificate(&self, cost: &CostMatrix, tol: f64) -> bool {
        let Some(duals) = &self.duals else {
            return false;
        };
        let scale = cost.entries.iter().fold(1.0_f64, |m, &c| m.max(c.abs()));
        let eps = tol * scale;
        let n = cost.n();
        for i in 0..n {
            for j in 0..n {
                let slack = cost.get(i, j) - duals.row[i] - duals.col[j];
                if slack < -eps {
                    return false;
                }
                if self.perm[i] == j && slack.abs() > eps {
                    return false;
                }
            }
        }
        true
    }
}

pub(crate) fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &j) in perm.iter().enumerate() {
        inv[j] = i;
    }
    inv
}

pub(crate) fn is_permutation(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    perm.iter()
        .all(|&j| j < seen.len() && !std::mem::replace(&mut seen[j], true))
}

/// Minimum-cost perfect matching of rows to columns.
pub fn solve(cost: &CostMatrix) -> Assignment {
    let n = cost.n();
    // One-based bookkeeping with a virtual column 0 that holds the row
    // currently being inserted.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![f64::INFINITY; n + 1];
    let mut used = vec![false; n + 1];

    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let costs = cost.row(i0 - 1);
            let ui0 = u[i0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = costs[j - 1] - ui0 - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        // augment along the alternating path back to the virtual column
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut perm = vec![0; n];
    for j in 1..=n {
        perm[row_of[j] - 1] = j - 1;
    }
    debug_assert!(is_permutation(&perm));
    let total_cost = cost.cost_of(&perm);
    Assignment {
        perm,
        total_cost,
        duals: Some(Duals {
            row: u[1..].to_vec(),
            col: v[1..].to_vec(),
        }),
    }
}

/// Exhaustive search over all `n!` permutations in lexicographic order;
/// the first minimizer wins. Only for `n <= 10`.
pub fn brute_force(cost: &CostMatrix) -> Result<Assignment> {
    let n = cost.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::Capacity(format!(
            "brute force is limited to n <= {BRUTE_FORCE_MAX_N}, got {n}"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_cost = cost.cost_of(&perm);
    while next_permutation(&mut perm) {
        let c = cost.cost_of(&perm);
        if c < best_cost {
            best_cost = c;
            best.copy_from_slice(&perm);
        }
    }
    Ok(Assignment {
        perm: best,
        total_cost: best_cost,
        duals: None,
    })
}

/// Advances to the next permutation in lexicographic order; returns false
/// after the last one.
pub(crate) fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}
