//! Permutation null distributions of the scaled statistics.
//!
//! Every statistic here is a function of how observations land on a fixed
//! grid, so its null law is obtained by relabelling the grid uniformly at
//! random. Tables never touch user data and can be cached.
//!
//! Replicate `b` draws from `ChaCha8Rng::seed_from_u64(seed)` switched to
//! stream `b`, so a table depends only on `(seed, B, meta)` and not on the
//! number of worker threads.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::qmc::{halton_grid, RankGrid};
use crate::stats::{
    centered_cross, clamp_nonnegative, energy_from_group_sums, CenteredDistances, Compensated,
    DistanceMatrix,
};

pub const DEFAULT_B: usize = 10_000;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const GENERATOR: &str = "chacha8";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullMode {
    Rdcov,
    Energy,
    KIndep,
    KSample,
    Symmetry,
}

impl NullMode {
    pub const ALL: [NullMode; 5] = [
        NullMode::Rdcov,
        NullMode::Energy,
        NullMode::KIndep,
        NullMode::KSample,
        NullMode::Symmetry,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NullMode::Rdcov => "rdcov",
            NullMode::Energy => "energy",
            NullMode::KIndep => "k_indep",
            NullMode::KSample => "k_sample",
            NullMode::Symmetry => "symmetry",
        }
    }

    /// Human-readable scaling applied to the raw statistic.
    pub fn scale_label(self) -> &'static str {
        match self {
            NullMode::Rdcov | NullMode::KIndep | NullMode::KSample => "n",
            NullMode::Energy => "mn/(m+n)",
            NullMode::Symmetry => "n/2",
        }
    }
}

impl fmt::Display for NullMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NullMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NullMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s || m.as_str().replace('_', "-") == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown null mode '{s}'")))
    }
}

/// Everything a table depends on. Two tables with equal metadata are
/// bitwise identical.
///
/// `counts` is `[n]` for rdcov, k_indep and symmetry, `[m, n]` for energy
/// and the group sizes for k_sample. `dims` holds one entry per block for
/// the independence modes and a single dimension otherwise. `grids` holds
/// one descriptor per grid used.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableMeta {
    pub mode: NullMode,
    pub counts: Vec<usize>,
    pub dims: Vec<usize>,
    pub grids: Vec<String>,
    pub b: usize,
    pub seed: u64,
    pub generator: String,
}

impl TableMeta {
    /// Total number of grid points.
    pub fn total(&self) -> usize {
        match self.mode {
            NullMode::Energy | NullMode::KSample => self.counts.iter().sum(),
            _ => self.counts[0],
        }
    }

    /// Factor turning the raw statistic into the tabulated one.
    pub fn scale(&self) -> f64 {
        scale_factor(self.mode, &self.counts)
    }

    fn header(&self) -> Vec<(&'static str, String)> {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        vec![
            ("format-version", FORMAT_VERSION.to_string()),
            ("mode", self.mode.to_string()),
            ("counts", join(&self.counts)),
            ("dims", join(&self.dims)),
            ("grids", self.grids.join(",")),
            ("b", self.b.to_string()),
            ("seed", self.seed.to_string()),
            ("generator", self.generator.clone()),
        ]
    }

    /// Stable file name for the cache directory.
    pub fn cache_file_name(&self) -> String {
        let mut hasher = Sha256::new();
        for (k, v) in self.header() {
            hasher.update(format!("{k}={v}\n"));
        }
        let digest = hasher.finalize();
        let hex: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
        format!("{}-{}.table", self.mode, hex)
    }
}

pub fn scale_factor(mode: NullMode, counts: &[usize]) -> f64 {
    match mode {
        NullMode::Energy => {
            let (m, n) = (counts[0] as f64, counts[1] as f64);
            m * n / (m + n)
        }
        NullMode::Symmetry => counts[0] as f64 / 2.0,
        NullMode::KSample => counts.iter().sum::<usize>() as f64,
        NullMode::Rdcov | NullMode::KIndep => counts[0] as f64,
    }
}

/// Sorted Monte Carlo draws of a scaled statistic under the null.
#[derive(Debug, Clone, PartialEq)]
pub struct NullTable {
    samples: Vec<f64>,
    meta: TableMeta,
}

impl NullTable {
    fn from_unsorted(mut samples: Vec<f64>, meta: TableMeta) -> Self {
        samples.sort_by(f64::total_cmp);
        NullTable { samples, meta }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn meta(&self) -> &TableMeta {
        &self.meta
    }

    pub fn mode(&self) -> NullMode {
        self.meta.mode
    }

    pub fn b(&self) -> usize {
        self.samples.len()
    }

    /// Number of draws `>= x`.
    pub fn count_at_least(&self, x: f64) -> usize {
        self.samples.len() - self.samples.partition_point(|&s| s < x)
    }
}

// ---------------------------------------------------------------------------
// kernels shared by observed statistics and null draws

fn replicate_rng(seed: u64, replicate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate as u64);
    rng
}

fn check_b(b: usize) -> Result<()> {
    if b == 0 {
        return Err(Error::InvalidArgument("B must be at least 1".into()));
    }
    Ok(())
}

/// Squared rank distance covariance of grid 1 in fixed order against grid 2
/// relabelled by `pi`.
#[derive(Debug, Clone)]
pub(crate) struct RdcovKernel {
    a: CenteredDistances,
    b: CenteredDistances,
}

impl RdcovKernel {
    pub(crate) fn new(grid1: &RankGrid, grid2: &RankGrid) -> Result<Self> {
        if grid1.n() != grid2.n() {
            return Err(Error::Shape(format!(
                "grids have {} and {} points",
                grid1.n(),
                grid2.n()
            )));
        }
        Ok(RdcovKernel {
            a: CenteredDistances::from_flat(grid1.as_flat(), grid1.d()),
            b: CenteredDistances::from_flat(grid2.as_flat(), grid2.d()),
        })
    }

    pub(crate) fn raw(&self, pi: &[usize]) -> Result<f64> {
        clamp_nonnegative(centered_cross(&self.a, None, &self.b, Some(pi)))
    }
}

/// Sum of squared energy distances between consecutive groups of a labelled
/// grid.
#[derive(Debug, Clone)]
pub(crate) struct GroupKernel {
    dist: DistanceMatrix,
    sizes: Vec<usize>,
}

impl GroupKernel {
    pub(crate) fn new(grid: &RankGrid, sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "need at least two nonempty samples, got sizes {sizes:?}"
            )));
        }
        if sizes.iter().sum::<usize>() != grid.n() {
            return Err(Error::Shape(format!(
                "sample sizes {sizes:?} do not add up to the {} grid points",
                grid.n()
            )));
        }
        Ok(GroupKernel {
            dist: DistanceMatrix::from_flat(grid.as_flat(), grid.d()),
            sizes: sizes.to_vec(),
        })
    }

    /// `labels[k]` is the sample owning grid point `k`.
    pub(crate) fn raw(&self, labels: &[usize]) -> Result<f64> {
        let sums = self.dist.group_sums(labels, self.sizes.len());
        let mut total = Compensated::default();
        for j in 0..self.sizes.len() - 1 {
            total.add(energy_from_group_sums(&sums, &self.sizes, j, j + 1));
        }
        clamp_nonnegative(total.total())
    }

    /// Labels with the groups laid out consecutively.
    pub(crate) fn base_labels(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .enumerate()
            .flat_map(|(j, &s)| std::iter::repeat_n(j, s))
            .collect()
    }
}

/// Energy between the halves given to `X` and the halves given to `-X`.
#[derive(Debug, Clone)]
pub(crate) struct SymmetryKernel {
    halves: DistanceMatrix,
    n: usize,
}

impl SymmetryKernel {
    /// `grid` has `n` points in `2d` dimensions; each point is read as two
    /// `d`-dimensional halves.
    pub(crate) fn new(grid: &RankGrid) -> Result<Self> {
        if !grid.d().is_multiple_of(2) {
            return Err(Error::Shape(format!(
                "symmetry grid needs an even dimension, got {}",
                grid.d()
            )));
        }
        Ok(SymmetryKernel {
            halves: DistanceMatrix::from_flat(grid.as_flat(), grid.d() / 2),
            n: grid.n(),
        })
    }

    /// `first_half_x[h]` says whether the first half of grid point `h` is
    /// the rank of a positive observation.
    pub(crate) fn raw(&self, first_half_x: &[bool]) -> Result<f64> {
        let labels: Vec<usize> = first_half_x
            .iter()
            .flat_map(|&first| if first { [0, 1] } else { [1, 0] })
            .collect();
        let sums = self.halves.group_sums(&labels, 2);
        clamp_nonnegative(energy_from_group_sums(&sums, &[self.n, self.n], 0, 1))
    }
}

/// Sum over blocks `j < K` of the squared distance covariance between block
/// `j` and the concatenation of blocks `j+1..K`.
#[derive(Debug, Clone)]
pub(crate) struct KIndepKernel {
    centered: Vec<CenteredDistances>,
    squared: Vec<Vec<f64>>,
    n: usize,
}

impl KIndepKernel {
    pub(crate) fn new(grids: &[RankGrid]) -> Result<Self> {
        if grids.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least two blocks, got {}",
                grids.len()
            )));
        }
        let n = grids[0].n();
        if let Some(g) = grids.iter().find(|g| g.n() != n) {
            return Err(Error::Shape(format!(
                "block grids have {} and {} points",
                n,
                g.n()
            )));
        }
        let squared = grids
            .iter()
            .map(|g| {
                let mut sq = vec![0.0; n * n];
                for k in 0..n {
                    for l in 0..n {
                        sq[k * n + l] = crate::assign::squared_distance(g.point(k), g.point(l));
                    }
                }
                sq
            })
            .collect();
        Ok(KIndepKernel {
            centered: grids
                .iter()
                .map(|g| CenteredDistances::from_flat(g.as_flat(), g.d()))
                .collect(),
            squared,
            n,
        })
    }

    /// `perms[j]` relabels the grid of block `j`; `None` is the identity.
    pub(crate) fn raw(&self, perms: &[Option<&[usize]>]) -> Result<f64> {
        let k = self.centered.len();
        let n = self.n;
        let c = &self.centered;
        let mut terms = vec![0.0; k - 1];
        terms[k - 2] = centered_cross(&c[k - 2], perms[k - 2], &c[k - 1], perms[k - 1]);
        if k > 2 {
            let mut acc = vec![0.0; n * n];
            self.add_squared(&mut acc, k - 1, perms[k - 1]);
            for j in (0..k - 2).rev() {
                self.add_squared(&mut acc, j + 1, perms[j + 1]);
                let dist = DistanceMatrix::from_raw(n, acc.iter().map(|v| v.sqrt()).collect());
                let tail = CenteredDistances::from_distances(&dist);
                terms[j] = centered_cross(&c[j], perms[j], &tail, None);
            }
        }
        let mut total = Compensated::default();
        terms.iter().for_each(|&t| total.add(t));
        clamp_nonnegative(total.total())
    }

    fn add_squared(&self, acc: &mut [f64], block: usize, perm: Option<&[usize]>) {
        let n = self.n;
        let sq = &self.squared[block];
        for a in 0..n {
            let pa = perm.map_or(a, |p| p[a]);
            let row = &sq[pa * n..(pa + 1) * n];
            let out = &mut acc[a * n..(a + 1) * n];
            match perm {
                None => out.iter_mut().zip(row).for_each(|(o, v)| *o += v),
                Some(p) => out.iter_mut().zip(p).for_each(|(o, &pb)| *o += row[pb]),
            }
        }
    }
}

fn run_replicates<F>(b: usize, seed: u64, n: usize, draw: F) -> Result<Vec<f64>>
where
    F: Fn(&mut ChaCha8Rng, &mut Vec<usize>) -> Result<f64> + Sync,
{
    (0..b)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(n),
            |scratch, r| {
                let mut rng = replicate_rng(seed, r);
                draw(&mut rng, scratch)
            },
        )
        .collect()
}

fn identity_into(v: &mut Vec<usize>, n: usize) {
    v.clear();
    v.extend(0..n);
}

/// Null table of `n · RdCov²` for the two given grids.
pub fn null_sample_rdcov(grid1: &RankGrid, grid2: &RankGrid, b: usize, seed: u64) -> Result<NullTable> {
    check_b(b)?;
    let kernel = RdcovKernel::new(grid1, grid2)?;
    let n = grid1.n();
    let meta = TableMeta {
        mode: NullMode::Rdcov,
        counts: vec![n],
        dims: vec![grid1.d(), grid2.d()],
        grids: vec![grid1.descriptor(), grid2.descriptor()],
        b,
        seed,
        generator: GENERATOR.into(),
    };
    let scale = meta.scale();
    let samples = run_replicates(b, seed, n, |rng, pi| {
        identity_into(pi, n);
        pi.shuffle(rng);
        Ok(scale * kernel.raw(pi)?)
    })?;
    Ok(NullTable::from_unsorted(samples, meta))
}

/// Null table of `mn/(m+n) · RE²` on a pooled grid of `m + n` points.
pub fn null_sample_re(m: usize, n: usize, grid: &RankGrid, b: usize, seed: u64) -> Result<NullTable> {
    null_sample_groups(NullMode::Energy, &[m, n], grid, b, seed)
}

/// Null table of `n · Σ_j RE²_{j,j+1}` for consecutive groups of the given
/// sizes on one pooled grid.
pub fn null_sample_k_sample(counts: &[usize], grid: &RankGrid, b: usize, seed: u64) -> Result<NullTable> {
    null_sample_groups(NullMode::KSample, counts, grid, b, seed)
}

fn null_sample_groups(
    mode: NullMode,
    counts: &[usize],
    grid: &RankGrid,
    b: usize,
    seed: u64,
) -> Result<NullTable> {
    check_b(b)?;
    let kernel = GroupKernel::new(grid, counts)?;
    let meta = TableMeta {
        mode,
        counts: counts.to_vec(),
        dims: vec![grid.d()],
        grids: vec![grid.descriptor()],
        b,
        seed,
        generator: GENERATOR.into(),
    };
    let scale = meta.scale();
    let base = kernel.base_labels();
    let samples = run_replicates(b, seed, grid.n(), |rng, labels| {
        labels.clear();
        labels.extend_from_slice(&base);
        labels.shuffle(rng);
        Ok(scale * kernel.raw(labels)?)
    })?;
    Ok(NullTable::from_unsorted(samples, meta))
}

/// Null table of `n · Σ_j RdCov²(block j, blocks j+1..K)`.
pub fn null_sample_k_indep(grids: &[RankGrid], b: usize, seed: u64) -> Result<NullTable> {
    check_b(b)?;
    let kernel = KIndepKernel::new(grids)?;
    let n = grids[0].n();
    let k = grids.len();
    let meta = TableMeta {
        mode: NullMode::KIndep,
        counts: vec![n],
        dims: grids.iter().map(RankGrid::d).collect(),
        grids: grids.iter().map(RankGrid::descriptor).collect(),
        b,
        seed,
        generator: GENERATOR.into(),
    };
    let scale = meta.scale();
    let samples = run_replicates(b, seed, n * (k - 1), |rng, flat| {
        identity_into(flat, 0);
        for _ in 1..k {
            let start = flat.len();
            flat.extend(0..n);
            flat[start..].shuffle(rng);
        }
        let mut perms: Vec<Option<&[usize]>> = vec![None];
        perms.extend(flat.chunks_exact(n).map(Some));
        Ok(scale * kernel.raw(&perms)?)
    })?;
    Ok(NullTable::from_unsorted(samples, meta))
}

/// Null table of the symmetry statistic `n/2 · T_n` for `n` observations in
/// dimension `d`.
///
/// The statistic depends only on which half of each grid point goes to the
/// positive observations, so a replicate is `n` fair coin flips; the
/// uniform pairing of observations with grid points does not change the
/// value and is not drawn.
pub fn null_sample_symmetry(n: usize, d: usize, b: usize, seed: u64) -> Result<NullTable> {
    check_b(b)?;
    let grid = halton_grid(n, 2 * d)?;
    let kernel = SymmetryKernel::new(&grid)?;
    let meta = TableMeta {
        mode: NullMode::Symmetry,
        counts: vec![n],
        dims: vec![d],
        grids: vec![grid.descriptor()],
        b,
        seed,
        generator: GENERATOR.into(),
    };
    let scale = meta.scale();
    let samples = run_replicates(b, seed, 0, |rng, _| {
        let flips: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
        Ok(scale * kernel.raw(&flips)?)
    })?;
    Ok(NullTable::from_unsorted(samples, meta))
}

/// Table for a mode with the default grids (lattice for `d = 1`, Halton
/// otherwise). `counts` and `dims` follow the layout of [`TableMeta`].
pub fn build_null_table(
    mode: NullMode,
    counts: &[usize],
    dims: &[usize],
    b: usize,
    seed: u64,
) -> Result<NullTable> {
    let shape_err = || {
        Error::InvalidArgument(format!(
            "mode {mode} does not accept counts {counts:?} with dims {dims:?}"
        ))
    };
    match (mode, counts, dims) {
        (NullMode::Rdcov, &[n], &[d1, d2]) => null_sample_rdcov(
            &RankGrid::default_for(n, d1)?,
            &RankGrid::default_for(n, d2)?,
            b,
            seed,
        ),
        (NullMode::Energy, &[m, n], &[d]) => {
            null_sample_re(m, n, &RankGrid::default_for(m + n, d)?, b, seed)
        }
        (NullMode::KIndep, &[n], dims) if dims.len() >= 2 => {
            let grids = dims
                .iter()
                .map(|&d| RankGrid::default_for(n, d))
                .collect::<Result<Vec<_>>>()?;
            null_sample_k_indep(&grids, b, seed)
        }
        (NullMode::KSample, counts, &[d]) if counts.len() >= 2 => {
            let total = counts.iter().sum();
            null_sample_k_sample(counts, &RankGrid::default_for(total, d)?, b, seed)
        }
        (NullMode::Symmetry, &[n], &[d]) => null_sample_symmetry(n, d, b, seed),
        _ => Err(shape_err()),
    }
}

// ---------------------------------------------------------------------------
// decisions

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}

/// Critical value of the table at level `alpha`.
///
/// This is the smallest draw `c` with `#{s >= c} <= floor(alpha·B)`. When
/// no draw qualifies (a constant table, or `alpha·B < 1`) the result is the
/// next float above the largest draw, so that nothing in the table rejects.
/// The value is further lowered, if needed, to the smallest float whose
/// Monte Carlo p-value is at most `alpha`, which keeps `p <= alpha`
/// implying rejection for every `B`.
pub fn critical_value(table: &NullTable, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let s = &table.samples;
    let b = s.len();
    let allowed = (alpha * b as f64 + 1e-9).floor() as usize;
    let by_count = s
        .iter()
        .enumerate()
        .skip(b.saturating_sub(allowed))
        .find(|&(i, &v)| i == 0 || s[i - 1] < v)
        .map(|(_, &v)| v)
        .filter(|&v| table.count_at_least(v) <= allowed)
        .unwrap_or_else(|| s[b - 1].next_up());
    // largest count whose p-value (1 + count)/(B + 1) is still <= alpha
    let p_allowed = (alpha * (b + 1) as f64 - 1.0 + 1e-9).floor();
    let by_p = if p_allowed < 0.0 {
        f64::INFINITY
    } else {
        s[b - 1 - (p_allowed as usize).min(b - 1)].next_up()
    };
    Ok(by_count.min(by_p))
}

/// Monte Carlo p-value `(1 + #{s >= observed}) / (B + 1)`.
pub fn p_value(table: &NullTable, observed: f64) -> f64 {
    (1 + table.count_at_least(observed)) as f64 / (table.b() + 1) as f64
}

// ---------------------------------------------------------------------------
// persistence

/// Writes `# key=value` header lines followed by one draw per line.
pub fn save_table(table: &NullTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(table.samples.len() * 22 + 256);
    for (k, v) in table.meta.header() {
        out.push_str(&format!("# {k}={v}\n"));
    }
    for x in &table.samples {
        out.push_str(&format!("{x:?}\n"));
    }
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a table written by [`save_table`].
pub fn load_table(path: impl AsRef<Path>) -> Result<NullTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_table(&text)
}

/// Reads a table and refuses it unless its metadata equals `expected`.
pub fn load_table_matching(path: impl AsRef<Path>, expected: &TableMeta) -> Result<NullTable> {
    let table = load_table(path)?;
    if &table.meta != expected {
        return Err(Error::Metadata(describe_mismatch(&table.meta, expected)));
    }
    Ok(table)
}

fn describe_mismatch(found: &TableMeta, expected: &TableMeta) -> String {
    let found = found.header();
    let expected = expected.header();
    let diffs: Vec<String> = found
        .iter()
        .zip(&expected)
        .filter(|(a, b)| a.1 != b.1)
        .map(|(a, b)| format!("{}: table has '{}', test needs '{}'", a.0, a.1, b.1))
        .collect();
    diffs.join("; ")
}

fn parse_table(text: &str) -> Result<NullTable> {
    let corrupt = |msg: String| Error::CorruptTable(msg);
    let mut header = BTreeMap::new();
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let (k, v) = rest
                .trim()
                .split_once('=')
                .ok_or_else(|| corrupt(format!("line {}: header without '='", i + 1)))?;
            header.insert(k.trim().to_string(), v.trim().to_string());
        } else {
            let x: f64 = line
                .parse()
                .map_err(|_| corrupt(format!("line {}: '{line}' is not a number", i + 1)))?;
            if !(x.is_finite() && x >= 0.0) {
                return Err(corrupt(format!("line {}: invalid draw {x}", i + 1)));
            }
            samples.push(x);
        }
    }
    let get = |k: &str| {
        header
            .get(k)
            .map(String::as_str)
            .ok_or_else(|| Error::CorruptTable(format!("missing header '{k}'")))
    };
    let num = |k: &str| -> Result<u64> {
        get(k)?
            .parse()
            .map_err(|_| Error::CorruptTable(format!("header '{k}' is not an integer")))
    };
    let list = |k: &str| -> Result<Vec<usize>> {
        get(k)?
            .split(',')
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::CorruptTable(format!("header '{k}' has bad entry '{v}'")))
            })
            .collect()
    };
    let version = num("format-version")?;
    if version != u64::from(FORMAT_VERSION) {
        return Err(corrupt(format!("unsupported format version {version}")));
    }
    let meta = TableMeta {
        mode: get("mode")?
            .parse()
            .map_err(|_| corrupt("unknown mode".into()))?,
        counts: list("counts")?,
        dims: list("dims")?,
        grids: get("grids")?.split(',').map(str::to_string).collect(),
        b: num("b")? as usize,
        seed: num("seed")?,
        generator: get("generator")?.to_string(),
    };
    if samples.len() != meta.b || samples.is_empty() {
        return Err(corrupt(format!(
            "header declares {} draws, file holds {}",
            meta.b,
            samples.len()
        )));
    }
    if samples.windows(2).any(|w| w[0] > w[1]) {
        return Err(corrupt("draws are not sorted".into()));
    }
    Ok(NullTable { samples, meta })
}

/// Cache location of a table: `$OT_RANKS_TABLE_DIR/<mode>-<hash>.table`,
/// or `None` when the variable is unset.
pub fn cache_path(meta: &TableMeta) -> Option<PathBuf> {
    std::env::var_os("OT_RANKS_TABLE_DIR").map(|dir| PathBuf::from(dir).join(meta.cache_file_name()))
}
