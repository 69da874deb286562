//! The five rank tests end to end: data, ranks, statistic, null table,
//! report.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::assign::invert;
use crate::error::{Error, Result};
use crate::nulldist::{
    self, critical_value, load_table_matching, p_value, save_table, GroupKernel, KIndepKernel,
    NullMode, NullTable, RdcovKernel, SymmetryKernel, TableMeta, DEFAULT_ALPHA, DEFAULT_B,
    GENERATOR,
};
use crate::qmc::RankGrid;
use crate::ranks::{
    coordinatewise_prerank, empirical_ranks, jitter, paired_symmetry_ranks, pooled_ranks,
    PointCloud,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct TestOptions {
    /// Grids to rank on, one per marginal (independence tests) or a single
    /// pooled grid (sample tests). `None` picks the lattice for `d = 1`
    /// and Halton otherwise.
    pub grids: Option<Vec<RankGrid>>,
    pub b: usize,
    pub alpha: f64,
    pub seed: u64,
    /// Replace every column by its classical ranks before the transport
    /// step.
    pub prerank: bool,
    /// `(scale, seed)` of uniform noise added to the data first.
    pub jitter: Option<(f64, u64)>,
    /// Load the null table from here if the file exists (metadata must
    /// match), otherwise generate it and save it here.
    pub table_path: Option<PathBuf>,
    /// Cache directory used like `table_path` with a file name derived
    /// from the table metadata, when no explicit path is given.
    pub table_dir: Option<PathBuf>,
    /// A table computed beforehand. Mode, counts, dimensions and grids
    /// must match the test; `b` and `seed` are taken from the table.
    pub table: Option<Arc<NullTable>>,
    pub record_timings: bool,
}

impl Default for TestOptions {
    fn default() -> Self {
        TestOptions {
            grids: None,
            b: DEFAULT_B,
            alpha: DEFAULT_ALPHA,
            seed: 0,
            prerank: false,
            jitter: None,
            table_path: None,
            table_dir: None,
            table: None,
            record_timings: false,
        }
    }
}

impl TestOptions {
    pub fn with_b(mut self, b: usize) -> Self {
        self.b = b;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_table(mut self, table: Arc<NullTable>) -> Self {
        self.table = Some(table);
        self
    }

    pub fn with_grids(mut self, grids: Vec<RankGrid>) -> Self {
        self.grids = Some(grids);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub ranks_ms: f64,
    pub table_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub schema: u32,
    pub test_kind: NullMode,
    pub statistic_raw: f64,
    pub statistic_scaled: f64,
    /// Factor between the raw and the scaled statistic, e.g. `"n"`.
    pub scale: String,
    pub p_value: f64,
    pub alpha: f64,
    pub critical_value: f64,
    pub reject: bool,
    pub counts: Vec<usize>,
    pub dims: Vec<usize>,
    pub grids: Vec<String>,
    pub b: usize,
    pub seed: u64,
    pub generator: String,
    pub warnings: Vec<String>,
    pub timings: Option<Timings>,
}

impl TestReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct Clock {
    start: Instant,
    ranks_done: Option<Instant>,
}

impl Clock {
    fn start() -> Self {
        Clock {
            start: Instant::now(),
            ranks_done: None,
        }
    }

    fn ranks_done(&mut self) {
        self.ranks_done = Some(Instant::now());
    }

    fn finish(&self) -> Timings {
        let now = Instant::now();
        let mid = self.ranks_done.unwrap_or(now);
        let ms = |a: Instant, b: Instant| (b - a).as_secs_f64() * 1e3;
        Timings {
            ranks_ms: ms(self.start, mid),
            table_ms: ms(mid, now),
            total_ms: ms(self.start, now),
        }
    }
}

fn check_options(opts: &TestOptions) -> Result<()> {
    if opts.b == 0 {
        return Err(Error::InvalidArgument("B must be at least 1".into()));
    }
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {}",
            opts.alpha
        )));
    }
    Ok(())
}

/// Applies jitter and preranking as requested.
fn prepare(data: &PointCloud, index: u64, opts: &TestOptions, warnings: &mut Vec<String>) -> Result<PointCloud> {
    let mut data = data.clone();
    if let Some((scale, seed)) = opts.jitter {
        data = jitter(&data, scale, seed.wrapping_add(index))?;
        if index == 0 {
            warnings.push(format!("jitter of scale {scale} applied (seed {seed})"));
        }
    }
    if opts.prerank {
        let (ranked, w) = coordinatewise_prerank(&data);
        warnings.extend(w.into_iter().map(|m| format!("input {}: {m}", index + 1)));
        data = ranked;
    }
    Ok(data)
}

fn grid_or_default(opts: &TestOptions, slot: usize, slots: usize, n: usize, d: usize) -> Result<RankGrid> {
    match &opts.grids {
        None => RankGrid::default_for(n, d),
        Some(grids) => {
            if grids.len() != slots {
                return Err(Error::Shape(format!(
                    "expected {slots} grid(s), got {}",
                    grids.len()
                )));
            }
            let g = &grids[slot];
            if g.n() != n || g.d() != d {
                return Err(Error::Shape(format!(
                    "grid {} is {}x{} but the data need {n}x{d}",
                    slot + 1,
                    g.n(),
                    g.d()
                )));
            }
            Ok(g.clone())
        }
    }
}

fn obtain_table(
    meta: &TableMeta,
    opts: &TestOptions,
    generate: impl FnOnce() -> Result<NullTable>,
) -> Result<Arc<NullTable>> {
    if let Some(table) = &opts.table {
        if !same_shape(table.meta(), meta) {
            return Err(Error::Metadata(format!(
                "supplied table is for {:?}, test needs {:?}",
                table.meta(),
                meta
            )));
        }
        return Ok(Arc::clone(table));
    }
    let cached = opts
        .table_dir
        .as_ref()
        .map(|dir| dir.join(meta.cache_file_name()));
    if let Some(path) = opts.table_path.as_ref().or(cached.as_ref()) {
        if path.exists() {
            return load_table_matching(path, meta).map(Arc::new);
        }
        let table = generate()?;
        save_table(&table, path)?;
        return Ok(Arc::new(table));
    }
    generate().map(Arc::new)
}

/// A shared table may come from any seed and size; everything that
/// determines its law must agree.
fn same_shape(a: &TableMeta, b: &TableMeta) -> bool {
    a.mode == b.mode
        && a.counts == b.counts
        && a.dims == b.dims
        && a.grids == b.grids
        && a.generator == b.generator
}

fn meta(mode: NullMode, counts: Vec<usize>, dims: Vec<usize>, grids: Vec<String>, opts: &TestOptions) -> TableMeta {
    TableMeta {
        mode,
        counts,
        dims,
        grids,
        b: opts.b,
        seed: opts.seed,
        generator: GENERATOR.into(),
    }
}

fn finish(
    meta: TableMeta,
    raw: f64,
    table: &NullTable,
    opts: &TestOptions,
    warnings: Vec<String>,
    clock: &Clock,
) -> Result<TestReport> {
    let scaled = meta.scale() * raw;
    let cv = critical_value(table, opts.alpha)?;
    Ok(TestReport {
        schema: SCHEMA_VERSION,
        test_kind: meta.mode,
        statistic_raw: raw,
        statistic_scaled: scaled,
        scale: meta.mode.scale_label().into(),
        p_value: p_value(table, scaled),
        alpha: opts.alpha,
        critical_value: cv,
        reject: scaled >= cv,
        counts: meta.counts,
        dims: meta.dims,
        grids: meta.grids,
        b: table.b(),
        seed: table.meta().seed,
        generator: meta.generator,
        warnings,
        timings: opts.record_timings.then(|| clock.finish()),
    })
}

/// `perm_t ∘ perm_0⁻¹`: grid labels of block `t` indexed by the grid label
/// of block 0.
fn relative_to(base_inverse: &[usize], perm: &[usize]) -> Vec<usize> {
    base_inverse.iter().map(|&i| perm[i]).collect()
}

/// Rank distance covariance test of independence between `x` and `y`,
/// rejecting for large `n · RdCov²`.
pub fn rdcov_test(x: &PointCloud, y: &PointCloud, opts: &TestOptions) -> Result<TestReport> {
    check_options(opts)?;
    if x.n() != y.n() {
        return Err(Error::Shape(format!(
            "X has {} rows but Y has {}",
            x.n(),
            y.n()
        )));
    }
    let mut clock = Clock::start();
    let mut warnings = Vec::new();
    let x = prepare(x, 0, opts, &mut warnings)?;
    let y = prepare(y, 1, opts, &mut warnings)?;
    let n = x.n();
    let gx = grid_or_default(opts, 0, 2, n, x.d())?;
    let gy = grid_or_default(opts, 1, 2, n, y.d())?;
    let rx = empirical_ranks(&x, &gx)?;
    let ry = empirical_ranks(&y, &gy)?;
    warnings.extend(rx.warnings().iter().map(|w| format!("X: {w}")));
    warnings.extend(ry.warnings().iter().map(|w| format!("Y: {w}")));
    let pi = relative_to(&invert(rx.perm()), ry.perm());
    let raw = RdcovKernel::new(&gx, &gy)?.raw(&pi)?;
    clock.ranks_done();

    let meta = meta(
        NullMode::Rdcov,
        vec![n],
        vec![x.d(), y.d()],
        vec![gx.descriptor(), gy.descriptor()],
        opts,
    );
    let table = obtain_table(&meta, opts, || {
        nulldist::null_sample_rdcov(&gx, &gy, opts.b, opts.seed)
    })?;
    finish(meta, raw, &table, opts, warnings, &clock)
}

/// Rank energy two-sample test, rejecting for large `mn/(m+n) · RE²`.
pub fn re_test(x: &PointCloud, y: &PointCloud, opts: &TestOptions) -> Result<TestReport> {
    check_options(opts)?;
    if x.d() != y.d() {
        return Err(Error::Shape(format!(
            "X has dimension {} but Y has {}",
            x.d(),
            y.d()
        )));
    }
    group_test(NullMode::Energy, &[x, y], opts)
}

/// Rank energy test that `K >= 2` samples share one distribution, rejecting
/// for large `n · Σ_j RE²(sample j, sample j+1)` with `n` the pooled count.
pub fn k_sample_test(samples: &[&PointCloud], opts: &TestOptions) -> Result<TestReport> {
    check_options(opts)?;
    if samples.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least two samples, got {}",
            samples.len()
        )));
    }
    let d = samples[0].d();
    if let Some(s) = samples.iter().find(|s| s.d() != d) {
        return Err(Error::Shape(format!(
            "samples have dimensions {d} and {}",
            s.d()
        )));
    }
    group_test(NullMode::KSample, samples, opts)
}

fn group_test(mode: NullMode, samples: &[&PointCloud], opts: &TestOptions) -> Result<TestReport> {
    let mut clock = Clock::start();
    let mut warnings = Vec::new();
    let prepared = samples
        .iter()
        .enumerate()
        .map(|(i, s)| prepare(s, i as u64, opts, &mut warnings))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&PointCloud> = prepared.iter().collect();
    let sizes: Vec<usize> = refs.iter().map(|s| s.n()).collect();
    let total = sizes.iter().sum();
    let d = refs[0].d();
    let grid = grid_or_default(opts, 0, 1, total, d)?;
    let pooled = pooled_ranks(&refs, &grid)?;
    warnings.extend(pooled.map().warnings().iter().cloned());
    let raw = GroupKernel::new(&grid, &sizes)?.raw(&pooled.labels_by_grid())?;
    clock.ranks_done();

    let meta = meta(mode, sizes.clone(), vec![d], vec![grid.descriptor()], opts);
    let table = obtain_table(&meta, opts, || match mode {
        NullMode::Energy => nulldist::null_sample_re(sizes[0], sizes[1], &grid, opts.b, opts.seed),
        _ => nulldist::null_sample_k_sample(&sizes, &grid, opts.b, opts.seed),
    })?;
    finish(meta, raw, &table, opts, warnings, &clock)
}

/// Mutual independence of `K >= 2` column blocks of `x`, rejecting for
/// large `n · Σ_{j<K} RdCov²(block j, blocks j+1..K)`.
///
/// Each block is ranked once on its own grid; the rank of the tail
/// `j+1..K` is the concatenation of the block ranks.
pub fn k_indep_test(x: &PointCloud, block_dims: &[usize], opts: &TestOptions) -> Result<TestReport> {
    check_options(opts)?;
    if block_dims.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least two blocks, got {}",
            block_dims.len()
        )));
    }
    if block_dims.contains(&0) || block_dims.iter().sum::<usize>() != x.d() {
        return Err(Error::Shape(format!(
            "block dimensions {block_dims:?} do not partition the {} columns",
            x.d()
        )));
    }
    let mut clock = Clock::start();
    let mut warnings = Vec::new();
    let x = prepare(x, 0, opts, &mut warnings)?;
    let n = x.n();
    let k = block_dims.len();
    let mut grids = Vec::with_capacity(k);
    let mut perms = Vec::with_capacity(k);
    let mut start = 0;
    for (j, &d) in block_dims.iter().enumerate() {
        let block = x.columns(start, start + d)?;
        start += d;
        let grid = grid_or_default(opts, j, k, n, d)?;
        let map = empirical_ranks(&block, &grid)?;
        warnings.extend(map.warnings().iter().map(|w| format!("block {}: {w}", j + 1)));
        perms.push(map.perm().to_vec());
        grids.push(grid);
    }
    let base_inverse = invert(&perms[0]);
    let relative: Vec<Vec<usize>> = perms[1..]
        .iter()
        .map(|p| relative_to(&base_inverse, p))
        .collect();
    let mut views: Vec<Option<&[usize]>> = vec![None];
    views.extend(relative.iter().map(|p| Some(p.as_slice())));
    let raw = KIndepKernel::new(&grids)?.raw(&views)?;
    clock.ranks_done();

    let meta = meta(
        NullMode::KIndep,
        vec![n],
        block_dims.to_vec(),
        grids.iter().map(RankGrid::descriptor).collect(),
        opts,
    );
    let table = obtain_table(&meta, opts, || {
        nulldist::null_sample_k_indep(&grids, opts.b, opts.seed)
    })?;
    finish(meta, raw, &table, opts, warnings, &clock)
}

/// Test that `x` and `-x` share a distribution, rejecting for large
/// `n/2 · T_n` with `T_n` the energy distance between the paired ranks of
/// the `x_i` and of the `-x_i`.
pub fn symmetry_test(x: &PointCloud, opts: &TestOptions) -> Result<TestReport> {
    check_options(opts)?;
    if opts.grids.is_some() {
        return Err(Error::InvalidArgument(
            "the symmetry test always uses the Halton grid in dimension 2d".into(),
        ));
    }
    let mut clock = Clock::start();
    let mut warnings = Vec::new();
    let x = prepare(x, 0, opts, &mut warnings)?;
    if x.has_duplicate_rows() {
        warnings.push("data contain duplicate rows; ranks depend on the solver's tie-break".into());
    }
    let ranks = paired_symmetry_ranks(&x)?;
    let raw = SymmetryKernel::new(ranks.grid())?.raw(&ranks.first_half_positive_by_grid())?;
    clock.ranks_done();

    let (n, d) = (x.n(), x.d());
    let meta = meta(
        NullMode::Symmetry,
        vec![n],
        vec![d],
        vec![ranks.grid().descriptor()],
        opts,
    );
    let table = obtain_table(&meta, opts, || {
        nulldist::null_sample_symmetry(n, d, opts.b, opts.seed)
    })?;
    finish(meta, raw, &table, opts, warnings, &clock)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{dcov_sq, energy_sq};

    fn col(v: &[f64]) -> PointCloud {
        PointCloud::from_column(v).unwrap()
    }

    fn opts() -> TestOptions {
        TestOptions::default().with_b(199).with_seed(4)
    }

    #[test]
    fn rdcov_two_points() {
        let r = rdcov_test(&col(&[0.0, 1.0]), &col(&[0.0, 1.0]), &opts()).unwrap();
        assert!((r.statistic_raw - 1.0 / 16.0).abs() < 1e-15);
        assert!((r.statistic_scaled - 1.0 / 8.0).abs() < 1e-15);
        assert_eq!(r.scale, "n");
    }

    #[test]
    fn rdcov_single_point() {
        let r = rdcov_test(&col(&[3.0]), &col(&[-1.0]), &opts()).unwrap();
        assert_eq!(r.statistic_raw, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(!r.reject);
    }

    #[test]
    fn re_singletons() {
        let r = re_test(&col(&[0.0]), &col(&[5.0]), &opts()).unwrap();
        assert_eq!(r.statistic_raw, 1.0);
        assert_eq!(r.statistic_scaled, 0.5);
    }

    #[test]
    fn kernels_agree_with_reference_statistics() {
        let x = PointCloud::from_rows(&[
            vec![0.3, 1.0],
            vec![-0.4, 2.0],
            vec![1.2, 0.1],
            vec![0.8, -0.7],
            vec![-1.1, 0.4],
        ])
        .unwrap();
        let y = col(&[0.2, -0.9, 1.4, 0.6, 0.0]);
        let r = rdcov_test(&x, &y, &opts()).unwrap();
        let gx = RankGrid::default_for(5, 2).unwrap();
        let gy = RankGrid::default_for(5, 1).unwrap();
        let rx = empirical_ranks(&x, &gx).unwrap().ranks();
        let ry = empirical_ranks(&y, &gy).unwrap().ranks();
        assert!((r.statistic_raw - dcov_sq(&rx, &ry).unwrap()).abs() < 1e-14);

        let a = col(&[0.5, 2.0, -1.0]);
        let b = col(&[0.1, 3.0, 0.7, 1.9]);
        let r = re_test(&a, &b, &opts()).unwrap();
        let pooled = pooled_ranks(&[&a, &b], &RankGrid::default_for(7, 1).unwrap()).unwrap();
        let direct = energy_sq(&pooled.slice(0), &pooled.slice(1)).unwrap();
        assert!((r.statistic_raw - direct).abs() < 1e-14);
    }

    #[test]
    fn k_indep_two_blocks_matches_rdcov() {
        let x = PointCloud::from_rows(&[
            vec![0.3, 1.0, 5.0],
            vec![-0.4, 2.0, 1.0],
            vec![1.2, 0.1, 2.5],
            vec![0.8, -0.7, 0.0],
            vec![-1.1, 0.4, -3.0],
            vec![0.0, 0.9, 4.0],
        ])
        .unwrap();
        let k = k_indep_test(&x, &[2, 1], &opts()).unwrap();
        let r = rdcov_test(&x.columns(0, 2).unwrap(), &x.columns(2, 3).unwrap(), &opts()).unwrap();
        assert_eq!(k.statistic_raw, r.statistic_raw);
        assert_eq!(k.statistic_scaled, r.statistic_scaled);
        assert_eq!(k.p_value, r.p_value);
        assert!(k_indep_test(&x, &[2, 2], &opts()).is_err());
        assert!(k_indep_test(&x, &[3], &opts()).is_err());
    }

    #[test]
    fn reports_are_deterministic() {
        let x = PointCloud::from_rows(&[vec![0.1, 0.5], vec![0.7, -0.2], vec![2.0, 1.0]]).unwrap();
        let a = symmetry_test(&x, &opts()).unwrap();
        let b = symmetry_test(&x, &opts()).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert!(a.timings.is_none());
    }

    #[test]
    fn mismatched_shared_table() {
        let table = nulldist::build_null_table(NullMode::Rdcov, &[3], &[1, 1], 10, 0).unwrap();
        let o = TestOptions::default().with_b(10).with_table(Arc::new(table));
        let x = col(&[1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(rdcov_test(&x, &x, &o), Err(Error::Metadata(_))));
    }
}
