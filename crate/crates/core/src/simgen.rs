//! Synthetic data for power and level studies.
//!
//! Variates come from `rand_distr` on a ChaCha8 stream (ziggurat normal,
//! tangent-transform Cauchy, inverse-CDF Pareto, Marsaglia–Tsang Gamma),
//! so a seed pins the data exactly.
//!
//! Independence settings produce `(X, Y)` with `n` rows and three columns
//! each; the scalar recipes V1–V4 and V6–V9 are drawn independently per
//! column. Two-sample settings produce `X` with `m` rows and `Y` with `n`
//! rows in three dimensions.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, Gamma, Pareto, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{k_indep_test, k_sample_test, rdcov_test, re_test, TestOptions};
use crate::nulldist::{build_null_table, NullMode, NullTable};
use crate::ranks::PointCloud;

/// Offset separating data streams from null-table streams of the same seed.
const DATA_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

/// Primitive random variates on a ChaCha8 stream.
#[derive(Debug, Clone)]
pub struct Samplers {
    rng: ChaCha8Rng,
}

impl Samplers {
    pub fn new(seed: u64) -> Self {
        Self::from_rng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn from_rng(rng: ChaCha8Rng) -> Self {
        Samplers { rng }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn std_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Normal with the given mean and variance.
    pub fn normal(&mut self, mean: f64, variance: f64) -> f64 {
        mean + variance.sqrt() * self.std_normal()
    }

    pub fn cauchy(&mut self, loc: f64, scale: f64) -> f64 {
        Cauchy::new(loc, scale).expect("valid Cauchy").sample(&mut self.rng)
    }

    /// Pareto with minimum `scale` and tail index `shape`.
    pub fn pareto(&mut self, scale: f64, shape: f64) -> f64 {
        Pareto::new(scale, shape).expect("valid Pareto").sample(&mut self.rng)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Gamma with the given shape and rate.
    pub fn gamma(&mut self, shape: f64, rate: f64) -> f64 {
        Gamma::new(shape, 1.0 / rate).expect("valid Gamma").sample(&mut self.rng)
    }

    /// One draw from `N(mean, L Lᵀ)` given the lower Cholesky factor `L`.
    pub fn mvn(&mut self, mean: &[f64], chol: &[f64]) -> Vec<f64> {
        let d = mean.len();
        let z: Vec<f64> = (0..d).map(|_| self.std_normal()).collect();
        (0..d)
            .map(|i| mean[i] + (0..=i).map(|k| chol[i * d + k] * z[k]).sum::<f64>())
            .collect()
    }
}

/// Lower Cholesky factor of a row-major `d × d` covariance matrix.
pub fn cholesky(cov: &[f64], d: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i * d + k] * l[j * d + k]).sum();
            if i == j {
                let v = cov[i * d + i] - s;
                if v <= 0.0 {
                    return Err(Error::InvalidArgument(
                        "covariance matrix is not positive definite".into(),
                    ));
                }
                l[i * d + i] = v.sqrt();
            } else {
                l[i * d + j] = (cov[i * d + j] - s) / l[j * d + j];
            }
        }
    }
    Ok(l)
}

fn ar_cov(r: f64) -> Vec<f64> {
    (0..9i32)
        .map(|k| r.powi((k / 3 - k % 3).abs()))
        .collect()
}

fn equi_cov(r: f64) -> Vec<f64> {
    (0..9).map(|k| if k / 3 == k % 3 { 1.0 } else { r }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SettingId {
    IndV1,
    IndV2,
    IndV3,
    IndV4,
    IndV5,
    IndV6,
    IndV7,
    IndV8,
    IndV9,
    IndV10,
    /// Gaussian pairs with correlation `ρ` between matching coordinates.
    IndIg,
    /// Coordinatewise exponential of [`SettingId::IndIg`].
    IndIgl,
    TsV1,
    TsV2,
    TsV3,
    TsV4,
    TsV5,
    TsV6,
    TsV7,
    TsV8,
    TsV9,
    TsV10,
    TsV11,
    /// `N₃(μ1, 3I)` against `N₃(0, 3I)`.
    TsTg,
    /// Coordinatewise exponential of [`SettingId::TsTg`].
    TsTgl,
}

impl SettingId {
    pub const ALL: [SettingId; 25] = [
        SettingId::IndV1,
        SettingId::IndV2,
        SettingId::IndV3,
        SettingId::IndV4,
        SettingId::IndV5,
        SettingId::IndV6,
        SettingId::IndV7,
        SettingId::IndV8,
        SettingId::IndV9,
        SettingId::IndV10,
        SettingId::IndIg,
        SettingId::IndIgl,
        SettingId::TsV1,
        SettingId::TsV2,
        SettingId::TsV3,
        SettingId::TsV4,
        SettingId::TsV5,
        SettingId::TsV6,
        SettingId::TsV7,
        SettingId::TsV8,
        SettingId::TsV9,
        SettingId::TsV10,
        SettingId::TsV11,
        SettingId::TsTg,
        SettingId::TsTgl,
    ];

    pub fn name(self) -> &'static str {
        use SettingId::*;
        match self {
            IndV1 => "ind-v1",
            IndV2 => "ind-v2",
            IndV3 => "ind-v3",
            IndV4 => "ind-v4",
            IndV5 => "ind-v5",
            IndV6 => "ind-v6",
            IndV7 => "ind-v7",
            IndV8 => "ind-v8",
            IndV9 => "ind-v9",
            IndV10 => "ind-v10",
            IndIg => "ind-ig",
            IndIgl => "ind-igl",
            TsV1 => "ts-v1",
            TsV2 => "ts-v2",
            TsV3 => "ts-v3",
            TsV4 => "ts-v4",
            TsV5 => "ts-v5",
            TsV6 => "ts-v6",
            TsV7 => "ts-v7",
            TsV8 => "ts-v8",
            TsV9 => "ts-v9",
            TsV10 => "ts-v10",
            TsV11 => "ts-v11",
            TsTg => "ts-tg",
            TsTgl => "ts-tgl",
        }
    }

    pub fn is_independence(self) -> bool {
        self.name().starts_with("ind")
    }

    /// Whether the setting takes a parameter (`ρ` or `μ`).
    pub fn has_param(self) -> bool {
        matches!(
            self,
            SettingId::IndIg | SettingId::IndIgl | SettingId::TsTg | SettingId::TsTgl
        )
    }
}

impl fmt::Display for SettingId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SettingId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        SettingId::ALL
            .into_iter()
            .find(|id| id.name() == key)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown setting '{s}'")))
    }
}

/// A setting with its sample sizes and parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSetting {
    pub id: SettingId,
    /// Rows of `X` in two-sample settings; ignored otherwise.
    pub m: usize,
    pub n: usize,
    /// `ρ` for IG/IGL, `μ` for TG/TGL.
    pub param: f64,
}

impl SimSetting {
    /// The setting at the paper's sizes (`n = 200`, `m = n = 200`) with
    /// parameter 0.
    pub fn new(id: SettingId) -> Self {
        SimSetting {
            id,
            m: 200,
            n: 200,
            param: 0.0,
        }
    }

    pub fn with_sizes(mut self, m: usize, n: usize) -> Self {
        self.m = m;
        self.n = n;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_param(mut self, param: f64) -> Self {
        self.param = param;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || (!self.id.is_independence() && self.m == 0) {
            return Err(Error::InvalidArgument("sample sizes must be positive".into()));
        }
        if !self.param.is_finite() {
            return Err(Error::InvalidArgument("setting parameter must be finite".into()));
        }
        if matches!(self.id, SettingId::IndIg | SettingId::IndIgl) && self.param.abs() > 1.0 {
            return Err(Error::InvalidArgument(format!(
                "correlation must lie in [-1, 1], got {}",
                self.param
            )));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        if self.id.has_param() {
            format!("{}({})", self.id, self.param)
        } else {
            self.id.to_string()
        }
    }
}

/// One dataset from `setting`: `(X, Y)` paired rows for independence
/// settings, two samples otherwise.
pub fn generate(setting: &SimSetting, seed: u64) -> Result<(PointCloud, PointCloud)> {
    generate_with(setting, &mut Samplers::new(seed))
}

pub fn generate_with(setting: &SimSetting, s: &mut Samplers) -> Result<(PointCloud, PointCloud)> {
    setting.validate()?;
    if setting.id.is_independence() {
        independence(setting, s)
    } else {
        two_sample(setting, s)
    }
}

fn cloud(n: usize, data: Vec<f64>) -> Result<PointCloud> {
    PointCloud::new(n, 3, data)
}

fn independence(setting: &SimSetting, s: &mut Samplers) -> Result<(PointCloud, PointCloud)> {
    use SettingId::*;
    let n = setting.n;
    let mut x = Vec::with_capacity(3 * n);
    let mut y = Vec::with_capacity(3 * n);
    match setting.id {
        IndV5 | IndV10 => {
            let mut cov = vec![0.0; 36];
            for i in 0..6 {
                for j in 0..6 {
                    cov[i * 6 + j] = if i == j {
                        1.0
                    } else if (i < 3) != (j < 3) {
                        0.3
                    } else {
                        0.0
                    };
                }
            }
            let chol = cholesky(&cov, 6)?;
            let half: Vec<f64> = cov.iter().map(|v| v / 2.0).collect();
            let chol_half = cholesky(&half, 6)?;
            let p2 = if setting.id == IndV5 { 0.3 } else { 0.0 };
            for _ in 0..n {
                let uv = s.mvn(&[0.0; 6], &chol);
                let wz = s.mvn(&[1.0; 6], &chol_half);
                let a1 = s.bernoulli(0.5);
                let a2 = s.bernoulli(p2);
                x.extend_from_slice(if a1 { &wz[..3] } else { &uv[..3] });
                y.extend_from_slice(if a2 { &wz[3..] } else { &uv[3..] });
            }
        }
        IndIg | IndIgl => {
            let rho = setting.param;
            let resid = (1.0 - rho * rho).max(0.0).sqrt();
            let f = |v: f64| if setting.id == IndIgl { v.exp() } else { v };
            for _ in 0..n {
                for _ in 0..3 {
                    let z1 = s.std_normal();
                    let z2 = rho * z1 + resid * s.std_normal();
                    x.push(f(z1));
                    y.push(f(z2));
                }
            }
        }
        id => {
            for _ in 0..n {
                for _ in 0..3 {
                    let (a, b) = scalar_pair(id, s);
                    x.push(a);
                    y.push(b);
                }
            }
        }
    }
    Ok((cloud(n, x)?, cloud(n, y)?))
}

/// One `(X, Y)` draw of a scalar independence recipe.
fn scalar_pair(id: SettingId, s: &mut Samplers) -> (f64, f64) {
    use SettingId::*;
    match id {
        IndV1 => {
            let a = s.std_normal();
            (0.2 * s.cauchy(0.0, 1.0) + a, 0.2 * s.cauchy(0.0, 1.0) + a)
        }
        IndV2 => {
            let x = s.uniform_in(-1.0, 1.0);
            (x, (x * x + s.uniform()) / 2.0)
        }
        IndV3 => {
            let x = s.normal(0.0, 2.0);
            let e = s.bernoulli(0.04);
            let v = s.normal(0.0, 2.0);
            (x, if e { x } else { v })
        }
        IndV4 => {
            let w = s.uniform_in(-1.0, 1.0);
            let w1 = s.uniform();
            let w2 = s.uniform();
            let v1 = w + w1 / 3.0;
            let v2 = 4.0 * (w * w - 0.5).powi(2) + w2;
            let a = s.bernoulli(0.5);
            let noise = s.normal(5.0, 1.0);
            (v1, if a { noise } else { v2 })
        }
        IndV6 => {
            let a = s.std_normal();
            (s.pareto(1.0, 2.0).powi(2) + a, s.pareto(1.0, 1.0).powi(2) + a)
        }
        IndV7 => {
            let x = s.uniform();
            let eps = s.normal(0.0, 5.0);
            (x, x.powf(0.25) + eps)
        }
        IndV8 => {
            let x = s.std_normal();
            (x, (4.0 * x * x).ln())
        }
        IndV9 => {
            let a = s.std_normal();
            (
                (a + s.pareto(1.0, 1.0)).abs().powf(1.5),
                (a + s.pareto(1.0, 1.0)).abs().powf(1.5),
            )
        }
        _ => unreachable!("not a scalar recipe"),
    }
}

fn two_sample(setting: &SimSetting, s: &mut Samplers) -> Result<(PointCloud, PointCloud)> {
    use SettingId::*;
    let (m, n) = (setting.m, setting.n);
    let mvn_rows = |s: &mut Samplers, rows: usize, mean: [f64; 3], cov: &[f64], exp: bool| -> Result<Vec<f64>> {
        let chol = cholesky(cov, 3)?;
        let mut out = Vec::with_capacity(rows * 3);
        for _ in 0..rows {
            let v = s.mvn(&mean, &chol);
            out.extend(v.into_iter().map(|t| if exp { t.exp() } else { t }));
        }
        Ok(out)
    };
    let scaled_identity = |c: f64| -> Vec<f64> { (0..9).map(|k| if k / 3 == k % 3 { c } else { 0.0 }).collect() };
    let (x, y) = match setting.id {
        TsV1 => {
            let x = (0..3 * m).map(|_| s.cauchy(0.0, 1.0)).collect();
            let mut y = Vec::with_capacity(3 * n);
            for _ in 0..n {
                y.push(s.cauchy(0.0, 1.0));
                y.push(s.cauchy(0.2, 1.0));
                y.push(s.cauchy(0.2, 1.0));
            }
            (x, y)
        }
        TsV2 => {
            let mut chain = |rows: usize, coef: f64| {
                let mut out = Vec::with_capacity(rows * 3);
                for _ in 0..rows {
                    let mut prev = s.uniform();
                    out.push(prev);
                    for _ in 1..3 {
                        prev = 0.25 + coef * prev + s.uniform();
                        out.push(prev);
                    }
                }
                out
            };
            let x = chain(m, 0.35);
            let y = chain(n, 0.5);
            (x, y)
        }
        TsV3 => (
            mvn_rows(s, m, [0.0; 3], &ar_cov(0.35), false)?,
            mvn_rows(s, n, [0.0; 3], &ar_cov(0.65), false)?,
        ),
        TsV4 => (
            mvn_rows(s, m, [0.0; 3], &equi_cov(0.2), false)?,
            mvn_rows(s, n, [0.0; 3], &equi_cov(0.5), false)?,
        ),
        TsV5 => (
            mvn_rows(s, m, [0.0; 3], &ar_cov(0.35), true)?,
            mvn_rows(s, n, [0.0; 3], &ar_cov(0.75), true)?,
        ),
        TsV6 => (
            mvn_rows(s, m, [0.0; 3], &equi_cov(0.25), true)?,
            mvn_rows(s, n, [0.0; 3], &equi_cov(0.75), true)?,
        ),
        TsV7 | TsV8 => {
            let exp = setting.id == TsV8;
            (
                mvn_rows(s, m, [0.0; 3], &scaled_identity(3.0), exp)?,
                mvn_rows(s, n, [0.25; 3], &scaled_identity(3.0), exp)?,
            )
        }
        TsV9 => {
            let x = (0..3 * m).map(|_| s.gamma(2.0, 0.1)).collect();
            let y = (0..3 * n)
                .map(|_| {
                    let v = s.gamma(2.0, 0.1);
                    let w = s.std_normal().exp().exp();
                    w * v
                })
                .collect();
            (x, y)
        }
        TsV10 | TsV11 => {
            let x = (0..3 * m).map(|_| 1.0 + s.std_normal()).collect();
            let mut y = Vec::with_capacity(3 * n);
            for _ in 0..n {
                let z: Vec<f64> = (0..3).map(|_| 1.0 + s.std_normal()).collect();
                let w: Vec<f64> = (0..3)
                    .map(|_| {
                        if setting.id == TsV10 {
                            s.uniform_in(10.0, 11.0)
                        } else {
                            s.normal(10.0, 0.1)
                        }
                    })
                    .collect();
                let a = s.bernoulli(0.8);
                y.extend(if a { z } else { w });
            }
            (x, y)
        }
        TsTg | TsTgl => {
            let exp = setting.id == TsTgl;
            let mu = setting.param;
            (
                mvn_rows(s, m, [mu; 3], &scaled_identity(3.0), exp)?,
                mvn_rows(s, n, [0.0; 3], &scaled_identity(3.0), exp)?,
            )
        }
        _ => unreachable!("independence settings handled elsewhere"),
    };
    Ok((cloud(m, x)?, cloud(n, y)?))
}

/// Outcome of a Monte Carlo power study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerResult {
    pub setting: String,
    pub test_kind: NullMode,
    pub alpha: f64,
    pub reps: usize,
    pub rejections: usize,
    pub rejection_fraction: f64,
    /// Binomial standard error `sqrt(p(1-p)/R)`.
    pub std_error: f64,
    pub seed: u64,
    pub b: usize,
    pub runtime_secs: f64,
}

impl PowerResult {
    pub const CSV_HEADER: &'static str =
        "setting,test_kind,alpha,reps,rejections,rejection_fraction,std_error,seed,b";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.setting,
            self.test_kind,
            self.alpha,
            self.reps,
            self.rejections,
            self.rejection_fraction,
            self.std_error,
            self.seed,
            self.b
        )
    }
}

/// Counts and dimensions of the null table a study needs.
fn table_shape(setting: &SimSetting, kind: NullMode) -> Result<(Vec<usize>, Vec<usize>)> {
    match (setting.id.is_independence(), kind) {
        (true, NullMode::Rdcov) | (true, NullMode::KIndep) => Ok((vec![setting.n], vec![3, 3])),
        (false, NullMode::Energy) | (false, NullMode::KSample) => {
            Ok((vec![setting.m, setting.n], vec![3]))
        }
        _ => Err(Error::InvalidArgument(format!(
            "test kind {kind} does not apply to setting {}",
            setting.id
        ))),
    }
}

/// Runs `reps` independent generate-and-test cycles against one null
/// table. Without a supplied table one is generated from `seed` with `b`
/// draws; data for replicate `r` come from stream `r` of a seed derived
/// from `seed`.
pub fn power_study(
    setting: &SimSetting,
    kind: NullMode,
    reps: usize,
    alpha: f64,
    seed: u64,
    b: usize,
    table: Option<Arc<NullTable>>,
) -> Result<PowerResult> {
    setting.validate()?;
    if reps == 0 {
        return Err(Error::InvalidArgument("need at least one replicate".into()));
    }
    let start = Instant::now();
    let (counts, dims) = table_shape(setting, kind)?;
    let table = match table {
        Some(t) => t,
        None => Arc::new(build_null_table(kind, &counts, &dims, b, seed)?),
    };
    let opts = TestOptions::default()
        .with_alpha(alpha)
        .with_b(table.b())
        .with_seed(table.meta().seed)
        .with_table(Arc::clone(&table));
    let outcomes = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(DATA_SEED_OFFSET));
            rng.set_stream(r as u64);
            let (x, y) = generate_with(setting, &mut Samplers::from_rng(rng))?;
            let report = match kind {
                NullMode::Rdcov => rdcov_test(&x, &y, &opts)?,
                NullMode::KIndep => k_indep_test(&PointCloud::hstack(&[&x, &y])?, &[3, 3], &opts)?,
                NullMode::Energy => re_test(&x, &y, &opts)?,
                _ => k_sample_test(&[&x, &y], &opts)?,
            };
            Ok(report.reject)
        })
        .collect::<Result<Vec<bool>>>()?;
    let rejections = outcomes.iter().filter(|&&r| r).count();
    let p = rejections as f64 / reps as f64;
    Ok(PowerResult {
        setting: setting.label(),
        test_kind: kind,
        alpha,
        reps,
        rejections,
        rejection_fraction: p,
        std_error: (p * (1.0 - p) / reps as f64).sqrt(),
        seed,
        b: table.b(),
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}
