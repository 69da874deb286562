//! Command-line front end. Reports go to stdout (or `--out`) as JSON,
//! diagnostics to stderr.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::error::{Error, Result};
use crate::hypothesis::{
    k_indep_test, k_sample_test, rdcov_test, re_test, symmetry_test, TestOptions, TestReport,
};
use crate::nulldist::{
    build_null_table, critical_value, load_table, save_table, NullMode, DEFAULT_ALPHA, DEFAULT_B,
};
use crate::qmc::RankGrid;
use crate::ranks::{coordinatewise_prerank, empirical_ranks, jitter, PointCloud};
use crate::simgen::{power_study, PowerResult, SettingId, SimSetting};

pub const TABLE_DIR_ENV: &str = "OT_RANKS_TABLE_DIR";

#[derive(Parser, Debug)]
#[command(name = "ot-ranks", version, about = "Distribution-free multivariate rank tests")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Null-table size (default 10000, or the size of an existing --table).
    #[arg(long = "b")]
    b: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Seed for the null table. If absent it is read from an existing
    /// --table, else drawn at random and printed to stderr.
    #[arg(long)]
    seed: Option<u64>,
    /// Input CSV files start with a header line.
    #[arg(long)]
    header: bool,
    /// Replace each column by its classical ranks first.
    #[arg(long)]
    prerank: bool,
    /// Add uniform noise of this half-width to the data.
    #[arg(long)]
    jitter: Option<f64>,
    #[arg(long, default_value_t = 0)]
    jitter_seed: u64,
    /// Null table to load, or to create if missing.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Custom grid CSV files, one per grid the test uses.
    #[arg(long = "grid")]
    grids: Vec<PathBuf>,
    /// Include wall-clock timings in the report.
    #[arg(long)]
    timings: bool,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the ranks of each observation as CSV.
    Ranks {
        #[arg(long)]
        input: PathBuf,
        /// Custom grid CSV (default: lattice for d = 1, Halton otherwise).
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long)]
        header: bool,
        #[arg(long)]
        prerank: bool,
        #[arg(long)]
        jitter: Option<f64>,
        #[arg(long, default_value_t = 0)]
        jitter_seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank distance covariance test of independence between X and Y.
    IndepTest {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Rank energy test that X and Y share a distribution.
    TwoSample {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Mutual independence of column blocks.
    KIndep {
        #[arg(long)]
        input: PathBuf,
        /// Block dimensions, e.g. 2,3,1.
        #[arg(long, value_delimiter = ',', required = true)]
        blocks: Vec<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Equality of distribution across several samples.
    KSample {
        /// Sample files, e.g. a.csv,b.csv,c.csv.
        #[arg(long, value_delimiter = ',', required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Test that X and -X share a distribution.
    Symmetry {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Generate a null table and save it.
    NullTable {
        /// rdcov, energy (or re), k-indep, k-sample or symmetry.
        #[arg(long)]
        mode: String,
        /// n; m,n for energy; group sizes for k-sample.
        #[arg(long, value_delimiter = ',', required = true)]
        counts: Vec<usize>,
        /// d1,d2 for rdcov; block dims for k-indep; d otherwise.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long = "b", default_value_t = DEFAULT_B)]
        b: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Critical values of n·RdCov² or mn/(m+n)·RE² as CSV.
    Thresholds {
        /// rdcov or re.
        #[arg(long)]
        mode: String,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long)]
        n: usize,
        /// Size of the first sample (re only; default n).
        #[arg(long)]
        m: Option<usize>,
        /// Dimensions to tabulate, repeatable: "d1,d2" (or "d" for d,d)
        /// for rdcov, "d" for re.
        #[arg(long)]
        dims: Vec<String>,
        /// Tabulate every dimension (pair) up to this value.
        #[arg(long)]
        max_dim: Option<usize>,
        #[arg(long = "b", default_value_t = DEFAULT_B)]
        b: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo power or level study on a synthetic setting.
    Simulate {
        /// Setting name, e.g. ind-v2, ind-ig, ts-v9, ts-tg.
        #[arg(long)]
        setting: String,
        /// rdcov, k-indep, energy or k-sample (default: rdcov for
        /// independence settings, energy otherwise).
        #[arg(long)]
        test: Option<String>,
        /// ρ for ind-ig/ind-igl, μ for ts-tg/ts-tgl.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        param: f64,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long = "b", default_value_t = DEFAULT_B)]
        b: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Also append a CSV row to this file (header written if new).
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Runs the command line and returns the process exit code: 0 on success
/// (a rejection is a result, not an error), 2 for usage errors, 3 for data
/// errors and 4 for internal-consistency failures.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| execute(cli.command)),
            Err(e) => Err(Error::InvalidArgument(format!("cannot start {t} threads: {e}"))),
        },
        None => execute(cli.command),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("seed: {s}");
        s
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn parse_mode(s: &str) -> Result<NullMode> {
    match s {
        "re" => Ok(NullMode::Energy),
        other => other.parse(),
    }
}

impl Common {
    fn options(&self) -> Result<TestOptions> {
        let grids = if self.grids.is_empty() {
            None
        } else {
            Some(
                self.grids
                    .iter()
                    .map(RankGrid::load_csv)
                    .collect::<Result<Vec<_>>>()?,
            )
        };
        let existing = match &self.table {
            Some(path) if path.exists() && (self.b.is_none() || self.seed.is_none()) => {
                Some(load_table(path)?.meta().clone())
            }
            _ => None,
        };
        let b = self
            .b
            .or(existing.as_ref().map(|m| m.b))
            .unwrap_or(DEFAULT_B);
        let seed = match (self.seed, &existing) {
            (Some(s), _) => s,
            (None, Some(m)) => m.seed,
            (None, None) => resolve_seed(None),
        };
        Ok(TestOptions {
            grids,
            b,
            alpha: self.alpha,
            seed,
            prerank: self.prerank,
            jitter: self.jitter.map(|s| (s, self.jitter_seed)),
            table_path: self.table.clone(),
            table_dir: std::env::var_os(TABLE_DIR_ENV).map(PathBuf::from),
            table: None,
            record_timings: self.timings,
        })
    }

    fn read(&self, path: &Path) -> Result<PointCloud> {
        parse_csv(path, self.header)
    }

    fn report(&self, report: &TestReport) -> Result<()> {
        let mut text = report.to_json();
        text.push('\n');
        emit(self.out.as_deref(), &text)
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Ranks {
            input,
            grid,
            header,
            prerank,
            jitter: jitter_scale,
            jitter_seed,
            out,
        } => {
            let mut data = parse_csv(&input, header)?;
            if let Some(scale) = jitter_scale {
                data = jitter(&data, scale, jitter_seed)?;
            }
            if prerank {
                let (ranked, warnings) = coordinatewise_prerank(&data);
                warnings.iter().for_each(|w| eprintln!("warning: {w}"));
                data = ranked;
            }
            let grid = match grid {
                Some(path) => RankGrid::load_csv(path)?,
                None => RankGrid::default_for(data.n(), data.d())?,
            };
            let map = empirical_ranks(&data, &grid)?;
            map.warnings().iter().for_each(|w| eprintln!("warning: {w}"));
            emit(out.as_deref(), &map.to_csv())
        }
        Command::IndepTest { x, y, common } => {
            let opts = common.options()?;
            let report = rdcov_test(&common.read(&x)?, &common.read(&y)?, &opts)?;
            common.report(&report)
        }
        Command::TwoSample { x, y, common } => {
            let opts = common.options()?;
            let report = re_test(&common.read(&x)?, &common.read(&y)?, &opts)?;
            common.report(&report)
        }
        Command::KIndep {
            input,
            blocks,
            common,
        } => {
            let opts = common.options()?;
            let report = k_indep_test(&common.read(&input)?, &blocks, &opts)?;
            common.report(&report)
        }
        Command::KSample { inputs, common } => {
            let opts = common.options()?;
            let samples = inputs
                .iter()
                .map(|p| common.read(p))
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<&PointCloud> = samples.iter().collect();
            let report = k_sample_test(&refs, &opts)?;
            common.report(&report)
        }
        Command::Symmetry { input, common } => {
            let opts = common.options()?;
            let report = symmetry_test(&common.read(&input)?, &opts)?;
            common.report(&report)
        }
        Command::NullTable {
            mode,
            counts,
            dims,
            b,
            seed,
            out,
        } => {
            let mode = parse_mode(&mode)?;
            let table = build_null_table(mode, &counts, &dims, b, resolve_seed(seed))?;
            save_table(&table, &out)?;
            let summary = json!({
                "path": out,
                "meta": table.meta(),
                "critical_value_0.05": critical_value(&table, 0.05)?,
            });
            emit(None, &format!("{}\n", serde_json::to_string_pretty(&summary).expect("json")))
        }
        Command::Thresholds {
            mode,
            alpha,
            n,
            m,
            dims,
            max_dim,
            b,
            seed,
            out,
        } => {
            let mode = parse_mode(&mode)?;
            let seed = resolve_seed(seed);
            let rows = threshold_rows(mode, alpha, n, m, &dims, max_dim, b, seed)?;
            emit(out.as_deref(), &rows)
        }
        Command::Simulate {
            setting,
            test,
            param,
            n,
            m,
            reps,
            alpha,
            b,
            seed,
            csv,
            out,
        } => {
            let id: SettingId = setting.parse()?;
            let sim = SimSetting::new(id)
                .with_sizes(m.unwrap_or(n), n)
                .with_param(param);
            let kind = match test {
                Some(t) => parse_mode(&t)?,
                None if id.is_independence() => NullMode::Rdcov,
                None => NullMode::Energy,
            };
            let result = power_study(&sim, kind, reps, alpha, resolve_seed(seed), b, None)?;
            if let Some(path) = csv {
                append_csv(&path, &result)?;
            }
            let text = serde_json::to_string_pretty(&result).expect("json");
            emit(out.as_deref(), &format!("{text}\n"))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn threshold_rows(
    mode: NullMode,
    alpha: f64,
    n: usize,
    m: Option<usize>,
    dims: &[String],
    max_dim: Option<usize>,
    b: usize,
    seed: u64,
) -> Result<String> {
    let mut shapes: Vec<Vec<usize>> = Vec::new();
    for spec in dims {
        let parts = spec
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidArgument(format!("bad dimension list '{spec}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        shapes.push(parts);
    }
    if let Some(max) = max_dim {
        for d1 in 1..=max {
            match mode {
                NullMode::Rdcov => shapes.extend((d1..=max).map(|d2| vec![d1, d2])),
                _ => shapes.push(vec![d1]),
            }
        }
    }
    if shapes.is_empty() {
        return Err(Error::InvalidArgument("give --dims or --max-dim".into()));
    }
    let (counts, label_m) = match mode {
        NullMode::Rdcov => (vec![n], String::new()),
        NullMode::Energy => {
            let m = m.unwrap_or(n);
            (vec![m, n], m.to_string())
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "thresholds support rdcov and re, not {other}"
            )))
        }
    };
    let mut out = String::from("mode,n,m,dims,alpha,b,seed,critical_value\n");
    for shape in shapes {
        let dims = match (mode, shape.as_slice()) {
            (NullMode::Rdcov, &[d]) => vec![d, d],
            _ => shape,
        };
        let table = build_null_table(mode, &counts, &dims, b, seed)?;
        let cv = critical_value(&table, alpha)?;
        let label: Vec<String> = dims.iter().map(usize::to_string).collect();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            mode,
            n,
            label_m,
            label.join("x"),
            alpha,
            b,
            seed,
            cv
        ));
    }
    Ok(out)
}

fn append_csv(path: &Path, result: &PowerResult) -> Result<()> {
    let fresh = !path.exists();
    let mut file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut text = String::new();
    if fresh {
        text.push_str(PowerResult::CSV_HEADER);
        text.push('\n');
    }
    text.push_str(&result.csv_row());
    text.push('\n');
    file.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Reads a numeric CSV file, one observation per row.
pub fn parse_csv(path: impl AsRef<Path>, has_header: bool) -> Result<PointCloud> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv_str(&text, has_header, path)
}

/// Parses CSV text; `path` only labels errors. Rows are reported by their
/// line number in the text and columns from 1.
pub fn parse_csv_str(text: &str, has_header: bool, path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let parse_err = |row: usize, column: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        row,
        column,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut data = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, 0, e.to_string())
        })?;
        let line = record.position().map_or(rows + 1, |p| p.line() as usize);
        let d = *width.get_or_insert(record.len());
        if record.len() != d {
            return Err(parse_err(
                line,
                record.len().min(d) + 1,
                format!("expected {d} fields, found {}", record.len()),
            ));
        }
        for (j, field) in record.iter().enumerate() {
            let x: f64 = field
                .parse()
                .map_err(|_| parse_err(line, j + 1, format!("'{field}' is not a number")))?;
            if !x.is_finite() {
                return Err(parse_err(line, j + 1, format!("non-finite value '{field}'")));
            }
            data.push(x);
        }
        rows += 1;
    }
    match width {
        Some(d) if rows > 0 => PointCloud::new(rows, d, data),
        _ => Err(Error::Data(format!("{} contains no data rows", path.display()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_examples() {
        let c = parse_csv_str("1.0,2.0\n3.0,4.0", false, "t.csv").unwrap();
        assert_eq!((c.n(), c.d()), (2, 2));
        assert_eq!(c.as_flat(), &[1.0, 2.0, 3.0, 4.0]);

        let err = parse_csv_str("1.0,2.0\n3.0\n", false, "t.csv").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }), "{err}");

        let err = parse_csv_str("nan,1", false, "t.csv").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 1, column: 1, ref message, .. } if message.contains("non-finite")));

        let c = parse_csv_str("a,b\n 1 , 2\n", true, "t.csv").unwrap();
        assert_eq!(c.as_flat(), &[1.0, 2.0]);
        assert!(parse_csv_str("x\n", true, "t.csv").is_err());
        let err = parse_csv_str("1,2\n3,abc\n", false, "t.csv").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, column: 2, .. }));
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["ot-ranks", "no-such-command"]), 2);
        assert_eq!(run(["ot-ranks", "indep-test", "--x", "a.csv"]), 2);
    }
}
