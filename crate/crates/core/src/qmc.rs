//! Fixed reference grids in the unit cube.
//!
//! Ranks are grid points, so a grid must be data-independent. Three kinds
//! are provided: the plain Halton sequence (indices start at 1, no
//! scrambling), the one-dimensional lattice `{1/n, ..., n/n}`, and
//! user-supplied point sets that pass validation.

use std::fmt;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Number of primes available as Halton bases; caps the grid dimension.
pub const MAX_HALTON_DIM: usize = 64;

const PRIMES: [u64; MAX_HALTON_DIM] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193,
    197, 199, 211, 223, 227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307,
    311,
];

/// The `j`-th prime, zero-indexed (`nth_prime(0) == 2`).
pub fn nth_prime(j: usize) -> Option<u64> {
    PRIMES.get(j).copied()
}

/// Digit-reversed fraction of `k` in the given base.
///
/// `6 = 110₂` maps to `0.011₂ = 3/8`. Digits are extracted with integer
/// arithmetic and folded back with one Horner pass, so for base 2 the
/// result is exact.
pub fn radical_inverse(k: u64, base: u64) -> f64 {
    debug_assert!(base >= 2);
    let mut digits = [0u8; 64];
    let mut len = 0;
    let mut rest = k;
    while rest > 0 {
        digits[len] = (rest % base) as u8;
        rest /= base;
        len += 1;
    }
    let b = base as f64;
    // least significant digit of k becomes the first digit after the point
    digits[..len]
        .iter()
        .rev()
        .fold(0.0, |acc, &digit| (acc + f64::from(digit)) / b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridKind {
    Halton,
    Lattice1d,
    Custom,
}

impl fmt::Display for GridKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GridKind::Halton => "halton",
            GridKind::Lattice1d => "lattice1d",
            GridKind::Custom => "custom",
        })
    }
}

/// `n` distinct points in `[0,1]^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RankGrid {
    points: Vec<f64>,
    n: usize,
    d: usize,
    kind: GridKind,
}

impl RankGrid {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.d)
    }

    /// Row-major coordinate buffer.
    pub fn as_flat(&self) -> &[f64] {
        &self.points
    }

    /// Short identifier recorded in null-table metadata. Custom grids carry
    /// a content hash so two different user grids never share a table.
    pub fn descriptor(&self) -> String {
        match self.kind {
            GridKind::Custom => format!("custom:{}", self.content_hash()),
            kind => kind.to_string(),
        }
    }

    /// First 16 hex digits of the SHA-256 of the little-endian coordinates.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.n as u64).to_le_bytes());
        hasher.update((self.d as u64).to_le_bytes());
        for x in &self.points {
            hasher.update(x.to_le_bytes());
        }
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Grid for `n` points in `d` dimensions following the usual defaults:
    /// the lattice for `d = 1`, Halton otherwise.
    pub fn default_for(n: usize, d: usize) -> Result<Self> {
        if d == 1 {
            lattice1d(n)
        } else {
            halton_grid(n, d)
        }
    }

    /// One point per line, comma-separated, shortest round-trip decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.points.len() * 20);
        for p in self.points() {
            let row: Vec<String> = p.iter().map(|x| format!("{x:?}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    /// Reads a headerless CSV grid and validates it as a custom grid.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cloud = crate::cli::parse_csv_str(&text, false, path)?;
        validate_custom(cloud.rows().map(<[f64]>::to_vec).collect())
    }
}

fn check_size(n: usize, d: usize) -> Result<()> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument(format!(
            "grid needs n >= 1 and d >= 1, got n = {n}, d = {d}"
        )));
    }
    Ok(())
}

/// First `n` Halton points in dimension `d`, starting at index 1.
///
/// Coordinate `j` of point `i` (both 1-indexed) is the radical inverse of
/// `i` in the base of the `j`-th prime.
pub fn halton_grid(n: usize, d: usize) -> Result<RankGrid> {
    check_size(n, d)?;
    if d > MAX_HALTON_DIM {
        return Err(Error::Capacity(format!(
            "Halton grids support at most {MAX_HALTON_DIM} dimensions, requested {d}"
        )));
    }
    let mut points = Vec::with_capacity(n * d);
    for k in 1..=n as u64 {
        points.extend(PRIMES[..d].iter().map(|&p| radical_inverse(k, p)));
    }
    Ok(RankGrid {
        points,
        n,
        d,
        kind: GridKind::Halton,
    })
}

/// The one-dimensional grid `{1/n, 2/n, ..., n/n}` in increasing order.
pub fn lattice1d(n: usize) -> Result<RankGrid> {
    check_size(n, 1)?;
    let points = (1..=n).map(|i| i as f64 / n as f64).collect();
    Ok(RankGrid {
        points,
        n,
        d: 1,
        kind: GridKind::Lattice1d,
    })
}

/// Wraps user points as a grid after checking they are rectangular, inside
/// the unit cube and pairwise distinct.
pub fn validate_custom(points: Vec<Vec<f64>>) -> Result<RankGrid> {
    let n = points.len();
    let d = points.first().map_or(0, Vec::len);
    if n == 0 || d == 0 {
        return Err(Error::Grid {
            index: 0,
            reason: "grid must contain at least one point with at least one coordinate".into(),
        });
    }
    let mut flat = Vec::with_capacity(n * d);
    for (i, p) in points.iter().enumerate() {
        if p.len() != d {
            return Err(Error::Grid {
                index: i,
                reason: format!("expected {d} coordinates, found {}", p.len()),
            });
        }
        if let Some(x) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::Grid {
                index: i,
                reason: format!("coordinate {x} outside [0,1]"),
            });
        }
        flat.extend_from_slice(p);
    }
    if let Some((_, second)) = first_duplicate(&flat, d) {
        return Err(Error::Grid {
            index: second,
            reason: "duplicate point".into(),
        });
    }
    Ok(RankGrid {
        points: flat,
        n,
        d,
        kind: GridKind::Custom,
    })
}

/// Indices of some pair of identical rows, lower index first.
pub(crate) fn first_duplicate(flat: &[f64], d: usize) -> Option<(usize, usize)> {
    let n = flat.len() / d;
    let row = |i: usize| &flat[i * d..(i + 1) * d];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        row(a)
            .iter()
            .zip(row(b))
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
        .windows(2)
        .find(|w| row(w[0]) == row(w[1]))
        .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_examples() {
        assert_eq!(radical_inverse(6, 2), 0.375);
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert!((radical_inverse(4, 3) - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn radical_inverse_injective_and_in_range() {
        for &base in &[2u64, 3, 5, 7] {
            let mut seen: Vec<f64> = (1..=100_000).map(|k| radical_inverse(k, base)).collect();
            assert!(seen.iter().all(|&x| (0.0..1.0).contains(&x)));
            seen.sort_by(f64::total_cmp);
            seen.dedup();
            assert_eq!(seen.len(), 100_000, "base {base}");
        }
    }

    #[test]
    fn halton_examples() {
        let g = halton_grid(6, 1).unwrap();
        assert_eq!(g.point(5), &[0.375]);
        let g = halton_grid(1, 2).unwrap();
        assert_eq!(g.point(0)[0], 0.5);
        assert!((g.point(0)[1] - 1.0 / 3.0).abs() < 1e-16);
        let g = halton_grid(2, 1).unwrap();
        assert_eq!(g.as_flat(), &[0.5, 0.25]);
        assert_eq!(g.kind(), GridKind::Halton);
    }

    #[test]
    fn halton_capacity() {
        assert!(halton_grid(3, MAX_HALTON_DIM).is_ok());
        assert!(matches!(
            halton_grid(3, MAX_HALTON_DIM + 1),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn lattice_examples() {
        assert_eq!(lattice1d(1).unwrap().as_flat(), &[1.0]);
        assert_eq!(lattice1d(2).unwrap().as_flat(), &[0.5, 1.0]);
        assert_eq!(lattice1d(4).unwrap().as_flat(), &[0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn custom_validation() {
        let g = validate_custom(vec![vec![0.2, 0.3], vec![0.8, 0.1]]).unwrap();
        assert_eq!((g.n(), g.d(), g.kind()), (2, 2, GridKind::Custom));
        assert!(g.descriptor().starts_with("custom:"));

        let err = validate_custom(vec![vec![1.5, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::Grid { index: 0, .. }));
        let err = validate_custom(vec![vec![0.5], vec![0.5]]).unwrap_err();
        assert!(matches!(err, Error::Grid { index: 1, ref reason } if reason.contains("duplicate")));
        let err = validate_custom(vec![vec![0.5, 0.1], vec![0.5]]).unwrap_err();
        assert!(matches!(err, Error::Grid { index: 1, .. }));
    }

    #[test]
    fn halton_points_are_distinct() {
        let g = halton_grid(2000, 3).unwrap();
        assert!(first_duplicate(g.as_flat(), 3).is_none());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let g = halton_grid(257, 5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grid.csv");
        g.save_csv(&path).unwrap();
        let back = RankGrid::load_csv(&path).unwrap();
        assert_eq!(back.as_flat(), g.as_flat());
        assert_eq!(back.kind(), GridKind::Custom);
    }
}
