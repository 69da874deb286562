//! Distribution-free multivariate rank tests.
//!
//! Observations are mapped to points of a fixed grid in the unit cube by
//! an optimal assignment; those grid points are the multivariate ranks.
//! Because the ranks of an i.i.d. sample are a uniformly random relabelling
//! of the grid, statistics computed from them have null distributions that
//! do not depend on the data, and critical values can be tabulated once.
//!
//! * [`qmc`]: Halton and lattice grids.
//! * [`assign`]: exact linear assignment.
//! * [`ranks`]: point clouds and rank maps.
//! * [`stats`]: distance covariance and energy statistics.
//! * [`nulldist`]: permutation null tables, critical values, p-values.
//! * [`hypothesis`]: the independence, two-sample, K-sample,
//!   K-independence and symmetry tests.
//! * [`simgen`]: synthetic settings and power studies.
//! * [`cli`]: the `ot-ranks` command line.

pub mod assign;
pub mod cli;
pub mod error;
pub mod hypothesis;
pub mod nulldist;
pub mod qmc;
pub mod ranks;
pub mod simgen;
pub mod stats;

pub use error::{Error, Result};
pub use hypothesis::{
    k_indep_test, k_sample_test, rdcov_test, re_test, symmetry_test, TestOptions, TestReport,
};
pub use nulldist::{critical_value, p_value, NullMode, NullTable};
pub use qmc::{halton_grid, lattice1d, RankGrid};
pub use ranks::{empirical_ranks, pooled_ranks, PointCloud, RankMap};
