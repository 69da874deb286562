//! Three-sample test and mutual independence of three column blocks.

use ot_ranks::simgen::Samplers;
use ot_ranks::{k_indep_test, k_sample_test, PointCloud, TestOptions};

fn sample(s: &mut Samplers, n: usize, d: usize, shift: f64) -> PointCloud {
    let data = (0..n * d).map(|_| s.std_normal() + shift).collect();
    PointCloud::new(n, d, data).unwrap()
}

fn main() -> ot_ranks::Result<()> {
    let mut s = Samplers::new(5);
    let opts = TestOptions::default().with_b(1000).with_seed(2);

    let a = sample(&mut s, 40, 2, 0.0);
    let b = sample(&mut s, 30, 2, 0.0);
    let c = sample(&mut s, 35, 2, 0.8);
    let report = k_sample_test(&[&a, &b, &c], &opts)?;
    println!("k-sample: stat {:.4}, p {:.4}", report.statistic_scaled, report.p_value);

    // Columns: x (2-d), y = x0 + noise (1-d), z independent (1-d).
    let x = sample(&mut s, 60, 2, 0.0);
    let z = sample(&mut s, 60, 1, 0.0);
    let y = PointCloud::new(60, 1, (0..60).map(|i| x.row(i)[0] + 0.5 * s.std_normal()).collect())?;
    let joint = PointCloud::hstack(&[&x, &y, &z])?;
    let report = k_indep_test(&joint, &[2, 1, 1], &opts)?;
    println!("k-indep:  stat {:.4}, p {:.4}", report.statistic_scaled, report.p_value);
    Ok(())
}
