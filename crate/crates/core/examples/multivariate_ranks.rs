//! Computes multivariate ranks of a small 2-d sample.

use ot_ranks::{empirical_ranks, PointCloud, RankGrid};

fn main() -> ot_ranks::Result<()> {
    let data = PointCloud::from_rows(&[
        vec![0.3, -1.2],
        vec![2.5, 0.4],
        vec![-0.7, 0.9],
        vec![1.1, 1.8],
        vec![-2.0, -0.3],
        vec![0.0, 0.0],
    ])?;
    let grid = RankGrid::default_for(data.n(), data.d())?;
    let ranks = empirical_ranks(&data, &grid)?;
    for i in 0..data.n() {
        println!("{:?} -> grid point {} {:?}", data.row(i), ranks.perm()[i], ranks.rank(i));
    }
    print!("{}", ranks.to_csv());
    Ok(())
}
