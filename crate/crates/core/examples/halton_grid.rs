//! Builds the default rank grids and prints the first few points.

use ot_ranks::qmc::{radical_inverse, RankGrid};

fn main() -> ot_ranks::Result<()> {
    println!("radical inverse of 6 in base 2: {}", radical_inverse(6, 2));

    let grid = RankGrid::default_for(8, 2)?;
    println!("{} ({} points, hash {})", grid.descriptor(), grid.n(), &grid.content_hash()[..12]);
    for (i, p) in grid.points().enumerate() {
        println!("  {i}: ({:.4}, {:.4})", p[0], p[1]);
    }

    let line = RankGrid::default_for(5, 1)?;
    let pts: Vec<f64> = line.points().map(|p| p[0]).collect();
    println!("{}: {pts:?}", line.descriptor());
    Ok(())
}
