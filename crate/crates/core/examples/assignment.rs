//! Solves a small assignment problem and checks the dual certificate.

use ot_ranks::assign::{brute_force, solve, CostMatrix};

fn main() -> ot_ranks::Result<()> {
    let cost = CostMatrix::from_rows(&[
        vec![4.0, 1.0, 3.0],
        vec![2.0, 0.0, 5.0],
        vec![3.0, 2.0, 2.0],
    ])?;
    let best = solve(&cost);
    println!("assignment {:?}, cost {}", best.perm, best.total_cost);
    println!("certificate holds: {}", best.check_certificate(&cost, 1e-9));
    println!("brute force cost:  {}", brute_force(&cost)?.total_cost);
    Ok(())
}
