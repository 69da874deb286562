//! Prints small tables of 5% critical values.

use ot_ranks::nulldist::{build_null_table, critical_value};
use ot_ranks::NullMode;

fn main() -> ot_ranks::Result<()> {
    let n = 100;
    println!("n*RdCov^2, n = {n}");
    for d in 1..=3 {
        let t = build_null_table(NullMode::Rdcov, &[n], &[d, d], 2000, 1)?;
        println!("  d1 = d2 = {d}: {:.3}", critical_value(&t, 0.05)?);
    }
    println!("mn/(m+n)*RE^2, m = n = {n}");
    for d in 1..=3 {
        let t = build_null_table(NullMode::Energy, &[n, n], &[d], 2000, 1)?;
        println!("  d = {d}: {:.3}", critical_value(&t, 0.05)?);
    }
    Ok(())
}
