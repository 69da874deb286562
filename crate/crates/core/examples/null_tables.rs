//! Builds a null table, saves it, reloads it and reads off p-values.

use ot_ranks::nulldist::{build_null_table, critical_value, load_table, p_value, save_table};
use ot_ranks::NullMode;

fn main() -> ot_ranks::Result<()> {
    let table = build_null_table(NullMode::Rdcov, &[50], &[2, 2], 2000, 42)?;
    println!("{} draws, cache name {}", table.b(), table.meta().cache_file_name());

    let path = std::env::temp_dir().join(table.meta().cache_file_name());
    save_table(&table, &path)?;
    let again = load_table(&path)?;
    assert_eq!(again.samples(), table.samples());

    for alpha in [0.1, 0.05, 0.01] {
        println!("alpha {alpha}: critical value {:.4}", critical_value(&again, alpha)?);
    }
    println!("p-value of 0.5: {:.4}", p_value(&again, 0.5));
    std::fs::remove_file(path).ok();
    Ok(())
}
