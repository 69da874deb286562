//! Small Monte Carlo power study over a few settings.

use ot_ranks::simgen::{power_study, PowerResult, SettingId, SimSetting};
use ot_ranks::NullMode;

fn main() -> ot_ranks::Result<()> {
    println!("{}", PowerResult::CSV_HEADER);
    let runs = [
        (SettingId::IndV2, NullMode::Rdcov),
        (SettingId::IndV1, NullMode::Rdcov),
        (SettingId::TsV6, NullMode::Energy),
    ];
    for (id, kind) in runs {
        let setting = SimSetting::new(id).with_sizes(60, 60);
        let result = power_study(&setting, kind, 100, 0.05, 17, 500, None)?;
        println!("{}", result.csv_row());
    }
    Ok(())
}
