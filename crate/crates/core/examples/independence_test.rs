//! Rank distance covariance test on dependent and independent data.

use ot_ranks::simgen::{generate, SettingId, SimSetting};
use ot_ranks::{rdcov_test, TestOptions};

fn main() -> ot_ranks::Result<()> {
    let opts = TestOptions::default().with_b(2000).with_seed(7);
    for id in [SettingId::IndV2, SettingId::IndIg] {
        let (x, y) = generate(&SimSetting::new(id).with_n(100), 11)?;
        let report = rdcov_test(&x, &y, &opts)?;
        println!(
            "{:8} n*RdCov^2 = {:.4}  p = {:.4}  reject = {}",
            id.name(),
            report.statistic_scaled,
            report.p_value,
            report.reject
        );
    }
    Ok(())
}
