//! Loading a scenario with overrides and writing its CSV reports.

use ccl::config::{Pipeline, Scenario};
use ccl::pipelines::run;

fn main() -> ccl::Result<()> {
    let scenario = Scenario::from_toml("name = \"demo\"\n", &["cone.samples=200".into()])?;
    let report = run(Pipeline::Cone, &scenario)?;
    for line in report.lines() {
        println!("{line}");
    }
    let dir = std::env::temp_dir().join("ccl-scenario-report");
    for path in report.write(&dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
