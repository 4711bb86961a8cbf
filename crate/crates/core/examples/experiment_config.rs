//! Builds an experiment config in code, runs it, and prints the summary.

use std::env;

use vifw::config::{ExperimentConfig, Mode};
use vifw::harness::{self, RunContext};
use vifw::oracle::OracleCache;

const CONFIG: &str = r#"{
    "name": "identity_fp",
    "set": {"type": "product", "factors": [{"type": "simplex", "n": 2}, {"type": "simplex", "n": 2}]},
    "operator": {"type": "fictitious_play", "A": [[1, 0], [0, 1]]},
    "x0": "vertex:0",
    "max_iter": 10000
}"#;

fn main() -> vifw::Result<()> {
    let out = env::temp_dir().join("vifw-example");
    let ctx = RunContext::new(OracleCache::new(out.join("cache")), &out);
    let mut cfg = ExperimentConfig::from_json(CONFIG, "inline")?;

    cfg.mode = Mode::Oracle;
    harness::run(&cfg, &ctx)?;
    cfg.mode = Mode::Solve;
    let report = harness::run(&cfg, &ctx)?;
    println!("{}", serde_json::to_string_pretty(&report.summary)?);
    Ok(())
}
