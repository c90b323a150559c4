//! Reads a JSON configuration and integrates it, as `gcf run` does.
//!
//! `cargo run --release --example config_run -- crates/core/examples/configs/full_model.json`

use std::env;
use std::fs;

use gcf::config::parse_config;

fn main() -> gcf::Result<()> {
    let path = env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/full_model.json").into());
    let cfg = parse_config(&fs::read_to_string(&path)?)?;
    println!("config {path}");
    println!("digest {}", cfg.digest);
    let (_, traj) = cfg.scenario()?.run()?;
    for r in traj.moments() {
        println!("{}", r.csv_row());
    }
    Ok(())
}
