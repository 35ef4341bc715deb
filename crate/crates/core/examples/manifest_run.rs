//! Drives a run the way the command-line tool does: parse a TOML manifest,
//! simulate, and write `solution.csv`, `meta.csv` and the snapshot series.
//!
//! `cargo run --release --example manifest_run -- [out_dir]`

use std::path::Path;

use swmoment::cli::{parse_config_str, run_command};

fn main() -> swmoment::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/sharp_wave_rswme2".into());
    let text = format!(
        "scenario = \"sharp_wave\"\nmodel = \"rswme\"\nn = 2\nepsilon = 0.1\n\
         n_x = 500\nt_end = 2.0\noutput_dir = \"{out}\"\nemit_snapshots = true\n"
    );
    let manifest = parse_config_str(&text, Path::new("<inline>"))?;
    let outcome = run_command(&manifest)?;
    println!(
        "{} steps to t = {}, {} snapshots, written to {}",
        outcome.result.steps,
        outcome.result.final_time,
        outcome.result.snapshots.len(),
        outcome.output_dir.unwrap().display()
    );
    Ok(())
}
