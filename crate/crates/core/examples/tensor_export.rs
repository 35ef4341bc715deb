//! Writes the exact coupling tensors A, B and C of the scaled Legendre basis
//! as CSV fractions.
//!
//! `cargo run --example tensor_export -- [N] [out_dir]`

use std::path::PathBuf;

use swmoment::basis::TensorKind;
use swmoment::build_tensors;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|a| a.parse()).transpose()?.unwrap_or(3);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "tensors".into()));
    let t = build_tensors(n)?;
    std::fs::create_dir_all(&dir)?;
    for (kind, name) in [(TensorKind::A, "a"), (TensorKind::B, "b"), (TensorKind::C, "c")] {
        let path = dir.join(format!("{name}_n{n}.csv"));
        std::fs::write(&path, t.to_csv(kind))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
