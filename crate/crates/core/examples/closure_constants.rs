//! Exact closure constants of the reduced model for a range of orders, and
//! the check that the friction system has the same solution for every N ≥ 2.
//!
//! `cargo run --example closure_constants -- [max_N]`

use swmoment::{constants_for_order, lemma_b1_check};

fn main() -> swmoment::Result<()> {
    let max_n = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(8);
    println!("N,Gamma,Phi,Omega,Lambda,friction_solution_ok");
    for n in 1..=max_n {
        let k = constants_for_order(n)?;
        let lemma = if n >= 2 { lemma_b1_check(n)?.to_string() } else { "-".into() };
        println!("{n},{},{},{},{},{lemma}", k.gamma, k.phi, k.omega, k.lambda);
    }
    Ok(())
}
