//! Wall-clock comparison of the SWE, the full moment system and the reduced
//! model on the square-root profile test, for several moment orders.
//!
//! `cargo run --release --example runtime_bench -- [n_x] [N...]`

use std::time::Instant;

use swmoment::models::{Model, ModelFamily, ModelSpec, PhysicalParams};
use swmoment::scenarios::{init_scenario, primitive_fields, Scenario};
use swmoment::solver::{run, Grid1D, SolverConfig, SourceMode};

fn time_run(family: ModelFamily, n: usize, grid: &Grid1D, repeats: usize) -> swmoment::Result<Vec<f64>> {
    let params = PhysicalParams::with_epsilon(0.5);
    let model = Model::new(ModelSpec::new(family, n, params)?)?;
    let init = init_scenario(Scenario::SqrtProfile, &model, grid)?;
    let cfg = SolverConfig::new(0.7, 2.0, SourceMode::default_for(family))?;
    let mut times = Vec::new();
    for _ in 0..repeats {
        let start = Instant::now();
        let res = run(&model, grid, &cfg, &init)?;
        primitive_fields(&model, grid, &res.field)?;
        times.push(start.elapsed().as_secs_f64());
    }
    Ok(times)
}

fn main() -> swmoment::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let n_x = args.first().copied().unwrap_or(1000);
    let orders = if args.len() > 1 { args[1..].to_vec() } else { vec![2, 4, 6] };
    let grid = Grid1D::unit(n_x)?;
    let fmt = |t: &[f64]| t.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(" ");
    println!("SWE      {}", fmt(&time_run(ModelFamily::Swe, 0, &grid, 5)?));
    for n in orders {
        println!("RSWME{n}   {}", fmt(&time_run(ModelFamily::Rswme, n, &grid, 5)?));
        println!("SWME{n}    {}", fmt(&time_run(ModelFamily::Swme, n, &grid, 1)?));
    }
    Ok(())
}
