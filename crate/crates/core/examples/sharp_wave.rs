//! The sharp initial wave under the SWE, the full moment system and the
//! reduced model: height and mean velocity along the channel at t = 2.
//!
//! `cargo run --release --example sharp_wave -- [epsilon] [n_x]`

use swmoment::models::{Model, ModelFamily, ModelSpec, PhysicalParams};
use swmoment::scenarios::{init_scenario, primitive_fields, PrimitiveFields, Scenario};
use swmoment::solver::{run, Grid1D, SolverConfig, SourceMode};

fn solve(family: ModelFamily, n: usize, params: PhysicalParams, grid: &Grid1D) -> swmoment::Result<PrimitiveFields> {
    let model = Model::new(ModelSpec::new(family, n, params)?)?;
    let init = init_scenario(Scenario::SharpWave, &model, grid)?;
    let cfg = SolverConfig::new(0.7, 2.0, SourceMode::default_for(family))?;
    let res = run(&model, grid, &cfg, &init)?;
    primitive_fields(&model, grid, &res.field)
}

fn main() -> swmoment::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let eps = args.first().copied().unwrap_or(0.1);
    let n_x = args.get(1).map(|&v| v as usize).unwrap_or(400);
    let params = PhysicalParams::with_epsilon(eps);
    let grid = Grid1D::unit(n_x)?;
    let swe = solve(ModelFamily::Swe, 0, params, &grid)?;
    let swme = solve(ModelFamily::Swme, 1, params, &grid)?;
    let rswme = solve(ModelFamily::Rswme, 1, params, &grid)?;
    println!("x,h_swe,h_swme1,h_rswme1,u_swe,u_swme1,u_rswme1");
    for i in (0..n_x).step_by((n_x / 40).max(1)) {
        println!(
            "{:.4},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            swe.x[i], swe.h[i], swme.h[i], rswme.h[i], swe.u_m[i], swme.u_m[i], rswme.u_m[i]
        );
    }
    Ok(())
}
