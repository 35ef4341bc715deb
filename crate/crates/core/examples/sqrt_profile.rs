//! Projection of the square-root velocity profile onto the moment basis,
//! the profile rebuilt from N moments, and the moments the reduced model
//! reconstructs after a short run.
//!
//! `cargo run --release --example sqrt_profile -- [N]`

use swmoment::models::{Model, ModelFamily, ModelSpec, PhysicalParams};
use swmoment::scenarios::{
    init_scenario, primitive_fields, project_velocity, velocity_profile, Scenario,
};
use swmoment::solver::{run, Grid1D, SolverConfig, SourceMode};

fn main() -> swmoment::Result<()> {
    let n = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(6);
    let (um, alphas) = project_velocity(|z| Scenario::SqrtProfile.velocity(z), n)?;
    println!("u_m = {um:.12}");
    for (j, a) in alphas.iter().enumerate() {
        println!("alpha_{} = {a:.12}", j + 1);
    }

    let zeta: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let rebuilt = velocity_profile(um, &alphas, &zeta)?;
    println!("zeta,exact,rebuilt");
    for (z, r) in zeta.iter().zip(&rebuilt) {
        println!("{z:.1},{:.6},{r:.6}", Scenario::SqrtProfile.velocity(*z));
    }

    let params = PhysicalParams::with_epsilon(0.5);
    let model = Model::new(ModelSpec::new(ModelFamily::Rswme, n, params)?)?;
    let grid = Grid1D::unit(200)?;
    let init = init_scenario(Scenario::SqrtProfile, &model, &grid)?;
    let cfg = SolverConfig::new(0.7, 0.5, SourceMode::default_for(model.family()))?;
    let res = run(&model, &grid, &cfg, &init)?;
    let f = primitive_fields(&model, &grid, &res.field)?;
    let mid = grid.n_cells / 2;
    print!("RSWME{n} at x = {:.3}, t = 0.5: h = {:.6}, u_m = {:.6}", f.x[mid], f.h[mid], f.u_m[mid]);
    for (j, a) in f.alphas.iter().enumerate() {
        print!(", alpha_{} = {:.3e}", j + 1, a[mid]);
    }
    println!();
    Ok(())
}
