//! Relative L1 errors of the SWE and the reduced model against the full
//! moment system on the smooth sine wave, for several ε.
//!
//! `cargo run --release --example sine_wave_table -- [N] [n_x]`

use swmoment::models::{Model, ModelFamily, ModelSpec, PhysicalParams};
use swmoment::scenarios::{init_scenario, relative_l1, Scenario};
use swmoment::solver::{run, Grid1D, SolverConfig, SourceMode};

fn main() -> swmoment::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let n = args.first().copied().unwrap_or(1);
    let n_x = args.get(1).copied().unwrap_or(1000);
    let grid = Grid1D::unit(n_x)?;
    println!("eps,model,err_h,err_u_m,seconds");
    for eps in [0.01, 0.1, 1.0] {
        let params = PhysicalParams::with_epsilon(eps);
        let solve = |family: ModelFamily, order: usize| -> swmoment::Result<(Vec<f64>, Vec<f64>, f64)> {
            let model = Model::new(ModelSpec::new(family, order, params)?)?;
            let init = init_scenario(Scenario::SmoothSine, &model, &grid)?;
            let cfg = SolverConfig::new(0.7, 2.0, SourceMode::default_for(family))?;
            let res = run(&model, &grid, &cfg, &init)?;
            let h = res.field.component(0);
            let u = res.field.component(1).iter().zip(&h).map(|(q, h)| q / h).collect();
            Ok((h, u, res.wall_time.as_secs_f64()))
        };
        let (href, uref, t) = solve(ModelFamily::Swme, n)?;
        println!("{eps},SWME{n},0,0,{t:.2}");
        for (family, order, label) in [
            (ModelFamily::Swe, 0, "SWE".to_string()),
            (ModelFamily::Rswme, n, format!("RSWME{n}")),
        ] {
            let (h, u, t) = solve(family, order)?;
            println!(
                "{eps},{label},{:.4e},{:.4e},{t:.2}",
                relative_l1(&h, &href)?,
                relative_l1(&u, &uref)?
            );
        }
    }
    Ok(())
}
