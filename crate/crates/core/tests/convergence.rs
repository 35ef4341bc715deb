use swmoment::models::{Model, ModelFamily, ModelSpec, PhysicalParams};
use swmoment::scenarios::{init_scenario, Scenario};
use swmoment::solver::{run, Field, Grid1D, SolverConfig, SourceMode};

fn solve(family: ModelFamily, n: usize, n_x: usize) -> Vec<f64> {
    let model = Model::new(ModelSpec::new(family, n, PhysicalParams::with_epsilon(0.1)).unwrap()).unwrap();
    let grid = Grid1D::unit(n_x).unwrap();
    let init = init_scenario(Scenario::SmoothSine, &model, &grid).unwrap();
    let cfg = SolverConfig::new(0.5, 0.5, SourceMode::default_for(family)).unwrap();
    run(&model, &grid, &cfg, &init).unwrap().field.component(0)
}

// Cell averages of the fine solution on the coarse grid.
fn restrict(fine: &[f64]) -> Vec<f64> {
    fine.chunks(2).map(|c| 0.5 * (c[0] + c[1])).collect()
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

fn observed_order(family: ModelFamily, n: usize) -> f64 {
    let h1 = solve(family, n, 100);
    let h2 = solve(family, n, 200);
    let h3 = solve(family, n, 400);
    let e1 = l1(&h1, &restrict(&h2));
    let e2 = l1(&h2, &restrict(&h3));
    (e1 / e2).log2()
}

#[test]
fn swe_is_first_order() {
    let p = observed_order(ModelFamily::Swe, 0);
    assert!((0.6..=1.3).contains(&p), "order {p}");
}

#[test]
fn reduced_model_is_first_order() {
    let p = observed_order(ModelFamily::Rswme, 2);
    assert!((0.6..=1.3).contains(&p), "order {p}");
}

#[test]
fn moment_system_is_first_order() {
    let p = observed_order(ModelFamily::Swme, 1);
    assert!((0.6..=1.3).contains(&p), "order {p}");
}

#[test]
fn zero_duration_returns_initial_state() {
    let model = Model::new(ModelSpec::new(ModelFamily::Swme, 2, PhysicalParams::default()).unwrap()).unwrap();
    let grid = Grid1D::unit(20).unwrap();
    let init: Field = init_scenario(Scenario::SqrtProfile, &model, &grid).unwrap();
    let cfg = SolverConfig::new(0.7, 0.0, SourceMode::Implicit).unwrap();
    let res = run(&model, &grid, &cfg, &init).unwrap();
    assert_eq!(res.steps, 0);
    assert_eq!(res.field, init);
}
