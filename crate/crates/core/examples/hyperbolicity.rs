//! Where the reduced model loses hyperbolicity: discriminant and eigenvalues
//! of RSWME and its regularised variant as the water height grows.
//!
//! `cargo run --example hyperbolicity -- [epsilon] [u_m]`

use swmoment::models::{Model, ModelFamily, ModelSpec, PhysicalParams};

fn main() -> swmoment::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let eps = args.first().copied().unwrap_or(1.0);
    let um = args.get(1).copied().unwrap_or(0.0);
    let params = PhysicalParams::with_epsilon(eps);
    for n in [1, 2] {
        let r = Model::new(ModelSpec::new(ModelFamily::Rswme, n, params)?)?;
        let hr = Model::new(ModelSpec::new(ModelFamily::Hrswme, n, params)?)?;
        let h_max = r.hyperbolicity_threshold()?;
        println!("N={n}: RSWME hyperbolic for h < {h_max:.6}");
        println!("h,disc_rswme,disc_hrswme,lambda_rswme,lambda_hrswme");
        for k in 1..=8 {
            let h = h_max * k as f64 / 5.0;
            let u = [h, h * um];
            let show = |m: &Model| -> swmoment::Result<String> {
                let [a, b] = m.rswme_eigenvalues(&u)?;
                Ok(format!("{:.4}{:+.4}i/{:.4}{:+.4}i", a.re, a.im, b.re, b.im))
            };
            println!(
                "{h:.4},{:.4e},{:.4e},{},{}",
                r.reduced_discriminant(h, um)?,
                hr.reduced_discriminant(h, um)?,
                show(&r)?,
                show(&hr)?
            );
        }
    }
    Ok(())
}
