use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use swmoment::cli;
use swmoment::models::{ModelFamily, ModelSpec, PhysicalParams};

#[derive(Parser)]
#[command(name = "swmoment", version, about = "Shallow-water moment models in 1-D")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation from a config file
    Run { config: PathBuf },
    /// Build an error table from a directory of configs or a sweep file
    Table { input: PathBuf },
    /// Time SWE, SWME(N) and RSWME(N) on the config's scenario
    Bench {
        config: PathBuf,
        #[arg(long = "n", value_delimiter = ',', default_value = "2,4,6")]
        orders: Vec<usize>,
    },
    /// Print the closure constants for N moments
    Constants {
        #[arg(long)]
        n: usize,
    },
    /// Print eigenvalues of the system matrix at a state
    Eigs {
        #[arg(long)]
        model: ModelFamily,
        #[arg(long, default_value_t = 0)]
        n: usize,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        um: f64,
        /// Moments for the full system, comma separated
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda0: f64,
        #[arg(long, default_value_t = 1.0)]
        nu0: f64,
        #[arg(long, default_value_t = 1.0)]
        g: f64,
    },
}

fn execute(args: Args) -> swmoment::Result<()> {
    match args.command {
        Command::Run { config } => {
            let manifest = cli::parse_config(&config)?;
            let o = cli::run_command(&manifest)?;
            println!(
                "{}: {} steps to t = {}, {:.3} s, output in {}",
                manifest.spec()?.label(),
                o.result.steps,
                o.result.final_time,
                o.wall_time_min().as_secs_f64(),
                o.output_dir.unwrap_or_default().display()
            );
        }
        Command::Table { input } => {
            let (table, dir) = cli::table_command(&input)?;
            print!("{}", table.to_text());
            println!("written to {}", dir.join("table.csv").display());
        }
        Command::Bench { config, orders } => {
            let manifest = cli::parse_config(&config)?;
            let (report, dir) = cli::bench_command(&manifest, &orders)?;
            print!("{}", report.to_csv());
            println!("written to {}", dir.join("runtime.csv").display());
        }
        Command::Constants { n } => print!("{}", cli::format_constants(n)?),
        Command::Eigs {
            model,
            n,
            h,
            um,
            alpha,
            epsilon,
            lambda0,
            nu0,
            g,
        } => {
            let params = PhysicalParams {
                g,
                epsilon,
                lambda0,
                nu0,
            };
            let n = if model == ModelFamily::Swe { 0 } else { n.max(1) };
            print!("{}", cli::format_eigs(ModelSpec::new(model, n, params)?, h, um, &alpha)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
