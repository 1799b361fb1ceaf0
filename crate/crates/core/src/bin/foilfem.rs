use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use foilfem::config::{kelvin_to_celsius, load_config};
use foilfem::post::{convergence_study, write_csv, ConvergenceSettings};
use foilfem::thermal::{mms_convergence, MmsCase};
use foilfem::Result;

#[derive(Parser)]
#[command(name = "foilfem", version, about = "Axisymmetric magneto-thermal solver for foil windings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a deck and write history, snapshots and a report.
    Run {
        deck: PathBuf,
        /// Output directory (overrides the deck).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a deck and print it with all defaults filled in.
    Check { deck: PathBuf },
    /// Thermal manufactured-solution convergence table.
    Mms {
        #[arg(long, default_value_t = 4)]
        levels: usize,
    },
    /// Resolved-versus-homogenized internal-energy study.
    Convergence {
        deck: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        /// Mesh size of the resolved reference, m.
        #[arg(long, default_value_t = 2.5e-4)]
        reference_h: f64,
        /// Optional CSV output path for the table.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run { deck, out } => {
            let cfg = load_config(&deck)?;
            let dir = out
                .or_else(|| cfg.output.dir.clone())
                .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
            let report = foilfem::run::run(&cfg, Some(&dir))?.report;
            println!(
                "{}: {} thermal steps, {} magnetic solves, {:.1} s",
                report.name, report.thermal_steps, report.magnetic_solves, report.wall_time_s
            );
            println!(
                "total loss {:.4} W, T_max {:.2} °C",
                report.total_loss_w,
                kelvin_to_celsius(report.t_max_k)
            );
            for r in &report.regions {
                println!(
                    "  {:<12} mean {:>8.2} °C  max {:>8.2} °C  loss {:.4e} W",
                    r.tag,
                    r.mean_temperature_c,
                    kelvin_to_celsius(r.max_temperature_k),
                    r.loss_w
                );
            }
            println!("results in {}", dir.display());
        }
        Command::Check { deck } => {
            let cfg = load_config(&deck)?;
            let mesh = cfg.build_mesh()?;
            cfg.magnetic_problem(&mesh)?;
            cfg.thermal_problem(&mesh)?;
            println!("{}", cfg.to_json());
        }
        Command::Mms { levels } => {
            for (name, case) in [
                ("isotropic", MmsCase::Isotropic),
                ("anisotropic", MmsCase::Anisotropic),
                ("axis", MmsCase::Axis),
            ] {
                println!("{name}");
                println!("  {:>10} {:>10} {:>12} {:>6}", "h", "elements", "L2 error", "rate");
                for l in mms_convergence(levels, case)? {
                    let rate = l.rate.map_or("-".to_string(), |r| format!("{r:.3}"));
                    println!("  {:>10.4e} {:>10} {:>12.4e} {:>6}", l.h, l.n_elements, l.l2_error, rate);
                }
            }
        }
        Command::Convergence {
            deck,
            levels,
            reference_h,
            csv,
        } => {
            let cfg = load_config(&deck)?;
            let report = convergence_study(&cfg, &ConvergenceSettings::new(levels, reference_h))?;
            println!("reference: {} triangles, U = {:.9e} J", report.reference_elements, report.u_ref);
            println!("{:>10} {:>10} {:>18} {:>12}", "h", "elements", "U_hom", "rel. error");
            for l in &report.levels {
                println!("{:>10.4e} {:>10} {:>18.9e} {:>12.4e}", l.h, l.n_elements, l.u_hom, l.rel_error);
            }
            println!("fitted order {:.3}, monotone: {}", report.order, report.is_monotone());
            if let Some(path) = csv {
                let (header, rows) = report.csv_rows();
                write_csv(&path, &header, &rows)?;
            }
        }
    }
    Ok(())
}
