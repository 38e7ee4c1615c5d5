use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kinetic_flock::{load_config, preset, run_convergence, run_scenario, FlockError, ScenarioConfig};

#[derive(Parser)]
#[command(name = "kinetic-flock", version, about = "Kinetic flocking DG solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a config file.
    Run {
        /// TOML scenario config.
        path: PathBuf,
        /// Directory for diagnostics.csv, marginals and the resolved config.
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Run a built-in scenario, or print its config with --emit-config.
    Preset {
        /// convergence, flocking-cs, clusters-strong, clusters-weak, cs-vs-mt[:cs|:mt]
        name: String,
        /// Print the preset as TOML instead of running it.
        #[arg(long)]
        emit_config: bool,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Run the refinement study of a config file and print rate tables.
    Rates {
        /// TOML config with a [study] section.
        path: PathBuf,
        /// Also write rates_k<degree>.csv here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn run(cfg: &ScenarioConfig, out_dir: &Path) -> Result<(), FlockError> {
    println!("# resolved config\n{}", cfg.to_toml());
    let summary = run_scenario(cfg, Some(out_dir))?;
    for r in &summary.records {
        println!(
            "t = {:<6} mass = {:.12e}  S = {:.4}  V = {:.4}  clusters = {}",
            r.time, r.total_mass, r.s_width, r.v_width, r.cluster_count
        );
    }
    if let Some(b) = summary.bound {
        println!(
            "flock diameter D = {:.6}, decay rate phi(D) = {:.6}",
            b.diameter, b.decay_rate
        );
    }
    println!("wrote {}", out_dir.display());
    Ok(())
}

fn rates(cfg: &ScenarioConfig, out_dir: Option<&Path>) -> Result<(), FlockError> {
    println!("# resolved config\n{}", cfg.to_toml());
    let tables = run_convergence(cfg)?;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
    }
    for t in &tables {
        println!("{}", t.render());
        if let Some(dir) = out_dir {
            std::fs::write(dir.join(format!("rates_k{}.csv", t.degree)), t.to_csv())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { path, out_dir } => load_config(&path).and_then(|cfg| run(&cfg, &out_dir)),
        Command::Preset {
            name,
            emit_config,
            out_dir,
        } => preset(&name).and_then(|cfg| {
            if emit_config {
                print!("{}", cfg.to_toml());
                Ok(())
            } else {
                run(&cfg, &out_dir)
            }
        }),
        Command::Rates { path, out_dir } => {
            load_config(&path).and_then(|cfg| rates(&cfg, out_dir.as_deref()))
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
