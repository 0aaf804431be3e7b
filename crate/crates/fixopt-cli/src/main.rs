use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fixopt_cli::config::RunConfig;
use fixopt_cli::{bounds, emit, presets, runner, CliError};

#[derive(Parser)]
#[command(
    name = "fixopt",
    version,
    about = "Benchmark driver for stochastic fixed-point optimization on hyperbolic disk products"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the configured experiment and write its artifacts.
    Run {
        /// Path to the JSON run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the configuration).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Master seed (overrides the configuration).
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the SVG convergence plot.
        #[arg(long)]
        svg: bool,
        /// Also record and check the convergence-bound diagnostics.
        #[arg(long)]
        bounds: bool,
    },
    /// List the built-in algorithm presets.
    Presets,
    /// Check a configuration file without running anything.
    Validate {
        /// Path to the JSON run configuration.
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            config,
            out_dir,
            seed,
            svg,
            bounds,
        } => run(config, out_dir, seed, svg, bounds),
        Command::Presets => {
            for spec in presets::all() {
                println!("{}", spec.describe());
            }
            Ok(())
        }
        Command::Validate { config } => {
            let plan = RunConfig::load(&config)?.resolve()?;
            println!(
                "ok: case={} m={} I={} J={} N={} S={} algorithms=[{}]",
                plan.case.name(),
                plan.dim,
                plan.factor_count,
                plan.balls_per_factor,
                plan.iterations,
                plan.samplings,
                plan.algorithms
                    .iter()
                    .map(|a| a.name.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            Ok(())
        }
    }
}

fn run(
    config: PathBuf,
    out_dir: Option<PathBuf>,
    seed: Option<u64>,
    svg: bool,
    bounds_flag: bool,
) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(&config)?;
    if let Some(seed) = seed {
        cfg.master_seed = seed;
    }
    cfg.emit_svg |= svg;
    cfg.bound_diagnostics |= bounds_flag;
    if let Some(dir) = out_dir {
        cfg.out_dir = Some(dir);
    }
    let plan = cfg.resolve()?;

    let output = runner::execute(&plan)?;

    let dir = &plan.out_dir;
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    emit::emit_raw_csv(&output.records, &dir.join("raw.csv"))?;
    emit::emit_aggregated_csv(&output.aggregated, &dir.join("aggregated.csv"))?;
    let summary = emit::emit_summary(&plan, &output, &dir.join("summary.txt"))?;
    print!("{summary}");
    if plan.emit_svg {
        emit::emit_svg(&plan, &output.aggregated, &dir.join("plots.svg"))?;
    }
    if plan.bound_diagnostics {
        let (report, checks) = bounds::bound_report(&plan, &output.records)?;
        std::fs::write(dir.join("bounds.txt"), &report)
            .map_err(|e| CliError::Io(format!("{}: {e}", dir.join("bounds.txt").display())))?;
        print!("{report}");
        if checks.iter().any(|c| c.violated) {
            return Err(CliError::Numerical(
                "a convergence bound was violated; see bounds.txt".into(),
            ));
        }
    }
    Ok(())
}
