use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use evogame::analysis::{basin_scan_with, bisect_with, find_fixed_points};
use evogame::config::{load_config, parse_grid, Preset};
use evogame::integrator::{simulate_outcome, Scheme};
use evogame::output::{
    write_json, write_svg, write_sweep_csv, write_trajectory_csv, SimulationSummary, SweepSummary,
};
use evogame::scenario::{Axis, Scenario};

/// Evolutionary game dynamics with environmental feedback and opinions.
#[derive(Parser)]
#[command(name = "evogame", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scenario and write its trajectory.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Override a config key, e.g. `--set y0=0.7`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out_csv: PathBuf,
        #[arg(long)]
        out_json: Option<PathBuf>,
        #[arg(long)]
        out_svg: Option<PathBuf>,
    },
    /// Scan one initial-condition axis and label each terminal state.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        axis: Axis,
        /// `lo:hi:count`
        #[arg(long)]
        grid: String,
        #[arg(long)]
        out_csv: PathBuf,
        #[arg(long)]
        out_json: Option<PathBuf>,
    },
    /// Enumerate the fixed points of a scenario.
    FixedPoints {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out_json: PathBuf,
    },
    /// Write a shipped scenario file.
    Preset {
        name: PresetName,
        #[arg(long)]
        write: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetName {
    HawkDove,
    PrisonersDilemma,
}

const BISECT_MAX_ITERS: usize = 60;

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn load(config: &Path, set: &[String]) -> anyhow::Result<Scenario> {
    let sc = load_config(config, set).with_context(|| format!("loading {}", config.display()))?;
    Ok(sc)
}

fn run_simulate(
    sc: &Scenario,
    out_csv: &Path,
    out_json: Option<&Path>,
    out_svg: Option<&Path>,
) -> anyhow::Result<()> {
    let outcome = simulate_outcome(sc, Scheme::Rk4)?;
    let traj = &outcome.trajectory;
    let failure = outcome.failure.as_ref();
    write_trajectory_csv(create(out_csv)?, traj, failure)?;
    if let Some(p) = out_json {
        let records = find_fixed_points(sc);
        let summary = SimulationSummary::new(&sc.label, &sc.model(), traj, &records, failure);
        write_json(create(p)?, &summary)?;
    }
    if let Some(p) = out_svg {
        write_svg(create(p)?, traj, &sc.label)?;
    }
    if let Some(e) = failure {
        bail!("simulation stopped early: {e}");
    }
    Ok(())
}

fn run_sweep(
    sc: &Scenario,
    axis: Axis,
    grid: &str,
    out_csv: &Path,
    out_json: Option<&Path>,
) -> anyhow::Result<()> {
    let grid = parse_grid(grid).map_err(anyhow::Error::msg)?;
    let records = find_fixed_points(sc);
    let map = basin_scan_with(sc, &records, axis, &grid);
    write_sweep_csv(create(out_csv)?, &map)?;
    if let Some(p) = out_json {
        let switches = map.switches();
        let boundary = match switches.as_slice() {
            [(i, j)] => match bisect_with(sc, &records, axis, grid[*i], grid[*j], BISECT_MAX_ITERS)
            {
                Ok(b) => Some(b),
                Err(e) => {
                    eprintln!("warning: boundary bisection failed: {e}");
                    None
                }
            },
            _ => None,
        };
        write_json(create(p)?, &SweepSummary::new(&sc.label, &map, boundary))?;
    }
    if map.cells.iter().all(|c| c.error.is_some()) {
        bail!("every sweep cell failed");
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            set,
            out_csv,
            out_json,
            out_svg,
        } => {
            let sc = load(&config, &set)?;
            run_simulate(&sc, &out_csv, out_json.as_deref(), out_svg.as_deref())
        }
        Command::Sweep {
            config,
            set,
            axis,
            grid,
            out_csv,
            out_json,
        } => {
            let sc = load(&config, &set)?;
            run_sweep(&sc, axis, &grid, &out_csv, out_json.as_deref())
        }
        Command::FixedPoints {
            config,
            set,
            out_json,
        } => {
            let sc = load(&config, &set)?;
            write_json(create(&out_json)?, &find_fixed_points(&sc))?;
            Ok(())
        }
        Command::Preset { name, write } => {
            let preset = match name {
                PresetName::HawkDove => Preset::HawkDove,
                PresetName::PrisonersDilemma => Preset::PrisonersDilemma,
            };
            std::fs::write(&write, preset.text())
                .with_context(|| format!("cannot write {}", write.display()))?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
