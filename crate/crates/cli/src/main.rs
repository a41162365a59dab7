//! Command-line front end: sweeps, validation, optimization, and
//! inspection over flat key = value configuration files.
//!
//! Exit codes: 0 success, 2 validation verdict FAIL, 3 infeasible
//! optimization, 4 configuration or usage error.

mod cfgfile;
mod commands;
mod csvio;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Estimator, SweepVar};
use fasrelay_core::config::SystemConfig;
use fasrelay_core::ee::SearchSpace;

#[derive(Parser)]
#[command(name = "fasrelay", version, about = "BLER and energy-efficiency engine for a two-hop UAV relay with a fluid antenna receiver")]
struct Cli {
    /// Configuration file (flat `key = value` lines; see configs/).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Average over headings with the rule exactly as printed in the
    /// source derivation (diagnostic; affects closed-form estimates only).
    #[arg(long = "paper-literal-gcq", global = true)]
    paper_literal_gcq: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate estimators over a grid of one variable; writes CSV.
    Sweep {
        /// Variable to sweep.
        #[arg(long = "sweep-var", value_enum)]
        sweep_var: SweepVar,
        /// Comma-separated grid values (dBm for p2, wavelengths for w,
        /// meters for zu, whole numbers for n, l, m).
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<f64>,
        /// Comma-separated estimators to evaluate at each grid point.
        #[arg(long, value_enum, value_delimiter = ',', default_value = "closed")]
        estimators: Vec<Estimator>,
        /// Monte Carlo trials (defaults to mc.trials from the config).
        #[arg(long)]
        trials: Option<u64>,
        /// Monte Carlo seed (defaults to mc.seed from the config).
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; stdout when omitted.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Compare the closed-form average against Monte Carlo on a power
    /// grid; exits 2 when any point is outside three standard errors.
    Validate {
        /// Comma-separated powers in dBm (default: nine points over
        /// -10..20 dBm).
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        /// Monte Carlo trials (defaults to mc.trials from the config).
        #[arg(long)]
        trials: Option<u64>,
        /// Monte Carlo seed (defaults to mc.seed from the config).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Jointly optimize blocklength, altitude, port count, and power for
    /// energy efficiency; prints the optimum and writes the EE surface.
    Optimize {
        /// Surface CSV output file; stdout when omitted.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Altitude grid as min,max,step in meters.
        #[arg(long, value_delimiter = ',', value_name = "MIN,MAX,STEP")]
        z_grid: Option<Vec<f64>>,
        /// Blocklength grid as min,max,step in channel uses.
        #[arg(long, value_delimiter = ',', value_name = "MIN,MAX,STEP")]
        l_grid: Option<Vec<u32>>,
        /// Port-count range as min,max.
        #[arg(long, value_delimiter = ',', value_name = "MIN,MAX")]
        ports: Option<Vec<u32>>,
        /// Transmit-power bracket as min,max in dBm.
        #[arg(long, value_delimiter = ',', value_name = "MIN,MAX")]
        power_dbm: Option<Vec<f64>>,
        /// Average-BLER reliability threshold.
        #[arg(long)]
        eps_th: Option<f64>,
    },
    /// Print derived quantities: code constants, correlation spectrum,
    /// and link budgets at one heading.
    Inspect {
        /// Heading angle in radians.
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        /// Print the canonical form of the loaded config and exit.
        #[arg(long)]
        emit_config: bool,
    },
}

const EXIT_VALIDATION_FAIL: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_CONFIG_ERROR: u8 = 4;

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version land here too; only real usage errors are
            // config errors.
            let code = if e.use_stderr() { EXIT_CONFIG_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("fasrelay: {e}");
            ExitCode::from(EXIT_CONFIG_ERROR)
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<SystemConfig<f64>, cfgfile::CfgError> {
    match path {
        Some(p) => cfgfile::load_path(p),
        None => Err(cfgfile::CfgError(
            "no configuration file given (use --config <path>)".into(),
        )),
    }
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<(), cfgfile::CfgError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| cfgfile::CfgError(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, cfgfile::CfgError> {
    let cfg = load_config(&cli.config)?;
    match cli.command {
        Command::Sweep { sweep_var, grid, estimators, trials, seed, out } => {
            let table = commands::run_sweep(
                &cfg,
                cli.paper_literal_gcq,
                sweep_var,
                &grid,
                &estimators,
                trials,
                seed,
            )?;
            write_or_print(&out, &table.render())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { grid, trials, seed } => {
            let grid = grid.unwrap_or_else(commands::default_validate_grid);
            let trials = trials.unwrap_or(cfg.mc.trials);
            let seed = seed.unwrap_or(cfg.mc.seed);
            let (report, pass) =
                commands::run_validate(&cfg, cli.paper_literal_gcq, &grid, trials, seed)?;
            print!("{report}");
            Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(EXIT_VALIDATION_FAIL) })
        }
        Command::Optimize { out, z_grid, l_grid, ports, power_dbm, eps_th } => {
            let space = build_space(z_grid, l_grid, ports, power_dbm, eps_th)?;
            let (report, table, feasible) = commands::run_optimize(&cfg, &space)?;
            print!("{report}");
            write_or_print(&out, &table.render())?;
            Ok(if feasible { ExitCode::SUCCESS } else { ExitCode::from(EXIT_INFEASIBLE) })
        }
        Command::Inspect { theta, emit_config } => {
            if emit_config {
                print!("{}", cfgfile::emit(&cfg));
            } else {
                print!("{}", commands::run_inspect(&cfg, theta)?);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// The preset search space with any command-line overrides applied.
fn build_space(
    z_grid: Option<Vec<f64>>,
    l_grid: Option<Vec<u32>>,
    ports: Option<Vec<u32>>,
    power_dbm: Option<Vec<f64>>,
    eps_th: Option<f64>,
) -> Result<SearchSpace<f64>, cfgfile::CfgError> {
    use fasrelay_core::config::dbm_to_watts;
    fn exactly<T: Copy, const K: usize>(
        flag: &str,
        values: &[T],
    ) -> Result<[T; K], cfgfile::CfgError> {
        values.try_into().map_err(|_| {
            cfgfile::CfgError(format!(
                "{flag}: expected {K} comma-separated values, got {}",
                values.len()
            ))
        })
    }
    let mut space = SearchSpace::<f64>::preset();
    if let Some(z) = z_grid {
        [space.z_min, space.z_max, space.z_step] = exactly("--z-grid", &z)?;
    }
    if let Some(l) = l_grid {
        [space.l_min, space.l_max, space.l_step] = exactly("--l-grid", &l)?;
    }
    if let Some(n) = ports {
        [space.n_min, space.n_max] = exactly("--ports", &n)?;
    }
    if let Some(p) = power_dbm {
        let [lo, hi] = exactly("--power-dbm", &p)?;
        if hi <= lo {
            return Err(cfgfile::CfgError(
                "--power-dbm: the maximum must exceed the minimum".into(),
            ));
        }
        space.p_min_w = dbm_to_watts(lo);
        space.p_max_w = dbm_to_watts(hi);
    }
    if let Some(eps) = eps_th {
        space.eps_th = eps;
    }
    Ok(space)
}
