use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qtransfer_core::sweep::{
    parse_f64_list, parse_initial_list, run_sweep_to_file, verify, ConfigOverrides, Engine, Preset, SweepConfig,
};
use qtransfer_core::analytic::InitialAtoms;
use qtransfer_core::Error;

type FloatList = Vec<f64>;
type InitialList = Vec<InitialAtoms>;

const EXIT_CONFIG: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "qtransfer", version, about = "Entanglement transfer from a two-mode squeezed field to two atoms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the measure over a parameter grid and write a CSV.
    Sweep(GridArgs),
    /// Compare the closed form against full evolution and check invariants.
    Verify(GridArgs),
    /// Run a named figure configuration.
    Preset {
        #[arg(value_parser = parse_preset)]
        name: Preset,
        #[command(flatten)]
        grid: GridArgs,
    },
}

#[derive(Args, Debug, Default)]
struct GridArgs {
    /// Squeezing parameters, comma separated.
    #[arg(long, value_parser = parse_f64_list, allow_hyphen_values = true)]
    s: Option<FloatList>,
    /// Reflection coefficients, comma separated.
    #[arg(long, value_parser = parse_f64_list, allow_hyphen_values = true)]
    r: Option<FloatList>,
    #[arg(long, allow_hyphen_values = true)]
    lt_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lt_stop: Option<f64>,
    /// Number of λt points, endpoints included.
    #[arg(long)]
    lt_steps: Option<usize>,
    /// gg, ee, or a comma-separated list.
    #[arg(long, value_parser = parse_initial_list)]
    initial: Option<InitialList>,
    /// analytic, oracle or both.
    #[arg(long, value_parser = parse_engine)]
    engine: Option<Engine>,
    /// Neglected probability used to pick the photon cutoff.
    #[arg(long)]
    tail_tol: Option<f64>,
    /// Fixed photon cutoff; overrides --tail-tol.
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// key = value file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_preset(s: &str) -> Result<Preset, Error> {
    s.parse()
}

fn parse_engine(s: &str) -> Result<Engine, Error> {
    s.parse()
}

impl GridArgs {
    fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            s_values: self.s.clone(),
            r_values: self.r.clone(),
            lt_start: self.lt_start,
            lt_stop: self.lt_stop,
            lt_steps: self.lt_steps,
            initial: self.initial.clone(),
            engine: self.engine,
            tail_tol: self.tail_tol,
            n_max: self.n_max,
            output_path: self.out.clone(),
            threads: self.threads,
        }
    }

    fn resolve(&self, mut config: SweepConfig) -> Result<SweepConfig, Error> {
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?;
            ConfigOverrides::parse_kv(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
                .apply(&mut config);
        }
        self.overrides().apply(&mut config);
        config.validate()?;
        Ok(config)
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => EXIT_IO,
        Error::EngineDisagreement { .. } => EXIT_VERIFY,
        _ => EXIT_CONFIG,
    }
}

fn run_grid(config: SweepConfig) -> Result<u8, Error> {
    let result = run_sweep_to_file(&config)?;
    eprintln!("wrote {} rows to {}", result.rows.len(), config.output_path.display());
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Sweep(grid) => run_grid(grid.resolve(SweepConfig::default())?),
        Command::Preset { name, grid } => run_grid(grid.resolve(SweepConfig::preset(name))?),
        Command::Verify(grid) => {
            let config = grid.resolve(SweepConfig::verification_grid())?;
            let report = verify(&config)?;
            print!("{report}");
            if report.passed() {
                Ok(0)
            } else {
                for p in report.failures() {
                    eprintln!(
                        "failed at s={} r={} lambda_t={} initial={}: {}",
                        p.s,
                        p.r,
                        p.lambda_t,
                        p.initial,
                        p.violations.join("; ")
                    );
                }
                Ok(EXIT_VERIFY)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
