use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nicholson::presets::{reproduce, FigureId, Manifest};
use nicholson::scenario::{Scenario, ScenarioError};
use nicholson::sim::{integrate_dde, tail_stats, DEFAULT_WINDOW_FRACTION};
use nicholson::sweep::{delay_grid, sweep_delay};
use nicholson::{classify_dynamics, validate_system, Error};

/// Extinction/persistence analysis and simulation of patch-structured
/// Nicholson blowfly systems.
///
/// Exit codes: 0 ok, 1 invariant violation, 2 parse error, 3 numerical
/// failure, 4 reproduced labels differ from the expected ones.
#[derive(Parser)]
#[command(name = "nicholson", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file against the structural rules.
    Validate { scenario: PathBuf },
    /// Print the full classification report as JSON.
    Classify { scenario: PathBuf },
    /// Integrate the delay system; CSV to --out (or stdout), tail statistics as JSON.
    Simulate {
        scenario: PathBuf,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rerun built-in figure presets, writing CSVs and manifest.json.
    Reproduce {
        /// Figure ids (1a 1b 2a 2b 3a 3b) or `all`.
        #[arg(required = true)]
        figures: Vec<String>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Tabulate tail labels while one delay varies.
    SweepDelay {
        scenario: PathBuf,
        /// Patch number, starting at 1.
        #[arg(long)]
        patch: usize,
        /// Delay column, starting at 1.
        #[arg(long, default_value_t = 1)]
        delay_index: usize,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        /// Number of grid points.
        #[arg(long, default_value_t = 9)]
        steps: usize,
    },
}

enum Failure {
    Invariant(String),
    Parse(String),
    Numeric(String),
    Mismatch(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invariant(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Mismatch(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Invariant(m) | Failure::Parse(m) | Failure::Numeric(m) | Failure::Mismatch(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Precondition(_) | Error::InadmissibleHistory(_) | Error::StepTooLarge { .. } | Error::NegativeInput(_) => {
                Failure::Invariant(e.to_string())
            }
            Error::DimensionMismatch { .. } => Failure::Parse(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure::Parse(e.to_string())
    }
}

fn io(e: std::io::Error) -> Failure {
    Failure::Invariant(format!("i/o error: {e}"))
}

fn load_valid(path: &Path) -> Result<Scenario, Failure> {
    let sc = Scenario::load(path)?;
    let report = validate_system(&sc.system);
    if !report.ok {
        let rules: Vec<&str> = report.violations.iter().map(|v| v.rule.as_str()).collect();
        return Err(Failure::Invariant(format!("invalid system: {}", rules.join(", "))));
    }
    Ok(sc)
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("value serialises"));
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { scenario } => {
            let sc = Scenario::load(&scenario)?;
            let report = validate_system(&sc.system);
            print_json(&report);
            if !report.ok {
                return Err(Failure::Invariant("validation failed".into()));
            }
        }
        Command::Classify { scenario } => {
            let sc = load_valid(&scenario)?;
            print_json(&classify_dynamics(&sc.system)?);
        }
        Command::Simulate { scenario, t_end, dt, out } => {
            let mut sc = load_valid(&scenario)?;
            if let Some(t) = t_end {
                sc.t_end = t;
            }
            if let Some(dt) = dt {
                sc.dt = dt;
            }
            let traj = integrate_dde(&sc.system, &sc.history, sc.t_end, sc.dt)?;
            let stats = tail_stats(&traj, DEFAULT_WINDOW_FRACTION)?;
            match out {
                Some(path) => {
                    let file = std::fs::File::create(&path).map_err(io)?;
                    traj.write_csv(std::io::BufWriter::new(file)).map_err(io)?;
                    print_json(&stats);
                }
                None => {
                    let stdout = std::io::stdout();
                    let mut lock = stdout.lock();
                    traj.write_csv(&mut lock).map_err(io)?;
                    lock.flush().map_err(io)?;
                    eprintln!("{}", serde_json::to_string_pretty(&stats).expect("stats serialise"));
                }
            }
        }
        Command::Reproduce { figures, out } => {
            let ids: Vec<FigureId> = if figures.iter().any(|f| f == "all") {
                FigureId::ALL.to_vec()
            } else {
                figures.iter().map(|f| f.parse()).collect::<Result<_, _>>().map_err(Failure::Parse)?
            };
            std::fs::create_dir_all(&out).map_err(io)?;
            let mut manifest = Manifest { figures: Vec::new() };
            for id in ids {
                manifest.figures.push(reproduce(id, &out)?);
            }
            let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises") + "\n";
            std::fs::write(out.join("manifest.json"), text).map_err(io)?;
            for f in &manifest.figures {
                let labels: Vec<String> = f.observed.iter().map(|l| format!("{l:?}")).collect();
                println!("{} {} [{}]", f.figure, if f.matches { "match" } else { "MISMATCH" }, labels.join(", "));
            }
            if !manifest.all_match() {
                return Err(Failure::Mismatch("observed labels differ from expected".into()));
            }
        }
        Command::SweepDelay { scenario, patch, delay_index, from, to, steps } => {
            let sc = load_valid(&scenario)?;
            if patch == 0 || delay_index == 0 {
                return Err(Failure::Invariant("--patch and --delay-index start at 1".into()));
            }
            let taus = delay_grid(from, to, steps)?;
            let rows = sweep_delay(&sc, patch - 1, delay_index - 1, &taus)?;
            println!("tau,label,relative_amplitude,tail_min,tail_max");
            for r in rows {
                println!(
                    "{:.16e},{:?},{:.16e},{:.16e},{:.16e}",
                    r.tau, r.label, r.relative_amplitude, r.tail_min, r.tail_max
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
