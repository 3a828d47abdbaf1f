use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use degiorgi_iss::harness::{self, RawConfig, RunMode, ScenarioConfig};
use degiorgi_iss::inequalities::{run_property_suite, Family, SuiteSettings};
use degiorgi_iss::{Error, Execution};

/// Simulate disturbed Burgers and reaction-diffusion systems and verify
/// their stability bounds.
#[derive(Parser, Debug)]
#[command(name = "degiorgi-iss", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory.
    #[arg(long, global = true, default_value = "./out")]
    out: PathBuf,

    /// Absolute tolerance overriding every check's default.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario without checks and write its trajectories.
    Simulate { config: PathBuf },
    /// Run a scenario with its checks and write reports.
    Verify { config: PathBuf },
    /// Synthesize the backstepping kernels and gain constants.
    Kernel { config: PathBuf },
    /// Run the randomized functional-inequality suites.
    CheckInequalities {
        #[arg(long, default_value_t = 200)]
        seeds: u64,
        /// Field family: trig, sine or all.
        #[arg(long, default_value = "all")]
        family: String,
    },
    /// Vary one numeric key of a scenario.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<String>,
    },
}

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config { .. } => EXIT_CONFIG,
        _ => EXIT_FAIL,
    }
}

fn read_raw(path: &Path) -> Result<RawConfig, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config { line: None, key: path.display().to_string(), message: e.to_string() })?;
    RawConfig::parse(&text)
}

fn read_config(path: &Path) -> Result<ScenarioConfig, Error> {
    ScenarioConfig::from_raw(&read_raw(path)?)
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let say = |msg: String| {
        if !cli.quiet {
            println!("{msg}");
        }
    };
    match &cli.command {
        Command::Simulate { config } | Command::Verify { config } => {
            let mode = if matches!(cli.command, Command::Verify { .. }) { RunMode::Verify } else { RunMode::Simulate };
            let cfg = read_config(config)?;
            let start = Instant::now();
            let outcome = harness::execute(&cfg, mode, cli.tol, Execution::Parallel)?;
            let written = harness::write_artifacts(&outcome, &cli.out)?;
            for r in &outcome.reports {
                let adm = r
                    .admissibility
                    .map(|a| format!(", admissibility {:.4} < {:.4}: {}", a.value, a.threshold, a.pass))
                    .unwrap_or_default();
                say(format!(
                    "{:<14} min_margin {:>12.4e}  satisfied {}{adm}  => {}",
                    r.name.to_string(),
                    r.min_margin,
                    r.satisfied,
                    if r.passes() { "PASS" } else { "FAIL" }
                ));
            }
            say(format!(
                "{} files in {} ({:.2} s)",
                written.len(),
                cli.out.display(),
                start.elapsed().as_secs_f64()
            ));
            Ok(outcome.passes())
        }
        Command::Kernel { config } => {
            let cfg = read_config(config)?;
            let set = harness::synthesize_kernels(&cfg, true, Execution::Parallel)?;
            harness::write_kernels(&set, &cli.out)?;
            if let Some(g) = set.gains {
                say(format!("c0 = {:.6}, c1 = {:.6}", g.c0, g.c1));
            }
            Ok(true)
        }
        Command::CheckInequalities { seeds, family } => {
            let family = family.parse::<Family>().map_err(|e| Error::Config {
                line: None,
                key: "--family".into(),
                message: e.to_string(),
            })?;
            let settings = SuiteSettings {
                seeds: *seeds,
                family,
                ..SuiteSettings::default()
            };
            let records = run_property_suite(&settings, Execution::Parallel)?;
            fs::create_dir_all(&cli.out)?;
            let mut csv = String::from("seed,check,lhs,rhs,margin,satisfied\n");
            let mut all = true;
            for r in &records {
                all &= r.margin.satisfied;
                let m = &r.margin;
                csv.push_str(&format!(
                    "{},{},{:.16e},{:.16e},{:.16e},{}\n",
                    r.seed, r.check, m.lhs, m.rhs, m.margin, m.satisfied
                ));
            }
            fs::write(cli.out.join("inequalities.csv"), csv)?;
            say(format!(
                "{} checks, {} failed",
                records.len(),
                records.iter().filter(|r| !r.margin.satisfied).count()
            ));
            Ok(all)
        }
        Command::Sweep { config, param, values } => {
            let raw = read_raw(config)?;
            let rows = harness::sweep(&raw, param, values, Execution::Parallel)?;
            fs::create_dir_all(&cli.out)?;
            fs::write(cli.out.join("sweep.csv"), harness::sweep_csv(param, &rows))?;
            for r in &rows {
                match &r.result {
                    Ok(_) => say(format!("{param} = {}: {}", r.raw_value, if r.pass() { "PASS" } else { "FAIL" })),
                    Err(e) => say(format!("{param} = {}: error: {e}", r.raw_value)),
                }
            }
            Ok(rows.iter().all(|r| r.pass()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
