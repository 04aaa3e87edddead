use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use rdcheck::app::{
    emit_outputs, load_config, run_experiment, run_sweep, Experiment, OverallVerdict, RunConfig,
};
use rdcheck::theory::{fit_rate_window, interpolation_constants, quad_equilibrium, FitMode};
use rdcheck::Error;

const EXIT_CHECK_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "rdcheck",
    version,
    about = "Reaction-diffusion simulation with executable existence-proof diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate and write the CSV and report; exits 0 unless setup or the solver fails.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Run several configurations concurrently.
        #[arg(long)]
        sweep: bool,
        /// Simulate the rescaled, augmented system.
        #[arg(long)]
        augment: bool,
    },
    /// Like `run`, but exits 1 if any check fails.
    Verify {
        config: PathBuf,
        #[arg(long)]
        augment: bool,
    },
    /// Print the interpolation constants.
    Constants {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        d: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        cn: Option<f64>,
        #[arg(long)]
        kappan: Option<f64>,
    },
    /// Positive equilibrium of A1 + A2 <-> A3 + A4 for given masses.
    Equilibrium {
        #[arg(long)]
        m13: f64,
        #[arg(long)]
        m23: f64,
        #[arg(long)]
        m24: f64,
    },
    /// Fit an exponential or power law to one CSV column against `t`.
    Fit {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        column: String,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        t_min: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exp,
    Poly,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numerical { .. } => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(e))
}

fn load(path: &Path, augment: bool) -> Result<RunConfig, Error> {
    let mut cfg = load_config(path)?;
    if augment {
        cfg.augment = true;
        cfg.validate()?;
    }
    Ok(cfg)
}

/// Write outputs and summarise; returns the experiment's exit code.
fn finish(exp: &Experiment, cfg: &RunConfig, strict: bool) -> u8 {
    if let Err(e) = emit_outputs(exp, cfg) {
        eprintln!("error: {e}");
        return exit_code(&e);
    }
    let r = &exp.report;
    for c in &r.checks {
        println!("{:<32} {:?}  measured={:?}", c.name, c.verdict, c.measured);
    }
    for f in &r.fits {
        match (&f.result, &f.error) {
            (Some(fit), _) => {
                print!(
                    "{:<32} rate={:?} prefactor={:?} r2={:?}",
                    format!("{} ({})", f.name, f.quantity),
                    fit.rate,
                    fit.prefactor,
                    fit.r_squared
                );
                match f.corrected_rate {
                    Some(c) => println!(" corrected_rate={c:?}"),
                    None => println!(),
                }
            }
            (None, Some(e)) => println!("{:<32} unavailable: {e}", f.name),
            _ => {}
        }
    }
    println!("verdict: {:?}", r.verdict);
    match r.verdict {
        OverallVerdict::Aborted => {
            if let Some(f) = &r.failure {
                eprintln!("run aborted: {}", f.message);
            }
            EXIT_NUMERICAL
        }
        OverallVerdict::Fail if strict => {
            for c in r.failed_checks() {
                eprintln!(
                    "check failed: {} (measured {:?}, bound {:?})",
                    c.name, c.measured, c.bound
                );
            }
            EXIT_CHECK_FAILURE
        }
        _ => 0,
    }
}

fn run_one(path: &Path, augment: bool, strict: bool) -> ExitCode {
    let cfg = match load(path, augment) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    match run_experiment(&cfg) {
        Ok(exp) => ExitCode::from(finish(&exp, &cfg, strict)),
        Err(e) => fail(&e),
    }
}

fn run_many(paths: &[PathBuf], augment: bool) -> ExitCode {
    let mut configs = Vec::with_capacity(paths.len());
    for p in paths {
        match load(p, augment) {
            Ok(c) => configs.push(c),
            Err(e) => {
                eprintln!("{}:", p.display());
                return fail(&e);
            }
        }
    }
    let results = match run_sweep(&configs) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let mut worst = 0u8;
    for ((path, cfg), res) in paths.iter().zip(&configs).zip(results) {
        println!("== {}", path.display());
        let code = match res {
            Ok(exp) => finish(&exp, cfg, false),
            Err(e) => {
                eprintln!("error: {e}");
                exit_code(&e)
            }
        };
        worst = worst.max(code);
    }
    ExitCode::from(worst)
}

fn constants(n: u32, d: f64, gamma: f64, cn: Option<f64>, kappan: Option<f64>) -> ExitCode {
    let kernel = match (cn, kappan) {
        (Some(c), Some(k)) => Some((c, k)),
        (None, None) => None,
        _ => {
            eprintln!("error: --cn and --kappan must be given together");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match interpolation_constants(n, d, gamma, kernel) {
        Ok(c) => {
            for (name, v) in [("B1", c.b1), ("B2", c.b2), ("B3", c.b3)] {
                if let Some(v) = v {
                    println!("{name}={v:.10}");
                }
            }
            println!("B4={:.10}", c.b4);
            println!("B5={:.10}", c.b5);
            if let Some(b) = c.b_bounded {
                println!("B_free={:.10}", c.b_free);
                println!("B_bounded={b:.10}");
            }
            println!("B={:.10}", c.b);
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn equilibrium(m13: f64, m23: f64, m24: f64) -> ExitCode {
    match quad_equilibrium([m13, m23, m24]) {
        Ok(eq) => {
            for (i, u) in eq.u.iter().enumerate() {
                println!("u{}={u:?}", i + 1);
            }
            println!("residual={:?}", eq.residual());
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn read_column(path: &Path, column: &str) -> Result<Vec<(f64, f64)>, Error> {
    let data_err = |e: csv::Error| Error::Data(format!("{}: {e}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(data_err)?;
    let header = reader.headers().map_err(data_err)?.clone();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("no column named {name:?}")))
    };
    let (ti, yi) = (find("t")?, find(column)?);
    let mut out = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(data_err)?;
        let parse = |i: usize| -> Result<Option<f64>, Error> {
            match rec.get(i).map(str::trim) {
                None | Some("") => Ok(None),
                Some(s) => s
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|e| Error::Data(format!("row {}: {s:?}: {e}", k + 2))),
            }
        };
        if let (Some(t), Some(y)) = (parse(ti)?, parse(yi)?) {
            out.push((t, y));
        }
    }
    Ok(out)
}

fn fit(csv: &Path, column: &str, mode: Mode, t_min: Option<f64>, t_max: Option<f64>) -> ExitCode {
    let data = match read_column(csv, column) {
        Ok(d) => d,
        Err(e) => return fail(&e),
    };
    let mode = match mode {
        Mode::Exp => FitMode::Exponential,
        Mode::Poly => FitMode::Polynomial,
    };
    let lo = t_min.unwrap_or(f64::NEG_INFINITY);
    let hi = t_max.unwrap_or(f64::INFINITY);
    match fit_rate_window(&data, mode, lo, hi) {
        Ok(r) => {
            println!("rate={:?}", r.rate);
            println!("prefactor={:?}", r.prefactor);
            println!("r_squared={:?}", r.r_squared);
            println!("samples={}", r.samples);
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            configs,
            sweep,
            augment,
        } => {
            if sweep || configs.len() > 1 {
                run_many(&configs, augment)
            } else {
                run_one(&configs[0], augment, false)
            }
        }
        Command::Verify { config, augment } => run_one(&config, augment, true),
        Command::Constants {
            n,
            d,
            gamma,
            cn,
            kappan,
        } => constants(n, d, gamma, cn, kappan),
        Command::Equilibrium { m13, m23, m24 } => equilibrium(m13, m23, m24),
        Command::Fit {
            csv,
            column,
            mode,
            t_min,
            t_max,
        } => fit(&csv, &column, mode, t_min, t_max),
    }
}
