//! Command-line front end: flag and config resolution, the worker pool, and
//! dispatch to the library.

mod commands;
mod config;
mod output;
mod params;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use config::{load_config, parse_config, ConfigFile};
pub use output::{write_output, ExperimentManifest, Output};
pub use params::*;

use crate::error::{Error, Result};

/// Seed used when neither a flag, the config file nor ADDWALK_SEED sets one.
pub const DEFAULT_SEED: u64 = 2007;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

/// Fully resolved invocation.
#[derive(Clone, Debug)]
pub struct Invocation {
    pub command: Command,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub format: Format,
    pub out: Option<std::path::PathBuf>,
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var("ADDWALK_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("ADDWALK_SEED is not an unsigned integer: `{s}`"))),
        Err(_) => Ok(None),
    }
}

/// Applies config-file values and defaults beneath the parsed flags.
pub fn resolve(cli: Cli) -> Result<Invocation> {
    let file = match &cli.config {
        Some(path) => load_config(path)?,
        None => ConfigFile::default(),
    };
    let seed = match cli.seed.or(file.seed) {
        Some(s) => s,
        None => env_seed()?.unwrap_or(DEFAULT_SEED),
    };
    let jobs = cli.jobs.or(file.jobs);
    if jobs == Some(0) {
        return Err(Error::InvalidParameter("--jobs must be positive".into()));
    }
    let command = fill_derived(file.resolve(cli.command))?;
    let format = cli.format.or(file.format).unwrap_or(command.default_format());
    Ok(Invocation { command, seed, jobs, format, out: cli.out.or(file.out) })
}

/// Fills defaults that depend on other parameters, so the manifest echoes
/// every value actually used.
fn fill_derived(command: Command) -> Result<Command> {
    Ok(match command {
        Command::Fourier(mut a) => {
            if a.points.is_none() {
                let model = crate::model::WalkModel::from_name(a.model.as_deref().unwrap_or_default(), a.d.unwrap_or(1))?;
                a.points = Some(crate::spectral::QuadratureSpec::exact_for(&model, a.n.unwrap_or(0), a.p.unwrap_or(1)).points);
            }
            Command::Fourier(a)
        }
        Command::Rho(mut a) => {
            let d = a.d.unwrap_or(1);
            a.grid = a.grid.or(Some(match (d, a.which.as_deref()) {
                (1, Some("a1")) => 1000,
                (1, _) => 512,
                _ => 128,
            }));
            a.cutoff = a.cutoff.or(Some(if d == 1 { 40.0 } else { 20.0 }));
            Command::Rho(a)
        }
        Command::Tails(mut a) => {
            a.bn = a.bn.or_else(|| a.n.map(crate::rates::default_bn));
            Command::Tails(a)
        }
        other => other,
    })
}

fn params_json(command: &Command) -> serde_json::Value {
    let v = match command {
        Command::Simulate(a) => serde_json::to_value(a),
        Command::Localtime(a) => serde_json::to_value(a),
        Command::Fourier(a) => serde_json::to_value(a),
        Command::Oracle(a) => serde_json::to_value(a),
        Command::Rho(a) => serde_json::to_value(a),
        Command::Tails(a) => serde_json::to_value(a),
        Command::Lil(a) => serde_json::to_value(a),
        Command::Poisson(a) => serde_json::to_value(a),
        Command::Weak(a) => serde_json::to_value(a),
        Command::Report(a) => serde_json::to_value(a),
    };
    v.expect("parameters serialise")
}

/// Runs a resolved invocation on its own worker pool.
pub fn execute(inv: &Invocation) -> Result<(ExperimentManifest, Output)> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = inv.jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    let seed = inv.seed;
    let out = pool.install(|| match &inv.command {
        Command::Simulate(a) => commands::simulate(a, seed),
        Command::Localtime(a) => commands::localtime(a, seed),
        Command::Fourier(a) => commands::fourier(a),
        Command::Oracle(a) => commands::oracle(a),
        Command::Rho(a) => commands::rho(a),
        Command::Tails(a) => commands::tails(a, seed),
        Command::Lil(a) => commands::lil(a, seed),
        Command::Poisson(a) => commands::poisson(a, seed),
        Command::Weak(a) => commands::weak(a, seed),
        Command::Report(a) => commands::report(a),
    })?;
    Ok((ExperimentManifest::new(inv.command.name(), params_json(&inv.command), seed), out))
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        _ => EXIT_INVALID,
    }
}

/// Parses `argv` (program name first), runs, and writes to `--out` or `stdout`.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    let result = resolve(cli).and_then(|inv| {
        let (manifest, out) = execute(&inv)?;
        match &inv.out {
            Some(path) => {
                let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
                write_output(&mut f, &manifest, &out, inv.format)?;
            }
            None => write_output(stdout, &manifest, &out, inv.format)?,
        }
        Ok(out.violation)
    });
    match result {
        Ok(false) => EXIT_OK,
        Ok(true) => {
            let _ = writeln!(stderr, "error: an inequality or identity check failed");
            EXIT_VIOLATION
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

/// [`run_with`] on the process's stdout and stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
