//! Per-subcommand parameter sets, shared by the flag parser and the config file.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// Every field is optional so that flag and file values can be layered:
/// `merged` takes the flag, then the file, then the built-in default.
macro_rules! params {
    ($(#[$meta:meta])* $name:ident { $( $(#[$fmeta:meta])* $field:ident : $ty:ty = $default:expr ),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Args, Serialize, Deserialize, Clone, Debug, Default, PartialEq)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $(
                $(#[$fmeta])*
                #[arg(long)]
                #[serde(skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
        }

        impl $name {
            pub fn merged(self, file: Option<Self>) -> Self {
                let file = file.unwrap_or_default();
                Self { $( $field: self.$field.or(file.$field).or($default), )* }
            }
        }
    };
}

fn model() -> Option<String> {
    Some("lazy-simple".into())
}

params! {
    /// Raw walk positions.
    SimulateParams {
        /// lazy-simple, simple or stable:<alpha>
        model: String = model(),
        d: usize = Some(1),
        p: usize = Some(1),
        n: usize = Some(100),
        replicas: u64 = Some(1),
    }
}

params! {
    /// l(n, 0), Σl² and Λ_n per replica.
    LocaltimeParams {
        model: String = model(),
        d: usize = Some(1),
        p: usize = Some(1),
        n: usize = Some(1000),
        replicas: u64 = Some(1),
    }
}

params! {
    /// E l(n, 0) or E l(n, 0)² by periodic trapezoid quadrature.
    FourierParams {
        model: String = model(),
        d: usize = Some(1),
        p: usize = Some(1),
        n: usize = Some(10),
        /// 1 or 2
        moment: u8 = Some(1),
        /// Nodes per axis; the smallest provably exact count when unset.
        points: usize = None,
    }
}

params! {
    /// Exact enumeration and the moment inequality checks.
    OracleParams {
        model: String = model(),
        d: usize = Some(1),
        p: usize = Some(1),
        n: usize = Some(2),
        mmax: usize = Some(3),
        /// moments, l41, l42, l44 or all
        check: String = Some("all".into()),
    }
}

params! {
    /// Variational constants and the spatial-side identity.
    RhoParams {
        /// rho1, rho2, rho_f or a1
        which: String = Some("rho1".into()),
        /// gaussian, gaussian:<sigma> or stable:<alpha>
        psi: String = Some("gaussian".into()),
        p: usize = Some(1),
        d: usize = Some(1),
        /// Points per axis; 512 in d=1 (1000 for a1), 128 in d=2.
        grid: usize = None,
        /// Frequency cutoff; 40 in d=1, 20 in d=2.
        cutoff: f64 = None,
        tol: f64 = Some(1e-10),
        /// Repeat at doubled cutoff and extrapolate the truncation error.
        extrapolate: bool = Some(true),
    }
}

params! {
    /// Empirical tail curve against the deviation rate.
    TailsParams {
        model: String = model(),
        d: usize = Some(1),
        p: usize = Some(1),
        n: usize = Some(10_000),
        /// Deviation scale; (log n)² when unset.
        bn: f64 = None,
        /// l0 or l2
        stat: String = Some("l0".into()),
        #[arg(value_delimiter = ',')]
        lambdas: Vec<f64> = Some((0..=10).map(|k| 1.0 + 0.1 * k as f64).collect()),
        replicas: u64 = Some(1000),
        /// Include the rate function from the variational constants.
        theory: bool = Some(true),
    }
}

params! {
    /// Iterated-logarithm statistics along one path tuple.
    LilParams {
        model: String = model(),
        d: usize = Some(1),
        p: usize = Some(1),
        /// Last checkpoint.
        n: usize = Some(1_000_000),
        start: usize = Some(16),
        per_octave: usize = Some(8),
        theory: bool = Some(true),
    }
}

params! {
    /// Exponentially weighted local time against l(n, 0) on the same paths.
    PoissonParams {
        model: String = model(),
        d: usize = Some(1),
        p: usize = Some(1),
        n: usize = Some(1000),
        replicas: u64 = Some(100),
        /// Paired summary over these horizons instead of per-replica rows.
        #[arg(value_delimiter = ',')]
        levels: Vec<usize> = None,
    }
}

params! {
    /// Consecutive-level KS distances of the weak-limit scaling.
    WeakParams {
        model: String = model(),
        d: usize = Some(1),
        p: usize = Some(2),
        #[arg(value_delimiter = ',')]
        levels: Vec<usize> = Some((8..=13).map(|k| 1usize << k).collect()),
        replicas: u64 = Some(10_000),
    }
}

params! {
    /// Fast self-check: closed-form anchors, ρ̄₁, the spatial identity and
    /// the oracle triangle at small n.
    ReportParams {
        /// Largest horizon in the oracle triangle.
        nmax: usize = Some(4),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Clone, Debug)]
pub enum Command {
    Simulate(SimulateParams),
    Localtime(LocaltimeParams),
    Fourier(FourierParams),
    Oracle(OracleParams),
    Rho(RhoParams),
    Tails(TailsParams),
    Lil(LilParams),
    Poisson(PoissonParams),
    Weak(WeakParams),
    Report(ReportParams),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Localtime(_) => "localtime",
            Command::Fourier(_) => "fourier",
            Command::Oracle(_) => "oracle",
            Command::Rho(_) => "rho",
            Command::Tails(_) => "tails",
            Command::Lil(_) => "lil",
            Command::Poisson(_) => "poisson",
            Command::Weak(_) => "weak",
            Command::Report(_) => "report",
        }
    }

    /// JSON for the structured reports, CSV for tables.
    pub fn default_format(&self) -> Format {
        match self {
            Command::Oracle(_) | Command::Rho(_) | Command::Report(_) => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Parser, Clone, Debug)]
#[command(name = "addwalk", version, about = "Local times of additive random walks")]
pub struct Cli {
    /// Master seed; falls back to the config file, then ADDWALK_SEED, then 2007.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output file; stdout when unset.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML file with top-level globals and one table per subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}
