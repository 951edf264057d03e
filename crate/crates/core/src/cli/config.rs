//! TOML configuration: top-level globals plus one optional table per subcommand.
//!
//! ```toml
//! seed = 11
//! format = "json"
//!
//! [localtime]
//! p = 2
//! n = 500
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::params::*;
use crate::error::{Error, Result};

#[derive(Deserialize, Default, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub simulate: Option<SimulateParams>,
    pub localtime: Option<LocaltimeParams>,
    pub fourier: Option<FourierParams>,
    pub oracle: Option<OracleParams>,
    pub rho: Option<RhoParams>,
    pub tails: Option<TailsParams>,
    pub lil: Option<LilParams>,
    pub poisson: Option<PoissonParams>,
    pub weak: Option<WeakParams>,
    pub report: Option<ReportParams>,
}

pub fn parse_config(text: &str) -> Result<ConfigFile> {
    toml::from_str(text).map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))
}

pub fn load_config(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e: toml::de::Error| Error::Config(format!("{}: {}", path.display(), e.message())))
}

impl ConfigFile {
    /// Layers this file under the parsed flags and fills the defaults.
    pub fn resolve(&self, command: Command) -> Command {
        match command {
            Command::Simulate(a) => Command::Simulate(a.merged(self.simulate.clone())),
            Command::Localtime(a) => Command::Localtime(a.merged(self.localtime.clone())),
            Command::Fourier(a) => Command::Fourier(a.merged(self.fourier.clone())),
            Command::Oracle(a) => Command::Oracle(a.merged(self.oracle.clone())),
            Command::Rho(a) => Command::Rho(a.merged(self.rho.clone())),
            Command::Tails(a) => Command::Tails(a.merged(self.tails.clone())),
            Command::Lil(a) => Command::Lil(a.merged(self.lil.clone())),
            Command::Poisson(a) => Command::Poisson(a.merged(self.poisson.clone())),
            Command::Weak(a) => Command::Weak(a.merged(self.weak.clone())),
            Command::Report(a) => Command::Report(a.merged(self.report.clone())),
        }
    }
}
