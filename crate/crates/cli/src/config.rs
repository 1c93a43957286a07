//! Optional TOML configuration file, the lowest-precedence source.
//!
//! ```toml
//! [proxy]
//! listen = "0.0.0.0:8080"
//! origin = "http://cdn.example/"
//! session_timeout_s = 30.0
//! fusion_url = "http://127.0.0.1:9100/"
//! public_url = "http://mec.local:8080/"
//!
//! [fusion]
//! listen = "127.0.0.1:9100"
//! data_dir = "store"
//!
//! [export]
//! fusion_url = "http://127.0.0.1:9100/"
//! rate_hz = 1.0
//! ```

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;
use url::Url;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Syntax { path: PathBuf, source: toml::de::Error },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProxySection {
    pub listen: Option<SocketAddr>,
    pub origin: Option<Url>,
    pub session_timeout_s: Option<f64>,
    pub fusion_url: Option<Url>,
    pub public_url: Option<Url>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionSection {
    pub listen: Option<SocketAddr>,
    pub data_dir: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportSection {
    pub fusion_url: Option<Url>,
    pub rate_hz: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub proxy: ProxySection,
    #[serde(default)]
    pub fusion: FusionSection,
    #[serde(default)]
    pub export: ExportSection,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig, ConfigError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        toml::from_str(&text).map_err(|source| ConfigError::Syntax { path: path.into(), source })
    }
}
