//! Shared JSON configuration.
//!
//! One flat schema mirrors every flag of every subcommand; keys use the flag
//! spelling (`kh-min`, `N`, ...). A config value fills in whenever the
//! corresponding flag is absent, so precedence is flag > config > built-in
//! default. Unknown keys are rejected to catch typos.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    #[serde(rename = "N")]
    pub n: Option<f64>,
    pub delta: Option<f64>,
    pub h: Option<f64>,
    #[serde(rename = "kh-min")]
    pub kh_min: Option<f64>,
    #[serde(rename = "kh-max")]
    pub kh_max: Option<f64>,
    pub samples: Option<usize>,
    pub spacing: Option<String>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub scales: Option<usize>,
    pub selftest: Option<bool>,
    pub epsilon: Option<f64>,
    #[serde(rename = "omega-min")]
    pub omega_min: Option<f64>,
    #[serde(rename = "omega-max")]
    pub omega_max: Option<f64>,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    #[serde(rename = "packet-center")]
    pub packet_center: Option<f64>,
    #[serde(rename = "packet-width")]
    pub packet_width: Option<f64>,
    #[serde(rename = "packet-amplitude")]
    pub packet_amplitude: Option<f64>,
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    #[serde(rename = "snap-every")]
    pub snap_every: Option<usize>,
    pub integrator: Option<String>,
    pub field: Option<String>,
    pub x: Option<f64>,
    #[serde(rename = "out-dir")]
    pub out_dir: Option<PathBuf>,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path).map_err(CliError::Io)?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
}
