//! Experiment configuration: a JSON file whose keys the command-line flags
//! mirror one to one. Flags override the file.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// segment, rectangle, circle or swiss_roll_hole.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifold: Option<String>,
    /// Number of sample points.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Hole radius of the Swiss roll, in chart units.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hole_radius: Option<f64>,
    /// Neighborhood radius (h-ball neighborhoods).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    /// Neighbor count (kNN neighborhoods); excludes --h.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Operator: dm, le, lle, ldr_lle, ldr_lle_plus, hlle, ltsa, llr, cl.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    /// LLE ridge, relative to the mean squared neighbor distance.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Gaussian kernel width for Laplacian eigenmaps.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_width: Option<f64>,
    /// Embedding dimension.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    /// Diagnostic to run.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<String>,
    /// Input cloud CSV written by `generate`.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cloud: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),*) => {
        $(if $top.$f.is_some() { $base.$f = $top.$f.clone(); })*
    };
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("bad config {}: {e}", path.display())))
    }

    /// `self` with every field set in `flags` replaced.
    pub fn merged(mut self, flags: &Config) -> Self {
        overlay!(self, flags, manifold, n, seed, hole_radius, h, k, method, lambda, kernel_width, p, check, cloud, out);
        self
    }

    /// SHA-256 of the command and the resolved settings, excluding the output
    /// directory.
    pub fn hash(&self, command: &str) -> String {
        let mut c = self.clone();
        c.out = None;
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update(serde_json::to_vec(&c).expect("config serializes"));
        hex::encode(h.finalize())
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("nldr-out"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let file = Config { n: Some(10), h: Some(0.1), ..Config::default() };
        let flags = Config { h: Some(0.2), ..Config::default() };
        let m = file.merged(&flags);
        assert_eq!((m.n, m.h), (Some(10), Some(0.2)));
    }

    #[test]
    fn hash_ignores_output_directory() {
        let a = Config { n: Some(10), out: Some("a".into()), ..Config::default() };
        let b = Config { out: Some("b".into()), ..a.clone() };
        assert_eq!(a.hash("generate"), b.hash("generate"));
        assert_ne!(a.hash("generate"), a.hash("embed"));
        assert_eq!(a.hash("generate").len(), 64);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<Config>(r#"{"nn": 3}"#).is_err());
    }
}
