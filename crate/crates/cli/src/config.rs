//! TOML configuration. Every key is optional; command-line flags win over the
//! file, and the file wins over built-in defaults.
//!
//! ```toml
//! case = "ieee30"
//! seed = 1
//! jobs = 4
//! out = "results"
//!
//! [moea]
//! pop = 100
//! evals = 10000
//! f = 0.5
//! cr = 1.0
//! knn_k = 5
//! n_cand = 3
//!
//! [decision]
//! clusters = 2
//! weights = [0.5, 0.5]
//! rho = 0.5
//! fuzziness = 2.0
//! restarts = 0
//!
//! [reference]
//! n_weights = 100
//! evals = 10000
//! pop = 30
//! f = 0.5
//! cr = 0.9
//! ```

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub case: Option<String>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub moea: MoeaSection,
    pub decision: DecisionSection,
    pub reference: ReferenceSection,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MoeaSection {
    pub pop: Option<usize>,
    pub evals: Option<usize>,
    pub f: Option<f64>,
    pub cr: Option<f64>,
    pub knn_k: Option<usize>,
    pub n_cand: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecisionSection {
    pub clusters: Option<usize>,
    pub weights: Option<[f64; 2]>,
    pub rho: Option<f64>,
    pub fuzziness: Option<f64>,
    pub restarts: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceSection {
    pub n_weights: Option<usize>,
    pub evals: Option<usize>,
    pub pop: Option<usize>,
    pub f: Option<f64>,
    pub cr: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_example_parses() {
        let doc = include_str!("config.rs");
        let start = doc.find("```toml").unwrap() + 7;
        let end = start + doc[start..].find("```").unwrap();
        let text: String = doc[start..end]
            .lines()
            .map(|l| l.trim_start().trim_start_matches("//!").trim_start())
            .collect::<Vec<_>>()
            .join("\n");
        let c: FileConfig = toml::from_str(&text).unwrap();
        assert_eq!(c.moea.evals, Some(10_000));
        assert_eq!(c.decision.weights, Some([0.5, 0.5]));
        assert_eq!(c.reference.cr, Some(0.9));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<FileConfig>("[moea]\npopulation = 3\n").is_err());
        assert_eq!(toml::from_str::<FileConfig>("").unwrap(), FileConfig::default());
    }
}
