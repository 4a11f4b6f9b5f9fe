use std::path::Path;

use anyhow::{bail, Context};
use clap::Args;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use damlab::cqed::CqedParams;
use damlab::metrology::Scheme;
use damlab::pointer::DeviationNorm;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XGridSpec {
    pub lo: f64,
    pub hi: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CqedConfig {
    pub omega_r0: f64,
    pub alpha: f64,
    pub delta_omega: f64,
    pub nbar: f64,
    pub n_max: usize,
}

/// One JSON file per run. Every key is optional; unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub experiment: Option<String>,
    pub theta: Option<f64>,
    pub gamma: Option<f64>,
    pub sigma: Option<f64>,
    pub t: Option<f64>,
    pub theta_list: Option<Vec<f64>>,
    pub gamma_list: Option<Vec<f64>>,
    pub sigma_list: Option<Vec<f64>>,
    pub t_list: Option<Vec<f64>>,
    pub x_grid: Option<XGridSpec>,
    pub momentum_nodes: Option<usize>,
    pub n: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub scheme: Option<String>,
    pub norm: Option<String>,
    pub tolerance: Option<f64>,
    pub n_copies: Option<Vec<usize>>,
    pub n_random: Option<usize>,
    pub cqed: Option<CqedConfig>,
}

/// Per-command overrides of the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Coupling time in μs.
    #[arg(long)]
    pub t: Option<f64>,
    /// `pm`, `dam` or `finite-t`.
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// `hs` or `trace`.
    #[arg(long)]
    pub norm: Option<String>,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Applies command-line values on top of the file. A single `--sigma`
    /// also replaces any `sigma_list`, and likewise for `--theta`, `--gamma`
    /// and `--t`.
    pub fn resolve(mut self, command: &str, o: &Overrides, seed: Option<u64>) -> anyhow::Result<Self> {
        match &self.experiment {
            Some(e) if e != command => bail!("config is for experiment `{e}`, not `{command}`"),
            _ => self.experiment = Some(command.to_string()),
        }
        if let Some(v) = o.theta {
            self.theta = Some(v);
            self.theta_list = Some(vec![v]);
        }
        if let Some(v) = o.gamma {
            self.gamma = Some(v);
            self.gamma_list = Some(vec![v]);
        }
        if let Some(v) = o.sigma {
            self.sigma = Some(v);
            self.sigma_list = Some(vec![v]);
        }
        if let Some(v) = o.t {
            self.t = Some(v);
            self.t_list = Some(vec![v]);
        }
        self.scheme = o.scheme.clone().or(self.scheme);
        self.n = o.n.or(self.n);
        self.trials = o.trials.or(self.trials);
        self.norm = o.norm.clone().or(self.norm);
        self.tolerance = o.tolerance.or(self.tolerance);
        self.seed = seed.or(self.seed).or(Some(DEFAULT_SEED));
        self.norm()?;
        self.scheme()?;
        Ok(self)
    }

    /// SHA-256 of the resolved config as compact JSON.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn theta(&self, default: f64) -> f64 {
        self.theta.unwrap_or(default)
    }

    pub fn gamma(&self, default: f64) -> f64 {
        self.gamma.unwrap_or(default)
    }

    pub fn sigma(&self, default: f64) -> f64 {
        self.sigma.unwrap_or(default)
    }

    pub fn list(field: &Option<Vec<f64>>, default: &[f64]) -> Vec<f64> {
        field.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn norm(&self) -> anyhow::Result<DeviationNorm> {
        match &self.norm {
            None => Ok(DeviationNorm::default()),
            Some(s) => s.parse().map_err(|e| anyhow::anyhow!("{e}")),
        }
    }

    /// `None` when no scheme was requested.
    pub fn scheme(&self) -> anyhow::Result<Option<Scheme>> {
        let Some(s) = &self.scheme else { return Ok(None) };
        Ok(Some(match s.as_str() {
            "pm" | "pm-ideal" => Scheme::PmIdeal,
            "dam" | "dam-ideal" => Scheme::DamIdeal,
            "finite-t" => Scheme::FiniteT {
                gamma: self.gamma.context("finite-t scheme needs gamma")?,
                t: self.t.context("finite-t scheme needs t")?,
            },
            other => bail!("unknown scheme `{other}` (pm, dam, finite-t)"),
        }))
    }

    pub fn cqed_params(&self, gamma: f64) -> damlab::Result<CqedParams> {
        let base = CqedParams::reference(gamma)?;
        match self.cqed {
            None => Ok(base),
            Some(c) => CqedParams {
                omega_r0: c.omega_r0,
                alpha: c.alpha,
                delta_omega: c.delta_omega,
                nbar: c.nbar,
                n_max: c.n_max,
                ..base
            }
            .validated(),
        }
    }
}

pub const DEFAULT_SEED: u64 = 2024;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"theta": 0.5, "thetta": 1}"#).is_err());
        let c: RunConfig = serde_json::from_str(r#"{"theta": 0.5, "x_grid": {"lo": -1, "hi": 2, "nodes": 11}}"#).unwrap();
        assert_eq!(c.theta, Some(0.5));
    }

    #[test]
    fn overrides_win_and_hash_tracks_them() {
        let base = RunConfig { sigma_list: Some(vec![0.1, 0.2]), ..Default::default() };
        let o = Overrides { sigma: Some(0.0), scheme: Some("dam".into()), ..Default::default() };
        let r = base.clone().resolve("estimate", &o, Some(3)).unwrap();
        assert_eq!(r.sigma_list, Some(vec![0.0]));
        assert_eq!(r.seed(), 3);
        let other = base.resolve("estimate", &o, Some(4)).unwrap();
        assert_ne!(r.hash(), other.hash());
        assert_eq!(r.hash(), r.clone().hash());
    }

    #[test]
    fn experiment_must_match() {
        let c = RunConfig { experiment: Some("fig2".into()), ..Default::default() };
        assert!(c.resolve("cqed", &Overrides::default(), None).is_err());
    }
}
