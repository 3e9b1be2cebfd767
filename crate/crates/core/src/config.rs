//! Experiment configuration, read from TOML.
//!
//! ```toml
//! name = "bench_alpha13"
//! arms = 10
//! horizon = 5000
//! replications = 20
//! alpha = 1.3
//! sigma = 2500.0
//! mean_range = [0.0, 2000.0]
//! master_seed = 20190601
//!
//! [prior]
//! mode = "uniform_range"
//!
//! [[policy]]
//! kind = "alpha_ts"
//! q = 50
//! ```

use crate::error::{Error, Result};
use crate::policy::{default_eps_trunc, Agent, PolicyConfig, PolicyKind, DEFAULT_Q};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// How prior means are chosen for each arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PriorMode {
    /// Drawn uniformly from the mean range, independently of the true means.
    #[default]
    UniformRange,
    /// Drawn uniformly from `[mu_k - delta, mu_k + delta]`.
    Sharpened { delta: f64 },
}

impl PriorMode {
    pub fn label(&self) -> &'static str {
        match self {
            PriorMode::UniformRange => "uniform_range",
            PriorMode::Sharpened { .. } => "sharpened",
        }
    }

    pub fn delta(&self) -> Option<f64> {
        match *self {
            PriorMode::UniformRange => None,
            PriorMode::Sharpened { delta } => Some(delta),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    /// Column value in output files; defaults to the kind name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_trunc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
}

impl PolicySpec {
    pub fn new(kind: PolicyKind) -> Self {
        Self {
            kind,
            label: None,
            q: None,
            eps_trunc: None,
            window: None,
        }
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.kind.label().to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaGrid {
    pub alphas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorGrid {
    pub deltas: Vec<f64>,
    /// Also run the uniform-range prior as a reference arm of the table.
    #[serde(default)]
    pub include_uniform: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub arms: usize,
    pub horizon: usize,
    pub replications: usize,
    pub alpha: f64,
    pub sigma: f64,
    /// Bound `M` on the absolute arm means; defaults to the largest endpoint of the range.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_bound: Option<f64>,
    pub mean_range: [f64; 2],
    #[serde(default)]
    pub prior: PriorMode,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, rename = "policy")]
    pub policies: Vec<PolicySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ablate_alpha: Option<AlphaGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ablate_prior: Option<PriorGrid>,
    /// Factor applied to variance bands when plotting; carried through untouched.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance_scale: Option<f64>,
}

impl ExperimentConfig {
    /// Parses and validates a TOML document. Errors carry the line and field.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn mean_bound(&self) -> f64 {
        self.mean_bound
            .unwrap_or_else(|| self.mean_range[0].abs().max(self.mean_range[1].abs()))
    }

    pub fn policy_config(&self, spec: &PolicySpec, prior_means: Vec<f64>) -> PolicyConfig {
        PolicyConfig {
            kind: spec.kind,
            q: spec.q.unwrap_or(DEFAULT_Q),
            eps_trunc: spec.eps_trunc.unwrap_or_else(|| default_eps_trunc(self.alpha)),
            mean_bound: self.mean_bound(),
            prior_means,
            sigma: self.sigma,
            alpha: self.alpha,
            horizon: self.horizon,
            window: spec.window.unwrap_or(1),
        }
    }

    /// Copy with a different tail index, as used by the alpha ablation.
    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self {
            alpha,
            ..self.clone()
        }
    }

    pub fn with_prior(&self, prior: PriorMode) -> Self {
        Self {
            prior,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, reason: String| Error::Config(format!("field `{field}`: {reason}"));
        if self.arms == 0 {
            return Err(bad("arms", "need at least one arm".into()));
        }
        if self.horizon == 0 {
            return Err(bad("horizon", "need at least one round".into()));
        }
        if self.replications == 0 {
            return Err(bad("replications", "need at least one replication".into()));
        }
        if !(self.alpha > 1.0 && self.alpha <= 2.0) {
            return Err(bad("alpha", format!("{} is outside (1, 2]", self.alpha)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(bad("sigma", format!("{} is not a positive scale", self.sigma)));
        }
        let [lo, hi] = self.mean_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(bad("mean_range", format!("[{lo}, {hi}] is not an ordered finite range")));
        }
        let m = self.mean_bound();
        if !(m > 0.0 && m.is_finite()) || m < lo.abs().max(hi.abs()) {
            return Err(bad("mean_bound", format!("{m} does not bound the mean range")));
        }
        if let PriorMode::Sharpened { delta } = self.prior {
            if !(delta >= 0.0 && delta.is_finite()) {
                return Err(bad("prior.delta", format!("{delta} must be finite and non-negative")));
            }
        }
        if self.policies.is_empty() {
            return Err(bad("policy", "at least one [[policy]] section is required".into()));
        }
        let mut labels = BTreeSet::new();
        for (i, spec) in self.policies.iter().enumerate() {
            if !labels.insert(spec.label()) {
                return Err(bad(
                    &format!("policy[{i}].label"),
                    format!("duplicate label `{}`", spec.label()),
                ));
            }
            self.check_policy(spec, self.alpha)
                .map_err(|e| bad(&format!("policy[{i}]"), e.to_string()))?;
        }
        if let Some(grid) = &self.ablate_alpha {
            if grid.alphas.is_empty() {
                return Err(bad("ablate_alpha.alphas", "grid is empty".into()));
            }
            for &a in &grid.alphas {
                if !(a > 1.0 && a <= 2.0) {
                    return Err(bad("ablate_alpha.alphas", format!("{a} is outside (1, 2]")));
                }
                for spec in &self.policies {
                    self.check_policy(spec, a)
                        .map_err(|e| bad("ablate_alpha.alphas", format!("alpha = {a}: {e}")))?;
                }
            }
        }
        if let Some(grid) = &self.ablate_prior {
            if grid.deltas.is_empty() && !grid.include_uniform {
                return Err(bad("ablate_prior.deltas", "grid is empty".into()));
            }
            if let Some(d) = grid.deltas.iter().find(|d| !(**d >= 0.0 && d.is_finite())) {
                return Err(bad("ablate_prior.deltas", format!("{d} must be finite and non-negative")));
            }
        }
        if let Some(s) = self.variance_scale {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(bad("variance_scale", format!("{s} must be non-negative")));
            }
        }
        Ok(())
    }

    fn check_policy(&self, spec: &PolicySpec, alpha: f64) -> Result<()> {
        let cfg = self
            .with_alpha(alpha)
            .policy_config(spec, vec![0.0; self.arms]);
        Agent::new(&cfg).map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
name = "t"
arms = 3
horizon = 10
replications = 2
alpha = 1.5
sigma = 1.0
mean_range = [0.0, 5.0]

[[policy]]
kind = "alpha_ts"
q = 3

[[policy]]
kind = "robust_ucb"
"#;

    #[test]
    fn parses_and_defaults() {
        let cfg = ExperimentConfig::from_toml_str(BASE).unwrap();
        assert_eq!(cfg.policies.len(), 2);
        assert_eq!(cfg.prior, PriorMode::UniformRange);
        assert_eq!(cfg.mean_bound(), 5.0);
        let pc = cfg.policy_config(&cfg.policies[1], vec![0.0; 3]);
        assert!((pc.eps_trunc - 0.4).abs() < 1e-12);
        assert_eq!(pc.q, DEFAULT_Q);
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = ExperimentConfig::from_toml_str(BASE).unwrap();
        cfg.prior = PriorMode::Sharpened { delta: 50.0 };
        cfg.ablate_prior = Some(PriorGrid {
            deltas: vec![50.0, 1000.0],
            include_uniform: true,
        });
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn errors_name_the_field() {
        let err = ExperimentConfig::from_toml_str(&BASE.replace("alpha = 1.5", "alpha = 2.5")).unwrap_err();
        assert!(err.to_string().contains("alpha"), "{err}");
        let err = ExperimentConfig::from_toml_str(&BASE.replace("arms = 3", "arms = \"x\"")).unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
        let err = ExperimentConfig::from_toml_str(&BASE.replace("[0.0, 5.0]", "[5.0, 0.0]")).unwrap_err();
        assert!(err.to_string().contains("mean_range"), "{err}");
        let err = ExperimentConfig::from_toml_str(&format!("{BASE}\n[[policy]]\nkind = \"alpha_ts\"\n")).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
        let err = ExperimentConfig::from_toml_str(&BASE.replace("q = 3", "q = 3\nbogus = 1")).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let err = ExperimentConfig::from_toml_str(&format!("{BASE}eps_trunc = 0.9\n")).unwrap_err();
        assert!(err.to_string().contains("policy[1]"), "{err}");
    }

    #[test]
    fn degenerate_range_is_allowed() {
        let cfg = ExperimentConfig::from_toml_str(&BASE.replace("[0.0, 5.0]", "[3.0, 3.0]")).unwrap();
        assert_eq!(cfg.mean_bound(), 3.0);
    }
}
