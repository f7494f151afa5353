//! Experiment configuration. Every field has a desk-scale default; unset
//! optional fields let each suite use its own grid.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{config_err, Result};

/// Pass/fail windows. These are recorded desk-scale baselines, not constants
/// from the theory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Windows {
    /// Standard errors allowed between an estimate and its target.
    pub sigma: f64,
    /// max/min of a ratio sweep.
    pub sweep: f64,
    /// Empirical quasi-triangle constant of `rho`.
    pub quasi_triangle: f64,
    /// Relative drift of a kernel constant when the sample doubles.
    pub doubling_drift: f64,
    /// Growth of the unfiltered smoothness constant that counts as divergence.
    pub divergence: f64,
    /// Relative gap between a kernel E-norm and its functional.
    pub enorm: f64,
    /// max/median of projected atom norms.
    pub atom_spread: f64,
    /// Relative band around the median synthesis constant.
    pub synthesis_band: f64,
    /// Relative error of the n=1 grid oracle for ball volumes.
    pub grid: f64,
}

impl Default for Windows {
    fn default() -> Self {
        Self {
            sigma: 3.0,
            sweep: 10.0,
            quasi_triangle: 5.0,
            doubling_drift: 0.2,
            divergence: 10.0,
            enorm: 0.02,
            atom_spread: 5.0,
            synthesis_band: 0.5,
            grid: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: Option<usize>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub p: Option<f64>,
    pub q: f64,
    pub k: Option<u32>,
    /// Kernel-power exponent; defaults to `n + 1`.
    pub b: Option<f64>,
    pub moduli: Vec<f64>,
    /// Tube radii for the weak-type profile.
    pub radii: Vec<f64>,
    /// Atom count.
    pub count: usize,
    /// Quadrature nodes per estimate.
    pub nodes: Option<usize>,
    /// Random samples (pairs, triples, points) per check.
    pub trials: Option<usize>,
    pub seed: u64,
    /// Tolerance override for exact identities.
    pub tol: Option<f64>,
    pub windows: Windows,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: None,
            alpha: None,
            gamma: None,
            p: None,
            q: 2.0,
            k: None,
            b: None,
            moduli: vec![0.0, 0.5, 0.9, 0.99],
            radii: vec![0.4, 0.2, 0.1, 0.05],
            count: 100,
            nodes: None,
            trials: None,
            seed: 20_240_601,
            tol: None,
            windows: Windows::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(n) = self.n {
            if !(1..=3).contains(&n) {
                return Err(config_err(format!("n must lie in 1..=3, got {n}")));
            }
        }
        if let Some(a) = self.alpha {
            if !a.is_finite() {
                return Err(config_err("alpha must be finite"));
            }
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(config_err(format!("gamma must be positive, got {g}")));
            }
        }
        if let Some(p) = self.p {
            if !(p > 0.0 && p.is_finite()) {
                return Err(config_err(format!("p must be positive, got {p}")));
            }
        }
        if !(self.q > 1.0 && self.q.is_finite()) {
            return Err(config_err(format!("q must lie in (1, inf), got {}", self.q)));
        }
        if let Some(b) = self.b {
            if !(b > 0.0 && b.is_finite()) {
                return Err(config_err(format!("b must be positive, got {b}")));
            }
        }
        if self.moduli.is_empty() || self.moduli.iter().any(|m| !(0.0..1.0).contains(m)) {
            return Err(config_err("moduli must be a nonempty list in [0, 1)"));
        }
        if self.radii.is_empty() || self.radii.iter().any(|r| !(*r > 0.0 && *r <= 2f64.sqrt())) {
            return Err(config_err("radii must be a nonempty list in (0, sqrt 2]"));
        }
        if self.count == 0 {
            return Err(config_err("count must be positive"));
        }
        if self.nodes == Some(0) || self.trials == Some(0) {
            return Err(config_err("nodes and trials must be positive"));
        }
        if let Some(t) = self.tol {
            if !(t >= 0.0) {
                return Err(config_err("tol must be nonnegative"));
            }
        }
        let w = &self.windows;
        if [w.sigma, w.sweep, w.quasi_triangle, w.divergence, w.atom_spread]
            .iter()
            .any(|v| !(*v > 0.0))
        {
            return Err(config_err("windows must be positive"));
        }
        Ok(())
    }

    pub fn dims(&self, default: &[usize]) -> Vec<usize> {
        self.n.map_or_else(|| default.to_vec(), |n| vec![n])
    }

    pub fn alphas(&self, default: &[f64]) -> Vec<f64> {
        self.alpha.map_or_else(|| default.to_vec(), |a| vec![a])
    }

    pub fn gammas(&self, default: &[f64]) -> Vec<f64> {
        self.gamma.map_or_else(|| default.to_vec(), |g| vec![g])
    }

    pub fn ps(&self, default: &[f64]) -> Vec<f64> {
        self.p.map_or_else(|| default.to_vec(), |p| vec![p])
    }

    pub fn ks(&self, default: &[u32]) -> Vec<u32> {
        self.k.map_or_else(|| default.to_vec(), |k| vec![k])
    }

    pub fn nodes_or(&self, default: usize) -> usize {
        self.nodes.unwrap_or(default)
    }

    pub fn trials_or(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }

    pub fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    /// Overlays the JSON object in `path` on `self`: keys in the file win.
    pub fn overlay_file(&self, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        self.overlay_json(&text)
    }

    pub fn overlay_json(&self, text: &str) -> Result<Self> {
        let mut base = serde_json::to_value(self)?;
        let file: Value = serde_json::from_str(text)?;
        if !file.is_object() {
            return Err(config_err("config file must hold a JSON object"));
        }
        merge(&mut base, file);
        let cfg: ExperimentConfig = serde_json::from_value(base)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_keys_override_flags() {
        let flags = ExperimentConfig {
            alpha: Some(1.0),
            seed: 5,
            ..Default::default()
        };
        let cfg = flags.overlay_json(r#"{"seed": 9, "windows": {"sweep": 4}}"#).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.alpha, Some(1.0));
        assert_eq!(cfg.windows.sweep, 4.0);
        assert_eq!(cfg.windows.sigma, 3.0);
    }

    #[test]
    fn rejects_bad_values() {
        let base = ExperimentConfig::default();
        assert!(base.overlay_json(r#"{"q": 1.0}"#).is_err());
        assert!(base.overlay_json(r#"{"moduli": [1.0]}"#).is_err());
        assert!(base.overlay_json(r#"{"n": 7}"#).is_err());
        assert!(base.overlay_json(r#"{"unknown": 1}"#).is_err());
        assert!(base.overlay_json("[1]").is_err());
    }
}
