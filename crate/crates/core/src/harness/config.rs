use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netsim::{paper_chain, paper_chain_hidden, NetworkSpec, NetworkSystem};
use crate::solver::SolverConfig;

/// Built-in system name accepted in place of a spec path.
pub const PAPER_CHAIN: &str = "paper-chain";

/// Interconnection measurement setting at the identified node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Full,
    Hidden,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// `S = Y V^+`.
    Exact,
    /// Nuclear-norm program with a residual ball.
    Robust,
    /// Hidden component acting on the local regressor.
    HiddenLocal,
    /// Hidden component acting on local plus remote inputs.
    HiddenRemote,
}

/// Noise standard deviations overriding those of the system.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseOverride {
    pub w: Option<f64>,
    pub nu: Option<f64>,
    pub nubar: Option<f64>,
}

/// One experiment, read from a JSON document. Node labels are one-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `"paper-chain"` or a path to a network spec (relative to the config file).
    pub system: String,
    pub node: usize,
    pub mode: Mode,
    /// Defaults to `robust` in full mode and `hidden-local` in hidden mode.
    pub method: Option<Method>,
    #[serde(rename = "N")]
    pub horizon: usize,
    #[serde(rename = "M")]
    pub window: usize,
    #[serde(rename = "r")]
    pub taps: usize,
    /// Defaults to 0.5 in full mode and 4.5 in hidden mode.
    pub delta: Option<f64>,
    pub delta_h: f64,
    pub delta_grid: Vec<f64>,
    pub delta_h_grid: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Nodes driven by white inputs; all of them when absent.
    pub active_nodes: Option<Vec<usize>>,
    pub input_std: f64,
    pub noise: NoiseOverride,
    pub solver: SolverConfig,
    pub gap_ratio: f64,
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            system: PAPER_CHAIN.into(),
            node: 1,
            mode: Mode::Full,
            method: None,
            horizon: 600,
            window: 300,
            taps: 21,
            delta: None,
            delta_h: 0.05,
            delta_grid: Vec::new(),
            delta_h_grid: Vec::new(),
            seeds: vec![0, 1, 2, 3, 4],
            active_nodes: None,
            input_std: 2.5,
            noise: NoiseOverride::default(),
            solver: SolverConfig::default(),
            gap_ratio: crate::realization::DEFAULT_GAP_RATIO,
            out: None,
            base_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.horizon % 2 != 0 {
            return bad(format!("N = {} must be even", self.horizon));
        }
        if self.window >= self.horizon {
            return bad(format!("M = {} must be smaller than N = {}", self.window, self.horizon));
        }
        if self.taps == 0 {
            return bad("r must be at least 1".into());
        }
        if self.node == 0 {
            return bad("node labels start at 1".into());
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if !(self.input_std >= 0.0 && self.input_std.is_finite()) {
            return bad(format!("input_std must be finite and nonnegative, got {}", self.input_std));
        }
        if !(self.gap_ratio > 1.0) {
            return bad(format!("gap_ratio must exceed 1, got {}", self.gap_ratio));
        }
        for &d in self.delta.iter().chain(&self.delta_grid) {
            if !(d >= 0.0) {
                return bad(format!("delta must be nonnegative, got {d}"));
            }
        }
        for &d in std::iter::once(&self.delta_h).chain(&self.delta_h_grid) {
            if !(d >= 0.0) {
                return bad(format!("delta_h must be nonnegative, got {d}"));
            }
        }
        if let Some(active) = &self.active_nodes {
            if active.contains(&0) {
                return bad("active node labels start at 1".into());
            }
        }
        let method = self.method();
        match (self.mode, method) {
            (Mode::Full, Method::HiddenLocal | Method::HiddenRemote) | (Mode::Hidden, Method::Exact | Method::Robust) => {
                return bad(format!("method {method:?} does not apply in {:?} mode", self.mode));
            }
            _ => {}
        }
        self.solver.validate()
    }

    /// Sweep grids must be nonempty; in full mode only `delta_grid` is used.
    pub fn validate_sweep(&self) -> Result<()> {
        if self.delta_grid.is_empty() {
            return Err(Error::InvalidArgument("sweep needs a nonempty delta_grid".into()));
        }
        if self.mode == Mode::Hidden && self.delta_h_grid.is_empty() {
            return Err(Error::InvalidArgument("hidden-mode sweep needs a nonempty delta_h_grid".into()));
        }
        Ok(())
    }

    pub fn method(&self) -> Method {
        self.method.unwrap_or(match self.mode {
            Mode::Full => Method::Robust,
            Mode::Hidden => Method::HiddenLocal,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta.unwrap_or(match self.mode {
            Mode::Full => 0.5,
            Mode::Hidden => 4.5,
        })
    }

    /// Zero-based index of the identified node.
    pub fn node_index(&self) -> usize {
        self.node - 1
    }

    pub fn system_path(&self) -> Option<PathBuf> {
        if self.system == PAPER_CHAIN {
            return None;
        }
        let p = PathBuf::from(&self.system);
        Some(match &self.base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p,
        })
    }

    /// Builds the network and applies noise overrides.
    pub fn build_system(&self) -> Result<NetworkSystem> {
        let sys = match self.system_path() {
            None => match self.mode {
                Mode::Full => paper_chain(),
                Mode::Hidden => paper_chain_hidden(),
            },
            Some(path) => {
                let spec = NetworkSpec::load(&path)
                    .map_err(|e| Error::InvalidArgument(format!("bad system spec {}: {e}", path.display())))?;
                spec.to_system()?
            }
        };
        if self.node > sys.len() {
            return Err(Error::InvalidArgument(format!("node {} outside 1..={}", self.node, sys.len())));
        }
        let mut noise = sys.noise.clone();
        if let Some(w) = self.noise.w {
            noise.process = w;
            noise.process_cov = None;
        }
        if let Some(nu) = self.noise.nu {
            noise.output = nu;
        }
        if let Some(nubar) = self.noise.nubar {
            noise.interconnect = nubar;
        }
        Ok(sys.with_noise(noise))
    }

    /// Zero-based indices of the driven nodes.
    pub fn active(&self, nodes: usize) -> Result<Vec<usize>> {
        match &self.active_nodes {
            None => Ok((0..nodes).collect()),
            Some(list) => list
                .iter()
                .map(|&k| {
                    if k == 0 || k > nodes {
                        Err(Error::InvalidArgument(format!("active node {k} outside 1..={nodes}")))
                    } else {
                        Ok(k - 1)
                    }
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_mode() {
        let cfg = ExperimentConfig::from_json(r#"{"mode": "hidden"}"#).unwrap();
        assert_eq!(cfg.method(), Method::HiddenLocal);
        assert_eq!(cfg.delta(), 4.5);
        let cfg = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(cfg.method(), Method::Robust);
        assert_eq!(cfg.delta(), 0.5);
        assert_eq!((cfg.horizon, cfg.window, cfg.taps), (600, 300, 21));
    }

    #[test]
    fn rejects_bad_settings() {
        for text in [
            r#"{"N": 601}"#,
            r#"{"N": 100, "M": 100}"#,
            r#"{"r": 0}"#,
            r#"{"node": 0}"#,
            r#"{"seeds": []}"#,
            r#"{"mode": "full", "method": "hidden-local"}"#,
            r#"{"unknown": 1}"#,
            r#"{"solver": {"rho": -1}}"#,
        ] {
            assert!(ExperimentConfig::from_json(text).is_err(), "{text}");
        }
    }

    #[test]
    fn sweep_grids_required() {
        let cfg = ExperimentConfig::from_json(r#"{"mode": "hidden", "delta_grid": [4.5]}"#).unwrap();
        assert!(cfg.validate_sweep().is_err());
        let cfg = ExperimentConfig::from_json(r#"{"delta_grid": [0.5]}"#).unwrap();
        assert!(cfg.validate_sweep().is_ok());
    }

    #[test]
    fn noise_override_applies() {
        let cfg = ExperimentConfig::from_json(r#"{"noise": {"w": 0, "nu": 0.2}}"#).unwrap();
        let sys = cfg.build_system().unwrap();
        assert_eq!(sys.noise.process, 0.0);
        assert_eq!(sys.noise.output, 0.2);
        assert_eq!(sys.noise.interconnect, 0.01);
    }

    #[test]
    fn active_labels() {
        let cfg = ExperimentConfig::from_json(r#"{"active_nodes": [1, 3]}"#).unwrap();
        assert_eq!(cfg.active(3).unwrap(), vec![0, 2]);
        assert!(cfg.active(2).is_err());
    }
}
