//! Identification report and its schema.

use serde::Serialize;
use serde_json::Value;

use super::config::{ExperimentConfig, Method, Mode};
use super::pipeline::{Comparison, Dataset, Outcome};
use crate::datamat::PeDiagnostics;
use crate::error::{Error, Result};
use crate::netsim::matrix_to_rows;
use crate::realization::ModelFile;
use crate::solver::SolveStatus;

#[derive(Clone, Debug, Serialize)]
pub struct FrequencySummary {
    pub max_ratio: f64,
    pub max_sigma2: f64,
    pub ranks: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderSummary {
    pub order: usize,
    pub confident: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentifyReport {
    pub seed: u64,
    pub node: usize,
    pub mode: Mode,
    pub method: Method,
    #[serde(rename = "N")]
    pub horizon: usize,
    #[serde(rename = "M")]
    pub window: usize,
    pub r: usize,
    pub delta: Option<f64>,
    pub delta_h: Option<f64>,
    pub status: SolveStatus,
    pub converged: bool,
    pub feasible: bool,
    pub iterations: usize,
    pub residual: f64,
    pub pe: PeDiagnostics,
    pub pe_noiseless: PeDiagnostics,
    pub hankel_singular_values: Vec<f64>,
    pub order: OrderSummary,
    pub frequency: Option<FrequencySummary>,
    pub errors: Comparison,
    pub model: Option<ModelFile>,
    /// `[re, im]` pairs.
    pub realized_eigenvalues: Vec<[f64; 2]>,
    pub estimate: Vec<Vec<Vec<f64>>>,
    pub trace_path: Option<String>,
}

impl IdentifyReport {
    pub fn new(cfg: &ExperimentConfig, data: &Dataset, out: &Outcome, trace_path: Option<String>) -> Self {
        let solve = out.solve.as_ref();
        let frequency = match (out.max_frequency_ratio(), out.max_frequency_sigma2()) {
            (Some(max_ratio), Some(max_sigma2)) => Some(FrequencySummary {
                max_ratio,
                max_sigma2,
                ranks: out.frequency_ranks(),
            }),
            _ => None,
        };
        Self {
            seed: data.seed,
            node: cfg.node,
            mode: cfg.mode,
            method: out.method,
            horizon: cfg.horizon,
            window: cfg.window,
            r: cfg.taps,
            delta: out.delta,
            delta_h: out.delta_h,
            status: out.status(),
            converged: out.converged(),
            feasible: solve.is_none_or(|r| r.feasible),
            iterations: solve.map_or(0, |r| r.iterations),
            residual: out.residual,
            pe: data.pe.clone(),
            pe_noiseless: data.pe_noiseless.clone(),
            hankel_singular_values: out.hankel_singular_values.clone(),
            order: OrderSummary {
                order: out.order.order,
                confident: out.order.confident,
            },
            frequency,
            errors: out.comparison.clone(),
            model: out.model.as_ref().map(|m| m.to_file()),
            realized_eigenvalues: out.realized_eigenvalues().iter().map(|z| [z.re, z.im]).collect(),
            estimate: out.s.blocks().iter().map(matrix_to_rows).collect(),
            trace_path,
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Kind {
    Number,
    Integer,
    Bool,
    Text,
    Array,
    Object,
}

impl Kind {
    fn matches(self, v: &Value) -> bool {
        match self {
            Kind::Number => v.is_number(),
            Kind::Integer => v.is_u64(),
            Kind::Bool => v.is_boolean(),
            Kind::Text => v.is_string(),
            Kind::Array => v.is_array(),
            Kind::Object => v.is_object(),
        }
    }
}

/// `(path, kind, nullable)` for every field an identification report must carry.
const REPORT_FIELDS: &[(&str, Kind, bool)] = &[
    ("seed", Kind::Integer, false),
    ("node", Kind::Integer, false),
    ("mode", Kind::Text, false),
    ("method", Kind::Text, false),
    ("N", Kind::Integer, false),
    ("M", Kind::Integer, false),
    ("r", Kind::Integer, false),
    ("delta", Kind::Number, true),
    ("delta_h", Kind::Number, true),
    ("status", Kind::Object, false),
    ("status.status", Kind::Text, false),
    ("converged", Kind::Bool, false),
    ("feasible", Kind::Bool, false),
    ("iterations", Kind::Integer, false),
    ("residual", Kind::Number, false),
    ("pe.passed", Kind::Bool, false),
    ("pe_noiseless.passed", Kind::Bool, false),
    ("hankel_singular_values", Kind::Array, false),
    ("order.order", Kind::Integer, false),
    ("order.confident", Kind::Bool, false),
    ("frequency", Kind::Object, true),
    ("errors.error", Kind::Number, false),
    ("errors.error_local_inputs", Kind::Number, false),
    ("errors.relative_error", Kind::Number, false),
    ("errors.truth_norm", Kind::Number, false),
    ("model", Kind::Object, true),
    ("realized_eigenvalues", Kind::Array, false),
    ("estimate", Kind::Array, false),
    ("trace_path", Kind::Text, true),
];

/// Checks a parsed report against the documented schema.
pub fn validate_report(report: &Value) -> Result<()> {
    for &(path, kind, nullable) in REPORT_FIELDS {
        let mut node = Some(report);
        for key in path.split('.') {
            node = node.and_then(|n| n.get(key));
        }
        let ok = match node {
            None => false,
            Some(Value::Null) => nullable,
            Some(v) => kind.matches(v),
        };
        if !ok {
            return Err(Error::InvalidArgument(format!("report field `{path}` missing or not {kind:?}")));
        }
    }
    if let Some(freq) = report.get("frequency").filter(|f| !f.is_null()) {
        for key in ["max_ratio", "max_sigma2"] {
            if !freq.get(key).is_some_and(Value::is_number) {
                return Err(Error::InvalidArgument(format!("report field `frequency.{key}` missing")));
            }
        }
        if !freq.get("ranks").is_some_and(Value::is_array) {
            return Err(Error::InvalidArgument("report field `frequency.ranks` missing".into()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_incomplete_reports() {
        assert!(validate_report(&serde_json::json!({})).is_err());
        assert!(validate_report(&serde_json::json!({"seed": "x"})).is_err());
    }
}
