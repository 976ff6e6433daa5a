//! JSON system-spec documents.
//!
//! Node indices in documents are one-based; matrices are row-major nested arrays.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::network::{NetworkSystem, NoiseLevels, SubsystemSpec};
use crate::error::{dim_err, Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NodeSpec {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub m: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    #[serde(rename = "D")]
    pub d: Vec<Vec<f64>>,
    #[serde(rename = "Cbar")]
    pub cbar: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub i: usize,
    pub j: usize,
    #[serde(rename = "Aij")]
    pub aij: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(default)]
    pub w: f64,
    #[serde(default)]
    pub nu: f64,
    #[serde(default)]
    pub nubar: f64,
    /// Full process-noise covariance over the stacked global state.
    #[serde(rename = "W", default, skip_serializing_if = "Option::is_none")]
    pub w_cov: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub nodes: Vec<NodeSpec>,
    #[serde(default)]
    pub edges: Vec<EdgeSpec>,
    /// Optional explicit interaction graph as `[i, j]` pairs; defaults to the edge list.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<Vec<[usize; 2]>>,
    #[serde(default)]
    pub noise: NoiseSpec,
}

pub fn matrix_from_rows(rows: &[Vec<f64>], shape: (usize, usize), name: &str) -> Result<DMatrix<f64>> {
    let (r, c) = shape;
    if r == 0 || c == 0 {
        if rows.iter().any(|row| !row.is_empty()) && r == 0 {
            return dim_err(format!("{name}: expected 0 rows, got {}", rows.len()));
        }
        if r != 0 && rows.len() != r && !rows.is_empty() {
            return dim_err(format!("{name}: expected {r} rows, got {}", rows.len()));
        }
        return Ok(DMatrix::zeros(r, c));
    }
    if rows.len() != r {
        return dim_err(format!("{name}: expected {r} rows, got {}", rows.len()));
    }
    if let Some(bad) = rows.iter().find(|row| row.len() != c) {
        return dim_err(format!("{name}: expected {c} columns, got {}", bad.len()));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

/// Row-major nested arrays, the layout used by every JSON document.
pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

impl NetworkSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_system(&self) -> Result<NetworkSystem> {
        let count = self.nodes.len();
        let one_based = |i: usize, what: &str| -> Result<usize> {
            if i == 0 || i > count {
                Err(Error::InvalidArgument(format!("{what} index {i} outside 1..={count}")))
            } else {
                Ok(i - 1)
            }
        };

        let mut couplings = Vec::new();
        for e in &self.edges {
            let i = one_based(e.i, "edge")?;
            let j = one_based(e.j, "edge")?;
            let shape = (self.nodes[i].n, self.nodes[j].n);
            couplings.push((i, j, matrix_from_rows(&e.aij, shape, &format!("A{}{}", e.i, e.j))?));
        }
        let graph = match &self.graph {
            Some(g) => Some(
                g.iter()
                    .map(|[i, j]| Ok((one_based(*i, "graph")?, one_based(*j, "graph")?)))
                    .collect::<Result<Vec<_>>>()?,
            ),
            None => None,
        };

        let mut nodes = Vec::with_capacity(count);
        for (k, ns) in self.nodes.iter().enumerate() {
            let label = k + 1;
            let width: usize = self
                .edges
                .iter()
                .filter(|e| e.i == label)
                .map(|e| e.j.checked_sub(1).and_then(|j| self.nodes.get(j)).map_or(0, |nj| nj.n))
                .sum();
            nodes.push(SubsystemSpec {
                a: matrix_from_rows(&ns.a, (ns.n, ns.n), &format!("node {label} A"))?,
                b: matrix_from_rows(&ns.b, (ns.n, ns.p), &format!("node {label} B"))?,
                c: matrix_from_rows(&ns.c, (ns.q, ns.n), &format!("node {label} C"))?,
                d: matrix_from_rows(&ns.d, (ns.q, ns.p), &format!("node {label} D"))?,
                cbar: matrix_from_rows(&ns.cbar, (ns.m, width), &format!("node {label} Cbar"))?,
            });
        }

        let total: usize = self.nodes.iter().map(|n| n.n).sum();
        let process_cov = match &self.noise.w_cov {
            Some(rows) => Some(matrix_from_rows(rows, (total, total), "noise W")?),
            None => None,
        };
        let noise = NoiseLevels {
            process: self.noise.w,
            output: self.noise.nu,
            interconnect: self.noise.nubar,
            process_cov,
        };
        NetworkSystem::new(nodes, couplings, graph, noise)
    }

    pub fn from_system(sys: &NetworkSystem) -> Self {
        let nodes = sys
            .nodes()
            .iter()
            .map(|s| NodeSpec {
                n: s.n(),
                p: s.p(),
                q: s.q(),
                m: s.m(),
                a: matrix_to_rows(&s.a),
                b: matrix_to_rows(&s.b),
                c: matrix_to_rows(&s.c),
                d: matrix_to_rows(&s.d),
                cbar: matrix_to_rows(&s.cbar),
            })
            .collect();
        let edges = (0..sys.len())
            .flat_map(|i| {
                sys.couplings(i).iter().map(move |(j, block)| EdgeSpec {
                    i: i + 1,
                    j: j + 1,
                    aij: matrix_to_rows(block),
                })
            })
            .collect();
        Self {
            nodes,
            edges,
            graph: None,
            noise: NoiseSpec {
                w: sys.noise.process,
                nu: sys.noise.output,
                nubar: sys.noise.interconnect,
                w_cov: sys.noise.process_cov.as_ref().map(matrix_to_rows),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCALAR: &str = r#"{
        "nodes": [{"n": 1, "p": 1, "q": 1, "m": 0,
                   "A": [[0.0]], "B": [[1.0]], "C": [[1.0]], "D": [[0.0]], "Cbar": []}],
        "edges": [],
        "noise": {"w": 0.0, "nu": 0.0, "nubar": 0.0}
    }"#;

    #[test]
    fn scalar_system_parses() {
        let sys = NetworkSpec::from_json(SCALAR).unwrap().to_system().unwrap();
        assert_eq!(sys.len(), 1);
        assert_eq!(sys.spectral_radius(), 0.0);
    }

    #[test]
    fn bad_shape_is_reported() {
        let text = SCALAR.replace(r#""B": [[1.0]]"#, r#""B": [[1.0, 2.0]]"#);
        let err = NetworkSpec::from_json(&text).unwrap().to_system().unwrap_err();
        assert!(matches!(err, Error::Dimension(_)), "{err}");
    }

    #[test]
    fn unstable_rejected() {
        let text = SCALAR.replace(r#""A": [[0.0]]"#, r#""A": [[1.5]]"#);
        let err = NetworkSpec::from_json(&text).unwrap().to_system().unwrap_err();
        assert!(matches!(err, Error::Unstable { .. }));
    }

    #[test]
    fn rank_deficient_c_rejected() {
        let text = SCALAR.replace(r#""q": 1"#, r#""q": 2"#)
            .replace(r#""C": [[1.0]]"#, r#""C": [[1.0], [2.0]]"#)
            .replace(r#""D": [[0.0]]"#, r#""D": [[0.0], [0.0]]"#);
        let err = NetworkSpec::from_json(&text).unwrap().to_system().unwrap_err();
        assert!(matches!(err, Error::RankDeficient { .. }));
    }

    #[test]
    fn round_trip_through_json() {
        let sys = crate::netsim::paper_chain();
        let text = NetworkSpec::from_system(&sys).to_json().unwrap();
        let back = NetworkSpec::from_json(&text).unwrap().to_system().unwrap();
        assert_eq!(back.global_a(), sys.global_a());
        assert_eq!(back.node(0).cbar, sys.node(0).cbar);
    }
}
