use nalgebra::DMatrix;
use serde::Serialize;

use super::spec_file::NetworkSpec;
use crate::datamat::BlockSequence;
use crate::error::{dim_err, Error, Result};
use crate::linalg::{pinv, rank_of_values, singular_values, spectral_radius, PINV_TOL, RANK_TOL};

/// Local blocks of one subsystem.
///
/// `cbar` maps the stacked neighbor states (ascending neighbor index) to the
/// interconnection observations.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsystemSpec {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub cbar: DMatrix<f64>,
}

impl SubsystemSpec {
    pub fn n(&self) -> usize {
        self.a.nrows()
    }
    pub fn p(&self) -> usize {
        self.b.ncols()
    }
    pub fn q(&self) -> usize {
        self.c.nrows()
    }
    pub fn m(&self) -> usize {
        self.cbar.nrows()
    }
}

/// Per-channel noise standard deviations.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseLevels {
    pub process: f64,
    pub output: f64,
    pub interconnect: f64,
    /// Optional global process-noise covariance (overrides `process` when set).
    pub process_cov: Option<DMatrix<f64>>,
}

impl NoiseLevels {
    pub fn none() -> Self {
        Self::uniform(0.0)
    }

    pub fn uniform(std: f64) -> Self {
        Self {
            process: std,
            output: std,
            interconnect: std,
            process_cov: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NetworkSystem {
    nodes: Vec<SubsystemSpec>,
    /// `couplings[i]` lists `(j, A_ij)` for every neighbor `j` of `i`, sorted by `j`.
    couplings: Vec<Vec<(usize, DMatrix<f64>)>>,
    offsets: Vec<usize>,
    spectral_radius: f64,
    pub noise: NoiseLevels,
}

/// Validates and assembles a network from a parsed spec document.
pub fn build_network(spec: &NetworkSpec) -> Result<NetworkSystem> {
    spec.to_system()
}

impl NetworkSystem {
    /// `couplings` holds `(i, j, A_ij)` with zero-based node indices; `graph`, when
    /// given, is the edge set `{(i, j)}` the blocks must match exactly.
    pub fn new(
        nodes: Vec<SubsystemSpec>,
        couplings: Vec<(usize, usize, DMatrix<f64>)>,
        graph: Option<Vec<(usize, usize)>>,
        noise: NoiseLevels,
    ) -> Result<Self> {
        let count = nodes.len();
        if count == 0 {
            return Err(Error::InvalidArgument("network has no nodes".into()));
        }
        for (i, s) in nodes.iter().enumerate() {
            let n = s.n();
            if s.a.ncols() != n {
                return dim_err(format!("node {i}: A is {:?}, not square", s.a.shape()));
            }
            if s.b.nrows() != n {
                return dim_err(format!("node {i}: B has {} rows, expected {n}", s.b.nrows()));
            }
            if s.c.ncols() != n {
                return dim_err(format!("node {i}: C has {} columns, expected {n}", s.c.ncols()));
            }
            if s.d.shape() != (s.q(), s.p()) {
                return dim_err(format!(
                    "node {i}: D is {:?}, expected {:?}",
                    s.d.shape(),
                    (s.q(), s.p())
                ));
            }
        }

        let mut per_node: Vec<Vec<(usize, DMatrix<f64>)>> = vec![Vec::new(); count];
        for (i, j, block) in couplings {
            if i >= count || j >= count || i == j {
                return Err(Error::InvalidArgument(format!("invalid edge ({i}, {j})")));
            }
            if let Some(g) = &graph {
                if !g.contains(&(i, j)) {
                    return Err(Error::SparsityViolation { i, j });
                }
            }
            if block.shape() != (nodes[i].n(), nodes[j].n()) {
                return dim_err(format!(
                    "A[{i}][{j}] is {:?}, expected {:?}",
                    block.shape(),
                    (nodes[i].n(), nodes[j].n())
                ));
            }
            if block.iter().all(|&x| x == 0.0) {
                return Err(Error::SparsityViolation { i, j });
            }
            if per_node[i].iter().any(|(k, _)| *k == j) {
                return Err(Error::InvalidArgument(format!("duplicate edge ({i}, {j})")));
            }
            per_node[i].push((j, block));
        }
        if let Some(g) = &graph {
            for &(i, j) in g {
                if i >= count || !per_node[i].iter().any(|(k, _)| *k == j) {
                    return Err(Error::InvalidArgument(format!(
                        "graph edge ({i}, {j}) has no coupling block"
                    )));
                }
            }
        }
        for list in &mut per_node {
            list.sort_by_key(|(j, _)| *j);
        }

        for (i, s) in nodes.iter().enumerate() {
            let width: usize = per_node[i].iter().map(|(j, _)| nodes[*j].n()).sum();
            if s.cbar.ncols() != width {
                return dim_err(format!(
                    "node {i}: Cbar has {} columns, neighbor states total {width}",
                    s.cbar.ncols()
                ));
            }
            let rank = rank_of_values(&singular_values(&s.c), RANK_TOL);
            if rank < s.q() {
                return Err(Error::RankDeficient {
                    node: i,
                    rank,
                    rows: s.q(),
                });
            }
        }

        let mut offsets = Vec::with_capacity(count + 1);
        let mut acc = 0;
        for s in &nodes {
            offsets.push(acc);
            acc += s.n();
        }
        offsets.push(acc);

        if let Some(cov) = &noise.process_cov {
            if cov.shape() != (acc, acc) {
                return dim_err(format!("process covariance is {:?}, expected {acc}x{acc}", cov.shape()));
            }
        }

        let mut sys = Self {
            nodes,
            couplings: per_node,
            offsets,
            spectral_radius: 0.0,
            noise,
        };
        let radius = spectral_radius(&sys.global_a());
        if radius >= 1.0 {
            return Err(Error::Unstable { radius });
        }
        sys.spectral_radius = radius;
        Ok(sys)
    }

    pub fn nodes(&self) -> &[SubsystemSpec] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &SubsystemSpec {
        &self.nodes[i]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        self.couplings[i].iter().map(|(j, _)| *j).collect()
    }

    pub fn couplings(&self, i: usize) -> &[(usize, DMatrix<f64>)] {
        &self.couplings[i]
    }

    pub fn spectral_radius(&self) -> f64 {
        self.spectral_radius
    }

    pub fn state_dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn state_offset(&self, i: usize) -> usize {
        self.offsets[i]
    }

    pub fn global_a(&self) -> DMatrix<f64> {
        let total = self.state_dim();
        let mut a = DMatrix::zeros(total, total);
        for (i, s) in self.nodes.iter().enumerate() {
            let oi = self.offsets[i];
            a.view_mut((oi, oi), (s.n(), s.n())).copy_from(&s.a);
            for (j, block) in &self.couplings[i] {
                a.view_mut((oi, self.offsets[*j]), block.shape()).copy_from(block);
            }
        }
        a
    }

    pub fn global_b(&self) -> DMatrix<f64> {
        let inputs: usize = self.nodes.iter().map(|s| s.p()).sum();
        let mut b = DMatrix::zeros(self.state_dim(), inputs);
        let mut col = 0;
        for (i, s) in self.nodes.iter().enumerate() {
            b.view_mut((self.offsets[i], col), s.b.shape()).copy_from(&s.b);
            col += s.p();
        }
        b
    }

    /// `[A_ij]_{j in N_i}`, shape `n_i x sum_j n_j`.
    pub fn interconnect_block(&self, i: usize) -> DMatrix<f64> {
        let n = self.nodes[i].n();
        let width: usize = self.couplings[i].iter().map(|(j, _)| self.nodes[*j].n()).sum();
        let mut out = DMatrix::zeros(n, width);
        let mut col = 0;
        for (_, block) in &self.couplings[i] {
            out.columns_mut(col, block.ncols()).copy_from(block);
            col += block.ncols();
        }
        out
    }

    /// Copy of this network with node `i`'s interconnection sensor replaced.
    pub fn with_cbar(&self, i: usize, cbar: DMatrix<f64>) -> Result<Self> {
        let mut nodes = self.nodes.clone();
        nodes[i].cbar = cbar;
        let couplings = self
            .couplings
            .iter()
            .enumerate()
            .flat_map(|(k, list)| list.iter().map(move |(j, b)| (k, *j, b.clone())))
            .collect();
        Self::new(nodes, couplings, None, self.noise.clone())
    }

    pub fn with_noise(&self, noise: NoiseLevels) -> Self {
        let mut out = self.clone();
        out.noise = noise;
        out
    }
}

/// Linear map from interconnection observations to interconnection signals at one node.
#[derive(Clone, Debug, Serialize)]
pub struct CouplingMap {
    pub node: usize,
    /// `L_i`, shape `n_i x m_i`, with `L_i Cbar_i` the best fit of `[A_ij]_j`.
    #[serde(skip)]
    pub l: DMatrix<f64>,
    /// `(j, |A_ij - (L_i Cbar_i)_j|_F, |A_ij|_F)` per neighbor.
    pub residuals: Vec<(usize, f64, f64)>,
    pub hidden_dim: usize,
}

impl CouplingMap {
    pub fn is_full_measurement(&self) -> bool {
        self.hidden_dim == 0
    }
}

/// Computes `L_i = [A_ij]_j pinv(Cbar_i)` and the hidden dimension `k_i`, the summed
/// rank of each neighbor's residual block outside the row space of `Cbar_i`.
pub fn compute_coupling(sys: &NetworkSystem, i: usize) -> CouplingMap {
    let node = sys.node(i);
    let abar = sys.interconnect_block(i);
    let l = if node.m() == 0 {
        DMatrix::zeros(node.n(), 0)
    } else {
        &abar * pinv(&node.cbar, PINV_TOL)
    };
    let fitted = if node.m() == 0 {
        DMatrix::zeros(abar.nrows(), abar.ncols())
    } else {
        &l * &node.cbar
    };
    let mut residuals = Vec::new();
    let mut hidden_dim = 0;
    let mut col = 0;
    for (j, block) in sys.couplings(i) {
        let w = block.ncols();
        let resid = block - fitted.columns(col, w);
        let block_top = singular_values(block).first().copied().unwrap_or(0.0);
        let sv = singular_values(&resid);
        hidden_dim += sv.iter().filter(|&&s| s > RANK_TOL * block_top).count();
        residuals.push((*j, resid.norm(), block.norm()));
        col += w;
    }
    CouplingMap {
        node: i,
        l,
        residuals,
        hidden_dim,
    }
}

/// Impulse response `s_0 = [D, 0]`, `s_t = C A^{t-1} [B, L]` of node `i`, with `L` the
/// least-squares coupling map. Meaningful as ground truth only when `k_i = 0`; in the
/// hidden case it is the local component the decomposition aims to recover.
pub fn local_impulse_response(sys: &NetworkSystem, i: usize, taps: usize) -> BlockSequence {
    let node = sys.node(i);
    let coupling = compute_coupling(sys, i);
    let (q, p, m, n) = (node.q(), node.p(), node.m(), node.n());
    let mut b_ext = DMatrix::zeros(n, p + m);
    b_ext.columns_mut(0, p).copy_from(&node.b);
    b_ext.columns_mut(p, m).copy_from(&coupling.l);

    let mut s0 = DMatrix::zeros(q, p + m);
    s0.columns_mut(0, p).copy_from(&node.d);
    let mut blocks = Vec::with_capacity(taps + 1);
    blocks.push(s0);
    let mut ca = node.c.clone();
    for _ in 1..=taps {
        blocks.push(&ca * &b_ext);
        ca = &ca * &node.a;
    }
    BlockSequence::new(blocks).expect("uniform block shapes")
}

/// Like [`local_impulse_response`], but refuses nodes with hidden interconnection signals.
pub fn true_impulse_response(sys: &NetworkSystem, i: usize, taps: usize) -> Result<BlockSequence> {
    let coupling = compute_coupling(sys, i);
    if coupling.hidden_dim > 0 {
        return Err(Error::HiddenSignals {
            node: i,
            hidden_dim: coupling.hidden_dim,
        });
    }
    Ok(local_impulse_response(sys, i, taps))
}
