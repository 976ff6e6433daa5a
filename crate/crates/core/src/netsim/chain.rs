//! The three-subsystem chain `1 - 2 - 3` used for the reproduction experiments.
//!
//! Node 1 carries complete local blocks. Nodes 2 and 3 are given only through their
//! dynamics and input matrices, so they observe their full state (`C = I`, `D = 0`)
//! and measure every neighbor state; these choices do not affect node 1's data.

use nalgebra::DMatrix;

use super::network::{NetworkSystem, NoiseLevels, SubsystemSpec};

#[rustfmt::skip]
const GLOBAL_A: [f64; 81] = [
     0.2839,  0.2125, -0.3097,  0.1843,  0.0775, -0.1358,  0.0,     0.0,     0.0,
     0.1528, -0.3525,  0.2400,  0.0976, -0.1246, -0.0821,  0.0,     0.0,     0.0,
     0.0183, -0.1709, -0.0109, -0.3269, -0.0005,  0.1012,  0.0,     0.0,     0.0,
     0.0857,  0.3037, -0.1947,  0.0914,  0.3916,  0.3797,  0.0774, -0.0510,  0.2253,
    -0.1698, -0.1557, -0.1865,  0.2742,  0.2066, -0.5958,  0.3695,  0.1370, -0.4422,
     0.4134,  0.1407,  0.2100,  0.1776,  0.0653, -0.2677,  0.1827, -0.2593,  0.0085,
     0.0,     0.0,     0.0,    -0.5795, -0.2251,  0.2736, -0.1237,  0.0857, -0.4406,
     0.0,     0.0,     0.0,    -0.0667, -0.0172,  0.1418,  0.2158,  0.2762,  0.2506,
     0.0,     0.0,     0.0,    -0.0787,  0.0360, -0.0661, -0.0605,  0.0366,  0.0962,
];

#[rustfmt::skip]
const B1: [f64; 6] = [
    0.6394, -0.3201,
    0.8742, -0.1374,
    1.7524,  0.6158,
];

#[rustfmt::skip]
const B2: [f64; 6] = [
     0.9779,  0.0399,
    -1.1153, -2.4828,
    -0.5500,  1.1587,
];

const B3: [f64; 3] = [-1.0263, 1.1535, -0.7865];

#[rustfmt::skip]
const C1: [f64; 6] = [
    0.6348, -0.1760, -0.1274,
    0.8204,  0.5625,  0.5542,
];

#[rustfmt::skip]
const D1: [f64; 4] = [
    -1.0973,  1.4047,
    -0.7313, -0.6202,
];

#[rustfmt::skip]
const CBAR1: [f64; 9] = [
     0.4895, 0.6449, 0.4762,
    -1.5874, 0.1367, 0.6874,
     0.8908, 0.1401, 0.9721,
];

/// Interconnection sensor at node 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainMeasurement {
    /// Invertible 3x3 sensor: every interconnection signal is observed.
    Full,
    /// First two rows only: one hidden interconnection direction.
    Hidden,
}

impl ChainMeasurement {
    pub fn cbar(self) -> DMatrix<f64> {
        let full = DMatrix::from_row_slice(3, 3, &CBAR1);
        match self {
            Self::Full => full,
            Self::Hidden => full.rows(0, 2).into_owned(),
        }
    }
}

fn block(a: &DMatrix<f64>, i: usize, j: usize) -> DMatrix<f64> {
    a.view((3 * i, 3 * j), (3, 3)).into_owned()
}

fn chain(measurement: ChainMeasurement, noise: NoiseLevels) -> NetworkSystem {
    let a = DMatrix::from_row_slice(9, 9, &GLOBAL_A);
    let nodes = vec![
        SubsystemSpec {
            a: block(&a, 0, 0),
            b: DMatrix::from_row_slice(3, 2, &B1),
            c: DMatrix::from_row_slice(2, 3, &C1),
            d: DMatrix::from_row_slice(2, 2, &D1),
            cbar: measurement.cbar(),
        },
        SubsystemSpec {
            a: block(&a, 1, 1),
            b: DMatrix::from_row_slice(3, 2, &B2),
            c: DMatrix::identity(3, 3),
            d: DMatrix::zeros(3, 2),
            cbar: DMatrix::identity(6, 6),
        },
        SubsystemSpec {
            a: block(&a, 2, 2),
            b: DMatrix::from_column_slice(3, 1, &B3),
            c: DMatrix::identity(3, 3),
            d: DMatrix::zeros(3, 1),
            cbar: DMatrix::identity(3, 3),
        },
    ];
    let couplings = vec![
        (0, 1, block(&a, 0, 1)),
        (1, 0, block(&a, 1, 0)),
        (1, 2, block(&a, 1, 2)),
        (2, 1, block(&a, 2, 1)),
    ];
    let graph = Some(vec![(0, 1), (1, 0), (1, 2), (2, 1)]);
    NetworkSystem::new(nodes, couplings, graph, noise).expect("built-in chain is valid")
}

/// The chain with full interconnection measurements at node 1 and all noise
/// standard deviations at 0.01.
pub fn paper_chain() -> NetworkSystem {
    chain(ChainMeasurement::Full, NoiseLevels::uniform(0.01))
}

/// The chain with the two-row sensor at node 1. Interconnection observations are
/// noise-free in this setting; process and output noise stay at 0.01.
pub fn paper_chain_hidden() -> NetworkSystem {
    let mut noise = NoiseLevels::uniform(0.01);
    noise.interconnect = 0.0;
    chain(ChainMeasurement::Hidden, noise)
}
