//! Sparsely interconnected LTI networks: construction, validation, simulation and
//! ground-truth quantities (coupling maps, hidden dimensions, impulse responses).

mod chain;
mod network;
mod rng;
mod simulate;
mod spec_file;

pub use chain::{paper_chain, paper_chain_hidden, ChainMeasurement};
pub use network::{build_network, compute_coupling, local_impulse_response, true_impulse_response, CouplingMap, NetworkSystem, NoiseLevels, SubsystemSpec};
pub use rng::{SignalKind, StreamRng};
pub use simulate::{simulate, white_inputs, white_inputs_active, NodeTrajectory, Trajectory};
pub use spec_file::{matrix_from_rows, matrix_to_rows, EdgeSpec, NetworkSpec, NodeSpec, NoiseSpec};
