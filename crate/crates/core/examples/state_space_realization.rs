//! From an identified impulse response to a state-space model.
//!
//!     cargo run --release --example state_space_realization

use locsysid::datamat::build_regressors;
use locsysid::ident::identify_robust;
use locsysid::linalg::{eigenvalue_distance, eigenvalues};
use locsysid::netsim::{paper_chain, simulate, white_inputs_active};
use locsysid::realization::{estimate_order, ho_kalman, DEFAULT_GAP_RATIO};
use locsysid::solver::SolverConfig;

fn main() -> locsysid::Result<()> {
    let sys = paper_chain();
    let (horizon, window, taps) = (600, 300, 21);
    let inputs = white_inputs_active(&sys, &[0, 1, 2], horizon, 3, 2.5);
    let traj = simulate(&sys, &inputs, horizon, 3)?;
    let reg = build_regressors(&traj, 0, horizon, window, taps, false)?;
    let est = identify_robust(&reg.y, &reg.v, taps, 0.5, &SolverConfig::default())?;

    let order = estimate_order(&est.s, DEFAULT_GAP_RATIO)?;
    println!("estimated order {} (confident: {})", order.order, order.confident);
    let model = ho_kalman(&est.s, order.order)?;
    println!("Markov fit error {:.2e}, stable: {}", model.fit_error, model.is_stable());
    let truth = eigenvalues(&sys.node(0).a);
    println!("realized poles {:.4?}", model.eigenvalues());
    println!("true poles     {:.4?}", truth);
    println!("pole distance  {:.4}", eigenvalue_distance(&model.eigenvalues(), &truth));
    println!("{}", serde_json::to_string_pretty(&model.to_file())?);
    Ok(())
}
