//! Node 1 with a two-row interconnection sensor: split the response into a low-order
//! local part and a hidden part that is low rank at every frequency.
//!
//!     cargo run --release --example hidden_decomposition

use locsysid::datamat::build_regressors;
use locsysid::ident::block_error;
use locsysid::netsim::{compute_coupling, local_impulse_response, paper_chain_hidden, simulate, white_inputs_active};
use locsysid::solver::{solve_hidden, solve_hidden_local, SolverConfig};

fn main() -> locsysid::Result<()> {
    let sys = paper_chain_hidden();
    println!("hidden dimension k = {}", compute_coupling(&sys, 0).hidden_dim);
    let (horizon, window, taps, delta, delta_h) = (600, 300, 21, 4.5, 0.05);
    let inputs = white_inputs_active(&sys, &[0, 1, 2], horizon, 2, 2.5);
    let traj = simulate(&sys, &inputs, horizon, 2)?;
    let reg = build_regressors(&traj, 0, horizon, window, taps, true)?;
    let truth = local_impulse_response(&sys, 0, taps);
    let cfg = SolverConfig { max_iters: 20_000, ..SolverConfig::default() };

    let local = solve_hidden_local(&reg.y, &reg.v, taps, delta, delta_h, &cfg)?;
    let remote = solve_hidden(&reg.y, &reg.v, reg.w.as_ref().expect("remote regressor"), taps, delta, delta_h, &cfg)?;
    for (name, res) in [("local W = V", &local), ("remote W", &remote)] {
        println!(
            "{name}: {:?}, {} iterations, |S - S_true| {:.4}, sigma3/sigma4 {:.1}, max sigma2/sigma1 of F(H) {:.3}",
            res.status,
            res.iterations,
            block_error(&res.s, &truth, None)?,
            res.hankel_singular_values[2] / res.hankel_singular_values[3],
            res.max_frequency_ratio()
        );
    }
    Ok(())
}
