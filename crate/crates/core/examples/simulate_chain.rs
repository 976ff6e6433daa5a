//! Simulates the three-node chain and inspects what node 1 can see locally.
//!
//!     cargo run --release --example simulate_chain

use locsysid::datamat::{build_regressors, pe_check};
use locsysid::netsim::{compute_coupling, paper_chain, paper_chain_hidden, simulate, white_inputs_active};

fn main() -> locsysid::Result<()> {
    let sys = paper_chain();
    println!("nodes {}, global states {}, spectral radius {:.4}", sys.len(), sys.state_dim(), sys.spectral_radius());
    for (name, s) in [("full sensor", &sys), ("two-row sensor", &paper_chain_hidden())] {
        println!("{name}: hidden interconnection dimension k = {}", compute_coupling(s, 0).hidden_dim);
    }

    let (horizon, window, taps) = (600, 300, 21);
    let inputs = white_inputs_active(&sys, &[0, 1, 2], horizon, 7, 1.0);
    let traj = simulate(&sys, &inputs, horizon, 7)?;
    let node = &traj.nodes[0];
    println!("node 1: u {:?}, y {:?}, z {:?}", node.u.shape(), node.y.shape(), node.z.shape());

    let reg = build_regressors(&traj, 0, horizon, window, taps, false)?;
    println!("Y {:?}, V {:?}", reg.y.shape(), reg.v.shape());
    let pe = pe_check(&reg);
    println!("V rank {} of {} rows, condition {:.1}, excitation ok: {}", pe.v.rank, pe.v.rows, pe.v.condition, pe.passed);

    // driving only node 1 leaves the interconnection signal inside the input's span
    let quiet = sys.with_noise(locsysid::netsim::NoiseLevels::none());
    let lone = simulate(&quiet, &white_inputs_active(&quiet, &[0], horizon, 7, 1.0), horizon, 7)?;
    let pe_lone = pe_check(&build_regressors(&lone, 0, horizon, window, taps, false)?);
    println!("only node 1 driven: projected z rank {} of {}", pe_lone.projected_z.rank, pe_lone.projected_z.rows);

    let mut head = Vec::new();
    traj.write_csv(&mut head)?;
    for line in String::from_utf8_lossy(&head).lines().take(2) {
        println!("{}", &line[..line.len().min(100)]);
    }
    Ok(())
}
