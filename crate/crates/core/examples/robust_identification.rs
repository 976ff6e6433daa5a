//! Noisy full-measurement data: minimize the Hankel nuclear norm inside a residual ball.
//!
//!     cargo run --release --example robust_identification

use locsysid::datamat::build_regressors;
use locsysid::ident::{identify_exact, identify_robust};
use locsysid::netsim::{paper_chain, simulate, true_impulse_response, white_inputs_active};
use locsysid::solver::SolverConfig;

fn main() -> locsysid::Result<()> {
    let sys = paper_chain();
    let (horizon, window, taps, delta) = (600, 300, 21, 0.5);
    let inputs = white_inputs_active(&sys, &[0, 1, 2], horizon, 0, 2.5);
    let traj = simulate(&sys, &inputs, horizon, 0)?;
    let reg = build_regressors(&traj, 0, horizon, window, taps, false)?;
    let truth = true_impulse_response(&sys, 0, taps)?;

    let ls = identify_exact(&reg.y, &reg.v, taps)?;
    let est = identify_robust(&reg.y, &reg.v, taps, delta, &SolverConfig::default())?;
    let res = est.solve.as_ref().expect("solver output");
    println!("status {:?} after {} iterations, residual {:.4}", res.status, res.iterations, res.residual);
    println!("least squares: error {:.4}", ls.error_against(&truth, None)?);
    println!("nuclear norm:  error {:.4}", est.error_against(&truth, None)?);
    let sv = &est.hankel_singular_values;
    let head: Vec<String> = sv[..6].iter().map(|v| format!("{v:.2e}")).collect();
    println!("Hankel singular values [{}]", head.join(", "));
    println!("sigma3/sigma4 = {:.0}", sv[2] / sv[3]);
    println!("{}", serde_json::to_string(&est.report().conditioning)?);
    Ok(())
}
