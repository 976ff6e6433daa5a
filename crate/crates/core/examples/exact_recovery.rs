//! Noiseless data with every interconnection signal measured: `S = Y V^+` recovers the
//! local impulse response.
//!
//!     cargo run --release --example exact_recovery

use locsysid::datamat::build_regressors;
use locsysid::ident::identify_exact;
use locsysid::netsim::{paper_chain, simulate, true_impulse_response, white_inputs_active, NoiseLevels};

fn main() -> locsysid::Result<()> {
    let sys = paper_chain().with_noise(NoiseLevels::none());
    let (horizon, window, taps) = (600, 300, 21);
    let inputs = white_inputs_active(&sys, &[0, 1, 2], horizon, 1, 1.0);
    let traj = simulate(&sys, &inputs, horizon, 1)?;
    let reg = build_regressors(&traj, 0, horizon, window, taps, false)?;

    let est = identify_exact(&reg.y, &reg.v, taps)?;
    let truth = true_impulse_response(&sys, 0, taps)?;
    let err = est.error_against(&truth, None)?;
    println!("identifiable: {}, V condition {:.2}", est.identifiable, est.conditioning.condition);
    println!("residual {:.3e}", est.residual);
    println!("|S - S_true| = {:.3e} (relative {:.3e})", err, err / truth.frobenius_norm());
    println!("leading Hankel singular values {:.4?}", &est.hankel_singular_values[..5]);
    Ok(())
}
