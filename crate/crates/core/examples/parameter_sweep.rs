//! Hidden-case sweep over the residual and hidden budgets on one dataset.
//!
//!     cargo run --release --example parameter_sweep [out_dir]

use locsysid::harness::{cmd_sweep, ExperimentConfig};

fn main() -> locsysid::Result<()> {
    let out = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("locsysid_sweep"), Into::into);
    let cfg = ExperimentConfig::from_json(
        r#"{
            "mode": "hidden",
            "delta_grid": [4.0, 4.5, 5.0],
            "delta_h_grid": [0.0, 0.05, 0.15],
            "solver": {"max_iters": 20000, "record_trace": false}
        }"#,
    )?;
    let rows = cmd_sweep(&cfg, Some(0), Some(&out))?;
    println!("delta  delta_h  sigma_1..4                         sigma2(F(H))  error   status");
    for r in &rows {
        println!(
            "{:<6} {:<8} {:.4?} {:<13.4} {:<7.4} {}",
            r.delta,
            r.delta_h.unwrap_or(0.0),
            &r.sigma[..4],
            r.max_frequency_sigma2.unwrap_or(0.0),
            r.error.unwrap_or(f64::NAN),
            r.status
        );
    }
    println!("table written to {}", out.join("sweep.csv").display());
    Ok(())
}
