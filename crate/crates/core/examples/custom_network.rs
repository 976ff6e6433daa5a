//! A two-node network read from a JSON spec, identified through the harness pipeline.
//!
//!     cargo run --release --example custom_network

use locsysid::harness::{prepare, run, ExperimentConfig};
use locsysid::netsim::{compute_coupling, NetworkSpec};

const SPEC: &str = include_str!("../../../configs/two_node.json");

fn main() -> locsysid::Result<()> {
    let sys = NetworkSpec::from_json(SPEC)?.to_system()?;
    println!("spectral radius {:.3}, node 1 hidden dimension {}", sys.spectral_radius(), compute_coupling(&sys, 0).hidden_dim);

    let dir = std::env::temp_dir().join("locsysid_custom");
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("two_node.json"), SPEC)?;
    let mut cfg = ExperimentConfig::from_json(r#"{"system": "two_node.json", "N": 400, "M": 250, "r": 12, "delta": 0.3}"#)?;
    cfg.base_dir = Some(dir);

    let data = prepare(&cfg, 11)?;
    println!("excitation ok: {}", data.pe.passed);
    let out = run(&cfg, &data, cfg.delta(), 0.0)?;
    println!(
        "{:?}: error {:.4} (relative {:.4}), order {} confident {}",
        out.status(),
        out.comparison.error,
        out.comparison.relative_error,
        out.order.order,
        out.order.confident
    );
    if let Some(d) = out.comparison.eigenvalue_distance {
        println!("pole distance {d:.4}");
    }
    Ok(())
}
