use std::io::Write;

use nalgebra::{DMatrix, DVector};

use super::network::NetworkSystem;
use super::rng::{SignalKind, StreamRng};
use crate::error::{Error, Result};

/// Time series of one node; every matrix is `channels x (N + 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeTrajectory {
    pub u: DMatrix<f64>,
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub z: DMatrix<f64>,
    /// Process-noise realization driving `x`.
    pub w: DMatrix<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub horizon: usize,
    pub seed: u64,
    pub nodes: Vec<NodeTrajectory>,
}

fn gaussian(rows: usize, cols: usize, std: f64, rng: &mut StreamRng) -> DMatrix<f64> {
    if std == 0.0 {
        return DMatrix::zeros(rows, cols);
    }
    // filled column-major, one time step at a time
    DMatrix::from_fn(rows, cols, |_, _| std * rng.standard_normal())
}

/// I.i.d. centered Gaussian inputs for nodes with `dims[i]` channels.
pub fn white_inputs(dims: &[usize], horizon: usize, seed: u64, std: f64) -> Vec<DMatrix<f64>> {
    dims.iter()
        .enumerate()
        .map(|(i, &p)| {
            let mut rng = StreamRng::new(seed, i, SignalKind::Input);
            gaussian(p, horizon + 1, std, &mut rng)
        })
        .collect()
}

/// White inputs at the `active` nodes, zero elsewhere.
pub fn white_inputs_active(
    sys: &NetworkSystem,
    active: &[usize],
    horizon: usize,
    seed: u64,
    std: f64,
) -> Vec<DMatrix<f64>> {
    let dims: Vec<usize> = sys.nodes().iter().map(|s| s.p()).collect();
    let mut inputs = white_inputs(&dims, horizon, seed, std);
    for (i, u) in inputs.iter_mut().enumerate() {
        if !active.contains(&i) {
            u.fill(0.0);
        }
    }
    inputs
}

/// Propagates `x_{t+1} = A x_t + B u_t + w_t` from `x_0 = 0` and records local and
/// interconnection observations for `t = 0..=horizon`.
pub fn simulate(sys: &NetworkSystem, inputs: &[DMatrix<f64>], horizon: usize, seed: u64) -> Result<Trajectory> {
    if horizon % 2 != 0 {
        return Err(Error::InvalidArgument(format!("horizon {horizon} must be even")));
    }
    if inputs.len() != sys.len() {
        return Err(Error::InvalidArgument(format!(
            "{} input series for {} nodes",
            inputs.len(),
            sys.len()
        )));
    }
    let steps = horizon + 1;
    for (i, (u, s)) in inputs.iter().zip(sys.nodes()).enumerate() {
        if u.ncols() != steps {
            return Err(Error::InputLength {
                node: i,
                got: u.ncols(),
                expected: steps,
            });
        }
        if u.nrows() != s.p() {
            return Err(Error::Dimension(format!(
                "node {i}: input has {} channels, expected {}",
                u.nrows(),
                s.p()
            )));
        }
    }

    let total = sys.state_dim();
    let noise = &sys.noise;

    let mut w_global = DMatrix::zeros(total, steps);
    for (i, s) in sys.nodes().iter().enumerate() {
        let mut rng = StreamRng::new(seed, i, SignalKind::Process);
        let std = if noise.process_cov.is_some() { 1.0 } else { noise.process };
        let draws = gaussian(s.n(), steps, std, &mut rng);
        w_global.rows_mut(sys.state_offset(i), s.n()).copy_from(&draws);
    }
    if let Some(cov) = &noise.process_cov {
        let factor = covariance_factor(cov)?;
        w_global = factor * w_global;
    }

    let a = sys.global_a();
    let b = sys.global_b();
    let mut u_global = DMatrix::zeros(b.ncols(), steps);
    let mut row = 0;
    for u in inputs {
        u_global.rows_mut(row, u.nrows()).copy_from(u);
        row += u.nrows();
    }

    let mut x = DMatrix::zeros(total, steps);
    for t in 0..horizon {
        let next: DVector<f64> = &a * x.column(t) + &b * u_global.column(t) + w_global.column(t);
        x.set_column(t + 1, &next);
    }

    let mut nodes = Vec::with_capacity(sys.len());
    for (i, s) in sys.nodes().iter().enumerate() {
        let xi = x.rows(sys.state_offset(i), s.n()).into_owned();
        let mut out_rng = StreamRng::new(seed, i, SignalKind::Output);
        let y = &s.c * &xi + &s.d * &inputs[i] + gaussian(s.q(), steps, noise.output, &mut out_rng);

        let width = s.cbar.ncols();
        let mut xbar = DMatrix::zeros(width, steps);
        let mut r0 = 0;
        for j in sys.neighbors(i) {
            let nj = sys.node(j).n();
            xbar.rows_mut(r0, nj).copy_from(&x.rows(sys.state_offset(j), nj));
            r0 += nj;
        }
        let mut ic_rng = StreamRng::new(seed, i, SignalKind::Interconnect);
        let z = &s.cbar * xbar + gaussian(s.m(), steps, noise.interconnect, &mut ic_rng);

        nodes.push(NodeTrajectory {
            u: inputs[i].clone(),
            x: xi,
            y,
            z,
            w: w_global.rows(sys.state_offset(i), s.n()).into_owned(),
        });
    }
    Ok(Trajectory { horizon, seed, nodes })
}

fn covariance_factor(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    // symmetric eigen-factor tolerates semidefinite covariances
    let sym = (cov + cov.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l < -1e-12 * eig.eigenvalues.amax().max(1.0)) {
        return Err(Error::InvalidArgument("process covariance is not positive semidefinite".into()));
    }
    let sqrt = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&sqrt))
}

impl Trajectory {
    /// One row per time step; columns `t`, then `u{node}_{ch}`, `y{node}_{ch}`,
    /// `z{node}_{ch}` with one-based node labels.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut header = vec!["t".to_string()];
        for (kind, pick) in [("u", 0usize), ("y", 1), ("z", 2)] {
            for (i, node) in self.nodes.iter().enumerate() {
                let channels = [&node.u, &node.y, &node.z][pick].nrows();
                header.extend((0..channels).map(|c| format!("{kind}{}_{c}", i + 1)));
            }
        }
        writeln!(out, "{}", header.join(","))?;
        for t in 0..=self.horizon {
            let mut row = vec![t.to_string()];
            for pick in 0..3 {
                for node in &self.nodes {
                    let m = [&node.u, &node.y, &node.z][pick];
                    row.extend(m.column(t).iter().map(|v| crate::fmt_f64(*v)));
                }
            }
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netsim::{paper_chain, NoiseLevels, SubsystemSpec};

    fn scalar(a: f64) -> NetworkSystem {
        NetworkSystem::new(
            vec![SubsystemSpec {
                a: DMatrix::from_element(1, 1, a),
                b: DMatrix::from_element(1, 1, 1.0),
                c: DMatrix::from_element(1, 1, 1.0),
                d: DMatrix::zeros(1, 1),
                cbar: DMatrix::zeros(0, 0),
            }],
            vec![],
            None,
            NoiseLevels::none(),
        )
        .unwrap()
    }

    #[test]
    fn impulse_of_scalar_system() {
        let sys = scalar(0.5);
        let mut u = DMatrix::zeros(1, 11);
        u[(0, 0)] = 1.0;
        let traj = simulate(&sys, &[u], 10, 0).unwrap();
        assert_eq!(traj.nodes[0].y[(0, 0)], 0.0);
        for t in 1..=10 {
            assert!((traj.nodes[0].y[(0, t)] - 0.5f64.powi(t as i32 - 1)).abs() < 1e-15);
        }
    }

    #[test]
    fn silent_network_stays_at_rest() {
        let sys = paper_chain().with_noise(NoiseLevels::none());
        let inputs = white_inputs_active(&sys, &[], 20, 1, 1.0);
        let traj = simulate(&sys, &inputs, 20, 1).unwrap();
        for n in &traj.nodes {
            assert_eq!(n.x.norm() + n.y.norm() + n.z.norm(), 0.0);
        }
    }

    #[test]
    fn wrong_input_length() {
        let sys = scalar(0.5);
        let err = simulate(&sys, &[DMatrix::zeros(1, 5)], 10, 0).unwrap_err();
        assert!(matches!(err, Error::InputLength { got: 5, expected: 11, .. }));
    }

    #[test]
    fn process_noise_level() {
        let sys = paper_chain();
        let inputs = white_inputs_active(&sys, &[0, 1, 2], 600, 7, 1.0);
        let traj = simulate(&sys, &inputs, 600, 7).unwrap();
        for n in &traj.nodes {
            for ch in 0..n.w.nrows() {
                let row = n.w.row(ch);
                let std = (row.iter().map(|v| v * v).sum::<f64>() / row.len() as f64).sqrt();
                assert!((std - 0.01).abs() < 0.002, "{std}");
            }
        }
    }

    #[test]
    fn white_input_statistics() {
        let u = &white_inputs(&[2], 600, 3, 1.0)[0];
        for ch in 0..2 {
            let mean = u.row(ch).mean();
            assert!(mean.abs() < 3.0 / (601f64).sqrt());
        }
        assert_eq!(white_inputs(&[2], 600, 3, 0.0)[0].norm(), 0.0);
        assert_ne!(white_inputs(&[2], 50, 3, 1.0), white_inputs(&[2], 50, 4, 1.0));
    }

    #[test]
    fn noise_streams_are_independent_per_channel() {
        let sys = paper_chain();
        let inputs = white_inputs_active(&sys, &[0, 1, 2], 40, 9, 1.0);
        let with_all = simulate(&sys, &inputs, 40, 9).unwrap();
        let mut quiet = sys.noise.clone();
        quiet.output = 0.0;
        let no_output = simulate(&sys.with_noise(quiet), &inputs, 40, 9).unwrap();
        assert_eq!(with_all.nodes[0].x, no_output.nodes[0].x);
        assert_eq!(with_all.nodes[0].z, no_output.nodes[0].z);
    }

    #[test]
    fn csv_layout() {
        let sys = paper_chain();
        let inputs = white_inputs_active(&sys, &[0], 4, 0, 1.0);
        let traj = simulate(&sys, &inputs, 4, 0).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert!(lines[0].starts_with("t,u1_0,u1_1,u2_0,u2_1,u3_0,y1_0,y1_1,y2_0"));
        assert!(lines[0].ends_with("z3_2"));
    }
}
