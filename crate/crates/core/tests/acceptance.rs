//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Always exits 0 so the suite reports rather than aborts; set `ACCEPTANCE_STRICT=1`
//! to exit 1 on any failure. `ACCEPTANCE_ONLY=1,4` restricts the run.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use locsysid::datamat::{
    build_regressors, dft_adjoint, dft_slices, hankel, hankel_adjoint, BlockSequence, FrequencyGrid, FrequencySlices,
};
use locsysid::harness::{full_experiment, hidden_experiment, median, ExperimentConfig, RunStats, REPRO_DELTA_H};
use locsysid::ident::identify_exact;
use locsysid::linalg::{eigenvalue_distance, eigenvalues, frob_inner_c, nuclear_norm};
use locsysid::netsim::{compute_coupling, paper_chain, paper_chain_hidden, simulate, true_impulse_response, white_inputs_active, NoiseLevels};
use locsysid::realization::{estimate_order, ho_kalman, RealizedModel, DEFAULT_GAP_RATIO};
use locsysid::solver::{project_frobenius_ball, project_nuclear_ball, solve_robust, svt, SolverConfig};

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

struct Verdict {
    passed: bool,
    detail: String,
}

struct Checks(Vec<(String, bool)>);

impl Checks {
    fn new() -> Self {
        Self(Vec::new())
    }

    fn add(&mut self, label: impl Into<String>, ok: bool) {
        self.0.push((label.into(), ok));
    }

    fn verdict(self) -> Verdict {
        let passed = self.0.iter().all(|(_, ok)| *ok);
        let detail = self
            .0
            .iter()
            .map(|(l, ok)| format!("{l}{}", if *ok { "" } else { " [x]" }))
            .collect::<Vec<_>>()
            .join("; ");
        Verdict { passed, detail }
    }
}

fn within(checks: &mut Checks, elapsed: Duration, limit_s: f64) {
    let s = elapsed.as_secs_f64();
    checks.add(format!("runtime {s:.1}s <= {limit_s}s"), s <= limit_s);
}

fn exact_recovery() -> Verdict {
    let t = Instant::now();
    let sys = paper_chain().with_noise(NoiseLevels::none());
    let inputs = white_inputs_active(&sys, &[0, 1, 2], 600, 0, 1.0);
    let traj = simulate(&sys, &inputs, 600, 0).expect("simulate");
    let reg = build_regressors(&traj, 0, 600, 300, 21, false).expect("regressors");
    let est = identify_exact(&reg.y, &reg.v, 21).expect("identify");
    let truth = true_impulse_response(&sys, 0, 21).expect("truth");
    let rel = est.error_against(&truth, None).expect("shapes") / truth.frobenius_norm();
    let mut c = Checks::new();
    c.add(format!("relative error {rel:.2e} <= 1e-6"), rel <= 1e-6);
    within(&mut c, t.elapsed(), 10.0);
    c.verdict()
}

fn per_seed(runs: &[RunStats], f: impl Fn(&RunStats) -> f64) -> String {
    runs.iter().map(|r| format!("{:.3}", f(r))).collect::<Vec<_>>().join(",")
}

fn robust_full() -> Verdict {
    let t = Instant::now();
    let runs = full_experiment(&ExperimentConfig::default(), &SEEDS).expect("full experiment");
    let elapsed = t.elapsed();
    let errors: Vec<f64> = runs.iter().map(|r| r.error).collect();
    let med = median(&errors);
    let min_gap = runs.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min);
    let mut c = Checks::new();
    c.add(format!("median error {med:.4} <= 0.02 (seeds {})", per_seed(&runs, |r| r.error)), med <= 0.02);
    c.add(
        format!("median local-input error {:.4}", median(&runs.iter().map(|r| r.error_local_inputs).collect::<Vec<_>>())),
        true,
    );
    c.add(format!("min sigma3/sigma4 {min_gap:.0} >= 10"), min_gap >= 10.0);
    within(&mut c, elapsed, 300.0);
    c.verdict()
}

fn hidden_runs() -> (Vec<RunStats>, Duration) {
    let t = Instant::now();
    let runs = hidden_experiment(&ExperimentConfig::default(), &SEEDS, &REPRO_DELTA_H).expect("hidden experiment");
    (runs, t.elapsed())
}

fn robust_hidden(runs: &[RunStats], elapsed: Duration) -> Verdict {
    let nominal: Vec<RunStats> = runs.iter().filter(|r| r.delta_h == Some(0.05)).cloned().collect();
    let med = median(&nominal.iter().map(|r| r.error).collect::<Vec<_>>());
    let min_gap = nominal.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min);
    let mut c = Checks::new();
    c.add(format!("median error {med:.4} <= 0.2 (seeds {})", per_seed(&nominal, |r| r.error)), med <= 0.2);
    c.add(
        format!("median local-input error {:.4}", median(&nominal.iter().map(|r| r.error_local_inputs).collect::<Vec<_>>())),
        true,
    );
    c.add(format!("min sigma3/sigma4 {min_gap:.2} >= 10 (seeds {})", per_seed(&nominal, |r| r.gap)), min_gap >= 10.0);
    for dh in REPRO_DELTA_H {
        let worst = runs
            .iter()
            .filter(|r| r.delta_h == Some(dh))
            .filter_map(|r| r.max_frequency_ratio)
            .fold(0.0, f64::max);
        c.add(format!("delta_h {dh}: max sigma2/sigma1 of F(H) {worst:.3} <= 0.1"), worst <= 0.1);
    }
    within(&mut c, elapsed, 1800.0);
    c.verdict()
}

fn hidden_dimension() -> Verdict {
    let full = compute_coupling(&paper_chain(), 0).hidden_dim;
    let hidden = compute_coupling(&paper_chain_hidden(), 0).hidden_dim;
    let mut c = Checks::new();
    c.add(format!("full sensor k = {full}"), full == 0);
    c.add(format!("two-row sensor k = {hidden}"), hidden == 1);
    c.verdict()
}

fn gaussian(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn random_seq(rng: &mut ChaCha8Rng, q: usize, c: usize, l: usize) -> BlockSequence {
    BlockSequence::new((0..=l).map(|_| gaussian(rng, q, c)).collect()).expect("uniform blocks")
}

fn random_slices(rng: &mut ChaCha8Rng, grid: &FrequencyGrid, q: usize, c: usize) -> FrequencySlices {
    FrequencySlices {
        omegas: grid.omegas().to_vec(),
        slices: (0..grid.len())
            .map(|_| DMatrix::from_fn(q, c, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))))
            .collect(),
    }
}

/// Largest relative violation of `<A x, y> = <x, A* y>` over 100 random shapes.
fn adjoint_gaps(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let (mut hk, mut ft) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let (q, c, l) = (rng.random_range(1..4), rng.random_range(1..4), rng.random_range(1..12));
        let x = random_seq(rng, q, c, l);
        let hx = hankel(&x).expect("lifting");
        let z = gaussian(rng, hx.nrows(), hx.ncols());
        let lhs = hx.dot(&z);
        let rhs = x.inner(&hankel_adjoint(&z, (q, c), l).expect("adjoint"));
        hk = hk.max((lhs - rhs).abs() / (1.0 + lhs.abs()));

        let grid = FrequencyGrid::uniform(rng.random_range(1..25));
        let g = random_slices(rng, &grid, q, c);
        let fx = dft_slices(&x, &grid).expect("dft");
        let lhs: f64 = fx.slices.iter().zip(&g.slices).map(|(a, b)| frob_inner_c(a, b)).sum();
        let rhs = x.inner(&dft_adjoint(&g, (q, c), l).expect("adjoint"));
        ft = ft.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
    }
    (hk, ft)
}

fn parseval_gap(rng: &mut ChaCha8Rng) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (q, c, l) = (rng.random_range(1..4), rng.random_range(1..4), rng.random_range(0..12));
        let k = rng.random_range(l + 1..l + 40);
        let x = random_seq(rng, q, c, l);
        let f = dft_slices(&x, &FrequencyGrid::uniform(k)).expect("dft");
        let lhs: f64 = f.slices.iter().map(|g| g.norm_squared()).sum::<f64>() / k as f64;
        let rhs = x.frobenius_norm().powi(2);
        worst = worst.max((lhs - rhs).abs() / rhs.max(1.0));
    }
    worst
}

/// Count of perturbations that beat the closed-form answer (should be zero).
fn variational_violations(rng: &mut ChaCha8Rng) -> [usize; 3] {
    let tau = 0.4;
    let x = gaussian(rng, 4, 6);
    let z = svt(&x, tau);
    let prox = |m: &DMatrix<f64>| tau * nuclear_norm(m) + 0.5 * (m - &x).norm_squared();
    let base = prox(&z);
    let svt_bad = (0..1000).filter(|_| prox(&(&z + gaussian(rng, 4, 6) * 1e-3)) < base - 1e-9).count();

    let radius = 1.0;
    let xc = DMatrix::from_fn(3, 5, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let pc = project_nuclear_ball(&xc, radius);
    let dist = (&pc - &xc).norm();
    let nuc_bad = (0..1000)
        .filter(|_| {
            let pert = DMatrix::from_fn(3, 5, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * 1e-3);
            let cand = &pc + pert;
            let nn = nuclear_norm(&cand);
            let cand = if nn > radius { cand.scale(radius / nn) } else { cand };
            (&cand - &xc).norm() < dist - 1e-9
        })
        .count();

    let center = gaussian(rng, 3, 4);
    let xf = gaussian(rng, 3, 4) * 3.0;
    let pf = project_frobenius_ball(&xf, &center, 0.7);
    let dist = (&pf - &xf).norm();
    let frob_bad = (0..1000)
        .filter(|_| {
            let cand = &pf + gaussian(rng, 3, 4) * 1e-3;
            let off = &cand - &center;
            let cand = if off.norm() > 0.7 { &center + off.scale(0.7 / off.norm()) } else { cand };
            (&cand - &xf).norm() < dist - 1e-9
        })
        .count();
    [svt_bad, nuc_bad, frob_bad]
}

/// Exhaustive multi-resolution grid search for `q = 1`, two regressor channels, `r = 2`,
/// seven columns. With `r = 2` the Hankel lifting is `[s_1 s_2]`, so the objective is the
/// Euclidean norm of `(s_1, s_2)`; `s_0` is eliminated by projecting onto the complement
/// of its regressor rows.
fn grid_oracle(y: &DMatrix<f64>, v: &DMatrix<f64>, delta: f64) -> f64 {
    let v0 = v.rows(0, 2).into_owned();
    let proj = DMatrix::identity(7, 7) - v0.transpose() * (&v0 * v0.transpose()).try_inverse().expect("invertible") * &v0;
    let b = y * &proj;
    let a = v.rows(2, 4).into_owned() * &proj;
    let residual = |x: &[f64; 4]| {
        let mut r = b.clone();
        for (k, xk) in x.iter().enumerate() {
            r -= a.row(k) * *xk;
        }
        r.norm()
    };
    let norm = |x: &[f64; 4]| x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ls = &b * a.transpose() * (&a * a.transpose()).try_inverse().expect("invertible");
    let mut center = [ls[0], ls[1], ls[2], ls[3]];
    let mut half = 1.2 * norm(&center);
    let mut best = f64::INFINITY;
    let steps = 16;
    for _ in 0..30 {
        let h = 2.0 * half / steps as f64;
        let mut next = center;
        for idx in 0..(steps + 1usize).pow(4) {
            let mut x = [0.0; 4];
            let mut rest = idx;
            for (d, slot) in x.iter_mut().enumerate() {
                *slot = center[d] - half + h * (rest % (steps + 1)) as f64;
                rest /= steps + 1;
            }
            let n = norm(&x);
            if n < best && residual(&x) <= delta {
                best = n;
                next = x;
            }
        }
        center = next;
        half *= 0.5;
    }
    best
}

fn property_suites() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (hk, ft) = adjoint_gaps(&mut rng);
    let pv = parseval_gap(&mut rng);
    let [svt_bad, nuc_bad, frob_bad] = variational_violations(&mut rng);

    let v = gaussian(&mut rng, 6, 7);
    let y = gaussian(&mut rng, 1, 7);
    let delta = 0.4 * y.norm();
    let oracle = grid_oracle(&y, &v, delta);
    let res = solve_robust(&y, &v, 2, delta, &SolverConfig::default()).expect("tiny solve");
    let gap = (res.objective - oracle).abs();

    let mut c = Checks::new();
    c.add(format!("Hankel adjoint {hk:.1e}"), hk <= 1e-10);
    c.add(format!("DFT adjoint {ft:.1e}"), ft <= 1e-10);
    c.add(format!("Parseval {pv:.1e}"), pv <= 1e-10);
    c.add(format!("svt/nuclear/Frobenius violations {svt_bad}/{nuc_bad}/{frob_bad} of 1000"), svt_bad + nuc_bad + frob_bad == 0);
    c.add(format!("tiny oracle objective gap {gap:.1e} <= 1e-3"), gap <= 1e-3 && res.feasible);
    c.verdict()
}

fn random_minimal(rng: &mut ChaCha8Rng, n: usize) -> (DMatrix<f64>, BlockSequence) {
    let mut a = DMatrix::zeros(n, n);
    let mut k = 0;
    while k < n {
        let radius = rng.random_range(0.3..0.85);
        if k + 1 < n && rng.random_bool(0.5) {
            let theta: f64 = rng.random_range(0.3..2.5);
            a[(k, k)] = radius * theta.cos();
            a[(k, k + 1)] = radius * theta.sin();
            a[(k + 1, k)] = -radius * theta.sin();
            a[(k + 1, k + 1)] = radius * theta.cos();
            k += 2;
        } else {
            a[(k, k)] = if rng.random_bool(0.5) { radius } else { -radius };
            k += 1;
        }
    }
    let t = gaussian(rng, n, n) + DMatrix::identity(n, n) * 3.0;
    let a = &t * a * t.clone().try_inverse().expect("invertible");
    let model = RealizedModel {
        a: a.clone(),
        b_ext: gaussian(rng, n, 3),
        c: gaussian(rng, 2, n),
        d_ext: gaussian(rng, 2, 3),
        fit_error: 0.0,
    };
    (a, model.markov(21))
}

fn realization(hidden: &[RunStats]) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut order_misses, mut worst_eig) = (0, 0.0f64);
    for n in 1..=5 {
        for _ in 0..5 {
            let (a, s) = random_minimal(&mut rng, n);
            let est = estimate_order(&s, DEFAULT_GAP_RATIO).expect("order");
            if est.order != n {
                order_misses += 1;
                continue;
            }
            let model = ho_kalman(&s, n).expect("realization");
            worst_eig = worst_eig.max(eigenvalue_distance(&model.eigenvalues(), &eigenvalues(&a)));
        }
    }
    let nominal: Vec<RunStats> = hidden.iter().filter(|r| r.delta_h == Some(0.05)).cloned().collect();
    let poles = median(&nominal.iter().map(|r| r.pole_distance).collect::<Vec<_>>());
    let mut c = Checks::new();
    c.add(format!("order misses {order_misses} of 25"), order_misses == 0);
    c.add(format!("worst pole error {worst_eig:.1e} <= 1e-8"), worst_eig <= 1e-8);
    c.add(
        format!("hidden-case median pole distance {poles:.3} <= 0.05 (seeds {})", per_seed(&nominal, |r| r.pole_distance)),
        poles <= 0.05,
    );
    c.verdict()
}

fn main() {
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|p| p.trim().parse().ok()).collect());
    let wanted = |k: u32| only.as_ref().is_none_or(|o| o.contains(&k));
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");

    let hidden = (wanted(3) || wanted(6)).then(hidden_runs);
    let criteria: Vec<(u32, &str, Box<dyn Fn() -> Verdict + '_>)> = vec![
        (1, "exact recovery", Box::new(exact_recovery)),
        (2, "robust full-measurement reproduction", Box::new(robust_full)),
        (3, "hidden-measurement reproduction", Box::new(|| {
            let (runs, elapsed) = hidden.as_ref().expect("hidden runs");
            robust_hidden(runs, *elapsed)
        })),
        (4, "hidden dimension", Box::new(hidden_dimension)),
        (5, "property suites", Box::new(property_suites)),
        (6, "realization round trip", Box::new(|| realization(&hidden.as_ref().expect("hidden runs").0))),
    ];

    let mut failed = 0;
    let mut ran = 0;
    for (k, name, check) in &criteria {
        if !wanted(*k) {
            continue;
        }
        ran += 1;
        let v = check();
        if !v.passed {
            failed += 1;
        }
        println!("{} criterion {k} ({name}): {}", if v.passed { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if strict && failed > 0 {
        std::process::exit(1);
    }
}
