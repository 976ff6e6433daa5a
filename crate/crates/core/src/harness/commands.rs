use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, Method, Mode};
use super::pipeline::{median, prepare, run, Dataset};
use super::report::{validate_report, IdentifyReport};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalue_distance, eigenvalues};
use crate::netsim::{white_inputs_active, simulate, NetworkSpec};
use crate::realization::ho_kalman;
use crate::solver::SolveStatus;

/// Writes through a temporary sibling so readers never see a partial file.
pub fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("partial");
    {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        body(&mut w)?;
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    write_atomic(path, |w| writeln!(w, "{text}"))
}

fn seeds_of(cfg: &ExperimentConfig, seed: Option<u64>) -> Vec<u64> {
    seed.map_or_else(|| cfg.seeds.clone(), |s| vec![s])
}

fn out_dir(cfg: &ExperimentConfig, out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf)
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryMeta {
    pub seed: u64,
    pub system: String,
    /// SHA-256 of the canonical JSON spec of the simulated system.
    pub spec_sha256: String,
    #[serde(rename = "N")]
    pub horizon: usize,
    pub active_nodes: Vec<usize>,
    pub input_std: f64,
    pub noise: [f64; 3],
    pub csv: String,
}

/// Simulates one trajectory per seed; writes `trajectory_seed{k}.csv` and its metadata.
pub fn cmd_simulate(cfg: &ExperimentConfig, seed: Option<u64>, out: Option<&Path>) -> Result<Vec<TrajectoryMeta>> {
    let sys = cfg.build_system()?;
    let spec = NetworkSpec::from_system(&sys).to_json()?;
    let digest = hex(&Sha256::digest(spec.as_bytes()));
    let active = cfg.active(sys.len())?;
    let dir = out_dir(cfg, out);
    let mut metas = Vec::new();
    for s in seeds_of(cfg, seed) {
        let inputs = white_inputs_active(&sys, &active, cfg.horizon, s, cfg.input_std);
        let traj = simulate(&sys, &inputs, cfg.horizon, s)?;
        let csv = dir.join(format!("trajectory_seed{s}.csv"));
        write_atomic(&csv, |w| traj.write_csv(w))?;
        let meta = TrajectoryMeta {
            seed: s,
            system: cfg.system.clone(),
            spec_sha256: digest.clone(),
            horizon: cfg.horizon,
            active_nodes: active.iter().map(|k| k + 1).collect(),
            input_std: cfg.input_std,
            noise: [sys.noise.process, sys.noise.output, sys.noise.interconnect],
            csv: csv.display().to_string(),
        };
        write_json(&dir.join(format!("trajectory_seed{s}.json")), &meta)?;
        metas.push(meta);
    }
    Ok(metas)
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentifySummary {
    pub reports: Vec<PathBuf>,
    pub failures: Vec<String>,
}

impl IdentifySummary {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Identifies the configured node for every seed and writes one validated report per
/// seed. Full-measurement runs stop at a failed noiseless excitation check; solver
/// non-convergence is recorded as a failure after the report is written.
pub fn cmd_identify(cfg: &ExperimentConfig, seed: Option<u64>, out: Option<&Path>) -> Result<IdentifySummary> {
    let dir = out_dir(cfg, out);
    fs::create_dir_all(&dir)?;
    let results: Vec<Result<(Option<PathBuf>, Option<String>)>> = seeds_of(cfg, seed)
        .par_iter()
        .map(|&s| identify_one(cfg, s, &dir))
        .collect();
    let mut summary = IdentifySummary { reports: Vec::new(), failures: Vec::new() };
    for r in results {
        let (path, failure) = r?;
        summary.reports.extend(path);
        summary.failures.extend(failure);
    }
    Ok(summary)
}

fn identify_one(cfg: &ExperimentConfig, seed: u64, dir: &Path) -> Result<(Option<PathBuf>, Option<String>)> {
    let data = prepare(cfg, seed)?;
    if cfg.mode == Mode::Full && !data.pe_noiseless.passed {
        let path = dir.join(format!("pe_failure_seed{seed}.json"));
        write_json(&path, &data.pe_noiseless)?;
        return Ok((
            None,
            Some(format!(
                "seed {seed}: insufficient excitation (projected interconnection rank {} of {})",
                data.pe_noiseless.projected_z.rank, data.pe_noiseless.projected_z.rows
            )),
        ));
    }
    let outcome = run(cfg, &data, cfg.delta(), cfg.delta_h)?;
    let trace_path = match &outcome.solve {
        Some(res) if !res.trace.is_empty() => {
            let p = dir.join(format!("trace_seed{seed}.csv"));
            write_atomic(&p, |w| res.write_trace_csv(w))?;
            Some(p.display().to_string())
        }
        _ => None,
    };
    let report = IdentifyReport::new(cfg, &data, &outcome, trace_path);
    validate_report(&serde_json::to_value(&report)?)?;
    let path = dir.join(format!("report_seed{seed}.json"));
    write_json(&path, &report)?;
    let failure = (!outcome.converged()).then(|| format!("seed {seed}: solver status {:?}", outcome.status()));
    Ok((Some(path), failure))
}

/// One sweep cell.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub delta: f64,
    pub delta_h: Option<f64>,
    pub sigma: [f64; 6],
    pub max_frequency_sigma2: Option<f64>,
    pub error: Option<f64>,
    pub status: String,
}

const SWEEP_HEADER: &str = "delta,delta_h,sigma_1,sigma_2,sigma_3,sigma_4,sigma_5,sigma_6,max_freq_sigma2,error,status";

/// Solves every `(delta, delta_h)` cell on one shared dataset and writes `sweep.csv`.
/// Failed cells are recorded in the status column.
pub fn cmd_sweep(cfg: &ExperimentConfig, seed: Option<u64>, out: Option<&Path>) -> Result<Vec<SweepRow>> {
    cfg.validate_sweep()?;
    if cfg.method() == Method::Exact {
        return Err(Error::InvalidArgument("sweeps need a nuclear-norm method".into()));
    }
    let seed = seed.unwrap_or(cfg.seeds[0]);
    let data = prepare(cfg, seed)?;
    let hidden_grid: Vec<Option<f64>> = match cfg.mode {
        Mode::Full => vec![None],
        Mode::Hidden => cfg.delta_h_grid.iter().map(|&d| Some(d)).collect(),
    };
    let cells: Vec<(f64, Option<f64>)> = cfg
        .delta_grid
        .iter()
        .flat_map(|&d| hidden_grid.iter().map(move |&h| (d, h)))
        .collect();
    let rows: Vec<SweepRow> = cells.par_iter().map(|&(d, h)| sweep_cell(cfg, &data, d, h)).collect();
    let path = out_dir(cfg, out).join("sweep.csv");
    write_atomic(&path, |w| write_sweep_csv(w, &rows))?;
    Ok(rows)
}

fn sweep_cell(cfg: &ExperimentConfig, data: &Dataset, delta: f64, delta_h: Option<f64>) -> SweepRow {
    match run(cfg, data, delta, delta_h.unwrap_or(0.0)) {
        Ok(out) => {
            let mut sigma = [0.0; 6];
            for (slot, v) in sigma.iter_mut().zip(&out.hankel_singular_values) {
                *slot = *v;
            }
            SweepRow {
                delta,
                delta_h,
                sigma,
                max_frequency_sigma2: out.max_frequency_sigma2(),
                error: Some(out.comparison.error),
                status: status_label(&out.status()),
            }
        }
        Err(e) => SweepRow {
            delta,
            delta_h,
            sigma: [f64::NAN; 6],
            max_frequency_sigma2: None,
            error: None,
            status: format!("error: {e}").replace(',', ";"),
        },
    }
}

fn status_label(s: &SolveStatus) -> String {
    match s {
        SolveStatus::Converged => "converged".into(),
        SolveStatus::NotConverged => "not_converged".into(),
        SolveStatus::Infeasible { .. } => "infeasible".into(),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(crate::fmt_f64).unwrap_or_default()
}

pub fn write_sweep_csv(w: &mut dyn Write, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in rows {
        let sigma: Vec<String> = r.sigma.iter().map(|v| crate::fmt_f64(*v)).collect();
        writeln!(
            w,
            "{},{},{},{},{},{}",
            crate::fmt_f64(r.delta),
            opt(r.delta_h),
            sigma.join(","),
            opt(r.max_frequency_sigma2),
            opt(r.error),
            r.status
        )?;
    }
    Ok(())
}

/// Iteration cap for reproduction runs; hidden solves near the residual floor are slow.
pub const REPRO_MAX_ITERS: usize = 20_000;

/// Hidden budgets over which the rank-one frequency finding is checked.
pub const REPRO_DELTA_H: [f64; 4] = [0.01, 0.05, 0.10, 0.15];

/// Per-seed metrics of one reproduction run.
#[derive(Clone, Debug, Serialize)]
pub struct RunStats {
    pub experiment: String,
    pub seed: u64,
    pub delta: f64,
    pub delta_h: Option<f64>,
    pub error: f64,
    pub error_local_inputs: f64,
    /// `sigma_3 / sigma_4` of the Hankel lifting.
    pub gap: f64,
    pub max_frequency_ratio: Option<f64>,
    /// Matching distance of order-3 realized poles to the node's poles.
    pub pole_distance: f64,
    pub status: String,
    pub iterations: usize,
    pub seconds: f64,
}

/// A named threshold comparison.
#[derive(Clone, Debug, Serialize)]
pub struct BandCheck {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// `true` when the value must stay at or below the bound.
    pub upper: bool,
    pub passed: bool,
}

impl BandCheck {
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, upper: true, passed: value <= bound }
    }

    pub fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, upper: false, passed: value >= bound }
    }
}

fn repro_config(base: &ExperimentConfig, mode: Mode) -> ExperimentConfig {
    let mut cfg = base.clone();
    cfg.system = super::config::PAPER_CHAIN.into();
    cfg.node = 1;
    cfg.mode = mode;
    cfg.method = None;
    cfg.delta = None;
    cfg.delta_h = 0.05;
    cfg.active_nodes = None;
    cfg.solver.max_iters = cfg.solver.max_iters.max(REPRO_MAX_ITERS);
    cfg
}

fn run_stats(cfg: &ExperimentConfig, data: &Dataset, experiment: &str, delta: f64, delta_h: f64) -> Result<RunStats> {
    let t = Instant::now();
    let out = run(cfg, data, delta, delta_h)?;
    let seconds = t.elapsed().as_secs_f64();
    let a = &data.system.node(cfg.node_index()).a;
    let pole_distance = ho_kalman(&out.s, a.nrows())
        .map(|m| eigenvalue_distance(&m.eigenvalues(), &eigenvalues(a)))
        .unwrap_or(f64::INFINITY);
    Ok(RunStats {
        experiment: experiment.into(),
        seed: data.seed,
        delta,
        delta_h: out.delta_h,
        error: out.comparison.error,
        error_local_inputs: out.comparison.error_local_inputs,
        gap: out.hankel_gap(3),
        max_frequency_ratio: out.max_frequency_ratio(),
        pole_distance,
        status: status_label(&out.status()),
        iterations: out.solve.as_ref().map_or(0, |r| r.iterations),
        seconds,
    })
}

/// Full-measurement chain experiment: robust program, `delta = 0.5`, every seed.
pub fn full_experiment(base: &ExperimentConfig, seeds: &[u64]) -> Result<Vec<RunStats>> {
    let cfg = repro_config(base, Mode::Full);
    seeds
        .par_iter()
        .map(|&s| run_stats(&cfg, &prepare(&cfg, s)?, "full", cfg.delta(), 0.0))
        .collect()
}

/// Hidden-measurement chain experiment: local hidden program, `delta = 4.5`, every
/// seed and every hidden budget in `delta_hs`.
pub fn hidden_experiment(base: &ExperimentConfig, seeds: &[u64], delta_hs: &[f64]) -> Result<Vec<RunStats>> {
    let cfg = repro_config(base, Mode::Hidden);
    let data: Vec<Dataset> = seeds.par_iter().map(|&s| prepare(&cfg, s)).collect::<Result<_>>()?;
    let jobs: Vec<(usize, f64)> = (0..data.len()).flat_map(|i| delta_hs.iter().map(move |&h| (i, h))).collect();
    jobs.par_iter()
        .map(|&(i, h)| run_stats(&cfg, &data[i], "hidden", cfg.delta(), h))
        .collect()
}

/// Band checks for the full-measurement runs.
pub fn full_checks(runs: &[RunStats]) -> Vec<BandCheck> {
    let errors: Vec<f64> = runs.iter().map(|r| r.error).collect();
    let min_gap = runs.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min);
    let poles = runs.iter().map(|r| r.pole_distance).fold(0.0, f64::max);
    vec![
        BandCheck::at_most("full: median impulse error", median(&errors), 0.02),
        BandCheck::at_least("full: smallest sigma3/sigma4", min_gap, 10.0),
        BandCheck::at_most("full: largest order-3 pole distance", poles, 0.05),
    ]
}

/// Band checks for the hidden-measurement runs; error, gap and poles use `delta_h = 0.05`,
/// the frequency-rank check uses every budget present.
pub fn hidden_checks(runs: &[RunStats]) -> Vec<BandCheck> {
    let nominal: Vec<&RunStats> = runs.iter().filter(|r| r.delta_h == Some(0.05)).collect();
    let errors: Vec<f64> = nominal.iter().map(|r| r.error).collect();
    let min_gap = nominal.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min);
    let poles: Vec<f64> = nominal.iter().map(|r| r.pole_distance).collect();
    let ratio = runs.iter().filter_map(|r| r.max_frequency_ratio).fold(0.0, f64::max);
    vec![
        BandCheck::at_most("hidden: median impulse error", median(&errors), 0.2),
        BandCheck::at_least("hidden: smallest sigma3/sigma4", min_gap, 10.0),
        BandCheck::at_most("hidden: largest frequency sigma2/sigma1", ratio, 0.1),
        BandCheck::at_most("hidden: median order-3 pole distance", median(&poles), 0.05),
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct ReproSummary {
    pub seeds: Vec<u64>,
    pub runs: Vec<RunStats>,
    pub checks: Vec<BandCheck>,
}

impl ReproSummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Runs both chain experiments over the configured seeds and checks the bands.
/// Writes `repro_runs.csv` and `repro_summary.json`.
pub fn cmd_repro_paper(cfg: &ExperimentConfig, seed: Option<u64>, out: Option<&Path>) -> Result<ReproSummary> {
    let seeds = seeds_of(cfg, seed);
    let full = full_experiment(cfg, &seeds)?;
    let hidden = hidden_experiment(cfg, &seeds, &REPRO_DELTA_H)?;
    let mut checks = full_checks(&full);
    checks.extend(hidden_checks(&hidden));
    let mut runs = full;
    runs.extend(hidden);
    let summary = ReproSummary { seeds, runs, checks };
    let dir = out_dir(cfg, out);
    write_atomic(&dir.join("repro_runs.csv"), |w| write_runs_csv(w, &summary.runs))?;
    write_json(&dir.join("repro_summary.json"), &summary)?;
    Ok(summary)
}

fn write_runs_csv(w: &mut dyn Write, runs: &[RunStats]) -> std::io::Result<()> {
    writeln!(w, "experiment,seed,delta,delta_h,error,error_local_inputs,sigma3_over_sigma4,max_freq_ratio,pole_distance,status,iterations,seconds")?;
    for r in runs {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.experiment,
            r.seed,
            crate::fmt_f64(r.delta),
            opt(r.delta_h),
            crate::fmt_f64(r.error),
            crate::fmt_f64(r.error_local_inputs),
            crate::fmt_f64(r.gap),
            opt(r.max_frequency_ratio),
            crate::fmt_f64(r.pole_distance),
            r.status,
            r.iterations,
            crate::fmt_f64(r.seconds)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_check_directions() {
        assert!(BandCheck::at_most("a", 0.1, 0.2).passed);
        assert!(!BandCheck::at_most("a", 0.3, 0.2).passed);
        assert!(BandCheck::at_least("b", 12.0, 10.0).passed);
        assert!(!BandCheck::at_least("b", f64::NAN, 10.0).passed);
    }

    #[test]
    fn sweep_csv_layout() {
        let rows = vec![SweepRow {
            delta: 4.5,
            delta_h: Some(0.05),
            sigma: [1.0, 0.5, 0.25, 0.0, 0.0, 0.0],
            max_frequency_sigma2: Some(0.01),
            error: Some(0.1),
            status: "converged".into(),
        }];
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SWEEP_HEADER);
        assert_eq!(lines.next().unwrap().split(',').count(), SWEEP_HEADER.split(',').count());
    }
}
