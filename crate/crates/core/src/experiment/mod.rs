//! Configuration, orchestration and persistence of experiment runs.
//!
//! A run validates its whole configuration, writes a `manifest.json` with
//! status `running`, executes, writes its CSV outputs atomically and then
//! finalizes the manifest. A failing run removes the outputs it wrote and
//! leaves a manifest with status `failed`.

pub mod compare;
pub mod config;
pub mod io;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

pub use compare::{compare, compare_fields, ComparisonReport};
pub use config::{parse_config, parse_config_as, parse_config_str, ExperimentKind, InitialSpec, PotentialSpec, RunConfig};
use config::{FixedPointStart, KineticMethod};
pub use io::{field_csv, fmt_f64, parse_field_csv, read_field_csv, OutputSet};

use crate::error::{Error, Result};
use crate::graphs::{classify, enumerate, verify_dichotomy, CSV_HEADER, MAX_DICHOTOMY_ORDER};
use crate::kinetic::{default_bin_width, duhamel_series, solve_explicit, solve_rk4, ShellOperator};
use crate::lattice::{dispersion, make_grid, GridSpec, PairPotential, ScalarField};
use crate::micro::{
    initial_occupation, kinetic_scaling_experiment, self_consistent_evolve, stationarity_experiment, ComparisonTable,
    EvolutionConfig, KineticScalingSpec, Scaling, StationaritySpec,
};
use crate::stationary::{diagnostics_report, renormalized_dispersion, stationary_fixed_point, FixedPointConfig};

/// Exit status for results that were written but did not converge.
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Clone, Debug, Serialize)]
pub struct StageTiming {
    pub name: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    /// `PASS`, `WARN` or `FAIL`
    pub status: String,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub version: String,
    pub experiment: String,
    /// `running`, `complete`, `not_converged` or `failed`
    pub status: String,
    pub error: Option<String>,
    pub config: RunConfig,
    /// Verbatim configuration text, when the run came from a file.
    pub config_text: Option<String>,
    pub threads: usize,
    pub started_unix_s: f64,
    pub wall_clock_s: f64,
    pub stages: Vec<StageTiming>,
    pub checks: Vec<CheckRecord>,
    pub outputs: Vec<String>,
    /// Horizons, rounding records, convergence data and summary numbers.
    pub results: Value,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub manifest: RunManifest,
    pub out_dir: PathBuf,
}

/// Objects every experiment is built from, validated up front.
struct Prepared {
    grid: GridSpec,
    j: ScalarField,
    potential: PairPotential,
    bin_width: f64,
}

/// Maps a module precondition failure onto the config key it came from.
fn locate(cfg: &RunConfig, section: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => {
            let key = match (section, name) {
                (_, "n_samples") => "samples",
                ("fixed_point" | "kinetic", "delta") => "bin_width",
                (_, other) => other,
            };
            let key = format!("{section}.{key}");
            Error::Config {
                line: cfg.line_of(&key),
                key,
                message: reason,
            }
        }
        other => other,
    }
}

fn potential_of(spec: &PotentialSpec, grid: GridSpec) -> Result<PairPotential> {
    match *spec {
        PotentialSpec::Gaussian { amplitude, width, sigma } => PairPotential::gaussian_bump(grid, amplitude, width, sigma),
        PotentialSpec::Contact { amplitude, sigma } => PairPotential::contact(grid, amplitude, sigma),
        PotentialSpec::Zero => Ok(PairPotential::zero(grid)),
    }
}

fn evolution_config(cfg: &RunConfig) -> EvolutionConfig {
    let m = &cfg.micro;
    EvolutionConfig {
        eta: m.eta.unwrap_or(0.0),
        lambda: m.lambda,
        t_macro: m.t_macro,
        scaling: m.scaling,
        dt: m.dt,
        n_samples: m.samples,
        checkpoints: m.checkpoints.clone(),
        picard_tol: m.picard_tol,
        picard_max_iter: m.picard_max_iter,
        seed: cfg.seed,
        max_steps: m.max_steps,
    }
}

fn kinetic_spec(cfg: &RunConfig, bin_width: f64) -> KineticScalingSpec {
    KineticScalingSpec {
        base: evolution_config(cfg),
        etas: cfg.micro.eta_list.clone(),
        lambda_coeff: cfg.micro.lambda_coeff,
        delta: bin_width,
        pairs: cfg.pairs.clone(),
    }
}

fn stationarity_spec(cfg: &RunConfig) -> StationaritySpec {
    StationaritySpec {
        base: evolution_config(cfg),
        lambdas: cfg.micro.lambda_list.clone(),
        delta_exp: cfg.micro.delta.unwrap_or(0.0),
        control_rows: cfg.micro.control_rows.clone(),
    }
}

fn fixed_point_config(cfg: &RunConfig) -> FixedPointConfig {
    let f = &cfg.fixed_point;
    FixedPointConfig {
        damping: f.damping,
        tol: f.tol,
        max_iter: f.max_iter,
        delta: f.bin_width,
    }
}

/// Checks every module precondition the chosen experiment will hit.
fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let grid = make_grid(cfg.grid_side).map_err(|e| locate(cfg, "grid", e))?;
    let j = match &cfg.initial {
        InitialSpec::Family(kind) => initial_occupation(kind, grid).map_err(|e| locate(cfg, "initial", e))?,
        InitialSpec::File(path) => {
            let f = read_field_csv(path)?;
            if f.grid() != grid {
                return Err(Error::GridMismatch(format!(
                    "{} holds an L = {} field, config has L = {}",
                    path.display(),
                    f.grid().side(),
                    grid.side()
                )));
            }
            if f.min() < 0.0 || f.max() > 1.0 {
                return Err(Error::invalid("file", "initial occupation must lie in [0, 1]"));
            }
            f
        }
    };
    let potential = potential_of(&cfg.potential, grid).map_err(|e| locate(cfg, "potential", e))?;
    let bin_width = cfg.kinetic.bin_width.unwrap_or_else(|| default_bin_width(&dispersion(grid)));
    let check = |r: Result<()>| r.map_err(|e| locate(cfg, "micro", e));
    match cfg.experiment {
        ExperimentKind::Micro => check(evolution_config(cfg).validate())?,
        ExperimentKind::Boltzmann => {
            let shells = ShellOperator::from_dispersion(&dispersion(grid), bin_width).map_err(|e| locate(cfg, "kinetic", e))?;
            let t = cfg.kinetic.t_macro;
            if !(t >= 0.0 && t.is_finite()) {
                return Err(locate(cfg, "kinetic", Error::invalid("T", format!("must be finite and >= 0, got {t}"))));
            }
            if cfg.kinetic.method == KineticMethod::Rk4 && cfg.kinetic.rk4_dt > 0.1 / shells.max_rate() {
                return Err(locate(
                    cfg,
                    "kinetic",
                    Error::invalid("rk4_dt", format!("must be <= 0.1 / max(m) = {}", 0.1 / shells.max_rate())),
                ));
            }
        }
        ExperimentKind::CompareTheorem1 => {
            let spec = kinetic_spec(cfg, bin_width);
            ShellOperator::from_dispersion(&dispersion(grid), bin_width).map_err(|e| locate(cfg, "kinetic", e))?;
            if !(0.0..=1.0).contains(&spec.lambda_coeff) {
                return Err(locate(cfg, "micro", Error::invalid("lambda_coeff", "must lie in [0, 1]")));
            }
            for &eta in &spec.etas {
                check(
                    EvolutionConfig {
                        eta,
                        lambda: spec.lambda_coeff * eta * eta,
                        scaling: Scaling::Eta2,
                        checkpoints: vec![],
                        ..spec.base.clone()
                    }
                    .validate(),
                )?;
            }
        }
        ExperimentKind::StationarityTheorem2 => {
            let spec = stationarity_spec(cfg);
            if !(spec.delta_exp > 0.0) {
                return Err(locate(cfg, "micro", Error::invalid("delta", "must be > 0")));
            }
            let rows = spec
                .lambdas
                .iter()
                .map(|&l| (l, l.powf(0.5 * (1.0 + spec.delta_exp))))
                .chain(spec.control_rows.iter().copied());
            for (lambda, eta) in rows {
                check(
                    EvolutionConfig {
                        eta,
                        lambda,
                        scaling: Scaling::Lambda,
                        checkpoints: vec![],
                        ..spec.base.clone()
                    }
                    .validate(),
                )?;
            }
        }
        ExperimentKind::FixedPoint => fixed_point_config(cfg).validate().map_err(|e| locate(cfg, "fixed_point", e))?,
        ExperimentKind::Graphs => {
            if cfg.max_order > MAX_DICHOTOMY_ORDER {
                return Err(locate(
                    cfg,
                    "graphs",
                    Error::invalid("max_order", format!("must be <= {MAX_DICHOTOMY_ORDER}, got {}", cfg.max_order)),
                ));
            }
        }
        ExperimentKind::Diagnostics => {
            let d = &cfg.diagnostics;
            if d.n_mc < 10_000 && !d.epsilons_2.is_empty() {
                return Err(locate(cfg, "diagnostics", Error::invalid("n_mc", "must be >= 10000")));
            }
            if d.epsilons_1.iter().chain(&d.epsilons_2).any(|&e| !(e > 0.0)) {
                return Err(locate(cfg, "diagnostics", Error::invalid("epsilons_1", "entries must be > 0")));
            }
        }
    }
    Ok(Prepared {
        grid,
        j,
        potential,
        bin_width,
    })
}

struct Execution {
    converged: bool,
    checks: Vec<CheckRecord>,
    results: Value,
    stages: Vec<StageTiming>,
}

fn stage<T>(stages: &mut Vec<StageTiming>, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f()?;
    stages.push(StageTiming {
        name: name.into(),
        seconds: start.elapsed().as_secs_f64(),
    });
    Ok(out)
}

fn check(name: &str, ok: bool, warn_only: bool, detail: String) -> CheckRecord {
    CheckRecord {
        name: name.into(),
        status: if ok {
            "PASS"
        } else if warn_only {
            "WARN"
        } else {
            "FAIL"
        }
        .into(),
        detail,
    }
}

fn kinetic_comparison_csv(t: &ComparisonTable) -> String {
    let mut s = String::from(
        "eta,lambda,steps,t_macro,pair,micro,micro_se,kinetic,weak_error,sup_error,sup_error_se,reference_sup,picard_iterations,picard_residual,converged,label\n",
    );
    for r in &t.rows {
        for w in &r.weak {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                fmt_f64(r.eta),
                fmt_f64(r.lambda),
                r.steps,
                fmt_f64(r.t_macro),
                w.pair,
                fmt_f64(w.micro),
                fmt_f64(w.micro_se),
                fmt_f64(w.kinetic),
                fmt_f64(w.error),
                fmt_f64(r.sup_error),
                fmt_f64(r.sup_error_se),
                fmt_f64(r.reference_sup),
                r.picard_iterations,
                fmt_f64(r.picard_residual),
                r.converged,
                r.label
            );
        }
    }
    s
}

fn stationarity_csv(t: &ComparisonTable) -> String {
    let mut s = String::from(
        "lambda,eta,steps,t_macro,deviation,deviation_se,reference_sup,in_regime,picard_iterations,picard_residual,converged,label\n",
    );
    for r in &t.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(r.lambda),
            fmt_f64(r.eta),
            r.steps,
            fmt_f64(r.t_macro),
            fmt_f64(r.sup_error),
            fmt_f64(r.sup_error_se),
            fmt_f64(r.reference_sup),
            r.in_regime,
            r.picard_iterations,
            fmt_f64(r.picard_residual),
            r.converged,
            r.label
        );
    }
    s
}

fn execute(cfg: &RunConfig, p: &Prepared, out: &mut OutputSet) -> Result<Execution> {
    let mut stages = Vec::new();
    let mut checks = Vec::new();
    let grid = p.grid;
    let (converged, results) = match cfg.experiment {
        ExperimentKind::Micro => {
            let ecfg = evolution_config(cfg);
            let run = stage(&mut stages, "evolve", || self_consistent_evolve(&p.j, &ecfg, &p.potential))?;
            stage(&mut stages, "write", || {
                out.write("initial.csv", &field_csv(&p.j))?;
                for (c, (mu, se)) in run.trajectory.mu.iter().zip(&run.trajectory.std_error).enumerate() {
                    out.write(&format!("occupation_{c}.csv"), &field_csv(mu))?;
                    out.write(&format!("occupation_se_{c}.csv"), &field_csv(se))?;
                }
                Ok(())
            })?;
            let mass0 = p.j.mean();
            let drift = run.trajectory.mu.iter().map(|m| (m.mean() - mass0).abs()).fold(0.0, f64::max);
            checks.push(check("mass_conservation", drift <= 1e-10 * mass0.abs().max(1e-300), false, format!("max drift {drift:e}")));
            let in_regime = cfg.micro.delta.map(|d| ecfg.eta * ecfg.eta <= ecfg.lambda.powf(1.0 + d) * (1.0 + 1e-12));
            (
                run.picard.converged,
                json!({
                    "horizon": run.horizon,
                    "checkpoints": run.trajectory.checkpoints,
                    "picard": run.picard,
                    "kappa_sup": run.kappa.sup_norm(),
                    "kappa_bound": p.potential.kappa_bound(),
                    "in_regime": in_regime,
                }),
            )
        }
        ExperimentKind::Boltzmann => {
            let shells = ShellOperator::from_dispersion(&dispersion(grid), p.bin_width)?;
            let t = cfg.kinetic.t_macro;
            let f = stage(&mut stages, "solve", || match cfg.kinetic.method {
                KineticMethod::Explicit => Ok(solve_explicit(&p.j, t, &shells)?.f),
                KineticMethod::Rk4 => Ok(solve_rk4(&p.j, t, cfg.kinetic.rk4_dt, &shells)?.f),
                KineticMethod::Duhamel => {
                    let s = duhamel_series(&p.j, t, cfg.kinetic.series_order, &shells)?;
                    Ok(s.partial_sums.last().expect("order 0 present").clone())
                }
            })?;
            stage(&mut stages, "write", || {
                out.write("initial.csv", &field_csv(&p.j))?;
                out.write("boltzmann.csv", &field_csv(&f))?;
                out.write("rate.csv", &field_csv(shells.rate()))?;
                Ok(())
            })?;
            (
                true,
                json!({
                    "T": t,
                    "bin_width": p.bin_width,
                    "n_bins": shells.binning().n_bins(),
                    "max_rate": shells.max_rate(),
                    "mass_drift": (f.mean() - p.j.mean()).abs(),
                }),
            )
        }
        ExperimentKind::CompareTheorem1 => {
            let spec = kinetic_spec(cfg, p.bin_width);
            let table = stage(&mut stages, "experiment", || kinetic_scaling_experiment(&spec, &p.j, &p.potential))?;
            stage(&mut stages, "write", || {
                out.write("comparison.csv", &kinetic_comparison_csv(&table))?;
                for (i, f) in table.fields.iter().enumerate() {
                    out.write(&format!("micro_{i}.csv"), &field_csv(&f.mu))?;
                    out.write(&format!("micro_se_{i}.csv"), &field_csv(&f.mu_se))?;
                    out.write(&format!("kinetic_{i}.csv"), &field_csv(&f.reference))?;
                }
                Ok(())
            })?;
            for (k, (f, g)) in cfg.pairs.iter().enumerate() {
                let errs: Vec<String> = table.rows.iter().map(|r| format!("{:.3e}", r.weak[k].error)).collect();
                checks.push(check(
                    &format!("weak_error_decreasing[{}*{}]", f.label(), g.label()),
                    table.weak_error_decreasing(k),
                    true,
                    format!("errors {}; Monte Carlo noise can reorder close rows", errs.join(", ")),
                ));
            }
            (table.all_converged(), json!({ "rows": table.rows, "bin_width": p.bin_width }))
        }
        ExperimentKind::StationarityTheorem2 => {
            let spec = stationarity_spec(cfg);
            let table = stage(&mut stages, "experiment", || stationarity_experiment(&spec, &p.j, &p.potential))?;
            stage(&mut stages, "write", || {
                out.write("comparison.csv", &stationarity_csv(&table))?;
                for (i, f) in table.fields.iter().enumerate() {
                    out.write(&format!("micro_{i}.csv"), &field_csv(&f.mu))?;
                    out.write(&format!("micro_se_{i}.csv"), &field_csv(&f.mu_se))?;
                }
                Ok(())
            })?;
            let regime: Vec<_> = table.rows.iter().filter(|r| r.in_regime).collect();
            let ok = regime.windows(2).all(|w| w[1].sup_error < w[0].sup_error);
            checks.push(check(
                "deviation_decreasing",
                ok,
                true,
                regime.iter().map(|r| format!("{:.3e}", r.sup_error)).collect::<Vec<_>>().join(", "),
            ));
            (table.all_converged(), json!({ "rows": table.rows }))
        }
        ExperimentKind::FixedPoint => {
            let fcfg = fixed_point_config(cfg);
            let start = match cfg.fixed_point.start {
                FixedPointStart::Initial => p.j.clone(),
                FixedPointStart::ShellAverage => {
                    ShellOperator::from_dispersion(&dispersion(grid), fcfg.delta)?.average(&p.j)?
                }
            };
            let lambda = cfg.fixed_point.lambda;
            let r = stage(&mut stages, "iterate", || stationary_fixed_point(&start, lambda, &p.potential, &fcfg))?;
            stage(&mut stages, "write", || {
                out.write("fixed_point.csv", &field_csv(&r.f))?;
                out.write("etilde.csv", &field_csv(&r.dispersion.etilde))?;
                Ok(())
            })?;
            (
                r.converged,
                json!({
                    "lambda": lambda,
                    "iterations": r.iterations,
                    "residual": r.residual,
                    "history": r.history,
                    "converged": r.converged,
                }),
            )
        }
        ExperimentKind::Graphs => {
            let report = stage(&mut stages, "dichotomy", || verify_dichotomy(cfg.max_order))?;
            stage(&mut stages, "write", || {
                let mut s = String::from(CSV_HEADER);
                s.push('\n');
                for nb in 1..=cfg.max_order {
                    for n in 0..=2 * nb {
                        for g in enumerate(n, 2 * nb - n)? {
                            s.push_str(&crate::graphs::csv_row(&g, &classify(&g)));
                            s.push('\n');
                        }
                    }
                }
                out.write("graphs.csv", &s)?;
                Ok(())
            })?;
            checks.push(check(
                "dichotomy",
                report.total_violations() == 0,
                false,
                format!("{} graphs scanned", report.total_graphs()),
            ));
            (true, json!({ "splits": report.splits }))
        }
        ExperimentKind::Diagnostics => {
            let d = &cfg.diagnostics;
            let rd = renormalized_dispersion(&p.j, d.lambda, &p.potential)?;
            let report = stage(&mut stages, "diagnostics", || {
                diagnostics_report(&rd.etilde, &d.epsilons_1, &d.epsilons_2, d.n_mc, cfg.seed)
            })?;
            stage(&mut stages, "write", || {
                let mut s = String::from("epsilon,sup_value,argmax_alpha,sup_alpha_integral,ratio\n");
                for r in &report.rows_1 {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{}",
                        fmt_f64(r.epsilon),
                        fmt_f64(r.sup_value),
                        fmt_f64(r.argmax_alpha),
                        fmt_f64(r.sup_alpha_integral),
                        fmt_f64(r.ratio)
                    );
                }
                out.write("diagnostics_1.csv", &s)?;
                let mut s = String::from("epsilon,sup_estimate,samples\n");
                for r in &report.rows_2 {
                    let _ = writeln!(s, "{},{},{}", fmt_f64(r.epsilon), fmt_f64(r.sup_estimate), r.samples);
                }
                out.write("diagnostics_2.csv", &s)?;
                out.write("etilde.csv", &field_csv(&rd.etilde))?;
                Ok(())
            })?;
            (true, serde_json::to_value(&report).map_err(|e| Error::Compute(e.to_string()))?)
        }
    };
    Ok(Execution {
        converged,
        checks,
        results,
        stages,
    })
}

fn write_manifest(out: &mut OutputSet, m: &RunManifest) -> Result<()> {
    let text = serde_json::to_string_pretty(m).map_err(|e| Error::Compute(format!("manifest: {e}")))?;
    io::atomic_write(&out.dir().join("manifest.json"), format!("{text}\n").as_bytes())
}

/// Validates, runs and persists one experiment under `out_dir`.
pub fn run(cfg: &RunConfig, config_text: Option<&str>, out_dir: &Path) -> Result<RunOutcome> {
    let prepared = prepare(cfg)?;
    let mut out = OutputSet::new(out_dir)?;
    let started = Instant::now();
    let mut manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").into(),
        experiment: cfg.experiment.name().into(),
        status: "running".into(),
        error: None,
        config: cfg.clone(),
        config_text: config_text.map(str::to_string),
        threads: rayon::current_num_threads(),
        started_unix_s: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0),
        wall_clock_s: 0.0,
        stages: Vec::new(),
        checks: Vec::new(),
        outputs: Vec::new(),
        results: Value::Null,
    };
    write_manifest(&mut out, &manifest)?;

    match execute(cfg, &prepared, &mut out) {
        Ok(exec) => {
            manifest.status = if exec.converged { "complete" } else { "not_converged" }.into();
            manifest.stages = exec.stages;
            manifest.checks = exec.checks;
            manifest.results = exec.results;
            manifest.outputs = out.names();
            manifest.wall_clock_s = started.elapsed().as_secs_f64();
            write_manifest(&mut out, &manifest)?;
            let failed = manifest.checks.iter().any(|c| c.status == "FAIL");
            let exit_code = if failed {
                2
            } else if exec.converged {
                0
            } else {
                EXIT_NOT_CONVERGED
            };
            Ok(RunOutcome {
                exit_code,
                manifest,
                out_dir: out_dir.to_path_buf(),
            })
        }
        Err(e) => {
            out.remove_all();
            manifest.status = "failed".into();
            manifest.error = Some(e.to_string());
            manifest.wall_clock_s = started.elapsed().as_secs_f64();
            write_manifest(&mut out, &manifest)?;
            Err(e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_text(text: &str) -> (tempfile::TempDir, Result<RunOutcome>) {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse_config_str(text).unwrap();
        let r = run(&cfg, Some(text), dir.path());
        (dir, r)
    }

    #[test]
    fn graphs_run_writes_all_pairings() {
        let (dir, r) = run_text("experiment = graphs\n[grid]\nL = 2\n[graphs]\nmax_order = 3\n");
        let r = r.unwrap();
        assert_eq!(r.exit_code, 0);
        assert_eq!(r.manifest.status, "complete");
        assert_eq!(r.manifest.checks[0].status, "PASS");
        let csv = std::fs::read_to_string(dir.path().join("graphs.csv")).unwrap();
        // 3 splits × 1 + 5 × 3 + 7 × 15
        assert_eq!(csv.lines().count() - 1, 3 + 15 + 105);
        let m: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(m["status"], "complete");
    }

    #[test]
    fn boltzmann_zero_time_reproduces_the_input_file() {
        let dir = tempfile::tempdir().unwrap();
        let g = make_grid(4).unwrap();
        let j = ScalarField::from_fn(g, |p| ((p * 37) % 11) as f64 / 11.0);
        let input = dir.path().join("j.csv");
        std::fs::write(&input, field_csv(&j)).unwrap();
        let text = format!(
            "experiment = boltzmann\n[grid]\nL = 4\n[initial]\nkind = file\nfile = {}\n[kinetic]\nT = 0\nbin_width = 0.5\n",
            input.display()
        );
        let cfg = parse_config_str(&text).unwrap();
        let out = dir.path().join("out");
        run(&cfg, Some(&text), &out).unwrap();
        assert_eq!(std::fs::read(&input).unwrap(), std::fs::read(out.join("boltzmann.csv")).unwrap());
    }

    #[test]
    fn non_convergence_exits_with_three() {
        let (dir, r) = run_text(
            "experiment = fixed-point\n[grid]\nL = 8\n[initial]\nkind = cosine_bump\n[fixed_point]\nlambda = 0.1\nmax_iter = 1\nbin_width = 0.5\n",
        );
        let r = r.unwrap();
        assert_eq!(r.exit_code, EXIT_NOT_CONVERGED);
        assert_eq!(r.manifest.status, "not_converged");
        assert!(dir.path().join("fixed_point.csv").exists());
    }

    #[test]
    fn validation_happens_before_any_output() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse_config_str("experiment = micro\n[grid]\nL = 4\n[micro]\neta = 0.5\ndt = 0.5\n").unwrap();
        let e = run(&cfg, None, dir.path()).unwrap_err();
        assert!(matches!(e, Error::Config { line: 6, .. }), "{e}");
        assert_eq!(e.exit_code(), 1);
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }
}
