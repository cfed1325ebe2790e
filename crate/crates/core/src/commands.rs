//! Subcommand implementations behind the CLI: model condition checks, single
//! runs, stopping-time sweeps and convergence studies. Each returns a process
//! exit code: 0 ok, 1 usage, 2 condition failure, 3 integrator failure,
//! 4 no extinction, 5 non-convergence.

use std::path::Path;

use crate::config::{parse_config, ExperimentConfig};
use crate::diagnostics;
use crate::error::{Error, Result};
use crate::integrator::{run_with_partial, IntegratorConfig, StoppingEvent, TrajectoryRecord};
use crate::io;
use crate::viscosity::{self, check_conditions, default_condition_grid, ViscosityModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONDITION: i32 = 2;
pub const EXIT_INTEGRATOR: i32 = 3;
pub const EXIT_NO_EXTINCTION: i32 = 4;
pub const EXIT_NON_CONVERGENCE: i32 = 5;

/// Near-zero growth exponent used by the condition checker.
const NEAR_ZERO_BETA: f64 = 0.25;

fn fail_usage(msg: &str) -> i32 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

/// Check conditions (C1)-(C4) for named catalog models and/or a custom
/// tabulated model, printing a pass/fail table.
pub fn cmd_models(names: &[String], table: Option<&Path>) -> i32 {
    let mut targets: Vec<(String, ViscosityModel)> = Vec::new();
    let expanded: Vec<String> = if names.len() == 1 && names[0] == "all" {
        viscosity::catalog().iter().map(|(n, _)| n.to_string()).collect()
    } else {
        names.to_vec()
    };
    for name in &expanded {
        match viscosity::catalog_model(name) {
            Some(m) => targets.push((name.clone(), m)),
            None => return fail_usage(&format!("unknown model `{name}`")),
        }
    }
    if let Some(path) = table {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => return fail_usage(&format!("cannot read {}: {e}", path.display())),
        };
        let points = match io::parse_viscosity_table(&text) {
            Ok(p) => p,
            Err(e) => return fail_usage(&e.to_string()),
        };
        match ViscosityModel::from_table(&points) {
            Ok(m) => targets.push((format!("table:{}", path.display()), m)),
            Err(e) => {
                println!("table:{}  REJECTED  {e}", path.display());
                return EXIT_CONDITION;
            }
        }
    }
    if targets.is_empty() {
        return fail_usage("no models requested");
    }

    let grid = default_condition_grid();
    let mut any_failed = false;
    println!("{:<24} {:>4} {:>4} {:>4} {:>4} {:>9}  result", "model", "C1", "C2", "C3", "C4", "near-zero");
    for (name, model) in &targets {
        let rep = check_conditions(model, &grid, NEAR_ZERO_BETA);
        let mark = |ok: bool| if ok { "ok" } else { "FAIL" };
        println!(
            "{:<24} {:>4} {:>4} {:>4} {:>4} {:>9}  {}",
            name,
            mark(rep.c1),
            mark(rep.c2),
            mark(rep.c3),
            mark(rep.c4),
            mark(rep.near_zero),
            if rep.all_passed() { "PASS" } else { "FAIL" }
        );
        if !rep.all_passed() {
            any_failed = true;
            for w in rep.witnesses.iter().take(3) {
                println!("  witness: {} at t={} magnitude={}", w.condition, w.t, w.magnitude);
            }
        }
    }
    if any_failed {
        EXIT_CONDITION
    } else {
        EXIT_OK
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

fn write_run_outputs(
    out: &Path,
    cfg: &ExperimentConfig,
    traj: &TrajectoryRecord,
    event: Option<&StoppingEvent>,
) -> Result<()> {
    io::write_text(&out.join("resolved.cfg"), &cfg.echo())?;
    io::write_text(&out.join("trajectory.csv"), &io::trajectory_csv(traj))?;
    if !traj.is_empty() {
        io::write_text(&out.join("snapshot_initial.csv"), &io::snapshot_csv(&traj.state_at(0)))?;
        io::write_text(
            &out.join("snapshot_final.csv"),
            &io::snapshot_csv(&traj.state_at(traj.len() - 1)),
        )?;
    }
    io::write_text(&out.join("events.log"), &io::event_log(event))?;
    Ok(())
}

/// Execute one simulation described by a config file, writing the trajectory,
/// snapshots, energy report and event log under `out`.
pub fn cmd_run(config: &Path, out: &Path) -> i32 {
    let cfg = match load_config(config) {
        Ok(c) => c,
        Err(e) => return fail_usage(&e.to_string()),
    };
    let basis = match cfg.build_basis() {
        Ok(b) => b,
        Err(e) => return fail_usage(&e.to_string()),
    };
    let u0 = match cfg.build_initial(&basis) {
        Ok(u) => u,
        Err(e) => return fail_usage(&e.to_string()),
    };
    let u0_norm = crate::basis::norms(&u0).l2;

    let (traj, event, err) =
        run_with_partial(&u0, &cfg.integrator, &cfg.model, cfg.eps, &cfg.forcing);
    if let Some(e) = &err {
        // preserve whatever was recorded, flagged by a FAILED marker
        let _ = write_run_outputs(out, &cfg, &traj, event.as_ref());
        let _ = io::write_text(&out.join("FAILED"), &format!("{e}\n"));
        eprintln!("error: integrator failed: {e}");
        return EXIT_INTEGRATOR;
    }
    if let Err(e) = write_run_outputs(out, &cfg, &traj, event.as_ref()) {
        eprintln!("error: {e}");
        return EXIT_INTEGRATOR;
    }

    match diagnostics::energy_inequality_check(&traj, u0_norm, &cfg.forcing) {
        Ok(report) => {
            let body = format!(
                "worst_inequality_margin = {}\nbalance_residual_max = {}\n",
                report.worst_inequality_margin, report.balance_residual_max
            );
            if io::write_text(&out.join("energy.txt"), &body).is_err() {
                return EXIT_INTEGRATOR;
            }
        }
        Err(e) => {
            eprintln!("error: energy report failed: {e}");
            return EXIT_INTEGRATOR;
        }
    }
    EXIT_OK
}

/// Stopping-time sweep over a regularization list, with decay fit, bound
/// check and eps -> 0 extrapolation.
pub fn cmd_stoptime(config: &Path, out: &Path, alpha: f64, eps_list: &[f64]) -> i32 {
    let cfg = match load_config(config) {
        Ok(c) => c,
        Err(e) => return fail_usage(&e.to_string()),
    };
    let alpha_max = 4.0 / (cfg.n as f64 + 2.0);
    if !(alpha > 0.0 && alpha <= alpha_max) {
        return fail_usage(&format!(
            "alpha must lie in (0, {alpha_max}] for N = {}, got {alpha}",
            cfg.n
        ));
    }
    if !cfg.forcing.is_empty() && cfg.forcing.t1 >= cfg.integrator.t_end {
        return fail_usage("forcing cutoff t1 must lie before t_end");
    }
    let eps_list: Vec<f64> = if eps_list.is_empty() { vec![cfg.eps] } else { eps_list.to_vec() };
    if eps_list.iter().any(|&e| e <= 0.0) {
        return fail_usage("eps values must be positive");
    }

    let basis = match cfg.build_basis() {
        Ok(b) => b,
        Err(e) => return fail_usage(&e.to_string()),
    };
    let u0 = match cfg.build_initial(&basis) {
        Ok(u) => u,
        Err(e) => return fail_usage(&e.to_string()),
    };
    // dense uniform records so the decay window has enough points to fit
    let mut icfg = cfg.integrator.clone();
    let dense = icfg.t_end / 400.0;
    icfg.record_uniform = Some(match icfg.record_uniform {
        Some(h) => h.min(dense),
        None => dense,
    });

    let results = crate::sweep::pmap(&eps_list, |&eps| {
        crate::integrator::run(&u0, &icfg, &cfg.model, eps, &cfg.forcing)
    });
    let mut pairs = Vec::new();
    let mut finest: Option<&TrajectoryRecord> = None;
    let mut finest_t0 = 0.0;
    for (eps, res) in eps_list.iter().zip(&results) {
        match res {
            Ok((traj, event)) => match crate::integrator::detect_stopping(
                traj,
                icfg.stop_tol,
                Some(alpha),
            )
            .or(event.clone())
            {
                Some(ev) => {
                    pairs.push((*eps, ev.t0));
                    finest = Some(traj);
                    finest_t0 = ev.t0;
                }
                None => {
                    eprintln!("error: run at eps={eps} did not extinguish by t={}", icfg.t_end);
                    return EXIT_NO_EXTINCTION;
                }
            },
            Err(e) => {
                eprintln!("error: integrator failed at eps={eps}: {e}");
                return EXIT_INTEGRATOR;
            }
        }
    }
    let finest = finest.expect("at least one eps");

    let window = (cfg.forcing.t1, 0.95 * finest_t0);
    let fit = match diagnostics::alpha_decay_fit(finest, alpha, window) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: decay fit failed: {e}");
            return EXIT_NO_EXTINCTION;
        }
    };
    let mut report =
        match diagnostics::stopping_bound(finest, cfg.forcing.t1, &fit, Some(finest_t0)) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: stopping bound failed: {e}");
                return EXIT_NO_EXTINCTION;
            }
        };
    report.eps_extrapolation = pairs;
    report.t0_extrapolated = diagnostics::extrapolate_t0(&report.eps_extrapolation);

    let cfg_echo = cfg.echo();
    let files = [
        io::write_text(&out.join("resolved.cfg"), &cfg_echo),
        io::write_text(&out.join("stopping.csv"), &io::stopping_report_csv(&report)),
        io::write_text(&out.join("stopping.txt"), &io::stopping_report_summary(&report)),
    ];
    if files.iter().any(|r| r.is_err()) {
        return EXIT_INTEGRATOR;
    }
    print!("{}", io::stopping_report_summary(&report));
    EXIT_OK
}

/// Double-limit convergence study over (eps, m) refinement lists.
pub fn cmd_converge(config: &Path, out: &Path, eps_list: &[f64], m_list: &[i64]) -> i32 {
    let cfg = match load_config(config) {
        Ok(c) => c,
        Err(e) => return fail_usage(&e.to_string()),
    };
    if eps_list.len() < 3 || m_list.len() < 3 {
        return fail_usage("converge needs at least 3 eps values and 3 m values");
    }

    // express the initial condition as basis-independent modal data on the
    // coarsest basis of the study
    let coarse = match crate::basis::build_basis(cfg.n, m_list[0], 3 * m_list[0] as usize) {
        Ok(b) => std::sync::Arc::new(b),
        Err(e) => return fail_usage(&e.to_string()),
    };
    let u0 = match cfg.build_initial(&coarse) {
        Ok(u) => u,
        Err(e) => return fail_usage(&e.to_string()),
    };
    let u0_modes: diagnostics::ModalState = coarse
        .modes
        .iter()
        .zip(&u0.d)
        .filter(|(_, &d)| d != 0.0)
        .map(|(m, &d)| (m.xi, m.phase, m.dir_index, d))
        .collect();

    let mut icfg: IntegratorConfig = cfg.integrator.clone();
    if icfg.record_uniform.is_none() {
        icfg.record_uniform = Some(icfg.t_end / 50.0);
    }

    let table = match diagnostics::convergence_study(
        cfg.n,
        eps_list,
        m_list,
        &u0_modes,
        &cfg.model,
        &cfg.forcing,
        &icfg,
    ) {
        Ok(t) => t,
        Err(Error::Usage(m)) => return fail_usage(&m),
        Err(e) => {
            eprintln!("error: convergence study failed: {e}");
            return match e {
                Error::Config(_) | Error::Parameter(_) | Error::Validation { .. } => EXIT_USAGE,
                _ => EXIT_INTEGRATOR,
            };
        }
    };

    let files = [
        io::write_text(&out.join("resolved.cfg"), &cfg.echo()),
        io::write_text(&out.join("convergence.csv"), &io::convergence_csv(&table)),
    ];
    if files.iter().any(|r| r.is_err()) {
        return EXIT_INTEGRATOR;
    }
    print!("{}", io::convergence_csv(&table));
    if table.is_monotone() {
        EXIT_OK
    } else {
        eprintln!("error: differences are not strictly decreasing on both axes");
        EXIT_NON_CONVERGENCE
    }
}
