//! Deterministic file output: trajectory/snapshot CSV, event logs, report
//! summaries and the tabulated-viscosity loader. All floats use Rust's
//! shortest round-trip formatting; files are UTF-8 with LF endings.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use crate::basis::{CoefficientVector, Phase};
use crate::diagnostics::StoppingReport;
use crate::error::{Error, Result};
use crate::integrator::{StoppingEvent, TrajectoryRecord};

/// Render the per-record scalar series as CSV.
pub fn trajectory_csv(traj: &TrajectoryRecord) -> String {
    let mut s = String::from(
        "t,l2,h1,dissipation,j_eps_value,jprime_pairing,forcing_power,l4\n",
    );
    for (t, r) in traj.times.iter().zip(&traj.scalars) {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            t, r.l2, r.h1, r.dissipation, r.j_eps_value, r.jprime_pairing, r.forcing_power, r.l4
        );
    }
    s
}

/// Render one coefficient snapshot as CSV (bit-exact reload supported).
pub fn snapshot_csv(c: &CoefficientVector) -> String {
    let b = &c.basis;
    let mut s = format!("N={},m_max={},grid_size={},t={}\n", b.n, b.m_max, b.grid_size, c.t);
    s.push_str("xi1,xi2,xi3,phase,dir,d\n");
    for (m, d) in b.modes.iter().zip(&c.d) {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            m.xi[0],
            m.xi[1],
            m.xi[2],
            m.phase.name(),
            m.dir_index,
            d
        );
    }
    s
}

/// Reload a snapshot written by [`snapshot_csv`].
pub fn parse_snapshot(text: &str) -> Result<CoefficientVector> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty snapshot".into() })?;
    let mut n = None;
    let mut m_max = None;
    let mut grid = None;
    let mut t = None;
    for tok in header.split(',') {
        let (k, v) = tok.split_once('=').ok_or(Error::Parse {
            line: 1,
            msg: format!("bad header field `{tok}`"),
        })?;
        let bad = || Error::Parse { line: 1, msg: format!("bad header value `{v}`") };
        match k {
            "N" => n = Some(v.parse::<usize>().map_err(|_| bad())?),
            "m_max" => m_max = Some(v.parse::<i64>().map_err(|_| bad())?),
            "grid_size" => grid = Some(v.parse::<usize>().map_err(|_| bad())?),
            "t" => t = Some(v.parse::<f64>().map_err(|_| bad())?),
            other => {
                return Err(Error::Parse { line: 1, msg: format!("unknown header field `{other}`") })
            }
        }
    }
    let (n, m_max, grid, t) = match (n, m_max, grid, t) {
        (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
        _ => return Err(Error::Parse { line: 1, msg: "incomplete snapshot header".into() }),
    };
    let basis = Arc::new(crate::basis::build_basis(n, m_max, grid)?);
    let mut d = vec![0.0; basis.len()];
    let mut seen = 0usize;
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line_no == 2 {
            continue; // column header
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 6 fields, got {}", fields.len()),
            });
        }
        let parse_i = |s: &str| -> Result<i64> {
            s.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad integer `{s}`"),
            })
        };
        let xi = [parse_i(fields[0])?, parse_i(fields[1])?, parse_i(fields[2])?];
        let phase = match fields[3] {
            "cos" => Phase::Cos,
            "sin" => Phase::Sin,
            other => {
                return Err(Error::Parse { line: line_no, msg: format!("bad phase `{other}`") })
            }
        };
        let dir = parse_i(fields[4])? as u8;
        let value: f64 = fields[5].parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("bad coefficient `{}`", fields[5]),
        })?;
        let i = basis.find_mode(&xi[..n], phase, dir).ok_or(Error::Parse {
            line: line_no,
            msg: format!("mode {xi:?} not in the reconstructed basis"),
        })?;
        d[i] = value;
        seen += 1;
    }
    if seen != basis.len() {
        return Err(Error::Shape(format!(
            "snapshot has {seen} rows, basis has {} modes",
            basis.len()
        )));
    }
    CoefficientVector::from_coeffs(basis, d, t)
}

/// Event-log body for a finished run.
pub fn event_log(event: Option<&StoppingEvent>) -> String {
    match event {
        Some(e) => format!("STOP T0={} norm={}\n", e.t0, e.attained_norm),
        None => String::from("END no extinction\n"),
    }
}

/// CSV body of a stopping report: the (eps, T0) extrapolation table.
pub fn stopping_report_csv(report: &StoppingReport) -> String {
    let mut s = String::from("eps,t0\n");
    for (eps, t0) in &report.eps_extrapolation {
        let _ = writeln!(s, "{eps},{t0}");
    }
    s
}

/// Plain-text summary block of a stopping report.
pub fn stopping_report_summary(report: &StoppingReport) -> String {
    let mut s = String::from("stopping-time report\n");
    let _ = writeln!(s, "alpha = {}", report.alpha);
    let _ = writeln!(
        s,
        "decay fit: slope = {}, intercept = {}, R2 = {}, records = {}",
        report.fit.slope, report.fit.intercept, report.fit.r2, report.fit.n_records
    );
    match report.t0_measured {
        Some(t0) => {
            let _ = writeln!(s, "T0 measured = {t0}");
        }
        None => s.push_str("T0 measured = none (no extinction)\n"),
    }
    let _ = writeln!(s, "T0 bound = {}", report.t0_bound);
    s.push_str("(eps, T0) table:\n");
    for (eps, t0) in &report.eps_extrapolation {
        let _ = writeln!(s, "  eps={eps}  T0={t0}");
    }
    match report.t0_extrapolated {
        Some(t0) => {
            let _ = writeln!(s, "extrapolated T0 (eps -> 0) = {t0}");
        }
        None => s.push_str("extrapolated T0 (eps -> 0) = n/a\n"),
    }
    s
}

/// CSV body of a convergence table: one row per pairwise distance.
pub fn convergence_csv(table: &crate::diagnostics::ConvergenceTable) -> String {
    let mut s = String::from("axis,fixed,coarse,fine,distance\n");
    for (j, col) in table.eps_axis.iter().enumerate() {
        for (i, d) in col.iter().enumerate() {
            let _ = writeln!(
                s,
                "eps,m={},{},{},{}",
                table.m_list[j],
                table.eps_list[i],
                table.eps_list[i + 1],
                d
            );
        }
    }
    for (i, row) in table.m_axis.iter().enumerate() {
        for (j, d) in row.iter().enumerate() {
            let _ = writeln!(
                s,
                "m,eps={},{},{},{}",
                table.eps_list[i],
                table.m_list[j],
                table.m_list[j + 1],
                d
            );
        }
    }
    s
}

/// Load a two-column (t, F) viscosity table from CSV text. A single header
/// line is allowed; abscissas must be strictly increasing and positive.
pub fn parse_viscosity_table(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (a, b) = line.split_once(',').ok_or(Error::Parse {
            line: line_no,
            msg: format!("expected `t,F`, got `{line}`"),
        })?;
        let (a, b) = (a.trim(), b.trim());
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(t), Ok(f)) => out.push((t, f)),
            _ if line_no == 1 => continue, // header row
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("non-numeric row `{line}`"),
                })
            }
        }
    }
    if out.len() < 2 {
        return Err(Error::Parse { line: 1, msg: "viscosity table needs at least 2 rows".into() });
    }
    for w in out.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::Parse {
                line: 1,
                msg: format!("abscissas must be strictly increasing ({} after {})", w[1].0, w[0].0),
            });
        }
    }
    Ok(out)
}

/// Write a file with LF endings, creating parent directories as needed.
pub fn write_text(path: &Path, body: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, body.as_bytes())?;
    Ok(())
}
