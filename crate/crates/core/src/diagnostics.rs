//! Post-processing checks on computed trajectories: the energy inequality and
//! discrete balance, dual-norm bounds on the viscous term, the
//! Gagliardo-Nirenberg pairing, the regularization gap, the energy-equality
//! scaling factor eta, and decay fits with stopping-time bounds.

use std::sync::Arc;

use crate::basis::{build_basis, BasisSpec, CoefficientVector};
use crate::error::{Error, Result};
use crate::integrator::{run, IntegratorConfig, TrajectoryRecord};
use crate::rhs::{deformation_magnitude, forcing_dual_norm_sq, j_eps, viscous_nonlinear_term, ForcingSpec};
use crate::viscosity::{eval_f, ViscosityModel};

/// Per-record solution of the energy-equality scalar equation.
#[derive(Debug, Clone, Copy)]
pub struct EtaRecord {
    pub t: f64,
    pub eta: f64,
    /// |psi(eta) - target| / (1 + |target|) after the solve.
    pub residual: f64,
    /// Whether [theta, 1] bracketed a sign change (false means clamped).
    pub in_bracket: bool,
}

#[derive(Debug, Clone)]
pub struct EnergyReport {
    /// min over records of RHS - LHS of the discrete energy inequality.
    pub worst_inequality_margin: f64,
    /// max over record intervals of the discrete balance residual.
    pub balance_residual_max: f64,
    pub eta_series: Vec<EtaRecord>,
}

/// Energy inequality along the trajectory:
/// l2(t)^2 + 1/2 int_0^t h1^2 <= 2 int_0^t |f|_{H^-1}^2 + u0_norm^2,
/// with trapezoidal time quadrature and modal dual norms.
pub fn energy_inequality_check(
    traj: &TrajectoryRecord,
    u0_norm: f64,
    spec: &ForcingSpec,
) -> Result<EnergyReport> {
    if traj.is_empty() {
        return Err(Error::Shape("empty trajectory".into()));
    }
    let mut worst = f64::INFINITY;
    let mut balance_max: f64 = 0.0;
    let mut h1_int = 0.0;
    let mut dual_int = 0.0;
    let mut dual_prev = forcing_dual_norm_sq(traj.times[0], spec, &traj.basis)?;

    for k in 0..traj.len() {
        if k > 0 {
            let dt = traj.times[k] - traj.times[k - 1];
            let (a, b) = (&traj.scalars[k - 1], &traj.scalars[k]);
            h1_int += 0.5 * dt * (a.h1 * a.h1 + b.h1 * b.h1);
            let dual_k = forcing_dual_norm_sq(traj.times[k], spec, &traj.basis)?;
            dual_int += 0.5 * dt * (dual_prev + dual_k);
            dual_prev = dual_k;

            let half_delta = 0.5 * (b.l2 * b.l2 - a.l2 * a.l2);
            let ia = a.dissipation + a.jprime_pairing - a.forcing_power;
            let ib = b.dissipation + b.jprime_pairing - b.forcing_power;
            let residual = half_delta + 0.5 * dt * (ia + ib);
            balance_max = balance_max.max(residual.abs());
        }
        let l2 = traj.scalars[k].l2;
        let lhs = l2 * l2 + 0.5 * h1_int;
        let rhs = 2.0 * dual_int + u0_norm * u0_norm;
        worst = worst.min(rhs - lhs);
    }
    Ok(EnergyReport {
        worst_inequality_margin: worst,
        balance_residual_max: balance_max,
        eta_series: Vec::new(),
    })
}

/// L^{4/N}-in-time norm of the modal dual norm of the viscous term,
/// |j'_eps(u)|_{H^-1} = sqrt(sum g_i^2 / lambda_i).
pub fn jprime_bound_check(
    traj: &TrajectoryRecord,
    model: &ViscosityModel,
    eps: f64,
) -> Result<f64> {
    let n = traj.basis.n as f64;
    let p = 4.0 / n;
    let mut series = Vec::with_capacity(traj.len());
    for k in 0..traj.len() {
        let c = traj.state_at(k);
        let g = viscous_nonlinear_term(&c, model, eps)?;
        let dual_sq: f64 = g
            .iter()
            .zip(&traj.basis.modes)
            .map(|(&gi, m)| gi * gi / m.lambda)
            .sum();
        series.push(dual_sq.sqrt().powf(p));
    }
    let mut integral = 0.0;
    for k in 1..traj.len() {
        let dt = traj.times[k] - traj.times[k - 1];
        integral += 0.5 * dt * (series[k - 1] + series[k]);
    }
    Ok(integral.powf(1.0 / p))
}

/// l4^2 / (h1^{N/2} l2^{(4-N)/2}): the scale-invariant interpolation ratio.
pub fn gn_ratio(c: &CoefficientVector) -> Result<f64> {
    let nm = crate::basis::norms(c);
    if nm.l2 == 0.0 || nm.h1 == 0.0 {
        return Err(Error::Domain(
            "interpolation ratio is undefined on the zero state".into(),
        ));
    }
    let n = c.basis.n as f64;
    Ok(nm.l4 * nm.l4 / (nm.h1.powf(0.5 * n) * nm.l2.powf(0.5 * (4.0 - n))))
}

/// Regularization gap j(u) - j_eps(u) by grid quadrature of the potential.
pub fn j_gap(model: &ViscosityModel, c: &CoefficientVector, eps: f64) -> Result<f64> {
    let j0 = j_eps(c, model, 0.0)?;
    let je = j_eps(c, model, eps)?;
    Ok(j0 - je)
}

/// psi(eta) = (1/eta) <j'(eta u), eta u> = eta int F(eta |D(u)|) |D(u)|^2 dx,
/// the unregularized scaled pairing. Non-decreasing in eta by (C3).
fn scaled_pairing(mag: &[f64], weight: f64, model: &ViscosityModel, eta: f64) -> Result<f64> {
    let mut acc = 0.0;
    for &m in mag {
        if m == 0.0 {
            continue;
        }
        acc += eval_f(model, eta * m)? * m * m;
    }
    Ok(eta * weight * acc)
}

/// Solve the per-record energy-equality equation psi(eta) = jprime_pairing by
/// bisection on [theta, 1]. Records with no sign change in the bracket are
/// clamped to the nearer endpoint and flagged, with the endpoint residual
/// reported; degenerate (near-rest) records use eta = 1 by convention.
pub fn energy_equality_eta(
    traj: &TrajectoryRecord,
    model: &ViscosityModel,
    theta: f64,
) -> Result<Vec<EtaRecord>> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::Parameter(format!(
            "theta must lie in (0, 1], got {theta}"
        )));
    }
    let mut out = Vec::with_capacity(traj.len());
    for k in 0..traj.len() {
        let t = traj.times[k];
        let target = traj.scalars[k].jprime_pairing;
        let c = traj.state_at(k);
        let (mag, w) = deformation_magnitude(&c);

        if target.abs() <= 1e-14 && mag.iter().all(|&m| m <= 1e-14) {
            out.push(EtaRecord { t, eta: 1.0, residual: 0.0, in_bracket: true });
            continue;
        }

        let rel = |v: f64| (v - target).abs() / (1.0 + target.abs());
        let r_lo = scaled_pairing(&mag, w, model, theta)? - target;
        let r_hi = scaled_pairing(&mag, w, model, 1.0)? - target;
        if theta == 1.0 {
            out.push(EtaRecord { t, eta: 1.0, residual: rel(r_hi + target), in_bracket: true });
            continue;
        }
        if r_lo > 0.0 {
            out.push(EtaRecord { t, eta: theta, residual: rel(r_lo + target), in_bracket: false });
            continue;
        }
        if r_hi < 0.0 {
            out.push(EtaRecord { t, eta: 1.0, residual: rel(r_hi + target), in_bracket: false });
            continue;
        }
        let (mut lo, mut hi) = (theta, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let r = scaled_pairing(&mag, w, model, mid)? - target;
            if r <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-13 {
                break;
            }
        }
        let eta = 0.5 * (lo + hi);
        let residual = rel(scaled_pairing(&mag, w, model, eta)?);
        out.push(EtaRecord { t, eta, residual, in_bracket: true });
    }
    Ok(out)
}

/// Linear decay fit of l2^alpha over a time window.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    pub alpha: f64,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n_records: usize,
}

pub fn alpha_decay_fit(
    traj: &TrajectoryRecord,
    alpha: f64,
    window: (f64, f64),
) -> Result<DecayFit> {
    if alpha <= 0.0 {
        return Err(Error::Parameter(format!("alpha must be > 0, got {alpha}")));
    }
    let (t_lo, t_hi) = window;
    let pts: Vec<(f64, f64)> = traj
        .times
        .iter()
        .zip(&traj.scalars)
        .filter(|(&t, s)| t >= t_lo && t <= t_hi && s.l2 > 0.0)
        .map(|(&t, s)| (t, s.l2.powf(alpha)))
        .collect();
    if pts.len() < 10 {
        return Err(Error::WindowTooShort(format!(
            "decay fit needs >= 10 records in [{t_lo}, {t_hi}], found {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let (mx, my) = (sx / n, sy / n);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::WindowTooShort("window has zero time extent".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(DecayFit { alpha, slope, intercept, r2, n_records: pts.len() })
}

/// Stopping-time report: measured extinction versus the bound implied by the
/// fitted linear decay of l2^alpha.
#[derive(Debug, Clone)]
pub struct StoppingReport {
    pub alpha: f64,
    pub fit: DecayFit,
    pub t0_measured: Option<f64>,
    pub t0_bound: f64,
    /// (eps, T0) pairs across the regularization sweep.
    pub eps_extrapolation: Vec<(f64, f64)>,
    /// Linear eps -> 0 extrapolation of T0, when >= 2 pairs exist.
    pub t0_extrapolated: Option<f64>,
}

/// T0_bound = T1 + l2(T1)^alpha / |slope|, from the integrated decay law.
pub fn stopping_bound(
    traj: &TrajectoryRecord,
    t1: f64,
    fit: &DecayFit,
    t0_measured: Option<f64>,
) -> Result<StoppingReport> {
    if fit.slope >= 0.0 {
        return Err(Error::Parameter(format!(
            "decay fit slope must be negative, got {}",
            fit.slope
        )));
    }
    // l2 at the first record with t >= t1
    let k = traj
        .times
        .iter()
        .position(|&t| t >= t1)
        .ok_or_else(|| Error::Shape(format!("no record at or after t1 = {t1}")))?;
    let l2_t1 = traj.scalars[k].l2;
    let t0_bound = traj.times[k] + l2_t1.powf(fit.alpha) / fit.slope.abs();
    Ok(StoppingReport {
        alpha: fit.alpha,
        fit: *fit,
        t0_measured,
        t0_bound,
        eps_extrapolation: Vec::new(),
        t0_extrapolated: None,
    })
}

/// Least-squares linear extrapolation of (eps, T0) pairs to eps = 0.
pub fn extrapolate_t0(pairs: &[(f64, f64)]) -> Option<f64> {
    if pairs.len() < 2 {
        return None;
    }
    let n = pairs.len() as f64;
    let mx: f64 = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my: f64 = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(my - slope * mx)
}

/// Scalar form of the power triangle bound (a + b)^g <= 2^{g - 1/2} (a^g + b^g)
/// for a, b >= 0 and g >= 1/2.
pub fn scalar_power_inequality_holds(a: f64, b: f64, gamma: f64) -> bool {
    debug_assert!(a >= 0.0 && b >= 0.0 && gamma >= 0.5);
    (a + b).powf(gamma) <= 2f64.powf(gamma - 0.5) * (a.powf(gamma) + b.powf(gamma)) + 1e-14
}

/// One cell of the refinement matrix.
#[derive(Debug, Clone)]
struct CellRun {
    basis: Arc<BasisSpec>,
    traj: TrajectoryRecord,
}

/// Pairwise trajectory differences across an (eps, m_max) refinement matrix.
#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub eps_list: Vec<f64>,
    pub m_list: Vec<i64>,
    /// eps_axis[j][i] = dist(run(eps_i, m_j), run(eps_{i+1}, m_j)).
    pub eps_axis: Vec<Vec<f64>>,
    /// m_axis[i][j] = dist(run(eps_i, m_j), run(eps_i, m_{j+1})).
    pub m_axis: Vec<Vec<f64>>,
}

impl ConvergenceTable {
    /// Strict decrease of consecutive differences along both axes.
    pub fn is_monotone(&self) -> bool {
        let dec = |row: &[f64]| row.windows(2).all(|w| w[1] < w[0]);
        self.eps_axis.iter().all(|r| dec(r)) && self.m_axis.iter().all(|r| dec(r))
    }

    /// Largest eps-axis difference (zero for viscosity laws with no eps
    /// dependence, e.g. constant F).
    pub fn max_eps_difference(&self) -> f64 {
        self.eps_axis
            .iter()
            .flatten()
            .fold(0.0f64, |a, &b| a.max(b))
    }
}

/// Map each mode of `coarse` to its index in `fine`.
fn mode_embedding(coarse: &BasisSpec, fine: &BasisSpec) -> Result<Vec<usize>> {
    coarse
        .modes
        .iter()
        .map(|m| {
            fine.find_mode(&m.xi[..fine.n], m.phase, m.dir_index)
                .ok_or_else(|| {
                    Error::Shape(format!("mode {:?} missing from the finer basis", m.xi))
                })
        })
        .collect()
}

/// L^2((0,T); L^2) distance between two runs recorded on the same uniform
/// time grid, comparing the finer run projected onto the coarser mode set.
fn trajectory_distance(coarse: &CellRun, fine: &CellRun) -> Result<f64> {
    let map = mode_embedding(&coarse.basis, &fine.basis)?;
    let (ta, tb) = (&coarse.traj, &fine.traj);
    let len = ta.times.len().min(tb.times.len());
    if len < 2 {
        return Err(Error::Shape("need at least 2 shared records".into()));
    }
    let mut sq = vec![0.0; len];
    for k in 0..len {
        if (ta.times[k] - tb.times[k]).abs() > 1e-9 {
            return Err(Error::Shape(format!(
                "record times diverge at index {k}: {} vs {}",
                ta.times[k], tb.times[k]
            )));
        }
        let (da, db) = (&ta.states[k], &tb.states[k]);
        let mut s = 0.0;
        for (i, &fi) in map.iter().enumerate() {
            let e = da[i] - db[fi];
            s += e * e;
        }
        sq[k] = s;
    }
    let mut integral = 0.0;
    for k in 1..len {
        integral += 0.5 * (ta.times[k] - ta.times[k - 1]) * (sq[k - 1] + sq[k]);
    }
    Ok(integral.sqrt())
}

/// Modal description of a shared initial state: (wavevector, phase, direction
/// slot, amplitude). Must be resolvable on the coarsest basis.
pub type ModalState = Vec<([i64; 3], crate::basis::Phase, u8, f64)>;

fn state_on(basis: &Arc<BasisSpec>, modes: &ModalState) -> Result<CoefficientVector> {
    let mut c = CoefficientVector::zero(Arc::clone(basis));
    for &(xi, phase, dir, amp) in modes {
        let i = basis
            .find_mode(&xi[..basis.n], phase, dir)
            .ok_or_else(|| Error::UnknownMode(format!("{xi:?} ({})", phase.name())))?;
        c.d[i] += amp;
    }
    Ok(c)
}

/// Run the (eps, m_max) refinement matrix from a shared modal initial state
/// and forcing, and tabulate pairwise trajectory differences along each axis.
/// The integrator config must use uniform recording so trajectories share
/// their time grids.
pub fn convergence_study(
    n: usize,
    eps_list: &[f64],
    m_list: &[i64],
    u0_modes: &ModalState,
    model: &ViscosityModel,
    spec: &ForcingSpec,
    cfg: &IntegratorConfig,
) -> Result<ConvergenceTable> {
    if eps_list.len() < 3 || m_list.len() < 3 {
        return Err(Error::Usage(
            "convergence study needs at least 3 eps values and 3 m values".into(),
        ));
    }
    if cfg.record_uniform.is_none() {
        return Err(Error::Config(
            "convergence study requires uniform record times".into(),
        ));
    }
    for w in eps_list.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::Usage("eps list must be strictly decreasing".into()));
        }
    }
    for w in m_list.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Usage("m list must be strictly increasing".into()));
        }
    }

    let tasks: Vec<(usize, usize)> = (0..eps_list.len())
        .flat_map(|i| (0..m_list.len()).map(move |j| (i, j)))
        .collect();
    let cells: Vec<Result<CellRun>> = crate::sweep::pmap(&tasks, |&(i, j)| {
        let m = m_list[j];
        let basis = Arc::new(build_basis(n, m, 3 * m as usize)?);
        let u0 = state_on(&basis, u0_modes)?;
        let (traj, _) = run(&u0, cfg, model, eps_list[i], spec)?;
        Ok(CellRun { basis, traj })
    });
    let mut grid: Vec<Vec<CellRun>> = Vec::with_capacity(eps_list.len());
    let mut it = cells.into_iter();
    for _ in 0..eps_list.len() {
        let mut row = Vec::with_capacity(m_list.len());
        for _ in 0..m_list.len() {
            row.push(it.next().unwrap()?);
        }
        grid.push(row);
    }

    let mut eps_axis = Vec::with_capacity(m_list.len());
    for j in 0..m_list.len() {
        let mut col = Vec::with_capacity(eps_list.len() - 1);
        for i in 0..eps_list.len() - 1 {
            col.push(trajectory_distance(&grid[i][j], &grid[i + 1][j])?);
        }
        eps_axis.push(col);
    }
    let mut m_axis = Vec::with_capacity(eps_list.len());
    for (i, row) in grid.iter().enumerate() {
        let mut diffs = Vec::with_capacity(m_list.len() - 1);
        for j in 0..m_list.len() - 1 {
            diffs.push(trajectory_distance(&row[j], &row[j + 1])?);
        }
        m_axis.push(diffs);
        let _ = i;
    }

    Ok(ConvergenceTable {
        eps_list: eps_list.to_vec(),
        m_list: m_list.to_vec(),
        eps_axis,
        m_axis,
    })
}
