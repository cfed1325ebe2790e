//! Time integration of the Galerkin coefficient ODE: integrating-factor RK4
//! with step-doubling error control, forcing-cutoff clipping and extinction
//! detection.

use std::sync::Arc;

use crate::basis::CoefficientVector;
use crate::error::{Error, Result};
use crate::rhs::{
    convection_term, forcing_term, j_eps, jprime_pairing, viscous_nonlinear_term, ForcingSpec,
};
use crate::viscosity::ViscosityModel;

#[derive(Debug, Clone)]
pub struct IntegratorConfig {
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Time horizon of the run.
    pub t_end: f64,
    /// Extinction threshold on the L2 norm.
    pub stop_tol: f64,
    /// Record every this many accepted steps (ignored under uniform cadence).
    pub record_every: usize,
    /// If set, record exactly at multiples of this spacing instead.
    pub record_uniform: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt_init: 1e-3,
            dt_min: 1e-12,
            dt_max: 0.1,
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            t_end: 1.0,
            stop_tol: 1e-10,
            record_every: 1,
            record_uniform: None,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_init && self.dt_init <= self.dt_max) {
            return Err(Error::Config(format!(
                "need 0 < dt_min <= dt_init <= dt_max, got {} / {} / {}",
                self.dt_min, self.dt_init, self.dt_max
            )));
        }
        if self.stop_tol <= 0.0 {
            return Err(Error::Config(format!(
                "stop_tol must be > 0, got {}",
                self.stop_tol
            )));
        }
        if self.t_end <= 0.0 {
            return Err(Error::Config(format!(
                "t_end must be > 0, got {}",
                self.t_end
            )));
        }
        if self.rel_tol <= 0.0 || self.abs_tol < 0.0 {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be >= 1".into()));
        }
        if let Some(h) = self.record_uniform {
            if h <= 0.0 {
                return Err(Error::Config(format!(
                    "record_uniform spacing must be > 0, got {h}"
                )));
            }
        }
        Ok(())
    }
}

/// Per-record scalar diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct RecordScalars {
    pub l2: f64,
    pub h1: f64,
    pub dissipation: f64,
    pub j_eps_value: f64,
    pub jprime_pairing: f64,
    pub forcing_power: f64,
    pub l4: f64,
}

#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub basis: Arc<crate::basis::BasisSpec>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub scalars: Vec<RecordScalars>,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state_at(&self, k: usize) -> CoefficientVector {
        CoefficientVector {
            basis: Arc::clone(&self.basis),
            d: self.states[k].clone(),
            t: self.times[k],
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StoppingEvent {
    pub t0: f64,
    pub attained_norm: f64,
}

/// Nonlinear part of the right-hand side (everything except the Stokes term,
/// which the integrating factor treats exactly).
fn nonlinear(
    c: &CoefficientVector,
    t: f64,
    model: &ViscosityModel,
    eps: f64,
    spec: &ForcingSpec,
) -> Result<Vec<f64>> {
    let mut v = viscous_nonlinear_term(c, model, eps)?;
    let conv = convection_term(c)?;
    let f = forcing_term(t, spec, &c.basis)?;
    for i in 0..v.len() {
        v[i] += conv[i] + f[i];
    }
    Ok(v)
}

/// One integrating-factor RK4 step of size dt: the Stokes part exp(-lambda t/2)
/// is integrated exactly, the remaining terms by classical RK4.
pub fn step(
    state: &CoefficientVector,
    dt: f64,
    model: &ViscosityModel,
    eps: f64,
    spec: &ForcingSpec,
) -> Result<CoefficientVector> {
    if dt <= 0.0 {
        return Err(Error::Domain(format!("step size must be > 0, got {dt}")));
    }
    let basis = &state.basis;
    let m = basis.len();
    let t = state.t;

    // e_half[i] = exp(-lambda_i dt/4), e_full[i] = exp(-lambda_i dt/2)
    let e_half: Vec<f64> = basis.modes.iter().map(|md| (-0.25 * md.lambda * dt).exp()).collect();
    let e_full: Vec<f64> = basis.modes.iter().map(|md| (-0.5 * md.lambda * dt).exp()).collect();

    let mk = |d: Vec<f64>, tt: f64| CoefficientVector {
        basis: Arc::clone(basis),
        d,
        t: tt,
    };

    let k1 = nonlinear(state, t, model, eps, spec)?;

    let u2: Vec<f64> = (0..m)
        .map(|i| e_half[i] * (state.d[i] + 0.5 * dt * k1[i]))
        .collect();
    let k2 = nonlinear(&mk(u2, t + 0.5 * dt), t + 0.5 * dt, model, eps, spec)?;

    let u3: Vec<f64> = (0..m)
        .map(|i| e_half[i] * state.d[i] + 0.5 * dt * k2[i])
        .collect();
    let k3 = nonlinear(&mk(u3, t + 0.5 * dt), t + 0.5 * dt, model, eps, spec)?;

    let u4: Vec<f64> = (0..m)
        .map(|i| e_full[i] * state.d[i] + dt * e_half[i] * k3[i])
        .collect();
    let k4 = nonlinear(&mk(u4, t + dt), t + dt, model, eps, spec)?;

    let mut d_new = Vec::with_capacity(m);
    for i in 0..m {
        let v = e_full[i] * state.d[i]
            + dt / 6.0
                * (e_full[i] * k1[i] + 2.0 * e_half[i] * (k2[i] + k3[i]) + k4[i]);
        if !v.is_finite() {
            return Err(Error::NonFinite { t: t + dt });
        }
        d_new.push(v);
    }
    Ok(mk(d_new, t + dt))
}

fn scalars_of(
    c: &CoefficientVector,
    t: f64,
    model: &ViscosityModel,
    eps: f64,
    spec: &ForcingSpec,
) -> Result<RecordScalars> {
    let nm = crate::basis::norms(c);
    let f = forcing_term(t, spec, &c.basis)?;
    let forcing_power: f64 = f.iter().zip(&c.d).map(|(a, b)| a * b).sum();
    Ok(RecordScalars {
        l2: nm.l2,
        h1: nm.h1,
        dissipation: nm.dissipation,
        j_eps_value: j_eps(c, model, eps)?,
        jprime_pairing: jprime_pairing(c, model, eps)?,
        forcing_power,
        l4: nm.l4,
    })
}

/// Advance u0 to t_end (or extinction) with step-doubling error control.
///
/// Steps are clipped to land exactly on the forcing cutoff T1, on uniform
/// record times when configured, and on t_end. The stopping event fires at
/// the first recorded time with l2 <= stop_tol.
pub fn run(
    u0: &CoefficientVector,
    cfg: &IntegratorConfig,
    model: &ViscosityModel,
    eps: f64,
    spec: &ForcingSpec,
) -> Result<(TrajectoryRecord, Option<StoppingEvent>)> {
    let (traj, stopping, err) = run_with_partial(u0, cfg, model, eps, spec);
    match err {
        Some(e) => Err(e),
        None => Ok((traj, stopping)),
    }
}

/// Like [`run`], but on failure the records accepted so far are preserved
/// alongside the error.
pub fn run_with_partial(
    u0: &CoefficientVector,
    cfg: &IntegratorConfig,
    model: &ViscosityModel,
    eps: f64,
    spec: &ForcingSpec,
) -> (TrajectoryRecord, Option<StoppingEvent>, Option<Error>) {
    let mut traj = TrajectoryRecord {
        basis: Arc::clone(&u0.basis),
        times: Vec::new(),
        states: Vec::new(),
        scalars: Vec::new(),
    };
    let mut stopping = None;
    let err = run_inner(u0, cfg, model, eps, spec, &mut traj, &mut stopping).err();
    (traj, stopping, err)
}

fn run_inner(
    u0: &CoefficientVector,
    cfg: &IntegratorConfig,
    model: &ViscosityModel,
    eps: f64,
    spec: &ForcingSpec,
    traj: &mut TrajectoryRecord,
    out_stopping: &mut Option<StoppingEvent>,
) -> Result<()> {
    cfg.validate()?;
    let basis = Arc::clone(&u0.basis);

    let mut u = CoefficientVector { basis, d: u0.d.clone(), t: 0.0 };
    let mut t = 0.0;
    let mut dt = cfg.dt_init;
    let mut accepted_since_record = 0usize;
    let tick = |t: f64| -> bool {
        match cfg.record_uniform {
            Some(h) => {
                let k = (t / h).round();
                (t - k * h).abs() <= 1e-9 * h
            }
            None => false,
        }
    };

    let record = |traj: &mut TrajectoryRecord, u: &CoefficientVector, t: f64| -> Result<f64> {
        let sc = scalars_of(u, t, model, eps, spec)?;
        traj.times.push(t);
        traj.states.push(u.d.clone());
        traj.scalars.push(sc);
        Ok(sc.l2)
    };

    let l2_0 = record(traj, &u, 0.0)?;
    if l2_0 <= cfg.stop_tol {
        *out_stopping = Some(StoppingEvent { t0: 0.0, attained_norm: l2_0 });
        return Ok(());
    }

    while t < cfg.t_end {
        // clip to the next boundary: t_end, the forcing cutoff, a uniform tick
        let mut boundary = cfg.t_end;
        if spec.t1 > t && spec.t1 < boundary {
            boundary = spec.t1;
        }
        if let Some(h) = cfg.record_uniform {
            let next_tick = (t / h + 1e-9).floor() * h + h;
            if next_tick > t && next_tick < boundary {
                boundary = next_tick;
            }
        }
        let cap = boundary - t;
        let dt_try = dt.min(cap);

        let big = step(&u, dt_try, model, eps, spec)?;
        let mid = step(&u, 0.5 * dt_try, model, eps, spec)?;
        let half = step(&mid, 0.5 * dt_try, model, eps, spec)?;

        let mut err_sq = 0.0;
        let mut norm_sq = 0.0;
        for i in 0..u.d.len() {
            let e = big.d[i] - half.d[i];
            err_sq += e * e;
            norm_sq += u.d[i] * u.d[i];
        }
        let err = err_sq.sqrt() / 15.0;
        let tol = cfg.abs_tol.max(cfg.rel_tol * norm_sq.sqrt());

        let factor = if err > 0.0 {
            (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };

        if err <= tol {
            t = if dt_try >= cap { boundary } else { t + dt_try };
            u = half;
            u.t = t;
            accepted_since_record += 1;
            dt = (dt_try * factor).clamp(cfg.dt_min, cfg.dt_max);

            let at_boundary = t >= cfg.t_end || t == spec.t1;
            let should_record = match cfg.record_uniform {
                Some(_) => tick(t) || at_boundary,
                None => accepted_since_record >= cfg.record_every || at_boundary,
            };
            if should_record {
                accepted_since_record = 0;
                let l2 = record(traj, &u, t)?;
                if l2 <= cfg.stop_tol {
                    *out_stopping = Some(StoppingEvent { t0: t, attained_norm: l2 });
                    break;
                }
            }
        } else {
            if dt_try <= cfg.dt_min * (1.0 + 1e-12) {
                return Err(Error::DtUnderflow { t, dt_min: cfg.dt_min });
            }
            dt = (dt_try * factor).max(cfg.dt_min);
        }
    }

    // ensure the final state is recorded even off the record cadence
    if out_stopping.is_none() && *traj.times.last().unwrap() < t {
        record(traj, &u, t)?;
    }
    Ok(())
}

/// First recorded time with l2 <= stop_tol. When `alpha` is supplied, the
/// crossing is located by linear interpolation of l2^alpha between the
/// bracketing records.
pub fn detect_stopping(
    traj: &TrajectoryRecord,
    stop_tol: f64,
    alpha: Option<f64>,
) -> Option<StoppingEvent> {
    let k = traj.scalars.iter().position(|s| s.l2 <= stop_tol)?;
    let attained_norm = traj.scalars[k].l2;
    if k == 0 {
        return Some(StoppingEvent { t0: traj.times[0], attained_norm });
    }
    let t0 = match alpha {
        Some(a) if a > 0.0 => {
            let (t_prev, t_next) = (traj.times[k - 1], traj.times[k]);
            let y_prev = traj.scalars[k - 1].l2.powf(a);
            let y_next = traj.scalars[k].l2.powf(a);
            let y_star = stop_tol.powf(a);
            if y_prev > y_next {
                let s = ((y_prev - y_star) / (y_prev - y_next)).clamp(0.0, 1.0);
                t_prev + s * (t_next - t_prev)
            } else {
                t_next
            }
        }
        _ => traj.times[k],
    };
    Some(StoppingEvent { t0, attained_norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis, BasisSpec, Phase};
    use crate::rhs::Envelope;
    use std::sync::Arc;

    fn basis(m: i64) -> Arc<BasisSpec> {
        Arc::new(build_basis(2, m, 3 * m as usize).unwrap())
    }

    fn single_mode(b: &Arc<BasisSpec>, amp: f64) -> CoefficientVector {
        let i = b.find_mode(&[1, 0], Phase::Cos, 0).unwrap();
        let mut c = CoefficientVector::zero(Arc::clone(b));
        c.d[i] = amp;
        c
    }

    #[test]
    fn step_stokes_is_exact() {
        let b = basis(1);
        let c = single_mode(&b, 0.7);
        let zero_f = ViscosityModel::constant(0.0).unwrap();
        let out = step(&c, 0.1, &zero_f, 0.0, &ForcingSpec::none()).unwrap();
        let i = b.find_mode(&[1, 0], Phase::Cos, 0).unwrap();
        // integrating factor: exactly 0.7 * exp(-0.05), not just O(dt^5)
        let expect = 0.7 * (-0.05f64).exp();
        assert!((out.d[i] - expect).abs() < 1e-15, "{} vs {expect}", out.d[i]);
    }

    #[test]
    fn step_zero_state_stays_zero() {
        let b = basis(1);
        let z = CoefficientVector::zero(Arc::clone(&b));
        let model = ViscosityModel::constant(1.0).unwrap();
        let out = step(&z, 0.5, &model, 0.0, &ForcingSpec::none()).unwrap();
        assert!(out.d.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn step_constant_f_is_fifth_order() {
        let b = basis(1);
        let c = single_mode(&b, 1.0);
        let nu = 2.0;
        let model = ViscosityModel::constant(nu).unwrap();
        let i = b.find_mode(&[1, 0], Phase::Cos, 0).unwrap();
        let errs: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&dt| {
                let out = step(&c, dt, &model, 0.0, &ForcingSpec::none()).unwrap();
                (out.d[i] - (-(1.0 + nu) * 0.5 * dt).exp()).abs()
            })
            .collect();
        // RK4 local error ~ dt^5: halving dt shrinks the error by ~32
        assert!(errs[1] < errs[0] / 20.0, "{errs:?}");
        assert!(errs[2] < errs[1] / 20.0, "{errs:?}");
    }

    #[test]
    fn run_stokes_matches_analytic_decay() {
        let b = basis(1);
        let c = single_mode(&b, 1.0);
        let zero_f = ViscosityModel::constant(0.0).unwrap();
        let cfg = IntegratorConfig { t_end: 1.0, ..Default::default() };
        let (traj, stop) = run(&c, &cfg, &zero_f, 0.0, &ForcingSpec::none()).unwrap();
        assert!(stop.is_none());
        assert_eq!(*traj.times.last().unwrap(), 1.0);
        let ratio = traj.scalars.last().unwrap().l2 / traj.scalars[0].l2;
        let expect = (-0.5f64).exp();
        assert!(
            (ratio - expect).abs() / expect < 1e-6,
            "{ratio} vs {expect}"
        );
    }

    #[test]
    fn run_zero_state_stops_immediately() {
        let b = basis(1);
        let z = CoefficientVector::zero(Arc::clone(&b));
        let model = ViscosityModel::constant(1.0).unwrap();
        let cfg = IntegratorConfig::default();
        let (traj, stop) = run(&z, &cfg, &model, 0.0, &ForcingSpec::none()).unwrap();
        let ev = stop.unwrap();
        assert_eq!(ev.t0, 0.0);
        assert_eq!(ev.attained_norm, 0.0);
        assert_eq!(traj.len(), 1);
    }

    #[test]
    fn run_lands_exactly_on_forcing_cutoff() {
        let b = basis(1);
        let c = single_mode(&b, 0.5);
        let model = ViscosityModel::constant(1.0).unwrap();
        let spec = ForcingSpec {
            entries: vec![(0, Envelope::HalfSine(1.0))],
            t1: 0.33,
        };
        let cfg = IntegratorConfig { t_end: 1.0, dt_max: 0.25, ..Default::default() };
        let (traj, _) = run(&c, &cfg, &model, 0.0, &spec).unwrap();
        assert!(traj.times.iter().any(|&t| t == 0.33), "{:?}", traj.times);
    }

    #[test]
    fn extinction_before_horizon_for_bingham_like_law() {
        let b = basis(1);
        let i = b.find_mode(&[1, 0], Phase::Cos, 0).unwrap();
        let j = b.find_mode(&[0, 1], Phase::Sin, 0).unwrap();
        let mut c = CoefficientVector::zero(Arc::clone(&b));
        c.d[i] = (0.5f64).sqrt();
        c.d[j] = (0.5f64).sqrt();
        let model = ViscosityModel::power_law(1.0).unwrap();
        let cfg = IntegratorConfig {
            t_end: 10.0,
            stop_tol: 1e-10,
            dt_max: 0.05,
            ..Default::default()
        };
        let (traj, stop) = run(&c, &cfg, &model, 1e-8, &ForcingSpec::none()).unwrap();
        let ev = stop.expect("finite stopping time expected");
        assert!(ev.t0 > 0.0 && ev.t0 < 10.0, "T0 = {}", ev.t0);
        assert!(ev.attained_norm <= 1e-10);
        // l2 non-increasing with f = 0
        for w in traj.scalars.windows(2) {
            assert!(w[1].l2 <= w[0].l2 + 1e-10);
        }
    }

    #[test]
    fn monotone_energy_without_forcing() {
        let b = basis(2);
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(33);
        let d: Vec<f64> = (0..b.len()).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let c = CoefficientVector::from_coeffs(Arc::clone(&b), d, 0.0).unwrap();
        let model = ViscosityModel::carreau(1.0, 0.5).unwrap();
        let cfg = IntegratorConfig { t_end: 2.0, ..Default::default() };
        let (traj, _) = run(&c, &cfg, &model, 1e-6, &ForcingSpec::none()).unwrap();
        for w in traj.scalars.windows(2) {
            assert!(w[1].l2 <= w[0].l2 + 1e-10, "{} -> {}", w[0].l2, w[1].l2);
        }
    }

    #[test]
    fn discrete_energy_balance() {
        let b = basis(2);
        let c = single_mode(&b, 1.0);
        let model = ViscosityModel::carreau(1.0, 1.0).unwrap();
        let spec = ForcingSpec {
            entries: vec![(2, Envelope::HalfSine(0.5))],
            t1: 0.5,
        };
        let cfg = IntegratorConfig {
            t_end: 1.0,
            dt_max: 0.005,
            ..Default::default()
        };
        let (traj, _) = run(&c, &cfg, &model, 1e-4, &spec).unwrap();
        for k in 1..traj.len() {
            let dt = traj.times[k] - traj.times[k - 1];
            let (a, b2) = (&traj.scalars[k - 1], &traj.scalars[k]);
            let half_delta = 0.5 * (b2.l2 * b2.l2 - a.l2 * a.l2);
            let integrand_a = a.dissipation + a.jprime_pairing - a.forcing_power;
            let integrand_b = b2.dissipation + b2.jprime_pairing - b2.forcing_power;
            let residual = half_delta + 0.5 * dt * (integrand_a + integrand_b);
            assert!(
                residual.abs() < 1e-6,
                "interval {k}: residual {residual:.3e} over dt {dt:.3e}"
            );
        }
    }

    #[test]
    fn tolerance_refinement_converges() {
        let b = basis(2);
        let c = single_mode(&b, 1.0);
        let model = ViscosityModel::carreau(0.5, 0.8).unwrap();
        let coarse = IntegratorConfig {
            t_end: 1.0,
            rel_tol: 1e-6,
            abs_tol: 1e-10,
            ..Default::default()
        };
        let fine = IntegratorConfig {
            rel_tol: 5e-7,
            abs_tol: 5e-11,
            ..coarse.clone()
        };
        let (ta, _) = run(&c, &coarse, &model, 1e-4, &ForcingSpec::none()).unwrap();
        let (tb, _) = run(&c, &fine, &model, 1e-4, &ForcingSpec::none()).unwrap();
        let la = ta.scalars.last().unwrap().l2;
        let lb = tb.scalars.last().unwrap().l2;
        assert!((la - lb).abs() < 1e-6, "{la} vs {lb}");
    }

    #[test]
    fn runs_are_deterministic() {
        let b = basis(2);
        let c = single_mode(&b, 0.9);
        let model = ViscosityModel::carreau(1.0, 0.6).unwrap();
        let cfg = IntegratorConfig { t_end: 0.5, ..Default::default() };
        let (ta, _) = run(&c, &cfg, &model, 1e-5, &ForcingSpec::none()).unwrap();
        let (tb, _) = run(&c, &cfg, &model, 1e-5, &ForcingSpec::none()).unwrap();
        assert_eq!(ta.times, tb.times);
        assert_eq!(ta.states, tb.states);
    }

    #[test]
    fn uniform_recording_hits_the_grid() {
        let b = basis(1);
        let c = single_mode(&b, 1.0);
        let model = ViscosityModel::constant(1.0).unwrap();
        let cfg = IntegratorConfig {
            t_end: 1.0,
            record_uniform: Some(0.1),
            ..Default::default()
        };
        let (traj, _) = run(&c, &cfg, &model, 0.0, &ForcingSpec::none()).unwrap();
        for k in 0..=10 {
            let want = 0.1 * k as f64;
            assert!(
                traj.times.iter().any(|&t| (t - want).abs() < 1e-9),
                "missing record at {want}: {:?}",
                traj.times
            );
        }
    }

    #[test]
    fn detect_stopping_synthetic_series() {
        let b = basis(1);
        let mk = |times: Vec<f64>, l2s: Vec<f64>| {
            let n = times.len();
            TrajectoryRecord {
                basis: Arc::clone(&b),
                times,
                states: vec![vec![0.0; b.len()]; n],
                scalars: l2s
                    .into_iter()
                    .map(|l2| RecordScalars {
                        l2,
                        h1: 0.0,
                        dissipation: 0.0,
                        j_eps_value: 0.0,
                        jprime_pairing: 0.0,
                        forcing_power: 0.0,
                        l4: 0.0,
                    })
                    .collect(),
            }
        };

        // l2(t) = max(0, 1 - t): T0 = 1 to within one record spacing
        let times: Vec<f64> = (0..=150).map(|k| 0.01 * k as f64).collect();
        let l2s: Vec<f64> = times.iter().map(|&t| (1.0 - t).max(0.0)).collect();
        let traj = mk(times, l2s);
        let ev = detect_stopping(&traj, 1e-10, Some(1.0)).unwrap();
        assert!((ev.t0 - 1.0).abs() <= 0.01, "T0 = {}", ev.t0);

        // bounded below: none
        let times: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let l2s = vec![5e-3; 10];
        assert!(detect_stopping(&mk(times, l2s), 1e-3, None).is_none());

        // e^{-t} against stop_tol 1e-3: T0 = ln(1e3)
        let times: Vec<f64> = (0..=1000).map(|k| 0.01 * k as f64).collect();
        let l2s: Vec<f64> = times.iter().map(|&t| (-t).exp()).collect();
        let ev = detect_stopping(&mk(times, l2s), 1e-3, Some(1.0)).unwrap();
        assert!((ev.t0 - 3.0f64 * 10.0f64.ln()).abs() < 0.01, "T0 = {}", ev.t0);
    }

    #[test]
    fn invalid_configs_rejected() {
        let bad = IntegratorConfig { dt_min: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = IntegratorConfig { stop_tol: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = IntegratorConfig { t_end: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = IntegratorConfig { record_every: 0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
