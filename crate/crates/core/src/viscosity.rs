//! Viscosity laws F, the regularized potentials G_eps and their derivatives,
//! and automatic verification of the structural conditions (C1)-(C4).

use crate::error::{Error, Result};
use crate::quadrature;

/// Default absolute tolerance for potential quadrature.
pub const QUAD_ABS_TOL: f64 = 1e-10;
/// Default relative tolerance for potential quadrature.
pub const QUAD_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    PowerLaw,
    Carreau,
    Cross,
    LogPower,
    Constant,
    Table,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::PowerLaw => "power_law",
            Kind::Carreau => "carreau",
            Kind::Cross => "cross",
            Kind::LogPower => "log_power",
            Kind::Constant => "constant",
            Kind::Table => "table",
        }
    }
}

/// Tabulated viscosity law: monotone piecewise-cubic interpolation of
/// (log t, log F) samples, clamped outside the sampled range. Log-log
/// interpolation reproduces power-law segments exactly, so (C3) survives
/// tabulation of the catalog laws.
#[derive(Debug, Clone)]
pub struct TabulatedF {
    log_t: Vec<f64>,
    f: Vec<f64>,
    slopes: Vec<f64>,
}

impl TabulatedF {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Parameter("table needs at least 2 points".into()));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Parameter(format!(
                    "table abscissae must be strictly increasing (got {} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if points.iter().any(|&(t, v)| t <= 0.0 || v <= 0.0) {
            return Err(Error::Parameter(
                "table entries must be positive (F maps (0,inf) to (0,inf))".into(),
            ));
        }
        let log_t: Vec<f64> = points.iter().map(|&(t, _)| t.ln()).collect();
        let f: Vec<f64> = points.iter().map(|&(_, v)| v.ln()).collect();
        let slopes = fritsch_carlson_slopes(&log_t, &f);
        Ok(Self { log_t, f, slopes })
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_log(t).exp()
    }

    fn eval_log(&self, t: f64) -> f64 {
        let x = t.ln();
        let n = self.log_t.len();
        if x <= self.log_t[0] {
            return self.f[0];
        }
        if x >= self.log_t[n - 1] {
            return self.f[n - 1];
        }
        let k = match self.log_t.partition_point(|&v| v <= x) {
            0 => 0,
            p => p - 1,
        };
        let h = self.log_t[k + 1] - self.log_t[k];
        let s = (x - self.log_t[k]) / h;
        let (y0, y1) = (self.f[k], self.f[k + 1]);
        let (m0, m1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
        // cubic Hermite
        let s2 = s * s;
        let s3 = s2 * s;
        y0 * (2.0 * s3 - 3.0 * s2 + 1.0)
            + m0 * (s3 - 2.0 * s2 + s)
            + y1 * (-2.0 * s3 + 3.0 * s2)
            + m1 * (s3 - s2)
    }
}

/// Monotonicity-preserving slopes (Fritsch-Carlson).
fn fritsch_carlson_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut delta = vec![0.0; n - 1];
    for k in 0..n - 1 {
        delta[k] = (y[k + 1] - y[k]) / (x[k + 1] - x[k]);
    }
    let mut m = vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] <= 0.0 {
            m[k] = 0.0;
        } else {
            m[k] = 0.5 * (delta[k - 1] + delta[k]);
        }
    }
    for k in 0..n - 1 {
        if delta[k] == 0.0 {
            m[k] = 0.0;
            m[k + 1] = 0.0;
        } else {
            let a = m[k] / delta[k];
            let b = m[k + 1] / delta[k];
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                m[k] = tau * a * delta[k];
                m[k + 1] = tau * b * delta[k];
            }
        }
    }
    m
}

/// A viscosity law F together with the constants used by the structural
/// conditions and the stopping-time hypothesis.
#[derive(Debug, Clone)]
pub struct ViscosityModel {
    pub kind: Kind,
    /// Decay exponent of the law, in [0, 1].
    pub alpha: f64,
    /// Carreau smoothing parameter.
    pub mu: f64,
    /// Cross offset / log-law cutoff.
    pub gamma: f64,
    /// Log-law exponent.
    pub beta: f64,
    /// Lower-bound constant: F(t) >= kappa t^{-alpha}.
    pub kappa: f64,
    /// Upper-bound constant of (C4): F(t) <= k_bound t^{-alpha_eff} for t >= t0.
    pub k_bound: f64,
    pub t0: f64,
    /// Value of the constant law.
    pub value: f64,
    pub table: Option<TabulatedF>,
}

impl ViscosityModel {
    fn base(kind: Kind) -> Self {
        Self {
            kind,
            alpha: 0.0,
            mu: 0.0,
            gamma: 1.0,
            beta: 1.0,
            kappa: 1.0,
            k_bound: 1.0,
            t0: 1.0,
            value: 1.0,
            table: None,
        }
    }

    pub fn power_law(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let mut m = Self::base(Kind::PowerLaw);
        m.alpha = alpha;
        m.kappa = 1.0;
        m.k_bound = 1.0;
        Ok(m)
    }

    pub fn carreau(mu: f64, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if mu < 0.0 {
            return Err(Error::Parameter(format!("carreau requires mu >= 0, got {mu}")));
        }
        let mut m = Self::base(Kind::Carreau);
        m.mu = mu;
        m.alpha = alpha;
        // (mu + t^2)^{-alpha/2} <= t^{-alpha}
        m.k_bound = 1.0;
        Ok(m)
    }

    pub fn cross(gamma: f64, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if gamma <= 0.0 {
            return Err(Error::Parameter(format!("cross requires gamma > 0, got {gamma}")));
        }
        let mut m = Self::base(Kind::Cross);
        m.gamma = gamma;
        m.alpha = alpha;
        // bounded on [t0, inf) by gamma + t0^{-alpha}, decay exponent 0
        m.t0 = 1.0;
        m.k_bound = gamma + 1.0;
        Ok(m)
    }

    pub fn log_power(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Parameter(format!(
                "log_power requires alpha in (0,1), got {alpha}"
            )));
        }
        if beta <= 0.0 || gamma <= 0.0 {
            return Err(Error::Parameter(
                "log_power requires beta > 0 and gamma > 0".into(),
            ));
        }
        if alpha + beta > 1.0 {
            return Err(Error::Parameter(format!(
                "log_power requires alpha + beta <= 1 so that t -> tF(t) is \
                 non-decreasing near 0 ((C3)); got alpha={alpha}, beta={beta}"
            )));
        }
        let mut m = Self::base(Kind::LogPower);
        m.alpha = alpha;
        m.beta = beta;
        m.gamma = gamma;
        m.t0 = gamma;
        m.k_bound = (1.0 + gamma).ln().powf(-beta);
        Ok(m)
    }

    pub fn constant(value: f64) -> Result<Self> {
        if value < 0.0 {
            return Err(Error::Parameter(format!(
                "constant law requires a nonnegative value, got {value}"
            )));
        }
        let mut m = Self::base(Kind::Constant);
        m.value = value;
        m.alpha = 0.0;
        m.k_bound = value;
        Ok(m)
    }

    pub fn from_table(points: &[(f64, f64)]) -> Result<Self> {
        let table = TabulatedF::new(points)?;
        let mut m = Self::base(Kind::Table);
        m.alpha = 0.0;
        m.t0 = 1.0;
        // default (C4) budget: twice the value at t0
        m.k_bound = 2.0 * table.eval(m.t0);
        m.table = Some(table);
        Ok(m)
    }

    /// Whether F has a finite limit at t = 0.
    pub fn bounded_at_zero(&self) -> bool {
        match self.kind {
            Kind::PowerLaw => self.alpha == 0.0,
            Kind::Carreau => self.mu > 0.0 || self.alpha == 0.0,
            Kind::Cross => self.alpha == 0.0,
            Kind::LogPower => false,
            Kind::Constant => true,
            Kind::Table => true, // clamped below the first sample
        }
    }

    /// Exponent used in the (C4) upper bound F(t) <= K t^{-alpha_eff}, t >= t0.
    pub fn alpha_eff(&self) -> f64 {
        match self.kind {
            Kind::PowerLaw | Kind::Carreau | Kind::LogPower => self.alpha,
            Kind::Cross | Kind::Constant | Kind::Table => 0.0,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Parameter(format!(
            "alpha must lie in [0, 1] so that t -> tF(t) is non-decreasing ((C3)); got {alpha}"
        )));
    }
    Ok(())
}

/// Evaluate F(t).
pub fn eval_f(model: &ViscosityModel, t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::Domain(format!("F is defined for t > 0, got {t}")));
    }
    if t == 0.0 && !model.bounded_at_zero() {
        return Err(Error::Domain(format!(
            "{} is singular at t = 0",
            model.kind.name()
        )));
    }
    let v = match model.kind {
        Kind::PowerLaw => t.powf(-model.alpha),
        Kind::Carreau => (model.mu + t * t).powf(-0.5 * model.alpha),
        Kind::Cross => model.gamma + t.powf(-model.alpha),
        Kind::LogPower => {
            if t <= model.gamma {
                t.powf(-model.alpha) * (1.0 + t).ln().powf(-model.beta)
            } else {
                (1.0 + model.gamma).ln().powf(-model.beta) * t.powf(-model.alpha)
            }
        }
        Kind::Constant => model.value,
        Kind::Table => model.table.as_ref().unwrap().eval(t),
    };
    Ok(v)
}

/// Evaluate G_eps'(t) = t F(sqrt(eps + t^2)).
pub fn eval_gprime(model: &ViscosityModel, t: f64, eps: f64) -> Result<f64> {
    if t < 0.0 || eps < 0.0 {
        return Err(Error::Domain(format!("need t >= 0 and eps >= 0, got t={t}, eps={eps}")));
    }
    if t == 0.0 {
        if eps > 0.0 || model.bounded_at_zero() {
            return Ok(0.0);
        }
        return Err(Error::Domain(format!(
            "{} is singular at rest and eps = 0",
            model.kind.name()
        )));
    }
    Ok(t * eval_f(model, (eps + t * t).sqrt())?)
}

/// Evaluate the potential G_eps(t) = int_0^t s F(sqrt(eps + s^2)) ds.
///
/// Closed forms are used where the family admits one; the remaining kinds
/// fall back to adaptive quadrature at the default tolerances.
pub fn eval_g(model: &ViscosityModel, t: f64, eps: f64) -> Result<f64> {
    if t < 0.0 || eps < 0.0 {
        return Err(Error::Domain(format!("need t >= 0 and eps >= 0, got t={t}, eps={eps}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    match model.kind {
        Kind::PowerLaw => Ok(shifted_power_primitive(eps, model.alpha, t)),
        Kind::Carreau => Ok(shifted_power_primitive(model.mu + eps, model.alpha, t)),
        Kind::Cross => Ok(0.5 * model.gamma * t * t + shifted_power_primitive(eps, model.alpha, t)),
        Kind::Constant => Ok(0.5 * model.value * t * t),
        Kind::LogPower | Kind::Table => {
            let m = model.clone();
            quadrature::integrate(
                move |s| s * eval_f(&m, (eps + s * s).sqrt()).unwrap_or(f64::NAN),
                0.0,
                t,
                QUAD_ABS_TOL,
                QUAD_REL_TOL,
            )
        }
    }
}

/// int_0^t s (c + s^2)^{-alpha/2} ds = ((c + t^2)^{1-alpha/2} - c^{1-alpha/2}) / (2-alpha)
fn shifted_power_primitive(c: f64, alpha: f64, t: f64) -> f64 {
    let p = 1.0 - 0.5 * alpha;
    ((c + t * t).powf(p) - c.powf(p)) / (2.0 - alpha)
}

/// theta with G(t) = theta t^2 F(theta t) for the power law of exponent alpha.
pub fn theta_for_power_law(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if alpha == 1.0 {
        Ok(1.0)
    } else {
        Ok((2.0 - alpha).powf(-1.0 / (1.0 - alpha)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    C1,
    C2,
    C3,
    C4,
    NearZero,
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Condition::C1 => "C1",
            Condition::C2 => "C2",
            Condition::C3 => "C3",
            Condition::C4 => "C4",
            Condition::NearZero => "near_zero",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct Witness {
    pub condition: Condition,
    pub t: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub c1: bool,
    pub c2: bool,
    pub c3: bool,
    pub c4: bool,
    pub near_zero: bool,
    pub witnesses: Vec<Witness>,
}

impl ConditionReport {
    pub fn all_passed(&self) -> bool {
        self.c1 && self.c2 && self.c3 && self.c4 && self.near_zero
    }
}

/// Default log-spaced sampling grid for condition checks:
/// 512 points spanning [1e-6, 1e3].
pub fn default_condition_grid() -> Vec<f64> {
    log_grid(1e-6, 1e3, 512)
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Sample the conditions (C1)-(C4) and the near-zero growth bound
/// F(t) <= t^{-(1+beta)} on the given grid. Failures are reported with
/// witnesses, never raised.
pub fn check_conditions(model: &ViscosityModel, t_grid: &[f64], beta: f64) -> ConditionReport {
    assert!(!t_grid.is_empty(), "t_grid must be non-empty");
    let f: Vec<f64> = t_grid
        .iter()
        .map(|&t| eval_f(model, t).unwrap_or(f64::NAN))
        .collect();
    let mut witnesses = Vec::new();

    // (C1): positivity and finiteness.
    let mut c1 = true;
    for (&t, &v) in t_grid.iter().zip(&f) {
        if !(v.is_finite() && v > 0.0) {
            c1 = false;
            witnesses.push(Witness { condition: Condition::C1, t, magnitude: v });
        }
    }

    // (C2): local Lipschitz, checked as difference quotients bounded by a
    // scale proportional to max|F|/t on each dyadic block [a, 2a).
    let mut c2 = true;
    let mut block_start = 0;
    while block_start + 1 < t_grid.len() {
        let a = t_grid[block_start];
        let mut block_end = block_start + 1;
        while block_end < t_grid.len() && t_grid[block_end] < 2.0 * a {
            block_end += 1;
        }
        let fmax = f[block_start..=block_end.min(t_grid.len() - 1)]
            .iter()
            .cloned()
            .fold(0.0_f64, f64::max);
        let bound = 100.0 * (1.0 + fmax) / a;
        for k in block_start..block_end.min(t_grid.len() - 1) {
            let q = (f[k + 1] - f[k]) / (t_grid[k + 1] - t_grid[k]);
            if !q.is_finite() || q.abs() > bound {
                c2 = false;
                witnesses.push(Witness {
                    condition: Condition::C2,
                    t: t_grid[k],
                    magnitude: q.abs(),
                });
            }
        }
        block_start = block_end;
    }

    // (C3): t F(t) non-decreasing on consecutive grid points.
    let mut c3 = true;
    for k in 0..t_grid.len() - 1 {
        let g0 = t_grid[k] * f[k];
        let g1 = t_grid[k + 1] * f[k + 1];
        if g1 < g0 * (1.0 - 1e-12) - 1e-300 {
            c3 = false;
            witnesses.push(Witness {
                condition: Condition::C3,
                t: t_grid[k + 1],
                magnitude: g0 - g1,
            });
        }
    }

    // (C4): F(t) <= K t^{-alpha_eff} for sampled t >= t0.
    let mut c4 = true;
    let a_eff = model.alpha_eff();
    for (&t, &v) in t_grid.iter().zip(&f) {
        if t < model.t0 {
            continue;
        }
        let bound = model.k_bound * t.powf(-a_eff);
        if v > bound * (1.0 + 1e-12) {
            c4 = false;
            witnesses.push(Witness { condition: Condition::C4, t, magnitude: v - bound });
        }
    }

    // Near-zero growth bound F(t) <= t^{-(1+beta)}, checked over the first
    // sampled decade (the bound is only required on some (0, delta_0)).
    assert!(beta > 0.0 && beta < 0.5, "beta must lie in (0, 1/2)");
    let mut near_zero = true;
    let t_cut = (t_grid[0] * 10.0).min(1.0);
    for (&t, &v) in t_grid.iter().zip(&f) {
        if t > t_cut {
            break;
        }
        let bound = t.powf(-(1.0 + beta));
        if v > bound * (1.0 + 1e-12) {
            near_zero = false;
            witnesses.push(Witness {
                condition: Condition::NearZero,
                t,
                magnitude: v - bound,
            });
        }
    }

    ConditionReport { c1, c2, c3, c4, near_zero, witnesses }
}

/// The named model catalog at default parameters.
pub fn catalog() -> Vec<(&'static str, ViscosityModel)> {
    vec![
        ("power_law", ViscosityModel::power_law(0.5).unwrap()),
        ("bingham", ViscosityModel::power_law(1.0).unwrap()),
        ("carreau", ViscosityModel::carreau(1.0, 1.0).unwrap()),
        ("cross", ViscosityModel::cross(1.0, 1.0).unwrap()),
        ("log_power", ViscosityModel::log_power(0.5, 0.4, 0.5).unwrap()),
        ("constant", ViscosityModel::constant(1.0).unwrap()),
    ]
}

pub fn catalog_model(name: &str) -> Option<ViscosityModel> {
    catalog().into_iter().find(|(n, _)| *n == name).map(|(_, m)| m)
}
