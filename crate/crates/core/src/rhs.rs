//! Right-hand side of the Galerkin coefficient ODE: Stokes term, viscous
//! nonlinearity, convection and modal forcing, assembled pseudo-spectrally.

use crate::basis::{
    analyze, synthesize_on, Against, BasisSpec, CoefficientVector, GridField, Rank, Want,
};
use crate::error::{Error, Result};
use crate::viscosity::{eval_f, eval_g, ViscosityModel};

/// Overflow guard for the pointwise viscosity field.
const VISCOSITY_OVERFLOW: f64 = 1e300;

/// Time envelope of one forced mode.
#[derive(Debug, Clone, Copy)]
pub enum Envelope {
    /// Constant amplitude on [0, T1).
    Constant(f64),
    /// a sin(pi t / T1): smooth ramp that vanishes at both endpoints.
    HalfSine(f64),
}

impl Envelope {
    fn eval(self, t: f64, t1: f64) -> f64 {
        match self {
            Envelope::Constant(a) => a,
            Envelope::HalfSine(a) => a * (std::f64::consts::PI * t / t1).sin(),
        }
    }
}

/// Sparse modal forcing, identically zero from the cutoff time T1 onwards.
#[derive(Debug, Clone)]
pub struct ForcingSpec {
    pub entries: Vec<(usize, Envelope)>,
    pub t1: f64,
}

impl ForcingSpec {
    pub fn none() -> Self {
        Self { entries: Vec::new(), t1: 0.0 }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest referenced mode index, if any.
    pub fn max_mode(&self) -> Option<usize> {
        self.entries.iter().map(|&(i, _)| i).max()
    }
}

/// Evaluate the forcing vector at time t. Exactly zero for t >= T1.
pub fn forcing_term(t: f64, spec: &ForcingSpec, basis: &BasisSpec) -> Result<Vec<f64>> {
    let mut f = vec![0.0; basis.len()];
    if let Some(max) = spec.max_mode() {
        if max >= basis.len() {
            return Err(Error::UnknownMode(format!(
                "forcing references mode {max}, basis has {} modes",
                basis.len()
            )));
        }
    }
    if t >= spec.t1 {
        return Ok(f);
    }
    for &(i, env) in &spec.entries {
        f[i] += env.eval(t, spec.t1);
    }
    Ok(f)
}

/// Squared dual (H^{-1}) norm of the forcing at time t: sum f_i^2 / lambda_i.
pub fn forcing_dual_norm_sq(t: f64, spec: &ForcingSpec, basis: &BasisSpec) -> Result<f64> {
    let f = forcing_term(t, spec, basis)?;
    Ok(f
        .iter()
        .zip(&basis.modes)
        .map(|(&fi, m)| fi * fi / m.lambda)
        .sum())
}

/// Stokes term: diagonal on the eigenbasis, component i = -lambda_i d_i / 2.
pub fn stokes_term(c: &CoefficientVector) -> Vec<f64> {
    c.basis
        .modes
        .iter()
        .zip(&c.d)
        .map(|(m, &d)| -0.5 * m.lambda * d)
        .collect()
}

/// Collocation grid used for the nonlinear terms: 3/2 zero-padding of the
/// basis grid, and never below the size that makes the quadratic convection
/// integrals exact (frequencies up to 3 m_max).
pub fn dealiased_grid(basis: &BasisSpec) -> usize {
    let padded = basis.grid_size.div_ceil(2) * 3;
    padded.max(3 * basis.m_max as usize + 2)
}

/// Pointwise Frobenius norm of the symmetric gradient on the dealiased grid,
/// together with the quadrature weight of one grid point.
pub fn deformation_magnitude(c: &CoefficientVector) -> (Vec<f64>, f64) {
    let g = dealiased_grid(&c.basis);
    let sym = synthesize_on(c, Want::SymGradient, g);
    let w = sym.weight();
    let npts = sym.points();
    let mut mag = vec![0.0; npts];
    for p in 0..npts {
        let mut s = 0.0;
        for comp in &sym.comps {
            s += comp[p] * comp[p];
        }
        mag[p] = s.sqrt();
    }
    (mag, w)
}

fn require_regularized(model: &ViscosityModel, eps: f64) -> Result<()> {
    if eps < 0.0 {
        return Err(Error::Domain(format!("eps must be >= 0, got {eps}")));
    }
    if eps == 0.0 && !model.bounded_at_zero() {
        return Err(Error::SingularEvaluation(format!(
            "{} is singular at rest; the viscous term needs eps > 0",
            model.kind.name()
        )));
    }
    Ok(())
}

/// Viscous nonlinearity: component i = -int F(sqrt(eps + |D(u)|^2)) D(u):D(w_i) dx.
pub fn viscous_nonlinear_term(
    c: &CoefficientVector,
    model: &ViscosityModel,
    eps: f64,
) -> Result<Vec<f64>> {
    require_regularized(model, eps)?;
    let g = dealiased_grid(&c.basis);
    let mut sym = synthesize_on(c, Want::SymGradient, g);
    let npts = sym.points();

    // scalar viscosity field F(sqrt(eps + |D|^2))
    let mut visc = vec![0.0; npts];
    for p in 0..npts {
        let mut s = eps;
        for comp in &sym.comps {
            s += comp[p] * comp[p];
        }
        let arg = s.sqrt();
        let v = if arg == 0.0 {
            // D(u) vanishes here, so the product below is zero regardless.
            0.0
        } else {
            eval_f(model, arg)?
        };
        if !v.is_finite() || v > VISCOSITY_OVERFLOW {
            return Err(Error::SingularEvaluation(format!(
                "viscosity field overflow: F({arg:.3e}) = {v:.3e}"
            )));
        }
        visc[p] = v;
    }

    for comp in &mut sym.comps {
        for p in 0..npts {
            comp[p] *= visc[p];
        }
    }
    let paired = analyze(&sym, Against::SymGradient, &c.basis)?;
    Ok(paired.into_iter().map(|v| -v).collect())
}

/// Convection: component i = -int (u . grad u) . w_i dx, dealiased.
pub fn convection_term(c: &CoefficientVector) -> Result<Vec<f64>> {
    let n = c.basis.n;
    let g = dealiased_grid(&c.basis);
    let vel = synthesize_on(c, Want::Velocity, g);
    let grad = synthesize_on(c, Want::Gradient, g);
    let npts = vel.points();
    let mut comps = vec![vec![0.0; npts]; n];
    for k in 0..n {
        let out = &mut comps[k];
        for j in 0..n {
            let uj = &vel.comps[j];
            let djuk = &grad.comps[j * n + k];
            for p in 0..npts {
                out[p] += uj[p] * djuk[p];
            }
        }
    }
    let advect = GridField { n, grid: g, rank: Rank::Vector, comps };
    let paired = analyze(&advect, Against::Velocity, &c.basis)?;
    Ok(paired.into_iter().map(|v| -v).collect())
}

/// Full right-hand side of the coefficient ODE, with the individual terms
/// retained for diagnostics.
#[derive(Debug, Clone)]
pub struct RhsBreakdown {
    pub stokes: Vec<f64>,
    pub viscous_nl: Vec<f64>,
    pub convection: Vec<f64>,
    pub forcing: Vec<f64>,
    pub total: Vec<f64>,
}

pub fn rhs(
    c: &CoefficientVector,
    model: &ViscosityModel,
    eps: f64,
    spec: &ForcingSpec,
    t: f64,
) -> Result<RhsBreakdown> {
    let stokes = stokes_term(c);
    let viscous_nl = viscous_nonlinear_term(c, model, eps)?;
    let convection = convection_term(c)?;
    let forcing = forcing_term(t, spec, &c.basis)?;
    let total = (0..c.d.len())
        .map(|i| stokes[i] + viscous_nl[i] + convection[i] + forcing[i])
        .collect();
    Ok(RhsBreakdown { stokes, viscous_nl, convection, forcing, total })
}

/// Regularized potential j_eps(u) = int G_eps(|D(u)|) dx by grid quadrature.
pub fn j_eps(c: &CoefficientVector, model: &ViscosityModel, eps: f64) -> Result<f64> {
    let (mag, w) = deformation_magnitude(c);
    let mut acc = 0.0;
    for m in mag {
        acc += eval_g(model, m, eps)?;
    }
    Ok(w * acc)
}

/// <j'_eps(u), u> = int F(sqrt(eps + |D(u)|^2)) |D(u)|^2 dx.
pub fn jprime_pairing(c: &CoefficientVector, model: &ViscosityModel, eps: f64) -> Result<f64> {
    require_regularized(model, eps)?;
    let (mag, w) = deformation_magnitude(c);
    let mut acc = 0.0;
    for m in mag {
        if m == 0.0 {
            continue;
        }
        acc += eval_f(model, (eps + m * m).sqrt())? * m * m;
    }
    Ok(w * acc)
}
