//! Divergence-free Laplacian eigenbasis on the periodic torus [0, 2pi)^N,
//! coefficient/grid transforms, and exact norm computations.

use std::sync::Arc;

use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::fftn::fft_nd;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Cos,
    Sin,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Cos => "cos",
            Phase::Sin => "sin",
        }
    }
}

/// One divergence-free trigonometric eigenmode of -Laplace on the torus.
#[derive(Debug, Clone)]
pub struct WaveMode {
    /// Integer wavevector; components beyond the spatial dimension are 0.
    pub xi: [i64; 3],
    pub phase: Phase,
    /// Which of the (N-1) directions orthogonal to xi this mode carries.
    pub dir_index: u8,
    /// Unit vector orthogonal to xi.
    pub direction: [f64; 3],
    /// Eigenvalue |xi|^2.
    pub lambda: f64,
}

/// The retained mode set (|xi|_inf <= m_max, one representative per +-xi)
/// together with the collocation grid resolution.
#[derive(Debug, Clone)]
pub struct BasisSpec {
    pub n: usize,
    pub m_max: i64,
    pub grid_size: usize,
    pub modes: Vec<WaveMode>,
}

impl BasisSpec {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Index of the mode with the given wavevector, phase and direction slot.
    pub fn find_mode(&self, xi: &[i64], phase: Phase, dir_index: u8) -> Option<usize> {
        let mut key = [0i64; 3];
        key[..xi.len()].copy_from_slice(xi);
        self.modes
            .iter()
            .position(|m| m.xi == key && m.phase == phase && m.dir_index == dir_index)
    }

    /// L2-normalization constant of every basis field.
    pub fn norm_const(&self) -> f64 {
        (2.0 / TWO_PI.powi(self.n as i32)).sqrt()
    }
}

/// Keep exactly one representative of each +-xi pair: the first nonzero
/// component is positive.
fn is_canonical(xi: &[i64; 3]) -> bool {
    for &c in xi {
        if c > 0 {
            return true;
        }
        if c < 0 {
            return false;
        }
    }
    false
}

/// Integer-exact orthogonal directions spanning the plane orthogonal to xi.
fn directions(n: usize, xi: &[i64; 3]) -> Vec<[f64; 3]> {
    if n == 2 {
        // xi-perp / |xi|
        let norm = ((xi[0] * xi[0] + xi[1] * xi[1]) as f64).sqrt();
        vec![[-(xi[1] as f64) / norm, xi[0] as f64 / norm, 0.0]]
    } else {
        // cross with an axis not parallel to xi, then complete the triad
        let axis: [i64; 3] = if xi[0] == 0 && xi[1] == 0 {
            [1, 0, 0]
        } else {
            [0, 0, 1]
        };
        let c1 = [
            xi[1] * axis[2] - xi[2] * axis[1],
            xi[2] * axis[0] - xi[0] * axis[2],
            xi[0] * axis[1] - xi[1] * axis[0],
        ];
        let c2 = [
            xi[1] * c1[2] - xi[2] * c1[1],
            xi[2] * c1[0] - xi[0] * c1[2],
            xi[0] * c1[1] - xi[1] * c1[0],
        ];
        let normalize = |v: [i64; 3]| {
            let n = ((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) as f64).sqrt();
            [v[0] as f64 / n, v[1] as f64 / n, v[2] as f64 / n]
        };
        vec![normalize(c1), normalize(c2)]
    }
}

/// Build the basis with modes |xi|_inf <= m_max on a grid of `grid_size`
/// points per axis.
pub fn build_basis(n: usize, m_max: i64, grid_size: usize) -> Result<BasisSpec> {
    if n != 2 && n != 3 {
        return Err(Error::Config(format!("spatial dimension must be 2 or 3, got {n}")));
    }
    if m_max < 1 {
        return Err(Error::Config(format!("m_max must be >= 1, got {m_max}")));
    }
    if (grid_size as i64) < 3 * m_max {
        return Err(Error::Config(format!(
            "grid_size {grid_size} is below the dealiasing margin 3*m_max = {}",
            3 * m_max
        )));
    }

    let mut wavevectors: Vec<[i64; 3]> = Vec::new();
    let range = -m_max..=m_max;
    if n == 2 {
        for a in range.clone() {
            for b in range.clone() {
                let xi = [a, b, 0];
                if xi != [0, 0, 0] && is_canonical(&xi) {
                    wavevectors.push(xi);
                }
            }
        }
    } else {
        for a in range.clone() {
            for b in range.clone() {
                for c in range.clone() {
                    let xi = [a, b, c];
                    if xi != [0, 0, 0] && is_canonical(&xi) {
                        wavevectors.push(xi);
                    }
                }
            }
        }
    }

    // deterministic ordering: (|xi|^2, xi_1, xi_2, xi_3), then direction, phase
    wavevectors.sort_by_key(|xi| {
        (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2], xi[0], xi[1], xi[2])
    });

    let mut modes = Vec::with_capacity(wavevectors.len() * 2 * (n - 1));
    for xi in &wavevectors {
        let lambda = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]) as f64;
        for (di, dir) in directions(n, xi).into_iter().enumerate() {
            for phase in [Phase::Cos, Phase::Sin] {
                modes.push(WaveMode {
                    xi: *xi,
                    phase,
                    dir_index: di as u8,
                    direction: dir,
                    lambda,
                });
            }
        }
    }

    Ok(BasisSpec { n, m_max, grid_size, modes })
}

/// A state expressed in the basis: u(t) = sum_i d_i w_i.
#[derive(Debug, Clone)]
pub struct CoefficientVector {
    pub basis: Arc<BasisSpec>,
    pub d: Vec<f64>,
    pub t: f64,
}

impl CoefficientVector {
    pub fn zero(basis: Arc<BasisSpec>) -> Self {
        let m = basis.len();
        Self { basis, d: vec![0.0; m], t: 0.0 }
    }

    pub fn from_coeffs(basis: Arc<BasisSpec>, d: Vec<f64>, t: f64) -> Result<Self> {
        if d.len() != basis.len() {
            return Err(Error::Shape(format!(
                "coefficient length {} does not match basis size {}",
                d.len(),
                basis.len()
            )));
        }
        Ok(Self { basis, d, t })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rank {
    Scalar,
    Vector,
    /// n*n components in row-major (j, k) order, component [j*n+k].
    Tensor,
}

/// Pointwise values over the collocation grid.
#[derive(Debug, Clone)]
pub struct GridField {
    pub n: usize,
    pub grid: usize,
    pub rank: Rank,
    pub comps: Vec<Vec<f64>>,
}

impl GridField {
    pub fn points(&self) -> usize {
        self.grid.pow(self.n as u32)
    }

    /// Torus quadrature weight of one grid point.
    pub fn weight(&self) -> f64 {
        (TWO_PI / self.grid as f64).powi(self.n as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Want {
    Velocity,
    Gradient,
    SymGradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Against {
    /// Pair against the basis fields w_i.
    Velocity,
    /// Pair against the symmetric gradients D(w_i).
    SymGradient,
}

fn flat_index(freq: &[i64; 3], n: usize, g: usize) -> usize {
    let gi = g as i64;
    let mut idx = 0usize;
    for a in 0..n {
        let k = freq[a].rem_euclid(gi) as usize;
        idx = idx * g + k;
    }
    idx
}

/// Spectral coefficients of the velocity on a full Fourier grid of size g^n:
/// one complex array per component, indexed row-major with wrapped frequency.
fn velocity_spectra(c: &CoefficientVector, g: usize) -> Vec<Vec<Complex<f64>>> {
    let basis = &c.basis;
    let n = basis.n;
    let npts = g.pow(n as u32);
    let half = basis.norm_const() * 0.5;
    let mut spec = vec![vec![Complex::default(); npts]; n];
    for (mode, &d) in basis.modes.iter().zip(&c.d) {
        if d == 0.0 {
            continue;
        }
        let a = d * half;
        let (cp, cm) = match mode.phase {
            Phase::Cos => (Complex::new(a, 0.0), Complex::new(a, 0.0)),
            Phase::Sin => (Complex::new(0.0, -a), Complex::new(0.0, a)),
        };
        let ip = flat_index(&mode.xi, n, g);
        let neg = [-mode.xi[0], -mode.xi[1], -mode.xi[2]];
        let im = flat_index(&neg, n, g);
        for k in 0..n {
            let e = mode.direction[k];
            spec[k][ip] += cp * e;
            spec[k][im] += cm * e;
        }
    }
    spec
}

/// Spectra of the full velocity gradient: entry [j*n+k] carries d_j u_k.
fn gradient_spectra(c: &CoefficientVector, g: usize) -> Vec<Vec<Complex<f64>>> {
    let basis = &c.basis;
    let n = basis.n;
    let npts = g.pow(n as u32);
    let half = basis.norm_const() * 0.5;
    let mut spec = vec![vec![Complex::default(); npts]; n * n];
    let i_unit = Complex::new(0.0, 1.0);
    for (mode, &d) in basis.modes.iter().zip(&c.d) {
        if d == 0.0 {
            continue;
        }
        let a = d * half;
        let (cp, cm) = match mode.phase {
            Phase::Cos => (Complex::new(a, 0.0), Complex::new(a, 0.0)),
            Phase::Sin => (Complex::new(0.0, -a), Complex::new(0.0, a)),
        };
        let ip = flat_index(&mode.xi, n, g);
        let neg = [-mode.xi[0], -mode.xi[1], -mode.xi[2]];
        let im = flat_index(&neg, n, g);
        for j in 0..n {
            let xj = mode.xi[j] as f64;
            let fp = i_unit * xj * cp;
            let fm = -i_unit * xj * cm;
            for k in 0..n {
                let e = mode.direction[k];
                spec[j * n + k][ip] += fp * e;
                spec[j * n + k][im] += fm * e;
            }
        }
    }
    spec
}

fn spectra_to_grid(spec: Vec<Vec<Complex<f64>>>, n: usize, g: usize) -> Vec<Vec<f64>> {
    let dims: Vec<usize> = vec![g; n];
    spec.into_iter()
        .map(|mut s| {
            fft_nd(&mut s, &dims, true);
            s.into_iter().map(|z| z.re).collect()
        })
        .collect()
}

/// Evaluate the requested field on a grid of `g` points per axis.
pub fn synthesize_on(c: &CoefficientVector, want: Want, g: usize) -> GridField {
    let n = c.basis.n;
    match want {
        Want::Velocity => GridField {
            n,
            grid: g,
            rank: Rank::Vector,
            comps: spectra_to_grid(velocity_spectra(c, g), n, g),
        },
        Want::Gradient => GridField {
            n,
            grid: g,
            rank: Rank::Tensor,
            comps: spectra_to_grid(gradient_spectra(c, g), n, g),
        },
        Want::SymGradient => {
            let grad = spectra_to_grid(gradient_spectra(c, g), n, g);
            let npts = g.pow(n as u32);
            let mut comps = vec![vec![0.0; npts]; n * n];
            for j in 0..n {
                for k in 0..n {
                    let (a, b) = (&grad[j * n + k], &grad[k * n + j]);
                    let out = &mut comps[j * n + k];
                    for p in 0..npts {
                        out[p] = 0.5 * (a[p] + b[p]);
                    }
                }
            }
            GridField { n, grid: g, rank: Rank::Tensor, comps }
        }
    }
}

/// Evaluate on the basis collocation grid.
pub fn synthesize(c: &CoefficientVector, want: Want) -> GridField {
    synthesize_on(c, want, c.basis.grid_size)
}

/// Torus quadrature of `field` against each basis mode (velocity pairing) or
/// against each D(w_i) (symmetric-gradient pairing). Exact for band-limited
/// integrands resolved by the field's grid.
pub fn analyze(field: &GridField, against: Against, basis: &BasisSpec) -> Result<Vec<f64>> {
    let n = basis.n;
    if field.n != n {
        return Err(Error::Shape(format!(
            "field dimension {} does not match basis dimension {n}",
            field.n
        )));
    }
    let expected = match against {
        Against::Velocity => (Rank::Vector, n),
        Against::SymGradient => (Rank::Tensor, n * n),
    };
    if field.rank != expected.0 || field.comps.len() != expected.1 {
        return Err(Error::Shape(format!(
            "pairing expects {:?} with {} components, got {:?} with {}",
            expected.0,
            expected.1,
            field.rank,
            field.comps.len()
        )));
    }

    let g = field.grid;
    let dims: Vec<usize> = vec![g; n];
    let spec: Vec<Vec<Complex<f64>>> = field
        .comps
        .iter()
        .map(|comp| {
            let mut s: Vec<Complex<f64>> = comp.iter().map(|&v| Complex::new(v, 0.0)).collect();
            fft_nd(&mut s, &dims, false);
            s
        })
        .collect();

    let w = field.weight();
    let cnorm = basis.norm_const();
    let mut out = Vec::with_capacity(basis.len());
    for mode in &basis.modes {
        let ip = flat_index(&mode.xi, n, g);
        let val = match against {
            Against::Velocity => {
                let mut acc = Complex::new(0.0, 0.0);
                for k in 0..n {
                    acc += spec[k][ip] * mode.direction[k];
                }
                let projected = match mode.phase {
                    Phase::Cos => acc.re,
                    Phase::Sin => -acc.im,
                };
                cnorm * w * projected
            }
            Against::SymGradient => {
                let mut acc = Complex::new(0.0, 0.0);
                for j in 0..n {
                    for k in 0..n {
                        let sym = mode.direction[k] * mode.xi[j] as f64
                            + mode.direction[j] * mode.xi[k] as f64;
                        acc += spec[j * n + k][ip] * sym;
                    }
                }
                let projected = match mode.phase {
                    Phase::Cos => acc.im,
                    Phase::Sin => acc.re,
                };
                0.5 * cnorm * w * projected
            }
        };
        out.push(val);
    }
    Ok(out)
}

/// Exact norms of a state.
#[derive(Debug, Clone, Copy)]
pub struct Norms {
    pub l2: f64,
    pub h1: f64,
    /// int |D(u)|^2 dx = h1^2 / 2 (Korn equality for divergence-free fields).
    pub dissipation: f64,
    pub l4: f64,
}

pub fn norms(c: &CoefficientVector) -> Norms {
    let mut l2sq = 0.0;
    let mut h1sq = 0.0;
    for (mode, &d) in c.basis.modes.iter().zip(&c.d) {
        l2sq += d * d;
        h1sq += mode.lambda * d * d;
    }
    let vel = synthesize(c, Want::Velocity);
    let w = vel.weight();
    let mut q = 0.0;
    for p in 0..vel.points() {
        let mut s = 0.0;
        for comp in &vel.comps {
            s += comp[p] * comp[p];
        }
        q += s * s;
    }
    Norms {
        l2: l2sq.sqrt(),
        h1: h1sq.sqrt(),
        dissipation: 0.5 * h1sq,
        l4: (w * q).powf(0.25),
    }
}

/// Project a velocity grid field onto the basis. Rejects fields whose mean
/// or divergence exceeds 1e-8 in the grid L2 norm.
pub fn project_function(field: &GridField, basis: &Arc<BasisSpec>) -> Result<CoefficientVector> {
    let n = basis.n;
    if field.rank != Rank::Vector || field.n != n {
        return Err(Error::Shape("projection expects a velocity field".into()));
    }
    let g = field.grid;
    let npts = field.points();
    let dims: Vec<usize> = vec![g; n];
    let spec: Vec<Vec<Complex<f64>>> = field
        .comps
        .iter()
        .map(|comp| {
            let mut s: Vec<Complex<f64>> = comp.iter().map(|&v| Complex::new(v, 0.0)).collect();
            fft_nd(&mut s, &dims, false);
            s
        })
        .collect();

    let mut mean_sq = 0.0;
    for s in &spec {
        let m = s[0] / npts as f64;
        mean_sq += m.norm_sqr();
    }
    if mean_sq.sqrt() > 1e-8 {
        return Err(Error::Rejected(format!(
            "field mean {:.3e} exceeds 1e-8",
            mean_sq.sqrt()
        )));
    }

    // L2 norm of div(u) via Parseval over the full spectral grid
    let gi = g as i64;
    let vol = TWO_PI.powi(n as i32);
    let mut div_sq = 0.0;
    for flat in 0..npts {
        let mut rem = flat;
        let mut freq = [0i64; 3];
        for a in (0..n).rev() {
            let k = (rem % g) as i64;
            rem /= g;
            freq[a] = if k > gi / 2 { k - gi } else { k };
        }
        let mut dhat = Complex::new(0.0, 0.0);
        for (j, s) in spec.iter().enumerate() {
            dhat += Complex::new(0.0, freq[j] as f64) * s[flat] / npts as f64;
        }
        div_sq += dhat.norm_sqr();
    }
    let div_norm = (vol * div_sq).sqrt();
    if div_norm > 1e-8 {
        return Err(Error::Rejected(format!(
            "field divergence {div_norm:.3e} exceeds 1e-8"
        )));
    }

    let d = analyze(field, Against::Velocity, basis)?;
    Ok(CoefficientVector { basis: Arc::clone(basis), d, t: 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(m: i64, g: usize) -> Arc<BasisSpec> {
        Arc::new(build_basis(2, m, g).unwrap())
    }

    fn unit(b: &Arc<BasisSpec>, i: usize) -> CoefficientVector {
        let mut c = CoefficientVector::zero(Arc::clone(b));
        c.d[i] = 1.0;
        c
    }

    /// Brute-force enumeration of the wavevector count for |xi|_inf <= m.
    fn count_wavevectors(m: i64) -> usize {
        let mut seen = std::collections::HashSet::new();
        for a in -m..=m {
            for b in -m..=m {
                if (a, b) == (0, 0) {
                    continue;
                }
                let key = if (a, b) < (-a, -b) { (a, b) } else { (-a, -b) };
                seen.insert(key);
            }
        }
        seen.len()
    }

    #[test]
    fn mode_counts() {
        let b1 = build_basis(2, 1, 4).unwrap();
        assert_eq!(b1.len(), 8);
        let vecs: std::collections::HashSet<[i64; 3]> =
            b1.modes.iter().map(|m| m.xi).collect();
        assert_eq!(vecs.len(), 4);
        for xi in [[1, 0, 0], [0, 1, 0], [1, 1, 0], [1, -1, 0]] {
            assert!(vecs.contains(&xi), "missing {xi:?}");
        }

        let b2 = build_basis(2, 2, 6).unwrap();
        assert_eq!(count_wavevectors(2), 12);
        assert_eq!(b2.len(), 24);
    }

    #[test]
    fn eigenvalues() {
        let b = basis(2, 6);
        let i = b.find_mode(&[1, 1], Phase::Cos, 0).unwrap();
        assert_eq!(b.modes[i].lambda, 2.0);
    }

    #[test]
    fn direction_orthogonality_is_exact() {
        for n in [2usize, 3] {
            let b = build_basis(n, 2, 8).unwrap();
            for m in &b.modes {
                let dot: f64 = (0..n).map(|k| m.direction[k] * m.xi[k] as f64).sum();
                assert!(dot.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn grid_too_small_rejected() {
        assert!(build_basis(2, 4, 11).is_err());
    }

    #[test]
    fn orthonormality_gram_identity() {
        let b = basis(2, 8);
        for i in 0..b.len() {
            let c = unit(&b, i);
            let vel = synthesize(&c, Want::Velocity);
            let row = analyze(&vel, Against::Velocity, &b).unwrap();
            for (j, &v) in row.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-12, "gram[{i}][{j}] = {v}");
            }
        }
    }

    #[test]
    fn roundtrip_random_coefficients() {
        use rand::{Rng, SeedableRng};
        let b = basis(3, 10);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let d: Vec<f64> = (0..b.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = CoefficientVector::from_coeffs(Arc::clone(&b), d.clone(), 0.0).unwrap();
        let back = analyze(&synthesize(&c, Want::Velocity), Against::Velocity, &b).unwrap();
        for (a, e) in back.iter().zip(&d) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_coefficients_give_zero_field() {
        let b = basis(2, 6);
        let c = CoefficientVector::zero(Arc::clone(&b));
        let f = synthesize(&c, Want::Velocity);
        assert!(f.comps.iter().all(|c| c.iter().all(|&v| v == 0.0)));
        let a = analyze(&f, Against::Velocity, &b).unwrap();
        assert!(a.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_mode_closed_form_value() {
        // cos mode xi = (1,0): u(x) = sqrt(2)/(2pi) * (0, 1) * cos(x1),
        // so u(0) = norm * direction.
        let b = basis(1, 4);
        let i = b.find_mode(&[1, 0], Phase::Cos, 0).unwrap();
        let c = unit(&b, i);
        let f = synthesize(&c, Want::Velocity);
        let norm = b.norm_const();
        let dir = b.modes[i].direction;
        for k in 0..2 {
            assert!((f.comps[k][0] - norm * dir[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn divergence_free_on_grid() {
        use rand::{Rng, SeedableRng};
        let b = basis(3, 12);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let d: Vec<f64> = (0..b.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = CoefficientVector::from_coeffs(Arc::clone(&b), d, 0.0).unwrap();
        let grad = synthesize(&c, Want::Gradient);
        let n = 2;
        for p in 0..grad.points() {
            let div: f64 = (0..n).map(|j| grad.comps[j * n + j][p]).sum();
            assert!(div.abs() < 1e-12, "div = {div}");
        }
    }

    #[test]
    fn korn_equality() {
        use rand::{Rng, SeedableRng};
        let b = basis(3, 12);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let d: Vec<f64> = (0..b.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = CoefficientVector::from_coeffs(Arc::clone(&b), d, 0.0).unwrap();
        let nm = norms(&c);
        // quadrature of |D(u)|^2
        let sym = synthesize(&c, Want::SymGradient);
        let w = sym.weight();
        let mut q = 0.0;
        for p in 0..sym.points() {
            for comp in &sym.comps {
                q += comp[p] * comp[p];
            }
        }
        q *= w;
        assert!((q - nm.dissipation).abs() < 1e-12 * (1.0 + q));
        assert!((nm.dissipation - 0.5 * nm.h1 * nm.h1).abs() < 1e-14 * (1.0 + q));
    }

    #[test]
    fn sym_gradient_pairing_korn_per_mode() {
        // analyze(synthesize(e_j, sym_gradient), D(w_i)) = lambda_j/2 delta_ij
        let b = basis(2, 8);
        for j in [0usize, 5, 13, 20] {
            let c = unit(&b, j);
            let sym = synthesize(&c, Want::SymGradient);
            let row = analyze(&sym, Against::SymGradient, &b).unwrap();
            for (i, &v) in row.iter().enumerate() {
                let expect = if i == j { 0.5 * b.modes[j].lambda } else { 0.0 };
                assert!((v - expect).abs() < 1e-12, "pair[{i}] = {v}, expect {expect}");
            }
        }
    }

    #[test]
    fn norm_examples() {
        let b = basis(2, 8);
        let i = b.find_mode(&[1, 0], Phase::Cos, 0).unwrap();
        let c = unit(&b, i);
        let nm = norms(&c);
        assert!((nm.l2 - 1.0).abs() < 1e-13);
        assert!((nm.h1 - 1.0).abs() < 1e-13);
        assert!((nm.dissipation - 0.5).abs() < 1e-13);

        let z = CoefficientVector::zero(Arc::clone(&b));
        let nz = norms(&z);
        assert_eq!(nz.l2, 0.0);
        assert_eq!(nz.h1, 0.0);
        assert_eq!(nz.l4, 0.0);

        let j = b.find_mode(&[0, 1], Phase::Sin, 0).unwrap();
        let mut c2 = CoefficientVector::zero(Arc::clone(&b));
        c2.d[i] = 3.0;
        c2.d[j] = 4.0;
        assert!((norms(&c2).l2 - 5.0).abs() < 1e-13);
    }

    #[test]
    fn projection_identity_case() {
        let b = basis(2, 8);
        let c = unit(&b, 3);
        let vel = synthesize(&c, Want::Velocity);
        let p = project_function(&vel, &b).unwrap();
        for (i, &v) in p.d.iter().enumerate() {
            let expect = if i == 3 { 1.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_rejects_nonzero_mean() {
        let b = basis(2, 8);
        let npts = 8 * 8;
        let field = GridField {
            n: 2,
            grid: 8,
            rank: Rank::Vector,
            comps: vec![vec![1.0; npts], vec![0.0; npts]],
        };
        assert!(matches!(
            project_function(&field, &b),
            Err(Error::Rejected(_))
        ));
    }

    #[test]
    fn projection_rejects_divergent_field() {
        // u = (sin x, 0) has div = cos x != 0 and zero mean.
        let b = basis(2, 8);
        let g = 8usize;
        let mut cx = vec![0.0; g * g];
        for i in 0..g {
            for j in 0..g {
                cx[i * g + j] = (TWO_PI * i as f64 / g as f64).sin();
            }
        }
        let field = GridField {
            n: 2,
            grid: g,
            rank: Rank::Vector,
            comps: vec![cx, vec![0.0; g * g]],
        };
        assert!(matches!(
            project_function(&field, &b),
            Err(Error::Rejected(_))
        ));
    }

    #[test]
    fn analyze_shape_mismatch() {
        let b = basis(2, 8);
        let c = unit(&b, 0);
        let sym = synthesize(&c, Want::SymGradient);
        assert!(analyze(&sym, Against::Velocity, &b).is_err());
        let vel = synthesize(&c, Want::Velocity);
        assert!(analyze(&vel, Against::SymGradient, &b).is_err());
    }

    #[test]
    fn eigenfunction_property() {
        // -Laplace acts diagonally: scaling coefficients by lambda_i commutes
        // with synthesis of the (band-limited) field.
        let b = basis(2, 8);
        let c = unit(&b, 7);
        let lam = b.modes[7].lambda;
        let scaled = CoefficientVector::from_coeffs(
            Arc::clone(&b),
            c.d.iter().map(|&v| v * lam).collect(),
            0.0,
        )
        .unwrap();
        let a = analyze(&synthesize(&scaled, Want::Velocity), Against::Velocity, &b).unwrap();
        for (i, &v) in a.iter().enumerate() {
            let expect = if i == 7 { lam } else { 0.0 };
            assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn three_dimensional_basis_roundtrip() {
        use rand::{Rng, SeedableRng};
        let b = Arc::new(build_basis(3, 1, 4).unwrap());
        // 13 wavevectors, 2 directions, 2 phases
        assert_eq!(b.len(), 13 * 2 * 2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(19);
        let d: Vec<f64> = (0..b.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = CoefficientVector::from_coeffs(Arc::clone(&b), d.clone(), 0.0).unwrap();
        let back = analyze(&synthesize(&c, Want::Velocity), Against::Velocity, &b).unwrap();
        for (a, e) in back.iter().zip(&d) {
            assert!((a - e).abs() < 1e-12);
        }
    }
}
