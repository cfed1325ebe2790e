//! Flat INI-like experiment configuration: parsing, validation, defaults and
//! the resolved-config echo.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::basis::{BasisSpec, CoefficientVector, GridField, Phase, Rank, TWO_PI};
use crate::error::{Error, Result};
use crate::integrator::IntegratorConfig;
use crate::rhs::{Envelope, ForcingSpec};
use crate::viscosity::ViscosityModel;

/// Named initial-condition presets.
#[derive(Debug, Clone)]
pub enum InitialCondition {
    SingleMode { xi: [i64; 3], phase: Phase, dir: u8, amplitude: f64 },
    TaylorGreen { amplitude: f64 },
    RandomSeeded { seed: u64, slope: f64, amplitude: f64 },
}

/// Fully validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model_name: String,
    pub model: ViscosityModel,
    pub n: usize,
    pub m_max: i64,
    pub grid_size: usize,
    pub eps: f64,
    pub initial: InitialCondition,
    pub forcing: ForcingSpec,
    pub envelope_kind: String,
    pub forcing_modes: Vec<(usize, f64)>,
    pub integrator: IntegratorConfig,
}

impl ExperimentConfig {
    pub fn build_basis(&self) -> Result<Arc<BasisSpec>> {
        Ok(Arc::new(crate::basis::build_basis(
            self.n,
            self.m_max,
            self.grid_size,
        )?))
    }

    /// Realize the initial-condition preset on a basis.
    pub fn build_initial(&self, basis: &Arc<BasisSpec>) -> Result<CoefficientVector> {
        match &self.initial {
            InitialCondition::SingleMode { xi, phase, dir, amplitude } => {
                let i = basis.find_mode(&xi[..basis.n], *phase, *dir).ok_or_else(|| {
                    Error::UnknownMode(format!("initial mode {xi:?} outside the basis"))
                })?;
                let mut c = CoefficientVector::zero(Arc::clone(basis));
                c.d[i] = *amplitude;
                Ok(c)
            }
            InitialCondition::TaylorGreen { amplitude } => {
                taylor_green(basis, *amplitude)
            }
            InitialCondition::RandomSeeded { seed, slope, amplitude } => {
                use rand::{Rng, SeedableRng};
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
                let mut d: Vec<f64> = basis
                    .modes
                    .iter()
                    .map(|m| rng.gen_range(-1.0..1.0) * m.lambda.powf(-0.5 * slope))
                    .collect();
                let norm: f64 = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm == 0.0 {
                    return Err(Error::Config("degenerate random initial state".into()));
                }
                for v in &mut d {
                    *v *= amplitude / norm;
                }
                CoefficientVector::from_coeffs(Arc::clone(basis), d, 0.0)
            }
        }
    }

    /// Canonical plain-text echo of the resolved configuration.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        s.push_str("[model]\n");
        s.push_str(&format!("kind = {}\n", self.model_name));
        s.push_str(&format!("alpha = {}\n", self.model.alpha));
        s.push_str(&format!("mu = {}\n", self.model.mu));
        s.push_str(&format!("gamma = {}\n", self.model.gamma));
        s.push_str(&format!("beta = {}\n", self.model.beta));
        s.push_str(&format!("value = {}\n", self.model.value));
        s.push_str("\n[basis]\n");
        s.push_str(&format!("n = {}\n", self.n));
        s.push_str(&format!("m_max = {}\n", self.m_max));
        s.push_str(&format!("grid_size = {}\n", self.grid_size));
        s.push_str("\n[initial]\n");
        match &self.initial {
            InitialCondition::SingleMode { xi, phase, dir, amplitude } => {
                s.push_str("preset = single_mode\n");
                s.push_str(&format!("xi = {} {}\n", xi[0], xi[1]));
                s.push_str(&format!("phase = {}\n", phase.name()));
                s.push_str(&format!("dir = {dir}\n"));
                s.push_str(&format!("amplitude = {amplitude}\n"));
            }
            InitialCondition::TaylorGreen { amplitude } => {
                s.push_str("preset = taylor_green\n");
                s.push_str(&format!("amplitude = {amplitude}\n"));
            }
            InitialCondition::RandomSeeded { seed, slope, amplitude } => {
                s.push_str("preset = random_seeded\n");
                s.push_str(&format!("seed = {seed}\n"));
                s.push_str(&format!("slope = {slope}\n"));
                s.push_str(&format!("amplitude = {amplitude}\n"));
            }
        }
        s.push_str("\n[forcing]\n");
        let modes: Vec<String> = self
            .forcing_modes
            .iter()
            .map(|(i, a)| format!("{i}:{a}"))
            .collect();
        s.push_str(&format!("modes = {}\n", modes.join(" ")));
        s.push_str(&format!("envelope = {}\n", self.envelope_kind));
        s.push_str(&format!("t1 = {}\n", self.forcing.t1));
        s.push_str("\n[integrator]\n");
        let ic = &self.integrator;
        s.push_str(&format!("dt_init = {}\n", ic.dt_init));
        s.push_str(&format!("dt_min = {}\n", ic.dt_min));
        s.push_str(&format!("dt_max = {}\n", ic.dt_max));
        s.push_str(&format!("rel_tol = {}\n", ic.rel_tol));
        s.push_str(&format!("abs_tol = {}\n", ic.abs_tol));
        s.push_str(&format!("t_end = {}\n", ic.t_end));
        s.push_str(&format!("stop_tol = {}\n", ic.stop_tol));
        s.push_str(&format!("record_every = {}\n", ic.record_every));
        if let Some(h) = ic.record_uniform {
            s.push_str(&format!("record_uniform = {h}\n"));
        }
        s.push_str("\n[run]\n");
        s.push_str(&format!("eps = {}\n", self.eps));
        s
    }
}

/// Taylor-Green vortex (sin x1 cos x2, -cos x1 sin x2), scaled to the given
/// L2 norm, realized by projection onto the divergence-free basis.
fn taylor_green(basis: &Arc<BasisSpec>, amplitude: f64) -> Result<CoefficientVector> {
    if basis.n != 2 {
        return Err(Error::Config("taylor_green preset is two-dimensional".into()));
    }
    let g = basis.grid_size;
    if g < 4 {
        return Err(Error::Config(format!(
            "taylor_green needs grid_size >= 4, got {g}"
        )));
    }
    let mut u1 = vec![0.0; g * g];
    let mut u2 = vec![0.0; g * g];
    for i in 0..g {
        for j in 0..g {
            let x = TWO_PI * i as f64 / g as f64;
            let y = TWO_PI * j as f64 / g as f64;
            u1[i * g + j] = x.sin() * y.cos();
            u2[i * g + j] = -(x.cos()) * y.sin();
        }
    }
    let field = GridField { n: 2, grid: g, rank: Rank::Vector, comps: vec![u1, u2] };
    let mut c = crate::basis::project_function(&field, basis)?;
    let norm: f64 = c.d.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in &mut c.d {
        *v *= amplitude / norm;
    }
    Ok(c)
}

type Section = BTreeMap<String, (usize, String)>;

/// Parse the flat INI-like document into section -> key -> (line, value).
fn parse_sections(text: &str) -> Result<BTreeMap<String, Section>> {
    let mut out: BTreeMap<String, Section> = BTreeMap::new();
    let mut current = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or(Error::Parse {
                line: line_no,
                msg: format!("unterminated section header `{line}`"),
            })?;
            current = name.trim().to_string();
            out.entry(current.clone()).or_default();
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(Error::Parse {
            line: line_no,
            msg: format!("expected `key = value`, got `{line}`"),
        })?;
        if current.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                msg: "key outside of any [section]".into(),
            });
        }
        let key = key.trim().to_string();
        let section = out.get_mut(&current).unwrap();
        if section.contains_key(&key) {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("duplicate key `{key}`"),
            });
        }
        section.insert(key, (line_no, value.trim().to_string()));
    }
    Ok(out)
}

fn take(section: &mut Section, key: &str) -> Option<(usize, String)> {
    section.remove(key)
}

fn parse_f64(key: &str, v: (usize, String)) -> Result<f64> {
    v.1.parse::<f64>().map_err(|_| Error::Validation {
        key: key.to_string(),
        msg: format!("`{}` is not a number (line {})", v.1, v.0),
    })
}

fn parse_usize(key: &str, v: (usize, String)) -> Result<usize> {
    v.1.parse::<usize>().map_err(|_| Error::Validation {
        key: key.to_string(),
        msg: format!("`{}` is not a nonnegative integer (line {})", v.1, v.0),
    })
}

fn parse_i64(key: &str, v: (usize, String)) -> Result<i64> {
    v.1.parse::<i64>().map_err(|_| Error::Validation {
        key: key.to_string(),
        msg: format!("`{}` is not an integer (line {})", v.1, v.0),
    })
}

fn reject_unknown(section_name: &str, section: &Section) -> Result<()> {
    if let Some((key, (line, _))) = section.iter().next() {
        return Err(Error::Validation {
            key: format!("{section_name}.{key}"),
            msg: format!("unknown key (line {line})"),
        });
    }
    Ok(())
}

/// Parse and validate an experiment configuration document, applying the
/// defaults eps = 1e-6, stop_tol = 1e-10, rel_tol = 1e-8, grid_size = 3 m_max.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut sections = parse_sections(text)?;
    for name in sections.keys() {
        if !matches!(
            name.as_str(),
            "model" | "basis" | "initial" | "forcing" | "integrator" | "run"
        ) {
            return Err(Error::Validation {
                key: name.clone(),
                msg: "unknown section".into(),
            });
        }
    }

    // [model]
    let mut model_sec = sections.remove("model").ok_or(Error::Validation {
        key: "model".into(),
        msg: "missing [model] section".into(),
    })?;
    let kind = take(&mut model_sec, "kind")
        .ok_or(Error::Validation { key: "model.kind".into(), msg: "missing".into() })?
        .1;
    let alpha = take(&mut model_sec, "alpha").map(|v| parse_f64("model.alpha", v)).transpose()?;
    let mu = take(&mut model_sec, "mu").map(|v| parse_f64("model.mu", v)).transpose()?;
    let gamma = take(&mut model_sec, "gamma").map(|v| parse_f64("model.gamma", v)).transpose()?;
    let beta = take(&mut model_sec, "beta").map(|v| parse_f64("model.beta", v)).transpose()?;
    let value = take(&mut model_sec, "value").map(|v| parse_f64("model.value", v)).transpose()?;
    let points = take(&mut model_sec, "points");
    let table_file = take(&mut model_sec, "table_file");
    reject_unknown("model", &model_sec)?;

    let wrap = |r: Result<ViscosityModel>| {
        r.map_err(|e| Error::Validation { key: "model".into(), msg: e.to_string() })
    };
    let model = match kind.as_str() {
        "power_law" => wrap(ViscosityModel::power_law(alpha.unwrap_or(1.0)))?,
        "bingham" => wrap(ViscosityModel::power_law(1.0))?,
        "carreau" => wrap(ViscosityModel::carreau(mu.unwrap_or(1.0), alpha.unwrap_or(1.0)))?,
        "cross" => wrap(ViscosityModel::cross(gamma.unwrap_or(1.0), alpha.unwrap_or(1.0)))?,
        "log_power" => wrap(ViscosityModel::log_power(
            alpha.unwrap_or(0.5),
            beta.unwrap_or(0.4),
            gamma.unwrap_or(0.5),
        ))?,
        "constant" => wrap(ViscosityModel::constant(value.unwrap_or(1.0)))?,
        "table" => {
            let pts: Vec<(f64, f64)> = if let Some((line, path)) = table_file {
                let text = std::fs::read_to_string(&path).map_err(|e| Error::Validation {
                    key: "model.table_file".into(),
                    msg: format!("cannot read `{path}` (line {line}): {e}"),
                })?;
                crate::io::parse_viscosity_table(&text)?
            } else {
                let (line, text) = points.ok_or(Error::Validation {
                    key: "model.points".into(),
                    msg: "table model needs `points = t:F t:F ...` or `table_file = path.csv`"
                        .into(),
                })?;
                let mut pts = Vec::new();
                for tok in text.split_whitespace() {
                    let (t, f) = tok.split_once(':').ok_or(Error::Validation {
                        key: "model.points".into(),
                        msg: format!("expected t:F, got `{tok}` (line {line})"),
                    })?;
                    let t: f64 = t.parse().map_err(|_| Error::Validation {
                        key: "model.points".into(),
                        msg: format!("bad abscissa `{t}` (line {line})"),
                    })?;
                    let f: f64 = f.parse().map_err(|_| Error::Validation {
                        key: "model.points".into(),
                        msg: format!("bad value `{f}` (line {line})"),
                    })?;
                    pts.push((t, f));
                }
                pts
            };
            wrap(ViscosityModel::from_table(&pts))?
        }
        other => {
            return Err(Error::Validation {
                key: "model.kind".into(),
                msg: format!("unknown viscosity law `{other}`"),
            })
        }
    };

    // [basis]
    let mut basis_sec = sections.remove("basis").unwrap_or_default();
    let n = take(&mut basis_sec, "n").map(|v| parse_usize("basis.n", v)).transpose()?.unwrap_or(2);
    let m_max = take(&mut basis_sec, "m_max")
        .map(|v| parse_i64("basis.m_max", v))
        .transpose()?
        .unwrap_or(4);
    let grid_size = take(&mut basis_sec, "grid_size")
        .map(|v| parse_usize("basis.grid_size", v))
        .transpose()?
        .unwrap_or((3 * m_max.max(1)) as usize);
    reject_unknown("basis", &basis_sec)?;

    // [initial]
    let mut init_sec = sections.remove("initial").unwrap_or_default();
    let preset = take(&mut init_sec, "preset").map(|v| v.1).unwrap_or_else(|| "taylor_green".into());
    let amplitude = take(&mut init_sec, "amplitude")
        .map(|v| parse_f64("initial.amplitude", v))
        .transpose()?
        .unwrap_or(1.0);
    let initial = match preset.as_str() {
        "taylor_green" => {
            reject_unknown("initial", &init_sec)?;
            InitialCondition::TaylorGreen { amplitude }
        }
        "single_mode" => {
            let xi_raw = take(&mut init_sec, "xi")
                .map(|v| v.1)
                .unwrap_or_else(|| "1 0".into());
            let comps: Vec<i64> = xi_raw
                .split_whitespace()
                .map(|s| s.parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Validation {
                    key: "initial.xi".into(),
                    msg: format!("bad wavevector `{xi_raw}`"),
                })?;
            let mut xi = [0i64; 3];
            if comps.is_empty() || comps.len() > 3 {
                return Err(Error::Validation {
                    key: "initial.xi".into(),
                    msg: "wavevector needs 1-3 integer components".into(),
                });
            }
            xi[..comps.len()].copy_from_slice(&comps);
            let phase = match take(&mut init_sec, "phase").map(|v| v.1).as_deref() {
                None | Some("cos") => Phase::Cos,
                Some("sin") => Phase::Sin,
                Some(other) => {
                    return Err(Error::Validation {
                        key: "initial.phase".into(),
                        msg: format!("expected cos or sin, got `{other}`"),
                    })
                }
            };
            let dir = take(&mut init_sec, "dir")
                .map(|v| parse_usize("initial.dir", v))
                .transpose()?
                .unwrap_or(0) as u8;
            reject_unknown("initial", &init_sec)?;
            InitialCondition::SingleMode { xi, phase, dir, amplitude }
        }
        "random_seeded" => {
            let seed = take(&mut init_sec, "seed")
                .map(|v| parse_usize("initial.seed", v))
                .transpose()?
                .unwrap_or(0) as u64;
            let slope = take(&mut init_sec, "slope")
                .map(|v| parse_f64("initial.slope", v))
                .transpose()?
                .unwrap_or(2.0);
            reject_unknown("initial", &init_sec)?;
            InitialCondition::RandomSeeded { seed, slope, amplitude }
        }
        other => {
            return Err(Error::Validation {
                key: "initial.preset".into(),
                msg: format!("unknown preset `{other}`"),
            })
        }
    };

    // [forcing]
    let mut force_sec = sections.remove("forcing").unwrap_or_default();
    let forcing_modes: Vec<(usize, f64)> = match take(&mut force_sec, "modes") {
        None => Vec::new(),
        Some((line, text)) => {
            let mut v = Vec::new();
            for tok in text.split_whitespace() {
                let (i, a) = tok.split_once(':').ok_or(Error::Validation {
                    key: "forcing.modes".into(),
                    msg: format!("expected index:amplitude, got `{tok}` (line {line})"),
                })?;
                let i: usize = i.parse().map_err(|_| Error::Validation {
                    key: "forcing.modes".into(),
                    msg: format!("bad mode index `{i}` (line {line})"),
                })?;
                let a: f64 = a.parse().map_err(|_| Error::Validation {
                    key: "forcing.modes".into(),
                    msg: format!("bad amplitude `{a}` (line {line})"),
                })?;
                v.push((i, a));
            }
            v
        }
    };
    let envelope_kind = take(&mut force_sec, "envelope")
        .map(|v| v.1)
        .unwrap_or_else(|| "half_sine".into());
    let t1 = take(&mut force_sec, "t1")
        .map(|v| parse_f64("forcing.t1", v))
        .transpose()?
        .unwrap_or(0.0);
    reject_unknown("forcing", &force_sec)?;
    if t1 < 0.0 {
        return Err(Error::Validation {
            key: "forcing.t1".into(),
            msg: format!("cutoff time must be >= 0, got {t1}"),
        });
    }
    let entries = forcing_modes
        .iter()
        .map(|&(i, a)| {
            let env = match envelope_kind.as_str() {
                "constant" => Ok(Envelope::Constant(a)),
                "half_sine" => Ok(Envelope::HalfSine(a)),
                other => Err(Error::Validation {
                    key: "forcing.envelope".into(),
                    msg: format!("expected constant or half_sine, got `{other}`"),
                }),
            }?;
            Ok((i, env))
        })
        .collect::<Result<Vec<_>>>()?;
    let forcing = ForcingSpec { entries, t1 };

    // [integrator]
    let mut int_sec = sections.remove("integrator").unwrap_or_default();
    let mut integrator = IntegratorConfig::default();
    if let Some(v) = take(&mut int_sec, "dt_init") {
        integrator.dt_init = parse_f64("integrator.dt_init", v)?;
    }
    if let Some(v) = take(&mut int_sec, "dt_min") {
        integrator.dt_min = parse_f64("integrator.dt_min", v)?;
    }
    if let Some(v) = take(&mut int_sec, "dt_max") {
        integrator.dt_max = parse_f64("integrator.dt_max", v)?;
    }
    if let Some(v) = take(&mut int_sec, "rel_tol") {
        integrator.rel_tol = parse_f64("integrator.rel_tol", v)?;
    }
    if let Some(v) = take(&mut int_sec, "abs_tol") {
        integrator.abs_tol = parse_f64("integrator.abs_tol", v)?;
    }
    if let Some(v) = take(&mut int_sec, "t_end") {
        integrator.t_end = parse_f64("integrator.t_end", v)?;
    }
    if let Some(v) = take(&mut int_sec, "stop_tol") {
        integrator.stop_tol = parse_f64("integrator.stop_tol", v)?;
    }
    if let Some(v) = take(&mut int_sec, "record_every") {
        integrator.record_every = parse_usize("integrator.record_every", v)?;
    }
    if let Some(v) = take(&mut int_sec, "record_uniform") {
        integrator.record_uniform = Some(parse_f64("integrator.record_uniform", v)?);
    }
    reject_unknown("integrator", &int_sec)?;
    integrator
        .validate()
        .map_err(|e| Error::Validation { key: "integrator".into(), msg: e.to_string() })?;

    // [run]
    let mut run_sec = sections.remove("run").unwrap_or_default();
    let eps = take(&mut run_sec, "eps")
        .map(|v| parse_f64("run.eps", v))
        .transpose()?
        .unwrap_or(1e-6);
    reject_unknown("run", &run_sec)?;
    if eps < 0.0 {
        return Err(Error::Validation {
            key: "run.eps".into(),
            msg: format!("regularization must be >= 0, got {eps}"),
        });
    }

    if n != 2 && n != 3 {
        return Err(Error::Validation {
            key: "basis.n".into(),
            msg: format!("spatial dimension must be 2 or 3, got {n}"),
        });
    }
    if m_max < 1 {
        return Err(Error::Validation {
            key: "basis.m_max".into(),
            msg: format!("m_max must be >= 1, got {m_max}"),
        });
    }
    if (grid_size as i64) < 3 * m_max {
        return Err(Error::Validation {
            key: "basis.grid_size".into(),
            msg: format!("grid_size {grid_size} below the dealiasing margin {}", 3 * m_max),
        });
    }

    Ok(ExperimentConfig {
        model_name: kind,
        model,
        n,
        m_max,
        grid_size,
        eps,
        initial,
        forcing,
        envelope_kind,
        forcing_modes,
        integrator,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[model]
kind = power_law
alpha = 1

[basis]
m_max = 4

[initial]
preset = taylor_green
";

    #[test]
    fn minimal_document_gets_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.n, 2);
        assert_eq!(cfg.m_max, 4);
        assert_eq!(cfg.grid_size, 12);
        assert_eq!(cfg.eps, 1e-6);
        assert_eq!(cfg.integrator.stop_tol, 1e-10);
        assert_eq!(cfg.integrator.rel_tol, 1e-8);
        assert!(cfg.forcing.is_empty());
    }

    #[test]
    fn invalid_alpha_cites_the_monotonicity_condition() {
        let text = MINIMAL.replace("alpha = 1", "alpha = 1.5");
        let err = parse_config(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("(C3)"), "{msg}");
    }

    #[test]
    fn unknown_key_is_named() {
        let text = format!("{MINIMAL}\n[run]\nviscocity = 2\n");
        let err = parse_config(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("viscocity"), "{msg}");
    }

    #[test]
    fn parse_error_reports_line_number() {
        let err = parse_config("[model]\nkind power_law\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn duplicate_key_rejected() {
        let err = parse_config("[model]\nkind = constant\nkind = constant\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn forcing_and_envelope_parse() {
        let text = format!(
            "{MINIMAL}\n[forcing]\nmodes = 0:0.5 3:-0.25\nenvelope = constant\nt1 = 0.5\n"
        );
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.forcing.entries.len(), 2);
        assert_eq!(cfg.forcing.t1, 0.5);
    }

    #[test]
    fn table_model_parses_points() {
        let text = "\
[model]
kind = table
points = 0.1:10 1:1 10:0.1
";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.model_name, "table");
    }

    #[test]
    fn table_model_loads_from_csv_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("visc.csv");
        std::fs::write(&path, "t,F\n0.1,10\n1,1\n10,0.1\n").unwrap();
        let text = format!("[model]\nkind = table\ntable_file = {}\n", path.display());
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.model_name, "table");
        let missing = "[model]\nkind = table\ntable_file = /nonexistent/x.csv\n";
        assert!(parse_config(missing).is_err());
    }

    #[test]
    fn taylor_green_projects_onto_two_modes() {
        let cfg = parse_config(MINIMAL).unwrap();
        let basis = cfg.build_basis().unwrap();
        let u0 = cfg.build_initial(&basis).unwrap();
        let nm = crate::basis::norms(&u0);
        assert!((nm.l2 - 1.0).abs() < 1e-12);
        // only wavevectors (1,1) and (1,-1) carry energy
        let active: Vec<_> = basis
            .modes
            .iter()
            .zip(&u0.d)
            .filter(|(_, &d)| d.abs() > 1e-12)
            .map(|(m, _)| m.xi)
            .collect();
        assert_eq!(active.len(), 2, "{active:?}");
        for xi in active {
            assert_eq!(xi[0].abs(), 1);
            assert_eq!(xi[1].abs(), 1);
        }
        // pointwise match against the closed form, after unit normalization
        let scale = {
            // closed form has l2 norm sqrt((2pi)^2 / 2) = pi sqrt(2)
            std::f64::consts::PI * 2.0f64.sqrt()
        };
        let f = crate::basis::synthesize(&u0, crate::basis::Want::Velocity);
        let g = basis.grid_size;
        for i in 0..g {
            for j in 0..g {
                let x = TWO_PI * i as f64 / g as f64;
                let y = TWO_PI * j as f64 / g as f64;
                let expect = (x.sin() * y.cos() / scale, -(x.cos()) * y.sin() / scale);
                assert!((f.comps[0][i * g + j] - expect.0).abs() < 1e-12);
                assert!((f.comps[1][i * g + j] - expect.1).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn random_seeded_is_deterministic_and_normalized() {
        let text = MINIMAL.replace("preset = taylor_green", "preset = random_seeded\nseed = 7");
        let cfg = parse_config(&text).unwrap();
        let basis = cfg.build_basis().unwrap();
        let a = cfg.build_initial(&basis).unwrap();
        let b = cfg.build_initial(&basis).unwrap();
        assert_eq!(a.d, b.d);
        let nm = crate::basis::norms(&a);
        assert!((nm.l2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn echo_round_trips() {
        let text = format!(
            "{MINIMAL}\n[forcing]\nmodes = 1:0.5\nenvelope = half_sine\nt1 = 0.25\n[run]\neps = 1e-4\n"
        );
        let cfg = parse_config(&text).unwrap();
        let echo = cfg.echo();
        let back = parse_config(&echo).unwrap();
        assert_eq!(back.eps, cfg.eps);
        assert_eq!(back.m_max, cfg.m_max);
        assert_eq!(back.forcing.t1, cfg.forcing.t1);
        assert_eq!(back.echo(), echo);
    }

    #[test]
    fn single_mode_preset_outside_basis_rejected() {
        let text = MINIMAL.replace(
            "preset = taylor_green",
            "preset = single_mode\nxi = 9 9",
        );
        let cfg = parse_config(&text).unwrap();
        let basis = cfg.build_basis().unwrap();
        assert!(matches!(
            cfg.build_initial(&basis),
            Err(Error::UnknownMode(_))
        ));
    }
}
