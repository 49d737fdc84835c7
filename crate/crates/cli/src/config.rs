//! Scenario file: TOML with one table per module. Unknown keys are rejected.
//!
//! Every physical input is converted to natural units here, so the rest of
//! the front-end never sees SI values except when writing results.

use serde::Deserialize;
use spinrad::material::{DielectricModel, TabulatedEpsilon, ThermalState};
use spinrad::quadrature::QuadOptions;
use spinrad::radiation::{Body, MSumPolicy, RadiationOptions};
use spinrad::rotor::{NoiseConvention, TorqueLaw};
use spinrad::scattering::{BlockFlux, ChannelTable, Extra, SphereFlux};
use spinrad::testbody::{Kernel3d, TwoBodyConfig, TwoBodyModel};
use spinrad::units::{Quantity, UnitSystem};
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

const DEFAULT_M_MAX: i64 = 5;
const DEFAULT_M_LIMIT: i64 = 64;

fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub units: Option<RawUnits>,
    pub body: Option<RawBody>,
    pub material: Option<RawMaterial>,
    pub state: Option<RawState>,
    pub numerics: Option<RawNumerics>,
    pub spectrum: Option<RawSpectrum>,
    pub stats: Option<RawStats>,
    pub rotor: Option<RawRotor>,
    pub twobody: Option<RawTwoBody>,
    pub output: Option<RawOutput>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawUnits {
    /// `natural` (default) or `si`.
    pub system: Option<String>,
    /// Metres per natural length unit; defaults to the body radius.
    pub length_scale: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawBody {
    pub geometry: Option<String>,
    pub radius: Option<f64>,
    pub length: Option<f64>,
    pub flux: Option<String>,
    pub table: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMaterial {
    pub model: Option<String>,
    pub sigma: Option<f64>,
    pub eps_inf: Option<f64>,
    pub omega_p: Option<f64>,
    pub omega_0: Option<f64>,
    pub gamma: Option<f64>,
    pub re: Option<f64>,
    pub im: Option<f64>,
    pub table: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawState {
    pub omega: Option<f64>,
    pub t_object: Option<f64>,
    pub t_env: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawNumerics {
    pub rel_tol: Option<f64>,
    pub m_max: Option<i64>,
    /// Enables the adaptive `m` sum, doubling `m_max` up to this value.
    pub m_limit: Option<i64>,
    pub tail_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSpectrum {
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub points: Option<usize>,
    /// `linear` (default) or `log`.
    pub spacing: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawStats {
    pub omega: Option<Vec<f64>>,
    pub m: Option<i64>,
    pub occupations: Option<Vec<f64>>,
    pub p_max: Option<u32>,
    pub n_max: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRotor {
    pub inertia: Option<f64>,
    pub hbar: Option<f64>,
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    pub n_traj: Option<usize>,
    pub omega_init: Option<f64>,
    pub drive: Option<f64>,
    pub seed: Option<u64>,
    pub record_every: Option<usize>,
    pub noise: Option<String>,
    pub law: Option<String>,
    pub c_drift: Option<f64>,
    pub k_drift: Option<f64>,
    pub c_diff: Option<f64>,
    pub k_diff: Option<f64>,
    pub law_min: Option<f64>,
    pub law_max: Option<f64>,
    pub law_tol: Option<f64>,
    pub density_points: Option<usize>,
    pub density_width: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTwoBody {
    pub model: Option<String>,
    pub kernel: Option<String>,
    pub test_radius: Option<f64>,
    pub test_material: Option<RawMaterial>,
    pub separations: Option<Vec<f64>>,
    pub d_min: Option<f64>,
    pub d_max: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    pub dir: Option<PathBuf>,
    pub format: Option<String>,
}

fn positive(field: &str, v: Option<f64>) -> Result<f64> {
    match v {
        None => err(format!("{field}: required")),
        Some(x) if x > 0.0 && x.is_finite() => Ok(x),
        Some(x) => err(format!("{field} = {x} must be > 0")),
    }
}

fn non_negative(field: &str, v: Option<f64>, default: f64) -> Result<f64> {
    match v.unwrap_or(default) {
        x if x >= 0.0 && x.is_finite() => Ok(x),
        x => err(format!("{field} = {x} must be >= 0")),
    }
}

fn finite(field: &str, v: Option<f64>) -> Result<f64> {
    match v {
        None => err(format!("{field}: required")),
        Some(x) if x.is_finite() => Ok(x),
        Some(x) => err(format!("{field} = {x} must be finite")),
    }
}

fn tolerance(field: &str, v: Option<f64>, default: f64) -> Result<f64> {
    match v.unwrap_or(default) {
        x if x > 0.0 && x < 1.0 => Ok(x),
        x => err(format!("{field} = {x} must lie in (0, 1)")),
    }
}

fn count(field: &str, v: Option<usize>, default: usize, min: usize) -> Result<usize> {
    match v.unwrap_or(default) {
        n if n >= min => Ok(n),
        n => err(format!("{field} = {n} must be >= {min}")),
    }
}

fn choice<'a>(field: &str, v: Option<&'a str>, default: &'a str, allowed: &[&str]) -> Result<&'a str> {
    let s = v.unwrap_or(default);
    if allowed.contains(&s) {
        Ok(s)
    } else {
        err(format!("{field} = \"{s}\" is not one of {}", allowed.join(", ")))
    }
}

/// Unit handling at the file boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Units {
    pub si: bool,
    pub system: UnitSystem,
}

impl Units {
    /// Natural value of an input.
    pub fn input(&self, q: Quantity, v: f64) -> f64 {
        if self.si {
            self.system.to_natural(q, v)
        } else {
            v
        }
    }

    /// Output value of a natural result.
    pub fn output(&self, q: Quantity, v: f64) -> f64 {
        if self.si {
            self.system.to_si(q, v)
        } else {
            v
        }
    }

    pub fn label(&self) -> String {
        if self.si {
            format!("si (length scale {:e} m)", self.system.length_m)
        } else {
            "natural".into()
        }
    }
}

/// A parsed scenario file. Sections are validated on demand, so a command
/// only requires the tables it uses.
#[derive(Debug)]
pub struct Config {
    pub raw: RawConfig,
    pub units: Units,
    /// Directory of the config file; relative table paths resolve against it.
    pub base: PathBuf,
}

impl Config {
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        if text.trim().is_empty() {
            return err("config file is empty");
        }
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError(format!("config: {}", e.message())))?;
        let units = Self::units(&raw)?;
        Ok(Self { raw, units, base: base.to_path_buf() })
    }

    fn units(raw: &RawConfig) -> Result<Units> {
        let u = raw.units.as_ref();
        let system = choice("units.system", u.and_then(|u| u.system.as_deref()), "natural", &["natural", "si"])?;
        if system == "natural" {
            if u.is_some_and(|u| u.length_scale.is_some()) {
                return err("units.length_scale: only meaningful with units.system = \"si\"");
            }
            return Ok(Units { si: false, system: UnitSystem::new(1.0) });
        }
        let scale = match u.and_then(|u| u.length_scale) {
            Some(l) => positive("units.length_scale", Some(l))?,
            None => match raw.body.as_ref().and_then(|b| b.radius) {
                Some(r) => positive("body.radius", Some(r))?,
                None => return err("units.length_scale: required when the body has no radius"),
            },
        };
        Ok(Units { si: true, system: UnitSystem::new(scale) })
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn material_from(&self, section: &str, m: Option<&RawMaterial>) -> Result<DielectricModel> {
        let Some(m) = m else {
            return err(format!("{section}: missing section"));
        };
        let f = |name: &str| format!("{section}.{name}");
        let freq = |name: &str, v: Option<f64>| positive(&f(name), v).map(|x| self.units.input(Quantity::Frequency, x));
        let model = choice(&f("model"), m.model.as_deref(), "", &["vacuum", "drude", "lorentz", "constant", "tabulated"])
            .map_err(|e| if m.model.is_none() { ConfigError(format!("{}: required", f("model"))) } else { e })?;
        let out = match model {
            "vacuum" => DielectricModel::Vacuum,
            "drude" => DielectricModel::Drude { sigma: freq("sigma", m.sigma)? },
            "lorentz" => DielectricModel::Lorentz {
                eps_inf: positive(&f("eps_inf"), m.eps_inf)?,
                omega_p: freq("omega_p", m.omega_p)?,
                omega_0: non_negative(&f("omega_0"), m.omega_0, 0.0).map(|x| self.units.input(Quantity::Frequency, x))?,
                gamma: freq("gamma", m.gamma)?,
            },
            "constant" => {
                DielectricModel::Constant { re: finite(&f("re"), m.re)?, im: non_negative(&f("im"), m.im, 0.0)? }
            }
            _ => {
                let Some(p) = &m.table else {
                    return err(format!("{}: required", f("table")));
                };
                let t = TabulatedEpsilon::from_path(&self.resolve(p)).map_err(|e| ConfigError(format!("{}: {e}", f("table"))))?;
                let t = if self.units.si {
                    t.with_omega_scale(1.0 / self.units.system.scale(Quantity::Frequency))
                        .map_err(|e| ConfigError(format!("{}: {e}", f("table"))))?
                } else {
                    t
                };
                DielectricModel::Tabulated(t)
            }
        };
        // keys that belong to another model are a likely mistake
        let stray: Vec<&str> = [
            ("sigma", m.sigma.is_some(), model == "drude"),
            ("eps_inf", m.eps_inf.is_some(), model == "lorentz"),
            ("omega_p", m.omega_p.is_some(), model == "lorentz"),
            ("omega_0", m.omega_0.is_some(), model == "lorentz"),
            ("gamma", m.gamma.is_some(), model == "lorentz"),
            ("re", m.re.is_some(), model == "constant"),
            ("im", m.im.is_some(), model == "constant"),
            ("table", m.table.is_some(), model == "tabulated"),
        ]
        .into_iter()
        .filter(|(_, set, used)| *set && !used)
        .map(|(k, _, _)| k)
        .collect();
        if let Some(k) = stray.first() {
            return err(format!("{}: not used by model \"{model}\"", f(k)));
        }
        out.validate().map_err(|e| ConfigError(format!("{section}: {e}")))?;
        Ok(out)
    }

    pub fn material(&self) -> Result<DielectricModel> {
        self.material_from("material", self.raw.material.as_ref())
    }

    pub fn body(&self) -> Result<Body> {
        let Some(b) = &self.raw.body else {
            return err("body: missing section");
        };
        let geometry = b.geometry.as_deref().ok_or_else(|| ConfigError("body.geometry: required".into()))?;
        let geometry = choice("body.geometry", Some(geometry), "", &["disk", "sphere", "cylinder", "user-table"])?;
        let length = |v| positive("body.radius", v).map(|x| self.units.input(Quantity::Length, x));
        let unused = |key: &str, set: bool| if set { err(format!("body.{key}: not used by geometry \"{geometry}\"")) } else { Ok(()) };
        match geometry {
            "user-table" => {
                unused("radius", b.radius.is_some())?;
                unused("length", b.length.is_some())?;
                unused("flux", b.flux.is_some())?;
                if self.raw.material.is_some() {
                    return err("material: not used by geometry \"user-table\"");
                }
                let Some(p) = &b.table else {
                    return err("body.table: required");
                };
                let mut t = ChannelTable::load(&self.resolve(p)).map_err(|e| ConfigError(format!("body.table: {e}")))?;
                if self.units.si {
                    let f = self.units.system.scale(Quantity::Frequency);
                    let l = self.units.system.length_m;
                    for c in &mut t.channels {
                        c.omega.iter_mut().for_each(|w| *w /= f);
                        if let Extra::Kz(k) = &mut c.extra {
                            *k *= l;
                        }
                    }
                }
                Ok(Body::Table(t))
            }
            _ => {
                unused("table", b.table.is_some())?;
                let model = self.material()?;
                let r = length(b.radius)?;
                match geometry {
                    "disk" => {
                        unused("length", b.length.is_some())?;
                        unused("flux", b.flux.is_some())?;
                        Ok(Body::Disk { model, r })
                    }
                    "sphere" => {
                        unused("length", b.length.is_some())?;
                        let flux = match choice("body.flux", b.flux.as_deref(), "leading", &["leading", "exact"])? {
                            "leading" => SphereFlux::Leading,
                            _ => SphereFlux::Exact,
                        };
                        Ok(Body::Sphere { model, r, flux })
                    }
                    _ => {
                        let length = positive("body.length", b.length).map(|x| self.units.input(Quantity::Length, x))?;
                        let flux = match choice("body.flux", b.flux.as_deref(), "exact", &["truncated", "exact"])? {
                            "truncated" => BlockFlux::Truncated,
                            _ => BlockFlux::Exact,
                        };
                        Ok(Body::Cylinder { model, r, length, flux })
                    }
                }
            }
        }
    }

    pub fn state(&self) -> Result<ThermalState> {
        let Some(s) = &self.raw.state else {
            return err("state: missing section");
        };
        let omega = non_negative("state.omega", Some(finite("state.omega", s.omega)?), 0.0)?;
        let t_object = non_negative("state.t_object", s.t_object, 0.0)?;
        let t_env = non_negative("state.t_env", s.t_env, 0.0)?;
        ThermalState::new(
            self.units.input(Quantity::Temperature, t_object),
            self.units.input(Quantity::Temperature, t_env),
            self.units.input(Quantity::Frequency, omega),
        )
        .map_err(|e| ConfigError(format!("state: {e}")))
    }

    pub fn radiation_options(&self) -> Result<RadiationOptions> {
        let d = RadiationOptions::default();
        let n = self.raw.numerics.as_ref();
        let rel_tol = tolerance("numerics.rel_tol", n.and_then(|n| n.rel_tol), d.quad.rel_tol)?;
        let tail_tol = tolerance("numerics.tail_tol", n.and_then(|n| n.tail_tol), d.tail_tol)?;
        let given = n.and_then(|n| n.m_max);
        let m_max = given.unwrap_or(DEFAULT_M_MAX);
        if m_max < 1 {
            return err(format!("numerics.m_max = {m_max} must be >= 1"));
        }
        // an explicit m_max alone fixes the cutoff; otherwise the sum adapts
        let m_policy = match n.and_then(|n| n.m_limit) {
            None if given.is_some() => MSumPolicy::Fixed(m_max),
            None => MSumPolicy::Auto { start: m_max, max: DEFAULT_M_LIMIT.max(m_max) },
            Some(l) if l >= m_max => MSumPolicy::Auto { start: m_max, max: l },
            Some(l) => return err(format!("numerics.m_limit = {l} must be >= numerics.m_max = {m_max}")),
        };
        Ok(RadiationOptions { quad: QuadOptions { rel_tol, ..d.quad }, m_policy, tail_tol })
    }

    /// Channel cutoff for per-channel output (spectra, occupations).
    pub fn m_max(&self) -> i64 {
        self.raw.numerics.as_ref().and_then(|n| n.m_max).unwrap_or(DEFAULT_M_MAX)
    }

    pub fn spectrum_grid(&self) -> Result<Vec<f64>> {
        let Some(s) = &self.raw.spectrum else {
            return err("spectrum: missing section");
        };
        let hi = positive("spectrum.omega_max", s.omega_max)?;
        let n = count("spectrum.points", s.points, 200, 2)?;
        let lo = match s.omega_min {
            Some(_) => positive("spectrum.omega_min", s.omega_min)?,
            None => hi / n as f64,
        };
        if lo >= hi {
            return err(format!("spectrum.omega_min = {lo} must be < spectrum.omega_max = {hi}"));
        }
        let log = choice("spectrum.spacing", s.spacing.as_deref(), "linear", &["linear", "log"])? == "log";
        let t = |i: usize| i as f64 / (n - 1) as f64;
        let grid = (0..n).map(|i| if log { lo * (hi / lo).powf(t(i)) } else { lo + (hi - lo) * t(i) });
        Ok(grid.map(|w| self.units.input(Quantity::Frequency, w)).collect())
    }

    pub fn stats(&self) -> Result<StatsPlan> {
        let s = self.raw.stats.as_ref();
        let omegas = s.and_then(|s| s.omega.clone()).unwrap_or_default();
        for (i, w) in omegas.iter().enumerate() {
            positive(&format!("stats.omega[{i}]"), Some(*w))?;
        }
        let occupations = s.and_then(|s| s.occupations.clone()).unwrap_or_default();
        for (i, n) in occupations.iter().enumerate() {
            non_negative(&format!("stats.occupations[{i}]"), Some(*n), 0.0)?;
        }
        let p_max = s.and_then(|s| s.p_max).unwrap_or(6);
        if !(1..=spinrad::photonstats::MAX_CUMULANT_ORDER).contains(&p_max) {
            return err(format!("stats.p_max = {p_max} must lie in 1..={}", spinrad::photonstats::MAX_CUMULANT_ORDER));
        }
        let m = s.and_then(|s| s.m).unwrap_or(1);
        if !omegas.is_empty() && matches!(self.raw.body.as_ref().and_then(|b| b.geometry.as_deref()), Some("cylinder")) {
            return err("stats.omega: per-mode occupations need a disk, sphere or user-table body");
        }
        Ok(StatsPlan {
            omegas: omegas.iter().map(|w| self.units.input(Quantity::Frequency, *w)).collect(),
            m,
            occupations,
            p_max,
            n_max: count("stats.n_max", s.and_then(|s| s.n_max), 200, 1)?,
        })
    }

    pub fn rotor(&self, seed_override: Option<u64>) -> Result<RotorPlan> {
        let Some(r) = &self.raw.rotor else {
            return err("rotor: missing section");
        };
        let u = &self.units;
        let inertia = u.input(Quantity::MomentOfInertia, positive("rotor.inertia", r.inertia)?);
        let hbar = match (u.si, r.hbar) {
            (true, Some(_)) => return err("rotor.hbar: fixed by units.system = \"si\""),
            (_, h) => if h.is_some() { positive("rotor.hbar", h)? } else { 1.0 },
        };
        let dt = u.input(Quantity::Time, positive("rotor.dt", r.dt)?);
        let drive = match r.drive {
            Some(_) => Some(u.input(Quantity::Frequency, positive("rotor.drive", r.drive)?)),
            None => None,
        };
        let omega_init = match r.omega_init {
            Some(w) => u.input(Quantity::Frequency, non_negative("rotor.omega_init", Some(w), 0.0)?),
            None => match (drive, &self.raw.state) {
                (Some(w), _) => w,
                (None, Some(_)) => self.state()?.omega,
                (None, None) => return err("rotor.omega_init: required without rotor.drive or [state]"),
            },
        };
        let convention = match choice("rotor.noise", r.noise.as_deref(), "fokker-planck", &["fokker-planck", "photon-count"])? {
            "fokker-planck" => NoiseConvention::FokkerPlanck,
            _ => NoiseConvention::PhotonCount,
        };
        let law = match choice("rotor.law", r.law.as_deref(), "power", &["power", "radiation"])? {
            "power" => {
                for (k, set) in [("law_min", r.law_min.is_some()), ("law_max", r.law_max.is_some()), ("law_tol", r.law_tol.is_some())] {
                    if set {
                        return err(format!("rotor.{k}: not used by rotor.law = \"power\""));
                    }
                }
                let k_drift = finite("rotor.k_drift", r.k_drift)?;
                let k_diff = finite("rotor.k_diff", r.k_diff)?;
                // M and M2 are rates: c_nat = c_si t0^(1 - k)
                let t0 = u.system.scale(Quantity::Time);
                let coef = |c: f64, k: f64| if u.si { c * t0.powf(1.0 - k) } else { c };
                LawPlan::Power(TorqueLaw::PowerLaw {
                    c_drift: coef(non_negative("rotor.c_drift", Some(finite("rotor.c_drift", r.c_drift)?), 0.0)?, k_drift),
                    k_drift,
                    c_diff: coef(non_negative("rotor.c_diff", Some(finite("rotor.c_diff", r.c_diff)?), 0.0)?, k_diff),
                    k_diff,
                })
            }
            _ => {
                for (k, set) in [("c_drift", r.c_drift), ("k_drift", r.k_drift), ("c_diff", r.c_diff), ("k_diff", r.k_diff)] {
                    if set.is_some() {
                        return err(format!("rotor.{k}: not used by rotor.law = \"radiation\""));
                    }
                }
                let lo = positive("rotor.law_min", r.law_min)?;
                let hi = positive("rotor.law_max", r.law_max)?;
                if lo >= hi {
                    return err(format!("rotor.law_min = {lo} must be < rotor.law_max = {hi}"));
                }
                LawPlan::Radiation {
                    lo: u.input(Quantity::Frequency, lo),
                    hi: u.input(Quantity::Frequency, hi),
                    rel_tol: tolerance("rotor.law_tol", r.law_tol, 1e-4)?,
                }
            }
        };
        Ok(RotorPlan {
            inertia,
            hbar,
            dt,
            steps: count("rotor.steps", r.steps, 1000, 1)?,
            n_traj: count("rotor.n_traj", r.n_traj, 1000, 2)?,
            omega_init,
            drive,
            seed: seed_override.or(r.seed).unwrap_or(0),
            record_every: r.record_every.unwrap_or(0),
            convention,
            law,
            density_points: count("rotor.density_points", r.density_points, 401, 3)?,
            density_width: match r.density_width {
                Some(_) => positive("rotor.density_width", r.density_width)?,
                None => 8.0,
            },
        })
    }

    pub fn two_body(&self) -> Result<TwoBodyPlan> {
        let Some(t) = &self.raw.twobody else {
            return err("twobody: missing section");
        };
        let model = match choice(
            "twobody.model",
            t.model.as_deref(),
            "sphere3d",
            &["disk2d", "disk2d-asymptote", "sphere3d", "small-particle3d"],
        )? {
            "disk2d" => TwoBodyModel::Disk2d,
            "disk2d-asymptote" => TwoBodyModel::Disk2dAsymptote,
            "small-particle3d" => TwoBodyModel::SmallParticle3d,
            _ => TwoBodyModel::Sphere3d(
                match choice("twobody.kernel", t.kernel.as_deref(), "far-field", &["exact", "far-field"])? {
                    "exact" => Kernel3d::Exact,
                    _ => Kernel3d::FarField,
                },
            ),
        };
        if t.kernel.is_some() && !matches!(model, TwoBodyModel::Sphere3d(_)) {
            return err("twobody.kernel: only used by twobody.model = \"sphere3d\"");
        }
        let b = self.raw.body.as_ref().ok_or_else(|| ConfigError("body: missing section".into()))?;
        let r_source = self.units.input(Quantity::Length, positive("body.radius", b.radius)?);
        let length = |field: &str, v: f64| positive(field, Some(v)).map(|x| self.units.input(Quantity::Length, x));
        let separations = match (&t.separations, t.d_min, t.d_max) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return err("twobody.separations: give either a list or d_min/d_max, not both");
            }
            (Some(list), None, None) => {
                if list.is_empty() {
                    return err("twobody.separations: empty list");
                }
                list.iter().enumerate().map(|(i, d)| length(&format!("twobody.separations[{i}]"), *d)).collect::<Result<Vec<_>>>()?
            }
            (None, lo, hi) => {
                let lo = positive("twobody.d_min", lo)?;
                let hi = positive("twobody.d_max", hi)?;
                if lo >= hi {
                    return err(format!("twobody.d_min = {lo} must be < twobody.d_max = {hi}"));
                }
                let n = count("twobody.points", t.points, 10, 2)?;
                (0..n)
                    .map(|i| length("twobody.d_min", lo * (hi / lo).powf(i as f64 / (n - 1) as f64)))
                    .collect::<Result<Vec<_>>>()?
            }
        };
        let cfg = TwoBodyConfig {
            d: separations[0],
            source: self.material()?,
            r_source,
            test: self.material_from("twobody.test_material", t.test_material.as_ref())?,
            r_test: self.units.input(Quantity::Length, positive("twobody.test_radius", t.test_radius)?),
        };
        for d in &separations {
            cfg.with_separation(*d).validate().map_err(|e| ConfigError(format!("twobody: {e}")))?;
        }
        Ok(TwoBodyPlan { cfg, model, separations })
    }
}

#[derive(Debug, Clone)]
pub struct StatsPlan {
    pub omegas: Vec<f64>,
    pub m: i64,
    pub occupations: Vec<f64>,
    pub p_max: u32,
    pub n_max: usize,
}

#[derive(Debug, Clone)]
pub enum LawPlan {
    Power(TorqueLaw),
    Radiation { lo: f64, hi: f64, rel_tol: f64 },
}

#[derive(Debug, Clone)]
pub struct RotorPlan {
    pub inertia: f64,
    pub hbar: f64,
    pub dt: f64,
    pub steps: usize,
    pub n_traj: usize,
    pub omega_init: f64,
    pub drive: Option<f64>,
    pub seed: u64,
    pub record_every: usize,
    pub convention: NoiseConvention,
    pub law: LawPlan,
    pub density_points: usize,
    pub density_width: f64,
}

#[derive(Debug, Clone)]
pub struct TwoBodyPlan {
    pub cfg: TwoBodyConfig,
    pub model: TwoBodyModel,
    pub separations: Vec<f64>,
}
