//! One function per subcommand. Each validates the sections it needs,
//! calls into the library in natural units and converts on the way out.

use crate::config::{Config, LawPlan};
use crate::emit::{key_value_csv, Format, Regime, Writer};
use rayon::prelude::*;
use serde::Serialize;
use spinrad::photonstats::{entropy_generation, mode_statistics, ModeStatistics};
use spinrad::radiation::{integrate_power, spectrum, Body, SpectralRow};
use spinrad::rotor::{
    fokker_planck_stationary, simulate, summarize, torque_law_from_radiation, FpGrid, LangevinConfig, ADIABATIC_LIMIT,
};
use spinrad::scattering::{Extra, Polarization};
use spinrad::testbody::{log_log_slope, two_body_report};
use spinrad::units::Quantity;
use spinrad::verify::{run_all, CheckResult, RotorCheckSetup};
use std::fmt;

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numeric { module: &'static str, source: spinrad::Error },
    Output(String),
    /// Verification ran but some checks failed.
    Checks { failed: usize, total: usize },
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        use spinrad::Error as E;
        match self {
            Self::Config(_) | Self::Output(_) => 2,
            Self::Numeric { source, .. } => match source {
                E::Convergence(_) | E::StepSize(_) | E::Overflow(_) | E::Divergent(_) | E::Resonance(_) => 3,
                E::OrderOutOfRange { .. } => 3,
                E::Domain(_) | E::Extrapolation { .. } | E::Parse { .. } | E::Range(_) => 2,
            },
            Self::Checks { .. } => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(m) => write!(f, "config error: {m}"),
            Self::Numeric { module, source } => write!(f, "{module}: {source}"),
            Self::Output(m) => write!(f, "output error: {m}"),
            Self::Checks { failed, total } => write!(f, "{failed} of {total} checks failed"),
        }
    }
}

impl From<crate::config::ConfigError> for Failure {
    fn from(e: crate::config::ConfigError) -> Self {
        Self::Config(e.0)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::Output(e.to_string())
    }
}

fn num(module: &'static str) -> impl Fn(spinrad::Error) -> Failure {
    move |source| Failure::Numeric { module, source }
}

type Result<T> = std::result::Result<T, Failure>;

/// `Omega R / c` of the configured body, if it has a radius.
fn omega_r(body: &Body, omega: f64) -> Option<f64> {
    body.radius().map(|r| r * omega)
}

/// Adiabaticity of the free spin-down at the configured state, when the
/// rotor inertia is known.
fn adiabaticity(cfg: &Config, torque: f64, omega: f64) -> Option<f64> {
    let r = cfg.raw.rotor.as_ref()?;
    let inertia = cfg.units.input(Quantity::MomentOfInertia, r.inertia.filter(|i| *i > 0.0)?);
    let hbar = if cfg.units.si { 1.0 } else { r.hbar.unwrap_or(1.0) };
    (omega > 0.0).then(|| hbar * torque.abs() / (inertia * omega * omega))
}

#[derive(Serialize)]
struct ModeOut {
    m: i64,
    extra: Extra,
    pol: Polarization,
    #[serde(rename = "P")]
    power: f64,
    #[serde(rename = "M")]
    torque: f64,
    #[serde(rename = "Q")]
    heat: f64,
}

#[derive(Serialize)]
struct PowerOut {
    units: &'static str,
    #[serde(rename = "P")]
    power: f64,
    #[serde(rename = "M")]
    torque: f64,
    #[serde(rename = "Q")]
    heat: f64,
    /// `Q - (Omega M - P)`.
    residual: f64,
    error: [f64; 3],
    truncation_tail: f64,
    m_max: i64,
    per_mode: Vec<ModeOut>,
}

fn unit_names(si: bool) -> &'static str {
    if si {
        "P, Q in W; M in N m"
    } else {
        "hbar = c = k_B = 1"
    }
}

pub fn power(cfg: &Config, out: &mut Writer, format: Format) -> Result<()> {
    let body = cfg.body()?;
    let state = cfg.state()?;
    let opts = cfg.radiation_options()?;
    let res = integrate_power(&body, &state, &opts).map_err(num("radiation"))?;
    let u = &cfg.units;
    let p = |v| u.output(Quantity::Power, v);
    let m = |v| u.output(Quantity::Torque, v);
    out.header.regime = Regime {
        omega_r: omega_r(&body, state.omega),
        adiabaticity: adiabaticity(cfg, res.torque, state.omega),
        warnings: Vec::new(),
    };
    let result = PowerOut {
        units: unit_names(u.si),
        power: p(res.power),
        torque: m(res.torque),
        heat: p(res.heat),
        residual: p(res.bookkeeping_residual(state.omega)),
        error: [p(res.error[0]), m(res.error[1]), p(res.error[2])],
        truncation_tail: p(res.truncation_tail),
        m_max: res.m_max,
        per_mode: res
            .per_mode
            .iter()
            .map(|c| ModeOut { m: c.m, extra: c.extra, pol: c.pol, power: p(c.power), torque: m(c.torque), heat: p(c.heat) })
            .collect(),
    };
    match format {
        Format::Json => out.json("power", &result)?,
        Format::Csv => {
            let mut s = String::from("m,extra,pol,P,M,Q\n");
            for c in &result.per_mode {
                s.push_str(&format!("{},{},{},{:e},{:e},{:e}\n", c.m, c.extra, c.pol, c.power, c.torque, c.heat));
            }
            s.push_str(&format!("total,,,{:e},{:e},{:e}\n", result.power, result.torque, result.heat));
            out.csv("power", &s)?;
        }
    }
    Ok(())
}

pub fn spectrum_cmd(cfg: &Config, out: &mut Writer, format: Format) -> Result<()> {
    let body = cfg.body()?;
    let state = cfg.state()?;
    let opts = cfg.radiation_options()?;
    let grid = cfg.spectrum_grid()?;
    let rows = spectrum(&body, &state, &grid, cfg.m_max(), &opts.quad).map_err(num("radiation"))?;
    let u = &cfg.units;
    let rows: Vec<SpectralRow> = rows
        .into_iter()
        .map(|r| SpectralRow {
            omega: u.output(Quantity::Frequency, r.omega),
            dp_domega: u.output(Quantity::Energy, r.dp_domega),
            ..r
        })
        .collect();
    out.header.regime.omega_r = omega_r(&body, state.omega);
    match format {
        Format::Csv => out.csv("spectrum", &spinrad::radiation::spectrum_csv(&rows))?,
        Format::Json => out.json("spectrum", &rows)?,
    }
    Ok(())
}

#[derive(Serialize)]
struct ModeReport {
    omega: f64,
    m: i64,
    extra: Extra,
    pol: Polarization,
    statistics: ModeStatistics,
}

#[derive(Serialize)]
struct StatsOut {
    units: &'static str,
    entropy: Option<spinrad::photonstats::EntropyReport>,
    modes: Vec<ModeReport>,
    occupations: Vec<ModeStatistics>,
}

pub fn stats(cfg: &Config, out: &mut Writer, format: Format) -> Result<()> {
    let plan = cfg.stats()?;
    let u = &cfg.units;
    let rate = |v: f64| u.output(Quantity::Frequency, v);
    let mut entropy = None;
    let mut modes = Vec::new();
    if cfg.raw.body.is_some() {
        let body = cfg.body()?;
        let state = cfg.state()?;
        let opts = cfg.radiation_options()?;
        let mut e = entropy_generation(&body, &state, &opts).map_err(num("photonstats"))?;
        for c in &mut e.per_mode {
            c.photon_rate = rate(c.photon_rate);
            c.entropy_rate = rate(c.entropy_rate);
        }
        e.total_rate = rate(e.total_rate);
        e.photon_rate = rate(e.photon_rate);
        e.error = rate(e.error);
        e.object_rate = e.object_rate.map(rate);
        e.combined = e.combined.map(rate);
        entropy = Some(e);
        out.header.regime.omega_r = omega_r(&body, state.omega);
        if !plan.omegas.is_empty() {
            // emitted occupation: environment taken as cold
            let emit = spinrad::material::ThermalState { t_env: 0.0, ..state };
            let rows = spectrum(&body, &emit, &plan.omegas, plan.m.abs().max(1), &opts.quad).map_err(num("radiation"))?;
            for r in rows.iter().filter(|r| r.m == plan.m) {
                modes.push(ModeReport {
                    omega: u.output(Quantity::Frequency, r.omega),
                    m: r.m,
                    extra: r.extra,
                    pol: r.pol,
                    statistics: mode_statistics(r.n.max(0.0), plan.p_max, plan.n_max).map_err(num("photonstats"))?,
                });
            }
            if modes.is_empty() {
                return Err(Failure::Config(format!("stats.m = {}: the body has no such channel", plan.m)));
            }
        }
    } else if !plan.omegas.is_empty() {
        return Err(Failure::Config("stats.omega: needs a [body] section".into()));
    }
    let occupations = plan
        .occupations
        .iter()
        .map(|n| mode_statistics(*n, plan.p_max, plan.n_max))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(num("photonstats"))?;
    if entropy.is_none() && occupations.is_empty() {
        return Err(Failure::Config("stats: give a [body] or stats.occupations".into()));
    }
    let result = StatsOut { units: if u.si { "rates in 1/s, entropy in k_B/s" } else { "hbar = c = k_B = 1" }, entropy, modes, occupations };
    match format {
        Format::Json => out.json("stats", &result)?,
        Format::Csv => {
            if let Some(e) = &result.entropy {
                let mut s = String::from("m,extra,pol,N,entropyRate\n");
                for c in &e.per_mode {
                    s.push_str(&format!("{},{},{},{:e},{:e}\n", c.m, c.extra, c.pol, c.photon_rate, c.entropy_rate));
                }
                s.push_str(&format!("total,,,{:e},{:e}\n", e.photon_rate, e.total_rate));
                out.csv("entropy", &s)?;
            }
            let all: Vec<&ModeStatistics> =
                result.modes.iter().map(|m| &m.statistics).chain(result.occupations.iter()).collect();
            if !all.is_empty() {
                let mut s = String::from("case,N,n,P\n");
                for (i, st) in all.iter().enumerate() {
                    for (k, p) in st.distribution.p.iter().enumerate() {
                        s.push_str(&format!("{i},{:e},{k},{p:e}\n", st.n));
                    }
                }
                out.csv("counting", &s)?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct RotorOut {
    units: &'static str,
    law: &'static str,
    n_traj: usize,
    steps: usize,
    time: f64,
    mean: f64,
    var: f64,
    #[serde(rename = "IDeltaOmega_analytic")]
    i_delta_omega_analytic: Option<f64>,
    #[serde(rename = "IDeltaOmega_mc")]
    i_delta_omega_mc: f64,
    #[serde(rename = "maxAdiabaticity")]
    max_adiabaticity: f64,
    density_mean: Option<f64>,
    density_variance: Option<f64>,
    density_norm: Option<f64>,
    ks_distance: Option<f64>,
}

pub fn rotor(cfg: &Config, out: &mut Writer, format: Format, seed: Option<u64>) -> Result<()> {
    let plan = cfg.rotor(seed)?;
    let u = &cfg.units;
    out.header.seed = Some(plan.seed);
    let body = if cfg.raw.body.is_some() { Some(cfg.body()?) } else { None };
    let (law, law_name) = match &plan.law {
        LawPlan::Power(l) => (l.clone(), "power"),
        LawPlan::Radiation { lo, hi, rel_tol } => {
            let Some(body) = &body else {
                return Err(Failure::Config("rotor.law = \"radiation\": needs a [body] section".into()));
            };
            let state = cfg.state()?;
            let opts = cfg.radiation_options()?;
            let law = torque_law_from_radiation(body, &state, *lo, *hi, *rel_tol, &opts).map_err(num("rotor"))?;
            (law, "radiation")
        }
    };
    law.validate().map_err(num("rotor"))?;
    let lc = LangevinConfig {
        inertia: plan.inertia,
        hbar: plan.hbar,
        dt: plan.dt,
        steps: plan.steps,
        n_traj: plan.n_traj,
        omega_init: plan.omega_init,
        drive: plan.drive,
        seed: plan.seed,
        record_every: plan.record_every,
        convention: plan.convention,
    };
    let ens = simulate(&lc, &law).map_err(num("rotor"))?;
    let summary = summarize(&ens, &law, plan.drive).map_err(num("rotor"))?;
    let density = match plan.drive {
        Some(w0) => {
            let grid = FpGrid::around(&law, w0, plan.inertia, plan.hbar, plan.density_width, plan.density_points)
                .map_err(num("rotor"))?;
            Some(fokker_planck_stationary(&law, w0, plan.inertia, plan.hbar, &grid).map_err(num("rotor"))?)
        }
        None => None,
    };
    let f = |v| u.output(Quantity::Frequency, v);
    let fsq = u.output(Quantity::Frequency, 1.0).powi(2);
    let l = |v| u.output(Quantity::AngularMomentum, v);
    let mut warnings = Vec::new();
    if ens.adiabatic_warning() {
        warnings.push(format!("adiabaticity {:.3e} exceeds {ADIABATIC_LIMIT}", ens.max_adiabaticity));
    }
    out.header.regime = Regime {
        omega_r: body.as_ref().and_then(|b| omega_r(b, plan.drive.unwrap_or(plan.omega_init))),
        adiabaticity: Some(ens.max_adiabaticity),
        warnings,
    };

    let mut traj = String::from("t,traj_id,omega\n");
    for (t, omegas) in &ens.records {
        let t = u.output(Quantity::Time, *t);
        for (j, w) in omegas.iter().enumerate() {
            traj.push_str(&format!("{t:e},{j},{:e}\n", f(*w)));
        }
    }
    out.csv("trajectories", &traj)?;
    if let Some(d) = &density {
        let mut s = String::from("omega,pdf\n");
        for (w, p) in d.omega.iter().zip(&d.pdf) {
            s.push_str(&format!("{:e},{:e}\n", f(*w), p / f(1.0)));
        }
        out.csv("density", &s)?;
    }
    let result = RotorOut {
        units: if u.si { "omega in rad/s, time in s, I Delta Omega in J s" } else { "hbar = c = k_B = 1" },
        law: law_name,
        n_traj: plan.n_traj,
        steps: plan.steps,
        time: u.output(Quantity::Time, ens.time),
        mean: f(summary.mean),
        var: summary.var * fsq,
        i_delta_omega_analytic: summary.i_delta_omega_analytic.map(l),
        i_delta_omega_mc: l(summary.i_delta_omega_mc),
        max_adiabaticity: summary.max_adiabaticity,
        density_mean: density.as_ref().map(|d| f(d.mean)),
        density_variance: density.as_ref().map(|d| d.variance * fsq),
        density_norm: density.as_ref().map(|d| d.norm),
        ks_distance: density.as_ref().map(|d| ens.ks_distance(|w| d.cdf_at(w))),
    };
    match format {
        Format::Json => out.json("rotor_summary", &result)?,
        Format::Csv => {
            let mut rows = vec![
                ("time", result.time),
                ("mean", result.mean),
                ("var", result.var),
                ("IDeltaOmega_mc", result.i_delta_omega_mc),
                ("maxAdiabaticity", result.max_adiabaticity),
            ];
            for (k, v) in [
                ("IDeltaOmega_analytic", result.i_delta_omega_analytic),
                ("density_mean", result.density_mean),
                ("density_variance", result.density_variance),
                ("density_norm", result.density_norm),
                ("ks_distance", result.ks_distance),
            ] {
                if let Some(v) = v {
                    rows.push((k, v));
                }
            }
            out.csv("rotor_summary", &key_value_csv(&rows))?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepRow {
    d: f64,
    #[serde(rename = "M_transfer")]
    torque: f64,
    #[serde(rename = "F_y")]
    force: Option<f64>,
    #[serde(rename = "regimeFlags")]
    regime_flags: Vec<String>,
}

#[derive(Serialize)]
struct SweepOut {
    units: &'static str,
    rows: Vec<SweepRow>,
    /// Fitted exponent of `M_transfer` against `d`.
    torque_slope: Option<f64>,
}

pub fn twobody(cfg: &Config, out: &mut Writer, format: Format) -> Result<()> {
    let plan = cfg.two_body()?;
    let state = cfg.state()?;
    let quad = cfg.radiation_options()?.quad;
    let reports = plan
        .separations
        .par_iter()
        .map(|d| two_body_report(&plan.cfg.with_separation(*d), state.omega, plan.model, &quad))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(num("testbody"))?;
    let u = &cfg.units;
    let mut warnings: Vec<String> = Vec::new();
    for r in &reports {
        for w in &r.regime_flags {
            let w = format!("d = {:e}: {w}", u.output(Quantity::Length, r.d));
            warnings.push(w);
        }
    }
    out.header.regime = Regime { omega_r: Some(state.omega * plan.cfg.r_source), adiabaticity: None, warnings };
    let rows: Vec<SweepRow> = reports
        .iter()
        .map(|r| SweepRow {
            d: u.output(Quantity::Length, r.d),
            torque: u.output(Quantity::Torque, r.torque),
            force: r.force.map(|f| u.output(Quantity::Force, f)),
            regime_flags: r.regime_flags.clone(),
        })
        .collect();
    let positive = rows.len() >= 2 && rows.iter().all(|r| r.torque > 0.0);
    let torque_slope = positive.then(|| {
        let d: Vec<f64> = rows.iter().map(|r| r.d).collect();
        let m: Vec<f64> = rows.iter().map(|r| r.torque).collect();
        log_log_slope(&d, &m)
    });
    match format {
        Format::Csv => {
            let mut s = String::from("d,M_transfer,F_y\n");
            for r in &rows {
                let f = r.force.map_or(String::new(), |f| format!("{f:e}"));
                s.push_str(&format!("{:e},{:e},{f}\n", r.d, r.torque));
            }
            out.csv("twobody", &s)?;
        }
        Format::Json => out.json(
            "twobody",
            &SweepOut { units: if u.si { "d in m, M in N m, F in N" } else { "hbar = c = k_B = 1" }, rows, torque_slope },
        )?,
    }
    Ok(())
}

/// Runs the closed-form check suite and prints one line per check.
pub fn verify(seed: Option<u64>) -> Vec<CheckResult> {
    let setup = RotorCheckSetup { seed: seed.unwrap_or(RotorCheckSetup::default().seed), ..Default::default() };
    run_all(&setup)
}
