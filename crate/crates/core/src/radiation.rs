//! Photon flux per mode and the integrated power, torque and heat.
//!
//! For a channel `a` with flux factor `f_a(omega) = 1 - |S_a|^2` the photon
//! flux per `d omega / 2 pi` is
//! `N_a = [n(omega - Omega m, T_obj) - n(omega, T_env)] f_a(omega)` and
//!
//! ```text
//! P = sum_a int d omega/2pi  omega           N_a
//! M = sum_a int d omega/2pi  m               N_a
//! Q = sum_a int d omega/2pi (Omega m - omega) N_a
//! ```
//!
//! all evaluated in one vector-valued quadrature per channel. Cylinder
//! channels additionally carry `int L dk_z / 2pi` over `|k_z| <= omega`.

use crate::error::{Error, Result};
use crate::material::{bose_occupation, DielectricModel, ThermalState};
use crate::quadrature::{integrate, integrate_vec, QuadOptions};
use crate::scattering::{
    cylinder_smatrix_block, disk_channel, sphere_flux_factor, BlockFlux, ChannelTable, Extra, ModeIndex,
    Polarization, SphereFlux,
};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Thermal integrals stop this many temperatures above `max(Omega m, 0)`.
pub const THERMAL_CUTOFF: f64 = 40.0;
/// Relative distance to `omega = Omega m` below which the product limit is used.
const COMOVING_ZERO: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Disk { model: DielectricModel, r: f64 },
    Sphere { model: DielectricModel, r: f64, flux: SphereFlux },
    Cylinder { model: DielectricModel, r: f64, length: f64, flux: BlockFlux },
    Table(ChannelTable),
}

/// A channel before the frequency (and `k_z` for the cylinder) is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelKey {
    pub m: i64,
    pub extra: Extra,
    pub pol: Polarization,
    /// Index into the table for user channel tables.
    #[serde(skip)]
    pub table_index: Option<usize>,
}

impl Body {
    pub fn model(&self) -> Option<&DielectricModel> {
        match self {
            Self::Disk { model, .. } | Self::Sphere { model, .. } | Self::Cylinder { model, .. } => Some(model),
            Self::Table(_) => None,
        }
    }

    /// Characteristic radius, used for `Omega R` regime flags.
    pub fn radius(&self) -> Option<f64> {
        match self {
            Self::Disk { r, .. } | Self::Sphere { r, .. } | Self::Cylinder { r, .. } => Some(*r),
            Self::Table(_) => None,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Self::Disk { .. } => "disk",
            Self::Sphere { .. } => "sphere",
            Self::Cylinder { .. } => "cylinder",
            Self::Table(t) => &t.geometry,
        }
    }

    /// `1 - |S|^2` of a single mode (for the cylinder: the row of `mode.pol`
    /// at `k_z = mode.extra`).
    pub fn flux_factor(&self, omega_rot: f64, mode: &ModeIndex) -> Result<f64> {
        let w = mode.omega;
        match self {
            Self::Disk { model, r } => Ok(disk_channel(model, *r, omega_rot, w, mode.m)?.flux_factor),
            Self::Sphere { model, r, flux } => sphere_flux_factor(model, *r, omega_rot, w, mode.m, *flux),
            Self::Cylinder { model, r, flux, .. } => {
                if mode.m != 1 {
                    return Err(Error::Domain(format!("cylinder model has only the m = 1 block, got m = {}", mode.m)));
                }
                let k = match mode.extra {
                    Extra::Kz(k) => k,
                    _ => return Err(Error::Domain("cylinder modes need a k_z".into())),
                };
                let f = cylinder_smatrix_block(model, *r, omega_rot, w, k)?.flux_factors(*flux);
                match mode.pol {
                    Polarization::M => Ok(f[0]),
                    Polarization::E => Ok(f[1]),
                    Polarization::Scalar => Err(Error::Domain("cylinder modes are M or E".into())),
                }
            }
            Self::Table(t) => {
                let c = t
                    .channels
                    .iter()
                    .find(|c| c.m == mode.m && c.pol == mode.pol && c.extra == mode.extra)
                    .ok_or_else(|| Error::Domain(format!("no table channel for {mode:?}")))?;
                c.flux_at(w)
            }
        }
    }

    /// Flux factor of a channel at `omega`, integrated over `L dk_z/2pi`
    /// for the cylinder.
    pub fn channel_flux_factor(&self, omega_rot: f64, key: &ChannelKey, omega: f64, quad: &QuadOptions) -> Result<f64> {
        match self {
            Self::Cylinder { length, .. } => {
                let inner = QuadOptions { rel_tol: quad.rel_tol.min(1e-12), ..*quad };
                let (v, _) = integrate(
                    |k| {
                        let mode = ModeIndex { omega, m: key.m, extra: Extra::Kz(k), pol: key.pol };
                        self.flux_factor(omega_rot, &mode)
                    },
                    -omega,
                    omega,
                    &inner,
                )?;
                Ok(length / (2.0 * PI) * v)
            }
            Self::Table(t) => t.channels[key.table_index.expect("table key")].flux_at(omega),
            _ => self.flux_factor(omega_rot, &ModeIndex { omega, m: key.m, extra: key.extra, pol: key.pol }),
        }
    }

    /// Channels contributing for a given `m` cutoff (disk only; the other
    /// geometries have a fixed channel set). `m <= 0` channels are dropped at
    /// zero temperature, where they carry no flux.
    pub fn channels(&self, m_max: i64, state: &ThermalState) -> Vec<ChannelKey> {
        let cold = state.t_object == 0.0 && state.t_env == 0.0;
        let key = |m, extra, pol| ChannelKey { m, extra, pol, table_index: None };
        let mut out: Vec<ChannelKey> = match self {
            Self::Disk { .. } => (-m_max..=m_max).map(|m| key(m, Extra::None, Polarization::Scalar)).collect(),
            Self::Sphere { .. } => (-1..=1).map(|m| key(m, Extra::L(1), Polarization::E)).collect(),
            Self::Cylinder { .. } => {
                vec![key(1, Extra::None, Polarization::M), key(1, Extra::None, Polarization::E)]
            }
            Self::Table(t) => t
                .channels
                .iter()
                .enumerate()
                .map(|(i, c)| ChannelKey { m: c.m, extra: c.extra, pol: c.pol, table_index: Some(i) })
                .collect(),
        };
        if cold {
            out.retain(|k| k.m >= 1);
        }
        out
    }
}

/// `[n(omega - Omega m, T_obj) - n(omega, T_env)] f(omega)`, taking the
/// product limit `T_obj f'(omega)` where `omega = Omega m`.
fn occupied<F>(f: F, omega: f64, m: i64, state: &ThermalState) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let wp = omega - state.omega * m as f64;
    let n_out = if state.t_env == 0.0 { 0.0 } else { bose_occupation(omega, state.t_env)? };
    let out_term = if n_out == 0.0 { 0.0 } else { n_out * f(omega)? };
    let in_term = if wp.abs() <= COMOVING_ZERO * omega.max(state.omega * m.abs() as f64) {
        if state.t_object == 0.0 {
            0.0
        } else {
            let h = 1e-4 * omega;
            state.t_object * (f(omega + h)? - f(omega - h)?) / (2.0 * h)
        }
    } else {
        let n_in = bose_occupation(wp, state.t_object)?;
        if n_in == 0.0 {
            0.0
        } else {
            n_in * f(omega)?
        }
    };
    Ok(in_term - out_term)
}

/// Photon flux `N` of a single mode.
pub fn mode_flux(body: &Body, state: &ThermalState, mode: &ModeIndex) -> Result<f64> {
    if !(mode.omega > 0.0) {
        return Err(Error::Domain(format!("mode_flux needs omega > 0, got {}", mode.omega)));
    }
    occupied(|w| body.flux_factor(state.omega, &ModeIndex { omega: w, ..*mode }), mode.omega, mode.m, state)
}

/// Photon flux of a whole channel (integrated over `k_z` for the cylinder).
pub fn channel_flux(body: &Body, state: &ThermalState, key: &ChannelKey, omega: f64, quad: &QuadOptions) -> Result<f64> {
    occupied(|w| body.channel_flux_factor(state.omega, key, w, quad), omega, key.m, state)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MSumPolicy {
    /// Sum `|m| <= m_max`.
    Fixed(i64),
    /// Double `m_max` from `start` until the tail estimate meets the
    /// tolerance, giving up beyond `max`.
    Auto { start: i64, max: i64 },
}

impl Default for MSumPolicy {
    fn default() -> Self {
        Self::Fixed(5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiationOptions {
    pub quad: QuadOptions,
    pub m_policy: MSumPolicy,
    /// Allowed truncation tail relative to `|P|`.
    pub tail_tol: f64,
}

impl Default for RadiationOptions {
    fn default() -> Self {
        Self { quad: QuadOptions::default(), m_policy: MSumPolicy::default(), tail_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeContribution {
    pub m: i64,
    pub extra: Extra,
    pub pol: Polarization,
    #[serde(rename = "P")]
    pub power: f64,
    #[serde(rename = "M")]
    pub torque: f64,
    #[serde(rename = "Q")]
    pub heat: f64,
    pub error: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiationResult {
    #[serde(rename = "P")]
    pub power: f64,
    #[serde(rename = "M")]
    pub torque: f64,
    #[serde(rename = "Q")]
    pub heat: f64,
    pub per_mode: Vec<ModeContribution>,
    /// Quadrature error estimates of `[P, M, Q]` (thermal cutoff tail included).
    pub error: [f64; 3],
    /// Estimated contribution of the omitted partial waves to `P`.
    pub truncation_tail: f64,
    pub m_max: i64,
}

impl RadiationResult {
    /// Sum of error estimates entering `Q - (Omega M - P)`.
    pub fn quadrature_error_estimate(&self, omega_rot: f64) -> f64 {
        self.error[0] + omega_rot * self.error[1] + self.error[2]
    }

    pub fn bookkeeping_residual(&self, omega_rot: f64) -> f64 {
        self.heat - (omega_rot * self.torque - self.power)
    }
}

pub(crate) fn segments(body: &Body, key: &ChannelKey, state: &ThermalState) -> Vec<(f64, f64)> {
    let om = state.omega * key.m as f64;
    let t = state.t_object.max(state.t_env);
    let mut pts = vec![0.0];
    if om > 0.0 {
        pts.push(om);
    }
    if t > 0.0 {
        pts.push(om.max(0.0) + THERMAL_CUTOFF * t);
    }
    if let (Body::Table(tab), Some(i)) = (body, key.table_index) {
        let c = &tab.channels[i];
        let (lo, hi) = c.range();
        let top = *pts.last().unwrap();
        let mut p: Vec<f64> = c.omega.iter().copied().filter(|w| *w < top).collect();
        p.extend(pts.iter().copied().filter(|w| *w > lo && *w < hi));
        p.push(top.min(hi));
        p.sort_by(f64::total_cmp);
        p.dedup();
        pts = p.into_iter().filter(|w| *w >= lo && *w <= hi.min(top)).collect();
    }
    pts.windows(2).filter(|w| w[1] > w[0]).map(|w| (w[0], w[1])).collect()
}

fn integrate_channel(body: &Body, state: &ThermalState, key: &ChannelKey, quad: &QuadOptions) -> Result<ModeContribution> {
    let mf = key.m as f64;
    let om = state.omega * mf;
    let mut val = [0.0; 3];
    let mut err = [0.0; 3];
    let segs = segments(body, key, state);
    for &(a, b) in &segs {
        // tabulated amplitudes fix 1 - |S|^2 only to rounding of |S|^2
        let quad = &match body {
            Body::Table(_) => {
                let scale = b.max(mf.abs()).max(om.abs() + b);
                let floor = 8.0 * f64::EPSILON * (b - a) * scale / (2.0 * PI);
                QuadOptions { abs_tol: quad.abs_tol.max(floor), ..*quad }
            }
            _ => *quad,
        };
        let r = integrate_vec(
            |w, out: &mut [f64]| {
                let n = channel_flux(body, state, key, w, quad)? / (2.0 * PI);
                out[0] = w * n;
                out[1] = mf * n;
                out[2] = (om - w) * n;
                Ok(())
            },
            a,
            b,
            3,
            quad,
        )?;
        for d in 0..3 {
            val[d] += r.value[d];
            err[d] += r.error[d];
        }
    }
    // exponential tail beyond the thermal cutoff: integrand ~ g(W) e^{-(w-W)/T}
    let t = state.t_object.max(state.t_env);
    if t > 0.0 && !matches!(body, Body::Table(_)) {
        if let Some(&(_, w)) = segs.last() {
            let n = channel_flux(body, state, key, w, quad)?.abs() / (2.0 * PI);
            let tail = 2.0 * t * n;
            err[0] += tail * (w + t);
            err[1] += tail * mf.abs();
            err[2] += tail * (w + t + om.abs());
        }
    }
    Ok(ModeContribution { m: key.m, extra: key.extra, pol: key.pol, power: val[0], torque: val[1], heat: val[2], error: err })
}

fn sum_channels(
    body: &Body,
    state: &ThermalState,
    keys: &[ChannelKey],
    quad: &QuadOptions,
) -> Result<Vec<ModeContribution>> {
    keys.par_iter().map(|k| integrate_channel(body, state, k, quad)).collect()
}

fn assemble(per_mode: Vec<ModeContribution>, tail: f64, m_max: i64) -> RadiationResult {
    let mut res = RadiationResult {
        power: 0.0,
        torque: 0.0,
        heat: 0.0,
        per_mode: Vec::new(),
        error: [0.0; 3],
        truncation_tail: tail,
        m_max,
    };
    for c in &per_mode {
        res.power += c.power;
        res.torque += c.torque;
        res.heat += c.heat;
        for d in 0..3 {
            res.error[d] += c.error[d];
        }
    }
    res.per_mode = per_mode;
    res
}

/// Tail estimate from the outermost two shells `|m| = m_max, m_max - 1`,
/// assuming geometric decay.
fn shell_tail(per_mode: &[ModeContribution], m_max: i64) -> f64 {
    let shell = |s: i64| -> f64 { per_mode.iter().filter(|c| c.m.abs() == s).map(|c| c.power.abs()).sum() };
    let last = shell(m_max);
    if m_max < 2 {
        return last;
    }
    let prev = shell(m_max - 1);
    if last == 0.0 {
        return 0.0;
    }
    if prev > last {
        let r = last / prev;
        last * r / (1.0 - r)
    } else {
        // not yet decaying: the tail is at least as large as the last shell
        f64::INFINITY
    }
}

/// `P`, `M`, `Q` for a body in the given thermal state.
pub fn integrate_power(body: &Body, state: &ThermalState, opts: &RadiationOptions) -> Result<RadiationResult> {
    if !matches!(body, Body::Disk { .. }) {
        let keys = body.channels(0, state);
        let per_mode = sum_channels(body, state, &keys, &opts.quad)?;
        let m_max = keys.iter().map(|k| k.m.abs()).max().unwrap_or(0);
        return Ok(assemble(per_mode, 0.0, m_max));
    }
    let (mut m_max, cap) = match opts.m_policy {
        MSumPolicy::Fixed(m) => (m, m),
        MSumPolicy::Auto { start, max } => (start.max(1), max),
    };
    let mut per_mode = sum_channels(body, state, &body.channels(m_max, state), &opts.quad)?;
    loop {
        let res = assemble(per_mode.clone(), shell_tail(&per_mode, m_max), m_max);
        let ok = res.truncation_tail <= opts.tail_tol * res.power.abs() || res.power == 0.0;
        if ok {
            return Ok(res);
        }
        if m_max >= cap {
            return Err(Error::Convergence(format!(
                "partial-wave sum not converged at m = {m_max}: tail {:.3e} vs |P| = {:.3e}",
                res.truncation_tail,
                res.power.abs()
            )));
        }
        let next = (2 * m_max).min(cap);
        let new: Vec<ChannelKey> =
            body.channels(next, state).into_iter().filter(|k| k.m.abs() > m_max).collect();
        per_mode.extend(sum_channels(body, state, &new, &opts.quad)?);
        per_mode.sort_by_key(|c| c.m);
        m_max = next;
    }
}

/// `P`, `M`, `Q` of a cylinder of length `length` (the nested `omega`, `k_z`
/// integral).
pub fn integrate_power_cylinder(
    model: &DielectricModel,
    r: f64,
    length: f64,
    state: &ThermalState,
    flux: BlockFlux,
    opts: &RadiationOptions,
) -> Result<RadiationResult> {
    let body = Body::Cylinder { model: model.clone(), r, length, flux };
    integrate_power(&body, state, opts)
}

/// Thermal radiation of a body at rest.
pub fn kirchhoff_power(body: &Body, t_obj: f64, t_env: f64, opts: &RadiationOptions) -> Result<RadiationResult> {
    let state = ThermalState::new(t_obj, t_env, 0.0)?;
    integrate_power(body, &state, opts)
}

/// `sum_{|m| <= m_max} (1 - |S_m|^2)` of a static disk at `omega`.
pub fn disk_absorptivity_sum(model: &DielectricModel, r: f64, omega: f64, m_max: i64) -> Result<f64> {
    (-m_max..=m_max).map(|m| disk_channel(model, r, 0.0, omega, m).map(|c| c.flux_factor)).sum()
}

/// Time for the deterministic drift `I dOmega/dt = -M(Omega)` to take
/// `Omega_0` down to `Omega_0/10`.
pub fn spindown_time_from_torque<F>(torque: F, inertia: f64, omega0: f64, quad: &QuadOptions) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let (v, _) = integrate(
        |w| {
            let m = torque(w)?;
            if !(m > 0.0) {
                return Err(Error::Divergent(format!("torque {m} at Omega = {w}: spin-down time is infinite")));
            }
            Ok(inertia / m)
        },
        omega0 / 10.0,
        omega0,
        quad,
    )?;
    Ok(v)
}

/// Spin-down time of a body at zero temperature.
pub fn spindown_timescale(body: &Body, inertia: f64, omega0: f64, opts: &RadiationOptions) -> Result<f64> {
    let quad = QuadOptions { rel_tol: opts.quad.rel_tol.max(1e-8), ..opts.quad };
    spindown_time_from_torque(
        |w| Ok(integrate_power(body, &ThermalState::new(0.0, 0.0, w)?, opts)?.torque),
        inertia,
        omega0,
        &quad,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralRow {
    pub omega: f64,
    pub m: i64,
    pub extra: Extra,
    pub pol: Polarization,
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "dP_domega")]
    pub dp_domega: f64,
}

pub const SPECTRAL_HEADER: &str = "omega,m,extra,pol,N,dP_domega";

/// Per-channel spectral flux on a frequency grid. `dP/domega = omega N / 2pi`.
pub fn spectrum(body: &Body, state: &ThermalState, omegas: &[f64], m_max: i64, quad: &QuadOptions) -> Result<Vec<SpectralRow>> {
    let keys = body.channels(m_max, state);
    let rows: Vec<Vec<SpectralRow>> = keys
        .par_iter()
        .map(|k| {
            omegas
                .iter()
                .filter(|w| match (body, k.table_index) {
                    (Body::Table(t), Some(i)) => {
                        let (lo, hi) = t.channels[i].range();
                        **w >= lo && **w <= hi
                    }
                    _ => true,
                })
                .map(|&w| {
                    let n = channel_flux(body, state, k, w, quad)?;
                    Ok(SpectralRow { omega: w, m: k.m, extra: k.extra, pol: k.pol, n, dp_domega: w * n / (2.0 * PI) })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}

pub fn spectrum_csv(rows: &[SpectralRow]) -> String {
    let mut s = String::from(SPECTRAL_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!("{:e},{},{},{},{:e},{:e}\n", r.omega, r.m, r.extra, r.pol, r.n, r.dp_domega));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::ChannelTable;

    fn drude_sphere(sigma: f64, r: f64) -> Body {
        Body::Sphere { model: DielectricModel::Drude { sigma }, r, flux: SphereFlux::Leading }
    }

    #[test]
    fn mode_flux_examples() {
        let body = Body::Disk { model: DielectricModel::Drude { sigma: 0.5 }, r: 0.5 };
        let mode = ModeIndex { omega: 0.7, m: 1, extra: Extra::None, pol: Polarization::Scalar };
        let eq = ThermalState::new(0.3, 0.3, 0.0).unwrap();
        assert_eq!(mode_flux(&body, &eq, &mode).unwrap(), 0.0);
        let cold = ThermalState::new(0.0, 0.0, 0.5).unwrap();
        assert_eq!(mode_flux(&body, &cold, &mode).unwrap(), 0.0);
        let table = ChannelTable::parse(
            &format!("omega,m,extra,pol,ReS,ImS\n0.1,1,,scalar,{},0\n0.2,1,,scalar,{},0\n", 1.2f64.sqrt(), 1.2f64.sqrt()),
            "t",
        )
        .unwrap();
        let tb = Body::Table(table);
        let st = ThermalState::new(0.0, 0.0, 1.0).unwrap();
        let m = ModeIndex { omega: 0.15, ..mode };
        assert!((mode_flux(&tb, &st, &m).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn removable_singularity_is_finite_and_continuous() {
        let body = drude_sphere(10.0, 0.1);
        let st = ThermalState::new(0.2, 0.0, 1.0).unwrap();
        let at = |w: f64| mode_flux(&body, &st, &ModeIndex { omega: w, m: 1, extra: Extra::L(1), pol: Polarization::E }).unwrap();
        let a = at(1.0);
        let b = at(1.0 + 1e-6);
        let c = at(1.0 - 1e-6);
        assert!(a.is_finite());
        assert!((a - b).abs() < 1e-4 * a.abs() && (a - c).abs() < 1e-4 * a.abs());
    }

    #[test]
    fn drude_sphere_closed_form() {
        let (sigma, om, r) = (1e3, 1.0, 0.5);
        let st = ThermalState::new(0.0, 0.0, om).unwrap();
        let res = integrate_power(&drude_sphere(sigma, r), &st, &RadiationOptions::default()).unwrap();
        let p = r.powi(3) * om.powi(6) / (30.0 * PI * PI * sigma);
        let m = r.powi(3) * om.powi(5) / (20.0 * PI * PI * sigma);
        assert!((res.power / p - 1.0).abs() < 0.02);
        assert!((res.torque / m - 1.0).abs() < 0.02);
        assert!(res.bookkeeping_residual(om).abs() <= 10.0 * res.quadrature_error_estimate(om) + 1e-14 * res.power);
    }

    #[test]
    fn quadrature_matches_polynomial_moment() {
        // leading-order Drude integrand with the exact alpha: compare with a
        // moment computed from the same closed-form Im alpha
        let (sigma, om, r) = (1e6, 1.0, 1.0);
        let st = ThermalState::new(0.0, 0.0, om).unwrap();
        let res = integrate_power(&drude_sphere(sigma, r), &st, &RadiationOptions::default()).unwrap();
        // Im alpha = R^3 Im[p/(p + 3 w')] with p = 4 pi i sigma
        let exact = |w: f64| {
            let wp = w - om;
            let p = crate::specfun::C64::new(0.0, 4.0 * PI * sigma);
            let a = (p / (p + 3.0 * wp)).im.abs() * r.powi(3);
            w * 8.0 * w.powi(3) / 3.0 * a / (2.0 * PI)
        };
        // series of the rational integrand in 1/sigma to third order is exact to 1e-18
        let c = 3.0 / (4.0 * PI * sigma);
        let approx = 8.0 / 3.0 * r.powi(3) * c / (2.0 * PI) * om.powi(6) / 30.0;
        assert!((res.power / approx - 1.0).abs() < 1e-5);
        let (v, _) = integrate(|w| Ok(exact(w)), 0.0, om, &QuadOptions::default()).unwrap();
        assert!((res.power / v - 1.0).abs() < 1e-8);
    }

    #[test]
    fn lossless_and_equilibrium_nulls() {
        let lossless = Body::Disk { model: DielectricModel::Constant { re: 2.0, im: 0.0 }, r: 0.5 };
        let st = ThermalState::new(0.0, 0.0, 1.0).unwrap();
        let res = integrate_power(&lossless, &st, &RadiationOptions::default()).unwrap();
        assert!(res.power.abs() < 1e-12 && res.torque.abs() < 1e-12);
        let body = Body::Disk { model: DielectricModel::Drude { sigma: 0.3 }, r: 0.5 };
        let res = kirchhoff_power(&body, 0.7, 0.7, &RadiationOptions { m_policy: MSumPolicy::Fixed(6), ..Default::default() })
            .unwrap();
        assert_eq!(res.power, 0.0);
    }

    #[test]
    fn kirchhoff_hot_body_radiates_without_torque() {
        let body = Body::Disk { model: DielectricModel::Drude { sigma: 0.3 }, r: 0.5 };
        let opts = RadiationOptions { m_policy: MSumPolicy::Auto { start: 4, max: 64 }, ..Default::default() };
        let res = kirchhoff_power(&body, 1.0, 0.2, &opts).unwrap();
        assert!(res.power > 0.0);
        assert!(res.torque.abs() < 1e-10 * res.power);
        let cold = kirchhoff_power(&body, 0.2, 1.0, &opts).unwrap();
        assert!(cold.power < 0.0);
    }

    #[test]
    fn zero_temperature_positivity_and_tail() {
        let body = Body::Disk { model: DielectricModel::Drude { sigma: 0.2 }, r: 0.1 };
        let st = ThermalState::new(0.0, 0.0, 1.0).unwrap();
        let res = integrate_power(&body, &st, &RadiationOptions::default()).unwrap();
        assert!(res.power > 0.0 && res.torque > 0.0 && res.heat > 0.0);
        let bigger = integrate_power(&body, &st, &RadiationOptions { m_policy: MSumPolicy::Fixed(8), ..Default::default() })
            .unwrap();
        assert!((bigger.power - res.power).abs() <= res.truncation_tail.max(1e-15 * res.power));
        assert!(res.bookkeeping_residual(1.0).abs() <= 10.0 * res.quadrature_error_estimate(1.0) + 1e-14 * res.power);
    }

    #[test]
    fn finite_temperature_disk_bookkeeping() {
        let body = Body::Disk { model: DielectricModel::Drude { sigma: 0.2 }, r: 0.3 };
        let st = ThermalState::new(0.3, 0.1, 1.0).unwrap();
        let opts = RadiationOptions { m_policy: MSumPolicy::Auto { start: 4, max: 64 }, ..Default::default() };
        let res = integrate_power(&body, &st, &opts).unwrap();
        assert!(res.bookkeeping_residual(1.0).abs() <= 10.0 * res.quadrature_error_estimate(1.0) + 1e-12 * res.power.abs());
    }

    #[test]
    fn fixed_policy_reports_offending_m() {
        let body = Body::Disk { model: DielectricModel::Drude { sigma: 0.2 }, r: 0.3 };
        let st = ThermalState::new(2.0, 0.0, 1.0).unwrap();
        let err = integrate_power(&body, &st, &RadiationOptions { m_policy: MSumPolicy::Fixed(1), ..Default::default() });
        assert!(matches!(err, Err(Error::Convergence(msg)) if msg.contains("m = 1")));
    }

    #[test]
    fn black_body_absorptivity_diagnostic() {
        let model = DielectricModel::Constant { re: 1.0, im: 0.5 };
        let s = disk_absorptivity_sum(&model, 1.0, 100.0, 150).unwrap();
        assert!((s / 200.0 - 1.0).abs() < 0.2, "sum = {s}");
    }

    #[test]
    fn spindown_closed_form() {
        // M = c5 Omega^5 => tau = (I/(4 c5)) [(Omega0/10)^-4 - Omega0^-4]
        let (c5, i, w0) = (0.3, 7.0, 2.0);
        let tau = spindown_time_from_torque(|w| Ok(c5 * w.powi(5)), i, w0, &QuadOptions::default()).unwrap();
        let exact = i / 4.0 * ((w0 / 10.0).powi(-4) - w0.powi(-4)) / c5;
        assert!((tau / exact - 1.0).abs() < 1e-10);
        let tau2 = spindown_time_from_torque(|w| Ok(c5 * w.powi(5)), 2.0 * i, w0, &QuadOptions::default()).unwrap();
        assert!((tau2 / tau - 2.0).abs() < 1e-12);
        assert!(matches!(
            spindown_time_from_torque(|_| Ok(0.0), i, w0, &QuadOptions::default()),
            Err(Error::Divergent(_))
        ));
    }

    #[test]
    fn cylinder_spindown_scaling() {
        // with sigma tied to Omega0 the time scale is I / (L R^2 Omega0^3)
        let opts = RadiationOptions::default();
        let body = |l: f64, r: f64, sigma: f64| Body::Cylinder {
            model: DielectricModel::Drude { sigma },
            r,
            length: l,
            flux: BlockFlux::Truncated,
        };
        let t1 = spindown_timescale(&body(10.0, 0.01, 1.0), 1.0, 1.0, &opts).unwrap();
        let t2 = spindown_timescale(&body(20.0, 0.01, 1.0), 1.0, 1.0, &opts).unwrap();
        let t3 = spindown_timescale(&body(10.0, 0.02, 1.0), 1.0, 1.0, &opts).unwrap();
        let t4 = spindown_timescale(&body(10.0, 0.01, 2.0), 1.0, 2.0, &opts).unwrap();
        let t5 = spindown_timescale(&body(10.0, 0.01, 1.0), 3.0, 1.0, &opts).unwrap();
        assert!((t1 / t2 - 2.0).abs() < 1e-6);
        assert!((t1 / t3 - 4.0).abs() < 1e-6);
        assert!((t1 / t4 - 8.0).abs() < 1e-6);
        assert!((t5 / t1 - 3.0).abs() < 1e-6);
    }

    #[test]
    fn spectrum_rows_and_csv() {
        let body = drude_sphere(10.0, 0.1);
        let st = ThermalState::new(0.0, 0.0, 1.0).unwrap();
        let rows = spectrum(&body, &st, &[0.25, 0.5, 1.5], 5, &QuadOptions::default()).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].n > 0.0 && rows[2].n == 0.0);
        let csv = spectrum_csv(&rows);
        assert!(csv.starts_with(SPECTRAL_HEADER));
        assert_eq!(csv.lines().count(), 4);
    }
}
