//! Scattering amplitudes of rotating bodies.
//!
//! * Scalar disk: exact Bessel matching with the comoving interior
//!   frequency, plus the small-velocity form of `|S_1|^2 - 1`.
//! * Sphere: electric-dipole channel `l = 1`.
//! * Cylinder: `m = 1` block mixing the M and E polarizations.
//! * User channel tables loaded from CSV.
//!
//! The disk S-matrix is only meaningful to leading order in `Omega R`; it is
//! evaluated exactly as written and the caller is expected to keep
//! `Omega R` small.

use crate::error::{Error, Result};
use crate::material::DielectricModel;
use crate::specfun::{bessel_j_pair, bessel_y_pair, C64};
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

/// Threshold on `omega R` above which small-velocity results carry a warning.
pub const SMALL_VELOCITY_LIMIT: f64 = 0.3;
const RESONANCE_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Extra {
    None,
    Kz(f64),
    L(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Polarization {
    Scalar,
    E,
    M,
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Scalar => "scalar",
            Self::E => "E",
            Self::M => "M",
        })
    }
}

impl fmt::Display for Extra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::None => Ok(()),
            Self::Kz(k) => write!(f, "{k}"),
            Self::L(l) => write!(f, "{l}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeIndex {
    pub omega: f64,
    pub m: i64,
    pub extra: Extra,
    pub pol: Polarization,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelAmplitude {
    pub mode: ModeIndex,
    pub s: C64,
    pub flux_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Unitarity {
    Subunitary,
    Unitary,
    Superunitary,
}

/// `1 - |S|^2` for a diagonal channel.
pub fn flux_factor(s: C64) -> f64 {
    1.0 - s.norm_sqr()
}

pub fn classify(flux: f64, tol: f64) -> Unitarity {
    if flux > tol {
        Unitarity::Subunitary
    } else if flux < -tol {
        Unitarity::Superunitary
    } else {
        Unitarity::Unitary
    }
}

/// Comoving interior frequency `w~` with
/// `w~^2 = (eps(w') - 1) w'^2 + omega^2`, `w' = omega - Omega m`, on the branch
/// where `Im w~` has the sign of `w'`.
pub fn disk_interior_frequency(model: &DielectricModel, omega_rot: f64, omega: f64, m: i64) -> Result<C64> {
    let wp = omega - omega_rot * m as f64;
    let sq = model.chi_omega(wp)? * wp + omega * omega;
    let mut w = sq.sqrt();
    if (wp > 0.0 && w.im < 0.0) || (wp < 0.0 && w.im > 0.0) {
        w = -w;
    }
    Ok(w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskChannel {
    pub s: C64,
    /// `1 - |S|^2` from the Wronskian form, free of cancellation.
    pub flux_factor: f64,
    pub interior_frequency: C64,
}

/// Exact disk amplitude `S_m(omega)` and its flux factor.
///
/// With `u = w~ J_m'(w~R)/J_m(w~R)`,
/// `S = -(u H2 - omega H2')/(u H1 - omega H1')` at argument `omega R`, and
/// `1 - |S|^2 = -8 Im u / (pi R |u H1 - omega H1'|^2)`.
pub fn disk_channel(model: &DielectricModel, r: f64, omega_rot: f64, omega: f64, m: i64) -> Result<DiskChannel> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("disk S-matrix needs omega > 0, got {omega}")));
    }
    let wt = disk_interior_frequency(model, omega_rot, omega, m)?;
    let j = bessel_j_pair(m, wt * r)?;
    if j.value.norm() < RESONANCE_FLOOR {
        return Err(Error::Resonance(format!("J_{m}(w~R) vanishes at omega = {omega}")));
    }
    let u = wt * j.deriv / j.value;
    let x = C64::new(omega * r, 0.0);
    let jx = bessel_j_pair(m, x)?;
    let yx = bessel_y_pair(m, x)?;
    let i = C64::new(0.0, 1.0);
    let (h1, dh1) = (jx.value + i * yx.value, jx.deriv + i * yx.deriv);
    let (h2, dh2) = (jx.value - i * yx.value, jx.deriv - i * yx.deriv);
    let den = u * h1 - omega * dh1;
    let num = u * h2 - omega * dh2;
    if den.norm() < RESONANCE_FLOOR {
        return Err(Error::Resonance(format!("S-matrix denominator vanishes at omega = {omega}, m = {m}")));
    }
    let s = -num / den;
    let flux = -8.0 * u.im / (PI * r * den.norm_sqr());
    Ok(DiskChannel { s, flux_factor: flux, interior_frequency: wt })
}

pub fn disk_smatrix(model: &DielectricModel, r: f64, omega_rot: f64, omega: f64, m: i64) -> Result<C64> {
    disk_channel(model, r, omega_rot, omega, m).map(|c| c.s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallVelocity {
    /// `|S_1|^2 - 1`.
    pub value: f64,
    /// Set when `omega R >= SMALL_VELOCITY_LIMIT`.
    pub warning: bool,
}

/// `|S_1|^2 - 1 ~ -(pi/8) omega^2 (omega - Omega)^2 R^4 Im eps(omega - Omega)`.
pub fn disk_smatrix_smallvel(model: &DielectricModel, r: f64, omega_rot: f64, omega: f64) -> Result<SmallVelocity> {
    let wp = omega - omega_rot;
    // (w')^2 Im eps(w') = w' Im[(eps - 1) w']
    let value = -(PI / 8.0) * omega * omega * r.powi(4) * wp * model.chi_omega(wp)?.im;
    Ok(SmallVelocity { value, warning: omega * r >= SMALL_VELOCITY_LIMIT })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum SphereFlux {
    /// `(8 omega^3/3) Im alpha`, first order in the polarizability.
    #[default]
    Leading,
    /// `1 - |S|^2` of the dipole amplitude.
    Exact,
}

/// `S_{1mE} = 1 + i (4 omega^3/3) alpha(omega - Omega m)`.
pub fn sphere_smatrix_dipole(model: &DielectricModel, r: f64, omega_rot: f64, omega: f64, m: i64) -> Result<C64> {
    if !(-1..=1).contains(&m) {
        return Err(Error::Domain(format!("dipole channel needs m in {{-1, 0, 1}}, got {m}")));
    }
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("sphere S-matrix needs omega > 0, got {omega}")));
    }
    let alpha = crate::material::sphere_polarizability(model, r, omega - omega_rot * m as f64)?;
    Ok(1.0 + C64::new(0.0, 4.0 * omega.powi(3) / 3.0) * alpha)
}

pub fn sphere_flux_factor(
    model: &DielectricModel,
    r: f64,
    omega_rot: f64,
    omega: f64,
    m: i64,
    mode: SphereFlux,
) -> Result<f64> {
    sphere_smatrix_dipole(model, r, omega_rot, omega, m)?;
    let alpha = crate::material::sphere_polarizability(model, r, omega - omega_rot * m as f64)?;
    let a = 4.0 * omega.powi(3) / 3.0;
    Ok(match mode {
        SphereFlux::Leading => 2.0 * a * alpha.im,
        // 1 - |1 + i a alpha|^2 expanded, free of the cancellation in 1 - |S|^2
        SphereFlux::Exact => 2.0 * a * alpha.im - a * a * alpha.norm_sqr(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum BlockFlux {
    /// Keep `|S|^2 - 1` to `O(R^2)`: the diagonal `2 Re` terms only.
    #[default]
    Truncated,
    /// `1 - sum_P' |S_PP'|^2` of the full block.
    Exact,
}

/// `m = 1` cylinder block, rows/columns ordered `[M, E]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderBlock {
    pub omega: f64,
    pub k_z: f64,
    pub s: [[C64; 2]; 2],
    /// `(i pi/2)(eps' - 1)/(eps' + 1)`.
    pub coupling: C64,
    pub r: f64,
}

impl CylinderBlock {
    /// Per-row flux factors `[M, E]`.
    pub fn flux_factors(&self, mode: BlockFlux) -> [f64; 2] {
        match mode {
            BlockFlux::Exact => {
                let row = |i: usize| 1.0 - self.s[i][0].norm_sqr() - self.s[i][1].norm_sqr();
                [row(0), row(1)]
            }
            BlockFlux::Truncated => {
                let r2 = self.r * self.r;
                let g = 2.0 * self.coupling.re * r2;
                [-g * self.omega * self.omega, -g * self.k_z * self.k_z]
            }
        }
    }

    pub fn total_flux(&self, mode: BlockFlux) -> f64 {
        let f = self.flux_factors(mode);
        f[0] + f[1]
    }
}

pub fn cylinder_smatrix_block(
    model: &DielectricModel,
    r: f64,
    omega_rot: f64,
    omega: f64,
    k_z: f64,
) -> Result<CylinderBlock> {
    if k_z.abs() > omega {
        return Err(Error::Domain(format!("|k_z| = {} exceeds omega = {omega}", k_z.abs())));
    }
    let rho = model.pole_ratio(omega - omega_rot, 1.0)?;
    let g = C64::new(0.0, PI / 2.0) * rho;
    let r2 = r * r;
    let one = C64::new(1.0, 0.0);
    let mm = one + g * omega * omega * r2;
    let ee = one + g * k_z * k_z * r2;
    let em = g * omega * k_z * r2;
    Ok(CylinderBlock { omega, k_z, s: [[mm, em], [em, ee]], coupling: g, r })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Computed,
    UserFile,
}

/// Amplitudes of one `(m, extra, pol)` channel on an increasing ω grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TableChannel {
    pub m: i64,
    pub extra: Extra,
    pub pol: Polarization,
    pub omega: Vec<f64>,
    pub s: Vec<C64>,
}

impl TableChannel {
    pub fn range(&self) -> (f64, f64) {
        (self.omega[0], *self.omega.last().unwrap())
    }

    /// Linear interpolation of Re S and Im S.
    pub fn s_at(&self, w: f64) -> Result<C64> {
        let (lo, hi) = self.range();
        if w < lo || w > hi {
            return Err(Error::Extrapolation { omega: w, lo, hi });
        }
        if self.omega.len() == 1 {
            return Ok(self.s[0]);
        }
        let p = self.omega.partition_point(|x| *x <= w);
        let k = p.saturating_sub(1).min(self.omega.len() - 2);
        let t = (w - self.omega[k]) / (self.omega[k + 1] - self.omega[k]);
        Ok(self.s[k] + (self.s[k + 1] - self.s[k]) * t)
    }

    pub fn flux_at(&self, w: f64) -> Result<f64> {
        self.s_at(w).map(flux_factor)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTable {
    pub geometry: String,
    pub provenance: Provenance,
    pub channels: Vec<TableChannel>,
}

pub const CHANNEL_HEADER: &str = "omega,m,extra,pol,ReS,ImS";

fn same_key(c: &TableChannel, m: i64, extra: &Extra, pol: Polarization) -> bool {
    c.m == m
        && c.pol == pol
        && match (&c.extra, extra) {
            (Extra::None, Extra::None) => true,
            (Extra::Kz(a), Extra::Kz(b)) => a.to_bits() == b.to_bits(),
            (Extra::L(a), Extra::L(b)) => a == b,
            _ => false,
        }
}

impl ChannelTable {
    /// Parses the channel CSV. `extra` is empty, a `k_z` value (contains a
    /// decimal point or exponent), or an integer `l`; a column is all one kind.
    pub fn parse(text: &str, geometry: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim().replace(' ', "") == CHANNEL_HEADER => {}
            Some((i, h)) => {
                return Err(Error::Parse { line: i + 1, msg: format!("expected header '{CHANNEL_HEADER}', got '{h}'") })
            }
            None => return Err(Error::Parse { line: 1, msg: "empty channel table".into() }),
        }
        let mut channels: Vec<TableChannel> = Vec::new();
        for (i, l) in lines {
            let line = i + 1;
            let cols: Vec<&str> = l.split(',').map(str::trim).collect();
            if cols.len() != 6 {
                return Err(Error::Parse { line, msg: format!("expected 6 columns, got {}", cols.len()) });
            }
            let num = |s: &str, what: &str| -> Result<f64> {
                match s.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(Error::Parse { line, msg: format!("{what}: not a finite number: '{s}'") }),
                }
            };
            let omega = num(cols[0], "omega")?;
            if !(omega > 0.0) {
                return Err(Error::Parse { line, msg: format!("omega must be > 0, got {omega}") });
            }
            let m: i64 = cols[1].parse().map_err(|_| Error::Parse { line, msg: format!("m: not an integer: '{}'", cols[1]) })?;
            let extra = if cols[2].is_empty() {
                Extra::None
            } else if cols[2].contains(['.', 'e', 'E']) {
                Extra::Kz(num(cols[2], "k_z")?)
            } else {
                Extra::L(cols[2].parse().map_err(|_| Error::Parse { line, msg: format!("l: not an integer: '{}'", cols[2]) })?)
            };
            if let Extra::Kz(k) = extra {
                if k.abs() > omega {
                    return Err(Error::Parse { line, msg: format!("|k_z| = {} exceeds omega = {omega}", k.abs()) });
                }
            }
            if let Extra::L(l) = extra {
                if l < 0 || m.abs() > l {
                    return Err(Error::Parse { line, msg: format!("invalid (l, m) = ({l}, {m})") });
                }
            }
            let pol = match cols[3] {
                "scalar" | "S" | "s" => Polarization::Scalar,
                "E" | "e" => Polarization::E,
                "M" | "m" => Polarization::M,
                other => return Err(Error::Parse { line, msg: format!("unknown polarization '{other}'") }),
            };
            let s = C64::new(num(cols[4], "ReS")?, num(cols[5], "ImS")?);
            match channels.iter_mut().find(|c| same_key(c, m, &extra, pol)) {
                Some(c) => {
                    if omega <= *c.omega.last().unwrap() {
                        return Err(Error::Parse {
                            line,
                            msg: format!("omega {omega} not strictly increasing in channel m={m} extra={extra} pol={pol}"),
                        });
                    }
                    c.omega.push(omega);
                    c.s.push(s);
                }
                None => channels.push(TableChannel { m, extra, pol, omega: vec![omega], s: vec![s] }),
            }
        }
        if channels.is_empty() {
            return Err(Error::Parse { line: 2, msg: "table has no rows".into() });
        }
        Ok(Self { geometry: geometry.to_string(), provenance: Provenance::UserFile, channels })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse { line: 0, msg: format!("{}: {e}", path.display()) })?;
        Self::parse(&text, "user-table")
    }

    /// Writes the table in the same CSV schema it is read from.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CHANNEL_HEADER);
        out.push('\n');
        for c in &self.channels {
            for (w, s) in c.omega.iter().zip(&c.s) {
                let extra = match c.extra {
                    Extra::None => String::new(),
                    Extra::Kz(k) => format!("{k:?}"),
                    Extra::L(l) => l.to_string(),
                };
                out.push_str(&format!("{w:?},{},{extra},{},{:?},{:?}\n", c.m, c.pol, s.re, s.im));
            }
        }
        out
    }

    pub fn amplitudes(&self) -> Vec<ChannelAmplitude> {
        self.channels
            .iter()
            .flat_map(|c| {
                c.omega.iter().zip(&c.s).map(move |(w, s)| ChannelAmplitude {
                    mode: ModeIndex { omega: *w, m: c.m, extra: c.extra, pol: c.pol },
                    s: *s,
                    flux_factor: flux_factor(*s),
                })
            })
            .collect()
    }
}

/// Load a channel table from disk (see [`ChannelTable::parse`]).
pub fn load_channel_table(path: &Path) -> Result<ChannelTable> {
    ChannelTable::load(path)
}
