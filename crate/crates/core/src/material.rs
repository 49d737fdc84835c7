//! Dielectric response models, Bose-Einstein occupation and dipole
//! polarizability.
//!
//! Gaussian units: a conductor has `eps = 1 + 4 pi i sigma / omega`.
//! Negative frequencies are always reached through `eps(-w) = conj eps(w)`.

use crate::error::{Error, Result};
use crate::specfun::C64;
use std::f64::consts::PI;
use std::path::Path;

/// Relative distance to a pole of `(eps - 1)/(eps + k)` treated as singular.
const POLE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub enum DielectricModel {
    Vacuum,
    /// Conductor with static conductivity `sigma` (a rate in natural units).
    Drude { sigma: f64 },
    /// `eps_inf + omega_p^2 / (omega_0^2 - w^2 - i gamma w)`.
    Lorentz { eps_inf: f64, omega_p: f64, omega_0: f64, gamma: f64 },
    /// Frequency-independent `re + i im` for `w > 0`.
    Constant { re: f64, im: f64 },
    Tabulated(TabulatedEpsilon),
}

/// Sampled `eps(w)` on `w >= 0`. Re is interpolated linearly, Im linearly in
/// `ln Im` (falls back to linear when an endpoint is zero).
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedEpsilon {
    omega: Vec<f64>,
    re: Vec<f64>,
    im: Vec<f64>,
}

pub const TABLE_HEADER: &str = "omega,re_eps,im_eps";

impl TabulatedEpsilon {
    pub fn new(omega: Vec<f64>, re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        if omega.len() != re.len() || omega.len() != im.len() {
            return Err(Error::Domain("column lengths differ".into()));
        }
        if omega.len() < 2 {
            return Err(Error::Domain("table needs at least two rows".into()));
        }
        for (i, w) in omega.iter().enumerate() {
            let line = i + 2;
            if !(w.is_finite() && re[i].is_finite() && im[i].is_finite()) {
                return Err(Error::Parse { line, msg: "non-finite value".into() });
            }
            if *w < 0.0 {
                return Err(Error::Parse { line, msg: format!("negative omega {w}") });
            }
            if im[i] < 0.0 {
                return Err(Error::Parse { line, msg: format!("Im eps = {} < 0 (gain)", im[i]) });
            }
            if i > 0 && *w <= omega[i - 1] {
                return Err(Error::Parse { line, msg: format!("omega {w} not strictly increasing") });
            }
        }
        Ok(Self { omega, re, im })
    }

    /// Parses `omega,re_eps,im_eps` CSV text.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim().replace(' ', "") == TABLE_HEADER => {}
            Some((i, h)) => {
                return Err(Error::Parse { line: i + 1, msg: format!("expected header '{TABLE_HEADER}', got '{h}'") })
            }
            None => return Err(Error::Parse { line: 1, msg: "empty table".into() }),
        }
        let (mut w, mut re, mut im) = (Vec::new(), Vec::new(), Vec::new());
        for (i, l) in lines {
            let line = i + 1;
            let cols: Vec<&str> = l.split(',').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(Error::Parse { line, msg: format!("expected 3 columns, got {}", cols.len()) });
            }
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|_| Error::Parse { line, msg: format!("not a number: '{s}'") })
            };
            let (a, b, c) = (num(cols[0])?, num(cols[1])?, num(cols[2])?);
            if let Some(prev) = w.last() {
                if a <= *prev {
                    return Err(Error::Parse { line, msg: format!("omega {a} not strictly increasing") });
                }
            }
            w.push(a);
            re.push(b);
            im.push(c);
        }
        Self::new(w, re, im).map_err(|e| match e {
            Error::Domain(msg) => Error::Parse { line: 1, msg },
            other => other,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse { line: 0, msg: format!("{}: {e}", path.display()) })?;
        Self::from_csv_str(&text)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.omega[0], *self.omega.last().unwrap())
    }

    /// The same table with every frequency multiplied by `factor > 0`.
    pub fn with_omega_scale(&self, factor: f64) -> Result<Self> {
        Self::new(self.omega.iter().map(|w| w * factor).collect(), self.re.clone(), self.im.clone())
    }

    fn eval(&self, w: f64) -> Result<C64> {
        let (lo, hi) = self.range();
        if w < lo || w > hi {
            return Err(Error::Extrapolation { omega: w, lo, hi });
        }
        let k = match self.omega.partition_point(|x| *x <= w) {
            0 => 0,
            p => (p - 1).min(self.omega.len() - 2),
        };
        let (w0, w1) = (self.omega[k], self.omega[k + 1]);
        let t = (w - w0) / (w1 - w0);
        let re = self.re[k] + t * (self.re[k + 1] - self.re[k]);
        let (a, b) = (self.im[k], self.im[k + 1]);
        let im = if a > 0.0 && b > 0.0 { (a.ln() + t * (b.ln() - a.ln())).exp() } else { a + t * (b - a) };
        Ok(C64::new(re, im))
    }

    fn any_lossy(&self) -> bool {
        self.im.iter().any(|v| *v > 0.0)
    }
}

impl DielectricModel {
    /// Checks parameter signs (passivity, positive scales).
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Domain(msg));
        match self {
            Self::Vacuum | Self::Tabulated(_) => Ok(()),
            Self::Drude { sigma } if !(*sigma >= 0.0 && sigma.is_finite()) => bad(format!("sigma = {sigma}")),
            Self::Lorentz { eps_inf, omega_p, omega_0, gamma }
                if !(eps_inf.is_finite() && *omega_p >= 0.0 && *omega_0 >= 0.0 && *gamma >= 0.0) =>
            {
                bad("Lorentz parameters must be finite with omega_p, omega_0, gamma >= 0".into())
            }
            Self::Constant { re, im } if !(re.is_finite() && *im >= 0.0) => {
                bad(format!("constant eps = {re} + {im}i (Im must be >= 0)"))
            }
            _ => Ok(()),
        }
    }

    pub fn is_lossy(&self) -> bool {
        match self {
            Self::Vacuum => false,
            Self::Drude { sigma } => *sigma > 0.0,
            Self::Lorentz { omega_p, gamma, .. } => *gamma > 0.0 && *omega_p > 0.0,
            Self::Constant { im, .. } => *im > 0.0,
            Self::Tabulated(t) => t.any_lossy(),
        }
    }

    /// `eps(w)` at real `w` of either sign.
    pub fn epsilon(&self, w: f64) -> Result<C64> {
        if w < 0.0 {
            return self.epsilon(-w).map(|e| e.conj());
        }
        match self {
            Self::Vacuum => Ok(C64::new(1.0, 0.0)),
            Self::Drude { sigma } => {
                if w == 0.0 {
                    Err(Error::Domain("Drude eps is singular at omega = 0".into()))
                } else {
                    Ok(C64::new(1.0, 4.0 * PI * sigma / w))
                }
            }
            Self::Lorentz { eps_inf, omega_p, omega_0, gamma } => {
                let d = C64::new(omega_0 * omega_0 - w * w, -gamma * w);
                if d.norm() == 0.0 {
                    return Err(Error::Domain(format!("Lorentz pole at omega = {w}")));
                }
                Ok(C64::new(*eps_inf, 0.0) + omega_p * omega_p / d)
            }
            Self::Constant { re, im } => Ok(if w == 0.0 { C64::new(*re, 0.0) } else { C64::new(*re, *im) }),
            Self::Tabulated(t) => t.eval(w),
        }
    }

    /// `(eps(w) - 1) w`, finite at `w = 0` for every model (Drude gives
    /// `4 pi i sigma`).
    pub fn chi_omega(&self, w: f64) -> Result<C64> {
        match self {
            Self::Drude { sigma } => Ok(C64::new(0.0, 4.0 * PI * sigma)),
            _ if w == 0.0 => Ok(C64::new(0.0, 0.0)),
            _ => Ok((self.epsilon(w)? - 1.0) * w),
        }
    }

    /// `(eps - 1)/(eps + k)` evaluated as `chi w / (chi w + (1 + k) w)` so the
    /// Drude limit at `w = 0` is finite. Errors at the pole `eps = -k`.
    pub fn pole_ratio(&self, w: f64, k: f64) -> Result<C64> {
        let p = self.chi_omega(w)?;
        if p == C64::new(0.0, 0.0) {
            return Ok(p);
        }
        let d = p + (1.0 + k) * w;
        if d.norm() <= POLE_TOL * (p.norm() + (1.0 + k).abs() * w.abs()) {
            return Err(Error::Domain(format!("eps = -{k} pole at omega = {w}")));
        }
        Ok(p / d)
    }
}

/// Temperatures (k_B = 1) and rotation rate of a configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalState {
    pub t_object: f64,
    pub t_env: f64,
    pub omega: f64,
}

impl ThermalState {
    pub fn new(t_object: f64, t_env: f64, omega: f64) -> Result<Self> {
        for (name, v) in [("T_object", t_object), ("T_env", t_env), ("Omega", omega)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} = {v} must be finite and >= 0")));
            }
        }
        Ok(Self { t_object, t_env, omega })
    }
}

/// `n(w, T) = 1/(e^{w/T} - 1)`, extended to `w < 0` by `-1 - n(|w|)`; at
/// `T = 0` this is `-Theta(-w)`.
pub fn bose_occupation(w: f64, t: f64) -> Result<f64> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::Domain(format!("temperature {t}")));
    }
    if w == 0.0 {
        return if t == 0.0 {
            Err(Error::Domain("n(0, T=0) is undefined".into()))
        } else {
            Err(Error::Divergent("n(omega, T) diverges at omega = 0".into()))
        };
    }
    if t == 0.0 {
        return Ok(if w > 0.0 { 0.0 } else { -1.0 });
    }
    let pos = 1.0 / (w.abs() / t).exp_m1();
    Ok(if w > 0.0 { pos } else { -1.0 - pos })
}

/// Dipole polarizability `R^3 (eps - 1)/(eps + 2)`.
pub fn sphere_polarizability(model: &DielectricModel, r: f64, w: f64) -> Result<C64> {
    Ok(model.pole_ratio(w, 2.0)? * r.powi(3))
}
