//! Radiation of a rotating source absorbed by a static test body, to first
//! reflection.
//!
//! In 2D both bodies are disks and only the `m = n = 1` channels are kept;
//! in 3D both are spheres in the electric dipole channel `11E`. The test
//! body sits at `x = -d` in the frame of the source, which is the
//! orientation in which `H_m(w r1) e^{i m phi1} = sum_n H_{n-m}(w d) J_n(w r2) e^{i n phi2}`
//! holds. The source rotates counterclockwise about `+z`; `F_y` is reported
//! as the printed (nonnegative for lossy bodies) magnitude.

use crate::error::{Error, Result};
use crate::material::{sphere_polarizability, DielectricModel};
use crate::quadrature::{integrate, QuadOptions};
use crate::scattering::{disk_channel, sphere_smatrix_dipole};
use crate::specfun::{hankel, sph_bessel, HankelKind, SphKind, C64};
use serde::Serialize;
use std::f64::consts::PI;

/// Separations below this multiple of the larger radius are flagged.
pub const SEPARATION_WARNING: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoBodyConfig {
    pub d: f64,
    pub source: DielectricModel,
    pub r_source: f64,
    pub test: DielectricModel,
    pub r_test: f64,
}

impl TwoBodyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_source > 0.0 && self.r_test > 0.0) {
            return Err(Error::Domain(format!("radii must be positive ({}, {})", self.r_source, self.r_test)));
        }
        if !(self.d > self.r_source + self.r_test) || !self.d.is_finite() {
            return Err(Error::Domain(format!(
                "bodies overlap: d = {} <= R + a = {}",
                self.d,
                self.r_source + self.r_test
            )));
        }
        self.source.validate()?;
        self.test.validate()
    }

    pub fn with_separation(&self, d: f64) -> Self {
        Self { d, ..self.clone() }
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let r = self.r_source.max(self.r_test);
        if self.d < SEPARATION_WARNING * r {
            out.push(format!(
                "d = {} < {SEPARATION_WARNING} max(R, a): higher reflections are not negligible",
                self.d
            ));
        }
        out
    }
}

/// 3D coupling kernel `|U_{11E,11E}|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Kernel3d {
    /// `|h0(omega d)|^2` from the spherical Hankel function.
    Exact,
    /// `(omega d)^-2`.
    #[default]
    FarField,
}

/// `U_{n,m}(omega d) = H^(1)_{n-m}(omega d)`.
pub fn translation_2d(n: i64, m: i64, omega: f64, d: f64) -> Result<C64> {
    hankel(HankelKind::First, n - m, C64::new(omega * d, 0.0))
}

/// `(U_{11E,11E}, U_{10M,11E}) = (h0, sqrt(2) omega d/4 h0)`.
pub fn translation_3d(omega: f64, d: f64) -> Result<(C64, C64)> {
    let x = omega * d;
    let h0 = sph_bessel(SphKind::H1, 0, C64::new(x, 0.0))?;
    Ok((h0, h0 * (2f64.sqrt() * x / 4.0)))
}

fn check_rotation(omega_rot: f64) -> Result<()> {
    if !(omega_rot >= 0.0) || !omega_rot.is_finite() {
        return Err(Error::Domain(format!("rotation frequency {omega_rot} must be >= 0")));
    }
    Ok(())
}

fn over_window<F>(omega_rot: f64, quad: &QuadOptions, f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    check_rotation(omega_rot)?;
    if omega_rot == 0.0 {
        return Ok(0.0);
    }
    Ok(integrate(f, 0.0, omega_rot, quad)?.0)
}

/// `(|S_1|^2 - 1, 1 - |S'_1|^2)` of the rotating source disk and the static
/// test disk, from the cancellation-free flux factors.
fn disk_factors(cfg: &TwoBodyConfig, omega_rot: f64, w: f64) -> Result<(f64, f64)> {
    let s = disk_channel(&cfg.source, cfg.r_source, omega_rot, w, 1)?;
    let t = disk_channel(&cfg.test, cfg.r_test, 0.0, w, 1)?;
    Ok((-s.flux_factor, t.flux_factor))
}

/// `M = (hbar/8pi) int_0^Omega (|S_1|^2 - 1) |H0(omega d)|^2 (1 - |S'_1|^2)`.
pub fn torque_on_test_2d(cfg: &TwoBodyConfig, omega_rot: f64, quad: &QuadOptions) -> Result<f64> {
    cfg.validate()?;
    over_window(omega_rot, quad, |w| {
        let (gain, absorb) = disk_factors(cfg, omega_rot, w)?;
        let h = translation_2d(1, 1, w, cfg.d)?;
        Ok(gain * h.norm_sqr() * absorb / (8.0 * PI))
    })
}

/// Large-separation form `(hbar/4pi^2 d) int_0^Omega omega^-1 (|S_1|^2 - 1)(1 - |S'_1|^2)`.
pub fn torque_on_test_2d_asymptote(cfg: &TwoBodyConfig, omega_rot: f64, quad: &QuadOptions) -> Result<f64> {
    cfg.validate()?;
    over_window(omega_rot, quad, |w| {
        let (gain, absorb) = disk_factors(cfg, omega_rot, w)?;
        Ok(gain * absorb / (4.0 * PI * PI * cfg.d * w))
    })
}

/// Dipole terms of `S = 1 + i a alpha`, `a = 4 omega^3/3`, to first order in
/// the polarizability: `|S|^2 - 1 = -2 a Im alpha` and `1 - Re S = a Im alpha`.
/// The `a^2 |alpha|^2` term is dropped, as the amplitude itself is only
/// first order.
struct DipoleTerms {
    gain: f64,
    absorb: f64,
    one_minus_re: f64,
}

fn sphere_factors(cfg: &TwoBodyConfig, omega_rot: f64, w: f64) -> Result<DipoleTerms> {
    // validates the channel arguments
    sphere_smatrix_dipole(&cfg.source, cfg.r_source, omega_rot, w, 1)?;
    let a = 4.0 * w.powi(3) / 3.0;
    let a1 = sphere_polarizability(&cfg.source, cfg.r_source, w - omega_rot)?;
    let a2 = sphere_polarizability(&cfg.test, cfg.r_test, w)?;
    Ok(DipoleTerms {
        gain: -2.0 * a * a1.im,
        absorb: 2.0 * a * a2.im,
        one_minus_re: a * a2.im,
    })
}

/// `M = (hbar/8pi) int_0^Omega (|S_11E|^2 - 1) |U|^2 (1 - |S'_11E|^2)`.
pub fn torque_on_test_3d(cfg: &TwoBodyConfig, omega_rot: f64, kernel: Kernel3d, quad: &QuadOptions) -> Result<f64> {
    cfg.validate()?;
    over_window(omega_rot, quad, |w| {
        let f = sphere_factors(cfg, omega_rot, w)?;
        let k = match kernel {
            Kernel3d::Exact => translation_3d(w, cfg.d)?.0.norm_sqr(),
            Kernel3d::FarField => 1.0 / (w * cfg.d).powi(2),
        };
        Ok(f.gain * k * f.absorb / (8.0 * PI))
    })
}

fn im_alphas(cfg: &TwoBodyConfig, omega_rot: f64, w: f64) -> Result<(f64, f64)> {
    let a1 = sphere_polarizability(&cfg.source, cfg.r_source, w - omega_rot)?;
    let a2 = sphere_polarizability(&cfg.test, cfg.r_test, w)?;
    Ok((a1.im.abs(), a2.im))
}

/// Small-particle torque `(8 hbar/9 pi d^2) int_0^Omega omega^4 |Im a1(omega - Omega)| Im a2(omega)`.
pub fn torque_small_particle_3d(cfg: &TwoBodyConfig, omega_rot: f64, quad: &QuadOptions) -> Result<f64> {
    cfg.validate()?;
    let c = 8.0 / (9.0 * PI * cfg.d * cfg.d);
    over_window(omega_rot, quad, |w| {
        let (a1, a2) = im_alphas(cfg, omega_rot, w)?;
        Ok(c * w.powi(4) * a1 * a2)
    })
}

/// `F_y = (hbar/32 pi d) int_0^Omega (|S_11E|^2 - 1)(1 - Re S'_11E)`.
pub fn tangential_force_3d(cfg: &TwoBodyConfig, omega_rot: f64, quad: &QuadOptions) -> Result<f64> {
    cfg.validate()?;
    over_window(omega_rot, quad, |w| {
        let f = sphere_factors(cfg, omega_rot, w)?;
        Ok(f.gain * f.one_minus_re / (32.0 * PI * cfg.d))
    })
}

/// Small-particle force `(hbar/9 pi d) int_0^Omega omega^6 |Im a1(omega - Omega)| Im a2(omega)`.
pub fn tangential_force_small_particle_3d(cfg: &TwoBodyConfig, omega_rot: f64, quad: &QuadOptions) -> Result<f64> {
    cfg.validate()?;
    let c = 1.0 / (9.0 * PI * cfg.d);
    over_window(omega_rot, quad, |w| {
        let (a1, a2) = im_alphas(cfg, omega_rot, w)?;
        Ok(c * w.powi(6) * a1 * a2)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoBodyReport {
    pub d: f64,
    #[serde(rename = "M_transfer")]
    pub torque: f64,
    /// Only defined in 3D.
    #[serde(rename = "F_y")]
    pub force: Option<f64>,
    #[serde(rename = "regimeFlags")]
    pub regime_flags: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TwoBodyModel {
    Disk2d,
    Disk2dAsymptote,
    Sphere3d(Kernel3d),
    SmallParticle3d,
}

pub fn two_body_report(cfg: &TwoBodyConfig, omega_rot: f64, model: TwoBodyModel, quad: &QuadOptions) -> Result<TwoBodyReport> {
    let (torque, force) = match model {
        TwoBodyModel::Disk2d => (torque_on_test_2d(cfg, omega_rot, quad)?, None),
        TwoBodyModel::Disk2dAsymptote => (torque_on_test_2d_asymptote(cfg, omega_rot, quad)?, None),
        TwoBodyModel::Sphere3d(k) => {
            (torque_on_test_3d(cfg, omega_rot, k, quad)?, Some(tangential_force_3d(cfg, omega_rot, quad)?))
        }
        TwoBodyModel::SmallParticle3d => (
            torque_small_particle_3d(cfg, omega_rot, quad)?,
            Some(tangential_force_small_particle_3d(cfg, omega_rot, quad)?),
        ),
    };
    let mut regime_flags = cfg.warnings();
    if omega_rot * cfg.d < 1.0 && matches!(model, TwoBodyModel::Disk2dAsymptote | TwoBodyModel::Sphere3d(Kernel3d::FarField)) {
        regime_flags.push(format!("Omega d = {:.3e} < 1: far-field kernel outside its range", omega_rot * cfg.d));
    }
    Ok(TwoBodyReport { d: cfg.d, torque, force, regime_flags })
}

/// `d,M_transfer,F_y` rows for every separation.
pub fn sweep_csv(reports: &[TwoBodyReport]) -> String {
    let mut out = String::from("d,M_transfer,F_y\n");
    for r in reports {
        let f = r.force.map_or(String::new(), |f| format!("{f:e}"));
        out.push_str(&format!("{:e},{:e},{}\n", r.d, r.torque, f));
    }
    out
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::bessel_j;

    fn drude_pair(d: f64) -> TwoBodyConfig {
        TwoBodyConfig {
            d,
            source: DielectricModel::Drude { sigma: 1e3 },
            r_source: 0.1,
            test: DielectricModel::Drude { sigma: 5e2 },
            r_test: 0.05,
        }
    }

    #[test]
    fn addition_theorem_reconstruction() {
        let (w, d) = (1.3, 2.0);
        for &m in &[0i64, 1, -2] {
            for &(r2, p2) in &[(0.7, 0.9), (1.2, -2.1), (0.1, 3.0), (1.0, 0.0)] {
                // test center at (-d, 0) in the source frame
                let (x, y) = (-d + r2 * f64::cos(p2), r2 * f64::sin(p2));
                let (r1, p1) = (x.hypot(y), y.atan2(x));
                let lhs = hankel(HankelKind::First, m, C64::new(w * r1, 0.0)).unwrap() * C64::from_polar(1.0, m as f64 * p1);
                let mut rhs = C64::new(0.0, 0.0);
                for n in -40..=40 {
                    let j = bessel_j(n, C64::new(w * r2, 0.0)).unwrap();
                    rhs += translation_2d(n, m, w, d).unwrap() * j * C64::from_polar(1.0, n as f64 * p2);
                }
                assert!((lhs - rhs).norm() < 1e-6 * lhs.norm().max(1.0), "m={m} r2={r2}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn translation_examples() {
        let h0 = hankel(HankelKind::First, 0, C64::new(3.0, 0.0)).unwrap();
        assert_eq!(translation_2d(4, 4, 1.5, 2.0).unwrap(), h0);
        let x = 2e3;
        let mag = translation_2d(3, 1, x, 1.0).unwrap().norm();
        assert!((mag / (2.0 / (PI * x)).sqrt() - 1.0).abs() < 1e-3);
        let (u, v) = translation_3d(2.0, 3.0).unwrap();
        assert!((u.norm() - 1.0 / 6.0).abs() < 1e-14);
        assert!((v / u - C64::new(2f64.sqrt() * 1.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn lossless_and_static_cases() {
        let q = QuadOptions::default();
        let mut cfg = drude_pair(1.0);
        cfg.test = DielectricModel::Constant { re: 3.0, im: 0.0 };
        assert_eq!(torque_on_test_2d(&cfg, 1.0, &q).unwrap(), 0.0);
        assert!(torque_on_test_3d(&cfg, 1.0, Kernel3d::Exact, &q).unwrap().abs() < 1e-14);
        let cfg = drude_pair(1.0);
        assert_eq!(torque_on_test_2d(&cfg, 0.0, &q).unwrap(), 0.0);
        assert_eq!(tangential_force_3d(&cfg, 0.0, &q).unwrap(), 0.0);
        let mut vac = drude_pair(1.0);
        vac.test = DielectricModel::Vacuum;
        assert_eq!(tangential_force_3d(&vac, 1.0, &q).unwrap(), 0.0);
        assert!(matches!(torque_on_test_2d(&drude_pair(0.12), 1.0, &q), Err(Error::Domain(_))));
        assert_eq!(drude_pair(0.2).warnings().len(), 1);
        assert!(drude_pair(1.0).warnings().is_empty());
    }

    #[test]
    fn small_particle_moment_oracles() {
        let q = QuadOptions::default();
        let (s1, s2) = (1e3, 5e2);
        for &om in &[0.3f64, 1.0, 2.0] {
            for &d in &[1.0, 4.0] {
                let cfg = drude_pair(d);
                let a1 = 3.0 * cfg.r_source.powi(3) / (4.0 * PI * s1);
                let a2 = 3.0 * cfg.r_test.powi(3) / (4.0 * PI * s2);
                let m_exact = 8.0 / (9.0 * PI * d * d) * a1 * a2 * om.powi(7) / 42.0;
                let f_exact = 1.0 / (9.0 * PI * d) * a1 * a2 * om.powi(9) / 72.0;
                let m = torque_small_particle_3d(&cfg, om, &q).unwrap();
                let f = tangential_force_small_particle_3d(&cfg, om, &q).unwrap();
                // Im alpha = 3 w R^3/(4 pi sigma) holds up to O(w/sigma)
                assert!((m / m_exact - 1.0).abs() < 1e-2 * om, "{m} vs {m_exact}");
                assert!((f / f_exact - 1.0).abs() < 1e-2 * om, "{f} vs {f_exact}");
                // the S-matrix forms reduce to the polarizability forms
                let ms = torque_on_test_3d(&cfg, om, Kernel3d::FarField, &q).unwrap();
                let fs = tangential_force_3d(&cfg, om, &q).unwrap();
                assert!((ms / m - 1.0).abs() < 1e-9 && (fs / f - 1.0).abs() < 1e-9, "{ms}/{m}, {fs}/{f}");
            }
        }
    }

    #[test]
    fn separation_scaling() {
        let q = QuadOptions::default();
        let a = torque_on_test_3d(&drude_pair(1.0), 1.0, Kernel3d::FarField, &q).unwrap();
        let b = torque_on_test_3d(&drude_pair(2.0), 1.0, Kernel3d::FarField, &q).unwrap();
        assert!((b / a - 0.25).abs() < 1e-12);
        // |h0(x)| = 1/x, so both kernels agree
        let c = torque_on_test_3d(&drude_pair(2.0), 1.0, Kernel3d::Exact, &q).unwrap();
        assert!((c / b - 1.0).abs() < 1e-10);
        let f1 = tangential_force_3d(&drude_pair(1.0), 1.0, &q).unwrap();
        let f2 = tangential_force_3d(&drude_pair(2.0), 1.0, &q).unwrap();
        assert!((f2 / f1 - 0.5).abs() < 1e-12);
        assert!(a > 0.0 && f1 > 0.0);
    }

    #[test]
    fn two_dimensional_asymptote() {
        let q = QuadOptions::default();
        let cfg = TwoBodyConfig {
            d: 50.0,
            source: DielectricModel::Drude { sigma: 10.0 },
            r_source: 0.3,
            test: DielectricModel::Drude { sigma: 10.0 },
            r_test: 0.3,
        };
        let full = torque_on_test_2d(&cfg, 1.0, &q).unwrap();
        let asym = torque_on_test_2d_asymptote(&cfg, 1.0, &q).unwrap();
        assert!(full > 0.0);
        assert!((full / asym - 1.0).abs() < 0.1, "{full} vs {asym}");
    }

    #[test]
    fn report_and_csv() {
        let q = QuadOptions::default();
        let r = two_body_report(&drude_pair(0.2), 1.0, TwoBodyModel::SmallParticle3d, &q).unwrap();
        assert!(r.force.is_some() && !r.regime_flags.is_empty());
        let r2 = two_body_report(&drude_pair(1.0), 1.0, TwoBodyModel::Disk2d, &q).unwrap();
        let csv = sweep_csv(&[r, r2]);
        assert!(csv.starts_with("d,M_transfer,F_y\n"));
        assert!(csv.lines().nth(2).unwrap().ends_with(','));
        assert!((log_log_slope(&[1.0, 2.0, 4.0], &[3.0, 0.75, 0.1875]) + 2.0).abs() < 1e-12);
    }
}
