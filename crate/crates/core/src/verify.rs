//! Closed-form and property checks run by `spinrad verify` and by the
//! acceptance test target. Each check reports what it measured, the
//! tolerance it was held to, and its wall time.

use crate::error::Result;
use crate::material::{DielectricModel, ThermalState};
use crate::photonstats::{combined_mode_entropy, counting_distribution, cumulant, mode_entropy_rate};
use crate::quadrature::QuadOptions;
use crate::radiation::{integrate_power, Body, RadiationOptions};
use crate::rotor::{fokker_planck_stationary, simulate, FpGrid, LangevinConfig, TorqueLaw};
use crate::scattering::{
    disk_channel, disk_smatrix, disk_smatrix_smallvel, sphere_flux_factor, BlockFlux, ChannelTable, Extra,
    Polarization, Provenance, SphereFlux, TableChannel,
};
use crate::specfun::{wronskian_h1h2, C64};
use crate::testbody::{log_log_slope, torque_on_test_2d, torque_on_test_3d, Kernel3d, TwoBodyConfig};
use serde::Serialize;
use std::f64::consts::PI;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub measured: String,
    pub tolerance: String,
    pub seconds: f64,
    /// Runtime budget, part of the pass condition when set.
    pub budget: Option<f64>,
}

impl CheckResult {
    pub fn line(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        let budget = self.budget.map_or(String::new(), |b| format!(" (budget {b} s)"));
        format!(
            "[{status}] {:>2} {}: {} | tolerance {} | {:.3} s{budget}",
            self.id, self.name, self.measured, self.tolerance, self.seconds
        )
    }
}

fn timed<F>(id: u32, name: &str, budget: Option<f64>, f: F) -> CheckResult
where
    F: FnOnce() -> Result<(bool, String, String)>,
{
    let start = Instant::now();
    let out = f();
    let seconds = start.elapsed().as_secs_f64();
    let (ok, measured, tolerance) = match out {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}"), String::from("-")),
    };
    let pass = ok && budget.is_none_or(|b| seconds < b);
    CheckResult { id, name: name.to_string(), pass, measured, tolerance, seconds, budget }
}

fn within(ratio: f64, lo: f64, hi: f64) -> bool {
    ratio >= lo && ratio <= hi
}

/// Drude sphere, `sigma/Omega = 10^3`: `P` and `M` against
/// `R^3 Omega^6/(30 pi^2 sigma)` and `R^3 Omega^5/(20 pi^2 sigma)`.
pub fn check_sphere_closed_form() -> CheckResult {
    timed(1, "Drude sphere P, M closed forms", Some(1.0), || {
        let (sigma, r, om) = (1e3, 0.01, 1.0);
        let body = Body::Sphere { model: DielectricModel::Drude { sigma }, r, flux: SphereFlux::Leading };
        let res = integrate_power(&body, &ThermalState::new(0.0, 0.0, om)?, &RadiationOptions::default())?;
        let rp = res.power / (r.powi(3) * om.powi(6) / (30.0 * PI * PI * sigma));
        let rm = res.torque / (r.powi(3) * om.powi(5) / (20.0 * PI * PI * sigma));
        Ok((within(rp, 0.98, 1.02) && within(rm, 0.98, 1.02), format!("P ratio {rp:.6}, M ratio {rm:.6}"), "[0.98, 1.02]".into()))
    })
}

fn drude_cylinder(sigma: f64, r: f64, length: f64) -> Body {
    Body::Cylinder { model: DielectricModel::Drude { sigma }, r, length, flux: BlockFlux::Truncated }
}

/// Drude cylinder, `Omega << sigma`: `L R^2 Omega^6/(90 pi^2 sigma)` and
/// `L R^2 Omega^5/(60 pi^2 sigma)`.
pub fn check_cylinder_good_conductor() -> CheckResult {
    timed(2, "Drude cylinder, Omega << sigma", Some(5.0), || {
        let (sigma, r, l, om) = (1e3, 0.01, 1.0, 1.0);
        let opts = RadiationOptions { quad: QuadOptions { rel_tol: 1e-8, ..Default::default() }, ..Default::default() };
        let res = integrate_power(&drude_cylinder(sigma, r, l), &ThermalState::new(0.0, 0.0, om)?, &opts)?;
        let rp = res.power / (l * r * r * om.powi(6) / (90.0 * PI * PI * sigma));
        let rm = res.torque / (l * r * r * om.powi(5) / (60.0 * PI * PI * sigma));
        let ok = (rp - 1.0).abs() <= 0.02 && (rm - 1.0).abs() <= 0.02;
        Ok((ok, format!("P ratio {rp:.6}, M ratio {rm:.6}"), "2%".into()))
    })
}

/// `(4/3) L R^2 Omega^4 sigma [ln(Omega/(2 pi sigma)) - 25/12]`, the
/// `sigma << Omega` limit of the truncated cylinder integral.
pub fn cylinder_poor_conductor_integral(sigma: f64, r: f64, length: f64, om: f64) -> f64 {
    4.0 / 3.0 * length * r * r * om.powi(4) * sigma * ((om / (2.0 * PI * sigma)).ln() - 25.0 / 12.0)
}

/// Drude cylinder, `sigma/Omega = 10^-3`, against the leading-log
/// `8 L R^2 Omega^4 sigma ln(Omega/sigma)`.
pub fn check_cylinder_poor_conductor() -> CheckResult {
    timed(3, "Drude cylinder, sigma << Omega (leading log)", None, || {
        let (sigma, r, l, om) = (1e-3, 0.01, 1.0, 1.0);
        let opts = RadiationOptions { quad: QuadOptions { rel_tol: 1e-8, ..Default::default() }, ..Default::default() };
        let res = integrate_power(&drude_cylinder(sigma, r, l), &ThermalState::new(0.0, 0.0, om)?, &opts)?;
        let printed = 8.0 * l * r * r * om.powi(4) * sigma * (om / sigma).ln();
        let ratio = res.power / printed;
        let integral = res.power / cylinder_poor_conductor_integral(sigma, r, l, om);
        Ok((
            (ratio - 1.0).abs() <= 0.1,
            format!("P ratio {ratio:.4} (vs analytic integral of the same model: {integral:.4})"),
            "10%".into(),
        ))
    })
}

/// Exact disk `|S_1|^2 - 1` against the small-velocity form at `Omega R = 0.01`.
pub fn check_disk_small_velocity() -> CheckResult {
    timed(4, "disk exact vs small-velocity S-matrix", None, || {
        let (model, r, om) = (DielectricModel::Drude { sigma: 1.0 }, 0.01, 1.0);
        let mut worst = 0.0f64;
        for i in 1..200 {
            let w = om * i as f64 / 200.0;
            let exact = -disk_channel(&model, r, om, w, 1)?.flux_factor;
            let approx = disk_smatrix_smallvel(&model, r, om, w)?.value;
            worst = worst.max(((exact - approx) / approx).abs());
        }
        Ok((worst <= 0.05, format!("max relative difference {worst:.3e}"), "5%".into()))
    })
}

fn disk_table(model: &DielectricModel, r: f64, om: f64) -> Result<ChannelTable> {
    let omega: Vec<f64> = (1..=400).map(|i| 2.5 * om * i as f64 / 400.0).collect();
    let channels = (1..=2)
        .map(|m| {
            let s = omega.iter().map(|w| disk_smatrix(model, r, om, *w, m)).collect::<Result<Vec<C64>>>()?;
            Ok(TableChannel { m, extra: Extra::None, pol: Polarization::Scalar, omega: omega.clone(), s })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChannelTable { geometry: "disk".into(), provenance: Provenance::Computed, channels })
}

/// `|Q - (Omega M - P)|/|P|` for every geometry.
pub fn check_bookkeeping() -> CheckResult {
    timed(5, "energy bookkeeping Q = Omega M - P", None, || {
        let drude = DielectricModel::Drude { sigma: 1.0 };
        let om = 1.0;
        let cases: Vec<(&str, Body, ThermalState)> = vec![
            ("disk T=0", Body::Disk { model: drude.clone(), r: 0.1 }, ThermalState::new(0.0, 0.0, om)?),
            ("disk T>0", Body::Disk { model: drude.clone(), r: 0.1 }, ThermalState::new(0.3, 0.1, om)?),
            (
                "sphere",
                Body::Sphere { model: DielectricModel::Drude { sigma: 50.0 }, r: 0.05, flux: SphereFlux::Exact },
                ThermalState::new(0.2, 0.0, om)?,
            ),
            ("cylinder", drude_cylinder(10.0, 0.05, 2.0), ThermalState::new(0.0, 0.0, om)?),
            ("table", Body::Table(disk_table(&drude, 0.1, om)?), ThermalState::new(0.0, 0.0, om)?),
        ];
        let mut worst = 0.0f64;
        let mut parts = Vec::new();
        for (name, body, state) in cases {
            let res = integrate_power(&body, &state, &RadiationOptions::default())
                .map_err(|e| crate::error::Error::Convergence(format!("{name}: {e}")))?;
            let rel = (res.bookkeeping_residual(om) / res.power).abs();
            worst = worst.max(rel);
            parts.push(format!("{name} {rel:.1e}"));
        }
        Ok((worst < 1e-6, parts.join(", "), "1e-6".into()))
    })
}

/// Static bodies with `T_obj = T_env` radiate nothing.
pub fn check_equilibrium_null() -> CheckResult {
    timed(6, "equilibrium null", None, || {
        let drude = DielectricModel::Drude { sigma: 1.0 };
        let bodies = [
            Body::Disk { model: drude.clone(), r: 0.5 },
            Body::Sphere { model: drude.clone(), r: 0.2, flux: SphereFlux::Exact },
            drude_cylinder(1.0, 0.2, 1.0),
        ];
        let mut worst = 0.0f64;
        for b in &bodies {
            let res = integrate_power(b, &ThermalState::new(0.7, 0.7, 0.0)?, &RadiationOptions::default())?;
            worst = worst.max(res.power.abs());
        }
        Ok((worst < 1e-12, format!("max |P| = {worst:e}"), "1e-12".into()))
    })
}

/// `p`-th Taylor coefficient of `F(eta) = -ln(1 - eta N)` times `p!`, from
/// a `K`-point trapezoidal Cauchy integral on `|eta| = 0.5/N`.
pub fn cumulant_by_contour(n: f64, p: u32) -> f64 {
    const K: usize = 64;
    let radius = 0.5 / n;
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..K {
        let th = 2.0 * PI * k as f64 / K as f64;
        let eta = C64::from_polar(radius, th);
        let f = -(C64::new(1.0, 0.0) - eta * n).ln();
        acc += f * C64::from_polar(1.0, -(p as f64) * th);
    }
    let coeff = acc.re / (K as f64 * radius.powi(p as i32));
    (1..=p).map(f64::from).product::<f64>() * coeff
}

pub fn check_photon_statistics() -> CheckResult {
    timed(7, "photon statistics identities", Some(0.1), || {
        let mut worst = 0.0f64;
        for &n in &[1e-2, 1.0, 10.0] {
            let d = counting_distribution(n, 2_000);
            let total: f64 = d.p.iter().sum::<f64>() + d.tail;
            let rel = |a: f64, b: f64| ((a - b) / b).abs();
            worst = worst.max((total - 1.0).abs());
            worst = worst.max(rel(d.mean(), n));
            worst = worst.max(rel(d.variance(), n * (n + 1.0)));
            for p in 1..=8 {
                worst = worst.max(rel(cumulant(n, p)?, cumulant_by_contour(n, p)));
            }
        }
        Ok((worst <= 1e-8, format!("max relative deviation {worst:.2e}"), "1e-8".into()))
    })
}

pub fn check_entropy() -> CheckResult {
    timed(8, "entropy positivity and Shannon oracle", None, || {
        let mut min_combined = f64::INFINITY;
        for i in 0..=40 {
            let r = if i == 0 { 1e-6 } else { i as f64 / 40.0 };
            for j in 0..=80 {
                let x = 1e-3 * 10f64.powf(j as f64 * 4.7 / 80.0);
                min_combined = min_combined.min(combined_mode_entropy(r, x));
            }
        }
        let mut worst = 0.0f64;
        for &n in &[1e-6f64, 1e-3, 0.1, 1.0, 3.0, 10.0] {
            let (lq, l1) = ((n / (n + 1.0)).ln(), (n + 1.0).ln());
            let mut shannon = 0.0;
            for k in 0..200_000u32 {
                let lp = k as f64 * lq - l1;
                let p = lp.exp();
                if p == 0.0 {
                    break;
                }
                shannon -= p * lp;
            }
            worst = worst.max((shannon - mode_entropy_rate(n)).abs());
        }
        Ok((
            min_combined >= 0.0 && worst <= 1e-8,
            format!("min combined entropy {min_combined:.3e}, Shannon deviation {worst:.2e}"),
            ">= 0, 1e-8".into(),
        ))
    })
}

/// Parameters of the driven-rotor checks: `hbar = 1`, `M = M2 = Omega^5`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorCheckSetup {
    pub inertia: f64,
    pub omega0: f64,
    pub dt: f64,
    pub steps: usize,
    pub n_traj: usize,
    pub seed: u64,
}

impl Default for RotorCheckSetup {
    fn default() -> Self {
        Self { inertia: 1000.0, omega0: 1.0, dt: 0.5, steps: 4000, n_traj: 10_000, seed: 2024 }
    }
}

/// Runs the driven ensemble once and evaluates criteria 9 and 10.
pub fn check_rotor(setup: &RotorCheckSetup) -> [CheckResult; 2] {
    let law = TorqueLaw::power(1.0, 5.0);
    let start = Instant::now();
    let cfg = LangevinConfig {
        inertia: setup.inertia,
        hbar: 1.0,
        dt: setup.dt,
        steps: setup.steps,
        n_traj: setup.n_traj,
        omega_init: setup.omega0,
        drive: Some(setup.omega0),
        seed: setup.seed,
        ..Default::default()
    };
    let ens = simulate(&cfg, &law);
    let sim_time = start.elapsed().as_secs_f64();
    let c9 = timed(9, "rotor I Delta Omega vs sqrt(hbar I Omega0/5)", Some(60.0), || {
        let ens = ens.as_ref().map_err(Clone::clone)?;
        let mc = setup.inertia * ens.variance().sqrt();
        let analytic = (setup.inertia * setup.omega0 / 5.0).sqrt();
        let rel = mc / analytic - 1.0;
        Ok((rel.abs() <= 0.05, format!("I dOmega = {mc:.4} vs {analytic:.4} ({:+.2}%)", 100.0 * rel), "5%".into()))
    });
    let c9 = CheckResult { seconds: c9.seconds + sim_time, pass: c9.pass && sim_time < 60.0, ..c9 };
    let c10 = timed(10, "Fokker-Planck density vs ensemble (KS)", None, || {
        let ens = ens.as_ref().map_err(Clone::clone)?;
        let grid = FpGrid::around(&law, setup.omega0, setup.inertia, 1.0, 12.0, 2001)?;
        let density = fokker_planck_stationary(&law, setup.omega0, setup.inertia, 1.0, &grid)?;
        let ks = ens.ks_distance(|w| density.cdf_at(w));
        let bound = 3.0 / (setup.n_traj as f64).sqrt();
        Ok((ks < bound, format!("KS distance {ks:.4}"), format!("< {bound:.4}")))
    });
    [c9, c10]
}

/// Separation exponents of the transferred torque and the lossless null.
pub fn check_two_body() -> CheckResult {
    timed(11, "two-body separation scaling", None, || {
        let q = QuadOptions::default();
        let drude = |sigma| DielectricModel::Drude { sigma };
        let disks = TwoBodyConfig { d: 1.0, source: drude(10.0), r_source: 0.3, test: drude(10.0), r_test: 0.3 };
        let spheres = TwoBodyConfig { d: 1.0, source: drude(1e3), r_source: 0.1, test: drude(5e2), r_test: 0.05 };
        let om = 1.0;
        let d0_2d = 200.0;
        let d0_3d = 1.0;
        let ds: Vec<f64> = (0..=10).map(|i| 10f64.powf(i as f64 / 10.0)).collect();
        let t2: Vec<f64> =
            ds.iter().map(|s| torque_on_test_2d(&disks.with_separation(d0_2d * s), om, &q)).collect::<Result<_>>()?;
        let t3: Vec<f64> = ds
            .iter()
            .map(|s| torque_on_test_3d(&spheres.with_separation(d0_3d * s), om, Kernel3d::Exact, &q))
            .collect::<Result<_>>()?;
        let s2 = log_log_slope(&ds, &t2);
        let s3 = log_log_slope(&ds, &t3);
        let lossless = DielectricModel::Constant { re: 3.0, im: 0.0 };
        let n2 = torque_on_test_2d(&TwoBodyConfig { test: lossless.clone(), ..disks.with_separation(5.0) }, om, &q)?;
        let n3 = torque_on_test_3d(&TwoBodyConfig { test: lossless, ..spheres }, om, Kernel3d::Exact, &q)?;
        let ok = (s2 + 1.0).abs() < 0.02 && (s3 / -2.0 - 1.0).abs() < 0.02 && n2.abs() < 1e-14 && n3.abs() < 1e-14;
        Ok((
            ok,
            format!("2D slope {s2:.4} (Omega d in [{d0_2d}, {}]), 3D slope {s3:.4}, lossless {:.1e}", 10.0 * d0_2d, n2.abs().max(n3.abs())),
            "2%, 1e-14".into(),
        ))
    })
}

/// Unitarity of lossless channels, the superradiant sign rule, and the
/// Wronskian identity.
pub fn check_superradiance() -> CheckResult {
    timed(12, "superradiance and unitarity", None, || {
        let om = 1.0;
        let lossless = DielectricModel::Constant { re: 3.0, im: 0.0 };
        let lossy = DielectricModel::Drude { sigma: 1.0 };
        let mut unitarity = 0.0f64;
        let mut sign_failures = 0usize;
        let mut points = 0usize;
        for i in 1..=60 {
            let w = 3.0 * i as f64 / 61.0;
            for m in -3..=3i64 {
                let s = disk_smatrix(&lossless, 0.5, om, w, m)?;
                unitarity = unitarity.max((s.norm() - 1.0).abs());
                let wp = w - om * m as f64;
                if wp.abs() < 1e-9 {
                    continue;
                }
                let f = disk_channel(&lossy, 0.5, om, w, m)?.flux_factor;
                points += 1;
                if f.signum() != wp.signum() {
                    sign_failures += 1;
                }
                if (-1..=1).contains(&m) {
                    let g = sphere_flux_factor(&lossy, 0.2, om, w, m, SphereFlux::Leading)?;
                    points += 1;
                    if g.signum() != wp.signum() {
                        sign_failures += 1;
                    }
                }
            }
        }
        let mut wronskian = 0.0f64;
        for m in 0..=50 {
            for &x in &[0.01, 0.1, 1.0, 10.0, 100.0] {
                let exact = C64::new(0.0, -4.0 / (PI * x));
                wronskian = wronskian.max(((wronskian_h1h2(m, x)? - exact) / exact).norm());
            }
        }
        let ok = unitarity < 1e-10 && sign_failures == 0 && wronskian < 1e-10;
        Ok((
            ok,
            format!(
                "max ||S|-1| {unitarity:.1e}, sign failures {sign_failures}/{points}, Wronskian {wronskian:.1e}"
            ),
            "1e-10, 0, 1e-10".into(),
        ))
    })
}

/// All twelve checks in order.
pub fn run_all(rotor: &RotorCheckSetup) -> Vec<CheckResult> {
    let mut out = vec![
        check_sphere_closed_form(),
        check_cylinder_good_conductor(),
        check_cylinder_poor_conductor(),
        check_disk_small_velocity(),
        check_bookkeeping(),
        check_equilibrium_null(),
        check_photon_statistics(),
        check_entropy(),
    ];
    out.extend(check_rotor(rotor));
    out.push(check_two_body());
    out.push(check_superradiance());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contour_oracle_recovers_known_coefficients() {
        // kappa_p = (p-1)! N^p
        assert!((cumulant_by_contour(2.0, 3) - 16.0).abs() < 1e-10);
        assert!((cumulant_by_contour(0.1, 1) - 0.1).abs() < 1e-14);
    }

    #[test]
    fn poor_conductor_cylinder_matches_its_integral() {
        let opts = RadiationOptions { quad: QuadOptions { rel_tol: 1e-8, ..Default::default() }, ..Default::default() };
        for &sigma in &[1e-3, 1e-4] {
            let body = drude_cylinder(sigma, 0.01, 1.0);
            let p = integrate_power(&body, &ThermalState::new(0.0, 0.0, 1.0).unwrap(), &opts).unwrap().power;
            let ratio = p / cylinder_poor_conductor_integral(sigma, 0.01, 1.0, 1.0);
            assert!((ratio - 1.0).abs() < 20.0 * sigma, "sigma = {sigma}: {ratio}");
        }
    }

    #[test]
    fn result_line_format() {
        let r = timed(3, "x", Some(1.0), || Ok((true, "m".into(), "t".into())));
        assert!(r.line().starts_with("[PASS]  3 x: m | tolerance t |"));
        let r = timed(4, "y", None, || Err(crate::error::Error::Range("bad".into())));
        assert!(!r.pass && r.line().contains("error: range error: bad"));
    }
}
