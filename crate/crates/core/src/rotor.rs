//! Stochastic spin-down driven by the radiated angular momentum.
//!
//! The drift `M(Omega) = sum int d omega/2pi m N` and the diffusion strength
//! `M2(Omega) = sum int d omega/2pi m^2 N (N + 1)` (torque and torque variance
//! in units of `hbar`, `hbar^2`) enter the Langevin equation
//!
//! ```text
//! I dOmega = -hbar (M(Omega) - M_drive) dt + hbar sqrt(c M2(Omega)) dW
//! ```
//!
//! integrated with Euler-Maruyama in the Ito sense and reflected at zero.
//! With `c = 2` ([`NoiseConvention::FokkerPlanck`], the default) the
//! ensemble relaxes to the stationary solution of
//! `dP/dt + d/dOmega[(hbar/I)(M - M_drive) P + (hbar/I)^2 d/dOmega(M2 P)] = 0`.
//! With `c = 1` ([`NoiseConvention::PhotonCount`]) the angular-momentum
//! variance grows as `hbar^2 M2 t`, the photon-counting estimate.

use crate::error::{Error, Result};
use crate::material::ThermalState;
use crate::photonstats::channel_density_with;
use crate::quadrature::{integrate, integrate_vec, QuadOptions};
use crate::radiation::{integrate_power, segments, Body, RadiationOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// `dt (hbar/I) dM/dOmega` must stay below this.
pub const STIFFNESS_LIMIT: f64 = 0.1;
/// `|dOmega/dt| / Omega^2` above this is reported as non-adiabatic.
pub const ADIABATIC_LIMIT: f64 = 0.1;
const MAX_LAW_NODES: usize = 20_000;

/// Drift and diffusion coefficients on a `ln Omega` grid, interpolated with
/// local cubics in `ln Omega` (and in `ln M` where the values are positive).
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedLaw {
    omega: Vec<f64>,
    drift: Vec<f64>,
    diffusion: Vec<f64>,
    at_zero: [f64; 2],
    log_values: [bool; 2],
}

impl TabulatedLaw {
    pub fn nodes(&self) -> &[f64] {
        &self.omega
    }

    pub fn range(&self) -> (f64, f64) {
        (self.omega[0], *self.omega.last().expect("law grid is never empty"))
    }

    fn column(&self, which: usize) -> &[f64] {
        if which == 0 {
            &self.drift
        } else {
            &self.diffusion
        }
    }

    fn eval(&self, which: usize, w: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if w < 0.0 || w > hi * (1.0 + 1e-12) || w.is_nan() {
            return Err(Error::Extrapolation { omega: w, lo: 0.0, hi });
        }
        let vals = self.column(which);
        let log = self.log_values[which];
        if w < lo {
            let v0 = self.at_zero[which];
            if w == 0.0 {
                return Ok(v0);
            }
            if log && v0 == 0.0 {
                let k = (vals[1] / vals[0]).ln() / (self.omega[1] / self.omega[0]).ln();
                return Ok(vals[0] * (w / lo).powf(k));
            }
            return Ok(v0 + (vals[0] - v0) * w / lo);
        }
        let x = w.min(hi).ln();
        let n = self.omega.len();
        let i = self.omega.partition_point(|o| *o <= w).clamp(1, n - 1) - 1;
        let start = i.saturating_sub(1).min(n.saturating_sub(4));
        let idx: Vec<usize> = (start..(start + 4).min(n)).collect();
        let mut acc = 0.0;
        for &a in &idx {
            let xa = self.omega[a].ln();
            let mut l = 1.0;
            for &b in &idx {
                if a != b {
                    let xb = self.omega[b].ln();
                    l *= (x - xb) / (xa - xb);
                }
            }
            acc += l * if log { vals[a].ln() } else { vals[a] };
        }
        Ok(if log { acc.exp() } else { acc })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LawProvenance {
    PowerLaw,
    Radiation,
}

/// `M(Omega)` and `M2(Omega)` for `Omega >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum TorqueLaw {
    /// `M = c_drift Omega^k_drift`, `M2 = c_diff Omega^k_diff`.
    PowerLaw { c_drift: f64, k_drift: f64, c_diff: f64, k_diff: f64 },
    Tabulated(TabulatedLaw),
}

impl TorqueLaw {
    /// `M = M2 = c Omega^k`.
    pub fn power(c: f64, k: f64) -> Self {
        Self::PowerLaw { c_drift: c, k_drift: k, c_diff: c, k_diff: k }
    }

    pub fn zero() -> Self {
        Self::PowerLaw { c_drift: 0.0, k_drift: 1.0, c_diff: 0.0, k_diff: 1.0 }
    }

    pub fn provenance(&self) -> LawProvenance {
        match self {
            Self::PowerLaw { .. } => LawProvenance::PowerLaw,
            Self::Tabulated(_) => LawProvenance::Radiation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Self::PowerLaw { c_drift, k_drift, c_diff, k_diff } = *self {
            let ok = c_drift >= 0.0 && c_diff >= 0.0 && k_drift > 0.0 && k_diff >= 0.0;
            if !ok || ![c_drift, k_drift, c_diff, k_diff].iter().all(|v| v.is_finite()) {
                return Err(Error::Domain(format!(
                    "power law needs c >= 0, drift exponent > 0 and diffusion exponent >= 0; got \
                     c_drift={c_drift}, k_drift={k_drift}, c_diff={c_diff}, k_diff={k_diff}"
                )));
            }
        }
        Ok(())
    }

    pub fn drift(&self, w: f64) -> Result<f64> {
        match self {
            Self::PowerLaw { c_drift, k_drift, .. } => power_term(*c_drift, *k_drift, w),
            Self::Tabulated(t) => t.eval(0, w),
        }
    }

    pub fn diffusion(&self, w: f64) -> Result<f64> {
        match self {
            Self::PowerLaw { c_diff, k_diff, .. } => power_term(*c_diff, *k_diff, w),
            Self::Tabulated(t) => t.eval(1, w),
        }
    }

    /// `dM/dOmega` by a Richardson-extrapolated central difference, halving
    /// the step until two successive estimates agree.
    pub fn drift_derivative(&self, w: f64) -> Result<f64> {
        if !(w > 0.0) {
            return Err(Error::Domain(format!("drift derivative needs Omega > 0, got {w}")));
        }
        let d = |h: f64| -> Result<f64> { Ok((self.drift(w + h)? - self.drift(w - h)?) / (2.0 * h)) };
        let mut h = 0.05 * w;
        let mut prev = {
            let (a, b) = (d(h)?, d(0.5 * h)?);
            (4.0 * b - a) / 3.0
        };
        for _ in 0..12 {
            h *= 0.5;
            let (a, b) = (d(h)?, d(0.5 * h)?);
            let next = (4.0 * b - a) / 3.0;
            if (next - prev).abs() <= 1e-9 * next.abs().max(f64::MIN_POSITIVE) {
                return Ok(next);
            }
            prev = next;
        }
        Ok(prev)
    }
}

fn power_term(c: f64, k: f64, w: f64) -> Result<f64> {
    if w < 0.0 || w.is_nan() {
        return Err(Error::Domain(format!("torque law evaluated at Omega = {w}")));
    }
    if c == 0.0 {
        return Ok(0.0);
    }
    Ok(if w == 0.0 && k == 0.0 { c } else { c * w.powf(k) })
}

/// `(M, M2)` of a body rotating at `state.omega` and emitting into a cold
/// environment. `M` comes from [`integrate_power`]; `M2` sums the same
/// channels.
pub fn angular_moments(body: &Body, state: &ThermalState, opts: &RadiationOptions) -> Result<(f64, f64)> {
    let emit = ThermalState { t_env: 0.0, ..*state };
    if emit.omega == 0.0 && emit.t_object == 0.0 {
        return Ok((0.0, 0.0));
    }
    let res = integrate_power(body, &emit, opts)?;
    let keys = body.channels(res.m_max, &emit);
    let m2: Vec<f64> = keys
        .par_iter()
        .map(|k| {
            let mf = k.m as f64;
            let mut acc = 0.0;
            for (a, b) in segments(body, k, &emit) {
                let (v, _) = integrate(
                    |w| {
                        let (_, nn) = channel_density_with(body, &emit, k, w, &opts.quad, |n| n * (n + 1.0))?;
                        Ok(mf * mf * nn / (2.0 * PI))
                    },
                    a,
                    b,
                    &opts.quad,
                )?;
                acc += v;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((res.torque, m2.iter().sum()))
}

/// Tabulates `(M, M2)` from the radiation of `body` over `[lo, hi]`,
/// refining the `ln Omega` grid until every interval midpoint is reproduced
/// by the interpolant to `rel_tol`. Temperatures are taken from `state`.
pub fn torque_law_from_radiation(
    body: &Body,
    state: &ThermalState,
    lo: f64,
    hi: f64,
    rel_tol: f64,
    opts: &RadiationOptions,
) -> Result<TorqueLaw> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Domain(format!("torque-law range [{lo}, {hi}] needs 0 < lo < hi")));
    }
    let eval = |w: f64| angular_moments(body, &ThermalState { omega: w, ..*state }, opts);
    let at_zero = {
        let (a, b) = eval(0.0)?;
        [a, b]
    };
    let n0 = ((hi / lo).log10() * 8.0).ceil().max(8.0) as usize + 1;
    let mut omega: Vec<f64> = (0..n0).map(|i| lo * (hi / lo).powf(i as f64 / (n0 - 1) as f64)).collect();
    *omega.last_mut().unwrap() = hi;
    let vals = omega.par_iter().map(|w| eval(*w)).collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<(f64, f64, f64)> = omega.iter().zip(&vals).map(|(w, v)| (*w, v.0, v.1)).collect();
    // intervals (by left node) still to be checked
    let mut open: Vec<f64> = omega[..omega.len() - 1].to_vec();
    loop {
        let table = build_table(&rows, at_zero);
        if open.is_empty() {
            return Ok(TorqueLaw::Tabulated(table));
        }
        if rows.len() + open.len() > MAX_LAW_NODES {
            return Err(Error::Convergence(format!(
                "torque-law grid exceeded {MAX_LAW_NODES} nodes before reaching {rel_tol:e}"
            )));
        }
        let mids: Vec<(f64, f64)> = open
            .iter()
            .map(|a| {
                let i = rows.partition_point(|r| r.0 < *a);
                (rows[i].0, (rows[i].0 * rows[i + 1].0).sqrt())
            })
            .collect();
        let exact = mids.par_iter().map(|(_, m)| eval(*m)).collect::<Result<Vec<_>>>()?;
        let mut next = Vec::new();
        for ((left, mid), (d, q)) in mids.iter().zip(&exact) {
            let ok = [(0, *d), (1, *q)].iter().all(|(which, v)| {
                let approx = table.eval(*which, *mid).unwrap_or(f64::NAN);
                let scale = table.column(*which).iter().fold(0.0f64, |s, x| s.max(x.abs()));
                (approx - v).abs() <= rel_tol * v.abs().max(1e-12 * scale)
            });
            if !ok {
                next.push(*left);
                next.push(*mid);
            }
            rows.push((*mid, *d, *q));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        open = next;
    }
}

fn build_table(rows: &[(f64, f64, f64)], at_zero: [f64; 2]) -> TabulatedLaw {
    let drift: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let diffusion: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let log_values = [drift.iter().all(|v| *v > 0.0), diffusion.iter().all(|v| *v > 0.0)];
    TabulatedLaw { omega: rows.iter().map(|r| r.0).collect(), drift, diffusion, at_zero, log_values }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum NoiseConvention {
    /// Increment variance `2 (hbar/I)^2 M2 dt`, consistent with the
    /// Fokker-Planck operator and its stationary solution.
    #[default]
    FokkerPlanck,
    /// Increment variance `(hbar/I)^2 M2 dt`, i.e. `Var(I Omega) = hbar^2 M2 t`.
    PhotonCount,
}

impl NoiseConvention {
    fn factor(self) -> f64 {
        match self {
            Self::FokkerPlanck => 2.0,
            Self::PhotonCount => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LangevinConfig {
    pub inertia: f64,
    pub hbar: f64,
    pub dt: f64,
    pub steps: usize,
    pub n_traj: usize,
    pub omega_init: f64,
    /// Set-point `Omega_0` of a constant external torque `hbar M(Omega_0)`.
    pub drive: Option<f64>,
    pub seed: u64,
    /// Store all trajectories every this many steps; 0 keeps only the end.
    pub record_every: usize,
    pub convention: NoiseConvention,
}

impl Default for LangevinConfig {
    fn default() -> Self {
        Self {
            inertia: 1.0,
            hbar: 1.0,
            dt: 1e-2,
            steps: 1000,
            n_traj: 1000,
            omega_init: 1.0,
            drive: None,
            seed: 0,
            record_every: 0,
            convention: NoiseConvention::FokkerPlanck,
        }
    }
}

/// `|dOmega/dt| / Omega^2` of the mean motion.
pub fn adiabaticity(law: &TorqueLaw, w: f64, inertia: f64, hbar: f64, drive_torque: f64) -> Result<f64> {
    if !(w > 0.0) {
        return Ok(0.0);
    }
    Ok(hbar / inertia * (law.drift(w)? - drive_torque).abs() / (w * w))
}

/// An ensemble of independent rotors. Trajectory `j` draws from the ChaCha8
/// stream `j` of the ensemble seed, so results do not depend on scheduling.
#[derive(Debug, Clone)]
pub struct RotorEnsemble {
    pub inertia: f64,
    pub hbar: f64,
    pub dt: f64,
    pub time: f64,
    pub seed: u64,
    pub convention: NoiseConvention,
    /// Constant external torque in units of `hbar`.
    pub drive_torque: f64,
    pub omega: Vec<f64>,
    /// `(t, Omega of every trajectory)` snapshots.
    pub records: Vec<(f64, Vec<f64>)>,
    pub max_adiabaticity: f64,
    rngs: Vec<ChaCha8Rng>,
    steps_done: usize,
    record_every: usize,
}

impl RotorEnsemble {
    pub fn new(cfg: &LangevinConfig, law: &TorqueLaw) -> Result<Self> {
        law.validate()?;
        let positive = [cfg.inertia, cfg.hbar, cfg.dt];
        if !positive.iter().all(|v| *v > 0.0 && v.is_finite()) || cfg.n_traj == 0 {
            return Err(Error::Domain(format!(
                "Langevin run needs I, hbar, dt > 0 and at least one trajectory (I={}, hbar={}, dt={}, n={})",
                cfg.inertia, cfg.hbar, cfg.dt, cfg.n_traj
            )));
        }
        if !(cfg.omega_init >= 0.0) || cfg.drive.is_some_and(|d| !(d > 0.0)) {
            return Err(Error::Domain("initial Omega must be >= 0 and the set-point > 0".into()));
        }
        let drive_torque = match cfg.drive {
            Some(w) => law.drift(w)?,
            None => 0.0,
        };
        for w in [Some(cfg.omega_init), cfg.drive].into_iter().flatten().filter(|w| *w > 0.0) {
            let stiff = cfg.dt * cfg.hbar / cfg.inertia * law.drift_derivative(w)?;
            if stiff >= STIFFNESS_LIMIT {
                return Err(Error::StepSize(format!(
                    "dt (hbar/I) dM/dOmega = {stiff:.3e} at Omega = {w} exceeds {STIFFNESS_LIMIT}"
                )));
            }
        }
        let rngs = (0..cfg.n_traj as u64)
            .map(|j| {
                let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
                r.set_stream(j);
                r
            })
            .collect();
        let omega = vec![cfg.omega_init; cfg.n_traj];
        let mut ens = Self {
            inertia: cfg.inertia,
            hbar: cfg.hbar,
            dt: cfg.dt,
            time: 0.0,
            seed: cfg.seed,
            convention: cfg.convention,
            drive_torque,
            omega,
            records: Vec::new(),
            max_adiabaticity: 0.0,
            rngs,
            steps_done: 0,
            record_every: cfg.record_every,
        };
        ens.monitor(law)?;
        if ens.record_every > 0 {
            ens.records.push((0.0, ens.omega.clone()));
        }
        Ok(ens)
    }

    fn monitor(&mut self, law: &TorqueLaw) -> Result<()> {
        let a = adiabaticity(law, self.mean(), self.inertia, self.hbar, self.drive_torque)?;
        self.max_adiabaticity = self.max_adiabaticity.max(a);
        Ok(())
    }

    /// One Euler-Maruyama step of every trajectory.
    pub fn langevin_step(&mut self, law: &TorqueLaw) -> Result<()> {
        self.advance(law, 1)
    }

    /// `n` steps of every trajectory.
    pub fn advance(&mut self, law: &TorqueLaw, n: usize) -> Result<()> {
        let a = self.hbar / self.inertia;
        let dt = self.dt;
        let c = self.convention.factor();
        let m0 = self.drive_torque;
        let every = self.record_every;
        let start = self.steps_done;
        let per_traj: Vec<Vec<f64>> = self
            .omega
            .par_iter_mut()
            .zip(self.rngs.par_iter_mut())
            .map(|(w, rng)| {
                let mut snaps = Vec::new();
                for s in 1..=n {
                    let drift = law.drift(*w)? - m0;
                    let d2 = law.diffusion(*w)?.max(0.0);
                    let xi: f64 = rng.sample(StandardNormal);
                    *w = (*w - a * drift * dt + a * (c * d2 * dt).sqrt() * xi).abs();
                    if every > 0 && (start + s) % every == 0 {
                        snaps.push(*w);
                    }
                }
                Ok(snaps)
            })
            .collect::<Result<Vec<_>>>()?;
        if every > 0 {
            let n_rec = per_traj.first().map_or(0, |v| v.len());
            let first = (start / every + 1) * every;
            for r in 0..n_rec {
                let t = (first + r * every) as f64 * dt;
                self.records.push((t, per_traj.iter().map(|v| v[r]).collect()));
                let mean = per_traj.iter().map(|v| v[r]).sum::<f64>() / per_traj.len() as f64;
                let ad = adiabaticity(law, mean, self.inertia, self.hbar, m0)?;
                self.max_adiabaticity = self.max_adiabaticity.max(ad);
            }
        }
        self.steps_done += n;
        self.time = self.steps_done as f64 * dt;
        self.monitor(law)
    }

    pub fn mean(&self) -> f64 {
        self.omega.iter().sum::<f64>() / self.omega.len() as f64
    }

    /// Unbiased sample variance of `Omega`.
    pub fn variance(&self) -> f64 {
        let n = self.omega.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        self.omega.iter().map(|w| (w - m) * (w - m)).sum::<f64>() / (n - 1) as f64
    }

    pub fn adiabatic_warning(&self) -> bool {
        self.max_adiabaticity > ADIABATIC_LIMIT
    }

    /// `t,traj_id,omega` rows of the recorded snapshots (the final state if
    /// nothing was recorded).
    pub fn trajectory_csv(&self) -> String {
        let mut out = String::from("t,traj_id,omega\n");
        let fallback = [(self.time, self.omega.clone())];
        let recs: &[(f64, Vec<f64>)] = if self.records.is_empty() { &fallback } else { &self.records };
        for (t, ws) in recs {
            for (j, w) in ws.iter().enumerate() {
                out.push_str(&format!("{t:e},{j},{w:e}\n"));
            }
        }
        out
    }

    /// Largest distance between the empirical CDF of the current `Omega`
    /// values and `cdf`.
    pub fn ks_distance<F: Fn(f64) -> f64>(&self, cdf: F) -> f64 {
        let mut xs = self.omega.clone();
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, x)| {
                let f = cdf(*x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Runs `cfg.steps` steps from a fresh ensemble.
pub fn simulate(cfg: &LangevinConfig, law: &TorqueLaw) -> Result<RotorEnsemble> {
    let mut ens = RotorEnsemble::new(cfg, law)?;
    ens.advance(law, cfg.steps)?;
    Ok(ens)
}

/// `I Delta Omega = sqrt(hbar I M2 / M')` at the set-point.
pub fn uncertainty(law: &TorqueLaw, omega0: f64, inertia: f64, hbar: f64) -> Result<f64> {
    let slope = law.drift_derivative(omega0)?;
    if !(slope > 0.0) {
        return Err(Error::Domain(format!("dM/dOmega = {slope:e} at Omega = {omega0}: no restoring drift")));
    }
    Ok((hbar * inertia * law.diffusion(omega0)? / slope).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl FpGrid {
    /// `Omega_0 +- width` Gaussian standard deviations, clipped at zero.
    pub fn around(law: &TorqueLaw, omega0: f64, inertia: f64, hbar: f64, width: f64, n: usize) -> Result<Self> {
        let s = uncertainty(law, omega0, inertia, hbar)? / inertia;
        Ok(Self { lo: (omega0 - width * s).max(0.0), hi: omega0 + width * s, n })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryDensity {
    pub omega: Vec<f64>,
    pub pdf: Vec<f64>,
    pub cdf: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    /// Integral of the normalized density over the grid, computed
    /// independently of the normalization.
    pub norm: f64,
}

impl StationaryDensity {
    pub fn cdf_at(&self, w: f64) -> f64 {
        let n = self.omega.len();
        if w <= self.omega[0] {
            return 0.0;
        }
        if w >= self.omega[n - 1] {
            return 1.0;
        }
        let i = self.omega.partition_point(|o| *o <= w) - 1;
        let t = (w - self.omega[i]) / (self.omega[i + 1] - self.omega[i]);
        self.cdf[i] + t * (self.cdf[i + 1] - self.cdf[i])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("omega,pdf\n");
        for (w, p) in self.omega.iter().zip(&self.pdf) {
            out.push_str(&format!("{w:e},{p:e}\n"));
        }
        out
    }
}

fn check_normalizable(law: &TorqueLaw, driven: bool, inertia: f64, hbar: f64) -> Result<()> {
    let TorqueLaw::PowerLaw { c_drift, k_drift, c_diff, k_diff } = *law else {
        return Ok(());
    };
    if c_diff == 0.0 {
        return Err(Error::Domain("stationary density needs M2 > 0".into()));
    }
    let q = k_drift - k_diff + 1.0;
    let g = inertia / hbar * c_drift / c_diff;
    let at_zero = !driven && (q < 0.0 || (q == 0.0 && k_diff + g >= 1.0) || (q > 0.0 && k_diff >= 1.0));
    let at_inf = (q < 0.0 && k_diff <= 1.0) || (q == 0.0 && k_diff + g <= 1.0);
    if at_zero || at_inf {
        let end = if at_zero { "Omega -> 0" } else { "Omega -> infinity" };
        return Err(Error::Domain(format!(
            "stationary density is not normalizable at {end} for drift exponent {k_drift} and diffusion exponent {k_diff}"
        )));
    }
    Ok(())
}

/// Stationary solution `C/M2 exp[-(I/hbar) int (M - M(Omega_0))/M2]` on the
/// grid, for the set-point `omega0` (`0` for an undriven rotor).
pub fn fokker_planck_stationary(
    law: &TorqueLaw,
    omega0: f64,
    inertia: f64,
    hbar: f64,
    grid: &FpGrid,
) -> Result<StationaryDensity> {
    law.validate()?;
    if !(grid.lo >= 0.0 && grid.hi > grid.lo && grid.n >= 3) {
        return Err(Error::Domain(format!("density grid [{}, {}] with {} points", grid.lo, grid.hi, grid.n)));
    }
    check_normalizable(law, omega0 > 0.0, inertia, hbar)?;
    let m0 = if omega0 > 0.0 { law.drift(omega0)? } else { 0.0 };
    // the exponent only needs absolute accuracy
    let quad = QuadOptions { rel_tol: 1e-12, abs_tol: 1e-13, max_intervals: 4000 };
    let slope = |w: f64| -> Result<f64> {
        let d2 = law.diffusion(w)?;
        if !(d2 > 0.0) {
            return Err(Error::Domain(format!("M2({w}) = {d2} is not positive")));
        }
        Ok(-inertia / hbar * (law.drift(w)? - m0) / d2)
    };
    let nodes: Vec<f64> =
        (0..grid.n).map(|i| grid.lo + (grid.hi - grid.lo) * i as f64 / (grid.n - 1) as f64).collect();
    // exponent at the nodes, referenced to the node nearest the set-point
    let anchor = nodes.iter().enumerate().min_by(|a, b| (a.1 - omega0).abs().total_cmp(&(b.1 - omega0).abs())).unwrap().0;
    let anchor = if nodes[anchor] == 0.0 { 1 } else { anchor };
    let mut y = vec![0.0; grid.n];
    for i in anchor + 1..grid.n {
        y[i] = y[i - 1] + integrate(&slope, nodes[i - 1], nodes[i], &quad)?.0;
    }
    for i in (0..anchor).rev() {
        y[i] = y[i + 1] - integrate(&slope, nodes[i], nodes[i + 1], &quad)?.0;
    }
    let y_max = y
        .iter()
        .zip(&nodes)
        .filter(|(_, w)| **w > 0.0)
        .map(|(v, w)| v - law.diffusion(*w).map(f64::ln).unwrap_or(0.0))
        .fold(f64::NEG_INFINITY, f64::max);
    // unnormalized density inside panel i
    let density = |i: usize, w: f64| -> Result<f64> {
        let e = y[i] + if w > nodes[i] { integrate(&slope, nodes[i], w, &quad)?.0 } else { 0.0 };
        Ok((e - y_max).exp() / law.diffusion(w)?)
    };
    let mut mass = vec![0.0; grid.n];
    let mut moments = [0.0; 3];
    for i in 0..grid.n - 1 {
        let r = integrate_vec(
            |w, out: &mut [f64]| {
                let p = density(i, w)?;
                out[0] = p;
                out[1] = w * p;
                out[2] = w * w * p;
                Ok(())
            },
            nodes[i],
            nodes[i + 1],
            3,
            &QuadOptions { rel_tol: 1e-11, abs_tol: 0.0, ..quad },
        )?;
        mass[i + 1] = mass[i] + r.value[0];
        for d in 0..3 {
            moments[d] += r.value[d];
        }
    }
    let z = mass[grid.n - 1];
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Domain(format!("stationary density has total weight {z}")));
    }
    let pdf = nodes
        .iter()
        .enumerate()
        .map(|(i, w)| if *w == 0.0 { Ok(0.0) } else { Ok(density(i, *w)? / z) })
        .collect::<Result<Vec<_>>>()?;
    let cdf: Vec<f64> = mass.iter().map(|m| m / z).collect();
    let mean = moments[1] / z;
    let variance = moments[2] / z - mean * mean;
    // independent check of the normalization
    let norm = nodes
        .windows(2)
        .enumerate()
        .map(|(i, ab)| integrate(|w| Ok(density(i, w)? / z), ab[0], ab[1], &QuadOptions { abs_tol: 0.0, ..quad }).map(|r| r.0))
        .sum::<Result<f64>>()?;
    Ok(StationaryDensity { omega: nodes, pdf, cdf, mean, variance, norm })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotorSummary {
    pub mean: f64,
    pub var: f64,
    #[serde(rename = "IDeltaOmega_analytic")]
    pub i_delta_omega_analytic: Option<f64>,
    #[serde(rename = "IDeltaOmega_mc")]
    pub i_delta_omega_mc: f64,
    #[serde(rename = "maxAdiabaticity")]
    pub max_adiabaticity: f64,
}

pub fn summarize(ens: &RotorEnsemble, law: &TorqueLaw, set_point: Option<f64>) -> Result<RotorSummary> {
    let analytic = match set_point {
        Some(w) => Some(uncertainty(law, w, ens.inertia, ens.hbar)?),
        None => None,
    };
    let var = ens.variance();
    Ok(RotorSummary {
        mean: ens.mean(),
        var,
        i_delta_omega_analytic: analytic,
        i_delta_omega_mc: ens.inertia * var.sqrt(),
        max_adiabaticity: ens.max_adiabaticity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::DielectricModel;
    use crate::radiation::spindown_time_from_torque;
    use crate::scattering::SphereFlux;

    #[test]
    fn uncertainty_power_laws() {
        for &k in &[2.0, 3.0, 5.0, 7.5] {
            for &c in &[1e-3, 1.0, 40.0] {
                let law = TorqueLaw::power(c, k);
                let u = uncertainty(&law, 1.3, 50.0, 1.0).unwrap();
                let exact = (1.0 * 50.0 * 1.3 / k).sqrt();
                assert!((u / exact - 1.0).abs() < 1e-9, "k={k} c={c}: {u} vs {exact}");
            }
        }
        let law = TorqueLaw::power(2.0, 5.0);
        let a = uncertainty(&law, 0.8, 10.0, 1.0).unwrap();
        let b = uncertainty(&law, 0.8, 10.0, 2.0).unwrap();
        assert!((b / a - 2f64.sqrt()).abs() < 1e-12);
        assert!(matches!(uncertainty(&TorqueLaw::zero(), 1.0, 1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_law_keeps_omega() {
        let cfg = LangevinConfig { n_traj: 16, steps: 100, omega_init: 0.7, ..Default::default() };
        let ens = simulate(&cfg, &TorqueLaw::zero()).unwrap();
        assert!(ens.omega.iter().all(|w| *w == 0.7));
    }

    #[test]
    fn stiffness_guard() {
        let law = TorqueLaw::power(1.0, 5.0);
        // dt (hbar/I) 5 Omega^4 at Omega = 1 is 0.5
        let cfg = LangevinConfig { inertia: 1.0, dt: 0.1, ..Default::default() };
        assert!(matches!(RotorEnsemble::new(&cfg, &law), Err(Error::StepSize(_))));
        let cfg = LangevinConfig { inertia: 10.0, dt: 0.1, ..Default::default() };
        assert!(RotorEnsemble::new(&cfg, &law).is_ok());
    }

    #[test]
    fn reproducible_and_schedule_independent() {
        let law = TorqueLaw::power(1.0, 3.0);
        let cfg = LangevinConfig { inertia: 20.0, n_traj: 64, steps: 50, seed: 9, ..Default::default() };
        let a = simulate(&cfg, &law).unwrap();
        let b = simulate(&cfg, &law).unwrap();
        assert_eq!(a.omega, b.omega);
        // stepping one at a time draws the same numbers
        let mut c = RotorEnsemble::new(&cfg, &law).unwrap();
        for _ in 0..50 {
            c.langevin_step(&law).unwrap();
        }
        assert_eq!(a.omega, c.omega);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let d = pool.install(|| simulate(&cfg, &law).unwrap());
        assert_eq!(a.omega, d.omega);
        let e = simulate(&LangevinConfig { seed: 10, ..cfg }, &law).unwrap();
        assert_ne!(a.omega, e.omega);
    }

    fn deterministic_end(law: &TorqueLaw, inertia: f64, omega0: f64, t_end: f64, dt: f64) -> f64 {
        let steps = (t_end / dt).round() as usize;
        let cfg = LangevinConfig { inertia, dt, steps, n_traj: 1, omega_init: omega0, ..Default::default() };
        simulate(&cfg, law).unwrap().omega[0]
    }

    #[test]
    fn drift_only_matches_spindown_time() {
        // M2 = 0: Euler steps of the drift ODE, Richardson over dt
        let law = TorqueLaw::PowerLaw { c_drift: 1.0, k_drift: 5.0, c_diff: 0.0, k_diff: 5.0 };
        let (inertia, omega0) = (1.0, 1.0);
        let tau =
            spindown_time_from_torque(|w| law.drift(w), inertia, omega0, &QuadOptions::default()).unwrap();
        // exact: tau = I (10^4 - 1) / (4 Omega0^4)
        assert!((tau / (9999.0 / 4.0) - 1.0).abs() < 1e-10);
        let dt = tau / 200_000.0;
        let a = deterministic_end(&law, inertia, omega0, tau, dt);
        let b = deterministic_end(&law, inertia, omega0, tau, dt / 2.0);
        let extrapolated = 2.0 * b - a;
        assert!((extrapolated / 0.1 - 1.0).abs() < 1e-6, "{extrapolated}");
    }

    #[test]
    fn photon_count_variance_growth() {
        // early-time Var(I Omega) = hbar^2 M2(Omega0) t
        let law = TorqueLaw::power(1.0, 5.0);
        let cfg = LangevinConfig {
            inertia: 1e4,
            dt: 0.01,
            steps: 200,
            n_traj: 20_000,
            seed: 3,
            convention: NoiseConvention::PhotonCount,
            ..Default::default()
        };
        let ens = simulate(&cfg, &law).unwrap();
        let t = ens.time;
        let var_l = ens.variance() * cfg.inertia * cfg.inertia;
        let expected = t; // M2(1) = 1, hbar = 1
        // relative MC error of a variance estimate ~ sqrt(2/n) = 1%
        assert!((var_l / expected - 1.0).abs() < 0.05, "{var_l} vs {expected}");
        // mean drift d<Omega>/dt = -(hbar/I) M
        let drop = (1.0 - ens.mean()) * cfg.inertia;
        assert!((drop / t - 1.0).abs() < 0.05, "{drop} vs {t}");
    }

    #[test]
    fn stationary_density_gaussian_limit() {
        let law = TorqueLaw::power(1.0, 5.0);
        let (omega0, inertia) = (1.0, 1e6);
        let grid = FpGrid::around(&law, omega0, inertia, 1.0, 12.0, 801).unwrap();
        let d = fokker_planck_stationary(&law, omega0, inertia, 1.0, &grid).unwrap();
        assert!((d.norm - 1.0).abs() < 1e-8);
        assert!((d.cdf.last().unwrap() - 1.0).abs() < 1e-15);
        let i_delta = inertia * d.variance.sqrt();
        let analytic = (inertia * omega0 / 5.0).sqrt();
        assert!((i_delta / analytic - 1.0).abs() < 5e-3, "{i_delta} vs {analytic}");
    }

    #[test]
    fn stationary_density_non_normalizable() {
        // undriven, M2 ~ Omega^5: 1/M2 is not integrable at 0
        let law = TorqueLaw::power(1.0, 5.0);
        let grid = FpGrid { lo: 0.0, hi: 2.0, n: 11 };
        match fokker_planck_stationary(&law, 0.0, 1.0, 1.0, &grid) {
            Err(Error::Domain(msg)) => assert!(msg.contains("drift exponent 5") && msg.contains("diffusion exponent 5")),
            other => panic!("{other:?}"),
        }
        // undriven with M2 ~ Omega^0.5 decays as exp(-Omega^5.5) and is fine
        let law = TorqueLaw::PowerLaw { c_drift: 1.0, k_drift: 5.0, c_diff: 1.0, k_diff: 0.5 };
        let d = fokker_planck_stationary(&law, 0.0, 1.0, 1.0, &FpGrid { lo: 0.0, hi: 4.0, n: 41 }).unwrap();
        assert!((d.norm - 1.0).abs() < 1e-8);
    }

    #[test]
    fn law_from_radiation_drude_sphere() {
        let sigma = 1e4;
        let r = 1e-3;
        let body = Body::Sphere { model: DielectricModel::Drude { sigma }, r, flux: SphereFlux::Leading };
        let state = ThermalState::new(0.0, 0.0, 1.0).unwrap();
        let opts = RadiationOptions::default();
        let law = torque_law_from_radiation(&body, &state, 0.1, 2.0, 1e-6, &opts).unwrap();
        assert_eq!(law.provenance(), LawProvenance::Radiation);
        for &w in &[0.05f64, 0.137, 0.5, 1.0, 1.77] {
            let closed = r.powi(3) * w.powi(5) / (20.0 * PI * PI * sigma);
            let m = law.drift(w).unwrap();
            assert!((m / closed - 1.0).abs() < 2e-4, "Omega={w}: {m} vs {closed}");
            // N << 1: M2 ~ M for m = 1
            let m2 = law.diffusion(w).unwrap();
            assert!(m2 >= m && (m2 / m - 1.0) < 1e-6);
            // the interpolant reproduces a direct evaluation
            let (d, q) = angular_moments(&body, &ThermalState { omega: w, ..state }, &opts).unwrap();
            assert!((m / d - 1.0).abs() < 1e-6 && (m2 / q - 1.0).abs() < 1e-6);
        }
        assert_eq!(law.drift(0.0).unwrap(), 0.0);
        assert!(law.drift(2.5).is_err());
        let u = uncertainty(&law, 1.0, 1.0, 1.0).unwrap();
        assert!((u / (1.0f64 / 5.0).sqrt() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn lossless_law_vanishes() {
        let body = Body::Sphere { model: DielectricModel::Constant { re: 4.0, im: 0.0 }, r: 0.1, flux: SphereFlux::Leading };
        let state = ThermalState::new(0.0, 0.0, 1.0).unwrap();
        let law = torque_law_from_radiation(&body, &state, 0.1, 1.0, 1e-6, &RadiationOptions::default()).unwrap();
        for &w in &[0.0, 0.05, 0.3, 1.0] {
            assert_eq!(law.drift(w).unwrap(), 0.0);
            assert_eq!(law.diffusion(w).unwrap(), 0.0);
        }
    }

    #[test]
    fn adiabaticity_monitor() {
        let law = TorqueLaw::power(1.0, 5.0);
        let cfg = LangevinConfig { inertia: 5.0, dt: 1e-3, steps: 10, n_traj: 4, ..Default::default() };
        let ens = simulate(&cfg, &law).unwrap();
        // (hbar/I) M / Omega^2 = 0.2 at the start
        assert!((ens.max_adiabaticity - 0.2).abs() < 1e-3);
        assert!(ens.adiabatic_warning());
        let cfg = LangevinConfig { inertia: 100.0, ..cfg };
        assert!(!simulate(&cfg, &law).unwrap().adiabatic_warning());
    }

    #[test]
    fn csv_outputs() {
        let law = TorqueLaw::power(1.0, 3.0);
        let cfg = LangevinConfig { inertia: 50.0, steps: 4, n_traj: 2, record_every: 2, ..Default::default() };
        let ens = simulate(&cfg, &law).unwrap();
        let csv = ens.trajectory_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,traj_id,omega");
        assert_eq!(lines.len(), 1 + 3 * 2);
        assert!(lines[5].starts_with("4e-2,0,"));
        let s = summarize(&ens, &law, None).unwrap();
        assert!(s.i_delta_omega_analytic.is_none());
    }
}
