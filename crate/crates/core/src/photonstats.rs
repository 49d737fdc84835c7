//! Counting statistics and entropy of the radiated photons.
//!
//! Each mode is an independent thermal-like (geometric) source fixed by its
//! mean flux `N`: `F(eta) = -ln(1 - eta N)`, `kappa_p = (p-1)! N^p`,
//! `P(n) = N^n/(N+1)^(n+1)`.
//!
//! Counting cell: a mode is one `(m, extra, pol)` channel in a frequency
//! bin `delta omega` observed for a time `t` with `t delta omega / 2pi = 1`,
//! so `N` is the mean photon number of that cell.

use crate::error::{Error, Result};
use crate::material::ThermalState;
use crate::quadrature::{integrate_vec, QuadOptions};
use crate::radiation::{channel_flux, integrate_power, mode_flux, Body, ChannelKey, RadiationOptions};
use crate::scattering::{Extra, ModeIndex};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

pub const MAX_CUMULANT_ORDER: u32 = 20;
pub const MAX_GLAUBER_ORDER: u32 = 30;
pub const DEFAULT_N_MAX: usize = 10_000;
/// Below this mean the entropy uses `N (1 - ln N)`.
const SMALL_N: f64 = 1e-12;

/// Factorial cumulant `kappa_p = (p-1)! N^p`.
pub fn cumulant(n: f64, p: u32) -> Result<f64> {
    if p == 0 || p > MAX_CUMULANT_ORDER {
        return Err(Error::Range(format!("cumulant order {p} outside 1..={MAX_CUMULANT_ORDER}")));
    }
    if !(n >= 0.0) {
        return Err(Error::Domain(format!("mean flux {n} < 0")));
    }
    let fact: f64 = (1..p).map(f64::from).product();
    Ok(fact * n.powi(p as i32))
}

/// `F(eta) = -ln(1 - eta N)`.
pub fn generating_function(n: f64, eta: f64) -> Result<f64> {
    if eta * n >= 1.0 {
        return Err(Error::Domain(format!("eta N = {} >= 1: generating function diverges", eta * n)));
    }
    Ok(-(-eta * n).ln_1p())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountingDistribution {
    pub p: Vec<f64>,
    /// `P(n > n_max) = (N/(N+1))^(n_max+1)`.
    pub tail: f64,
}

impl CountingDistribution {
    pub fn mean(&self) -> f64 {
        self.p.iter().enumerate().map(|(k, v)| k as f64 * v).sum()
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.p.iter().enumerate().map(|(k, v)| (k as f64 - mu).powi(2) * v).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,P\n");
        for (k, v) in self.p.iter().enumerate() {
            s.push_str(&format!("{k},{v:e}\n"));
        }
        s
    }
}

/// Geometric law `P(n) = N^n/(N+1)^(n+1)` for `n <= n_max`.
pub fn counting_distribution(n: f64, n_max: usize) -> CountingDistribution {
    let q = n / (n + 1.0);
    let mut p = Vec::with_capacity(n_max + 1);
    let mut v = 1.0 / (n + 1.0);
    for _ in 0..=n_max {
        p.push(v);
        v *= q;
    }
    let tail = if n == 0.0 { 0.0 } else { ((n_max as f64 + 1.0) * q.ln()).exp() };
    CountingDistribution { p, tail }
}

/// `P(n)` from the `n`-th `eta`-derivative of `e^F` at `eta = -1`, built
/// from the derivatives of `F` by `G^(k+1) = sum_j C(k,j) F^(j+1) G^(k-j)`.
pub fn glauber_pn_consistency(n: f64, k: u32) -> Result<f64> {
    if k > MAX_GLAUBER_ORDER {
        return Err(Error::Range(format!("photon number {k} > {MAX_GLAUBER_ORDER}")));
    }
    let eta = -1.0;
    let d = 1.0 - eta * n;
    // f[j] = F^(j)/j! = N^j / (j d^j), g[j] = G^(j)/j!
    let f: Vec<f64> = (0..=k as usize + 1).map(|j| if j == 0 { 0.0 } else { (n / d).powi(j as i32) / j as f64 }).collect();
    let mut g = vec![0.0; k as usize + 1];
    g[0] = 1.0 / d;
    for m in 0..k as usize {
        let s: f64 = (0..=m).map(|j| (j + 1) as f64 * f[j + 1] * g[m - j]).sum();
        g[m + 1] = s / (m + 1) as f64;
    }
    Ok(g[k as usize])
}

/// `(N+1) ln(N+1) - N ln N`.
pub fn mode_entropy_rate(n: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    if n < SMALL_N {
        return n * (1.0 - n.ln());
    }
    (n + 1.0) * n.ln_1p() - n * n.ln()
}

/// Radiated plus object entropy per mode for a body at temperature `T`
/// emitting into a cold environment: `s(r/(e^x-1)) - x r/(e^x-1)` with
/// `x = omega/T` and absorptivity `r`.
pub fn combined_mode_entropy(r: f64, x: f64) -> f64 {
    let n = r / x.exp_m1();
    mode_entropy_rate(n) - x * n
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeStatistics {
    #[serde(rename = "N")]
    pub n: f64,
    pub cumulants: Vec<f64>,
    pub distribution: CountingDistribution,
    pub entropy: f64,
}

pub fn mode_statistics(n: f64, p_max: u32, n_max: usize) -> Result<ModeStatistics> {
    let cumulants = (1..=p_max).map(|p| cumulant(n, p)).collect::<Result<Vec<_>>>()?;
    Ok(ModeStatistics { n, cumulants, distribution: counting_distribution(n, n_max), entropy: mode_entropy_rate(n) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelEntropy {
    pub m: i64,
    pub extra: crate::scattering::Extra,
    pub pol: crate::scattering::Polarization,
    /// Photons per unit time.
    #[serde(rename = "N")]
    pub photon_rate: f64,
    #[serde(rename = "entropyRate")]
    pub entropy_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyReport {
    #[serde(rename = "perMode")]
    pub per_mode: Vec<ChannelEntropy>,
    #[serde(rename = "totalEntropyRate")]
    pub total_rate: f64,
    /// `-P/T` for a body at rest at `T > 0`; not defined otherwise.
    #[serde(rename = "objectEntropyRate")]
    pub object_rate: Option<f64>,
    #[serde(rename = "combinedRate")]
    pub combined: Option<f64>,
    #[serde(rename = "photonRate")]
    pub photon_rate: f64,
    pub error: f64,
}

/// Photon flux of a channel at `omega` together with `g(N)` summed over its
/// modes. For the cylinder `g` is applied per `(omega, k_z)` mode before the
/// `L dk_z/2pi` integral.
pub(crate) fn channel_density_with<G>(
    body: &Body,
    state: &ThermalState,
    key: &ChannelKey,
    w: f64,
    quad: &QuadOptions,
    g: G,
) -> Result<(f64, f64)>
where
    G: Fn(f64) -> f64,
{
    if let Body::Cylinder { length, .. } = body {
        let inner = QuadOptions { rel_tol: quad.rel_tol.min(1e-12), ..*quad };
        let r = integrate_vec(
            |k, out: &mut [f64]| {
                let mode = ModeIndex { omega: w, m: key.m, extra: Extra::Kz(k), pol: key.pol };
                let n = mode_flux(body, state, &mode)?.max(0.0);
                out[0] = n;
                out[1] = g(n);
                Ok(())
            },
            -w,
            w,
            2,
            &inner,
        )?;
        let c = length / (2.0 * PI);
        return Ok((c * r.value[0], c * r.value[1]));
    }
    let n = channel_flux(body, state, key, w, quad)?.max(0.0);
    Ok((n, g(n)))
}

/// Entropy production of the emitted radiation, `sum int d omega/2pi s(N)`.
///
/// `N` is the emitted flux `n(omega - Omega m, T_obj)(1 - |S|^2)`; the
/// environment is taken as cold (`T_env` is ignored).
pub fn entropy_generation(body: &Body, state: &ThermalState, opts: &RadiationOptions) -> Result<EntropyReport> {
    let emit = ThermalState { t_env: 0.0, ..*state };
    let m_max = match opts.m_policy {
        crate::radiation::MSumPolicy::Fixed(m) => m,
        crate::radiation::MSumPolicy::Auto { max, .. } => max.min(32),
    };
    let keys: Vec<ChannelKey> = body.channels(m_max, &emit);
    let per: Vec<(ChannelEntropy, f64)> = keys
        .par_iter()
        .map(|k| {
            let mut val = [0.0; 2];
            let mut err = 0.0;
            for (a, b) in crate::radiation::segments(body, k, &emit) {
                let r = integrate_vec(
                    |w, out: &mut [f64]| {
                        let (n, s) = channel_density_with(body, &emit, k, w, &opts.quad, mode_entropy_rate)?;
                        out[0] = n / (2.0 * PI);
                        out[1] = s / (2.0 * PI);
                        Ok(())
                    },
                    a,
                    b,
                    2,
                    &opts.quad,
                )?;
                val[0] += r.value[0];
                val[1] += r.value[1];
                err += r.error[1];
            }
            Ok((ChannelEntropy { m: k.m, extra: k.extra, pol: k.pol, photon_rate: val[0], entropy_rate: val[1] }, err))
        })
        .collect::<Result<Vec<_>>>()?;
    let total_rate = per.iter().map(|(c, _)| c.entropy_rate).sum();
    let photon_rate = per.iter().map(|(c, _)| c.photon_rate).sum();
    let error = per.iter().map(|(_, e)| e).sum();
    let object_rate = if state.omega == 0.0 && state.t_object > 0.0 {
        let p = integrate_power(body, &emit, opts)?.power;
        Some(-p / state.t_object)
    } else {
        None
    };
    Ok(EntropyReport {
        per_mode: per.into_iter().map(|(c, _)| c).collect(),
        total_rate,
        object_rate,
        combined: object_rate.map(|o| o + total_rate),
        photon_rate,
        error,
    })
}
