//! Adaptive Gauss-Kronrod (7/15) quadrature for vector-valued integrands.
//!
//! The rule is open, so integrands are never evaluated at interval
//! endpoints. Intervals are bisected in order of largest scaled error until
//! every component meets `max(abs_tol, rel_tol |I_k|)`.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 0.0, max_intervals: 4000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadResult {
    pub value: Vec<f64>,
    pub error: Vec<f64>,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: Vec<f64>,
    priority: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.priority == o.priority
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.priority.total_cmp(&o.priority).then(o.a.total_cmp(&self.a))
    }
}

fn gk15<F>(f: &F, a: f64, b: f64, dim: usize, buf: &mut [f64]) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(f64, &mut [f64]) -> Result<()>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = vec![0.0; dim];
    let mut g = vec![0.0; dim];
    for (j, &x) in XGK.iter().enumerate() {
        let nodes: &[f64] = if j == 7 { &[0.0] } else { &[-1.0, 1.0] };
        for s in nodes {
            let t = c + s * h * x;
            buf.iter_mut().for_each(|v| *v = 0.0);
            f(t, buf)?;
            for d in 0..dim {
                let v = buf[d];
                if !v.is_finite() {
                    return Err(Error::Convergence(format!("non-finite integrand at {t}")));
                }
                k[d] += WGK[j] * v;
                if j % 2 == 1 {
                    g[d] += WG[j / 2] * v;
                }
            }
        }
    }
    let value: Vec<f64> = k.iter().map(|v| v * h).collect();
    let error: Vec<f64> = k.iter().zip(&g).map(|(kv, gv)| ((kv - gv) * h).abs()).collect();
    Ok((value, error))
}

/// Integrates a `dim`-component integrand over `[a, b]`. The callback
/// receives a zeroed output slice.
pub fn integrate_vec<F>(f: F, a: f64, b: f64, dim: usize, opts: &QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64, &mut [f64]) -> Result<()>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration bounds [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult { value: vec![0.0; dim], error: vec![0.0; dim], evaluations: 0 });
    }
    let mut buf = vec![0.0; dim];
    let mut evals = 0usize;
    let mut total = vec![0.0; dim];
    let mut total_err = vec![0.0; dim];
    let mut heap = BinaryHeap::new();

    let (v, e) = gk15(&f, a, b, dim, &mut buf)?;
    evals += 15;
    for d in 0..dim {
        total[d] += v[d];
        total_err[d] += e[d];
    }
    heap.push(Panel { a, b, value: v, error: e, priority: f64::INFINITY });

    loop {
        let tol: Vec<f64> = total.iter().map(|t| opts.abs_tol.max(opts.rel_tol * t.abs())).collect();
        let worst = total_err
            .iter()
            .zip(&tol)
            .map(|(e, t)| if *e == 0.0 { 0.0 } else if *t == 0.0 { f64::INFINITY } else { e / t })
            .fold(0.0, f64::max);
        if worst <= 1.0 {
            break;
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Convergence(format!(
                "quadrature on [{a}, {b}] did not converge in {} intervals (error/tol = {worst:.3e})",
                heap.len()
            )));
        }
        let p = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            return Err(Error::Convergence(format!("interval around {mid} cannot be bisected further")));
        }
        for d in 0..dim {
            total[d] -= p.value[d];
            total_err[d] -= p.error[d];
        }
        for (lo, hi) in [(p.a, mid), (mid, p.b)] {
            let (v, e) = gk15(&f, lo, hi, dim, &mut buf)?;
            evals += 15;
            let mut pr = 0.0f64;
            for d in 0..dim {
                total[d] += v[d];
                total_err[d] += e[d];
                let t = opts.abs_tol.max(opts.rel_tol * total[d].abs());
                let s = if e[d] == 0.0 { 0.0 } else if t == 0.0 { e[d] * 1e300 } else { e[d] / t };
                pr = pr.max(s);
            }
            heap.push(Panel { a: lo, b: hi, value: v, error: e, priority: pr });
        }
    }
    // re-sum in interval order so the result does not depend on accumulation history
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut value = vec![0.0; dim];
    let mut error = vec![0.0; dim];
    for p in &panels {
        for d in 0..dim {
            value[d] += p.value[d];
            error[d] += p.error[d];
        }
    }
    Ok(QuadResult { value, error, evaluations: evals })
}

/// Scalar convenience wrapper; returns `(value, error)`.
pub fn integrate<F>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let r = integrate_vec(
        |x, out: &mut [f64]| {
            out[0] = f(x)?;
            Ok(())
        },
        a,
        b,
        1,
        opts,
    )?;
    Ok((r.value[0], r.error[0]))
}
