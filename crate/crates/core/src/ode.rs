//! Dormand–Prince 5(4) with PI step control and fourth-order dense output,
//! generic over real and complex state vectors.

use std::ops::{Add, AddAssign, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar type of an ODE state vector.
pub trait OdeScalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + AddAssign + Send + Sync
{
    const ZERO: Self;
    fn modulus(self) -> f64;
    fn is_finite(self) -> bool;
}

impl OdeScalar for f64 {
    const ZERO: Self = 0.0;
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl OdeScalar for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dopri5Options {
    pub tolerances: Tolerances,
    /// Initial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

impl IntegratorStats {
    pub fn merge(&mut self, other: &Self) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.rhs_evals += other.rhs_evals;
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

/// Integrates `y' = f(t, y)` from `t0` to `t_end`.
///
/// `outputs` must be ascending and inside `[t0, t_end]`; `observer` receives
/// the dense-output state at each of them. Returns the state at `t_end`.
pub fn integrate<S, F, O>(
    mut rhs: F,
    t0: f64,
    y0: &[S],
    t_end: f64,
    outputs: &[f64],
    options: &Dopri5Options,
    mut observer: O,
) -> Result<(Vec<S>, IntegratorStats)>
where
    S: OdeScalar,
    F: FnMut(f64, &[S], &mut [S]),
    O: FnMut(usize, f64, &[S]) -> Result<()>,
{
    if !(t_end > t0) || !t0.is_finite() || !t_end.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "integration interval [{t0}, {t_end}] is empty"
        )));
    }
    if outputs.windows(2).any(|w| w[1] < w[0]) || outputs.iter().any(|&t| t < t0 || t > t_end) {
        return Err(Error::InvalidParameter(
            "output times must be ascending and inside the interval".into(),
        ));
    }
    let n = y0.len();
    let tol = options.tolerances;
    let mut stats = IntegratorStats::default();
    let mut y = y0.to_vec();
    let mut ynew = vec![S::ZERO; n];
    let mut tmp = vec![S::ZERO; n];
    let mut k1 = vec![S::ZERO; n];
    let mut k2 = vec![S::ZERO; n];
    let mut k3 = vec![S::ZERO; n];
    let mut k4 = vec![S::ZERO; n];
    let mut k5 = vec![S::ZERO; n];
    let mut k6 = vec![S::ZERO; n];
    let mut k7 = vec![S::ZERO; n];
    let mut dense = vec![S::ZERO; n];

    let mut next_out = 0;
    while next_out < outputs.len() && outputs[next_out] <= t0 {
        observer(next_out, outputs[next_out], &y)?;
        next_out += 1;
    }

    rhs(t0, &y, &mut k1);
    stats.rhs_evals += 1;
    let mut h = match options.h_init {
        Some(h) => h,
        None => {
            let guess = initial_step(&mut rhs, t0, &y, &k1, tol, &mut tmp, &mut k2);
            stats.rhs_evals += 1;
            guess
        }
    }
    .min(options.h_max)
    .min(t_end - t0);

    let mut t = t0;
    let mut fac_old = 1e-4f64;
    let mut last_rejected = false;
    let mut steps = 0usize;
    loop {
        if steps >= options.max_steps {
            return Err(Error::TooManySteps {
                t,
                max_steps: options.max_steps,
            });
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        let last = t + 1.01 * h >= t_end;
        if last {
            h = t_end - t;
        }
        steps += 1;

        combine(&mut tmp, &y, h, &[(A21, &k1)]);
        rhs(t + C2 * h, &tmp, &mut k2);
        combine(&mut tmp, &y, h, &[(A31, &k1), (A32, &k2)]);
        rhs(t + C3 * h, &tmp, &mut k3);
        combine(&mut tmp, &y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        rhs(t + C4 * h, &tmp, &mut k4);
        combine(&mut tmp, &y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        rhs(t + C5 * h, &tmp, &mut k5);
        combine(&mut tmp, &y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        rhs(t + h, &tmp, &mut k6);
        combine(&mut ynew, &y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let t_new = if last { t_end } else { t + h };
        rhs(t_new, &ynew, &mut k7);
        stats.rhs_evals += 6;

        let mut err_sq = 0.0;
        let mut finite = true;
        for i in 0..n {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let sc = tol.atol + tol.rtol * y[i].modulus().max(ynew[i].modulus());
            let r = e.modulus() / sc;
            err_sq += r * r;
            finite &= ynew[i].is_finite();
        }
        let err = (err_sq / n.max(1) as f64).sqrt();

        if !finite || !err.is_finite() {
            stats.rejected += 1;
            last_rejected = true;
            h *= 0.1;
            continue;
        }

        let fac11 = err.powf(0.2 - 0.75 * BETA);
        if err <= 1.0 {
            stats.accepted += 1;
            let fac = (fac11 / fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            fac_old = err.max(1e-4);
            let mut h_new = (h / fac).min(options.h_max);
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;

            if next_out < outputs.len() && outputs[next_out] <= t_new {
                // rcont5 of Hairer's DOPRI5 without the other coefficients.
                for i in 0..n {
                    dense[i] = (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7) * h;
                }
                while next_out < outputs.len() && outputs[next_out] <= t_new {
                    let to = outputs[next_out];
                    let theta = ((to - t) / h).clamp(0.0, 1.0);
                    if to == t_new {
                        tmp.copy_from_slice(&ynew);
                    } else {
                        let theta1 = 1.0 - theta;
                        for i in 0..n {
                            let r2 = ynew[i] - y[i];
                            let r3 = k1[i] * h - r2;
                            let r4 = r2 - k7[i] * h - r3;
                            tmp[i] = y[i] + (r2 + (r3 + (r4 + dense[i] * theta1) * theta) * theta1) * theta;
                        }
                    }
                    observer(next_out, to, &tmp)?;
                    next_out += 1;
                }
            }

            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            t = t_new;
            if last {
                break;
            }
            h = h_new;
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
        }
    }
    Ok((y, stats))
}

/// `out = y + h Σ a_j k_j`.
fn combine<S: OdeScalar>(out: &mut [S], y: &[S], h: f64, terms: &[(f64, &Vec<S>)]) {
    for i in 0..out.len() {
        let mut acc = S::ZERO;
        for (a, k) in terms {
            acc += k[i] * *a;
        }
        out[i] = y[i] + acc * h;
    }
}

/// Starting step from Hairer, Nørsett & Wanner, Sec. II.4.
fn initial_step<S, F>(rhs: &mut F, t0: f64, y: &[S], f0: &[S], tol: Tolerances, tmp: &mut [S], f1: &mut [S]) -> f64
where
    S: OdeScalar,
    F: FnMut(f64, &[S], &mut [S]),
{
    let n = y.len().max(1) as f64;
    let sc = |v: S| tol.atol + tol.rtol * v.modulus();
    let d0 = (y.iter().map(|&v| (v.modulus() / sc(v)).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (y
        .iter()
        .zip(f0)
        .map(|(&v, &f)| (f.modulus() / sc(v)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    for i in 0..y.len() {
        tmp[i] = y[i] + f0[i] * h0;
    }
    rhs(t0 + h0, tmp, f1);
    let d2 = (y
        .iter()
        .zip(f0.iter().zip(f1.iter()))
        .map(|(&v, (&a, &b))| ((b - a).modulus() / sc(v)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}
