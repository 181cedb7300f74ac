//! Hysteresis areas, scaling-law fits, resonance minima and the
//! non-adiabatic window around the transition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::HysteresisTrace;

/// `A = ∫ |n_down − n_up| dF` by the trapezoidal rule.
pub fn hysteresis_area(trace: &HysteresisTrace) -> Result<f64> {
    trace.validate()?;
    area_between(&trace.f_grid, &trace.n_up, &trace.n_down)
}

pub fn area_between(f: &[f64], up: &[f64], down: &[f64]) -> Result<f64> {
    if up.len() != f.len() || down.len() != f.len() {
        return Err(Error::DimensionMismatch {
            expected: f.len(),
            found: up.len().min(down.len()),
        });
    }
    let gap: Vec<f64> = up.iter().zip(down).map(|(u, d)| (d - u).abs()).collect();
    Ok(f.windows(2)
        .zip(gap.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum())
}

/// Ordinary least-squares line with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub intercept_se: f64,
    pub points: usize,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::DimensionMismatch { expected: n, found: y.len() });
    }
    if n < 2 {
        return Err(Error::Fit(format!("need at least two points, got {n}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("abscissae are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (slope_se, intercept_se) = if n > 2 {
        let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        let s2 = rss / (nf - 2.0);
        ((s2 / sxx).sqrt(), (s2 * (1.0 / nf + mx * mx / sxx)).sqrt())
    } else {
        (0.0, 0.0)
    };
    Ok(LinearFit {
        slope,
        intercept,
        slope_se,
        intercept_se,
        points: n,
    })
}

/// Fit of `y = C·x^slope` by least squares in log-log space.
pub fn power_law_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::Fit("power-law fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

/// Areas against sweep time with the scan's drive span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaScan {
    pub t_s: Vec<f64>,
    pub area: Vec<f64>,
    /// `ΔF` shared by every sweep of the scan.
    pub df: f64,
}

impl AreaScan {
    pub fn new(t_s: Vec<f64>, area: Vec<f64>, df: f64) -> Result<Self> {
        if t_s.len() != area.len() {
            return Err(Error::DimensionMismatch { expected: t_s.len(), found: area.len() });
        }
        if t_s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Fit("sweep times must be strictly ascending".into()));
        }
        if area.iter().any(|a| !(*a >= 0.0)) {
            return Err(Error::Fit("areas must be non-negative".into()));
        }
        Ok(Self { t_s, area, df })
    }

    /// Dimensionless sweep parameter `t_s γ²/ΔF`.
    pub fn rate_ratios(&self) -> Vec<f64> {
        self.t_s.iter().map(|t| t / self.df).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoublePowerLawFit {
    pub exponent_slow: f64,
    pub exponent_slow_se: f64,
    /// The fast-regime exponent, written `−b`.
    pub exponent_fast: f64,
    pub exponent_fast_se: f64,
    /// Sweep time where the local slope crosses the midpoint of the plateaus.
    pub crossover: f64,
    /// `τ` from `A = τΔF/t_s` on the points beyond three crossovers.
    pub tau: f64,
    pub tau_points: usize,
    pub slow_points: usize,
    pub fast_points: usize,
}

/// Points required per regime.
pub const MIN_REGIME_POINTS: usize = 6;
/// Relative increase tolerated before data are called non-monotone.
pub const MONOTONE_SLACK: f64 = 1e-3;

/// Slopes of `ln A` against `ln t` over a centred three-point window.
pub fn local_slopes(t: &[f64], a: &[f64]) -> Vec<f64> {
    let n = t.len();
    (0..n)
        .map(|i| {
            let (l, r) = (i.saturating_sub(1), (i + 1).min(n - 1));
            (a[r].ln() - a[l].ln()) / (t[r].ln() - t[l].ln())
        })
        .collect()
}

pub fn fit_double_power_law(scan: &AreaScan) -> Result<DoublePowerLawFit> {
    let (t, a) = (&scan.t_s, &scan.area);
    let n = t.len();
    if n < 2 * MIN_REGIME_POINTS {
        return Err(Error::Fit(format!(
            "need at least {} points, got {n}",
            2 * MIN_REGIME_POINTS
        )));
    }
    if a.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Fit("areas must be positive for a log-log fit".into()));
    }
    if let Some(i) = (1..n).find(|&i| a[i] > a[i - 1] * (1.0 + MONOTONE_SLACK)) {
        return Err(Error::Fit(format!(
            "area increases between t_s = {} and {}",
            t[i - 1], t[i]
        )));
    }
    let slopes = local_slopes(t, a);
    let k = 3.min(n / 4).max(1);
    let fast_plateau = slopes[1..=k].iter().sum::<f64>() / k as f64;
    let slow_plateau = slopes[n - 1 - k..n - 1].iter().sum::<f64>() / k as f64;
    let mid = 0.5 * (fast_plateau + slow_plateau);
    let lt: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let crossing = (1..n).find(|&i| (slopes[i - 1] - mid) * (slopes[i] - mid) <= 0.0 && slopes[i] != slopes[i - 1]);
    let Some(i) = crossing else {
        return Err(Error::Fit("no crossover between the two regimes".into()));
    };
    let w = (mid - slopes[i - 1]) / (slopes[i] - slopes[i - 1]);
    let crossover = (lt[i - 1] + w * (lt[i] - lt[i - 1])).exp();

    let fast: Vec<usize> = (0..n).filter(|&j| t[j] < crossover).collect();
    let slow: Vec<usize> = (0..n).filter(|&j| t[j] > crossover).collect();
    if fast.len() < MIN_REGIME_POINTS || slow.len() < MIN_REGIME_POINTS {
        return Err(Error::Fit(format!(
            "regimes have {} fast and {} slow points, need {MIN_REGIME_POINTS} each",
            fast.len(),
            slow.len()
        )));
    }
    let pick = |idx: &[usize]| -> (Vec<f64>, Vec<f64>) { idx.iter().map(|&j| (t[j], a[j])).unzip() };
    let (ft, fa) = pick(&fast);
    let (st, sa) = pick(&slow);
    let fast_fit = power_law_fit(&ft, &fa)?;
    let slow_fit = power_law_fit(&st, &sa)?;

    let tail: Vec<usize> = (0..n).filter(|&j| t[j] >= 3.0 * crossover).collect();
    if tail.len() < 2 {
        return Err(Error::Fit(format!(
            "only {} points beyond three crossovers ({:.4e})",
            tail.len(),
            3.0 * crossover
        )));
    }
    let log_tau = tail.iter().map(|&j| (a[j] * t[j] / scan.df).ln()).sum::<f64>() / tail.len() as f64;
    Ok(DoublePowerLawFit {
        exponent_slow: slow_fit.slope,
        exponent_slow_se: slow_fit.slope_se,
        exponent_fast: fast_fit.slope,
        exponent_fast_se: fast_fit.slope_se,
        crossover,
        tau: log_tau.exp(),
        tau_points: tail.len(),
        slow_points: slow.len(),
        fast_points: fast.len(),
    })
}

/// `A = A₀ + c·t^exponent` with `exponent < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffsetPowerLawFit {
    pub a0: f64,
    pub a0_se: f64,
    pub amplitude: f64,
    pub exponent: f64,
    pub exponent_se: f64,
    /// Weighted residual sum of squares.
    pub rss: f64,
}

/// Weighted linear solve for `(A₀, c)` at fixed `p`; returns `(rss, A₀, c, cov₀₀)`.
fn offset_projection(t: &[f64], a: &[f64], p: f64) -> (f64, f64, f64, f64) {
    let (mut s00, mut s01, mut s11, mut b0, mut b1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&ti, &ai) in t.iter().zip(a) {
        let w = 1.0 / (ai * ai);
        let x = ti.powf(-p);
        s00 += w;
        s01 += w * x;
        s11 += w * x * x;
        b0 += w * ai;
        b1 += w * x * ai;
    }
    let det = s00 * s11 - s01 * s01;
    let a0 = (s11 * b0 - s01 * b1) / det;
    let c = (s00 * b1 - s01 * b0) / det;
    let rss = t
        .iter()
        .zip(a)
        .map(|(&ti, &ai)| ((ai - a0 - c * ti.powf(-p)) / ai).powi(2))
        .sum();
    (rss, a0, c, s11 / det)
}

/// Fits `A = A₀ + c·t^(−p)` with relative weights, projecting out the linear
/// parameters and minimizing over `p`.
pub fn fit_offset_power_law(t: &[f64], a: &[f64]) -> Result<OffsetPowerLawFit> {
    let n = t.len();
    if n != a.len() {
        return Err(Error::DimensionMismatch { expected: n, found: a.len() });
    }
    if n < 5 {
        return Err(Error::Fit(format!("need at least five points, got {n}")));
    }
    if t.iter().chain(a).any(|v| !(*v > 0.0)) {
        return Err(Error::Fit("offset power-law fit needs positive data".into()));
    }
    let rss = |p: f64| offset_projection(t, a, p).0;
    let (p_lo, p_hi) = (0.02, 4.0);
    let grid = 400;
    let mut best = (f64::INFINITY, p_lo);
    for i in 0..=grid {
        let p = p_lo + (p_hi - p_lo) * i as f64 / grid as f64;
        let r = rss(p);
        if r < best.0 {
            best = (r, p);
        }
    }
    let step = (p_hi - p_lo) / grid as f64;
    let (mut lo, mut hi) = ((best.1 - step).max(p_lo), (best.1 + step).min(p_hi));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (rss(x1), rss(x2));
    for _ in 0..200 {
        if hi - lo < 1e-12 {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = rss(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = rss(x2);
        }
    }
    let p = 0.5 * (lo + hi);
    let (r, a0, c, cov00) = offset_projection(t, a, p);
    let dof = (n - 3) as f64;
    let s2 = r / dof;
    let h = 1e-4 * p.max(0.1);
    let curvature = (rss(p + h) - 2.0 * r + rss(p - h)) / (h * h);
    let exponent_se = if curvature > 0.0 { (2.0 * s2 / curvature).sqrt() } else { f64::INFINITY };
    Ok(OffsetPowerLawFit {
        a0,
        a0_se: (s2 * cov00).sqrt(),
        amplitude: c,
        exponent: -p,
        exponent_se,
        rss: r,
    })
}

/// Interior local minima by three-point comparison, refined by the vertex of
/// the parabola through each minimum and its neighbours.
pub fn local_minima(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len().min(y.len());
    let mut out = Vec::new();
    for i in 1..n.saturating_sub(1) {
        if y[i] < y[i - 1] && y[i] < y[i + 1] {
            let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
            let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
            let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
            let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
            out.push(if den != 0.0 { x1 - 0.5 * num / den } else { x1 });
        }
    }
    out
}

/// Kerr strengths of the multiphoton resonances `U n(n−1)/2 = nΔ`, i.e.
/// `U = 2Δ/(n−1)` for `n = 2, …, n_max`.
pub fn resonance_positions(detuning: f64, n_max: usize) -> Vec<f64> {
    (2..=n_max).map(|n| 2.0 * detuning / (n as f64 - 1.0)).collect()
}

/// A τ curve over a parameter grid with its detected minima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicTimeMap {
    pub grid: Vec<f64>,
    pub tau: Vec<f64>,
    pub minima: Vec<f64>,
}

impl CharacteristicTimeMap {
    pub fn new(grid: Vec<f64>, tau: Vec<f64>) -> Self {
        let minima = local_minima(&grid, &tau);
        Self { grid, tau, minima }
    }

    /// Whether a detected minimum lies within `tol` of `x`.
    pub fn has_minimum_near(&self, x: f64, tol: f64) -> bool {
        self.minima.iter().any(|m| (m - x).abs() <= tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KzWindow {
    pub t_s: f64,
    pub f_c: f64,
    pub tau_t: f64,
    pub f_left: f64,
    pub f_right: f64,
    pub delta_f: f64,
}

impl KzWindow {
    /// `δF·t_s/(2τ_T ΔF)`, which tends to one for slow sweeps.
    pub fn asymptote_ratio(&self, df: f64) -> f64 {
        self.delta_f * self.t_s / (2.0 * self.tau_t * df)
    }
}

/// `τ_R` at `f` by linear interpolation of `ln τ_R` on the scan grid.
pub fn interpolate_log(f_grid: &[f64], tau: &[f64], f: f64) -> f64 {
    let n = f_grid.len();
    let i = match f_grid.partition_point(|&x| x <= f) {
        0 => 1,
        k if k >= n => n - 1,
        k => k,
    };
    let (x0, x1) = (f_grid[i - 1], f_grid[i]);
    let w = (f - x0) / (x1 - x0);
    ((1.0 - w) * tau[i - 1].ln() + w * tau[i].ln()).exp()
}

/// Width of `{F : t_s|F − F_c|/ΔF < τ_R(F)}` around `F_c`, found by bisection
/// on each side.
pub fn kz_window(t_s: f64, df: f64, f_grid: &[f64], tau_r: &[f64], f_c: f64, tau_t: f64) -> Result<KzWindow> {
    if f_grid.len() != tau_r.len() || f_grid.len() < 2 {
        return Err(Error::DimensionMismatch { expected: f_grid.len(), found: tau_r.len() });
    }
    if !(t_s > 0.0 && df > 0.0) {
        return Err(Error::InvalidParameter("t_s and ΔF must be positive".into()));
    }
    if tau_r.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter("relaxation times must be positive".into()));
    }
    let (fmin, fmax) = (f_grid[0], f_grid[f_grid.len() - 1]);
    if !(f_c > fmin && f_c < fmax) {
        return Err(Error::WindowOutOfRange("F_c outside the scanned range"));
    }
    let h = |f: f64| t_s * (f - f_c).abs() / df - interpolate_log(f_grid, tau_r, f);
    let edge = |outer: f64, side: &'static str| -> Result<f64> {
        if h(outer) <= 0.0 {
            return Err(Error::WindowOutOfRange(side));
        }
        // h < 0 at F_c because τ_R > 0 there.
        let (mut inside, mut outside) = (f_c, outer);
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if h(mid) < 0.0 {
                inside = mid;
            } else {
                outside = mid;
            }
            if (outside - inside).abs() < 1e-14 * f_c.abs().max(1.0) {
                break;
            }
        }
        Ok(0.5 * (inside + outside))
    };
    let f_left = edge(fmin, "window extends below the scanned range")?;
    let f_right = edge(fmax, "window extends above the scanned range")?;
    Ok(KzWindow {
        t_s,
        f_c,
        tau_t,
        f_left,
        f_right,
        delta_f: f_right - f_left,
    })
}
