//! Semiclassical coherent-field model `i dα/dt = (−Δ − iγ/2 + U|α|²)α + F`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fock::SystemParams;
use crate::lindblad::{EvolveOptions, HysteresisTrace, InvariantMonitor, SweepProtocol, TraceMetadata};
use crate::ode::{integrate, Dopri5Options, IntegratorStats, Tolerances};

/// Mean-field amplitude `α = ⟨a⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldState {
    pub alpha: Complex64,
}

impl MeanFieldState {
    pub fn population(&self) -> f64 {
        self.alpha.norm_sqr()
    }
}

/// `dα/dt = −i[(−Δ − iγ/2 + U|α|²)α + F]`.
pub fn mf_rhs(alpha: Complex64, f: f64, params: &SystemParams) -> Complex64 {
    let coeff = Complex64::new(
        -params.detuning + params.nonlinearity * alpha.norm_sqr(),
        -0.5 * params.dissipation,
    );
    Complex64::new(0.0, -1.0) * (coeff * alpha + f)
}

/// `F²(n) = n[(Δ − U n)² + γ²/4]`.
pub fn drive_squared(n: f64, params: &SystemParams) -> f64 {
    let s = params.detuning - params.nonlinearity * n;
    n * (s * s + 0.25 * params.dissipation * params.dissipation)
}

/// `d(F²)/dn = 3U²n² − 4ΔUn + Δ² + γ²/4`.
pub fn drive_squared_slope(n: f64, params: &SystemParams) -> f64 {
    let (d, u, g) = (params.detuning, params.nonlinearity, params.dissipation);
    3.0 * u * u * n * n - 4.0 * d * u * n + d * d + 0.25 * g * g
}

/// Stationary amplitude on the branch with population `n`.
pub fn steady_alpha(n: f64, f: f64, params: &SystemParams) -> Complex64 {
    Complex64::new(f, 0.0)
        / Complex64::new(params.detuning - params.nonlinearity * n, 0.5 * params.dissipation)
}

/// Fold populations `n₋ < n₊` where `dF²/dn = 0`, when both are positive.
pub fn fold_populations(params: &SystemParams) -> Option<(f64, f64)> {
    let (d, u, g) = (params.detuning, params.nonlinearity, params.dissipation);
    if u == 0.0 {
        return None;
    }
    let a = 3.0 * u * u;
    let b = -4.0 * d * u;
    let c = d * d + 0.25 * g * g;
    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // Stable form of the quadratic roots.
    let q = -0.5 * (b + b.signum() * sq);
    let (r1, r2) = (q / a, c / q);
    let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
    (lo > 0.0).then_some((lo, hi))
}

/// Bistable drive interval `[F_lo, F_hi]`, empty below the threshold `Δ > √3γ/2`.
pub fn bistable_window(params: &SystemParams) -> Option<(f64, f64)> {
    let (n_minus, n_plus) = fold_populations(params)?;
    let f_hi = drive_squared(n_minus, params).sqrt();
    let f_lo = drive_squared(n_plus, params).sqrt();
    (f_hi > f_lo).then_some((f_lo, f_hi))
}

/// Root of the increasing function `F²(n) − target` on `[lo, hi]`.
fn bracketed_root(params: &SystemParams, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    let h = |n: f64| drive_squared(n, params) - target;
    let increasing = h(hi) >= h(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (h(mid) < 0.0) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Real non-negative roots of `F²(n) = F²` in ascending order.
pub fn mf_roots(f: f64, params: &SystemParams) -> Vec<f64> {
    let target = f * f;
    if target == 0.0 {
        return vec![0.0];
    }
    let u = params.nonlinearity;
    if u == 0.0 {
        return vec![target / drive_squared(1.0, params)];
    }
    let mut hi = 1.0f64;
    while drive_squared(hi, params) < target
        || fold_populations(params).is_some_and(|(_, np)| hi <= np)
    {
        hi *= 2.0;
    }
    match fold_populations(params) {
        None => vec![bracketed_root(params, target, 0.0, hi)],
        Some((nm, np)) => {
            let g_nm = drive_squared(nm, params);
            let g_np = drive_squared(np, params);
            let mut roots = Vec::with_capacity(3);
            if target <= g_nm {
                roots.push(bracketed_root(params, target, 0.0, nm));
            }
            if target <= g_nm && target >= g_np {
                roots.push(bracketed_root(params, target, nm, np));
            }
            if target >= g_np {
                roots.push(bracketed_root(params, target, np, hi));
            }
            roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
            roots
        }
    }
}

/// Eigenvalues of the linearization of `(Re α, Im α)` about `α`.
pub fn jacobian_eigenvalues(alpha: Complex64, params: &SystemParams) -> [Complex64; 2] {
    let (x, y) = (alpha.re, alpha.im);
    let u = params.nonlinearity;
    let g = params.dissipation;
    let nu = -params.detuning + u * alpha.norm_sqr();
    let j11 = -0.5 * g + 2.0 * u * x * y;
    let j12 = nu + 2.0 * u * y * y;
    let j21 = -nu - 2.0 * u * x * x;
    let j22 = -0.5 * g - 2.0 * u * x * y;
    let tr = j11 + j22;
    let det = j11 * j22 - j12 * j21;
    let disc = Complex64::new(0.25 * tr * tr - det, 0.0).sqrt();
    [0.5 * tr + disc, 0.5 * tr - disc]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchLabel {
    /// The only root at this drive.
    Stable,
    StableLow,
    UnstableMiddle,
    StableHigh,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchRoot {
    pub n: f64,
    pub label: BranchLabel,
    /// Both Jacobian eigenvalues have negative real part.
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchDiagram {
    pub f_grid: Vec<f64>,
    pub roots: Vec<Vec<BranchRoot>>,
    pub bistable_window: Option<(f64, f64)>,
}

impl BranchDiagram {
    /// Grid points that carry three roots.
    pub fn bistable_points(&self) -> usize {
        self.roots.iter().filter(|r| r.len() == 3).count()
    }
}

pub fn mf_branches(f_grid: &[f64], params: &SystemParams) -> BranchDiagram {
    let roots = f_grid
        .iter()
        .map(|&f| {
            let ns = mf_roots(f, params);
            let labels: &[BranchLabel] = match ns.len() {
                3 => &[BranchLabel::StableLow, BranchLabel::UnstableMiddle, BranchLabel::StableHigh],
                2 => &[BranchLabel::StableLow, BranchLabel::StableHigh],
                _ => &[BranchLabel::Stable],
            };
            ns.iter()
                .zip(labels)
                .map(|(&n, &label)| {
                    let alpha = steady_alpha(n, f, params);
                    let stable = jacobian_eigenvalues(alpha, params).iter().all(|l| l.re < 0.0);
                    BranchRoot { n, label, stable }
                })
                .collect()
        })
        .collect();
    BranchDiagram {
        f_grid: f_grid.to_vec(),
        roots,
        bistable_window: bistable_window(params),
    }
}

/// Drive range used when a recipe does not give one: three window widths
/// centred on the bistable window, or `[0, 2F_res]` without bistability.
pub fn default_sweep_range(params: &SystemParams) -> (f64, f64) {
    match bistable_window(params) {
        Some((lo, hi)) => {
            let w = hi - lo;
            ((lo - w).max(0.0), hi + w)
        }
        None => {
            let u = params.nonlinearity.abs().max(1e-12);
            let f_res = (params.detuning.abs() / u).sqrt().max(1.0) * 0.5 * params.dissipation;
            (0.0, 2.0 * f_res)
        }
    }
}

/// Smallest cutoff with `N ≥ n_mf + 8√n_mf + 10`, `n_mf` the largest
/// mean-field root at `f_max`.
pub fn auto_cutoff(params: &SystemParams, f_max: f64) -> usize {
    let n = mf_roots(f_max, params).last().copied().unwrap_or(0.0);
    (n + 8.0 * n.sqrt() + 10.0).ceil() as usize
}

/// Static hysteresis area `∫ (n_high − n_low) dF` over the bistable window.
pub fn static_area(params: &SystemParams) -> f64 {
    let Some((f_lo, f_hi)) = bistable_window(params) else {
        return 0.0;
    };
    let (n_minus, n_plus) = fold_populations(params).expect("window implies folds");
    let n_high_end = *mf_roots(f_hi, params).last().unwrap();
    let n_low_start = mf_roots(f_lo, params)[0];
    // ∫ n dF along a branch = ∫ n F'(n) dn, with F'(n) = (F²)'/(2F).
    let branch = |a: f64, b: f64| {
        gauss_legendre(a, b, 96, |n| {
            n * drive_squared_slope(n, params) / (2.0 * drive_squared(n, params).sqrt())
        })
    };
    let a0 = branch(n_plus, n_high_end) - branch(n_low_start, n_minus);
    debug_assert!(f_hi > f_lo);
    a0
}

/// Gauss–Legendre quadrature on `[a, b]` with `m` nodes.
fn gauss_legendre(a: f64, b: f64, m: usize, f: impl Fn(f64) -> f64) -> f64 {
    let mut sum = 0.0;
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        if 2 * i + 1 == m {
            sum += w * f(mid);
        } else {
            sum += w * (f(mid - half * x) + f(mid + half * x));
        }
    }
    sum * 0.5 * (b - a)
}

/// Tolerances for the scalar mean-field sweeps.
pub fn mean_field_tolerances() -> Tolerances {
    Tolerances {
        rtol: 1e-10,
        atol: 1e-12,
    }
}

/// Mean-field hysteresis loop; `g2 ≡ 1` on both legs.
pub fn mf_sweep(protocol: &SweepProtocol, params: &SystemParams) -> Result<HysteresisTrace> {
    protocol.validate()?;
    params.validate()?;
    let n0 = mf_roots(protocol.f0, params)[0];
    let alpha0 = steady_alpha(n0, protocol.f0, params);
    let opts = Dopri5Options {
        tolerances: mean_field_tolerances(),
        ..Default::default()
    };
    let times = protocol.leg_times();
    let s = protocol.samples;
    let mut n_up = vec![0.0; s];
    let mut n_down = vec![0.0; s];
    let mut stats = IntegratorStats::default();
    let mut state = vec![alpha0];
    for leg in 0..2 {
        let (f_start, slope) = if leg == 0 {
            (protocol.f0, protocol.df / protocol.t_s)
        } else {
            (protocol.f_max(), -protocol.df / protocol.t_s)
        };
        let out = if leg == 0 { &mut n_up } else { &mut n_down };
        let (end, st) = integrate(
            |t, y: &[Complex64], dy: &mut [Complex64]| dy[0] = mf_rhs(y[0], f_start + slope * t, params),
            0.0,
            &state,
            protocol.t_s,
            &times,
            &opts,
            |i, _, y| {
                let k = if leg == 0 { i } else { s - 1 - i };
                out[k] = y[0].norm_sqr();
                Ok(())
            },
        )?;
        stats.merge(&st);
        state = end;
    }
    let options = EvolveOptions {
        tolerances: opts.tolerances,
        ..Default::default()
    };
    Ok(HysteresisTrace {
        f_grid: protocol.f_grid(),
        n_up,
        n_down,
        g2_up: vec![Some(1.0); s],
        g2_down: vec![Some(1.0); s],
        metadata: Some(TraceMetadata {
            params: *params,
            protocol: *protocol,
            options,
            stats,
            invariants: InvariantMonitor::exact(),
        }),
    })
}
