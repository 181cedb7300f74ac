//! Two identical Kerr resonators coupled by photon hopping.
//!
//! The joint Fock index is `n₁·(N+1) + n₂` with `N` the per-site cutoff.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{static_energies, DensityMatrix, FockOperator, SystemParams};
use crate::generator::{LindbladGenerator, ShiftOp};
use crate::lindblad::{
    sweep_generator, EvolveOptions, HysteresisTrace, InvariantMonitor, SweepProtocol, TraceMetadata,
};
use crate::mean_field::{mean_field_tolerances, mf_roots, steady_alpha};
use crate::ode::{integrate, Dopri5Options, IntegratorStats};
use crate::steady_state::solve_steady_state;

/// Default ceiling on the joint dimension `(N+1)²`.
pub const MAX_JOINT_DIM: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimerParams {
    /// Parameters of each resonator; `site.cutoff` is the per-site cutoff.
    pub site: SystemParams,
    pub hopping: f64,
    pub max_joint_dim: usize,
}

impl DimerParams {
    pub fn new(site: SystemParams, hopping: f64) -> Result<Self> {
        let d = Self {
            site,
            hopping,
            max_joint_dim: MAX_JOINT_DIM,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn with_max_joint_dim(mut self, cap: usize) -> Result<Self> {
        self.max_joint_dim = cap;
        self.validate()?;
        Ok(self)
    }

    pub fn site_dim(&self) -> usize {
        self.site.dim()
    }

    pub fn joint_dim(&self) -> usize {
        self.site_dim() * self.site_dim()
    }

    pub fn validate(&self) -> Result<()> {
        self.site.validate()?;
        if !self.hopping.is_finite() {
            return Err(Error::InvalidParameter("hopping must be finite".into()));
        }
        if self.joint_dim() > self.max_joint_dim {
            return Err(Error::InvalidParameter(format!(
                "joint dimension {} exceeds the cap {}",
                self.joint_dim(),
                self.max_joint_dim
            )));
        }
        Ok(())
    }
}

fn joint(s: usize, n1: usize, n2: usize) -> usize {
    n1 * s + n2
}

/// Annihilation operator of `site` (0 or 1) on the joint space.
fn site_lowering(s: usize, site: usize) -> ShiftOp {
    let mut rows = vec![None; s * s];
    for n1 in 0..s {
        for n2 in 0..s {
            let (target, n) = if site == 0 { (n1 + 1, n1) } else { (n2 + 1, n2) };
            if target < s {
                let col = if site == 0 { joint(s, target, n2) } else { joint(s, n1, target) };
                rows[joint(s, n1, n2)] = Some((col, Complex64::new(((n + 1) as f64).sqrt(), 0.0)));
            }
        }
    }
    ShiftOp::from_rows(s * s, rows).expect("consistent dimensions")
}

fn site_raising(s: usize, site: usize) -> ShiftOp {
    let mut rows = vec![None; s * s];
    for n1 in 0..s {
        for n2 in 0..s {
            let n = if site == 0 { n1 } else { n2 };
            if n > 0 {
                let col = if site == 0 { joint(s, n1 - 1, n2) } else { joint(s, n1, n2 - 1) };
                rows[joint(s, n1, n2)] = Some((col, Complex64::new((n as f64).sqrt(), 0.0)));
            }
        }
    }
    ShiftOp::from_rows(s * s, rows).expect("consistent dimensions")
}

/// Static Hamiltonian and drive coupling on the joint space.
pub fn dimer_hamiltonian(dimer: &DimerParams) -> Result<(FockOperator, FockOperator)> {
    dimer.validate()?;
    let s = dimer.site_dim();
    let d = s * s;
    let e = static_energies(&dimer.site);
    let mut h = vec![Complex64::new(0.0, 0.0); d * d];
    let mut v = vec![Complex64::new(0.0, 0.0); d * d];
    for n1 in 0..s {
        for n2 in 0..s {
            let k = joint(s, n1, n2);
            h[k * d + k] = Complex64::new(e[n1] + e[n2], 0.0);
            // −J a₁†a₂ moves a photon from site 2 to site 1.
            if n2 > 0 && n1 + 1 < s {
                let r = joint(s, n1 + 1, n2 - 1);
                let amp = -dimer.hopping * (((n1 + 1) * n2) as f64).sqrt();
                h[r * d + k] += amp;
                h[k * d + r] += amp;
            }
            if n1 + 1 < s {
                let r = joint(s, n1 + 1, n2);
                let amp = ((n1 + 1) as f64).sqrt();
                v[r * d + k] += amp;
                v[k * d + r] += amp;
            }
            if n2 + 1 < s {
                let r = joint(s, n1, n2 + 1);
                let amp = ((n2 + 1) as f64).sqrt();
                v[r * d + k] += amp;
                v[k * d + r] += amp;
            }
        }
    }
    Ok((FockOperator::from_entries(d, h)?, FockOperator::from_entries(d, v)?))
}

/// Joint generator with a local dissipator of rate `γ` and shared `n_th` on each site.
pub fn build_dimer_generator(dimer: &DimerParams) -> Result<LindbladGenerator> {
    let (h, v) = dimer_hamiltonian(dimer)?;
    let s = dimer.site_dim();
    let g = dimer.site.dissipation;
    let n_th = dimer.site.thermal_occupation;
    let mut jumps = Vec::new();
    for site in 0..2 {
        jumps.push((g * (1.0 + n_th), site_lowering(s, site)));
        if n_th > 0.0 {
            jumps.push((g * n_th, site_raising(s, site)));
        }
    }
    LindbladGenerator::new(&h, &v, jumps)
}

/// `dρ/dt` for the joint state at drive `F`.
pub fn dimer_rhs(rho: &DensityMatrix, f: f64, dimer: &DimerParams) -> Result<DensityMatrix> {
    let gen = build_dimer_generator(dimer)?;
    if rho.dim() != gen.dim() {
        return Err(Error::DimensionMismatch {
            expected: gen.dim(),
            found: rho.dim(),
        });
    }
    let mut out = vec![Complex64::new(0.0, 0.0); rho.entries().len()];
    gen.apply(f, rho.entries(), &mut out);
    DensityMatrix::from_entries(rho.dim(), out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimerObservables {
    pub n1: f64,
    pub n2: f64,
    /// `⟨a₁†a₁†a₁a₁⟩/n₁²`.
    pub g2_local: Option<f64>,
    /// `⟨a₁†a₂†a₂a₁⟩/(n₁n₂)`.
    pub g2_12: Option<f64>,
}

fn site_dim_of(rho: &DensityMatrix) -> Result<usize> {
    let d = rho.dim();
    let s = (d as f64).sqrt().round() as usize;
    if s * s != d {
        return Err(Error::InvalidParameter(format!("{d} is not a square joint dimension")));
    }
    Ok(s)
}

pub fn dimer_observables(rho: &DensityMatrix, g2_floor: f64) -> Result<DimerObservables> {
    let s = site_dim_of(rho)?;
    let p = rho.populations();
    let (mut n1, mut n2, mut pairs1, mut cross) = (0.0, 0.0, 0.0, 0.0);
    for a in 0..s {
        for b in 0..s {
            let w = p[joint(s, a, b)];
            let (x, y) = (a as f64, b as f64);
            n1 += x * w;
            n2 += y * w;
            pairs1 += x * (x - 1.0) * w;
            cross += x * y * w;
        }
    }
    Ok(DimerObservables {
        n1,
        n2,
        g2_local: (n1 > g2_floor).then(|| pairs1 / (n1 * n1)),
        g2_12: (n1 > g2_floor && n2 > g2_floor).then(|| cross / (n1 * n2)),
    })
}

/// Reduced density matrix of `site` (0 or 1).
pub fn reduced_state(rho: &DensityMatrix, site: usize) -> Result<DensityMatrix> {
    let s = site_dim_of(rho)?;
    let d = rho.dim();
    let mut out = vec![Complex64::new(0.0, 0.0); s * s];
    for i in 0..s {
        for j in 0..s {
            out[i * s + j] = (0..s)
                .map(|k| {
                    let (r, c) = if site == 0 {
                        (joint(s, i, k), joint(s, j, k))
                    } else {
                        (joint(s, k, i), joint(s, k, j))
                    };
                    rho.entries()[r * d + c]
                })
                .sum();
        }
    }
    DensityMatrix::from_entries(s, out)
}

/// `ρ₁ ⊗ ρ₂` in the joint index order.
pub fn product_state(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<DensityMatrix> {
    let s = rho1.dim();
    if rho2.dim() != s {
        return Err(Error::DimensionMismatch {
            expected: s,
            found: rho2.dim(),
        });
    }
    let d = s * s;
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    for a in 0..s {
        for b in 0..s {
            for c in 0..s {
                for e in 0..s {
                    out[joint(s, a, b) * d + joint(s, c, e)] = rho1.get(a, c) * rho2.get(b, e);
                }
            }
        }
    }
    DensityMatrix::from_entries(d, out)
}

/// Largest entry of `SρS − ρ`, `S` the site swap.
pub fn exchange_asymmetry(rho: &DensityMatrix) -> Result<f64> {
    let s = site_dim_of(rho)?;
    let d = rho.dim();
    let swap = |k: usize| joint(s, k % s, k / s);
    let e = rho.entries();
    let mut worst = 0.0f64;
    for r in 0..d {
        for c in 0..d {
            worst = worst.max((e[swap(r) * d + swap(c)] - e[r * d + c]).norm());
        }
    }
    Ok(worst)
}

/// Joint population with either site at its cutoff.
fn joint_tail(rho: &DensityMatrix) -> f64 {
    let d = rho.dim();
    let s = (d as f64).sqrt().round() as usize;
    let p = rho.populations();
    (0..d)
        .filter(|&k| k / s == s - 1 || k % s == s - 1)
        .map(|k| p[k])
        .sum()
}

/// Stationary joint state at drive `f`. At `f = 0` this is the product of
/// thermal states (hopping conserves the total number), which avoids the wide
/// banded solve.
pub fn dimer_initial_state(dimer: &DimerParams, f: f64, tail_tol: f64) -> Result<DensityMatrix> {
    if f == 0.0 {
        let t = DensityMatrix::thermal(dimer.site_dim(), dimer.site.thermal_occupation)?;
        return product_state(&t, &t);
    }
    Ok(solve_steady_state(&build_dimer_generator(dimer)?, f, tail_tol)?.rho)
}

/// Sweep of the dimer; the embedded trace carries `n₁` and `g2_local`.
#[derive(Debug, Clone)]
pub struct DimerTrace {
    pub trace: HysteresisTrace,
    pub n2_up: Vec<f64>,
    pub n2_down: Vec<f64>,
    pub g2_12_up: Vec<Option<f64>>,
    pub g2_12_down: Vec<Option<f64>>,
    /// Largest `|n₁ − n₂|` over all samples.
    pub max_site_asymmetry: f64,
}

impl DimerTrace {
    /// Drive value of the `g2_12` maximum on each leg.
    /// Drive of the highest interior local maximum of `g2_12` on each leg.
    ///
    /// Endpoints are skipped: near `F = 0` the ratio is dominated by the
    /// vanishing denominators.
    pub fn g2_12_peaks(&self) -> (Option<f64>, Option<f64>) {
        let peak = |g: &[Option<f64>]| {
            (1..g.len().saturating_sub(1))
                .filter_map(|i| match (g[i - 1], g[i], g[i + 1]) {
                    (Some(l), Some(v), Some(r)) if v > l && v >= r => Some((i, v)),
                    _ => None,
                })
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(i, _)| self.trace.f_grid[i])
        };
        (peak(&self.g2_12_up), peak(&self.g2_12_down))
    }
}

pub fn dimer_sweep(
    rho0: &DensityMatrix,
    protocol: &SweepProtocol,
    dimer: &DimerParams,
    options: &EvolveOptions,
) -> Result<DimerTrace> {
    let gen = build_dimer_generator(dimer)?;
    let floor = options.g2_floor;
    let legs = sweep_generator(&gen, rho0, protocol, options, |rho| {
        let obs = dimer_observables(rho, floor).expect("joint dimension checked by the sweep");
        (obs, joint_tail(rho))
    })?;
    let split = |v: &[DimerObservables]| {
        (
            v.iter().map(|o| o.n1).collect::<Vec<_>>(),
            v.iter().map(|o| o.n2).collect::<Vec<_>>(),
            v.iter().map(|o| o.g2_local).collect::<Vec<_>>(),
            v.iter().map(|o| o.g2_12).collect::<Vec<_>>(),
        )
    };
    let (n1_up, n2_up, g2_up, g12_up) = split(&legs.up);
    let (n1_down, n2_down, g2_down, g12_down) = split(&legs.down);
    let max_site_asymmetry = n1_up
        .iter()
        .zip(&n2_up)
        .chain(n1_down.iter().zip(&n2_down))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(DimerTrace {
        trace: HysteresisTrace {
            f_grid: protocol.f_grid(),
            n_up: n1_up,
            n_down: n1_down,
            g2_up,
            g2_down,
            metadata: Some(TraceMetadata {
                params: dimer.site,
                protocol: *protocol,
                options: *options,
                stats: legs.stats,
                invariants: legs.invariants,
            }),
        },
        n2_up,
        n2_down,
        g2_12_up: g12_up,
        g2_12_down: g12_down,
        max_site_asymmetry,
    })
}

/// `dα_i/dt = −i[(−Δ − iγ/2 + U|α_i|²)α_i − Jα_j + F]`.
pub fn dimer_mf_rhs(alpha: [Complex64; 2], f: f64, dimer: &DimerParams) -> [Complex64; 2] {
    let p = &dimer.site;
    let local = |a: Complex64, other: Complex64| {
        let coeff = Complex64::new(-p.detuning + p.nonlinearity * a.norm_sqr(), -0.5 * p.dissipation);
        Complex64::new(0.0, -1.0) * (coeff * a - dimer.hopping * other + f)
    };
    [local(alpha[0], alpha[1]), local(alpha[1], alpha[0])]
}

/// Single-site parameters whose mean field equals the symmetric dimer's.
pub fn symmetric_site_params(dimer: &DimerParams) -> SystemParams {
    SystemParams {
        detuning: dimer.site.detuning + dimer.hopping,
        ..dimer.site
    }
}

/// Mean-field loop of the dimer started on the symmetric low branch; the
/// trace carries `n₁`.
pub fn dimer_mf_sweep(protocol: &SweepProtocol, dimer: &DimerParams) -> Result<HysteresisTrace> {
    protocol.validate()?;
    dimer.validate()?;
    let eff = symmetric_site_params(dimer);
    let a0 = steady_alpha(mf_roots(protocol.f0, &eff)[0], protocol.f0, &eff);
    let opts = Dopri5Options {
        tolerances: mean_field_tolerances(),
        ..Default::default()
    };
    let times = protocol.leg_times();
    let s = protocol.samples;
    let mut legs = [vec![0.0; s], vec![0.0; s]];
    let mut stats = IntegratorStats::default();
    let mut state = vec![a0, a0];
    for (leg, out) in legs.iter_mut().enumerate() {
        let (f_start, slope) = if leg == 0 {
            (protocol.f0, protocol.df / protocol.t_s)
        } else {
            (protocol.f_max(), -protocol.df / protocol.t_s)
        };
        let (end, st) = integrate(
            |t, y: &[Complex64], dy: &mut [Complex64]| {
                let r = dimer_mf_rhs([y[0], y[1]], f_start + slope * t, dimer);
                dy.copy_from_slice(&r);
            },
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
    let [n_up, n_down] = legs;
    let mut trace = HysteresisTrace::from_populations(protocol.f_grid(), n_up, n_down)?;
    trace.g2_up = vec![Some(1.0); s];
    trace.g2_down = vec![Some(1.0); s];
    trace.metadata = Some(TraceMetadata {
        params: dimer.site,
        protocol: *protocol,
        options: EvolveOptions {
            tolerances: opts.tolerances,
            ..Default::default()
        },
        stats,
        invariants: InvariantMonitor::exact(),
    });
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{observables, DEFAULT_G2_FLOOR, DEFAULT_TAIL_TOL};
    use crate::lindblad::single_mode_generator;
    use crate::mean_field::mf_sweep;
    use crate::analysis::hysteresis_area;

    fn dimer(delta: f64, u: f64, j: f64, n: usize) -> DimerParams {
        DimerParams::new(SystemParams::new(delta, u, n).unwrap(), j).unwrap()
    }

    #[test]
    fn joint_dimension_cap() {
        assert!(DimerParams::new(SystemParams::new(1.0, 1.0, 19).unwrap(), 1.0).is_ok());
        assert!(DimerParams::new(SystemParams::new(1.0, 1.0, 20).unwrap(), 1.0).is_err());
    }

    #[test]
    fn decoupled_steady_state_factorizes() {
        let d = dimer(1.5, 0.7, 0.0, 5);
        let joint = solve_steady_state(&build_dimer_generator(&d).unwrap(), 0.8, DEFAULT_TAIL_TOL).unwrap();
        let single = solve_steady_state(&single_mode_generator(&d.site).unwrap(), 0.8, DEFAULT_TAIL_TOL).unwrap();
        let prod = product_state(&single.rho, &single.rho).unwrap();
        let diff = joint
            .rho
            .entries()
            .iter()
            .zip(prod.entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-8, "{diff}");
        let obs = dimer_observables(&joint.rho, DEFAULT_G2_FLOOR).unwrap();
        assert!((obs.n1 - observables(&single.rho).n).abs() < 1e-8);
        assert!((obs.g2_12.unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn linear_dimer_matches_bonding_mode() {
        // U = 0: each site holds α = F/(Δ + J + iγ/2).
        let d = dimer(-0.5, 0.0, 1.2, 8);
        let f = 0.3;
        let ss = solve_steady_state(&build_dimer_generator(&d).unwrap(), f, DEFAULT_TAIL_TOL).unwrap();
        let obs = dimer_observables(&ss.rho, DEFAULT_G2_FLOOR).unwrap();
        let alpha = Complex64::new(f, 0.0) / Complex64::new(-0.5 + 1.2, 0.5);
        assert!((obs.n1 - alpha.norm_sqr()).abs() < 1e-9);
        assert!((obs.n2 - alpha.norm_sqr()).abs() < 1e-9);
    }

    #[test]
    fn observables_of_simple_states() {
        let s = 4;
        let coh = product_state(
            &DensityMatrix::coherent(s, Complex64::new(0.3, 0.1)),
            &DensityMatrix::coherent(s, Complex64::new(-0.2, 0.2)),
        )
        .unwrap();
        let obs = dimer_observables(&coh, DEFAULT_G2_FLOOR).unwrap();
        assert!((obs.g2_12.unwrap() - 1.0).abs() < 1e-12);
        let one_zero = product_state(&DensityMatrix::fock(s, 1).unwrap(), &DensityMatrix::vacuum(s)).unwrap();
        let obs = dimer_observables(&one_zero, DEFAULT_G2_FLOOR).unwrap();
        assert_eq!(obs.n1, 1.0);
        assert!(obs.g2_12.is_none());
        let r = reduced_state(&coh, 1).unwrap();
        let c = DensityMatrix::coherent(s, Complex64::new(-0.2, 0.2));
        assert!(r.entries().iter().zip(c.entries()).all(|(a, b)| (a - b).norm() < 1e-14));
    }

    #[test]
    fn zero_drive_initial_state_is_stationary() {
        let d = DimerParams::new(SystemParams::new(-1.0, 2.0, 3).unwrap().with_thermal_occupation(0.1).unwrap(), 3.0).unwrap();
        let rho = dimer_initial_state(&d, 0.0, DEFAULT_TAIL_TOL).unwrap();
        let r = dimer_rhs(&rho, 0.0, &d).unwrap();
        assert!(r.entries().iter().all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn symmetric_sweep_keeps_sites_equal() {
        let d = dimer(-1.0, 2.0, 3.0, 3);
        let proto = SweepProtocol::from_rate(0.0, 2.5, 5.0).unwrap().with_samples(21).unwrap();
        let tr = dimer_sweep(&DensityMatrix::vacuum(16), &proto, &d, &EvolveOptions::default()).unwrap();
        assert!(tr.max_site_asymmetry < 1e-10);
        let gen = build_dimer_generator(&d).unwrap();
        let ss = solve_steady_state(&gen, 1.3, DEFAULT_TAIL_TOL).unwrap();
        assert!(exchange_asymmetry(&ss.rho).unwrap() < 1e-10);
    }

    #[test]
    fn symmetric_mean_field_reduces_to_one_site() {
        let d = dimer(-1.0, 2.0, 3.0, 3);
        let proto = SweepProtocol::from_rate(0.0, 2.5, 20.0).unwrap();
        let a = hysteresis_area(&dimer_mf_sweep(&proto, &d).unwrap()).unwrap();
        let b = hysteresis_area(&mf_sweep(&proto, &symmetric_site_params(&d)).unwrap()).unwrap();
        assert!((a - b).abs() < 1e-8 * b.max(1.0));
    }
}
