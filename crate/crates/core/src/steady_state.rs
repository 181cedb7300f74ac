//! Stationary states: the analytic zero-temperature coherence and a banded
//! null-space solver for the full Liouvillian.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::banded::{BandLu, BandMatrix};
use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, InvariantReport, SystemParams, DEFAULT_TAIL_TOL};
use crate::generator::LindbladGenerator;
use crate::lindblad::single_mode_generator;

const HYP_REL_TOL: f64 = 1e-16;
const HYP_MAX_TERMS: usize = 100_000;

/// Arguments of the hypergeometric ratio entering the analytic coherence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypergeometricParams {
    /// `c = −2(Δ + iγ/2)/U`.
    pub c: Complex64,
    /// `z = 8|F/U|²`.
    pub z: f64,
}

impl HypergeometricParams {
    pub fn new(f: f64, params: &SystemParams) -> Result<Self> {
        let u = params.nonlinearity;
        if u == 0.0 {
            return Err(Error::InvalidParameter("analytic coherence needs U ≠ 0".into()));
        }
        let c = Complex64::new(params.detuning, 0.5 * params.dissipation) * (-2.0 / u);
        let z = 8.0 * (f / u).powi(2);
        if !z.is_finite() {
            return Err(Error::InvalidParameter("hypergeometric argument is not finite".into()));
        }
        Ok(Self { c, z })
    }
}

fn is_pole(c: Complex64) -> bool {
    c.im == 0.0 && c.re <= 0.0 && c.re == c.re.round()
}

/// `𝓕(c, d, z) = Σ_n Γ(c)Γ(d)/(Γ(c+n)Γ(d+n)) zⁿ/n!`, summed by term recurrence.
pub fn hypergeometric_f(c: Complex64, d: Complex64, z: f64) -> Result<Complex64> {
    if is_pole(c) || is_pole(d) {
        return Err(Error::HypergeometricPole(format!("c = {c}, d = {d}")));
    }
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut small = 0;
    for n in 0..HYP_MAX_TERMS {
        let k = n as f64;
        term *= z / ((c + k) * (d + k) * (k + 1.0));
        sum += term;
        if !sum.re.is_finite() || !sum.im.is_finite() {
            return Err(Error::HypergeometricNonConvergence(n + 1));
        }
        if term.norm() < HYP_REL_TOL * sum.norm() {
            small += 1;
            if small == 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
        if z == 0.0 {
            return Ok(sum);
        }
    }
    Err(Error::HypergeometricNonConvergence(HYP_MAX_TERMS))
}

/// Zero-temperature stationary coherence
/// `⟨a⟩ = F/(Δ + iγ/2) · 𝓕(1+c, c*, z)/𝓕(c, c*, z)`.
pub fn dw_coherence(f: f64, params: &SystemParams) -> Result<Complex64> {
    if params.thermal_occupation != 0.0 {
        return Err(Error::InvalidParameter(
            "analytic coherence is only valid at n_th = 0".into(),
        ));
    }
    let hp = HypergeometricParams::new(f, params)?;
    if f == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let num = hypergeometric_f(hp.c + 1.0, hp.c.conj(), hp.z)?;
    let den = hypergeometric_f(hp.c, hp.c.conj(), hp.z)?;
    Ok(Complex64::new(f, 0.0) / Complex64::new(params.detuning, 0.5 * params.dissipation) * num / den)
}

/// Smallest accepted `σ_min/‖B‖` of the pinned system.
pub const DEGENERACY_MARGIN: f64 = 1e-12;
/// Accepted `‖Lρ‖/‖L‖`.
pub const RESIDUAL_BOUND: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateInfo {
    /// `‖Lρ‖_F / ‖L‖_F`.
    pub relative_residual: f64,
    /// `σ_min/‖B‖_F` of the pinned system; near zero signals a second null vector.
    pub margin: f64,
    pub pinned_index: usize,
    pub invariants: InvariantReport,
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    pub info: SteadyStateInfo,
}

/// Assembles the superoperator at drive `f` in band storage.
pub fn banded_liouvillian(gen: &LindbladGenerator, f: f64) -> Result<BandMatrix> {
    let d = gen.dim();
    let (kl, ku) = gen.superoperator_bandwidth();
    let mut band = BandMatrix::zeros(d * d, kl, ku);
    for (r, c, v) in gen.superoperator_triplets(f) {
        band.add(r, c, v)?;
    }
    Ok(band)
}

/// Pinned factorization of `L(f)` together with its normalized null vector.
struct PinnedSolve {
    lu: BandLu,
    pinned: usize,
    margin: f64,
    rho: DensityMatrix,
}

/// One row of `L` is replaced by the functional `ρ_kk = 1`; the solution is then
/// rescaled by its trace. The first pass pins the vacuum population. A pin whose
/// population is negligible makes the pinned system nearly singular and its
/// solution noise, so the solve is repeated at the largest population found
/// (or at fallback indices) until the pinned population dominates.
fn pinned_solve(gen: &LindbladGenerator, lband: &BandMatrix) -> Result<PinnedSolve> {
    let d = gen.dim();
    let solve_pinned = |k: usize| -> Result<(BandLu, Vec<Complex64>, f64)> {
        let p = k * d + k;
        let mut b = lband.clone();
        b.pin_row(p);
        let b_norm = b.frobenius_norm();
        let lu = b.factorize().map_err(|e| match e {
            Error::Singular(_) => Error::DegenerateSteadyState { margin: 0.0 },
            other => other,
        })?;
        let margin = lu.smallest_singular_value(4) / b_norm;
        let mut x = vec![Complex64::new(0.0, 0.0); d * d];
        x[p] = Complex64::new(1.0, 0.0);
        lu.solve(&mut x);
        Ok((lu, x, margin))
    };

    let fallbacks = [d / 2, d / 4, 3 * d / 4];
    let mut tried: Vec<usize> = Vec::new();
    let mut best: Option<(usize, BandLu, Vec<Complex64>, f64)> = None;
    let mut next = Some(0);
    while let Some(k) = next {
        let (lu, x, margin) = solve_pinned(k)?;
        tried.push(k);
        let pops: Vec<f64> = (0..d).map(|i| x[i * d + i].re).collect();
        let finite = pops.iter().all(|v| v.is_finite());
        let (kmax, pmax) = pops
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &p)| if p > acc.1 { (i, p) } else { acc });
        if finite && margin >= DEGENERACY_MARGIN && pops[k] >= 1e-3 * pmax {
            best = Some((k, lu, x, margin));
            break;
        }
        if best.as_ref().map_or(true, |b| margin > b.3) {
            best = Some((k, lu, x, margin));
        }
        next = if finite && !tried.contains(&kmax) {
            Some(kmax)
        } else {
            fallbacks.iter().copied().find(|f| !tried.contains(f))
        };
    }
    let (pinned, lu, x, margin) = best.expect("at least one pinned solve");
    if !(margin >= DEGENERACY_MARGIN) {
        return Err(Error::DegenerateSteadyState { margin });
    }
    let rho = DensityMatrix::from_entries(d, x)?.hermitize_normalized();
    Ok(PinnedSolve { lu, pinned, margin, rho })
}

impl PinnedSolve {
    /// Traceless `x` with `L x = b` for traceless `b`. The pinned row is one of
    /// the population equations, which is implied by the others once `Tr b = 0`.
    fn solve_traceless(&self, b: &mut [Complex64]) {
        let d = self.rho.dim();
        b[self.pinned * d + self.pinned] = Complex64::new(0.0, 0.0);
        self.lu.solve(b);
        let tr: Complex64 = (0..d).map(|k| b[k * d + k]).sum();
        for (v, r) in b.iter_mut().zip(self.rho.entries()) {
            *v -= tr * r;
        }
    }
}

/// Null vector of `L(f)` normalized to unit trace.
pub fn solve_steady_state(gen: &LindbladGenerator, f: f64, tail_tol: f64) -> Result<SteadyState> {
    let d = gen.dim();
    let lband = banded_liouvillian(gen, f)?;
    let l_norm = lband.frobenius_norm();
    let PinnedSolve { pinned, margin, rho, .. } = pinned_solve(gen, &lband)?;

    let mut lr = vec![Complex64::new(0.0, 0.0); d * d];
    gen.apply(f, rho.entries(), &mut lr);
    let res = lr.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let relative_residual = res / l_norm;
    if !(relative_residual < RESIDUAL_BOUND) {
        return Err(Error::SteadyStateResidual {
            residual: relative_residual,
            bound: RESIDUAL_BOUND,
        });
    }
    let invariants = rho.check(tail_tol);
    Ok(SteadyState {
        rho,
        info: SteadyStateInfo {
            relative_residual,
            margin,
            pinned_index: pinned,
            invariants,
        },
    })
}

/// First-order adiabatic lag of the population, `g(F) = Tr[n L⁻² V ρ_ss]`
/// with `V = ∂L/∂F`.
///
/// For a slow sweep `ρ(t) = ρ_ss(F) + Ḟ L⁻¹∂_Fρ_ss + O(Ḟ²)` and
/// `∂_Fρ_ss = −L⁻¹Vρ_ss`, so the population on a leg with rate `Ḟ` is
/// `n_ss(F) − Ḟ g(F)`.
pub fn adiabatic_lag(gen: &LindbladGenerator, f: f64) -> Result<f64> {
    let d = gen.dim();
    let lband = banded_liouvillian(gen, f)?;
    let solve = pinned_solve(gen, &lband)?;
    let rho = solve.rho.entries();
    let mut at_f = vec![Complex64::new(0.0, 0.0); d * d];
    let mut b = vec![Complex64::new(0.0, 0.0); d * d];
    gen.apply(f + 1.0, rho, &mut b);
    gen.apply(f, rho, &mut at_f);
    for (x, y) in b.iter_mut().zip(&at_f) {
        *x -= y;
    }
    solve.solve_traceless(&mut b);
    solve.solve_traceless(&mut b);
    Ok((0..d).map(|k| k as f64 * b[k * d + k].re).sum())
}

/// Slow-sweep limit of `A·t_s/ΔF` over `[f_min, f_max]`, i.e. the
/// characteristic time `τ = 2∫|g(F)| dF`, by composite Simpson on `intervals`
/// (rounded up to even) subintervals.
pub fn adiabatic_tau(gen: &LindbladGenerator, f_min: f64, f_max: f64, intervals: usize) -> Result<f64> {
    if !(f_max > f_min) || intervals == 0 {
        return Err(Error::InvalidParameter("adiabatic_tau needs f_max > f_min and intervals > 0".into()));
    }
    let m = intervals + intervals % 2;
    let h = (f_max - f_min) / m as f64;
    let mut sum = 0.0;
    for i in 0..=m {
        let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * adiabatic_lag(gen, f_min + h * i as f64)?.abs();
    }
    Ok(2.0 * sum * h / 3.0)
}

/// Stationary density matrix of the single resonator at drive `f`.
pub fn steady_state_numeric(f: f64, params: &SystemParams) -> Result<DensityMatrix> {
    Ok(steady_state_detailed(f, params)?.rho)
}

pub fn steady_state_detailed(f: f64, params: &SystemParams) -> Result<SteadyState> {
    let gen = single_mode_generator(params)?;
    solve_steady_state(&gen, f, DEFAULT_TAIL_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherence, observables};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hypergeometric_at_zero_is_one() {
        for (a, b) in [(c(1.0, 0.0), c(2.5, -1.0)), (c(-3.5, 2.0), c(0.3, 0.0))] {
            assert_eq!(hypergeometric_f(a, b, 0.0).unwrap(), c(1.0, 0.0));
        }
    }

    #[test]
    fn hypergeometric_unit_arguments_match_direct_sum() {
        // Oracle: 30 terms of Σ 1/(n!)³ with factorials built independently.
        let mut fact = 1.0f64;
        let mut oracle = 0.0;
        for n in 0..30 {
            if n > 0 {
                fact *= n as f64;
            }
            oracle += 1.0 / fact.powi(3);
        }
        let v = hypergeometric_f(c(1.0, 0.0), c(1.0, 0.0), 1.0).unwrap();
        assert!((v.re - oracle).abs() < 1e-14 && v.im == 0.0);
        assert!((oracle - 2.129_702_548_983).abs() < 1e-11);
    }

    #[test]
    fn hypergeometric_conjugate_symmetry() {
        let a = c(1.0, 2.0);
        for z in [0.3, 2.0, 17.0] {
            let v = hypergeometric_f(a, a.conj(), z).unwrap();
            let w = hypergeometric_f(a.conj(), a, z).unwrap();
            assert!((w - v.conj()).norm() < 1e-13 * v.norm());
            let r = hypergeometric_f(a + 1.0, a.conj(), z).unwrap();
            let rc = hypergeometric_f(a.conj() + 1.0, a, z).unwrap();
            assert!((rc - r.conj()).norm() < 1e-13 * r.norm());
        }
    }

    #[test]
    fn hypergeometric_pole_guard() {
        assert!(matches!(hypergeometric_f(c(-2.0, 0.0), c(1.0, 0.0), 1.0), Err(Error::HypergeometricPole(_))));
        assert!(matches!(hypergeometric_f(c(1.0, 0.0), c(0.0, 0.0), 1.0), Err(Error::HypergeometricPole(_))));
        assert!(hypergeometric_f(c(-2.0, 1e-3), c(1.0, 0.0), 1.0).is_ok());
    }

    #[test]
    fn analytic_coherence_limits() {
        let p = SystemParams::new(2.0, 1e-3, 10).unwrap();
        assert_eq!(dw_coherence(0.0, &p).unwrap(), c(0.0, 0.0));
        let lin = c(0.1, 0.0) / c(2.0, 0.5);
        let v = dw_coherence(0.1, &p).unwrap();
        assert!((v - lin).norm() < 0.01 * lin.norm());
        assert!(dw_coherence(0.1, &SystemParams::new(2.0, 0.0, 10).unwrap()).is_err());
        let hot = p.with_thermal_occupation(0.1).unwrap();
        assert!(dw_coherence(0.1, &hot).is_err());
    }

    #[test]
    fn analytic_coherence_matches_null_space() {
        let p = SystemParams::new(2.0, 0.1, 60).unwrap();
        let rho = steady_state_numeric(2.0, &p).unwrap();
        let numeric = coherence(&rho);
        let analytic = dw_coherence(2.0, &p).unwrap();
        assert!((numeric - analytic).norm() < 1e-6, "{numeric} vs {analytic}");
    }

    #[test]
    fn repins_when_vacuum_population_is_roundoff() {
        // Vacuum population ~1e-15 here; pinning it alone yields noise.
        let p = SystemParams::new(2.0, 0.1, 80).unwrap();
        let s = steady_state_detailed(5.158, &p).unwrap();
        assert_ne!(s.info.pinned_index, 0);
        let dev = (coherence(&s.rho) - dw_coherence(5.158, &p).unwrap()).norm();
        assert!(dev < 1e-8, "{dev}");
    }

    #[test]
    fn adiabatic_lag_of_linear_cavity() {
        // U = 0: α = cF with c = 1/(Δ + iγ/2); the first-order lag of |α|² is
        // −Ḟ·Fγ|c|⁴.
        let p = SystemParams::new(1.0, 0.0, 20).unwrap();
        let gen = single_mode_generator(&p).unwrap();
        let f = 0.7;
        let c4 = 1.0 / (1.0f64 + 0.25).powi(2);
        assert!((adiabatic_lag(&gen, f).unwrap() - f * c4).abs() < 1e-10);
        // τ = 2∫₀¹ F|c|⁴ dF = |c|⁴.
        assert!((adiabatic_tau(&gen, 0.0, 1.0, 8).unwrap() - c4).abs() < 1e-10);
    }

    #[test]
    fn zero_drive_steady_states() {
        let p = SystemParams::new(2.0, 0.5, 8).unwrap();
        let vac = steady_state_numeric(0.0, &p).unwrap();
        assert!((vac.get(0, 0).re - 1.0).abs() < 1e-12);
        let hot = SystemParams::new(2.0, 0.5, 30).unwrap().with_thermal_occupation(0.2).unwrap();
        let s = steady_state_detailed(0.0, &hot).unwrap();
        assert!((observables(&s.rho).n - 0.2).abs() < 1e-12);
        assert!(s.info.margin > DEGENERACY_MARGIN);
        assert!(s.info.invariants.is_physical());
    }
}
