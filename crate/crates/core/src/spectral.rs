//! Liouvillian spectra: steady state, least-damped mode and the transition.
//!
//! Eigenvalues are computed from the real matrix of `L` in the orthonormal
//! Hermitian basis `{E_kk, (E_nm + E_mn)/√2, i(E_nm − E_mn)/√2}`. `L` maps
//! Hermitian matrices to Hermitian matrices, so this matrix is real and its
//! spectrum is that of the complex superoperator, with conjugate pairs and real
//! eigenvalues preserved exactly.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::SystemParams;
use crate::generator::LindbladGenerator;
use crate::lindblad::single_mode_generator;
use crate::scan::par_map;

/// Largest `|Im λ|` for the least-damped mode to count as soft.
pub const IM_TOL: f64 = 1e-8;
/// Largest `|λ|` identified with the steady state.
pub const NULL_TOL: f64 = 1e-9;

/// Dense row-major superoperator on `vec(ρ)` with index `n·d + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    pub dim: usize,
    pub entries: Vec<Complex64>,
}

impl Superoperator {
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|r| {
                self.entries[r * self.dim..(r + 1) * self.dim]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }
}

/// Complex matrix `L(F)` with `L·vec(ρ) = vec(dρ/dt)`.
pub fn build_liouvillian(f: f64, params: &SystemParams) -> Result<Superoperator> {
    Ok(superoperator(&single_mode_generator(params)?, f))
}

pub fn superoperator(gen: &LindbladGenerator, f: f64) -> Superoperator {
    let n = gen.dim() * gen.dim();
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    for (r, c, v) in gen.superoperator_triplets(f) {
        entries[r * n + c] += v;
    }
    Superoperator { dim: n, entries }
}

/// Coordinates of a Hermitian matrix in the orthonormal Hermitian basis,
/// ordered as diagonal entries, then `(n, m)` pairs with `n < m`.
fn hermitian_coordinates(d: usize, rho: &[Complex64], out: &mut [f64]) {
    let s = std::f64::consts::SQRT_2;
    for k in 0..d {
        out[k] = rho[k * d + k].re;
    }
    let mut p = d;
    for n in 0..d {
        for m in (n + 1)..d {
            let v = rho[n * d + m];
            out[p] = s * v.re;
            out[p + 1] = s * v.im;
            p += 2;
        }
    }
}

fn hermitian_basis_element(d: usize, index: usize, out: &mut [Complex64]) {
    out.fill(Complex64::new(0.0, 0.0));
    if index < d {
        out[index * d + index] = Complex64::new(1.0, 0.0);
        return;
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut p = d;
    for n in 0..d {
        for m in (n + 1)..d {
            if index == p {
                out[n * d + m] = Complex64::new(h, 0.0);
                out[m * d + n] = Complex64::new(h, 0.0);
                return;
            }
            if index == p + 1 {
                out[n * d + m] = Complex64::new(0.0, h);
                out[m * d + n] = Complex64::new(0.0, -h);
                return;
            }
            p += 2;
        }
    }
}

/// Real representation of `L(F)` in the Hermitian basis, row-major.
pub fn real_liouvillian(gen: &LindbladGenerator, f: f64) -> Mat<f64> {
    let d = gen.dim();
    let n = d * d;
    let mut basis = vec![Complex64::new(0.0, 0.0); n];
    let mut image = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    let mut coords = vec![0.0; n];
    let mut m = Mat::<f64>::zeros(n, n);
    for b in 0..n {
        hermitian_basis_element(d, b, &mut basis);
        gen.apply_hermitian(f, &basis, &mut image, &mut scratch);
        hermitian_coordinates(d, &image, &mut coords);
        for (a, v) in coords.iter().enumerate() {
            m[(a, b)] = *v;
        }
    }
    m
}

/// Liouvillian spectrum at one drive value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub f: f64,
    /// Sorted by descending real part, then descending imaginary part.
    pub eigenvalues: Vec<Complex64>,
    pub lambda_null: Complex64,
    /// Least-damped non-null eigenvalue; the member with `Im ≥ 0` of a pair.
    pub lambda_slow: Complex64,
    pub tau_r: f64,
    pub soft_mode: bool,
    /// `λ_slow*` is also an eigenvalue (to `IM_TOL` relative accuracy).
    pub conjugate_pair: bool,
}

pub fn spectrum_of(gen: &LindbladGenerator, f: f64) -> Result<SpectralResult> {
    let m = real_liouvillian(gen, f);
    let mut ev: Vec<Complex64> = m
        .eigenvalues()
        .map_err(|_| Error::EigensolverFailure)?
        .into_iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect();
    classify(f, &mut ev)
}

fn classify(f: f64, ev: &mut Vec<Complex64>) -> Result<SpectralResult> {
    ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    let nulls: Vec<usize> = (0..ev.len()).filter(|&i| ev[i].norm() < NULL_TOL).collect();
    if nulls.len() != 1 {
        return Err(Error::NullSpaceCount(nulls.len()));
    }
    let null = nulls[0];
    let slow_idx = (0..ev.len())
        .filter(|&i| i != null)
        .max_by(|&a, &b| ev[a].re.total_cmp(&ev[b].re).then(ev[a].im.total_cmp(&ev[b].im)))
        .ok_or(Error::EigensolverFailure)?;
    let slow = ev[slow_idx];
    if !(slow.re < 0.0) {
        return Err(Error::EigensolverFailure);
    }
    let soft_mode = slow.im.abs() < IM_TOL;
    let conjugate_pair = !soft_mode
        && ev
            .iter()
            .enumerate()
            .any(|(i, z)| i != slow_idx && (z - slow.conj()).norm() < IM_TOL.max(1e-10 * slow.norm()));
    Ok(SpectralResult {
        f,
        eigenvalues: ev.clone(),
        lambda_null: ev[null],
        lambda_slow: slow,
        tau_r: -1.0 / slow.re,
        soft_mode,
        conjugate_pair,
    })
}

pub fn liouvillian_spectrum(f: f64, params: &SystemParams) -> Result<SpectralResult> {
    spectrum_of(&single_mode_generator(params)?, f)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionData {
    pub f_c: f64,
    pub tau_t: f64,
    /// Grid interval around the maximum on which the slow mode is soft.
    pub soft_window: Option<(f64, f64)>,
    pub argmax_index: usize,
}

/// Refines the `τ_R` maximum with a parabola through `ln τ_R` at the grid
/// maximum and its neighbours.
pub fn locate_transition(results: &[SpectralResult]) -> Result<TransitionData> {
    if results.is_empty() {
        return Err(Error::InvalidParameter("empty spectral scan".into()));
    }
    let i = (0..results.len())
        .max_by(|&a, &b| results[a].tau_r.total_cmp(&results[b].tau_r))
        .expect("non-empty");
    let (mut f_c, mut tau_t) = (results[i].f, results[i].tau_r);
    if i > 0 && i + 1 < results.len() {
        let (x0, x1, x2) = (results[i - 1].f, results[i].f, results[i + 1].f);
        let (y0, y1, y2) = (results[i - 1].tau_r.ln(), results[i].tau_r.ln(), results[i + 1].tau_r.ln());
        let d01 = (y1 - y0) / (x1 - x0);
        let d12 = (y2 - y1) / (x2 - x1);
        let curv = (d12 - d01) / (x2 - x0);
        if curv < 0.0 {
            let xv = 0.5 * (x0 + x1) - d01 / (2.0 * curv);
            let xv = xv.clamp(x0, x2);
            // Newton form through the three points.
            let yv = y0 + d01 * (xv - x0) + curv * (xv - x0) * (xv - x1);
            f_c = xv;
            tau_t = yv.exp().max(tau_t);
        }
    }
    let soft_window = results[i].soft_mode.then(|| {
        let mut lo = i;
        while lo > 0 && results[lo - 1].soft_mode {
            lo -= 1;
        }
        let mut hi = i;
        while hi + 1 < results.len() && results[hi + 1].soft_mode {
            hi += 1;
        }
        (results[lo].f, results[hi].f)
    });
    Ok(TransitionData {
        f_c,
        tau_t,
        soft_window,
        argmax_index: i,
    })
}

/// Spectra over `f_grid` on `jobs` workers, with the transition extracted.
pub fn slow_mode_scan(f_grid: &[f64], params: &SystemParams, jobs: usize) -> Result<(Vec<SpectralResult>, TransitionData)> {
    let gen = single_mode_generator(params)?;
    let results = par_map(jobs, f_grid, |&f| spectrum_of(&gen, f))?;
    let transition = locate_transition(&results)?;
    Ok((results, transition))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::lindblad_rhs;
    use crate::fock::DensityMatrix;
    use crate::steady_state::steady_state_numeric;

    fn random_matrix(d: usize, seed: u64) -> Vec<Complex64> {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        (0..d * d).map(|_| Complex64::new(next(), next())).collect()
    }

    #[test]
    fn superoperator_matches_rhs_on_random_matrices() {
        let p = SystemParams::new(2.0, 0.3, 5).unwrap().with_thermal_occupation(0.1).unwrap();
        let l = build_liouvillian(1.3, &p).unwrap();
        for seed in 0..10 {
            let x = random_matrix(6, seed);
            let rho = DensityMatrix::from_entries(6, x.clone()).unwrap();
            let direct = lindblad_rhs(&rho, 1.3, &p).unwrap();
            for (a, b) in l.apply(&x).iter().zip(direct.entries()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn two_level_truncation_spectrum() {
        let p = SystemParams::new(0.7, 0.0, 1).unwrap();
        let r = liouvillian_spectrum(0.0, &p).unwrap();
        let expect = [
            Complex64::new(0.0, 0.0),
            Complex64::new(-0.5, 0.7),
            Complex64::new(-0.5, -0.7),
            Complex64::new(-1.0, 0.0),
        ];
        for (a, b) in r.eigenvalues.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
        assert!((r.lambda_slow - expect[1]).norm() < 1e-12);
        assert!(r.conjugate_pair && !r.soft_mode);
        assert!((r.tau_r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn trace_is_left_null_vector_and_steady_state_is_right_null_vector() {
        let p = SystemParams::new(2.0, 0.5, 8).unwrap();
        let l = build_liouvillian(1.2, &p).unwrap();
        let d = 9;
        for c in 0..l.dim {
            let s: Complex64 = (0..d).map(|k| l.get(k * d + k, c)).sum();
            assert!(s.norm() < 1e-13);
        }
        let rho = steady_state_numeric(1.2, &p).unwrap();
        let r = l.apply(rho.entries());
        assert!(r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() < 1e-10);
    }

    #[test]
    fn spectrum_closure_and_unique_null() {
        let p = SystemParams::new(2.0, 0.5, 10).unwrap();
        let r = liouvillian_spectrum(1.4, &p).unwrap();
        for z in &r.eigenvalues {
            if z.im.abs() > 1e-9 {
                assert!(r.eigenvalues.iter().any(|w| (w - z.conj()).norm() < 1e-8));
            }
        }
        assert!(r.eigenvalues.iter().filter(|z| z.norm() < NULL_TOL).count() == 1);
        assert!(r.tau_r > 0.0);
    }

    #[test]
    fn transition_refinement_on_synthetic_peak() {
        let mk = |f: f64, tau: f64, soft: bool| SpectralResult {
            f,
            eigenvalues: vec![],
            lambda_null: Complex64::new(0.0, 0.0),
            lambda_slow: Complex64::new(-1.0 / tau, 0.0),
            tau_r: tau,
            soft_mode: soft,
            conjugate_pair: false,
        };
        let results: Vec<SpectralResult> = (0..21)
            .map(|i| {
                let f = 2.0 + 0.1 * i as f64;
                mk(f, (5.0 - 3.0 * (f - 3.03).powi(2)).exp(), (f - 3.0).abs() < 0.5)
            })
            .collect();
        let t = locate_transition(&results).unwrap();
        assert!((t.f_c - 3.03).abs() < 1e-9);
        assert!((t.tau_t - 5f64.exp()).abs() < 1e-6);
        let (a, b) = t.soft_window.unwrap();
        assert!(a <= t.f_c && t.f_c <= b);
    }
}
