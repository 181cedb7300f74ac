//! Truncated Fock-space representation of a single bosonic mode.
//!
//! All frequencies are measured in units of the dissipation rate `γ`, which is
//! fixed to one by [`SystemParams::new`]. Matrices are stored dense and
//! row-major; a cutoff `N` gives matrices of dimension `N + 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum entrywise `|ρ − ρ†|` accepted for a valid density matrix.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Maximum `|Tr ρ − 1|` accepted after any solver returns.
pub const TRACE_TOL: f64 = 1e-9;
/// Most negative diagonal entry tolerated as numerical noise.
pub const POSITIVITY_TOL: f64 = 1e-12;
/// Default bound on the top Fock population `ρ_{N,N}`.
pub const DEFAULT_TAIL_TOL: f64 = 1e-8;
/// Population below which `g2` is reported as undefined.
pub const DEFAULT_G2_FLOOR: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Physical parameters of one Kerr resonator in the frame rotating at the pump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Pump-cavity detuning `Δ = ω_p − ω_c`.
    pub detuning: f64,
    /// Kerr nonlinearity `U`.
    pub nonlinearity: f64,
    /// Dissipation rate `γ`.
    pub dissipation: f64,
    /// Mean thermal occupation of the bath at the cavity frequency.
    pub thermal_occupation: f64,
    /// Fock cutoff `N`; matrices have dimension `N + 1`.
    pub cutoff: usize,
}

impl SystemParams {
    /// Zero-temperature parameters with `γ = 1`.
    pub fn new(detuning: f64, nonlinearity: f64, cutoff: usize) -> Result<Self> {
        let p = Self {
            detuning,
            nonlinearity,
            dissipation: 1.0,
            thermal_occupation: 0.0,
            cutoff,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_thermal_occupation(mut self, n_th: f64) -> Result<Self> {
        self.thermal_occupation = n_th;
        self.validate()?;
        Ok(self)
    }

    /// Sets the thermal occupation from the bath parameter `βω_c`, using
    /// `n_th = 1 / (exp(βω_c) − 1)`. Infinite `βω_c` is the zero-temperature limit.
    pub fn with_bath(self, beta_omega_c: f64) -> Result<Self> {
        if beta_omega_c.is_nan() || beta_omega_c <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "βω_c must be positive, got {beta_omega_c}"
            )));
        }
        self.with_thermal_occupation(thermal_occupation_from_bath(beta_omega_c))
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Result<Self> {
        self.cutoff = cutoff;
        self.validate()?;
        Ok(self)
    }

    /// Hilbert-space dimension `N + 1`.
    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.detuning,
            self.nonlinearity,
            self.dissipation,
            self.thermal_occupation,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        if self.dissipation <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "dissipation must be positive, got {}",
                self.dissipation
            )));
        }
        if self.thermal_occupation < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "thermal occupation must be non-negative, got {}",
                self.thermal_occupation
            )));
        }
        if self.cutoff < 1 {
            return Err(Error::InvalidParameter("cutoff must be at least 1".into()));
        }
        Ok(())
    }
}

/// Bose occupation `1 / (exp(x) − 1)` of a bath with `x = βω_c`.
pub fn thermal_occupation_from_bath(beta_omega_c: f64) -> f64 {
    1.0 / beta_omega_c.exp_m1()
}

/// Dense square complex matrix acting on a truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    dim: usize,
    entries: Vec<Complex64>,
}

impl FockOperator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zeros(dim);
        for i in 0..dim {
            op.entries[i * dim + i] = ONE;
        }
        op
    }

    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(Self { dim, entries })
    }

    /// `a` with `a[n−1, n] = √n`.
    pub fn annihilation(dim: usize) -> Self {
        let mut op = Self::zeros(dim);
        for n in 1..dim {
            op.entries[(n - 1) * dim + n] = Complex64::new((n as f64).sqrt(), 0.0);
        }
        op
    }

    pub fn creation(dim: usize) -> Self {
        Self::annihilation(dim).adjoint()
    }

    pub fn number(dim: usize) -> Self {
        let mut op = Self::zeros(dim);
        for n in 0..dim {
            op.entries[n * dim + n] = Complex64::new(n as f64, 0.0);
        }
        op
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.entries[j * d + i] = self.entries[i * d + j].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "operator dimensions differ");
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.entries[i * d + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..d {
                    out.entries[i * d + j] += a * other.entries[k * d + j];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "operator dimensions differ");
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * factor).collect(),
        }
    }

    /// `self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other)
            .add(&other.matmul(self).scale(Complex64::new(-1.0, 0.0)))
    }

    /// Largest entrywise `|O − O†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(self.dim, &self.entries)
    }

    pub fn is_diagonal(&self) -> bool {
        let d = self.dim;
        (0..d).all(|i| (0..d).all(|j| i == j || self.entries[i * d + j] == ZERO))
    }
}

/// The operator set every model needs, built once per parameter set.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub a: FockOperator,
    pub a_dag: FockOperator,
    pub number: FockOperator,
    /// `−Δ a†a + (U/2) a†a†aa`.
    pub hamiltonian_static: FockOperator,
    /// `a† + a`, multiplied by the real drive amplitude `F(t)`.
    pub drive_coupling: FockOperator,
}

/// Builds the rotating-frame operators for `params`.
pub fn build_operators(params: &SystemParams) -> Result<OperatorSet> {
    params.validate()?;
    let d = params.dim();
    let a = FockOperator::annihilation(d);
    let a_dag = a.adjoint();
    // Diagonal operators are filled from exact integers rather than products
    // of square roots.
    let number = FockOperator::number(d);
    let mut hamiltonian_static = FockOperator::zeros(d);
    for (n, e) in static_energies(params).into_iter().enumerate() {
        hamiltonian_static.entries[n * d + n] = Complex64::new(e, 0.0);
    }
    let drive_coupling = a_dag.add(&a);
    Ok(OperatorSet {
        a,
        a_dag,
        number,
        hamiltonian_static,
        drive_coupling,
    })
}

/// Diagonal of the static Hamiltonian, `E_n = −Δ n + (U/2) n(n − 1)`.
pub fn static_energies(params: &SystemParams) -> Vec<f64> {
    (0..params.dim())
        .map(|n| {
            let n = n as f64;
            -params.detuning * n + 0.5 * params.nonlinearity * n * (n - 1.0)
        })
        .collect()
}

/// Density matrix expressed in a truncated Fock basis, `ρ_{n,m} = ⟨n|ρ|m⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

/// Outcome of checking the density-matrix invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub trace_error: f64,
    pub hermiticity_defect: f64,
    pub min_diagonal: f64,
    pub tail_population: f64,
    pub cutoff_safe: bool,
}

impl InvariantReport {
    /// Trace, Hermiticity and positivity all within the module tolerances.
    pub fn is_physical(&self) -> bool {
        self.trace_error <= TRACE_TOL
            && self.hermiticity_defect <= HERMITICITY_TOL
            && self.min_diagonal >= -POSITIVITY_TOL
    }
}

impl DensityMatrix {
    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(Self { dim, entries })
    }

    /// Pure Fock state `|n⟩⟨n|`.
    pub fn fock(dim: usize, n: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::InvalidParameter(format!(
                "Fock state {n} outside dimension {dim}"
            )));
        }
        let mut entries = vec![ZERO; dim * dim];
        entries[n * dim + n] = ONE;
        Ok(Self { dim, entries })
    }

    pub fn vacuum(dim: usize) -> Self {
        Self::fock(dim, 0).expect("dimension is positive")
    }

    /// Thermal state with geometric populations `n_th^k / (1 + n_th)^{k+1}`,
    /// renormalized on the truncated space.
    pub fn thermal(dim: usize, n_th: f64) -> Result<Self> {
        if !(n_th >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "thermal occupation must be non-negative, got {n_th}"
            )));
        }
        let ratio = n_th / (1.0 + n_th);
        let mut weights: Vec<f64> = (0..dim).map(|k| ratio.powi(k as i32)).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self::diagonal(&weights))
    }

    /// Coherent state `D(α)|0⟩` with Fock amplitudes `e^{−|α|²/2} αⁿ/√n!`,
    /// renormalized on the truncated space.
    pub fn coherent(dim: usize, alpha: Complex64) -> Self {
        let mut amp = Vec::with_capacity(dim);
        let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
        for n in 0..dim {
            if n > 0 {
                c = c * alpha / (n as f64).sqrt();
            }
            amp.push(c);
        }
        let norm: f64 = amp.iter().map(|c| c.norm_sqr()).sum();
        Self::pure(&amp.iter().map(|c| c / norm.sqrt()).collect::<Vec<_>>())
    }

    /// `|ψ⟩⟨ψ|` for a normalized amplitude vector.
    pub fn pure(amplitudes: &[Complex64]) -> Self {
        let dim = amplitudes.len();
        let mut entries = vec![ZERO; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                entries[i * dim + j] = amplitudes[i] * amplitudes[j].conj();
            }
        }
        Self { dim, entries }
    }

    pub fn diagonal(populations: &[f64]) -> Self {
        let dim = populations.len();
        let mut entries = vec![ZERO; dim * dim];
        for (k, p) in populations.iter().enumerate() {
            entries[k * dim + k] = Complex64::new(*p, 0.0);
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|k| self.entries[k * self.dim + k]).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|k| self.entries[k * self.dim + k].re)
            .collect()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(self.dim, &self.entries)
    }

    pub fn min_diagonal(&self) -> f64 {
        self.populations().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Population of the highest retained Fock state, `ρ_{N,N}`.
    pub fn tail_population(&self) -> f64 {
        self.entries[self.dim * self.dim - 1].re
    }

    pub fn check(&self, tail_tol: f64) -> InvariantReport {
        let tail = self.tail_population();
        InvariantReport {
            trace_error: (self.trace() - ONE).norm(),
            hermiticity_defect: self.hermiticity_defect(),
            min_diagonal: self.min_diagonal(),
            tail_population: tail,
            cutoff_safe: tail < tail_tol,
        }
    }

    /// Replaces `ρ` by `(ρ + ρ†)/2` normalized to unit trace.
    pub(crate) fn hermitize_normalized(mut self) -> Self {
        let d = self.dim;
        for i in 0..d {
            self.entries[i * d + i].im = 0.0;
            for j in (i + 1)..d {
                let avg = 0.5 * (self.entries[i * d + j] + self.entries[j * d + i].conj());
                self.entries[i * d + j] = avg;
                self.entries[j * d + i] = avg.conj();
            }
        }
        let tr = self.trace().re;
        self.entries.iter_mut().for_each(|e| *e /= tr);
        self
    }
}

pub(crate) fn hermiticity_defect(dim: usize, entries: &[Complex64]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in i..dim {
            let d = (entries[i * dim + j] - entries[j * dim + i].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

/// `Tr[O ρ]`.
pub fn expectation(rho: &DensityMatrix, op: &FockOperator) -> Result<Complex64> {
    if rho.dim != op.dim {
        return Err(Error::DimensionMismatch {
            expected: rho.dim,
            found: op.dim,
        });
    }
    let d = rho.dim;
    let mut acc = ZERO;
    for i in 0..d {
        for k in 0..d {
            acc += op.entries[i * d + k] * rho.entries[k * d + i];
        }
    }
    Ok(acc)
}

/// Photon number and normalized second-order correlation of a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub n: f64,
    /// `⟨a†a†aa⟩/n²`, `None` when `n` is below the population floor.
    pub g2: Option<f64>,
}

/// `n = ⟨a†a⟩` and `g2 = ⟨a†a†aa⟩/n²` with the default population floor.
pub fn observables(rho: &DensityMatrix) -> Observables {
    observables_with_floor(rho, DEFAULT_G2_FLOOR)
}

pub fn observables_with_floor(rho: &DensityMatrix, g2_floor: f64) -> Observables {
    // Both operators are diagonal in the Fock basis.
    let (mut n, mut pairs) = (0.0, 0.0);
    for (k, p) in rho.populations().into_iter().enumerate() {
        let k = k as f64;
        n += k * p;
        pairs += k * (k - 1.0) * p;
    }
    Observables {
        n,
        g2: (n > g2_floor).then(|| pairs / (n * n)),
    }
}

/// `⟨a⟩ = Tr[a ρ] = Σ_n √(n+1) ρ_{n+1,n}`.
pub fn coherence(rho: &DensityMatrix) -> Complex64 {
    let d = rho.dim;
    (0..d - 1)
        .map(|n| rho.entries[(n + 1) * d + n] * ((n + 1) as f64).sqrt())
        .sum()
}
