//! Lindblad evolution of one Kerr resonator under a triangular drive sweep.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    build_operators, observables_with_floor, DensityMatrix, SystemParams, DEFAULT_G2_FLOOR,
    DEFAULT_TAIL_TOL, POSITIVITY_TOL,
};
use crate::generator::{LindbladGenerator, ShiftOp};
use crate::ode::{integrate, Dopri5Options, IntegratorStats, Tolerances};

/// Generator with jumps `√(γ(1+n_th)) a` and `√(γ n_th) a†`.
pub fn single_mode_generator(params: &SystemParams) -> Result<LindbladGenerator> {
    let ops = build_operators(params)?;
    let g = params.dissipation;
    let n_th = params.thermal_occupation;
    let mut jumps = vec![(g * (1.0 + n_th), ShiftOp::from_dense(&ops.a)?)];
    if n_th > 0.0 {
        jumps.push((g * n_th, ShiftOp::from_dense(&ops.a_dag)?));
    }
    LindbladGenerator::new(&ops.hamiltonian_static, &ops.drive_coupling, jumps)
}

/// `dρ/dt` at drive `F`. Accepts non-Hermitian input as well.
pub fn lindblad_rhs(rho: &DensityMatrix, f: f64, params: &SystemParams) -> Result<DensityMatrix> {
    if rho.dim() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            found: rho.dim(),
        });
    }
    let gen = single_mode_generator(params)?;
    let mut out = vec![Complex64::new(0.0, 0.0); rho.entries().len()];
    gen.apply(f, rho.entries(), &mut out);
    DensityMatrix::from_entries(rho.dim(), out)
}

/// Triangular schedule `F(t) = F₀ + ΔF·t/t_s` rising, then falling back over `[t_s, 2t_s]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepProtocol {
    pub f0: f64,
    pub df: f64,
    pub t_s: f64,
    pub samples: usize,
}

impl SweepProtocol {
    pub const DEFAULT_SAMPLES: usize = 201;

    pub fn new(f0: f64, df: f64, t_s: f64) -> Result<Self> {
        let p = Self {
            f0,
            df,
            t_s,
            samples: Self::DEFAULT_SAMPLES,
        };
        p.validate()?;
        Ok(p)
    }

    /// Protocol over `[f_min, f_max]` with `t_s = ratio·ΔF` (the dimensionless `t_s γ²/ΔF`).
    pub fn from_rate(f_min: f64, f_max: f64, ratio: f64) -> Result<Self> {
        Self::new(f_min, f_max - f_min, ratio * (f_max - f_min))
    }

    pub fn with_samples(mut self, samples: usize) -> Result<Self> {
        self.samples = samples;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.df > 0.0) || !self.df.is_finite() {
            return Err(Error::InvalidParameter(format!("ΔF must be positive, got {}", self.df)));
        }
        if !(self.t_s > 0.0) || !self.t_s.is_finite() {
            return Err(Error::InvalidParameter(format!("t_s must be positive, got {}", self.t_s)));
        }
        if !self.f0.is_finite() {
            return Err(Error::InvalidParameter("F₀ must be finite".into()));
        }
        if self.samples < 2 {
            return Err(Error::InvalidParameter("at least two samples per leg".into()));
        }
        Ok(())
    }

    pub fn f_max(&self) -> f64 {
        self.f0 + self.df
    }

    /// Sweep rate parameter `t_s/ΔF` in units of `1/γ²`.
    pub fn rate_ratio(&self) -> f64 {
        self.t_s / self.df
    }

    pub fn drive(&self, t: f64) -> f64 {
        if t <= self.t_s {
            self.f0 + self.df * t / self.t_s
        } else {
            self.f0 + self.df * (2.0 - t / self.t_s)
        }
    }

    /// Ascending drive values shared by both legs.
    pub fn f_grid(&self) -> Vec<f64> {
        let last = (self.samples - 1) as f64;
        (0..self.samples)
            .map(|i| self.f0 + self.df * i as f64 / last)
            .collect()
    }

    /// Sample times within one leg, measured from the leg start.
    pub fn leg_times(&self) -> Vec<f64> {
        let last = (self.samples - 1) as f64;
        (0..self.samples)
            .map(|i| if i + 1 == self.samples { self.t_s } else { self.t_s * i as f64 / last })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub tolerances: Tolerances,
    pub tail_tol: f64,
    pub g2_floor: f64,
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            tail_tol: DEFAULT_TAIL_TOL,
            g2_floor: DEFAULT_G2_FLOOR,
            max_steps: Dopri5Options::default().max_steps,
        }
    }
}

/// Worst invariant values seen over all samples of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantMonitor {
    pub max_trace_error: f64,
    pub max_hermiticity_defect: f64,
    pub min_diagonal: f64,
    pub max_tail: f64,
    pub cutoff_safe: bool,
}

impl InvariantMonitor {
    fn new() -> Self {
        Self {
            max_trace_error: 0.0,
            max_hermiticity_defect: 0.0,
            min_diagonal: f64::INFINITY,
            max_tail: 0.0,
            cutoff_safe: true,
        }
    }

    fn record(&mut self, rho: &DensityMatrix, tail: f64, tail_tol: f64) {
        self.max_trace_error = self.max_trace_error.max((rho.trace() - 1.0).norm());
        self.max_hermiticity_defect = self.max_hermiticity_defect.max(rho.hermiticity_defect());
        self.min_diagonal = self.min_diagonal.min(rho.min_diagonal());
        self.max_tail = self.max_tail.max(tail);
        self.cutoff_safe &= tail < tail_tol;
    }

    /// Monitor for models without a density matrix.
    pub fn exact() -> Self {
        Self {
            min_diagonal: 0.0,
            ..Self::new()
        }
    }

    pub fn positivity_ok(&self) -> bool {
        self.min_diagonal >= -POSITIVITY_TOL
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub params: SystemParams,
    pub protocol: SweepProtocol,
    pub options: EvolveOptions,
    pub stats: IntegratorStats,
    pub invariants: InvariantMonitor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HysteresisTrace {
    pub f_grid: Vec<f64>,
    pub n_up: Vec<f64>,
    pub n_down: Vec<f64>,
    pub g2_up: Vec<Option<f64>>,
    pub g2_down: Vec<Option<f64>>,
    pub metadata: Option<TraceMetadata>,
}

impl HysteresisTrace {
    /// Trace built from population legs only; `g2` is left undefined.
    pub fn from_populations(f_grid: Vec<f64>, n_up: Vec<f64>, n_down: Vec<f64>) -> Result<Self> {
        let len = f_grid.len();
        let t = Self {
            g2_up: vec![None; len],
            g2_down: vec![None; len],
            f_grid,
            n_up,
            n_down,
            metadata: None,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let len = self.f_grid.len();
        for l in [self.n_up.len(), self.n_down.len(), self.g2_up.len(), self.g2_down.len()] {
            if l != len {
                return Err(Error::DimensionMismatch { expected: len, found: l });
            }
        }
        if self.f_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("F grid must be strictly ascending".into()));
        }
        Ok(())
    }

    pub fn cutoff_safe(&self) -> bool {
        self.metadata.as_ref().map_or(true, |m| m.invariants.cutoff_safe)
    }
}

/// Samples recorded on both legs of a sweep, in ascending-F order.
#[derive(Debug, Clone)]
pub struct LegSamples<S> {
    pub up: Vec<S>,
    pub down: Vec<S>,
    pub stats: IntegratorStats,
    pub invariants: InvariantMonitor,
}

/// Integrates any drive-affine generator along the protocol, evaluating
/// `sample` on the density matrix at every recorded point. `sample` returns the
/// observable and the tail population used for the cutoff check.
pub fn sweep_generator<S, G>(
    gen: &LindbladGenerator,
    rho0: &DensityMatrix,
    protocol: &SweepProtocol,
    options: &EvolveOptions,
    mut sample: G,
) -> Result<LegSamples<S>>
where
    S: Clone,
    G: FnMut(&DensityMatrix) -> (S, f64),
{
    protocol.validate()?;
    let d = gen.dim();
    if rho0.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: rho0.dim() });
    }
    let ode_opts = Dopri5Options {
        tolerances: options.tolerances,
        max_steps: options.max_steps,
        ..Default::default()
    };
    let times = protocol.leg_times();
    let mut monitor = InvariantMonitor::new();
    let mut stats = IntegratorStats::default();
    let mut scratch = vec![Complex64::new(0.0, 0.0); d * d];
    let s = protocol.samples;
    let mut up: Vec<Option<S>> = vec![None; s];
    let mut down: Vec<Option<S>> = vec![None; s];

    let mut state = rho0.entries().to_vec();
    for leg in 0..2 {
        let (f_start, slope) = if leg == 0 {
            (protocol.f0, protocol.df / protocol.t_s)
        } else {
            (protocol.f_max(), -protocol.df / protocol.t_s)
        };
        let slot = if leg == 0 { &mut up } else { &mut down };
        let (end, st) = integrate(
            |t, y: &[Complex64], dy: &mut [Complex64]| {
                gen.apply_hermitian(f_start + slope * t, y, dy, &mut scratch)
            },
            0.0,
            &state,
            protocol.t_s,
            &times,
            &ode_opts,
            |i, t, y| {
                let rho = DensityMatrix::from_entries(d, y.to_vec())?;
                if !y.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::NonFiniteState { t });
                }
                let (value, tail) = sample(&rho);
                monitor.record(&rho, tail, options.tail_tol);
                let k = if leg == 0 { i } else { s - 1 - i };
                slot[k] = Some(value);
                Ok(())
            },
        )?;
        stats.merge(&st);
        state = end;
    }
    Ok(LegSamples {
        up: up.into_iter().map(|v| v.expect("every sample recorded")).collect(),
        down: down.into_iter().map(|v| v.expect("every sample recorded")).collect(),
        stats,
        invariants: monitor,
    })
}

/// Sweeps with the default integrator and cutoff options.
pub fn evolve(rho0: &DensityMatrix, protocol: &SweepProtocol, params: &SystemParams) -> Result<HysteresisTrace> {
    evolve_with(rho0, protocol, params, &EvolveOptions::default())
}

pub fn evolve_with(
    rho0: &DensityMatrix,
    protocol: &SweepProtocol,
    params: &SystemParams,
    options: &EvolveOptions,
) -> Result<HysteresisTrace> {
    let gen = single_mode_generator(params)?;
    let floor = options.g2_floor;
    let legs = sweep_generator(&gen, rho0, protocol, options, |rho| {
        let obs = observables_with_floor(rho, floor);
        ((obs.n, obs.g2), rho.tail_population())
    })?;
    let (n_up, g2_up) = legs.up.into_iter().unzip();
    let (n_down, g2_down) = legs.down.into_iter().unzip();
    Ok(HysteresisTrace {
        f_grid: protocol.f_grid(),
        n_up,
        n_down,
        g2_up,
        g2_down,
        metadata: Some(TraceMetadata {
            params: *params,
            protocol: *protocol,
            options: *options,
            stats: legs.stats,
            invariants: legs.invariants,
        }),
    })
}
