//! Worker-pool fan-out for independent simulations, and the area and
//! characteristic-time scans built on it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{hysteresis_area, AreaScan, CharacteristicTimeMap};
use crate::dimer::{dimer_initial_state, dimer_mf_sweep, dimer_sweep, DimerParams};
use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, SystemParams};
use crate::lindblad::{evolve_with, single_mode_generator, EvolveOptions, HysteresisTrace, SweepProtocol};
use crate::mean_field::{auto_cutoff, default_sweep_range, mf_sweep};
use crate::quasi_adiabatic::qa_sweep;
use crate::steady_state::{adiabatic_tau, solve_steady_state};

/// Maps `f` over `items` on a pool of `jobs` threads (`0` uses the default
/// width) and returns the results in input order.
pub fn par_map<T, R, F>(jobs: usize, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    if jobs == 1 {
        return items.iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(|| items.par_iter().map(&f).collect())
}

/// `points` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || points < 2 {
        return Err(Error::InvalidParameter("log grid needs 0 < lo < hi and ≥ 2 points".into()));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect())
}

/// Which dynamics a scan integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Quantum,
    MeanField,
    QuasiAdiabatic,
}

/// A family of sweeps over one drive range that differ only in `t_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateScan {
    pub f_min: f64,
    pub f_max: f64,
    /// Ascending `t_s γ²/ΔF` values.
    pub ratios: Vec<f64>,
    pub samples: usize,
}

impl RateScan {
    pub fn protocols(&self) -> Result<Vec<SweepProtocol>> {
        if self.ratios.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("rate ratios must be strictly ascending".into()));
        }
        self.ratios
            .iter()
            .map(|&r| SweepProtocol::from_rate(self.f_min, self.f_max, r)?.with_samples(self.samples))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct ScanOutcome {
    pub scan: AreaScan,
    /// Every sweep kept its tail population below tolerance.
    pub cutoff_safe: bool,
    pub traces: Vec<HysteresisTrace>,
}

impl ScanOutcome {
    fn from_traces(protocols: &[SweepProtocol], traces: Vec<HysteresisTrace>) -> Result<Self> {
        let area = traces.iter().map(hysteresis_area).collect::<Result<Vec<_>>>()?;
        let t_s = protocols.iter().map(|p| p.t_s).collect();
        let df = protocols.first().map_or(1.0, |p| p.df);
        Ok(Self {
            scan: AreaScan::new(t_s, area, df)?,
            cutoff_safe: traces.iter().all(HysteresisTrace::cutoff_safe),
            traces,
        })
    }
}

/// Steady state at `f` used as the initial condition of quantum sweeps.
pub fn initial_state(params: &SystemParams, f: f64, options: &EvolveOptions) -> Result<DensityMatrix> {
    let gen = single_mode_generator(params)?;
    Ok(solve_steady_state(&gen, f, options.tail_tol)?.rho)
}

/// A(t_s) for one resonator with the chosen dynamics.
pub fn area_scan(model: Model, params: &SystemParams, scan: &RateScan, options: &EvolveOptions, jobs: usize) -> Result<ScanOutcome> {
    let protocols = scan.protocols()?;
    let traces = match model {
        Model::Quantum => {
            let rho0 = initial_state(params, scan.f_min, options)?;
            par_map(jobs, &protocols, |p| evolve_with(&rho0, p, params, options))?
        }
        Model::MeanField => par_map(jobs, &protocols, |p| mf_sweep(p, params))?,
        Model::QuasiAdiabatic => par_map(jobs, &protocols, |p| qa_sweep(p, params))?,
    };
    ScanOutcome::from_traces(&protocols, traces)
}

/// A(t_s) of the dimer from the site-1 population, quantum or mean field.
pub fn dimer_area_scan(
    dimer: &DimerParams,
    scan: &RateScan,
    options: &EvolveOptions,
    mean_field: bool,
    jobs: usize,
) -> Result<ScanOutcome> {
    let protocols = scan.protocols()?;
    let traces = if mean_field {
        par_map(jobs, &protocols, |p| dimer_mf_sweep(p, dimer))?
    } else {
        let rho0 = dimer_initial_state(dimer, scan.f_min, options.tail_tol)?;
        par_map(jobs, &protocols, |p| Ok(dimer_sweep(&rho0, p, dimer, options)?.trace))?
    };
    ScanOutcome::from_traces(&protocols, traces)
}

/// Parameter varied along a characteristic-time map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapAxis {
    Nonlinearity,
    Detuning,
}

/// How τ is obtained at each grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TauMethod {
    /// Slow-sweep limit from the first-order adiabatic lag (no time integration).
    Adiabatic { intervals: usize },
    /// Geometric mean of `A·t_s/ΔF` over time-domain sweeps at these ratios.
    Sweeps { ratios: Vec<f64>, samples: usize },
}

/// τ over `grid` for the template with one parameter replaced. Each point
/// sweeps its own default range; the cutoff is `cutoff` or the automatic one.
pub fn characteristic_time_map(
    template: &SystemParams,
    axis: MapAxis,
    grid: &[f64],
    method: &TauMethod,
    cutoff: Option<usize>,
    options: &EvolveOptions,
    jobs: usize,
) -> Result<CharacteristicTimeMap> {
    let tau = par_map(jobs, grid, |&v| {
        let mut p = *template;
        match axis {
            MapAxis::Nonlinearity => p.nonlinearity = v,
            MapAxis::Detuning => p.detuning = v,
        }
        let (f_min, f_max) = default_sweep_range(&p);
        p.cutoff = cutoff.unwrap_or_else(|| auto_cutoff(&p, f_max));
        p.validate()?;
        match method {
            TauMethod::Adiabatic { intervals } => adiabatic_tau(&single_mode_generator(&p)?, f_min, f_max, *intervals),
            TauMethod::Sweeps { ratios, samples } => {
                let scan = RateScan {
                    f_min,
                    f_max,
                    ratios: ratios.clone(),
                    samples: *samples,
                };
                let out = area_scan(Model::Quantum, &p, &scan, options, 1)?;
                let ln_mean = out
                    .scan
                    .area
                    .iter()
                    .zip(out.scan.rate_ratios())
                    .map(|(a, r)| (a * r).ln())
                    .sum::<f64>()
                    / ratios.len() as f64;
                Ok(ln_mean.exp())
            }
        }
    })?;
    Ok(CharacteristicTimeMap::new(grid.to_vec(), tau))
}
