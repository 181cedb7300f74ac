//! Quasi-adiabatic population dynamics.
//!
//! The exact population equation `ṅ = −γn − i(F⟨a†⟩ − F⟨a⟩)` is closed by
//! replacing `⟨a⟩` with the stationary coherence at the instantaneous drive.
//! For real `F` this gives `ṅ = −γn − 2F·Im⟨a⟩_SS(F)`, whose fixed point is the
//! exact stationary population.

use crate::error::{Error, Result};
use crate::fock::SystemParams;
use crate::lindblad::{EvolveOptions, HysteresisTrace, InvariantMonitor, SweepProtocol, TraceMetadata};
use crate::ode::{integrate, Dopri5Options, IntegratorStats, Tolerances};
use crate::steady_state::dw_coherence;

pub fn qa_rhs(n: f64, f: f64, params: &SystemParams) -> Result<f64> {
    let a = dw_coherence(f, params)?;
    Ok(-params.dissipation * n - 2.0 * f * a.im)
}

/// Stationary point of [`qa_rhs`] at constant drive.
pub fn qa_fixed_point(f: f64, params: &SystemParams) -> Result<f64> {
    let a = dw_coherence(f, params)?;
    Ok(-2.0 * f * a.im / params.dissipation)
}

pub fn qa_tolerances() -> Tolerances {
    Tolerances {
        rtol: 1e-10,
        atol: 1e-12,
    }
}

/// Population loop of the quasi-adiabatic equation; `g2` is not defined.
pub fn qa_sweep(protocol: &SweepProtocol, params: &SystemParams) -> Result<HysteresisTrace> {
    protocol.validate()?;
    params.validate()?;
    if params.nonlinearity == 0.0 || params.thermal_occupation != 0.0 {
        return Err(Error::InvalidParameter(
            "quasi-adiabatic sweep needs U ≠ 0 and n_th = 0".into(),
        ));
    }
    let opts = Dopri5Options {
        tolerances: qa_tolerances(),
        ..Default::default()
    };
    let times = protocol.leg_times();
    let s = protocol.samples;
    let mut legs = [vec![0.0; s], vec![0.0; s]];
    let mut stats = IntegratorStats::default();
    let mut state = vec![qa_fixed_point(protocol.f0, params)?];
    for (leg, out) in legs.iter_mut().enumerate() {
        let (f_start, slope) = if leg == 0 {
            (protocol.f0, protocol.df / protocol.t_s)
        } else {
            (protocol.f_max(), -protocol.df / protocol.t_s)
        };
        // The series cannot fail for admissible parameters; a failure is
        // surfaced after the step through a poisoned derivative.
        let mut failure = None;
        let result = integrate(
            |t, y: &[f64], dy: &mut [f64]| {
                dy[0] = match qa_rhs(y[0], f_start + slope * t, params) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                }
            },
            0.0,
            &state,
            protocol.t_s,
            &times,
            &opts,
            |i, _, y| {
                let k = if leg == 0 { i } else { s - 1 - i };
                out[k] = y[0];
                Ok(())
            },
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let (end, st) = result?;
        stats.merge(&st);
        state = end;
    }
    let [n_up, n_down] = legs;
    let mut trace = HysteresisTrace::from_populations(protocol.f_grid(), n_up, n_down)?;
    trace.metadata = Some(TraceMetadata {
        params: *params,
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

/// Largest pointwise population difference between two traces on one grid.
pub fn max_deviation(a: &HysteresisTrace, b: &HysteresisTrace) -> Result<f64> {
    if a.f_grid.len() != b.f_grid.len() {
        return Err(Error::DimensionMismatch {
            expected: a.f_grid.len(),
            found: b.f_grid.len(),
        });
    }
    let up = a.n_up.iter().zip(&b.n_up).map(|(x, y)| (x - y).abs());
    let down = a.n_down.iter().zip(&b.n_down).map(|(x, y)| (x - y).abs());
    Ok(up.chain(down).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::hysteresis_area;
    use crate::fock::observables;
    use crate::steady_state::steady_state_numeric;

    #[test]
    fn zero_drive_is_pure_decay() {
        let p = SystemParams::new(2.0, 1.0, 10).unwrap();
        assert_eq!(qa_rhs(0.7, 0.0, &p).unwrap(), -0.7);
    }

    #[test]
    fn fixed_point_is_the_stationary_population() {
        let p = SystemParams::new(2.0, 1.0, 40).unwrap();
        for f in [0.5, 1.5, 2.5] {
            let n_ss = observables(&steady_state_numeric(f, &p).unwrap()).n;
            let n_qa = qa_fixed_point(f, &p).unwrap();
            assert!((n_ss - n_qa).abs() < 1e-8 * n_ss.max(1.0), "{n_ss} vs {n_qa}");
            assert!(qa_rhs(n_qa, f, &p).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn slow_sweep_closes_the_loop() {
        let p = SystemParams::new(2.0, 1.0, 10).unwrap();
        let fast = qa_sweep(&SweepProtocol::from_rate(0.0, 3.0, 10.0).unwrap(), &p).unwrap();
        let slow = qa_sweep(&SweepProtocol::from_rate(0.0, 3.0, 1000.0).unwrap(), &p).unwrap();
        let (a_fast, a_slow) = (hysteresis_area(&fast).unwrap(), hysteresis_area(&slow).unwrap());
        assert!(a_slow < 0.05 * a_fast, "{a_slow} vs {a_fast}");
        assert!(slow.n_up.iter().chain(&slow.n_down).all(|&n| n >= 0.0));
    }

    #[test]
    fn rejects_thermal_or_linear_parameters() {
        let proto = SweepProtocol::from_rate(0.0, 1.0, 10.0).unwrap();
        let hot = SystemParams::new(2.0, 1.0, 10).unwrap().with_thermal_occupation(0.1).unwrap();
        assert!(qa_sweep(&proto, &hot).is_err());
        assert!(qa_sweep(&proto, &SystemParams::new(2.0, 0.0, 10).unwrap()).is_err());
    }
}
