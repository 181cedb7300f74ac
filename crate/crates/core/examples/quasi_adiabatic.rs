//! Population ODE driven by the instantaneous stationary coherence, against
//! the master equation.

use hysteresis_lab::analysis::hysteresis_area;
use hysteresis_lab::fock::SystemParams;
use hysteresis_lab::lindblad::{evolve, SweepProtocol};
use hysteresis_lab::mean_field::default_sweep_range;
use hysteresis_lab::quasi_adiabatic::{max_deviation, qa_sweep};
use hysteresis_lab::scan::initial_state;

fn main() -> hysteresis_lab::Result<()> {
    let p = SystemParams::new(2.0, 1.0, 16)?;
    let (f_min, f_max) = default_sweep_range(&p);
    let rho0 = initial_state(&p, f_min, &Default::default())?;
    for ratio in [10.0, 100.0, 1000.0] {
        let proto = SweepProtocol::from_rate(f_min, f_max, ratio)?;
        let qa = qa_sweep(&proto, &p)?;
        let exact = evolve(&rho0, &proto, &p)?;
        println!(
            "t_s/dF = {ratio:6}: area qa {:.4e}, exact {:.4e}, max |dn| {:.3e}",
            hysteresis_area(&qa)?,
            hysteresis_area(&exact)?,
            max_deviation(&qa, &exact)?
        );
    }
    Ok(())
}
