//! Two coupled resonators: inter-site correlation g2_12 along one loop.

use hysteresis_lab::analysis::hysteresis_area;
use hysteresis_lab::dimer::{dimer_initial_state, dimer_sweep, DimerParams};
use hysteresis_lab::fock::SystemParams;
use hysteresis_lab::lindblad::{EvolveOptions, SweepProtocol};

fn main() -> hysteresis_lab::Result<()> {
    let dimer = DimerParams::new(SystemParams::new(-1.0, 2.0, 6)?, 3.0)?;
    let opts = EvolveOptions::default();
    let rho0 = dimer_initial_state(&dimer, 0.0, opts.tail_tol)?;
    let proto = SweepProtocol::from_rate(0.0, 1.2, 30.0)?.with_samples(25)?;
    let tr = dimer_sweep(&rho0, &proto, &dimer, &opts)?;
    for i in 0..tr.trace.f_grid.len() {
        println!(
            "F = {:.2}  n1 {:.4}/{:.4}  g2_12 {:.3}/{:.3}",
            tr.trace.f_grid[i],
            tr.trace.n_up[i],
            tr.trace.n_down[i],
            tr.g2_12_up[i].unwrap_or(f64::NAN),
            tr.g2_12_down[i].unwrap_or(f64::NAN)
        );
    }
    println!("area {:.4}, g2_12 peaks (up, down) {:?}", hysteresis_area(&tr.trace)?, tr.g2_12_peaks());
    println!("largest site asymmetry {:.1e}", tr.max_site_asymmetry);
    if tr.trace.cutoff_safe() {
        println!("cutoff safe");
    }
    Ok(())
}
