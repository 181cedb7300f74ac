//! Null-space steady state against the closed-form coherence.

use hysteresis_lab::fock::{coherence, observables, SystemParams};
use hysteresis_lab::mean_field::{auto_cutoff, default_sweep_range};
use hysteresis_lab::steady_state::{dw_coherence, steady_state_detailed};

fn main() -> hysteresis_lab::Result<()> {
    let p0 = SystemParams::new(2.0, 0.5, 1)?;
    let (lo, hi) = default_sweep_range(&p0);
    let p = p0.with_cutoff(auto_cutoff(&p0, hi))?;
    println!("{:>8} {:>10} {:>8} {:>12}", "F", "n", "g2", "|da|");
    for i in 0..=10 {
        let f = lo + (hi - lo) * i as f64 / 10.0;
        let ss = steady_state_detailed(f, &p)?;
        let obs = observables(&ss.rho);
        let dev = (coherence(&ss.rho) - dw_coherence(f, &p)?).norm();
        println!("{f:8.4} {:10.5} {:8.4} {dev:12.2e}", obs.n, obs.g2.unwrap_or(f64::NAN));
    }
    Ok(())
}
