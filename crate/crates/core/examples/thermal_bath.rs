//! A warm bath shrinks the loop but keeps the slow-sweep law.

use hysteresis_lab::fock::SystemParams;
use hysteresis_lab::lindblad::{single_mode_generator, EvolveOptions};
use hysteresis_lab::mean_field::default_sweep_range;
use hysteresis_lab::scan::{area_scan, Model, RateScan};
use hysteresis_lab::steady_state::adiabatic_tau;

fn main() -> hysteresis_lab::Result<()> {
    let base = SystemParams::new(2.0, 0.5, 20)?;
    let (f_min, f_max) = default_sweep_range(&base);
    let scan = RateScan {
        f_min,
        f_max,
        ratios: vec![30.0, 100.0],
        samples: 201,
    };
    for n_th in [0.0, 0.1, 0.2] {
        let p = base.with_thermal_occupation(n_th)?;
        let out = area_scan(Model::Quantum, &p, &scan, &EvolveOptions::default(), 1)?;
        let tau = adiabatic_tau(&single_mode_generator(&p)?, f_min, f_max, 64)?;
        println!("n_th = {n_th}: areas {:?}, slow-limit tau {tau:.2}", out.scan.area);
    }
    Ok(())
}
