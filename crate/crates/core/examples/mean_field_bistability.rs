//! Mean-field branches, the bistability threshold in Δ and the offset law.

use hysteresis_lab::analysis::fit_offset_power_law;
use hysteresis_lab::fock::SystemParams;
use hysteresis_lab::lindblad::EvolveOptions;
use hysteresis_lab::mean_field::{bistable_window, default_sweep_range, static_area};
use hysteresis_lab::scan::{area_scan, log_grid, Model, RateScan};

fn main() -> hysteresis_lab::Result<()> {
    for delta in [0.8, 0.85, 0.9, 1.0, 2.0] {
        let p = SystemParams::new(delta, 0.5, 1)?;
        println!("Delta = {delta}: window {:?}", bistable_window(&p));
    }
    let p = SystemParams::new(2.0, 0.5, 1)?;
    let (f_min, f_max) = default_sweep_range(&p);
    let scan = RateScan {
        f_min,
        f_max,
        ratios: log_grid(100.0, 1e4, 9)?,
        samples: 2001,
    };
    let out = area_scan(Model::MeanField, &p, &scan, &EvolveOptions::default(), 1)?;
    let fit = fit_offset_power_law(&out.scan.t_s, &out.scan.area)?;
    println!(
        "A - A0 ~ t_s^{:.4}; A0 = {:.4} (static loop area {:.4})",
        fit.exponent,
        fit.a0,
        static_area(&p)
    );
    Ok(())
}
