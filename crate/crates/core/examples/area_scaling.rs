//! Hysteresis area against sweep time and the double power-law fit.
//! A few minutes on one core; `t_s γ²/ΔF` up to 1e4.

use hysteresis_lab::analysis::fit_double_power_law;
use hysteresis_lab::fock::SystemParams;
use hysteresis_lab::lindblad::EvolveOptions;
use hysteresis_lab::mean_field::default_sweep_range;
use hysteresis_lab::scan::{area_scan, log_grid, Model, RateScan};

fn main() -> hysteresis_lab::Result<()> {
    let p = SystemParams::new(2.0, 0.5, 20)?;
    let (f_min, f_max) = default_sweep_range(&p);
    let scan = RateScan {
        f_min,
        f_max,
        ratios: log_grid(4.0, 1e4, 18)?,
        samples: 201,
    };
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let out = area_scan(Model::Quantum, &p, &scan, &EvolveOptions::default(), jobs)?;
    for (r, a) in scan.ratios.iter().zip(&out.scan.area) {
        println!("{r:10.2} {a:.5e}");
    }
    let fit = fit_double_power_law(&out.scan)?;
    println!("slow exponent {:.3}, fast exponent {:.3}, tau {:.2}", fit.exponent_slow, fit.exponent_fast, fit.tau);
    Ok(())
}
