//! Characteristic time τ against U from the slow-sweep limit, with the
//! multiphoton resonance positions U = 2Δ/(n − 1) for reference.

use hysteresis_lab::analysis::resonance_positions;
use hysteresis_lab::fock::SystemParams;
use hysteresis_lab::lindblad::EvolveOptions;
use hysteresis_lab::scan::{characteristic_time_map, MapAxis, TauMethod};

fn main() -> hysteresis_lab::Result<()> {
    let grid: Vec<f64> = (0..=14).map(|i| 1.5 + 0.25 * i as f64).collect();
    let map = characteristic_time_map(
        &SystemParams::new(2.0, 1.0, 1)?,
        MapAxis::Nonlinearity,
        &grid,
        &TauMethod::Adiabatic { intervals: 32 },
        None,
        &EvolveOptions::default(),
        1,
    )?;
    for (u, tau) in map.grid.iter().zip(&map.tau) {
        println!("U = {u:.2}  tau = {tau:.4}");
    }
    println!("minima {:?}; resonances {:?}", map.minima, resonance_positions(2.0, 5));
    Ok(())
}
