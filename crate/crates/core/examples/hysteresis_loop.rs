//! Two triangular sweeps across the transition; the slower loop is smaller.

use hysteresis_lab::analysis::hysteresis_area;
use hysteresis_lab::fock::{DensityMatrix, SystemParams};
use hysteresis_lab::lindblad::{evolve, SweepProtocol};

fn main() -> hysteresis_lab::Result<()> {
    let p = SystemParams::new(2.0, 0.5, 20)?;
    let rho0 = DensityMatrix::vacuum(p.dim());
    for ratio in [10.0, 40.0] {
        let proto = SweepProtocol::from_rate(0.0, 2.5, ratio)?.with_samples(11)?;
        let tr = evolve(&rho0, &proto, &p)?;
        println!("t_s/dF = {ratio}: area {:.4}", hysteresis_area(&tr)?);
        for i in 0..tr.f_grid.len() {
            println!("  F = {:.2}  n_up = {:.4}  n_down = {:.4}", tr.f_grid[i], tr.n_up[i], tr.n_down[i]);
        }
    }
    Ok(())
}
