//! The least-damped Liouvillian mode across the transition.

use hysteresis_lab::fock::SystemParams;
use hysteresis_lab::spectral::slow_mode_scan;

fn main() -> hysteresis_lab::Result<()> {
    let p = SystemParams::new(2.0, 0.5, 14)?;
    let grid: Vec<f64> = (0..=24).map(|i| 0.4 + 0.075 * i as f64).collect();
    let (results, tr) = slow_mode_scan(&grid, &p, 1)?;
    for r in &results {
        println!(
            "F = {:.3}  lambda = {:+.5} {:+.5}i  tau_R = {:8.2}{}",
            r.f,
            r.lambda_slow.re,
            r.lambda_slow.im,
            r.tau_r,
            if r.soft_mode { "  soft" } else { "" }
        );
    }
    println!("F_c = {:.4}, tau_T = {:.2}, soft window {:?}", tr.f_c, tr.tau_t, tr.soft_window);
    Ok(())
}
