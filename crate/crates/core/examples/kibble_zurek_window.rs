//! Non-adiabatic window δF around F_c for several sweep rates.

use hysteresis_lab::analysis::kz_window;
use hysteresis_lab::fock::SystemParams;
use hysteresis_lab::spectral::slow_mode_scan;

fn main() -> hysteresis_lab::Result<()> {
    let p = SystemParams::new(2.0, 0.5, 14)?;
    let grid: Vec<f64> = (0..=40).map(|i| 0.4 + 0.045 * i as f64).collect();
    let (results, tr) = slow_mode_scan(&grid, &p, 1)?;
    let tau_r: Vec<f64> = results.iter().map(|r| r.tau_r).collect();
    println!("F_c = {:.4}, tau_T = {:.2}", tr.f_c, tr.tau_t);
    for ratio in [30.0, 100.0, 300.0, 1000.0, 3000.0] {
        match kz_window(ratio, 1.0, &grid, &tau_r, tr.f_c, tr.tau_t) {
            Ok(w) => println!(
                "t_s/dF = {ratio:6}: dF = {:.4}, dF t_s/(2 tau_T dF) = {:.3}",
                w.delta_f,
                w.asymptote_ratio(1.0)
            ),
            Err(e) => println!("t_s/dF = {ratio:6}: {e}"),
        }
    }
    Ok(())
}
