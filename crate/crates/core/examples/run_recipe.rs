//! Runs a shipped recipe in-process and lists the files it wrote.
//!
//! cargo run --release --example run_recipe -- recipes/fig1.toml sweep /tmp/fig1

use std::path::PathBuf;

use hysteresis_lab::cli::{run, Command};
use hysteresis_lab::config::Config;

fn main() -> hysteresis_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let recipe = PathBuf::from(args.next().unwrap_or_else(|| "recipes/fig4.toml".into()));
    let command = match args.next().as_deref() {
        None | Some("qa") => Command::Qa,
        Some("sweep") => Command::Sweep,
        Some("steadystate") => Command::Steadystate,
        Some("spectrum") => Command::Spectrum,
        Some("area-scan") => Command::AreaScan,
        Some("resonance-map") => Command::ResonanceMap,
        Some("kz") => Command::Kz,
        Some("dimer") => Command::Dimer,
        Some(other) => return Err(hysteresis_lab::Error::Config(format!("unknown command {other}"))),
    };
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out".into()));
    let config = Config::load(&recipe)?;
    let report = run(command, &config, 1, &out)?;
    for f in &report.outputs {
        println!("{}", out.join(f).display());
    }
    println!("cutoff safe: {}", report.cutoff_safe);
    Ok(())
}
