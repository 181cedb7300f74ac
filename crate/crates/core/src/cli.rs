//! Command-line front end: runs one recipe and writes its outputs.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 simulation failure,
//! 4 cutoff-unsafe result (the outputs are still written).

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::analysis::{fit_double_power_law, fit_offset_power_law, kz_window, resonance_positions, AreaScan};
use crate::config::Config;
use crate::dimer::dimer_sweep;
use crate::error::{Error, Result};
use crate::fock::{coherence, observables_with_floor};
use crate::io::{plot_script, Cell, OutputSet, PlotPanel, Table};
use crate::lindblad::{evolve_with, SweepProtocol};
use crate::mean_field::mf_roots;
use crate::quasi_adiabatic::{max_deviation, qa_sweep};
use crate::scan::{area_scan, characteristic_time_map, dimer_area_scan, initial_state, Model, RateScan};
use crate::spectral::{liouvillian_spectrum, slow_mode_scan};
use crate::steady_state::{dw_coherence, steady_state_detailed};

#[derive(Debug, Parser)]
#[command(name = "hysteresis-lab", version, about = "Dynamic hysteresis of driven-dissipative Kerr resonators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML recipe, or a previous run's manifest to rerun it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for scans (0 uses every core).
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Hysteresis loops n(F), g2(F) at the configured sweep rates.
    Sweep,
    /// Stationary n, g2 and ⟨a⟩ along a drive grid, with the mean-field roots.
    Steadystate,
    /// Least-damped Liouvillian mode along a drive grid.
    Spectrum,
    /// Hysteresis area against sweep time, with power-law fits.
    AreaScan,
    /// Characteristic time τ against U or Δ.
    ResonanceMap,
    /// Non-adiabatic window δF from the relaxation-time profile.
    Kz,
    /// Two coupled resonators: g2_12 loop and area scans.
    Dimer,
    /// Quasi-adiabatic population model against the master equation.
    Qa,
}

impl Command {
    fn label(self) -> &'static str {
        match self {
            Command::Sweep => "sweep",
            Command::Steadystate => "steadystate",
            Command::Spectrum => "spectrum",
            Command::AreaScan => "area-scan",
            Command::ResonanceMap => "resonance-map",
            Command::Kz => "kz",
            Command::Dimer => "dimer",
            Command::Qa => "qa",
        }
    }
}

/// What a run leaves behind besides its files.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub cutoff_safe: bool,
    pub outputs: Vec<String>,
    pub summary: serde_json::Value,
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let Some(path) = cli.config.as_deref() else {
        eprintln!("error: --config is required");
        return 2;
    };
    let config = match Config::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match run(cli.command, &config, cli.jobs, &cli.out) {
        Ok(report) => {
            for o in &report.outputs {
                println!("{}", cli.out.join(o).display());
            }
            if report.cutoff_safe {
                0
            } else {
                eprintln!("warning: Fock cutoff too small for at least one result; outputs kept");
                4
            }
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            3
        }
    }
}

/// Runs `command` and writes its CSV, plot script and manifest into `out`.
pub fn run(command: Command, config: &Config, jobs: usize, out: &Path) -> Result<RunReport> {
    let mut files = OutputSet::new(out, &config.name)?;
    let (cutoff_safe, summary) = match command {
        Command::Sweep => run_sweep(config, jobs, &mut files)?,
        Command::Steadystate => run_steadystate(config, &mut files)?,
        Command::Spectrum => run_spectrum(config, jobs, &mut files)?,
        Command::AreaScan => run_area_scan(config, jobs, &mut files)?,
        Command::ResonanceMap => run_resonance_map(config, jobs, &mut files)?,
        Command::Kz => run_kz(config, jobs, &mut files)?,
        Command::Dimer => run_dimer(config, jobs, &mut files)?,
        Command::Qa => run_qa(config, jobs, &mut files)?,
    };
    let mut outputs = files.written();
    outputs.push(format!("{}_manifest.json", config.name));
    let manifest = json!({
        "software": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "command": command.label(),
        "units": "frequencies in gamma, times in 1/gamma",
        "jobs": jobs,
        "seed": null,
        "config": config,
        "cutoff_safe": cutoff_safe,
        "summary": summary,
        "outputs": outputs,
    });
    files.json("manifest.json", &manifest)?;
    Ok(RunReport {
        cutoff_safe,
        outputs,
        summary,
    })
}

type Outcome = (bool, serde_json::Value);

fn panel(csv: String, x: &str, y: &[&str], log: bool, group_by: Option<&str>) -> PlotPanel {
    PlotPanel {
        csv,
        x: x.into(),
        y: y.iter().map(|s| s.to_string()).collect(),
        log_x: log,
        log_y: log,
        group_by: group_by.map(str::to_string),
    }
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn run_sweep(config: &Config, jobs: usize, files: &mut OutputSet) -> Result<Outcome> {
    let s = config.require(&config.sweep, "sweep")?;
    let (f_min, f_max) = config.range_or_default(s.range)?;
    let params = config.params_for_range(f_max)?;
    let options = config.evolve_options();
    let rho0 = initial_state(&params, f_min, &options)?;
    let protocols = s
        .ratios
        .iter()
        .map(|&r| SweepProtocol::from_rate(f_min, f_max, r)?.with_samples(s.samples))
        .collect::<Result<Vec<_>>>()?;
    let traces = crate::scan::par_map(jobs, &protocols, |p| evolve_with(&rho0, p, &params, &options))?;
    let mut t = Table::new(&["F", "n_up", "n_down", "g2_up", "g2_down", "ratio"]);
    let mut areas = Vec::new();
    for (p, tr) in protocols.iter().zip(&traces) {
        for i in 0..tr.f_grid.len() {
            t.push(vec![
                tr.f_grid[i].into(),
                tr.n_up[i].into(),
                tr.n_down[i].into(),
                tr.g2_up[i].into(),
                tr.g2_down[i].into(),
                p.rate_ratio().into(),
            ]);
        }
        areas.push(json!({ "ratio": p.rate_ratio(), "area": crate::analysis::hysteresis_area(tr)? }));
    }
    let csv = files.table("trace.csv", &t)?;
    files.text(
        "plot.py",
        &plot_script(
            &config.name,
            &[
                panel(file_name(&csv), "F", &["n_up", "n_down"], false, Some("ratio")),
                panel(file_name(&csv), "F", &["g2_up", "g2_down"], false, Some("ratio")),
            ],
        ),
    )?;
    let safe = traces.iter().all(|t| t.cutoff_safe());
    Ok((safe, json!({ "cutoff": params.cutoff, "range": [f_min, f_max], "areas": areas })))
}

fn run_steadystate(config: &Config, files: &mut OutputSet) -> Result<Outcome> {
    let g = config.require(&config.steadystate, "steadystate")?;
    let grid = g.values()?;
    let params = config.params_for_range(g.f_max)?;
    let floor = config.integrator.g2_floor;
    let mut t = Table::new(&[
        "F", "n_ss", "g2_ss", "re_a", "im_a", "re_a_analytic", "im_a_analytic", "n_mf_low", "n_mf_mid", "n_mf_high", "tail",
    ]);
    let mut safe = true;
    let mut worst_oracle: f64 = 0.0;
    for &f in &grid {
        let ss = steady_state_detailed(f, &params)?;
        let obs = observables_with_floor(&ss.rho, floor);
        let a = coherence(&ss.rho);
        let analytic = dw_coherence(f, &params).ok();
        if let Some(an) = analytic {
            worst_oracle = worst_oracle.max((an - a).norm());
        }
        safe &= ss.info.invariants.cutoff_safe;
        let roots = mf_roots(f, &params);
        let (lo, mid, hi) = match roots.len() {
            3 => (Some(roots[0]), Some(roots[1]), Some(roots[2])),
            _ => (Some(roots[0]), None, None),
        };
        t.push(vec![
            f.into(),
            obs.n.into(),
            obs.g2.into(),
            a.re.into(),
            a.im.into(),
            analytic.map(|z| z.re).into(),
            analytic.map(|z| z.im).into(),
            lo.into(),
            mid.into(),
            hi.into(),
            ss.info.invariants.tail_population.into(),
        ]);
    }
    let csv = files.table("steadystate.csv", &t)?;
    files.text(
        "plot.py",
        &plot_script(
            &config.name,
            &[
                panel(file_name(&csv), "F", &["n_ss", "n_mf_low", "n_mf_mid", "n_mf_high"], false, None),
                panel(file_name(&csv), "F", &["g2_ss"], false, None),
            ],
        ),
    )?;
    Ok((safe, json!({ "cutoff": params.cutoff, "max_analytic_deviation": worst_oracle })))
}

fn run_spectrum(config: &Config, jobs: usize, files: &mut OutputSet) -> Result<Outcome> {
    let s = config.require(&config.spectrum, "spectrum")?;
    let grid = s.values()?;
    let params = config.params_for_range(grid[grid.len() - 1])?;
    let (results, transition) = slow_mode_scan(&grid, &params, jobs)?;
    let mut t = Table::new(&["F", "re_lambda", "im_lambda", "tau_R", "soft"]);
    for r in &results {
        t.push(vec![
            r.f.into(),
            r.lambda_slow.re.into(),
            r.lambda_slow.im.into(),
            r.tau_r.into(),
            r.soft_mode.into(),
        ]);
    }
    let csv = files.table("spectrum.csv", &t)?;
    let cutoff_check = match s.check_cutoff {
        Some(n) => {
            let f = results[transition.argmax_index].f;
            let other = liouvillian_spectrum(f, &params.with_cutoff(n)?)?;
            let base = results[transition.argmax_index].lambda_slow;
            Some(json!({
                "cutoff": n,
                "F": f,
                "relative_change": (other.lambda_slow - base).norm() / base.norm(),
            }))
        }
        None => None,
    };
    files.text(
        "plot.py",
        &plot_script(&config.name, &[panel(file_name(&csv), "F", &["tau_R"], false, None)]),
    )?;
    let summary = json!({
        "cutoff": params.cutoff,
        "transition": transition,
        "cutoff_check": cutoff_check,
    });
    files.json("transition.json", &summary)?;
    Ok((true, summary))
}

fn scan_for(config: &Config, range: Option<crate::config::RangeSection>, ratios: Vec<f64>, samples: usize) -> Result<RateScan> {
    let (f_min, f_max) = config.range_or_default(range)?;
    Ok(RateScan {
        f_min,
        f_max,
        ratios,
        samples,
    })
}

fn fit_json(scan: &AreaScan, offset_min_ratio: Option<f64>) -> serde_json::Value {
    let double = fit_double_power_law(scan);
    let mut v = match &double {
        Ok(f) => json!({ "exponent_slow": f.exponent_slow, "tau": f.tau, "double_power_law": f }),
        Err(e) => json!({ "exponent_slow": null, "tau": null, "double_power_law_error": e.to_string() }),
    };
    if let Some(min) = offset_min_ratio {
        let (t, a): (Vec<f64>, Vec<f64>) = scan
            .t_s
            .iter()
            .zip(&scan.area)
            .filter(|(t, _)| **t / scan.df >= min)
            .map(|(t, a)| (*t, *a))
            .unzip();
        v["offset_power_law"] = match fit_offset_power_law(&t, &a) {
            Ok(f) => json!(f),
            Err(e) => json!({ "error": e.to_string() }),
        };
    }
    v
}

fn model_label(m: Model) -> &'static str {
    match m {
        Model::Quantum => "quantum",
        Model::MeanField => "mean-field",
        Model::QuasiAdiabatic => "quasi-adiabatic",
    }
}

fn run_area_scan(config: &Config, jobs: usize, files: &mut OutputSet) -> Result<Outcome> {
    let s = config.require(&config.area_scan, "area_scan")?;
    let scan = scan_for(config, s.range, s.ratios.values()?, s.samples)?;
    let base = config.params_for_range(scan.f_max)?;
    let options = config.evolve_options();
    let mut t = Table::new(&["model", "n_th", "t_s", "ratio", "area"]);
    let mut series = Vec::new();
    let mut safe = true;
    for &model in &s.models {
        let occupations = match (model, &s.thermal_occupations) {
            (Model::Quantum, Some(list)) => list.clone(),
            _ => vec![base.thermal_occupation],
        };
        for n_th in occupations {
            let p = base.with_thermal_occupation(n_th)?;
            let out = area_scan(model, &p, &scan, &options, jobs)?;
            safe &= out.cutoff_safe;
            for (ts, a) in out.scan.t_s.iter().zip(&out.scan.area) {
                t.push(vec![model_label(model).into(), n_th.into(), (*ts).into(), (ts / out.scan.df).into(), (*a).into()]);
            }
            let mut fit = fit_json(&out.scan, (model == Model::MeanField).then_some(s.offset_fit_min_ratio));
            fit["model"] = json!(model_label(model));
            fit["n_th"] = json!(n_th);
            fit["cutoff_safe"] = json!(out.cutoff_safe);
            series.push(fit);
        }
    }
    let csv = files.table("area.csv", &t)?;
    let mut fit = json!({
        "exponent_slow": series[0]["exponent_slow"],
        "tau": series[0]["tau"],
        "cutoff": base.cutoff,
        "range": [scan.f_min, scan.f_max],
        "series": series,
    });
    files.json("fit.json", &fit)?;
    files.text(
        "plot.py",
        &plot_script(&config.name, &[panel(file_name(&csv), "ratio", &["area"], true, Some("n_th"))]),
    )?;
    fit["series"] = json!(fit["series"].as_array().map_or(0, |a| a.len()));
    Ok((safe, fit))
}

fn run_resonance_map(config: &Config, jobs: usize, files: &mut OutputSet) -> Result<Outcome> {
    let s = config.require(&config.resonance_map, "resonance_map")?;
    let grid = s.grid()?;
    let template = config.params_for_range(1.0)?;
    let (other_axis, other_default) = match s.axis {
        crate::scan::MapAxis::Nonlinearity => ("detuning", template.detuning),
        crate::scan::MapAxis::Detuning => ("nonlinearity", template.nonlinearity),
    };
    let curves = s.curves.clone().unwrap_or_else(|| vec![other_default]);
    let mut t = Table::new(&["curve", "value", "tau"]);
    let mut summary = Vec::new();
    for c in curves {
        let mut p = template;
        match s.axis {
            crate::scan::MapAxis::Nonlinearity => p.detuning = c,
            crate::scan::MapAxis::Detuning => p.nonlinearity = c,
        }
        let map = characteristic_time_map(&p, s.axis, &grid, &s.method, config.system.cutoff, &config.evolve_options(), jobs)?;
        for (x, tau) in map.grid.iter().zip(&map.tau) {
            t.push(vec![c.into(), (*x).into(), (*tau).into()]);
        }
        let resonances = match s.axis {
            crate::scan::MapAxis::Nonlinearity => resonance_positions(c, 6),
            crate::scan::MapAxis::Detuning => Vec::new(),
        };
        summary.push(json!({ other_axis: c, "minima": map.minima, "resonances": resonances }));
    }
    let csv = files.table("tau.csv", &t)?;
    files.text(
        "plot.py",
        &plot_script(&config.name, &[panel(file_name(&csv), "value", &["tau"], false, Some("curve"))]),
    )?;
    Ok((true, json!({ "curves": summary })))
}

fn run_kz(config: &Config, jobs: usize, files: &mut OutputSet) -> Result<Outcome> {
    let s = config.require(&config.spectrum, "spectrum")?;
    let k = config.require(&config.kz, "kz")?;
    let grid = s.values()?;
    let params = config.params_for_range(grid[grid.len() - 1])?;
    let (results, tr) = slow_mode_scan(&grid, &params, jobs)?;
    let tau_r: Vec<f64> = results.iter().map(|r| r.tau_r).collect();
    let mut t = Table::new(&["ratio", "f_left", "f_right", "delta_F", "asymptote", "ratio_to_asymptote"]);
    let mut failures = Vec::new();
    for r in k.ratios.values()? {
        // Only t_s/ΔF enters the window, so ΔF = 1.
        match kz_window(r, 1.0, &grid, &tau_r, tr.f_c, tr.tau_t) {
            Ok(w) => t.push(vec![
                r.into(),
                w.f_left.into(),
                w.f_right.into(),
                w.delta_f.into(),
                (2.0 * tr.tau_t / r).into(),
                w.asymptote_ratio(1.0).into(),
            ]),
            Err(e) => {
                failures.push(json!({ "ratio": r, "error": e.to_string() }));
                t.push(vec![r.into(), Cell::Missing, Cell::Missing, Cell::Missing, (2.0 * tr.tau_t / r).into(), Cell::Missing]);
            }
        }
    }
    let csv = files.table("kz.csv", &t)?;
    files.text(
        "plot.py",
        &plot_script(&config.name, &[panel(file_name(&csv), "ratio", &["delta_F", "asymptote"], true, None)]),
    )?;
    Ok((true, json!({ "transition": tr, "out_of_range": failures, "cutoff": params.cutoff })))
}

fn run_dimer(config: &Config, jobs: usize, files: &mut OutputSet) -> Result<Outcome> {
    let s = config.require(&config.dimer, "dimer")?;
    let dimer = config.dimer_params()?;
    let (f_min, f_max) = match s.range {
        Some(r) => (r.f_min, r.f_max),
        None => crate::mean_field::default_sweep_range(&crate::dimer::symmetric_site_params(&dimer)),
    };
    let options = config.evolve_options();
    let rho0 = crate::dimer::dimer_initial_state(&dimer, f_min, options.tail_tol)?;
    let proto = SweepProtocol::from_rate(f_min, f_max, s.trace_ratio)?.with_samples(s.samples)?;
    let tr = dimer_sweep(&rho0, &proto, &dimer, &options)?;
    let mut t = Table::new(&[
        "F", "n1_up", "n1_down", "n2_up", "n2_down", "g2_up", "g2_down", "g2_12_up", "g2_12_down",
    ]);
    for i in 0..tr.trace.f_grid.len() {
        t.push(vec![
            tr.trace.f_grid[i].into(),
            tr.trace.n_up[i].into(),
            tr.trace.n_down[i].into(),
            tr.n2_up[i].into(),
            tr.n2_down[i].into(),
            tr.trace.g2_up[i].into(),
            tr.trace.g2_down[i].into(),
            tr.g2_12_up[i].into(),
            tr.g2_12_down[i].into(),
        ]);
    }
    let trace_csv = files.table("trace.csv", &t)?;
    let mut safe = tr.trace.cutoff_safe();
    let mut panels = vec![panel(file_name(&trace_csv), "F", &["g2_12_up", "g2_12_down"], false, None)];
    let (peak_up, peak_down) = tr.g2_12_peaks();
    let mut summary = json!({
        "cutoff": dimer.site.cutoff,
        "hopping": dimer.hopping,
        "range": [f_min, f_max],
        "g2_12_peak_up": peak_up,
        "g2_12_peak_down": peak_down,
        "max_site_asymmetry": tr.max_site_asymmetry,
    });
    if let Some(r) = &s.ratios {
        let scan = RateScan {
            f_min,
            f_max,
            ratios: r.values()?,
            samples: s.samples,
        };
        let mut area = Table::new(&["model", "t_s", "ratio", "area"]);
        let mut fits = Vec::new();
        let mut models = vec![false];
        if s.mean_field {
            models.push(true);
        }
        for mf in models {
            let out = dimer_area_scan(&dimer, &scan, &options, mf, jobs)?;
            safe &= out.cutoff_safe;
            let label = if mf { "mean-field" } else { "quantum" };
            for (ts, a) in out.scan.t_s.iter().zip(&out.scan.area) {
                area.push(vec![label.into(), (*ts).into(), (ts / out.scan.df).into(), (*a).into()]);
            }
            let offset = config.area_scan.as_ref().map_or(100.0, |a| a.offset_fit_min_ratio);
            let mut fit = fit_json(&out.scan, mf.then_some(offset));
            fit["model"] = json!(label);
            fits.push(fit);
        }
        let csv = files.table("area.csv", &area)?;
        files.json("fit.json", &json!({ "series": fits }))?;
        panels.push(panel(file_name(&csv), "ratio", &["area"], true, Some("model")));
        summary["fits"] = json!(fits);
    }
    files.text("plot.py", &plot_script(&config.name, &panels))?;
    Ok((safe, summary))
}

fn run_qa(config: &Config, jobs: usize, files: &mut OutputSet) -> Result<Outcome> {
    let s = config.require(&config.qa, "qa")?;
    let scan = scan_for(config, s.range, s.ratios.values()?, s.samples)?;
    let params = config.params_for_range(scan.f_max)?;
    let options = config.evolve_options();
    let qa = area_scan(Model::QuasiAdiabatic, &params, &scan, &options, jobs)?;
    let exact = if s.compare_exact {
        Some(area_scan(Model::Quantum, &params, &scan, &options, jobs)?)
    } else {
        None
    };
    let mut t = Table::new(&["ratio", "area_qa", "area_exact", "max_deviation"]);
    for i in 0..qa.scan.t_s.len() {
        let (a_ex, dev) = match &exact {
            Some(e) => (Some(e.scan.area[i]), Some(max_deviation(&qa.traces[i], &e.traces[i])?)),
            None => (None, None),
        };
        t.push(vec![(qa.scan.t_s[i] / qa.scan.df).into(), qa.scan.area[i].into(), a_ex.into(), dev.into()]);
    }
    let csv = files.table("area.csv", &t)?;
    let fit = json!({
        "quasi_adiabatic": fit_json(&qa.scan, None),
        "exact": exact.as_ref().map(|e| fit_json(&e.scan, None)),
    });
    files.json("fit.json", &fit)?;
    files.text(
        "plot.py",
        &plot_script(&config.name, &[panel(file_name(&csv), "ratio", &["area_qa", "area_exact"], true, None)]),
    )?;
    let safe = exact.as_ref().map_or(true, |e| e.cutoff_safe);
    // The quasi-adiabatic traces have no density matrix, so only the exact run can be cutoff-unsafe.
    let _ = qa_sweep;
    Ok((safe, fit))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWEEP: &str = r#"
name = "mini"
[system]
detuning = 2.0
nonlinearity = 0.5
cutoff = 16
[sweep]
range = { f_min = 0.0, f_max = 1.5 }
ratios = [5.0]
samples = 21
"#;

    #[test]
    fn sweep_writes_trace_plot_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let c = Config::from_toml(SWEEP).unwrap();
        let r = run(Command::Sweep, &c, 1, dir.path()).unwrap();
        assert!(r.cutoff_safe);
        assert_eq!(r.outputs, vec!["mini_trace.csv", "mini_plot.py", "mini_manifest.json"]);
        let csv = std::fs::read_to_string(dir.path().join("mini_trace.csv")).unwrap();
        assert!(csv.starts_with("F,n_up,n_down,g2_up,g2_down"));
        assert_eq!(csv.lines().count(), 22);
    }

    #[test]
    fn manifest_rerun_is_bit_identical() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let c = Config::from_toml(SWEEP).unwrap();
        run(Command::Sweep, &c, 1, a.path()).unwrap();
        let again = Config::load(&a.path().join("mini_manifest.json")).unwrap();
        assert_eq!(again, c);
        run(Command::Sweep, &again, 1, b.path()).unwrap();
        for f in ["mini_trace.csv", "mini_manifest.json"] {
            assert_eq!(
                std::fs::read(a.path().join(f)).unwrap(),
                std::fs::read(b.path().join(f)).unwrap()
            );
        }
    }

    #[test]
    fn exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("good.toml");
        std::fs::write(&good, SWEEP).unwrap();
        let bad = dir.path().join("bad.toml");
        std::fs::write(&bad, SWEEP.replace("detuning", "detuneing")).unwrap();
        let tiny = dir.path().join("tiny.toml");
        std::fs::write(&tiny, SWEEP.replace("cutoff = 16", "cutoff = 3")).unwrap();
        let out = dir.path().to_str().unwrap();
        let code = |cfg: &Path, cmd: &str| main_with_args(["hysteresis-lab", cmd, "--config", cfg.to_str().unwrap(), "--out", out]);
        assert_eq!(code(&good, "sweep"), 0);
        assert_eq!(code(&bad, "sweep"), 2);
        assert_eq!(code(&good, "spectrum"), 2);
        assert_eq!(code(&tiny, "sweep"), 4);
        assert!(dir.path().join("mini_trace.csv").exists());
    }
}
