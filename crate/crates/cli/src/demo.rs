//! Canned studies. Each writes CSVs plus a `MANIFEST` naming every file and
//! the checks it supports.

use std::path::{Path, PathBuf};

use plasmon_shift::coupling::{LorentzianOscillators, Oscillator};
use plasmon_shift::dynamics::{DecayTrajectory, DynamicsProblem, EvolutionSpectrum};
use plasmon_shift::levelshift::{
    compare_methods, imag_axis_tail, shift_table, QuadraturePolicy, ShiftMethod, ShiftSubject, REFERENCE_XI_MAX,
};
use plasmon_shift::quadrature::{find_peaks, geomspace, linspace};
use plasmon_shift::spectrum::{extrapolate_zero, spectrum_to_csv, CouplingSpectrum, DEFAULT_ZERO_FIT_WINDOW};
use plasmon_shift::{AnalyticCoupling, Complex64, SphereCoupling, SphereSystem};

use crate::commands::{max_error_csv, num, spectral_run, volterra_run, write_file};
use crate::config::RunFile;
use crate::error::{CliError, CliResult};
use crate::plot::dynamics_plot_script;
use crate::{DemoArgs, RunReport, SpectralShift};

pub const DEMOS: [(&str, &str); 5] = [
    ("fig2-spectrum", "coupling strength of a gold sphere on the real and imaginary axes"),
    ("fig3-shift-comparison", "level-shift errors of the Hilbert and subtractive methods at four cut-offs"),
    ("fig4-geometry-sweep", "the same comparison for two more geometries"),
    ("fig5-dynamics", "Volterra and spectral decay dynamics near a gold sphere"),
    ("fig8-wideband", "cut-off sensitivity of both solvers on a synthetic wide-band spectrum"),
];

/// Shift comparison cut-offs and frequency window shared by the sweeps.
pub const CUTOFFS: [f64; 4] = [10.0, 20.0, 50.0, 200.0];

pub fn shift_grid() -> Vec<f64> {
    linspace(1.0, 8.0, 71)
}

/// Reservoir of the wide-band study: a narrow mode just above the emitter
/// plus a broad response centred at 30 eV that a 20 eV cut-off misses.
pub fn wideband_oscillators() -> LorentzianOscillators {
    LorentzianOscillators::new(vec![
        Oscillator { strength: 0.0025, center: 2.55, width: 0.05 },
        Oscillator { strength: 0.5, center: 30.0, width: 6.0 },
    ])
    .expect("valid oscillators")
}

pub const WIDEBAND_OMEGA0: f64 = 2.5;

pub fn wideband_spectrum() -> CliResult<CouplingSpectrum> {
    let grid = linspace(0.01, 50.0, 10_000);
    Ok(CouplingSpectrum::from_source(&wideband_oscillators(), &grid)?
        .with_comments(vec!["synthetic wide-band coupling: mode at 2.55 eV plus broad response at 30 eV".into()]))
}

struct Manifest {
    name: &'static str,
    entries: Vec<(String, &'static str)>,
}

impl Manifest {
    fn add(&mut self, file: impl Into<String>, feeds: &'static str) {
        self.entries.push((file.into(), feeds));
    }

    fn render(&self) -> String {
        let mut out = format!("# demo {}\n# file\tfeeds\n", self.name);
        for (f, feeds) in &self.entries {
            out.push_str(&format!("{f}\t{feeds}\n"));
        }
        out
    }
}

pub fn run_demo_command(a: &DemoArgs) -> CliResult<RunReport> {
    if a.list {
        let mut report = RunReport::default();
        report.lines = DEMOS.iter().map(|(n, d)| format!("{n}\t{d}")).collect();
        return Ok(report);
    }
    let name = a.name.as_deref().ok_or_else(|| CliError::Usage(unknown_demo("")))?;
    let dir = a
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("demo-{name}")));
    run_demo(name, &dir)
}

fn unknown_demo(name: &str) -> String {
    let names: Vec<&str> = DEMOS.iter().map(|(n, _)| *n).collect();
    if name.is_empty() {
        format!("missing demo name; available: {}", names.join(", "))
    } else {
        format!("unknown demo {name:?}; available: {}", names.join(", "))
    }
}

/// Runs demo `name` into `dir`.
pub fn run_demo(name: &str, dir: &Path) -> CliResult<RunReport> {
    let Some((name, _)) = DEMOS.iter().find(|(n, _)| *n == name) else {
        return Err(CliError::Usage(unknown_demo(name)));
    };
    let mut report = RunReport::default();
    let mut manifest = Manifest { name, entries: Vec::new() };
    match *name {
        "fig2-spectrum" => fig2(dir, &mut report, &mut manifest)?,
        "fig3-shift-comparison" => fig3(dir, &mut report, &mut manifest)?,
        "fig4-geometry-sweep" => fig4(dir, &mut report, &mut manifest)?,
        "fig5-dynamics" => fig5(dir, &mut report, &mut manifest)?,
        "fig8-wideband" => fig8(dir, &mut report, &mut manifest)?,
        _ => unreachable!(),
    }
    let mut echo = RunFile::default();
    echo.entries.push(("command".into(), "demo".into()));
    echo.entries.push(("name".into(), name.to_string()));
    echo.entries.push(("out-dir".into(), dir.display().to_string()));
    write_file(&mut report, &dir.join("run.conf"), &echo.render())?;
    manifest.add("run.conf", "configuration echo");
    write_file(&mut report, &dir.join("MANIFEST"), &manifest.render())?;
    Ok(report)
}

fn gold_sphere(radius_nm: f64, gap_nm: f64) -> CliResult<SphereCoupling> {
    Ok(SphereCoupling::new(SphereSystem::gold_in_vacuum(radius_nm, gap_nm, 24.0)?))
}

fn fig2(dir: &Path, report: &mut RunReport, m: &mut Manifest) -> CliResult<()> {
    let src = gold_sphere(20.0, 1.0)?;
    let grid = linspace(0.1, 10.0, 991);
    let spec = CouplingSpectrum::from_source(&src, &grid)?.with_dipole(24.0)?;
    write_file(report, &dir.join("coupling_real_axis.csv"), &spectrum_to_csv(&spec))?;
    m.add("coupling_real_axis.csv", "plasmon peak placement");

    let im: Vec<f64> = spec.values().iter().map(|g| g.im).collect();
    let peaks = find_local_maxima(&im);
    let dominant = peaks.iter().copied().max_by(|&a, &b| im[a].total_cmp(&im[b]));
    let mut csv = String::from("omega_ev,im_g_ev,dominant\n");
    for &i in &peaks {
        csv.push_str(&format!("{:.16e},{:.16e},{}\n", grid[i], im[i], Some(i) == dominant));
    }
    write_file(report, &dir.join("peaks.csv"), &csv)?;
    m.add("peaks.csv", "plasmon peak placement");
    if let Some(i) = dominant {
        report.lines.push(format!("dominant Im g peak at {:.3} eV", grid[i]));
    }

    let xi = geomspace(0.1, REFERENCE_XI_MAX, 241);
    let mut csv = String::from("xi_ev,g_re_ev,g_im_ev\n");
    for &x in &xi {
        let g = src.coupling_complex(Complex64::new(0.0, x))?;
        csv.push_str(&format!("{x:.16e},{:.16e},{:.16e}\n", g.re, g.im));
    }
    write_file(report, &dir.join("coupling_imag_axis.csv"), &csv)?;
    m.add("coupling_imag_axis.csv", "imaginary-axis reality");

    let policy = QuadraturePolicy::default();
    let omega = 5.0;
    let mut csv = format!("# omega_ev = {omega}, xi_max_ev = {REFERENCE_XI_MAX}\nxi_ev,diff_ev\n");
    for x in [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0] {
        let d = imag_axis_tail(&src, omega, x, REFERENCE_XI_MAX, &policy)?;
        csv.push_str(&format!("{x:.16e},{d:.16e}\n"));
    }
    write_file(report, &dir.join("imag_axis_tail.csv"), &csv)?;
    m.add("imag_axis_tail.csv", "imaginary-axis tail magnitude");
    Ok(())
}

/// Local maxima of a sampled curve, including broad ones `find_peaks`
/// would skip.
fn find_local_maxima(ys: &[f64]) -> Vec<usize> {
    let mut out: Vec<usize> = (1..ys.len().saturating_sub(1))
        .filter(|&i| ys[i] > ys[i - 1] && ys[i] >= ys[i + 1])
        .collect();
    out.extend(find_peaks(ys));
    out.sort_unstable();
    out.dedup();
    out
}

fn comparison(
    dir: &Path,
    tag: &str,
    src: &SphereCoupling,
    report: &mut RunReport,
    m: &mut Manifest,
    feeds: &'static str,
) -> CliResult<()> {
    let policy = QuadraturePolicy::default();
    let grid = shift_grid();
    let cmp = compare_methods(ShiftSubject::Analytic(src), &grid, &CUTOFFS, &policy)?;
    let file = format!("{tag}comparison.csv");
    write_file(report, &dir.join(&file), &cmp.to_csv())?;
    m.add(file, feeds);
    let file = format!("{tag}max_errors.csv");
    let summary = max_error_csv(&cmp, &CUTOFFS);
    write_file(report, &dir.join(&file), &summary)?;
    m.add(file, feeds);
    report
        .lines
        .extend(summary.lines().skip(1).map(|l| format!("{tag}{l}")));
    Ok(())
}

fn fig3(dir: &Path, report: &mut RunReport, m: &mut Manifest) -> CliResult<()> {
    let src = gold_sphere(20.0, 2.0)?;
    comparison(dir, "", &src, report, m, "subtractive versus Hilbert accuracy")?;

    let policy = QuadraturePolicy::default();
    let grid = shift_grid();
    let subject = ShiftSubject::Analytic(&src);
    let lo = shift_table(subject, &grid, ShiftMethod::ImagAxis, 100.0, &policy)?;
    let hi = shift_table(subject, &grid, ShiftMethod::ImagAxis, REFERENCE_XI_MAX, &policy)?;
    let mut csv = String::from("omega_ev,delta_xi100_ev,delta_xi200_ev,difference_ev\n");
    for i in 0..grid.len() {
        csv.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e}\n",
            grid[i],
            lo.delta[i],
            hi.delta[i],
            lo.delta[i] - hi.delta[i]
        ));
    }
    write_file(report, &dir.join("reference_cutoff.csv"), &csv)?;
    m.add("reference_cutoff.csv", "reference cut-off insensitivity");
    write_file(report, &dir.join("shift_imag-axis_200.csv"), &hi.to_csv())?;
    m.add("shift_imag-axis_200.csv", "reference level shift");
    let sub = shift_table(subject, &grid, ShiftMethod::SubKk, 10.0, &policy)?;
    write_file(report, &dir.join("shift_sub-kk_10.csv"), &sub.to_csv())?;
    m.add("shift_sub-kk_10.csv", "subtractive versus Hilbert accuracy");
    Ok(())
}

fn fig4(dir: &Path, report: &mut RunReport, m: &mut Manifest) -> CliResult<()> {
    for (a, h) in [(10.0, 2.0), (20.0, 1.0)] {
        let src = gold_sphere(a, h)?;
        let tag = format!("a{}_h{}_", num(a), num(h));
        comparison(dir, &tag, &src, report, m, "geometry sweep")?;
    }
    Ok(())
}

fn dynamics_problem(omega0: f64, omega_max: f64, dt_fs: f64) -> CliResult<DynamicsProblem> {
    Ok(DynamicsProblem::new(omega0, omega_max, 50.0, dt_fs)?)
}

fn record_spectral(
    dir: &Path,
    tag: &str,
    run: (EvolutionSpectrum, DecayTrajectory),
    report: &mut RunReport,
    m: &mut Manifest,
    feeds: &'static str,
) -> CliResult<DecayTrajectory> {
    let (spec, traj) = run;
    let file = format!("evolution_spectrum_{tag}.csv");
    write_file(report, &dir.join(&file), &spec.to_csv())?;
    m.add(file, "normalization");
    let file = format!("spectral_{tag}.csv");
    write_file(report, &dir.join(&file), &traj.to_csv())?;
    m.add(file, feeds);
    Ok(traj)
}

fn record_volterra(
    dir: &Path,
    tag: &str,
    traj: DecayTrajectory,
    report: &mut RunReport,
    m: &mut Manifest,
    feeds: &'static str,
) -> CliResult<DecayTrajectory> {
    let file = format!("volterra_{tag}.csv");
    write_file(report, &dir.join(&file), &traj.to_csv())?;
    m.add(file, feeds);
    Ok(traj)
}

fn summary_rows(rows: &[(&str, &DecayTrajectory, &DecayTrajectory)]) -> CliResult<String> {
    let mut out = String::from("comparison,max_population_difference\n");
    for (label, a, b) in rows {
        out.push_str(&format!("{label},{:.16e}\n", a.max_population_difference(b)?));
    }
    Ok(out)
}

fn fig5(dir: &Path, report: &mut RunReport, m: &mut Manifest) -> CliResult<()> {
    let src = gold_sphere(20.0, 1.0)?.with_vacuum(true);
    let g0 = src.static_coupling()?;
    let v10 = volterra_run(&src, &dynamics_problem(5.0, 10.0, 0.01)?)?;
    let v10 = record_volterra(dir, "wmax10", v10, report, m, "cross-method agreement; Volterra cut-off stability")?;
    let v20 = volterra_run(&src, &dynamics_problem(5.0, 20.0, 0.01)?)?;
    let v20 = record_volterra(dir, "wmax20", v20, report, m, "Volterra cut-off stability")?;
    let p10 = dynamics_problem(5.0, 10.0, 0.01)?;
    let s10 = spectral_run(&src, g0, SpectralShift::SubKk, &p10)?;
    let s10 = record_spectral(dir, "wmax10", s10, report, m, "cross-method agreement")?;

    let summary = summary_rows(&[
        ("volterra_wmax10 vs spectral_wmax10", &v10, &s10),
        ("volterra_wmax10 vs volterra_wmax20", &v10, &v20),
    ])?;
    write_file(report, &dir.join("summary.csv"), &summary)?;
    m.add("summary.csv", "cross-method agreement; Volterra cut-off stability");
    report.lines.extend(summary.lines().skip(1).map(String::from));
    write_file(
        report,
        &dir.join("plot_dynamics.py"),
        &dynamics_plot_script(&["volterra_wmax10.csv", "volterra_wmax20.csv", "spectral_wmax10.csv"]),
    )?;
    m.add("plot_dynamics.py", "plotting helper");
    Ok(())
}

fn fig8(dir: &Path, report: &mut RunReport, m: &mut Manifest) -> CliResult<()> {
    let spec = wideband_spectrum()?;
    write_file(report, &dir.join("wideband_spectrum.csv"), &spectrum_to_csv(&spec))?;
    m.add("wideband_spectrum.csv", "wide-band cut-off ordering (input)");
    let g0 = extrapolate_zero(&spec, DEFAULT_ZERO_FIT_WINDOW)?.intercept;

    let w0 = WIDEBAND_OMEGA0;
    let feeds = "wide-band cut-off ordering";
    let s10 = spectral_run(&spec, g0, SpectralShift::SubKk, &dynamics_problem(w0, 10.0, 0.02)?)?;
    let s10 = record_spectral(dir, "wmax10", s10, report, m, feeds)?;
    let s50 = spectral_run(&spec, g0, SpectralShift::SubKk, &dynamics_problem(w0, 50.0, 0.02)?)?;
    let s50 = record_spectral(dir, "wmax50", s50, report, m, feeds)?;
    let v20 = volterra_run(&spec, &dynamics_problem(w0, 20.0, 0.02)?)?;
    let v20 = record_volterra(dir, "wmax20", v20, report, m, feeds)?;
    let v50 = volterra_run(&spec, &dynamics_problem(w0, 50.0, 0.02)?)?;
    let v50 = record_volterra(dir, "wmax50", v50, report, m, feeds)?;

    let summary = summary_rows(&[
        ("spectral_wmax10 vs spectral_wmax50", &s10, &s50),
        ("volterra_wmax20 vs volterra_wmax50", &v20, &v50),
        ("spectral_wmax50 vs volterra_wmax50", &s50, &v50),
    ])?;
    write_file(report, &dir.join("summary.csv"), &summary)?;
    m.add("summary.csv", feeds);
    report.lines.extend(summary.lines().skip(1).map(String::from));
    write_file(
        report,
        &dir.join("plot_dynamics.py"),
        &dynamics_plot_script(&["spectral_wmax10.csv", "spectral_wmax50.csv", "volterra_wmax20.csv", "volterra_wmax50.csv"]),
    )?;
    m.add("plot_dynamics.py", "plotting helper");
    Ok(())
}
