use std::path::{Path, PathBuf};

use plasmon_shift::coupling::LorentzianOscillators;
use plasmon_shift::dynamics::{
    evolution_spectrum, spectral_dynamics, volterra_solve, DecayTrajectory, DynamicsProblem,
    EvolutionSpectrum, FreeEmitter, HilbertSelfEnergy, SelfEnergy, SubtractiveSelfEnergy,
};
use plasmon_shift::levelshift::{compare_methods, shift_table, MethodComparison, QuadraturePolicy, ShiftMethod, ShiftSubject};
use plasmon_shift::materials::TabulatedPermittivity;
use plasmon_shift::quadrature::linspace;
use plasmon_shift::spectrum::{extrapolate_zero, ingest_spectrum, spectrum_to_csv, CouplingSpectrum};
use plasmon_shift::{CouplingSource, PermittivityModel, SphereCoupling, SphereSystem};

use crate::config::RunFile;
use crate::error::{CliError, CliResult};
use crate::plot::dynamics_plot_script;
use crate::{
    DynamicsArgs, GfArgs, PolicyArgs, ReservoirArgs, RunReport, ShiftArgs, SolverChoice, SpectralShift, SphereArgs,
};

pub(crate) fn write_file(report: &mut RunReport, path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))?;
    report.files.push(path.to_path_buf());
    Ok(())
}

/// Compact, round-trippable number for file names and echoes.
pub(crate) fn num(x: f64) -> String {
    format!("{x}")
}

fn list(xs: &[f64]) -> String {
    xs.iter().map(|x| num(*x)).collect::<Vec<_>>().join(",")
}

pub(crate) fn sphere_coupling(a: &SphereArgs) -> CliResult<SphereCoupling> {
    let material = match (&a.permittivity_table, a.sphere_eps) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "give at most one of --sphere-eps and --permittivity-table".into(),
            ))
        }
        (Some(path), None) => PermittivityModel::Tabulated(TabulatedPermittivity::from_csv(path)?),
        (None, Some(eps)) => PermittivityModel::constant(eps),
        (None, None) => PermittivityModel::drude_gold(),
    };
    let system = SphereSystem::new(a.radius_nm, a.gap_nm, a.host_eps, material, a.dipole_debye)?;
    Ok(SphereCoupling::new(system).with_vacuum(a.include_vacuum))
}

fn echo_sphere(a: &SphereArgs, f: &mut RunFile) {
    let e = &mut f.entries;
    e.push(("radius-nm".into(), num(a.radius_nm)));
    e.push(("gap-nm".into(), num(a.gap_nm)));
    e.push(("dipole-debye".into(), num(a.dipole_debye)));
    e.push(("host-eps".into(), num(a.host_eps)));
    if let Some(eps) = a.sphere_eps {
        e.push(("sphere-eps".into(), num(eps)));
    }
    if let Some(p) = &a.permittivity_table {
        e.push(("permittivity-table".into(), p.display().to_string()));
    }
    e.push(("include-vacuum".into(), a.include_vacuum.to_string()));
}

fn echo_reservoir(a: &ReservoirArgs, f: &mut RunFile) {
    echo_sphere(&a.sphere, f);
    if let Some(p) = &a.spectrum {
        f.entries.push(("spectrum".into(), p.display().to_string()));
    }
    if let Some(g0) = a.g0_ev {
        f.entries.push(("g0-ev".into(), num(g0)));
    }
    f.entries.push(("zero-fit-window".into(), list(&a.zero_fit_window)));
}

fn echo_policy(a: &PolicyArgs, f: &mut RunFile) {
    f.entries.push(("node-budget".into(), a.node_budget.to_string()));
    f.entries.push(("abs-tol".into(), num(a.abs_tol)));
}

fn policy(a: &PolicyArgs) -> CliResult<QuadraturePolicy> {
    let p = QuadraturePolicy {
        node_budget: a.node_budget,
        abs_tol: a.abs_tol,
        ..Default::default()
    };
    p.validate()?;
    Ok(p)
}

/// The coupling a command works on.
pub(crate) enum Reservoir {
    Sphere(SphereCoupling),
    Spectrum(CouplingSpectrum),
}

impl Reservoir {
    pub(crate) fn from_args(a: &ReservoirArgs) -> CliResult<Self> {
        match &a.spectrum {
            Some(path) => Ok(Reservoir::Spectrum(ingest_spectrum(path)?)),
            None => Ok(Reservoir::Sphere(sphere_coupling(&a.sphere)?)),
        }
    }

    pub(crate) fn source(&self) -> &dyn CouplingSource {
        match self {
            Reservoir::Sphere(s) => s,
            Reservoir::Spectrum(s) => s,
        }
    }

    fn is_analytic(&self) -> bool {
        matches!(self, Reservoir::Sphere(s) if s.system.sphere().is_analytic())
    }

    /// `Re g(0)`: from the model when analytic, else the flag or the
    /// low-frequency line fit.
    pub(crate) fn static_coupling(&self, a: &ReservoirArgs) -> CliResult<f64> {
        use plasmon_shift::AnalyticCoupling;
        if let Some(g0) = a.g0_ev {
            return Ok(g0);
        }
        match self {
            Reservoir::Sphere(s) if self.is_analytic() => Ok(s.static_coupling()?),
            Reservoir::Sphere(_) => Err(CliError::Usage(
                "tabulated permittivity has no static limit; pass --g0-ev".into(),
            )),
            Reservoir::Spectrum(spec) => {
                let [lo, hi] = a.zero_fit_window[..] else {
                    return Err(CliError::Usage("--zero-fit-window needs two values".into()));
                };
                let fit = extrapolate_zero(spec, (lo, hi))?;
                log::info!(
                    "Re g(0) = {:.6e} eV from {} samples in [{lo}, {hi}] eV (residual {:.2e})",
                    fit.intercept,
                    fit.samples,
                    fit.residual_norm
                );
                Ok(fit.intercept)
            }
        }
    }

    pub(crate) fn subject(&self, g0: f64) -> ShiftSubject<'_> {
        match self {
            Reservoir::Sphere(s) if self.is_analytic() => ShiftSubject::Analytic(s),
            _ => ShiftSubject::Sampled { source: self.source(), g0 },
        }
    }
}

pub(crate) fn gf(a: &GfArgs) -> CliResult<RunReport> {
    if a.points < 2 || !(a.omega_min_ev > 0.0 && a.omega_max_ev > a.omega_min_ev) {
        return Err(CliError::Usage(format!(
            "need 0 < --omega-min-ev < --omega-max-ev and --points ≥ 2, got [{}, {}] with {} points",
            a.omega_min_ev, a.omega_max_ev, a.points
        )));
    }
    let src = sphere_coupling(&a.sphere)?;
    let grid = linspace(a.omega_min_ev, a.omega_max_ev, a.points);
    let spec = CouplingSpectrum::from_source(&src, &grid)?.with_dipole(a.sphere.dipole_debye)?;
    let mut report = RunReport::default();
    write_file(&mut report, &a.out, &spectrum_to_csv(&spec))?;

    let mut echo = RunFile::default();
    echo.entries.push(("command".into(), "gf".into()));
    echo_sphere(&a.sphere, &mut echo);
    echo.entries.push(("omega-min-ev".into(), num(a.omega_min_ev)));
    echo.entries.push(("omega-max-ev".into(), num(a.omega_max_ev)));
    echo.entries.push(("points".into(), a.points.to_string()));
    echo.entries.push(("out".into(), a.out.display().to_string()));
    let mut conf = a.out.clone().into_os_string();
    conf.push(".conf");
    write_file(&mut report, &PathBuf::from(conf), &echo.render())?;
    Ok(report)
}

pub(crate) fn max_error_csv(cmp: &MethodComparison, cutoffs: &[f64]) -> String {
    let mut out = String::from("method,omega_max_ev,max_abs_error_ev\n");
    for method in [ShiftMethod::Hilbert, ShiftMethod::SubKk] {
        for &cut in cutoffs {
            if let Some(e) = cmp.max_abs_error(method, cut) {
                out.push_str(&format!("{method},{},{e:.16e}\n", num(cut)));
            }
        }
    }
    out
}

pub(crate) fn shift(a: &ShiftArgs) -> CliResult<RunReport> {
    if a.grid_points < 1 || !(a.grid_min_ev > 0.0 && a.grid_max_ev >= a.grid_min_ev) {
        return Err(CliError::Usage("need 0 < --grid-min-ev ≤ --grid-max-ev and --grid-points ≥ 1".into()));
    }
    if a.omega_max_ev.is_empty() || a.methods.is_empty() {
        return Err(CliError::Usage("need at least one method and one cut-off".into()));
    }
    let policy = policy(&a.policy)?;
    let res = Reservoir::from_args(&a.reservoir)?;
    if a.methods.contains(&ShiftMethod::ImagAxis) && !res.is_analytic() {
        return Err(plasmon_shift::Error::Unsupported(
            "the imaginary-axis method needs an analytic coupling model; use hilbert or sub-kk for sampled data".into(),
        )
        .into());
    }
    let needs_g0 = !res.is_analytic() || a.methods.contains(&ShiftMethod::SubKk) || a.compare;
    let g0 = if needs_g0 { res.static_coupling(&a.reservoir)? } else { 0.0 };
    let subject = res.subject(g0);
    let grid = if a.grid_points == 1 {
        vec![a.grid_min_ev]
    } else {
        linspace(a.grid_min_ev, a.grid_max_ev, a.grid_points)
    };

    let mut report = RunReport::default();
    for &method in &a.methods {
        for &cut in &a.omega_max_ev {
            let table = shift_table(subject, &grid, method, cut, &policy)?;
            if let Some((w, d)) = table.omega.iter().zip(&table.delta).find(|(_, d)| !d.is_finite()) {
                return Err(CliError::Validation(format!("{method} at {cut} eV gave Δ({w}) = {d}")));
            }
            if !table.report.converged {
                report.lines.push(format!("warning: {method} at {cut} eV did not reach the tolerance"));
            }
            let path = a.out_dir.join(format!("shift_{method}_{}.csv", num(cut)));
            write_file(&mut report, &path, &table.to_csv())?;
        }
    }
    if a.compare {
        let cmp = compare_methods(subject, &grid, &a.omega_max_ev, &policy)?;
        write_file(&mut report, &a.out_dir.join("comparison.csv"), &cmp.to_csv())?;
        let summary = max_error_csv(&cmp, &a.omega_max_ev);
        write_file(&mut report, &a.out_dir.join("max_errors.csv"), &summary)?;
        report.lines.push(format!(
            "reference: {} at {} eV",
            cmp.reference_method,
            num(cmp.reference_cutoff)
        ));
        report.lines.extend(summary.lines().skip(1).map(String::from));
    }

    let mut echo = RunFile::default();
    echo.entries.push(("command".into(), "shift".into()));
    echo_reservoir(&a.reservoir, &mut echo);
    echo_policy(&a.policy, &mut echo);
    let methods: Vec<&str> = a.methods.iter().map(|m| m.as_str()).collect();
    echo.entries.push(("method".into(), methods.join(",")));
    echo.entries.push(("omega-max-ev".into(), list(&a.omega_max_ev)));
    echo.entries.push(("grid-min-ev".into(), num(a.grid_min_ev)));
    echo.entries.push(("grid-max-ev".into(), num(a.grid_max_ev)));
    echo.entries.push(("grid-points".into(), a.grid_points.to_string()));
    echo.entries.push(("compare".into(), a.compare.to_string()));
    echo.entries.push(("out-dir".into(), a.out_dir.display().to_string()));
    write_file(&mut report, &a.out_dir.join("run.conf"), &echo.render())?;
    Ok(report)
}

/// Builds the spectral solver input for `source` at the problem's cut-off.
pub(crate) fn spectral_run(
    source: &dyn CouplingSource,
    g0: f64,
    shift: SpectralShift,
    problem: &DynamicsProblem,
) -> CliResult<(EvolutionSpectrum, DecayTrajectory)> {
    let se: Box<dyn SelfEnergy + '_> = match shift {
        SpectralShift::SubKk => Box::new(SubtractiveSelfEnergy::new(source, g0, problem.omega_max, &problem.policy)?),
        SpectralShift::Hilbert => Box::new(HilbertSelfEnergy::new(source, problem.omega_max, &problem.policy)?),
    };
    finish_spectral(problem, se.as_ref())
}

fn finish_spectral(problem: &DynamicsProblem, se: &dyn SelfEnergy) -> CliResult<(EvolutionSpectrum, DecayTrajectory)> {
    let spec = evolution_spectrum(problem, se)?;
    let traj = spectral_dynamics(&spec, &problem.time_grid_fs())?;
    traj.validate()?;
    Ok((spec, traj))
}

pub(crate) fn volterra_run(source: &dyn CouplingSource, problem: &DynamicsProblem) -> CliResult<DecayTrajectory> {
    let traj = volterra_solve(source, problem)?;
    traj.validate()?;
    Ok(traj)
}

pub(crate) fn dynamics(a: &DynamicsArgs) -> CliResult<RunReport> {
    let mut problem = DynamicsProblem::new(a.omega0_ev, a.omega_max_ev, a.tmax_fs, a.dt_fs)?;
    problem.eta = a.eta_ev;
    problem.policy = policy(&a.policy)?;
    problem.validate()?;

    let empty = LorentzianOscillators::new(Vec::new())?;
    let res = if a.free_emitter { None } else { Some(Reservoir::from_args(&a.reservoir)?) };
    let source: &dyn CouplingSource = match &res {
        Some(r) => r.source(),
        None => &empty,
    };

    let mut report = RunReport::default();
    let mut summary = String::from("quantity,value\n");
    let mut volterra = None;
    let mut spectral = None;
    if matches!(a.method, SolverChoice::Volterra | SolverChoice::Both) {
        let traj = volterra_run(source, &problem)?;
        write_file(&mut report, &a.out_dir.join("trajectory_volterra.csv"), &traj.to_csv())?;
        summary.push_str(&format!("final_population_volterra,{:.16e}\n", traj.population().last().unwrap()));
        volterra = Some(traj);
    }
    if matches!(a.method, SolverChoice::Spectral | SolverChoice::Both) {
        let (spec, traj) = match &res {
            Some(r) => spectral_run(source, r.static_coupling(&a.reservoir)?, a.spectral_shift, &problem)?,
            None => finish_spectral(&problem, &FreeEmitter)?,
        };
        write_file(&mut report, &a.out_dir.join("evolution_spectrum.csv"), &spec.to_csv())?;
        write_file(&mut report, &a.out_dir.join("trajectory_spectral.csv"), &traj.to_csv())?;
        summary.push_str(&format!("final_population_spectral,{:.16e}\n", traj.population().last().unwrap()));
        summary.push_str(&format!("total_weight,{:.16e}\n", spec.total_weight));
        summary.push_str(&format!("bound_states,{}\n", spec.bound_states.len()));
        spectral = Some(traj);
    }
    if let (Some(v), Some(s)) = (&volterra, &spectral) {
        let d = v.max_population_difference(s)?;
        summary.push_str(&format!("max_population_difference,{d:.16e}\n"));
        report.lines.push(format!("max |P_volterra − P_spectral| = {d:.3e}"));
    }
    write_file(&mut report, &a.out_dir.join("summary.csv"), &summary)?;
    if a.plot_script {
        let csvs: Vec<&str> = [
            volterra.as_ref().map(|_| "trajectory_volterra.csv"),
            spectral.as_ref().map(|_| "trajectory_spectral.csv"),
        ]
        .into_iter()
        .flatten()
        .collect();
        write_file(&mut report, &a.out_dir.join("plot_dynamics.py"), &dynamics_plot_script(&csvs))?;
    }

    let mut echo = RunFile::default();
    echo.entries.push(("command".into(), "dynamics".into()));
    echo_reservoir(&a.reservoir, &mut echo);
    echo_policy(&a.policy, &mut echo);
    echo.entries.push(("free-emitter".into(), a.free_emitter.to_string()));
    let method = match a.method {
        SolverChoice::Volterra => "volterra",
        SolverChoice::Spectral => "spectral",
        SolverChoice::Both => "both",
    };
    echo.entries.push(("method".into(), method.into()));
    let shift = match a.spectral_shift {
        SpectralShift::SubKk => "sub-kk",
        SpectralShift::Hilbert => "hilbert",
    };
    echo.entries.push(("spectral-shift".into(), shift.into()));
    echo.entries.push(("omega0-ev".into(), num(a.omega0_ev)));
    echo.entries.push(("tmax-fs".into(), num(a.tmax_fs)));
    echo.entries.push(("dt-fs".into(), num(a.dt_fs)));
    echo.entries.push(("omega-max-ev".into(), num(a.omega_max_ev)));
    echo.entries.push(("eta-ev".into(), num(a.eta_ev)));
    echo.entries.push(("plot-script".into(), a.plot_script.to_string()));
    echo.entries.push(("out-dir".into(), a.out_dir.display().to_string()));
    write_file(&mut report, &a.out_dir.join("run.conf"), &echo.render())?;
    Ok(report)
}
