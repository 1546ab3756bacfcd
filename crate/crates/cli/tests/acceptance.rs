//! Acceptance checks. One line per criterion; exits nonzero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use plasmon_shift::coupling::{LorentzianOscillators, Oscillator, VacuumCoupling};
use plasmon_shift::dynamics::{
    evolution_spectrum, spectral_dynamics, volterra_solve, DecayTrajectory, DynamicsProblem, HilbertSelfEnergy,
    SubtractiveSelfEnergy,
};
use plasmon_shift::levelshift::{
    compare_methods, gamma_of, imag_axis_tail, shift_table, QuadraturePolicy, RealAxisRule, ShiftMethod,
    ShiftSubject,
};
use plasmon_shift::quadrature::{geomspace, linspace};
use plasmon_shift::spectrum::{extrapolate_zero, DEFAULT_ZERO_FIT_WINDOW};
use plasmon_shift::units::{fs_to_natural, natural_to_fs};
use plasmon_shift::{AnalyticCoupling, Complex64, CouplingSource, SphereCoupling, SphereSystem};
use plasmon_shift_cli::demo::{run_demo, wideband_spectrum, CUTOFFS, DEMOS, WIDEBAND_OMEGA0};

type Outcome = Result<(bool, String), String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "vacuum-limit calibration", limit: Some(secs(1)), run: vacuum_calibration },
        Criterion { id: 2, name: "plasmon peak placement", limit: Some(secs(60)), run: peak_placement },
        Criterion { id: 3, name: "imaginary-axis reality", limit: Some(secs(60)), run: imag_axis_reality },
        Criterion { id: 4, name: "imaginary-axis tail magnitude", limit: None, run: tail_magnitude },
        Criterion { id: 5, name: "reference cut-off insensitivity", limit: Some(secs(300)), run: reference_cutoff },
        Criterion { id: 6, name: "subtractive superiority", limit: Some(secs(600)), run: subtractive_superiority },
        Criterion { id: 7, name: "geometry sweep ordering", limit: None, run: geometry_sweep },
        Criterion { id: 8, name: "Hilbert-pair oracle", limit: None, run: hilbert_pair },
        Criterion { id: 9, name: "dynamics cross-check", limit: Some(secs(600)), run: dynamics_cross_check },
        Criterion { id: 10, name: "Volterra cut-off stability", limit: None, run: volterra_cutoff },
        Criterion { id: 11, name: "pseudomode oracle", limit: None, run: pseudomode },
        Criterion { id: 12, name: "evolution-spectrum normalization", limit: None, run: normalization },
        Criterion { id: 13, name: "wide-band cut-off ordering", limit: None, run: wideband_ordering },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let took = start.elapsed();
        let in_time = c.limit.map_or(true, |l| took <= l);
        let (pass, detail) = match outcome {
            Ok((pass, detail)) => (pass && in_time, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let limit = c.limit.map_or(String::new(), |l| format!(", limit {}s", l.as_secs()));
        println!(
            "criterion {:>2} {} {}: {} [{:.2}s{}]",
            c.id,
            if pass { "PASS" } else { "FAIL" },
            c.name,
            detail,
            took.as_secs_f64(),
            limit
        );
        failed += usize::from(!pass);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn gold(radius_nm: f64, gap_nm: f64) -> Result<SphereCoupling, String> {
    Ok(SphereCoupling::new(SphereSystem::gold_in_vacuum(radius_nm, gap_nm, 24.0).map_err(err)?))
}

fn shift_grid() -> Vec<f64> {
    linspace(1.0, 8.0, 71)
}

fn vacuum_calibration() -> Outcome {
    // Γ₀ = ω³d²/(3πε₀ħc³) in SI, then back to eV.
    let (hbar_ev, e, c, eps0, debye): (f64, f64, f64, f64, f64) =
        (6.582_119_569e-16, 1.602_176_634e-19, 299_792_458.0, 8.854_187_812_8e-12, 3.335_64e-30);
    let src = VacuumCoupling { dipole_debye: 24.0 };
    let mut worst: f64 = 0.0;
    for w_ev in [2.0, 5.0] {
        let w = w_ev / hbar_ev;
        let d = 24.0 * debye;
        let rate = w.powi(3) * d * d / (3.0 * PI * eps0 * hbar_ev * e * c.powi(3)) * hbar_ev;
        let g = gamma_of(&src, w_ev).map_err(err)?;
        worst = worst.max((g - rate).abs() / rate);
    }
    Ok((worst < 1e-10, format!("max relative deviation {worst:.2e} (< 1e-10)")))
}

fn peak_placement() -> Outcome {
    let src = gold(20.0, 1.0)?;
    let grid = linspace(0.1, 10.0, 991);
    let im: Vec<f64> = grid
        .iter()
        .map(|&w| src.coupling(w).map(|g| g.im))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let maxima: Vec<usize> = (1..im.len() - 1).filter(|&i| im[i] > im[i - 1] && im[i] >= im[i + 1]).collect();
    let dominant = maxima.iter().copied().max_by(|&a, &b| im[a].total_cmp(&im[b])).ok_or("no maximum")?;
    let target = 8.2935 / 3f64.sqrt();
    let all_in_band = maxima.iter().all(|&i| (4.0..=6.0).contains(&grid[i]));
    let off = (grid[dominant] - target).abs();
    let listed: Vec<String> = maxima.iter().map(|&i| format!("{:.2}", grid[i])).collect();
    Ok((
        all_in_band && off <= 0.4,
        format!(
            "scattering-only Im g maxima at [{}] eV (all in [4, 6]: {all_in_band}); dominant {:.3} eV, {off:.3} eV from ω_p/√3 = {target:.3} eV (≤ 0.4)",
            listed.join(", "),
            grid[dominant]
        ),
    ))
}

fn imag_axis_reality() -> Outcome {
    let src = gold(20.0, 1.0)?;
    let mut worst: f64 = 0.0;
    for xi in geomspace(0.1, 200.0, 400) {
        let g = src.coupling_complex(Complex64::new(0.0, xi)).map_err(err)?;
        worst = worst.max(g.im.abs() / g.norm());
    }
    Ok((worst < 1e-10, format!("max |Im g(iξ)|/|g(iξ)| = {worst:.2e} over ξ ∈ [0.1, 200] eV (< 1e-10)")))
}

fn tail_magnitude() -> Outcome {
    let src = gold(20.0, 1.0)?;
    let d = imag_axis_tail(&src, 5.0, 10.0, 200.0, &QuadraturePolicy::default()).map_err(err)?;
    let ratio = d.abs() / 1.1e-3;
    Ok((
        (0.5..=2.0).contains(&ratio),
        format!("Diff(ξ = 10 eV) at ω = 5 eV is {:.4} meV, ratio to 1.1 meV {ratio:.3} (within [0.5, 2])", d * 1e3),
    ))
}

fn reference_cutoff() -> Outcome {
    let src = gold(20.0, 2.0)?;
    let policy = QuadraturePolicy::default();
    let grid = shift_grid();
    let subject = ShiftSubject::Analytic(&src);
    let lo = shift_table(subject, &grid, ShiftMethod::ImagAxis, 100.0, &policy).map_err(err)?;
    let hi = shift_table(subject, &grid, ShiftMethod::ImagAxis, 200.0, &policy).map_err(err)?;
    let worst = lo.delta.iter().zip(&hi.delta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok((
        worst < 1e-6,
        format!("a = 20 nm, h = 2 nm: max_ω |Δ(ξ_max = 100) − Δ(ξ_max = 200)| = {worst:.2e} eV (< 1e-6)"),
    ))
}

/// Largest error per method and cut-off against the imaginary-axis
/// reference.
fn max_errors(radius_nm: f64, gap_nm: f64) -> Result<Vec<(ShiftMethod, f64, f64)>, String> {
    let src = gold(radius_nm, gap_nm)?;
    let cmp = compare_methods(ShiftSubject::Analytic(&src), &shift_grid(), &CUTOFFS, &QuadraturePolicy::default())
        .map_err(err)?;
    let mut out = Vec::new();
    for m in [ShiftMethod::Hilbert, ShiftMethod::SubKk] {
        for &w in &CUTOFFS {
            out.push((m, w, cmp.max_abs_error(m, w).ok_or("missing comparison row")?));
        }
    }
    Ok(out)
}

fn lookup(rows: &[(ShiftMethod, f64, f64)], m: ShiftMethod, w: f64) -> f64 {
    rows.iter().find(|r| r.0 == m && r.1 == w).map(|r| r.2).unwrap()
}

/// Sub-kk below 0.05 meV at every cut-off and Hilbert above 0.5 meV at
/// the lowest.
fn ordering(rows: &[(ShiftMethod, f64, f64)], cutoffs: &[f64]) -> (bool, String) {
    let sub = CUTOFFS.iter().map(|&w| lookup(rows, ShiftMethod::SubKk, w)).fold(0.0, f64::max);
    let mut pass = sub < 5e-5;
    let mut parts = vec![format!("max sub-kk error {:.4} meV (< 0.05)", sub * 1e3)];
    for &w in cutoffs {
        let h = lookup(rows, ShiftMethod::Hilbert, w);
        let s = lookup(rows, ShiftMethod::SubKk, w);
        pass &= h > 5e-4;
        parts.push(format!("ω_max = {w}: Hilbert {:.4} meV (> 0.5), ratio to sub-kk {:.1}", h * 1e3, h / s));
    }
    (pass, parts.join("; "))
}

fn subtractive_superiority() -> Outcome {
    let rows = max_errors(20.0, 2.0)?;
    let (pass, detail) = ordering(&rows, &[10.0]);
    Ok((pass, format!("a = 20 nm, h = 2 nm: {detail}")))
}

fn geometry_sweep() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (a, h) in [(10.0, 2.0), (20.0, 1.0)] {
        let rows = max_errors(a, h)?;
        let (ok, detail) = ordering(&rows, &[10.0, 20.0]);
        pass &= ok;
        parts.push(format!("a = {a} nm, h = {h} nm: {detail}"));
    }
    Ok((pass, parts.join(" | ")))
}

fn hilbert_pair() -> Outcome {
    let lines = [(0.05, 3.0, 0.1), (0.03, 5.0, 0.2)];
    let src = LorentzianOscillators::new(
        lines.iter().map(|&(strength, center, width)| Oscillator { strength, center, width }).collect(),
    )
    .map_err(err)?;
    // Im g is a Lorentzian pair odd in ω; PV∫₀^∞ L(s)/(ω−s) ds of
    // L = Im 1/(s−p) is Im[(ln ω − ln(−p))/(ω−p)].
    let one = |w: f64, p: Complex64| ((Complex64::from(w.ln()) - (-p).ln()) / (w - p)).im;
    let exact = |w: f64| {
        lines
            .iter()
            .map(|&(a, c, g)| a / PI * (one(w, Complex64::new(c, g)) - one(w, Complex64::new(-c, g))))
            .sum::<f64>()
    };
    let g0: f64 = lines.iter().map(|&(a, c, g)| a / PI * 2.0 * c / (c * c + g * g)).sum();
    let rule = RealAxisRule::new(&src, 200.0, &QuadraturePolicy::default()).map_err(err)?;
    let (mut hil, mut sub): (f64, f64) = (0.0, 0.0);
    for w in linspace(0.5, 10.0, 96) {
        let e = exact(w);
        hil = hil.max((rule.delta_hilbert(w).map_err(err)?.0 - e).abs());
        sub = sub.max((rule.delta_sub_kk(w, g0).map_err(err)? - e).abs());
    }
    Ok((
        hil < 1e-5 && sub < 1e-5,
        format!("max deviation Hilbert {:.3} μeV, sub-kk {:.3} μeV (< 10)", hil * 1e6, sub * 1e6),
    ))
}

fn sphere_problem(omega_max: f64) -> Result<DynamicsProblem, String> {
    DynamicsProblem::new(5.0, omega_max, 50.0, 0.01).map_err(err)
}

fn sphere_with_vacuum() -> Result<SphereCoupling, String> {
    Ok(gold(20.0, 1.0)?.with_vacuum(true))
}

fn spectral_subkk(src: &dyn CouplingSource, g0: f64, p: &DynamicsProblem) -> Result<DecayTrajectory, String> {
    let se = SubtractiveSelfEnergy::new(src, g0, p.omega_max, &p.policy).map_err(err)?;
    let spec = evolution_spectrum(p, &se).map_err(err)?;
    spectral_dynamics(&spec, &p.time_grid_fs()).map_err(err)
}

fn dynamics_cross_check() -> Outcome {
    let src = sphere_with_vacuum()?;
    let p = sphere_problem(10.0)?;
    let v = volterra_solve(&src, &p).map_err(err)?;
    let s = spectral_subkk(&src, src.static_coupling().map_err(err)?, &p)?;
    let d = v.max_population_difference(&s).map_err(err)?;
    Ok((d < 1e-2, format!("ω₀ = 5 eV, ω_max = 10 eV: max_t |P_volterra − P_spectral| = {d:.3e} (< 1e-2)")))
}

fn volterra_cutoff() -> Outcome {
    let src = sphere_with_vacuum()?;
    let a = volterra_solve(&src, &sphere_problem(10.0)?).map_err(err)?;
    let b = volterra_solve(&src, &sphere_problem(20.0)?).map_err(err)?;
    let d = a.max_population_difference(&b).map_err(err)?;
    Ok((d < 1e-2, format!("max_t |P(ω_max = 10) − P(ω_max = 20)| = {d:.3e} (< 1e-2)")))
}

/// `g(ω) = (A/π) / (c − ω − iγ)`: memory kernel `A e^{−zτ}`.
struct Pseudomode {
    strength: f64,
    center: f64,
    width: f64,
}

impl CouplingSource for Pseudomode {
    fn coupling(&self, w: f64) -> plasmon_shift::Result<Complex64> {
        Ok(self.strength / PI / Complex64::new(self.center - w, -self.width))
    }
    fn feature_hints(&self) -> Vec<f64> {
        vec![self.center]
    }
    fn describe(&self) -> String {
        "pseudomode".into()
    }
}

/// Solution of `c̈ + z ċ + A c = 0`, `c(0) = 1`, `ċ(0) = 0`.
fn pseudomode_amplitude(m: &Pseudomode, omega0: f64, t: f64) -> Complex64 {
    let z = Complex64::new(m.width, m.center - omega0);
    let root = (z * z / 4.0 - m.strength).sqrt();
    let (r1, r2) = (-z / 2.0 + root, -z / 2.0 - root);
    (r2 * (r1 * t).exp() - r1 * (r2 * t).exp()) / (r2 - r1)
}

fn pseudomode() -> Outcome {
    // Window [0, 2c] centred on ω₀ = c so the truncated tails cancel.
    let m = Pseudomode { strength: 0.01, center: 52.0, width: 0.02 };
    let mut p = DynamicsProblem::new(52.0, 104.0, natural_to_fs(45.0), natural_to_fs(0.005)).map_err(err)?;
    p.policy = QuadraturePolicy { abs_tol: 1e-12, node_budget: 400_000, ..Default::default() };
    let dev = |traj: &DecayTrajectory| {
        traj.t_fs
            .iter()
            .zip(&traj.c1)
            .map(|(&t, c)| (c.norm() - pseudomode_amplitude(&m, p.omega0, fs_to_natural(t)).norm()).abs())
            .fold(0.0, f64::max)
    };
    let v = dev(&volterra_solve(&m, &p).map_err(err)?);
    let se = HilbertSelfEnergy::new(&m, p.omega_max, &p.policy).map_err(err)?;
    let spec = evolution_spectrum(&p, &se).map_err(err)?;
    let s = dev(&spectral_dynamics(&spec, &p.time_grid_fs()).map_err(err)?);
    Ok((v < 1e-6 && s < 1e-6, format!("max ||c₁| − |c₁^exact|| Volterra {v:.2e}, spectral {s:.2e} (< 1e-6)")))
}

fn normalization() -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    let mut worst: f64 = 0.0;
    let mut files = 0;
    for (name, _) in DEMOS {
        let out = dir.path().join(name);
        run_demo(name, &out).map_err(err)?;
        for entry in std::fs::read_dir(&out).map_err(err)? {
            let path = entry.map_err(err)?.path();
            let fname = path.file_name().unwrap().to_string_lossy().into_owned();
            if !(fname.starts_with("evolution_spectrum") && fname.ends_with(".csv")) {
                continue;
            }
            let text = std::fs::read_to_string(&path).map_err(err)?;
            let total: f64 = text
                .lines()
                .find_map(|l| l.strip_prefix("# total_weight = "))
                .ok_or_else(|| format!("{fname}: no total_weight line"))?
                .trim()
                .parse()
                .map_err(err)?;
            worst = worst.max((total - 1.0).abs());
            files += 1;
        }
    }
    Ok((
        files > 0 && worst <= 1e-3,
        format!("{files} evolution spectra across {} demos, max |total weight − 1| = {worst:.2e} (≤ 1e-3)", DEMOS.len()),
    ))
}

fn wideband_ordering() -> Outcome {
    let spec = wideband_spectrum().map_err(err)?;
    let g0 = extrapolate_zero(&spec, DEFAULT_ZERO_FIT_WINDOW).map_err(err)?.intercept;
    let problem = |w: f64| DynamicsProblem::new(WIDEBAND_OMEGA0, w, 50.0, 0.02).map_err(err);
    let s10 = spectral_subkk(&spec, g0, &problem(10.0)?)?;
    let s50 = spectral_subkk(&spec, g0, &problem(50.0)?)?;
    let v20 = volterra_solve(&spec, &problem(20.0)?).map_err(err)?;
    let v50 = volterra_solve(&spec, &problem(50.0)?).map_err(err)?;
    let ds = s10.max_population_difference(&s50).map_err(err)?;
    let dv = v20.max_population_difference(&v50).map_err(err)?;
    Ok((
        ds < 1e-2 && dv > 1e-2,
        format!("spectral ω_max 10 vs 50: {ds:.3e} (< 1e-2); Volterra ω_max 20 vs 50: {dv:.3e} (> 1e-2)"),
    ))
}
