use num_complex::Complex64;

use super::{fourier_sum, DecayTrajectory, DynamicsMethod, DynamicsProblem};
use crate::coupling::CouplingSource;
use crate::error::{Error, Result};
use crate::levelshift::{QuadraturePolicy, RealAxisRule};
use crate::quadrature::{refine_to_width, PANEL_NODES};
use crate::units::{fs_to_natural, natural_to_fs};

/// Phase range a single 15-point panel integrates to full accuracy.
pub(crate) const PANEL_PHASE: f64 = 3.0;

/// Memory kernel
/// `B(τ) = ∫₀^ωmax J(ω) (1 − e^{−i(ω−ω₀)τ}) / (i(ω−ω₀)) dω`
/// at the (natural-unit, nondecreasing) lags `tau`.
///
/// The frequency rule is refined until every panel spans at most a few
/// radians of phase at the largest lag; if that needs more nodes than the
/// policy budget the call is refused with the required count.
pub fn kernel_b<S: CouplingSource + ?Sized>(
    source: &S,
    omega0: f64,
    tau: &[f64],
    omega_max: f64,
    policy: &QuadraturePolicy,
) -> Result<Vec<Complex64>> {
    if tau.iter().any(|t| !(*t >= 0.0)) || tau.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter(
            "kernel lags must be non-negative and nondecreasing".into(),
        ));
    }
    let tau_max = tau.last().copied().unwrap_or(0.0);
    let rule = RealAxisRule::new(source, omega_max, policy)?;
    let base = rule.rule().clone();
    let nodes: Vec<(f64, f64)> = if tau_max > 0.0 {
        let width = PANEL_PHASE / tau_max;
        let required: usize = base
            .panels
            .iter()
            .map(|p| ((p.b - p.a) / width).ceil().max(1.0) as usize * PANEL_NODES)
            .sum();
        if required > policy.node_budget {
            return Err(Error::UnderResolved {
                required,
                budget: policy.node_budget,
            });
        }
        let fine = refine_to_width(base, |s| source.coupling(s), width)?;
        fine.iter().map(|(s, w, g)| (s, w * g.im)).collect()
    } else {
        base.iter().map(|(s, w, g)| (s, w * g.im)).collect()
    };

    // Nodes with ν τ_max tiny would lose digits in (1 − e^{−iντ})/(iν);
    // they take the sinc form instead.
    let mut nu = Vec::with_capacity(nodes.len());
    let mut amp = Vec::with_capacity(nodes.len());
    let mut constant = Complex64::new(0.0, 0.0);
    let mut near = Vec::new();
    for &(s, a) in &nodes {
        let v = s - omega0;
        if (v * tau_max).abs() > 1e-3 {
            let c = a / Complex64::new(0.0, v);
            constant += c;
            nu.push(v);
            amp.push(-c);
        } else {
            near.push((v, a));
        }
    }
    let osc = fourier_sum(&nu, &amp, tau);
    Ok(tau
        .iter()
        .zip(osc)
        .map(|(&t, o)| {
            let mut b = constant + o;
            for &(v, a) in &near {
                let x = 0.5 * v * t;
                let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
                b += a * t * sinc * Complex64::from_polar(1.0, -x);
            }
            if t == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                b
            }
        })
        .collect())
}

/// Solves `c₁(t) = 1 − ∫₀ᵗ B(t−t′) c₁(t′) dt′` with the trapezoidal rule on
/// the problem's uniform grid. `B(0) = 0` makes every step explicit.
pub fn volterra_solve<S: CouplingSource + ?Sized>(
    source: &S,
    problem: &DynamicsProblem,
) -> Result<DecayTrajectory> {
    problem.validate()?;
    let n = problem.steps();
    let dt = fs_to_natural(problem.dt_fs);
    let tau: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    let b = kernel_b(source, problem.omega0, &tau, problem.omega_max, &problem.policy)?;
    let b_max = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if b_max * dt >= 1.0 {
        log::warn!(
            "Volterra step {} fs is large for |B| = {b_max:.3e} eV; try Δt ≤ {:.3e} fs",
            problem.dt_fs,
            natural_to_fs(0.5 / b_max)
        );
    }
    let mut c = Vec::with_capacity(n + 1);
    c.push(Complex64::new(1.0, 0.0));
    for k in 1..=n {
        let mut s = 0.5 * b[k];
        for j in 1..k {
            s += b[k - j] * c[j];
        }
        c.push(Complex64::new(1.0, 0.0) - dt * s);
    }
    Ok(DecayTrajectory {
        t_fs: (0..=n).map(|k| k as f64 * problem.dt_fs).collect(),
        c1: c,
        method: DynamicsMethod::Volterra,
        problem: Some(*problem),
    })
}
