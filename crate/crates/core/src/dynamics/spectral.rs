use std::f64::consts::PI;

use num_complex::Complex64;

use super::volterra::PANEL_PHASE;
use super::{fourier_sum, DecayTrajectory, DynamicsMethod, DynamicsProblem};
use crate::coupling::CouplingSource;
use crate::error::{Error, Result};
use crate::interp::Pchip;
use crate::levelshift::{LevelShiftTable, QuadraturePolicy, RealAxisRule};
use crate::quadrature::{adaptive, linspace, refine_to_width, AdaptiveOptions, PANEL_NODES};
use crate::units::{fs_to_natural, natural_to_fs};

/// `Δ(ω)` and `Γ(ω)` on the whole real axis.
pub trait SelfEnergy: Sync {
    fn delta(&self, omega: f64) -> Result<f64>;
    fn gamma(&self, omega: f64) -> Result<f64>;
    /// Interval outside which `Γ` vanishes; `None` when it vanishes
    /// everywhere.
    fn support(&self) -> Option<(f64, f64)>;
    fn feature_hints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Level shift from the subtractive formula inside `(0, ω_max)`; outside it
/// the (pole-free) transform of the truncated `Γ`.
pub struct SubtractiveSelfEnergy<'a, S: CouplingSource + ?Sized> {
    rule: RealAxisRule<'a, S>,
    g0: f64,
}

impl<'a, S: CouplingSource + ?Sized> SubtractiveSelfEnergy<'a, S> {
    pub fn new(source: &'a S, g0: f64, omega_max: f64, policy: &QuadraturePolicy) -> Result<Self> {
        Ok(Self {
            rule: RealAxisRule::new(source, omega_max, policy)?,
            g0,
        })
    }
}

impl<S: CouplingSource + ?Sized> SelfEnergy for SubtractiveSelfEnergy<'_, S> {
    fn delta(&self, omega: f64) -> Result<f64> {
        if omega > 0.0 && omega < self.rule.omega_max() {
            self.rule.delta_sub_kk(omega, self.g0)
        } else {
            self.rule.delta_outside(omega)
        }
    }
    fn gamma(&self, omega: f64) -> Result<f64> {
        self.rule.gamma(omega)
    }
    fn support(&self) -> Option<(f64, f64)> {
        Some((0.0, self.rule.omega_max()))
    }
    fn feature_hints(&self) -> Vec<f64> {
        self.rule.source().feature_hints()
    }
}

/// Level shift as the principal-value transform of the truncated `Γ`; this
/// is the self-energy the Volterra solver sees at the same cut-off.
pub struct HilbertSelfEnergy<'a, S: CouplingSource + ?Sized> {
    rule: RealAxisRule<'a, S>,
}

impl<'a, S: CouplingSource + ?Sized> HilbertSelfEnergy<'a, S> {
    pub fn new(source: &'a S, omega_max: f64, policy: &QuadraturePolicy) -> Result<Self> {
        Ok(Self {
            rule: RealAxisRule::new(source, omega_max, policy)?,
        })
    }
}

impl<S: CouplingSource + ?Sized> SelfEnergy for HilbertSelfEnergy<'_, S> {
    fn delta(&self, omega: f64) -> Result<f64> {
        if omega > 0.0 && omega < self.rule.omega_max() {
            self.rule.delta_hilbert(omega).map(|(d, _)| d)
        } else {
            self.rule.delta_outside(omega)
        }
    }
    fn gamma(&self, omega: f64) -> Result<f64> {
        self.rule.gamma(omega)
    }
    fn support(&self) -> Option<(f64, f64)> {
        Some((0.0, self.rule.omega_max()))
    }
    fn feature_hints(&self) -> Vec<f64> {
        self.rule.source().feature_hints()
    }
}

/// Interpolated [`LevelShiftTable`]. Outside the table `Γ = 0` and `Δ` holds
/// its edge value.
pub struct TableSelfEnergy {
    delta: Pchip,
    gamma: Pchip,
}

impl TableSelfEnergy {
    pub fn new(table: &LevelShiftTable) -> Result<Self> {
        Ok(Self {
            delta: Pchip::new(table.omega.clone(), table.delta.clone())?,
            gamma: Pchip::new(table.omega.clone(), table.gamma.clone())?,
        })
    }
}

impl SelfEnergy for TableSelfEnergy {
    fn delta(&self, omega: f64) -> Result<f64> {
        let (lo, _) = self.delta.domain();
        let v = self.delta.values();
        Ok(self
            .delta
            .eval(omega)
            .unwrap_or(if omega < lo { v[0] } else { v[v.len() - 1] }))
    }
    fn gamma(&self, omega: f64) -> Result<f64> {
        Ok(self.gamma.eval(omega).unwrap_or(0.0).max(0.0))
    }
    fn support(&self) -> Option<(f64, f64)> {
        Some(self.gamma.domain())
    }
}

/// No reservoir at all.
#[derive(Debug, Clone, Copy, Default)]
pub struct FreeEmitter;

impl SelfEnergy for FreeEmitter {
    fn delta(&self, _: f64) -> Result<f64> {
        Ok(0.0)
    }
    fn gamma(&self, _: f64) -> Result<f64> {
        Ok(0.0)
    }
    fn support(&self) -> Option<(f64, f64)> {
        None
    }
}

/// Discrete root of `ω − ω₀ − Δ(ω) = 0` where `Γ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundState {
    pub omega: f64,
    /// Residue `1 / (1 − Δ′(ω_b))`.
    pub weight: f64,
}

/// `S(ω)` sampled on a quadrature rule plus bound-state residues.
#[derive(Debug, Clone)]
pub struct EvolutionSpectrum {
    pub omega0: f64,
    pub eta: f64,
    /// Quadrature nodes, eV.
    pub omega: Vec<f64>,
    /// `S(ω)` at the nodes, 1/eV.
    pub density: Vec<f64>,
    /// Quadrature weights matching `omega`.
    pub weights: Vec<f64>,
    pub bound_states: Vec<BoundState>,
    pub continuum_weight: f64,
    pub total_weight: f64,
    /// Largest time the node spacing resolves, fs.
    pub horizon_fs: f64,
}

pub const EVOLUTION_SPECTRUM_HEADER: &str = "omega_ev,s_per_ev";

impl EvolutionSpectrum {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# continuum_weight = {:.16e}\n# total_weight = {:.16e}\n",
            self.continuum_weight, self.total_weight
        ));
        for b in &self.bound_states {
            out.push_str(&format!(
                "# bound_state omega_ev = {:.16e} weight = {:.16e}\n",
                b.omega, b.weight
            ));
        }
        out.push_str(EVOLUTION_SPECTRUM_HEADER);
        out.push('\n');
        for (w, s) in self.omega.iter().zip(&self.density) {
            out.push_str(&format!("{w:.16e},{s:.16e}\n"));
        }
        out
    }
}

fn density(omega: f64, omega0: f64, eta: f64, se: &dyn SelfEnergy) -> Result<f64> {
    let gamma = se.gamma(omega)?;
    let half = 0.5 * gamma + if gamma < eta { eta } else { 0.0 };
    if half <= 0.0 {
        return Ok(0.0);
    }
    let detuning = omega - omega0 - se.delta(omega)?;
    Ok(half / PI / (detuning * detuning + half * half))
}

/// Builds `S(ω) = (1/π)(Γ/2+η) / ([ω−ω₀−Δ(ω)]² + (Γ/2+η)²)` over the
/// support of `Γ`, refined around the quasi-resonances and fine enough to be
/// Fourier transformed up to `problem.t_max_fs`, and collects bound states
/// outside the support.
///
/// The total weight must be one to within `10⁻³`; a larger deficit usually
/// means spectral weight beyond the cut-off or an unresolved pole.
pub fn evolution_spectrum(problem: &DynamicsProblem, se: &dyn SelfEnergy) -> Result<EvolutionSpectrum> {
    problem.validate()?;
    let (w0, eta) = (problem.omega0, problem.eta);
    let t_max = fs_to_natural(problem.t_max_fs);
    let budget = problem.policy.node_budget;

    let mut omega = Vec::new();
    let mut dens = Vec::new();
    let mut weights = Vec::new();
    let mut continuum = 0.0;
    let mut gap: f64 = 0.0;
    if let Some((lo, hi)) = se.support() {
        let mut cuts = linspace(lo, hi, 65);
        cuts.extend(se.feature_hints().into_iter().filter(|&x| x > lo && x < hi));
        if w0 > lo && w0 < hi {
            cuts.push(w0);
        }
        cuts.extend(resonance_breakpoints(lo, hi, w0, eta, se)?);
        let f = |x: f64| density(x, w0, eta, se);
        let opts = AdaptiveOptions {
            abs_tol: 1e-8,
            rel_tol: 0.0,
            max_evals: budget,
            min_width: 1e-13,
        };
        let rule = adaptive(f, |_, s: &f64| *s, &cuts, &opts)?;
        if !rule.converged {
            log::warn!(
                "evolution spectrum stopped at the node budget with error {:.2e}",
                rule.error
            );
        }
        let width = PANEL_PHASE / t_max;
        let required: usize = rule
            .panels
            .iter()
            .map(|p| ((p.b - p.a) / width).ceil().max(1.0) as usize * PANEL_NODES)
            .sum();
        if required > budget {
            return Err(Error::UnderResolved { required, budget });
        }
        let rule = refine_to_width(rule, f, width)?;
        gap = rule.max_node_gap();
        for (x, w, s) in rule.iter() {
            omega.push(x);
            dens.push(*s);
            weights.push(w);
            continuum += w * s;
        }
    }
    let bound_states = find_bound_states(w0, se)?;
    let total_weight = continuum + bound_states.iter().map(|b| b.weight).sum::<f64>();
    if (total_weight - 1.0).abs() > 1e-3 {
        let hint = if total_weight < 1.0 {
            "spectral weight is missing; raise the cut-off or check for an unresolved pole"
        } else {
            "spectral weight exceeds one; the level shift may be inconsistent with Γ"
        };
        return Err(Error::Normalization {
            weight: total_weight,
            hint: hint.into(),
        });
    }
    let horizon_fs = if gap > 0.0 { natural_to_fs(PI / gap) } else { f64::INFINITY };
    Ok(EvolutionSpectrum {
        omega0: w0,
        eta,
        omega,
        density: dens,
        weights,
        bound_states,
        continuum_weight: continuum,
        total_weight,
        horizon_fs,
    })
}

/// Breakpoints around sign changes of `ω − ω₀ − Δ(ω)` inside the support,
/// scaled by the local width `Γ/2`.
fn resonance_breakpoints(lo: f64, hi: f64, w0: f64, eta: f64, se: &dyn SelfEnergy) -> Result<Vec<f64>> {
    let scan = linspace(lo, hi, 802);
    let pts = &scan[1..scan.len() - 1];
    let f = |x: f64| -> Result<f64> { Ok(x - w0 - se.delta(x)?) };
    let vals = pts.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    let mut cuts = Vec::new();
    for i in 0..pts.len() - 1 {
        if vals[i].signum() == vals[i + 1].signum() {
            continue;
        }
        let (mut a, mut b, fa) = (pts[i], pts[i + 1], vals[i]);
        for _ in 0..40 {
            let m = 0.5 * (a + b);
            if f(m)?.signum() == fa.signum() {
                a = m;
            } else {
                b = m;
            }
        }
        let root = 0.5 * (a + b);
        let half = (0.5 * se.gamma(root)?).max(eta).max(1e-9);
        for k in [0.0, 1.0, 3.0, 10.0, 30.0, 100.0] {
            for x in [root - k * half, root + k * half] {
                if x > lo && x < hi {
                    cuts.push(x);
                }
            }
        }
    }
    Ok(cuts)
}

fn find_bound_states(w0: f64, se: &dyn SelfEnergy) -> Result<Vec<BoundState>> {
    let f = |x: f64| -> Result<f64> { Ok(x - w0 - se.delta(x)?) };
    // Outside the support Δ′ ≤ 0, so f is increasing and each region holds
    // at most one root.
    let regions: Vec<(f64, f64)> = match se.support() {
        None => vec![(f64::NEG_INFINITY, f64::INFINITY)],
        Some((lo, hi)) => vec![(f64::NEG_INFINITY, lo), (hi * (1.0 + 1e-12) + 1e-12, f64::INFINITY)],
    };
    let mut out = Vec::new();
    for (lo, hi) in regions {
        let Some((mut a, mut b)) = bracket(&f, lo, hi, w0)? else {
            continue;
        };
        while b - a > 1e-13 * a.abs().max(b.abs()).max(1.0) {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if f(m)? < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        let root = 0.5 * (a + b);
        let h = 1e-6 * root.abs().max(1.0);
        let (l, r) = ((root - h).max(lo), (root + h).min(hi));
        let slope = if r > l { (se.delta(r)? - se.delta(l)?) / (r - l) } else { 0.0 };
        let weight = 1.0 / (1.0 - slope);
        if weight > 1e-12 && weight.is_finite() {
            out.push(BoundState { omega: root, weight });
        }
    }
    Ok(out)
}

/// Finds `[a, b] ⊂ [lo, hi]` with `f(a) < 0 ≤ f(b)` for an increasing `f`.
fn bracket<F: Fn(f64) -> Result<f64>>(f: &F, lo: f64, hi: f64, w0: f64) -> Result<Option<(f64, f64)>> {
    let mut step = 1.0;
    let (mut a, mut b) = match (lo.is_finite(), hi.is_finite()) {
        (true, true) => (lo, hi),
        (false, true) => (hi - step, hi),
        (true, false) => (lo, lo + step),
        (false, false) => (w0 - step, w0 + step),
    };
    if hi.is_finite() && f(hi)? < 0.0 {
        return Ok(None);
    }
    if lo.is_finite() && f(lo)? >= 0.0 {
        return Ok(None);
    }
    for _ in 0..80 {
        let (fa, fb) = (f(a)?, f(b)?);
        if fa < 0.0 && fb >= 0.0 {
            return Ok(Some((a, b)));
        }
        step *= 2.0;
        if fa >= 0.0 {
            if lo.is_finite() {
                return Ok(None);
            }
            a = b.min(a) - step;
        }
        if fb < 0.0 {
            if hi.is_finite() {
                return Ok(None);
            }
            b = a.max(b) + step;
        }
    }
    Ok(None)
}

/// `c₁(t) = ∫ S(ω) e^{−i(ω−ω₀)t} dω + Σ_b w_b e^{−i(ω_b−ω₀)t}`, normalised so
/// that `c₁(0) = 1`.
pub fn spectral_dynamics(spectrum: &EvolutionSpectrum, t_fs: &[f64]) -> Result<DecayTrajectory> {
    if let Some(&t) = t_fs.iter().find(|t| t.abs() > spectrum.horizon_fs) {
        return Err(Error::HorizonExceeded {
            t_fs: t,
            max_t_fs: spectrum.horizon_fs,
        });
    }
    let w0 = spectrum.omega0;
    let mut nu: Vec<f64> = spectrum.omega.iter().map(|w| w - w0).collect();
    let mut amp: Vec<Complex64> = spectrum
        .weights
        .iter()
        .zip(&spectrum.density)
        .map(|(w, s)| Complex64::new(w * s, 0.0))
        .collect();
    for b in &spectrum.bound_states {
        nu.push(b.omega - w0);
        amp.push(Complex64::new(b.weight, 0.0));
    }
    let t: Vec<f64> = t_fs.iter().map(|&t| fs_to_natural(t)).collect();
    let raw = fourier_sum(&nu, &amp, &t);
    let norm = spectrum.total_weight;
    Ok(DecayTrajectory {
        t_fs: t_fs.to_vec(),
        c1: t_fs
            .iter()
            .zip(raw)
            .map(|(&tk, c)| if tk == 0.0 { Complex64::new(1.0, 0.0) } else { c / norm })
            .collect(),
        method: DynamicsMethod::Spectral,
        problem: None,
    })
}
