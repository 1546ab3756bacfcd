//! Decay rate `Γ(ω) = 2π Im g(ω)` and three routes to the level shift `Δ(ω)`:
//!
//! * `hilbert`: `Δ = (1/2π) PV∫₀^ωmax Γ(s)/(ω−s) ds`, with the pole removed by
//!   subtracting `Γ(ω)` and adding back its logarithm;
//! * `imag-axis`: `Δ = −π Re g(ω) + ω∫₀^ξmax g(iξ)/(ω²+ξ²) dξ`, analytic
//!   models only;
//! * `sub-kk`: `Δ = −π Re g(ω) + (π/2) g(0) − ω∫₀^ωmax Im g(s)/((ω+s)s) ds`.
//!
//! The last two use the causal structure of `g`; the integrand of `sub-kk` is
//! regular and confined to where `Im g` lives.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::coupling::{AnalyticCoupling, CouplingSource};
use crate::error::{Error, Result};
use crate::quadrature::{adaptive, find_peaks, geomspace, linspace, AdaptiveOptions, AdaptiveRule};

/// Cut-off of the imaginary-axis reference, eV.
pub const REFERENCE_XI_MAX: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShiftMethod {
    Hilbert,
    ImagAxis,
    SubKk,
}

impl ShiftMethod {
    pub const ALL: [ShiftMethod; 3] = [ShiftMethod::Hilbert, ShiftMethod::ImagAxis, ShiftMethod::SubKk];

    pub fn as_str(self) -> &'static str {
        match self {
            ShiftMethod::Hilbert => "hilbert",
            ShiftMethod::ImagAxis => "imag-axis",
            ShiftMethod::SubKk => "sub-kk",
        }
    }
}

impl fmt::Display for ShiftMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ShiftMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ShiftMethod::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!(
                "unknown shift method {s:?}; expected hilbert, imag-axis or sub-kk"
            )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridLayout {
    /// Uniform initial panels.
    Linear,
    /// Geometric panels below 1 eV, uniform above.
    LogLinear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraturePolicy {
    /// Maximum integrand evaluations per integration rule.
    pub node_budget: usize,
    /// Remove the principal-value pole analytically (Hilbert method).
    pub singularity_subtraction: bool,
    pub layout: GridLayout,
    /// Target absolute error of each integral, eV.
    pub abs_tol: f64,
}

impl Default for QuadraturePolicy {
    fn default() -> Self {
        Self {
            node_budget: 200_000,
            singularity_subtraction: true,
            layout: GridLayout::LogLinear,
            abs_tol: 1e-9,
        }
    }
}

impl QuadraturePolicy {
    pub fn validate(&self) -> Result<()> {
        if self.node_budget < 64 {
            return Err(Error::InvalidParameter(format!(
                "node budget must be at least 64, got {}",
                self.node_budget
            )));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "quadrature tolerance must be positive, got {}",
                self.abs_tol
            )));
        }
        Ok(())
    }

    fn adaptive_options(&self) -> AdaptiveOptions {
        AdaptiveOptions {
            abs_tol: self.abs_tol,
            rel_tol: 0.0,
            max_evals: self.node_budget,
            min_width: 1e-10,
        }
    }
}

/// What the quadrature did, carried along with every table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuadratureReport {
    pub nodes: usize,
    pub panels: usize,
    pub converged: bool,
    pub error_estimate: f64,
    /// Targets that coincided with a quadrature node and were moved off it.
    pub nudged: usize,
    pub notes: Vec<String>,
}

/// `Δ(ω)` and `Γ(ω)` on a grid, for one method and cut-off.
#[derive(Debug, Clone)]
pub struct LevelShiftTable {
    pub omega: Vec<f64>,
    pub delta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub method: ShiftMethod,
    pub omega_max: f64,
    pub report: QuadratureReport,
}

pub const SHIFT_TABLE_HEADER: &str = "omega_ev,delta_ev,gamma_ev,method,omega_max_ev";

impl LevelShiftTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{SHIFT_TABLE_HEADER}\n");
        for i in 0..self.omega.len() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{},{:.16e}\n",
                self.omega[i], self.delta[i], self.gamma[i], self.method, self.omega_max
            ));
        }
        out
    }
}

pub fn emit_table(table: &LevelShiftTable, path: impl AsRef<std::path::Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, table.to_csv()).map_err(|e| Error::io(path, e))
}

/// `Γ(ω) = 2π Im g(ω) θ(ω)` with `θ(0) = 0`. Above the data range of a
/// sampled source `Im g` is zero.
pub fn gamma_of<S: CouplingSource + ?Sized>(source: &S, omega: f64) -> Result<f64> {
    if omega <= 0.0 {
        return Ok(0.0);
    }
    if let Some(max) = source.max_frequency() {
        if omega > max {
            log::warn!("Γ requested at {omega} eV above the data range ({max} eV); using zero");
            return Ok(0.0);
        }
    }
    Ok(2.0 * PI * source.spectral_density(omega)?)
}

/// `Δ(0) = −(π/2) Re g(0)`.
pub fn delta_zero(g0: f64) -> f64 {
    -0.5 * PI * g0
}

/// Samples of `g` on `[0, ω_max]` refined for the real-axis integrals. One
/// rule serves every target frequency.
pub struct RealAxisRule<'a, S: CouplingSource + ?Sized> {
    source: &'a S,
    omega_max: f64,
    rule: AdaptiveRule<Complex64>,
    policy: QuadraturePolicy,
    notes: Vec<String>,
}

impl<'a, S: CouplingSource + ?Sized> RealAxisRule<'a, S> {
    pub fn new(source: &'a S, omega_max: f64, policy: &QuadraturePolicy) -> Result<Self> {
        policy.validate()?;
        if !(omega_max > 0.0 && omega_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cut-off must be positive, got {omega_max}"
            )));
        }
        let mut notes = Vec::new();
        let mut cutoff = omega_max;
        if let Some(max) = source.max_frequency() {
            if cutoff > max {
                let msg = format!(
                    "cut-off {omega_max} eV exceeds the data range; Im g treated as zero above {max} eV"
                );
                log::warn!("{msg}");
                notes.push(msg);
                cutoff = max;
            }
        }
        let breakpoints = initial_breakpoints(source, cutoff, policy.layout)?;
        let rule = adaptive(
            |s| source.coupling(s),
            |s, g: &Complex64| g.im / s.min(1.0),
            &breakpoints,
            &policy.adaptive_options(),
        )?;
        if !rule.converged {
            let msg = format!(
                "real-axis rule on [0, {cutoff}] eV stopped at the node budget with error {:.2e}",
                rule.error
            );
            log::warn!("{msg}");
            notes.push(msg);
        }
        Ok(Self {
            source,
            omega_max: cutoff,
            rule,
            policy: *policy,
            notes,
        })
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    pub fn rule(&self) -> &AdaptiveRule<Complex64> {
        &self.rule
    }

    pub fn source(&self) -> &'a S {
        self.source
    }

    pub fn report(&self, nudged: usize) -> QuadratureReport {
        QuadratureReport {
            nodes: self.rule.node_count(),
            panels: self.rule.panels.len(),
            converged: self.rule.converged,
            error_estimate: self.rule.error,
            nudged,
            notes: self.notes.clone(),
        }
    }

    /// `Γ(ω)`, zero above the cut-off.
    pub fn gamma(&self, omega: f64) -> Result<f64> {
        if omega >= self.omega_max {
            return Ok(0.0);
        }
        gamma_of(self.source, omega)
    }

    fn check_inside(&self, omega: f64) -> Result<()> {
        if !(omega > 0.0 && omega < self.omega_max) {
            return Err(Error::Domain(format!(
                "level shift needs 0 < ω < ω_max = {} eV, got {omega}",
                self.omega_max
            )));
        }
        Ok(())
    }

    /// Principal-value Hilbert transform of the truncated `Γ`. The flag says
    /// whether `ω` had to be nudged off a node.
    pub fn delta_hilbert(&self, omega: f64) -> Result<(f64, bool)> {
        self.check_inside(omega)?;
        let g_w = self.gamma(omega)?;
        let near = 1e-10 * omega.max(1.0);
        let mut nudged = false;
        let mut sum = 0.0;
        for (s, w, g) in self.rule.iter() {
            let gamma_s = 2.0 * PI * g.im;
            if !self.policy.singularity_subtraction {
                if (s - omega).abs() > near {
                    sum += w * gamma_s / (omega - s);
                } else {
                    nudged = true;
                }
                continue;
            }
            if (s - omega).abs() > near {
                sum += w * (gamma_s - g_w) / (omega - s);
            } else {
                nudged = true;
                let s2 = omega + 1e-6 * omega.max(1.0);
                sum += w * (gamma_of(self.source, s2)? - g_w) / (omega - s2);
            }
        }
        if self.policy.singularity_subtraction {
            sum += g_w * (omega / (self.omega_max - omega)).ln();
        }
        Ok((sum / (2.0 * PI), nudged))
    }

    /// `ω∫₀^ωmax Im g(s)/((ω+s)s) ds`.
    pub fn subtractive_correction(&self, omega: f64) -> f64 {
        omega
            * self
                .rule
                .iter()
                .map(|(s, w, g)| w * g.im / ((omega + s) * s))
                .sum::<f64>()
    }

    pub fn delta_sub_kk(&self, omega: f64, g0: f64) -> Result<f64> {
        self.check_inside(omega)?;
        let g = self.source.coupling(omega)?;
        let d = -PI * g.re + 0.5 * PI * g0 - self.subtractive_correction(omega);
        if !d.is_finite() {
            return Err(Error::NonFinite(format!("sub-kk shift at {omega} eV")));
        }
        Ok(d)
    }

    /// `∫₀^ωmax J(s)/(ω−s) ds` for `ω` outside `(0, ω_max)`, where the
    /// integrand has no pole.
    pub fn delta_outside(&self, omega: f64) -> Result<f64> {
        if omega > 0.0 && omega < self.omega_max {
            return Err(Error::Domain(format!(
                "{omega} eV lies inside the spectral support"
            )));
        }
        Ok(self
            .rule
            .iter()
            .map(|(s, w, g)| w * g.im / (omega - s))
            .sum())
    }
}

fn initial_breakpoints<S: CouplingSource + ?Sized>(
    source: &S,
    cutoff: f64,
    layout: GridLayout,
) -> Result<Vec<f64>> {
    let mut cuts = match layout {
        GridLayout::Linear => linspace(0.0, cutoff, 33),
        GridLayout::LogLinear => {
            let knee = cutoff.min(1.0);
            let mut v = vec![0.0];
            v.extend(geomspace(knee * 1e-4, knee, 13));
            if cutoff > knee {
                let n = ((cutoff - knee) / 0.5).ceil().max(1.0) as usize;
                v.extend(linspace(knee, cutoff, n + 1).into_iter().skip(1));
            }
            v
        }
    };
    cuts.extend(
        source
            .feature_hints()
            .into_iter()
            .filter(|&x| x > 0.0 && x < cutoff),
    );
    // Scan for peaks and put breakpoints around them.
    let scan = linspace(0.0, cutoff, 402);
    let pts = &scan[1..scan.len() - 1];
    let ys: Vec<f64> = pts
        .par_iter()
        .map(|&s| source.spectral_density(s))
        .collect::<Result<_>>()?;
    let step = scan[1] - scan[0];
    for i in find_peaks(&ys) {
        for f in [0.05, 0.15, 0.5, 1.0] {
            for x in [pts[i] - f * step, pts[i] + f * step] {
                if x > 0.0 && x < cutoff {
                    cuts.push(x);
                }
            }
        }
    }
    Ok(cuts)
}

/// Samples of `g(iξ)` on `[0, ξ_max]`.
pub struct ImagAxisRule<'a, S: AnalyticCoupling + ?Sized> {
    source: &'a S,
    xi_max: f64,
    rule: AdaptiveRule<f64>,
}

impl<'a, S: AnalyticCoupling + ?Sized> ImagAxisRule<'a, S> {
    /// `omega_min` is the smallest target frequency; the Lorentzian weight
    /// `ω/(ω²+ξ²)` is sharpest there and drives the refinement.
    pub fn new(source: &'a S, xi_max: f64, omega_min: f64, policy: &QuadraturePolicy) -> Result<Self> {
        Self::on_interval(source, 0.0, xi_max, omega_min, policy)
    }

    fn on_interval(
        source: &'a S,
        xi_lo: f64,
        xi_max: f64,
        omega_min: f64,
        policy: &QuadraturePolicy,
    ) -> Result<Self> {
        policy.validate()?;
        if !(xi_max > xi_lo && omega_min > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "imaginary-axis rule needs ξ_max > {xi_lo} and ω > 0, got ξ_max = {xi_max}, ω = {omega_min}"
            )));
        }
        // Panels with a fixed ratio, so the rule for a shorter axis is a
        // prefix of the rule for a longer one.
        let mut cuts = vec![xi_lo];
        let mut x = 1e-3;
        while x < xi_max {
            if x > xi_lo {
                cuts.push(x);
            }
            x *= 1.25;
        }
        cuts.push(xi_max);
        let rule = adaptive(
            |xi| source.coupling_imag_axis(xi),
            |xi, g: &f64| g * omega_min / (omega_min * omega_min + xi * xi),
            &cuts,
            &policy.adaptive_options(),
        )?;
        if !rule.converged {
            log::warn!(
                "imaginary-axis rule on [{xi_lo}, {xi_max}] eV stopped at the node budget with error {:.2e}",
                rule.error
            );
        }
        Ok(Self {
            source,
            xi_max,
            rule,
        })
    }

    pub fn xi_max(&self) -> f64 {
        self.xi_max
    }

    /// `ω∫ g(iξ)/(ω²+ξ²) dξ` over the rule's interval.
    pub fn integral(&self, omega: f64) -> f64 {
        omega
            * self
                .rule
                .iter()
                .map(|(xi, w, g)| w * g / (omega * omega + xi * xi))
                .sum::<f64>()
    }

    pub fn delta(&self, omega: f64) -> Result<f64> {
        if !(omega > 0.0) {
            return Err(Error::Domain(format!(
                "imaginary-axis shift needs ω > 0, got {omega}"
            )));
        }
        Ok(-PI * self.source.coupling(omega)?.re + self.integral(omega))
    }

    pub fn report(&self) -> QuadratureReport {
        QuadratureReport {
            nodes: self.rule.node_count(),
            panels: self.rule.panels.len(),
            converged: self.rule.converged,
            error_estimate: self.rule.error,
            nudged: 0,
            notes: Vec::new(),
        }
    }
}

pub fn delta_hilbert<S: CouplingSource + ?Sized>(
    source: &S,
    omega: f64,
    omega_max: f64,
    policy: &QuadraturePolicy,
) -> Result<f64> {
    RealAxisRule::new(source, omega_max, policy)?
        .delta_hilbert(omega)
        .map(|(d, _)| d)
}

pub fn delta_sub_kk<S: CouplingSource + ?Sized>(
    source: &S,
    g0: f64,
    omega: f64,
    omega_max: f64,
    policy: &QuadraturePolicy,
) -> Result<f64> {
    RealAxisRule::new(source, omega_max, policy)?.delta_sub_kk(omega, g0)
}

pub fn delta_imag_axis<S: AnalyticCoupling + ?Sized>(
    source: &S,
    omega: f64,
    xi_max: f64,
    policy: &QuadraturePolicy,
) -> Result<f64> {
    ImagAxisRule::new(source, xi_max, omega, policy)?.delta(omega)
}

/// Contribution of `[ξ, ξ_max]` to the imaginary-axis integral,
/// `ω∫_ξ^ξmax g(is)/(ω²+s²) ds`.
pub fn imag_axis_tail<S: AnalyticCoupling + ?Sized>(
    source: &S,
    omega: f64,
    xi: f64,
    xi_max: f64,
    policy: &QuadraturePolicy,
) -> Result<f64> {
    Ok(ImagAxisRule::on_interval(source, xi, xi_max, omega, policy)?.integral(omega))
}

/// What the shifts are computed from.
#[derive(Clone, Copy)]
pub enum ShiftSubject<'a> {
    /// Analytic model: all three methods, `Re g(0)` from the model.
    Analytic(&'a dyn AnalyticCoupling),
    /// Sampled or otherwise non-analytic data with an externally supplied
    /// `Re g(0)`.
    Sampled {
        source: &'a dyn CouplingSource,
        g0: f64,
    },
}

impl<'a> ShiftSubject<'a> {
    pub fn source(&self) -> &'a dyn CouplingSource {
        match *self {
            ShiftSubject::Analytic(a) => a,
            ShiftSubject::Sampled { source, .. } => source,
        }
    }

    pub fn static_coupling(&self) -> Result<f64> {
        match *self {
            ShiftSubject::Analytic(a) => a.static_coupling(),
            ShiftSubject::Sampled { g0, .. } => Ok(g0),
        }
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self, ShiftSubject::Analytic(_))
    }
}

/// `Δ` and `Γ` over `grid` for one method and cut-off (for `imag-axis` the
/// cut-off is `ξ_max`).
pub fn shift_table(
    subject: ShiftSubject<'_>,
    grid: &[f64],
    method: ShiftMethod,
    omega_max: f64,
    policy: &QuadraturePolicy,
) -> Result<LevelShiftTable> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty frequency grid".into()));
    }
    let source = subject.source();
    let gamma: Vec<f64> = grid
        .par_iter()
        .map(|&w| gamma_of(source, w))
        .collect::<Result<_>>()?;
    let (delta, report) = match method {
        ShiftMethod::ImagAxis => {
            let ShiftSubject::Analytic(a) = subject else {
                return Err(Error::Unsupported(
                    "the imaginary-axis method needs an analytic coupling model, not sampled data".into(),
                ));
            };
            let w_min = grid.iter().copied().fold(f64::INFINITY, f64::min);
            let rule = ImagAxisRule::new(a, omega_max, w_min, policy)?;
            let d = grid
                .par_iter()
                .map(|&w| rule.delta(w))
                .collect::<Result<Vec<_>>>()?;
            (d, rule.report())
        }
        ShiftMethod::Hilbert => {
            let rule = RealAxisRule::new(source, omega_max, policy)?;
            let out = grid
                .par_iter()
                .map(|&w| rule.delta_hilbert(w))
                .collect::<Result<Vec<_>>>()?;
            let nudged = out.iter().filter(|(_, n)| *n).count();
            (out.into_iter().map(|(d, _)| d).collect(), rule.report(nudged))
        }
        ShiftMethod::SubKk => {
            let g0 = subject.static_coupling()?;
            let rule = RealAxisRule::new(source, omega_max, policy)?;
            let d = grid
                .par_iter()
                .map(|&w| rule.delta_sub_kk(w, g0))
                .collect::<Result<Vec<_>>>()?;
            (d, rule.report(0))
        }
    };
    Ok(LevelShiftTable {
        omega: grid.to_vec(),
        delta,
        gamma,
        method,
        omega_max,
        report,
    })
}

/// One entry of a method comparison: `error = delta − reference`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRow {
    pub method: ShiftMethod,
    pub omega_max: f64,
    pub omega: f64,
    pub delta: f64,
    pub reference: f64,
    pub error: f64,
}

#[derive(Debug, Clone)]
pub struct MethodComparison {
    pub reference_method: ShiftMethod,
    pub reference_cutoff: f64,
    pub rows: Vec<ErrorRow>,
}

pub const COMPARISON_HEADER: &str =
    "omega_ev,method,omega_max_ev,delta_ev,reference_ev,error_ev,reference_method,reference_cutoff_ev";

impl MethodComparison {
    /// `max_ω |error|` for one method and cut-off.
    pub fn max_abs_error(&self, method: ShiftMethod, omega_max: f64) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.method == method && r.omega_max == omega_max)
            .map(|r| r.error.abs())
            .fold(None, |m, e| Some(m.map_or(e, |m: f64| m.max(e))))
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{COMPARISON_HEADER}\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e}\n",
                r.omega,
                r.method,
                r.omega_max,
                r.delta,
                r.reference,
                r.error,
                self.reference_method,
                self.reference_cutoff
            ));
        }
        out
    }
}

/// Errors of the Hilbert and subtractive methods at each cut-off against a
/// reference: the imaginary-axis method at 200 eV for analytic models, the
/// subtractive method at the highest cut-off otherwise.
pub fn compare_methods(
    subject: ShiftSubject<'_>,
    grid: &[f64],
    cutoffs: &[f64],
    policy: &QuadraturePolicy,
) -> Result<MethodComparison> {
    if cutoffs.is_empty() {
        return Err(Error::InvalidParameter("no cut-offs to compare".into()));
    }
    let (reference_method, reference_cutoff) = if subject.is_analytic() {
        (ShiftMethod::ImagAxis, REFERENCE_XI_MAX)
    } else {
        let top = cutoffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (ShiftMethod::SubKk, top)
    };
    let reference = shift_table(subject, grid, reference_method, reference_cutoff, policy)?;
    let per_cutoff: Vec<Vec<ErrorRow>> = cutoffs
        .par_iter()
        .map(|&cut| {
            let mut rows = Vec::new();
            for method in [ShiftMethod::Hilbert, ShiftMethod::SubKk] {
                let t = shift_table(subject, grid, method, cut, policy)?;
                for (i, &w) in grid.iter().enumerate() {
                    rows.push(ErrorRow {
                        method,
                        omega_max: cut,
                        omega: w,
                        delta: t.delta[i],
                        reference: reference.delta[i],
                        error: t.delta[i] - reference.delta[i],
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(MethodComparison {
        reference_method,
        reference_cutoff,
        rows: per_cutoff.into_iter().flatten().collect(),
    })
}
