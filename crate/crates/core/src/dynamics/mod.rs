//! Excited-state amplitude `c₁(t)` of an emitter prepared in its upper level
//! with the field in vacuum.
//!
//! Two solvers are provided: the time-domain Volterra equation
//! `c₁(t) = 1 − ∫₀ᵗ B(t−t′) c₁(t′) dt′` ([`volterra_solve`]) and the
//! frequency-domain route through the evolution spectrum
//! `c₁(t) = ∫ S(ω) e^{−i(ω−ω₀)t} dω` ([`evolution_spectrum`],
//! [`spectral_dynamics`]). They agree when the level shift fed to the second
//! one is converged; the first needs `Im g` up to a cut-off high enough for
//! the truncated Hilbert transform to converge.

mod spectral;
mod volterra;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::levelshift::QuadraturePolicy;
use crate::units::fs_to_natural;

pub use spectral::{
    evolution_spectrum, spectral_dynamics, BoundState, EvolutionSpectrum, FreeEmitter,
    HilbertSelfEnergy, SelfEnergy, SubtractiveSelfEnergy, TableSelfEnergy,
};
pub use volterra::{kernel_b, volterra_solve};

/// Default spectral broadening, eV.
pub const DEFAULT_ETA: f64 = 1e-6;

/// Settings shared by both solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsProblem {
    /// Transition frequency, eV.
    pub omega0: f64,
    /// Frequency cut-off, eV.
    pub omega_max: f64,
    pub t_max_fs: f64,
    pub dt_fs: f64,
    /// Broadening applied only where `Γ < η`, eV.
    pub eta: f64,
    pub policy: QuadraturePolicy,
}

impl DynamicsProblem {
    pub fn new(omega0: f64, omega_max: f64, t_max_fs: f64, dt_fs: f64) -> Result<Self> {
        let p = Self {
            omega0,
            omega_max,
            t_max_fs,
            dt_fs,
            eta: DEFAULT_ETA,
            policy: QuadraturePolicy::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.omega0 > 0.0
            && self.omega_max > 0.0
            && self.dt_fs > 0.0
            && self.t_max_fs >= self.dt_fs
            && self.eta >= 0.0
            && [self.omega0, self.omega_max, self.t_max_fs, self.dt_fs, self.eta]
                .iter()
                .all(|v| v.is_finite());
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "dynamics needs ω₀ > 0, ω_max > 0, Δt > 0, t_max ≥ Δt, η ≥ 0: {self:?}"
            )));
        }
        self.policy.validate()
    }

    /// Number of steps `N` with `N Δt ≈ t_max`.
    pub fn steps(&self) -> usize {
        (self.t_max_fs / self.dt_fs).round().max(1.0) as usize
    }

    /// Uniform time grid `0, Δt, …, NΔt` in fs.
    pub fn time_grid_fs(&self) -> Vec<f64> {
        (0..=self.steps()).map(|k| k as f64 * self.dt_fs).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynamicsMethod {
    Volterra,
    Spectral,
    WeakCoupling,
}

impl DynamicsMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            DynamicsMethod::Volterra => "volterra",
            DynamicsMethod::Spectral => "spectral",
            DynamicsMethod::WeakCoupling => "weak-coupling",
        }
    }
}

impl fmt::Display for DynamicsMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DynamicsMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "volterra" => Ok(DynamicsMethod::Volterra),
            "spectral" => Ok(DynamicsMethod::Spectral),
            "weak-coupling" => Ok(DynamicsMethod::WeakCoupling),
            _ => Err(Error::InvalidParameter(format!(
                "unknown dynamics method {s:?}"
            ))),
        }
    }
}

pub const TRAJECTORY_HEADER: &str = "t_fs,c1_re,c1_im,population,method";

#[derive(Debug, Clone)]
pub struct DecayTrajectory {
    pub t_fs: Vec<f64>,
    pub c1: Vec<Complex64>,
    pub method: DynamicsMethod,
    pub problem: Option<DynamicsProblem>,
}

impl DecayTrajectory {
    /// `P_a(t) = |c₁(t)|²`.
    pub fn population(&self) -> Vec<f64> {
        self.c1.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Largest population difference against a trajectory on the same grid.
    pub fn max_population_difference(&self, other: &DecayTrajectory) -> Result<f64> {
        if self.t_fs.len() != other.t_fs.len()
            || self
                .t_fs
                .iter()
                .zip(&other.t_fs)
                .any(|(a, b)| (a - b).abs() > 1e-9 * a.abs().max(1.0))
        {
            return Err(Error::InvalidParameter(
                "trajectories live on different time grids".into(),
            ));
        }
        Ok(self
            .c1
            .iter()
            .zip(&other.c1)
            .map(|(a, b)| (a.norm_sqr() - b.norm_sqr()).abs())
            .fold(0.0, f64::max))
    }

    /// Checks `P_a ∈ [0, 1 + 10⁻⁶]` and `c₁(0) = 1`.
    pub fn validate(&self) -> Result<()> {
        if let (Some(&t0), Some(&c0)) = (self.t_fs.first(), self.c1.first()) {
            if t0 == 0.0 && c0 != Complex64::new(1.0, 0.0) {
                return Err(Error::Validation(format!("c₁(0) = {c0}, expected 1")));
            }
        }
        if let Some((t, c)) = self
            .t_fs
            .iter()
            .zip(&self.c1)
            .find(|(_, c)| !c.is_finite() || c.norm_sqr() > 1.0 + 1e-6)
        {
            return Err(Error::Validation(format!(
                "population {} at {t} fs outside [0, 1]",
                c.norm_sqr()
            )));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{TRAJECTORY_HEADER}\n");
        for (t, c) in self.t_fs.iter().zip(&self.c1) {
            out.push_str(&format!(
                "{t:.16e},{:.16e},{:.16e},{:.16e},{}\n",
                c.re,
                c.im,
                c.norm_sqr(),
                self.method
            ));
        }
        out
    }

    pub fn emit(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// `c₁(t) = exp[−(iΔ + Γ/2) t]`.
pub fn weak_coupling_decay(gamma: f64, delta: f64, t_fs: &[f64]) -> DecayTrajectory {
    let rate = Complex64::new(0.5 * gamma, delta);
    DecayTrajectory {
        t_fs: t_fs.to_vec(),
        c1: t_fs
            .iter()
            .map(|&t| if t == 0.0 { Complex64::new(1.0, 0.0) } else { (-rate * fs_to_natural(t)).exp() })
            .collect(),
        method: DynamicsMethod::WeakCoupling,
        problem: None,
    }
}

/// `Σᵢ aᵢ e^{−i νᵢ t}` at every `t` (natural units). Uniform grids starting
/// at zero use a phase recurrence instead of one `sin_cos` per term.
pub(crate) fn fourier_sum(nu: &[f64], amp: &[Complex64], t: &[f64]) -> Vec<Complex64> {
    let uniform = t.len() > 2
        && t[0] == 0.0
        && t.windows(2).all(|w| ((w[1] - w[0]) - t[1]).abs() <= 1e-9 * t[1]);
    if !uniform {
        return t
            .iter()
            .map(|&tk| {
                nu.iter()
                    .zip(amp)
                    .map(|(&v, &a)| a * Complex64::from_polar(1.0, -v * tk))
                    .sum()
            })
            .collect();
    }
    let dt = t[1];
    let mut out = vec![Complex64::new(0.0, 0.0); t.len()];
    // Blocks of nodes keep the phase vectors in cache; each block restarts
    // from exact phases every `RESYNC` steps to stop round-off drift.
    const RESYNC: usize = 256;
    for (nu_b, amp_b) in nu.chunks(512).zip(amp.chunks(512)) {
        let step: Vec<Complex64> = nu_b.iter().map(|&v| Complex64::from_polar(1.0, -v * dt)).collect();
        let mut phase: Vec<Complex64> = amp_b.to_vec();
        for (k, o) in out.iter_mut().enumerate() {
            if k > 0 && k % RESYNC == 0 {
                for ((p, &a), &v) in phase.iter_mut().zip(amp_b).zip(nu_b) {
                    *p = a * Complex64::from_polar(1.0, -v * t[k]);
                }
            }
            *o += phase.iter().sum::<Complex64>();
            for (p, s) in phase.iter_mut().zip(&step) {
                *p *= s;
            }
        }
    }
    out
}
