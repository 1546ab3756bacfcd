//! Scattering Green function of a homogeneous sphere for a radially oriented
//! dipole, evaluated at the dipole position.
//!
//! With the Green function normalised by `[∇×∇× − ε ω²/c²] G = (ω²/c²) I δ`,
//! the radial-radial scattered part at `r₀` is
//!
//! ```text
//! G_s = (ω²/c²) · (i k₁ / 4π) · Σₙ n(n+1)(2n+1) Bₙ [hₙ(k₁r₀) / (k₁r₀)]²
//! ```
//!
//! where `Bₙ` is the TM reflection coefficient of the sphere seen from the
//! host. The free-space part has `Im G₀ = ω³ / (6π c³)` in vacuum, which is
//! what makes `2π Im g₀` the textbook spontaneous emission rate.
//!
//! The series terms are assembled from Bessel-function ratios. Individual
//! `hₙ(k₁r₀)` overflow `f64` long before the near-field series at a 1 nm gap
//! has converged, but `Bₙ hₙ²` stays of order `(a/r₀)^{2n}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bessel::{h_ratios, j_ratios};
use crate::coupling::{vacuum_im_g, AnalyticCoupling, CouplingSource};
use crate::error::{Error, Result};
use crate::materials::PermittivityModel;
use crate::units::{coupling_prefactor_ev_nm3, HBAR_C_EV_NM};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Emitter outside a sphere: radius `a`, gap `h`, so `r₀ = a + h`.
#[derive(Debug, Clone)]
pub struct SphereSystem {
    radius_nm: f64,
    gap_nm: f64,
    host_eps: f64,
    sphere: PermittivityModel,
    dipole_debye: f64,
}

impl SphereSystem {
    pub fn new(
        radius_nm: f64,
        gap_nm: f64,
        host_eps: f64,
        sphere: PermittivityModel,
        dipole_debye: f64,
    ) -> Result<Self> {
        if !(radius_nm > 0.0 && radius_nm.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sphere radius must be positive, got {radius_nm} nm"
            )));
        }
        if !(gap_nm > 0.0 && gap_nm.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "emitter gap must be positive, got {gap_nm} nm"
            )));
        }
        if !(host_eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "host permittivity must be positive, got {host_eps}"
            )));
        }
        if !(dipole_debye >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dipole moment must be non-negative, got {dipole_debye} D"
            )));
        }
        Ok(Self {
            radius_nm,
            gap_nm,
            host_eps,
            sphere,
            dipole_debye,
        })
    }

    /// Drude-gold sphere in vacuum.
    pub fn gold_in_vacuum(radius_nm: f64, gap_nm: f64, dipole_debye: f64) -> Result<Self> {
        Self::new(
            radius_nm,
            gap_nm,
            1.0,
            PermittivityModel::drude_gold(),
            dipole_debye,
        )
    }

    pub fn radius_nm(&self) -> f64 {
        self.radius_nm
    }
    pub fn gap_nm(&self) -> f64 {
        self.gap_nm
    }
    pub fn emitter_radius_nm(&self) -> f64 {
        self.radius_nm + self.gap_nm
    }
    pub fn host_eps(&self) -> f64 {
        self.host_eps
    }
    pub fn sphere(&self) -> &PermittivityModel {
        &self.sphere
    }
    pub fn dipole_debye(&self) -> f64 {
        self.dipole_debye
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultipoleSeriesPolicy {
    /// Stop once a term is below this fraction of the running sum.
    pub tolerance: f64,
    pub max_order: usize,
}

impl Default for MultipoleSeriesPolicy {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_order: 500,
        }
    }
}

impl MultipoleSeriesPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) || self.max_order < 1 {
            return Err(Error::InvalidParameter(format!(
                "multipole policy needs tolerance in (0,1) and cap ≥ 1: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Converged series value and the highest multipole order used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    pub order: usize,
}

struct Media {
    n1: Complex64,
    n2: Complex64,
    k1: Complex64,
    x1: Complex64,
    x2: Complex64,
    y: Complex64,
}

fn media(omega: Complex64, sys: &SphereSystem) -> Result<(Complex64, Media)> {
    if omega.norm() == 0.0 {
        return Err(Error::Domain("sphere Green function at zero frequency".into()));
    }
    let eps2 = sys.sphere.eval(omega)?;
    let n1 = Complex64::new(sys.host_eps.sqrt(), 0.0);
    let n2 = eps2.sqrt();
    let k0 = omega / HBAR_C_EV_NM;
    let k1 = n1 * k0;
    Ok((
        k0,
        Media {
            n1,
            n2,
            k1,
            x1: k1 * sys.radius_nm,
            x2: n2 * k0 * sys.radius_nm,
            y: k1 * sys.emitter_radius_nm(),
        },
    ))
}

/// Ratio tables for orders `1..=n_max` shared by the coefficient and series
/// evaluations.
struct Ratios {
    s1: Vec<Complex64>,
    r1: Vec<Complex64>,
    s2: Vec<Complex64>,
    ry: Vec<Complex64>,
}

impl Ratios {
    fn new(m: &Media, n_max: usize) -> Self {
        Self {
            s1: j_ratios(m.x1, n_max),
            r1: h_ratios(m.x1, n_max),
            s2: j_ratios(m.x2, n_max),
            ry: h_ratios(m.y, n_max),
        }
    }

    /// `(n₁ D₂ − n₂ Dψ₁) / (n₂ Dξ₁ − n₁ D₂)` with `D = (z fₙ)' / (z fₙ)`.
    fn contrast_factor(&self, m: &Media, n: usize) -> Complex64 {
        let nf = n as f64;
        let d_psi1 = self.s1[n].inv() - nf / m.x1;
        let d_xi1 = self.r1[n].inv() - nf / m.x1;
        let d2 = self.s2[n].inv() - nf / m.x2;
        (m.n1 * d2 - m.n2 * d_psi1) / (m.n2 * d_xi1 - m.n1 * d2)
    }
}

/// TM (electric-type) reflection coefficient `Bₙ` of the sphere.
///
/// `Bₙ = −aₙ` in Bohren-Huffman notation with relative index `n₂/n₁`; in the
/// quasi-static limit `B₁ ≈ (2i/3)(k₁a)³ (ε₂−ε₁)/(ε₂+2ε₁)`.
pub fn mie_tm_reflection(n: usize, omega: Complex64, sys: &SphereSystem) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::InvalidParameter("multipole order must be ≥ 1".into()));
    }
    let (_, m) = media(omega, sys)?;
    let ratios = Ratios::new(&m, n);
    // jₙ/hₙ at x₁ via the order-0 ratio and the running ratio products.
    let (j0, h0) = (m.x1.sin() / m.x1, -I * (I * m.x1).exp() / m.x1);
    let mut jh = j0 / h0;
    for k in 1..=n {
        jh *= ratios.s1[k] / ratios.r1[k];
    }
    let b = jh * ratios.contrast_factor(&m, n);
    if !b.is_finite() {
        return Err(Error::Overflow(format!("B_{n}({omega})")));
    }
    Ok(b)
}

/// Scattering part of the coupling strength at (possibly complex) frequency
/// `omega`, in eV.
pub fn scattering_g_rr(
    omega: Complex64,
    sys: &SphereSystem,
    policy: &MultipoleSeriesPolicy,
) -> Result<SeriesValue> {
    policy.validate()?;
    let (k0, m) = media(omega, sys)?;
    let estimate = estimated_order(sys, m.y.norm(), policy.tolerance).min(policy.max_order);
    let attempt = match multipole_sum(&m, estimate, policy.tolerance) {
        Err(_) if estimate < policy.max_order => {
            multipole_sum(&m, policy.max_order, policy.tolerance)
        }
        other => other,
    };
    match attempt {
        Ok(v) => Ok(finish(v, k0, &m, sys)),
        Err(partial) => Err(Error::SeriesNotConverged {
            partial: partial.value * prefactor(k0, &m, sys),
            cap: policy.max_order,
        }),
    }
}

fn prefactor(k0: Complex64, m: &Media, sys: &SphereSystem) -> Complex64 {
    coupling_prefactor_ev_nm3(sys.dipole_debye) * k0 * k0 * I * m.k1 / (4.0 * PI)
}

fn finish(v: SeriesValue, k0: Complex64, m: &Media, sys: &SphereSystem) -> SeriesValue {
    SeriesValue {
        value: v.value * prefactor(k0, m, sys),
        order: v.order,
    }
}

// Near-field terms fall off like n³ (a/r₀)^{2n}; retardation needs a few
// orders beyond |k₁r₀|.
fn estimated_order(sys: &SphereSystem, ky: f64, tol: f64) -> usize {
    let q = 2.0 * (sys.emitter_radius_nm() / sys.radius_nm).ln();
    let mut n: f64 = 10.0;
    for _ in 0..20 {
        n = ((1.0 / tol).ln() + 3.0 * n.ln()) / q;
    }
    (n + ky + 20.0).ceil() as usize
}

fn multipole_sum(m: &Media, n_max: usize, tol: f64) -> std::result::Result<SeriesValue, SeriesValue> {
    let ratios = Ratios::new(m, n_max);
    // P = jₙ(x₁) hₙ(x₁), ρ = hₙ(y) / hₙ(x₁)
    let mut p = (m.x1.sin() / m.x1) * (-I * (I * m.x1).exp() / m.x1);
    let mut rho = m.x1 / m.y * (I * (m.y - m.x1)).exp();
    let inv_y2 = (m.y * m.y).inv();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut small_run = 0;
    for n in 1..=n_max {
        p *= ratios.s1[n] * ratios.r1[n];
        rho *= ratios.ry[n] / ratios.r1[n];
        let nf = n as f64;
        let term = nf * (nf + 1.0) * (2.0 * nf + 1.0)
            * ratios.contrast_factor(m, n)
            * p
            * rho
            * rho
            * inv_y2;
        sum += term;
        if !sum.is_finite() {
            return Err(SeriesValue { value: sum, order: n });
        }
        if term.norm() <= tol * sum.norm() {
            small_run += 1;
            if small_run >= 2 {
                return Ok(SeriesValue { value: sum, order: n });
            }
        } else {
            small_run = 0;
        }
    }
    Err(SeriesValue {
        value: sum,
        order: n_max,
    })
}

/// Coupling strength of the sphere system as a [`CouplingSource`].
#[derive(Debug, Clone)]
pub struct SphereCoupling {
    pub system: SphereSystem,
    pub policy: MultipoleSeriesPolicy,
    /// Add the free-space `Im g₀` on the real axis.
    pub include_vacuum: bool,
}

impl SphereCoupling {
    pub fn new(system: SphereSystem) -> Self {
        Self {
            system,
            policy: MultipoleSeriesPolicy::default(),
            include_vacuum: false,
        }
    }

    pub fn with_vacuum(mut self, include: bool) -> Self {
        self.include_vacuum = include;
        self
    }

    /// Evaluates the real-axis coupling on a frequency grid in parallel.
    pub fn sample(&self, omegas: &[f64]) -> Result<Vec<Complex64>> {
        omegas.par_iter().map(|&w| self.coupling(w)).collect()
    }

    fn vacuum_im(&self, omega: f64) -> f64 {
        vacuum_im_g(omega, self.system.dipole_debye) * self.system.host_eps.sqrt()
    }
}

impl CouplingSource for SphereCoupling {
    fn coupling(&self, omega: f64) -> Result<Complex64> {
        if !(omega > 0.0) {
            return Err(Error::Domain(format!(
                "real-axis coupling needs ω > 0, got {omega}"
            )));
        }
        let mut g = scattering_g_rr(Complex64::new(omega, 0.0), &self.system, &self.policy)?.value;
        if self.include_vacuum {
            g.im += self.vacuum_im(omega);
        }
        Ok(g)
    }

    fn feature_hints(&self) -> Vec<f64> {
        // Dipole and high-order surface-plasmon frequencies of a Drude sphere.
        match *self.system.sphere() {
            PermittivityModel::Drude {
                plasma_ev,
                background,
                ..
            } if plasma_ev > 0.0 => {
                let e1 = self.system.host_eps;
                [1.0, 2.0, 3.0, 5.0, 10.0, 1e6]
                    .iter()
                    .map(|&n: &f64| {
                        let target = -(n + 1.0) / n * e1;
                        plasma_ev / (background - target).sqrt()
                    })
                    .collect()
            }
            _ => Vec::new(),
        }
    }

    fn includes_vacuum(&self) -> bool {
        self.include_vacuum
    }

    fn describe(&self) -> String {
        format!(
            "sphere a = {} nm, h = {} nm, ε₁ = {}, d = {} D{}",
            self.system.radius_nm,
            self.system.gap_nm,
            self.system.host_eps,
            self.system.dipole_debye,
            if self.include_vacuum { ", with vacuum" } else { "" }
        )
    }
}

impl AnalyticCoupling for SphereCoupling {
    fn coupling_complex(&self, z: Complex64) -> Result<Complex64> {
        if z.im < 0.0 {
            return Err(Error::Domain(format!(
                "coupling requested in the lower half plane at {z}"
            )));
        }
        Ok(scattering_g_rr(z, &self.system, &self.policy)?.value)
    }

    fn static_coupling(&self) -> Result<f64> {
        if !self.system.sphere.is_analytic() {
            return Err(Error::UnsupportedContinuation(Complex64::new(0.0, 1e-7)));
        }
        // g is linear in ξ near the origin for a Drude metal; two-point
        // extrapolation removes that slope.
        let (a, b) = (1e-6, 2e-6);
        let ga = self.coupling_imag_axis(a)?;
        let gb = self.coupling_imag_axis(b)?;
        Ok(2.0 * ga - gb)
    }
}
