//! Sources of the coupling strength `g(ω) = d·G(r₀, r₀, ω)·d / (ħπε₀)`.
//!
//! Everything downstream (level shifts, dynamics) is written against
//! [`CouplingSource`]. Sources that are analytic in the upper half plane
//! additionally implement [`AnalyticCoupling`], which unlocks the
//! imaginary-axis level-shift method.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::units::{coupling_prefactor_ev_nm3, wavenumber_per_nm};

pub trait CouplingSource: Sync {
    /// Coupling strength at real frequency `omega` (eV), in eV.
    fn coupling(&self, omega: f64) -> Result<Complex64>;

    /// Spectral density `J(ω) = Im g(ω)`.
    fn spectral_density(&self, omega: f64) -> Result<f64> {
        Ok(self.coupling(omega)?.im)
    }

    /// Highest frequency for which data exist; `None` for analytic models.
    /// Above it `Im g` is taken to be zero.
    fn max_frequency(&self) -> Option<f64> {
        None
    }

    /// Frequencies where sharp features are expected, used to seed the
    /// quadrature partition.
    fn feature_hints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn includes_vacuum(&self) -> bool {
        false
    }

    fn describe(&self) -> String;
}

pub trait AnalyticCoupling: CouplingSource {
    /// Coupling strength at complex frequency in the closed upper half plane.
    fn coupling_complex(&self, z: Complex64) -> Result<Complex64>;

    /// `g(iξ)`, which is real for a causal response.
    fn coupling_imag_axis(&self, xi: f64) -> Result<f64> {
        Ok(self.coupling_complex(Complex64::new(0.0, xi))?.re)
    }

    /// `Re g(0)`, the static limit.
    fn static_coupling(&self) -> Result<f64> {
        self.coupling_imag_axis(1e-7)
    }
}

impl<T: CouplingSource + ?Sized> CouplingSource for &T {
    fn coupling(&self, omega: f64) -> Result<Complex64> {
        (**self).coupling(omega)
    }
    fn spectral_density(&self, omega: f64) -> Result<f64> {
        (**self).spectral_density(omega)
    }
    fn max_frequency(&self) -> Option<f64> {
        (**self).max_frequency()
    }
    fn feature_hints(&self) -> Vec<f64> {
        (**self).feature_hints()
    }
    fn includes_vacuum(&self) -> bool {
        (**self).includes_vacuum()
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

impl<T: AnalyticCoupling + ?Sized> AnalyticCoupling for &T {
    fn coupling_complex(&self, z: Complex64) -> Result<Complex64> {
        (**self).coupling_complex(z)
    }
    fn coupling_imag_axis(&self, xi: f64) -> Result<f64> {
        (**self).coupling_imag_axis(xi)
    }
    fn static_coupling(&self) -> Result<f64> {
        (**self).static_coupling()
    }
}

/// Imaginary part of the free-space coupling, `d²ω³/(6π²ε₀ħc³)`, in eV.
pub fn vacuum_im_g(omega: f64, dipole_debye: f64) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    coupling_prefactor_ev_nm3(dipole_debye) * wavenumber_per_nm(omega).powi(3) / (6.0 * PI)
}

/// Free-space reservoir: only the (renormalised-away real part dropped)
/// imaginary part `vacuum_im_g`.
#[derive(Debug, Clone, Copy)]
pub struct VacuumCoupling {
    pub dipole_debye: f64,
}

impl CouplingSource for VacuumCoupling {
    fn coupling(&self, omega: f64) -> Result<Complex64> {
        Ok(Complex64::new(0.0, vacuum_im_g(omega, self.dipole_debye)))
    }

    fn includes_vacuum(&self) -> bool {
        true
    }

    fn describe(&self) -> String {
        format!("vacuum, d = {} D", self.dipole_debye)
    }
}

/// One damped oscillator of a [`LorentzianOscillators`] reservoir.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillator {
    /// Integrated spectral weight `∫ J dω` of the positive-frequency peak, eV².
    pub strength: f64,
    pub center: f64,
    pub width: f64,
}

/// Causal sum of damped oscillators,
/// `g(z) = Σ (A/π) [1/(c − z − iγ) + 1/(c + z + iγ)]`.
///
/// Poles sit at `±c − iγ`, so `g` is analytic in the upper half plane, real on
/// the imaginary axis and has an odd spectral density. Each term contributes a
/// Lorentzian of weight `A` and half-width `γ` centred at `c`, minus its
/// mirror image at `−c`.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzianOscillators {
    oscillators: Vec<Oscillator>,
}

impl LorentzianOscillators {
    pub fn new(oscillators: Vec<Oscillator>) -> Result<Self> {
        for o in &oscillators {
            if !(o.width > 0.0 && o.center > 0.0 && o.strength >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "oscillator needs width > 0, center > 0, strength ≥ 0: {o:?}"
                )));
            }
        }
        Ok(Self { oscillators })
    }

    pub fn oscillators(&self) -> &[Oscillator] {
        &self.oscillators
    }
}

impl CouplingSource for LorentzianOscillators {
    fn coupling(&self, omega: f64) -> Result<Complex64> {
        self.coupling_complex(Complex64::new(omega, 0.0))
    }

    fn feature_hints(&self) -> Vec<f64> {
        self.oscillators.iter().map(|o| o.center).collect()
    }

    fn describe(&self) -> String {
        let parts: Vec<String> = self
            .oscillators
            .iter()
            .map(|o| format!("(A={}, c={}, γ={})", o.strength, o.center, o.width))
            .collect();
        format!("Lorentzian oscillators {}", parts.join(" "))
    }
}

impl AnalyticCoupling for LorentzianOscillators {
    fn coupling_complex(&self, z: Complex64) -> Result<Complex64> {
        let mut g = Complex64::new(0.0, 0.0);
        for o in &self.oscillators {
            let ig = Complex64::new(0.0, o.width);
            g += o.strength / PI * ((o.center - z - ig).inv() + (o.center + z + ig).inv());
        }
        Ok(g)
    }

    fn static_coupling(&self) -> Result<f64> {
        Ok(self
            .oscillators
            .iter()
            .map(|o| o.strength / PI * 2.0 * o.center / (o.center * o.center + o.width * o.width))
            .sum())
    }
}
