//! Energy level shift and excited-state decay dynamics of a two-level
//! emitter coupled to a structured electromagnetic reservoir.
//!
//! All frequencies, rates and shifts are in electron-volts (ħ = 1), lengths
//! in nanometres, dipole moments in Debye and times in femtoseconds.
//!
//! The crate is organised bottom-up:
//!
//! * [`units`] and [`materials`] hold physical constants and permittivity
//!   models.
//! * [`bessel`] and [`mie`] evaluate the scattering Green function of a
//!   sphere, giving the coupling strength `g(ω)` at real or imaginary
//!   frequency.
//! * [`spectrum`] is the sampled coupling-spectrum data model and its CSV
//!   wire format.
//! * [`levelshift`] computes the decay rate `Γ(ω)` and the level shift
//!   `Δ(ω)` by three routes: a principal-value Hilbert transform, an
//!   imaginary-axis integral, and a subtractive Kramers-Kronig formula.
//! * [`dynamics`] solves for the excited-state amplitude `c₁(t)` either in the
//!   time domain (Volterra equation) or through the evolution spectrum.

pub mod bessel;
pub mod coupling;
pub mod dynamics;
mod error;
pub mod interp;
pub mod levelshift;
pub mod materials;
pub mod mie;
pub mod quadrature;
pub mod spectrum;
pub mod units;

pub use num_complex::Complex64;

pub use coupling::{AnalyticCoupling, CouplingSource, LorentzianOscillators, VacuumCoupling};
pub use error::{Error, Result};
pub use materials::PermittivityModel;
pub use mie::{MultipoleSeriesPolicy, SphereCoupling, SphereSystem};
pub use levelshift::{LevelShiftTable, QuadraturePolicy, ShiftMethod, ShiftSubject};
pub use spectrum::CouplingSpectrum;
