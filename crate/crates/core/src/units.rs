//! Physical constants and unit conversions.
//!
//! Internally every frequency is an energy in eV (ħ = 1). Conversions to
//! SI happen only at the API boundary.

use std::f64::consts::PI;

/// Reduced Planck constant, eV·s.
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;
/// Elementary charge, C (also J per eV).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Reduced Planck constant, J·s.
pub const HBAR_J_S: f64 = HBAR_EV_S * ELEMENTARY_CHARGE;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// One Debye in C·m.
pub const DEBYE: f64 = 3.335_64e-30;
/// ħc in eV·nm.
pub const HBAR_C_EV_NM: f64 = HBAR_EV_S * SPEED_OF_LIGHT * 1e9;
/// Phase accumulated per fs by a 1 eV frequency, rad/fs.
pub const RAD_PER_FS_PER_EV: f64 = 1e-15 / HBAR_EV_S;

/// Angular frequency in rad/s to energy in eV.
pub fn rad_per_s_to_ev(omega: f64) -> f64 {
    omega * HBAR_EV_S
}

/// Energy in eV to angular frequency in rad/s.
pub fn ev_to_rad_per_s(energy: f64) -> f64 {
    energy / HBAR_EV_S
}

/// Time in fs to the internal time unit ħ/eV.
pub fn fs_to_natural(t_fs: f64) -> f64 {
    t_fs * RAD_PER_FS_PER_EV
}

/// Internal time unit ħ/eV to fs.
pub fn natural_to_fs(t: f64) -> f64 {
    t / RAD_PER_FS_PER_EV
}

/// Wavenumber in 1/nm for a vacuum photon energy in eV.
pub fn wavenumber_per_nm(energy: f64) -> f64 {
    energy / HBAR_C_EV_NM
}

/// Converts `d² G / (π ε₀)` into eV when `G` is given in nm⁻³.
///
/// This is the prefactor that turns the projected Green function into the
/// coupling strength `g = d·G·d / (ħ π ε₀)` expressed as an energy.
pub fn coupling_prefactor_ev_nm3(dipole_debye: f64) -> f64 {
    let d = dipole_debye * DEBYE;
    d * d * 1e27 / (PI * VACUUM_PERMITTIVITY * ELEMENTARY_CHARGE)
}

/// Free-space spontaneous emission rate `ω³d²/(3πε₀ħc³)` in eV.
///
/// Evaluated entirely in SI units so it can serve as an independent check of
/// the Green-function normalisation.
pub fn vacuum_decay_rate_ev(omega_ev: f64, dipole_debye: f64) -> f64 {
    let w = ev_to_rad_per_s(omega_ev);
    let d = dipole_debye * DEBYE;
    let rate = w.powi(3) * d * d
        / (3.0 * PI * VACUUM_PERMITTIVITY * HBAR_J_S * SPEED_OF_LIGHT.powi(3));
    rate * HBAR_EV_S
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ev_rad_round_trip() {
        for &e in &[1e-3, 0.092_81, 1.0, 5.0, 8.2935, 200.0] {
            let back = rad_per_s_to_ev(ev_to_rad_per_s(e));
            assert!(((back - e) / e).abs() < 1e-12);
        }
    }

    #[test]
    fn drude_gold_parameters_in_ev() {
        assert!((rad_per_s_to_ev(1.26e16) - 8.2935).abs() < 1e-4);
        assert!((rad_per_s_to_ev(1.41e14) - 0.09281).abs() < 1e-5);
    }

    #[test]
    fn phase_rate_per_fs() {
        assert!((RAD_PER_FS_PER_EV - 1.519_267).abs() < 1e-6);
        assert!((natural_to_fs(fs_to_natural(37.5)) - 37.5).abs() < 1e-12);
    }

    #[test]
    fn vacuum_rate_matches_green_function_route() {
        // 2π·Im g₀ with Im G₀ = k³/(6π) must equal the SI closed form.
        for &(w, d) in &[(1.0, 1.0), (2.0, 24.0), (5.0, 24.0), (3.3, 72.0)] {
            let k = wavenumber_per_nm(w);
            let im_g0 = coupling_prefactor_ev_nm3(d) * k.powi(3) / (6.0 * PI);
            let closed = vacuum_decay_rate_ev(w, d);
            assert!(((2.0 * PI * im_g0 - closed) / closed).abs() < 1e-12);
        }
    }
}
