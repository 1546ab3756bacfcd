//! Permittivity models: analytic Drude metals and tabulated real-frequency
//! data.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::interp::Pchip;
use crate::units::rad_per_s_to_ev;

#[derive(Debug, Clone)]
pub enum PermittivityModel {
    /// `ε(z) = ε_B − ω_p² / (z (z + iγ_p))`, all frequencies in eV.
    Drude {
        plasma_ev: f64,
        damping_ev: f64,
        background: f64,
    },
    Tabulated(TabulatedPermittivity),
}

impl PermittivityModel {
    pub fn drude(plasma_ev: f64, damping_ev: f64, background: f64) -> Result<Self> {
        if !(plasma_ev >= 0.0 && damping_ev >= 0.0 && background > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Drude parameters must satisfy ω_p ≥ 0, γ_p ≥ 0, ε_B > 0 (got {plasma_ev}, {damping_ev}, {background})"
            )));
        }
        Ok(PermittivityModel::Drude {
            plasma_ev,
            damping_ev,
            background,
        })
    }

    /// Drude gold with ω_p = 1.26×10¹⁶ rad/s and γ_p = 1.41×10¹⁴ rad/s in a
    /// unit background.
    pub fn drude_gold() -> Self {
        PermittivityModel::Drude {
            plasma_ev: rad_per_s_to_ev(1.26e16),
            damping_ev: rad_per_s_to_ev(1.41e14),
            background: 1.0,
        }
    }

    /// Frequency-independent dielectric, expressed as a carrier-free Drude
    /// model.
    pub fn constant(eps: f64) -> Self {
        PermittivityModel::Drude {
            plasma_ev: 0.0,
            damping_ev: 0.0,
            background: eps,
        }
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self, PermittivityModel::Drude { .. })
    }

    /// Evaluates at a complex frequency. Tabulated models accept only real
    /// frequencies.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        match self {
            PermittivityModel::Drude { .. } => drude_eps(self, z),
            PermittivityModel::Tabulated(_) => {
                if z.im != 0.0 {
                    return Err(Error::UnsupportedContinuation(z));
                }
                tabulated_eps(self, z.re)
            }
        }
    }
}

pub fn drude_eps(model: &PermittivityModel, z: Complex64) -> Result<Complex64> {
    let PermittivityModel::Drude {
        plasma_ev,
        damping_ev,
        background,
    } = *model
    else {
        return Err(Error::NotDrude);
    };
    if plasma_ev == 0.0 {
        return Ok(Complex64::new(background, 0.0));
    }
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::PoleAtOrigin);
    }
    let denom = z * (z + Complex64::new(0.0, damping_ev));
    if denom.norm() == 0.0 {
        return Err(Error::PoleAtOrigin);
    }
    Ok(Complex64::new(background, 0.0) - plasma_ev * plasma_ev / denom)
}

pub fn tabulated_eps(model: &PermittivityModel, omega: f64) -> Result<Complex64> {
    match model {
        PermittivityModel::Tabulated(t) => t.eval(omega),
        PermittivityModel::Drude { .. } => Err(Error::Unsupported(
            "tabulated_eps called on a Drude model".into(),
        )),
    }
}

/// Measured-style permittivity rows `(ω, Re ε, Im ε)` with independent PCHIP
/// interpolation of the real and imaginary parts.
#[derive(Debug, Clone)]
pub struct TabulatedPermittivity {
    re: Pchip,
    im: Pchip,
}

impl TabulatedPermittivity {
    pub fn new(rows: &[(f64, f64, f64)]) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.2 < 0.0) {
            return Err(Error::Validation(format!(
                "negative Im ε = {} at ω = {} eV",
                r.2, r.0
            )));
        }
        if let Some(r) = rows.iter().find(|r| !(r.0 > 0.0)) {
            return Err(Error::Validation(format!(
                "non-positive frequency {} eV",
                r.0
            )));
        }
        let x: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let re = Pchip::new(x.clone(), rows.iter().map(|r| r.1).collect())?;
        let im = Pchip::new(x, rows.iter().map(|r| r.2).collect())?;
        Ok(Self { re, im })
    }

    /// Reads the `omega_ev,eps_re,eps_im` CSV format.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text)
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut seen_header = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !seen_header {
                seen_header = true;
                if line.replace(' ', "") != "omega_ev,eps_re,eps_im" {
                    return Err(Error::Parse {
                        line: idx + 1,
                        message: format!("expected header omega_ev,eps_re,eps_im, got {line:?}"),
                    });
                }
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected 3 columns, found {}", cols.len()),
                });
            }
            let mut vals = [0.0; 3];
            for (v, c) in vals.iter_mut().zip(&cols) {
                *v = c
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        line: idx + 1,
                        message: format!("not a finite number: {c:?}"),
                    })?;
            }
            rows.push((vals[0], vals[1], vals[2]));
        }
        Self::new(&rows)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.re.domain()
    }

    pub fn eval(&self, omega: f64) -> Result<Complex64> {
        let (lo, hi) = self.domain();
        match (self.re.eval(omega), self.im.eval(omega)) {
            (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
            _ => Err(Error::OutOfRange {
                what: "tabulated permittivity frequency (eV)",
                value: omega,
                min: lo,
                max: hi,
            }),
        }
    }
}
