//! Spherical Bessel `j_n` and outgoing spherical Hankel `h_n⁽¹⁾` functions of
//! complex argument.
//!
//! Besides point values, the Mie series needs ratios `f_n / f_{n-1}` up to
//! high order. Those are produced without ever forming the individual
//! functions, which under- or overflow long before the ratios do.

use num_complex::Complex64;

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphBesselKind {
    /// Regular spherical Bessel function `j_n`.
    J,
    /// Outgoing spherical Hankel function `h_n⁽¹⁾ = j_n + i y_n`.
    H1,
}

/// A spherical Bessel-type value together with the Riccati derivative
/// `d/dz [z f_n(z)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiPair {
    pub value: Complex64,
    pub riccati_derivative: Complex64,
}

/// Evaluates `j_n(z)` or `h_n⁽¹⁾(z)` and its Riccati derivative.
///
/// `j_n` uses downward (Miller) recurrence when `|z| < n` and upward
/// recurrence otherwise; `h_n⁽¹⁾` always recurs upward from the closed forms
/// for orders 0 and 1.
pub fn sph_bessel(kind: SphBesselKind, n: usize, z: Complex64) -> Result<RiccatiPair> {
    if z.norm() == 0.0 {
        return Err(Error::ArgumentZero);
    }
    let (prev, cur) = match kind {
        SphBesselKind::J => j_pair(n, z)?,
        SphBesselKind::H1 => h_pair(n, z)?,
    };
    let riccati_derivative = if n == 0 {
        match kind {
            SphBesselKind::J => z.cos(),
            SphBesselKind::H1 => (I * z).exp(),
        }
    } else {
        z * prev - n as f64 * cur
    };
    let out = RiccatiPair {
        value: cur,
        riccati_derivative,
    };
    if !(out.value.is_finite() && out.riccati_derivative.is_finite()) {
        return Err(Error::Overflow(format!("{kind:?}_{n}({z})")));
    }
    Ok(out)
}

fn j0_j1(z: Complex64) -> Result<(Complex64, Complex64)> {
    let (s, c) = (z.sin(), z.cos());
    if !(s.is_finite() && c.is_finite()) {
        return Err(Error::Overflow(format!("sin/cos({z})")));
    }
    let j0 = s / z;
    let j1 = s / (z * z) - c / z;
    Ok((j0, j1))
}

fn h0_h1(z: Complex64) -> Result<(Complex64, Complex64)> {
    let e = (I * z).exp();
    if !e.is_finite() {
        return Err(Error::Overflow(format!("exp(i·{z})")));
    }
    let h0 = -I * e / z;
    let h1 = -e * (z + I) / (z * z);
    Ok((h0, h1))
}

/// Returns `(f_{n-1}, f_n)` for `j`; `f_{-1}` is `cos z / z`.
fn j_pair(n: usize, z: Complex64) -> Result<(Complex64, Complex64)> {
    let (j0, j1) = j0_j1(z)?;
    if n == 0 {
        return Ok((z.cos() / z, j0));
    }
    if z.norm() >= n as f64 {
        let (mut a, mut b) = (j0, j1);
        for k in 1..n {
            let next = (2 * k + 1) as f64 / z * b - a;
            a = b;
            b = next;
        }
        return Ok((a, b));
    }
    let ratios = j_ratios(z, n);
    // Normalise against whichever of j0, j1 is larger to avoid anchoring on a
    // zero of j0.
    let (mut prev, mut cur, start) = if j0.norm() >= j1.norm() {
        (j0, j0 * ratios[1], 1)
    } else {
        (j0, j1, 1)
    };
    for r in &ratios[start + 1..=n] {
        prev = cur;
        cur *= *r;
    }
    Ok((prev, cur))
}

fn h_pair(n: usize, z: Complex64) -> Result<(Complex64, Complex64)> {
    let (h0, h1) = h0_h1(z)?;
    if n == 0 {
        // h_{-1} = e^{iz}/z
        return Ok(((I * z).exp() / z, h0));
    }
    let (mut a, mut b) = (h0, h1);
    for k in 1..n {
        let next = (2 * k + 1) as f64 / z * b - a;
        a = b;
        b = next;
    }
    Ok((a, b))
}

/// Ratios `j_k(z) / j_{k-1}(z)` for `k = 1..=n_max` (index 0 is unused),
/// from the downward continued fraction.
pub(crate) fn j_ratios(z: Complex64, n_max: usize) -> Vec<Complex64> {
    let start = n_max + 30 + (2.0 * z.norm()).ceil() as usize;
    let mut out = vec![Complex64::new(0.0, 0.0); n_max + 1];
    let mut s = z / (2 * start + 3) as f64;
    for k in (1..=start).rev() {
        let mut denom = (2 * k + 1) as f64 / z - s;
        if denom.norm() == 0.0 {
            denom = Complex64::new(1e-300, 0.0);
        }
        s = denom.inv();
        if k <= n_max {
            out[k] = s;
        }
    }
    out
}

/// Ratios `h_k(z) / h_{k-1}(z)` for `k = 1..=n_max` by upward recurrence.
pub(crate) fn h_ratios(z: Complex64, n_max: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n_max + 1];
    if n_max == 0 {
        return out;
    }
    let mut r = (1.0 - I * z) / z;
    out[1] = r;
    for k in 1..n_max {
        r = (2 * k + 1) as f64 / z - r.inv();
        out[k + 1] = r;
    }
    out
}
