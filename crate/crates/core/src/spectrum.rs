//! Sampled coupling spectra: validation, CSV round trip, resampling and the
//! low-frequency linear fit that supplies `Re g(0)`.
//!
//! Wire format (UTF-8, LF):
//!
//! ```text
//! # any comment
//! # includes_vacuum = false
//! # dipole_debye = 24
//! omega_ev,g_re_ev,g_im_ev
//! 1.0000000000000000e-1,2.79e-2,1.2e-5
//! ```
//!
//! The `key = value` comments are optional metadata; other comments are kept
//! as free text.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::coupling::{vacuum_im_g, CouplingSource};
use crate::error::{Error, Result};
use crate::interp::Pchip;

pub const SPECTRUM_HEADER: &str = "omega_ev,g_re_ev,g_im_ev";

/// Fit window used by [`extrapolate_zero`] when none is given, in eV.
pub const DEFAULT_ZERO_FIT_WINDOW: (f64, f64) = (0.125, 0.2);

const PASSIVITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumOrigin {
    /// Sampled from a built-in analytic model; the string describes it.
    Analytic(String),
    /// Read from a file.
    File(PathBuf),
}

impl SpectrumOrigin {
    fn describe(&self) -> String {
        match self {
            SpectrumOrigin::Analytic(s) => s.clone(),
            SpectrumOrigin::File(p) => format!("file {}", p.display()),
        }
    }
}

/// Complex coupling strength on a strictly increasing positive grid.
#[derive(Debug, Clone)]
pub struct CouplingSpectrum {
    omega: Vec<f64>,
    g: Vec<Complex64>,
    includes_vacuum: bool,
    dipole_debye: Option<f64>,
    origin: SpectrumOrigin,
    comments: Vec<String>,
    re: Pchip,
    im: Pchip,
}

impl CouplingSpectrum {
    /// Validates and wraps samples. Passivity is checked against
    /// `Im g ≥ −10⁻¹²` (adding the vacuum term first when the samples exclude
    /// it and the dipole moment is known).
    pub fn new(
        omega: Vec<f64>,
        g: Vec<Complex64>,
        includes_vacuum: bool,
        dipole_debye: Option<f64>,
        origin: SpectrumOrigin,
    ) -> Result<Self> {
        if omega.len() != g.len() {
            return Err(Error::Validation(format!(
                "{} frequencies but {} samples",
                omega.len(),
                g.len()
            )));
        }
        if omega.len() < 2 {
            return Err(Error::TooFewSamples {
                needed: 2,
                found: omega.len(),
            });
        }
        if let Some(w) = omega.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::Validation(format!(
                "frequencies must be positive and finite, found {w}"
            )));
        }
        if let Some(w) = omega.windows(2).find(|w| w[1] == w[0]) {
            return Err(Error::Validation(format!("duplicate frequency {}", w[0])));
        }
        if let Some(w) = omega.windows(2).find(|w| w[1] < w[0]) {
            return Err(Error::Validation(format!(
                "frequencies not increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        if let Some((w, v)) = omega.iter().zip(&g).find(|(_, v)| !v.is_finite()) {
            return Err(Error::Validation(format!("non-finite sample {v} at {w} eV")));
        }
        for (&w, v) in omega.iter().zip(&g) {
            let floor = match (includes_vacuum, dipole_debye) {
                (false, Some(d)) => -vacuum_im_g(w, d),
                (true, _) => 0.0,
                // Scattering-only data with unknown dipole: nothing to check.
                (false, None) => f64::NEG_INFINITY,
            };
            if v.im < floor - PASSIVITY_SLACK {
                return Err(Error::Validation(format!(
                    "active sample at {w} eV: Im g = {:e} below {floor:e}",
                    v.im
                )));
            }
        }
        let re = Pchip::new(omega.clone(), g.iter().map(|v| v.re).collect())?;
        let im = Pchip::new(omega.clone(), g.iter().map(|v| v.im).collect())?;
        Ok(Self {
            omega,
            g,
            includes_vacuum,
            dipole_debye,
            origin,
            comments: Vec::new(),
            re,
            im,
        })
    }

    /// Samples `source` on `grid` in parallel.
    pub fn from_source<S: CouplingSource + ?Sized>(source: &S, grid: &[f64]) -> Result<Self> {
        let g: Vec<Complex64> = grid
            .par_iter()
            .map(|&w| source.coupling(w))
            .collect::<Result<_>>()?;
        Self::new(
            grid.to_vec(),
            g,
            source.includes_vacuum(),
            None,
            SpectrumOrigin::Analytic(source.describe()),
        )
    }

    pub fn with_dipole(mut self, dipole_debye: f64) -> Result<Self> {
        let checked = Self::new(
            std::mem::take(&mut self.omega),
            std::mem::take(&mut self.g),
            self.includes_vacuum,
            Some(dipole_debye),
            self.origin.clone(),
        )?;
        Ok(Self {
            comments: self.comments,
            ..checked
        })
    }

    pub fn with_comments(mut self, comments: Vec<String>) -> Self {
        self.comments = comments;
        self
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }
    pub fn values(&self) -> &[Complex64] {
        &self.g
    }
    pub fn len(&self) -> usize {
        self.omega.len()
    }
    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }
    pub fn origin(&self) -> &SpectrumOrigin {
        &self.origin
    }
    pub fn comments(&self) -> &[String] {
        &self.comments
    }
    pub fn dipole_debye(&self) -> Option<f64> {
        self.dipole_debye
    }
    pub fn domain(&self) -> (f64, f64) {
        (self.omega[0], self.omega[self.omega.len() - 1])
    }

    /// Interpolated coupling inside the sampled range.
    pub fn interpolate(&self, omega: f64) -> Result<Complex64> {
        match (self.re.eval(omega), self.im.eval(omega)) {
            (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
            _ => {
                let (min, max) = self.domain();
                Err(Error::OutOfRange {
                    what: "spectrum frequency",
                    value: omega,
                    min,
                    max,
                })
            }
        }
    }
}

impl CouplingSource for CouplingSpectrum {
    /// Inside the grid: shape-preserving interpolation. Between zero and the
    /// first sample, `Im g` falls linearly to zero (a passive response
    /// vanishes at zero frequency) and `Re g` follows the first segment's
    /// line. Above the last sample there are no data.
    fn coupling(&self, omega: f64) -> Result<Complex64> {
        let (lo, _) = self.domain();
        if omega > 0.0 && omega < lo {
            let (w0, w1) = (self.omega[0], self.omega[1]);
            let (g0, g1) = (self.g[0], self.g[1]);
            let re = g0.re + (g1.re - g0.re) * (omega - w0) / (w1 - w0);
            return Ok(Complex64::new(re, g0.im * omega / w0));
        }
        self.interpolate(omega)
    }

    fn max_frequency(&self) -> Option<f64> {
        Some(self.domain().1)
    }

    /// The knots themselves: the interpolant is only piecewise smooth.
    /// First knot (where the low-frequency extrapolation joins) and the
    /// local maxima of `Im g`.
    fn feature_hints(&self) -> Vec<f64> {
        let mut hints = vec![self.omega[0]];
        hints.extend(
            self.g
                .windows(3)
                .zip(&self.omega[1..])
                .filter(|(g, _)| g[1].im > g[0].im && g[1].im >= g[2].im)
                .map(|(_, &w)| w),
        );
        hints
    }

    fn includes_vacuum(&self) -> bool {
        self.includes_vacuum
    }

    fn describe(&self) -> String {
        format!(
            "{} samples on [{}, {}] eV from {}",
            self.len(),
            self.domain().0,
            self.domain().1,
            self.origin.describe()
        )
    }
}

/// Parses the wire format. Rows out of order are sorted with a warning.
pub fn parse_spectrum(text: &str, origin: SpectrumOrigin) -> Result<CouplingSpectrum> {
    let mut rows: Vec<(f64, Complex64)> = Vec::new();
    let mut comments = Vec::new();
    let mut includes_vacuum = false;
    let mut dipole = None;
    let mut seen_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            match comment.split_once('=').map(|(k, v)| (k.trim(), v.trim())) {
                Some(("includes_vacuum", v)) => {
                    includes_vacuum = v.parse().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("includes_vacuum must be true or false, got {v:?}"),
                    })?;
                }
                Some(("dipole_debye", v)) => {
                    dipole = Some(v.parse().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("dipole_debye is not a number: {v:?}"),
                    })?);
                }
                _ => comments.push(comment.to_string()),
            }
            continue;
        }
        if !seen_header {
            if line.replace(' ', "") != SPECTRUM_HEADER {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected header {SPECTRUM_HEADER}, got {line:?}"),
                });
            }
            seen_header = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 3 columns, found {}", cols.len()),
            });
        }
        let mut v = [0.0; 3];
        for (slot, c) in v.iter_mut().zip(&cols) {
            *slot = c
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: format!("not a finite number: {c:?}"),
                })?;
        }
        if v[0] <= 0.0 {
            return Err(Error::Validation(format!(
                "line {line_no}: frequency must be positive, got {}",
                v[0]
            )));
        }
        rows.push((v[0], Complex64::new(v[1], v[2])));
    }
    if !seen_header {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            message: format!("missing header {SPECTRUM_HEADER}"),
        });
    }
    if rows.windows(2).any(|w| w[1].0 < w[0].0) {
        log::warn!("spectrum rows from {} were not sorted; sorting", origin.describe());
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let (omega, g) = rows.into_iter().unzip();
    Ok(CouplingSpectrum::new(omega, g, includes_vacuum, dipole, origin)?.with_comments(comments))
}

pub fn ingest_spectrum(path: impl AsRef<Path>) -> Result<CouplingSpectrum> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_spectrum(&text, SpectrumOrigin::File(path.to_path_buf()))
}

/// Renders the wire format. Values carry 17 significant digits, enough for
/// an exact round trip.
pub fn spectrum_to_csv(spec: &CouplingSpectrum) -> String {
    let mut out = String::new();
    let origin = match &spec.origin {
        SpectrumOrigin::Analytic(s) => s.clone(),
        SpectrumOrigin::File(p) => p.display().to_string(),
    };
    // Comments read back from a file already carry their own source line.
    if !spec.comments.iter().any(|c| c.starts_with("source:")) {
        let _ = writeln!(out, "# source: {origin}");
    }
    for c in &spec.comments {
        let _ = writeln!(out, "# {c}");
    }
    let _ = writeln!(out, "# includes_vacuum = {}", spec.includes_vacuum);
    if let Some(d) = spec.dipole_debye {
        let _ = writeln!(out, "# dipole_debye = {d}");
    }
    let _ = writeln!(out, "{SPECTRUM_HEADER}");
    for (w, g) in spec.omega.iter().zip(&spec.g) {
        let _ = writeln!(out, "{w:.16e},{:.16e},{:.16e}", g.re, g.im);
    }
    out
}

pub fn emit_spectrum(spec: &CouplingSpectrum, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, spectrum_to_csv(spec)).map_err(|e| Error::io(path, e))
}

/// Interpolates `spec` onto `grid`, which must lie inside the sampled range.
pub fn resample(spec: &CouplingSpectrum, grid: &[f64]) -> Result<CouplingSpectrum> {
    let g = grid
        .iter()
        .map(|&w| spec.interpolate(w))
        .collect::<Result<Vec<_>>>()?;
    CouplingSpectrum::new(
        grid.to_vec(),
        g,
        spec.includes_vacuum,
        spec.dipole_debye,
        spec.origin.clone(),
    )
    .map(|s| s.with_comments(spec.comments.clone()))
}

/// Least-squares line through `Re g` over a low-frequency window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroFreqExtrapolation {
    pub window: (f64, f64),
    /// `Re g(0)`, eV.
    pub intercept: f64,
    pub slope: f64,
    /// Euclidean norm of the fit residuals, eV.
    pub residual_norm: f64,
    pub samples: usize,
}

pub fn extrapolate_zero(
    spec: &CouplingSpectrum,
    window: (f64, f64),
) -> Result<ZeroFreqExtrapolation> {
    let (lo, hi) = window;
    if !(lo < hi) || lo < spec.domain().0 {
        return Err(Error::InvalidParameter(format!(
            "fit window [{lo}, {hi}] must be increasing and start at or above {} eV",
            spec.domain().0
        )));
    }
    let pts: Vec<(f64, f64)> = spec
        .omega
        .iter()
        .zip(&spec.g)
        .filter(|(w, _)| **w >= lo && **w <= hi)
        .map(|(w, g)| (*w, g.re))
        .collect();
    if pts.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            found: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual_norm = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(ZeroFreqExtrapolation {
        window,
        intercept,
        slope,
        residual_norm,
        samples: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{LorentzianOscillators, Oscillator};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn line_spectrum(a: f64, b: f64, grid: &[f64]) -> CouplingSpectrum {
        CouplingSpectrum::new(
            grid.to_vec(),
            grid.iter().map(|&w| c(a + b * w, 0.01 * w)).collect(),
            true,
            None,
            SpectrumOrigin::Analytic("line".into()),
        )
        .unwrap()
    }

    #[test]
    fn parses_three_rows() {
        let text = "# test\nomega_ev,g_re_ev,g_im_ev\n1,0.1,0.01\n2,0.2,0.02\n3,0.3,0.03\n";
        let s = parse_spectrum(text, SpectrumOrigin::Analytic("t".into())).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.values()[1], c(0.2, 0.02));
        assert_eq!(s.comments(), ["test"]);
    }

    #[test]
    fn duplicate_frequency_is_named() {
        let text = "omega_ev,g_re_ev,g_im_ev\n1,0,0\n2.5,0,0\n2.5,0,0\n";
        match parse_spectrum(text, SpectrumOrigin::Analytic("t".into())) {
            Err(Error::Validation(m)) => assert!(m.contains("2.5"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_rows_carry_line_numbers() {
        let bad_cols = "# c\nomega_ev,g_re_ev,g_im_ev\n1,0,0\n2,0\n";
        assert!(matches!(
            parse_spectrum(bad_cols, SpectrumOrigin::Analytic("t".into())),
            Err(Error::Parse { line: 4, .. })
        ));
        let nan = "omega_ev,g_re_ev,g_im_ev\n1,NaN,0\n";
        assert!(matches!(
            parse_spectrum(nan, SpectrumOrigin::Analytic("t".into())),
            Err(Error::Parse { line: 2, .. })
        ));
        let neg = "omega_ev,g_re_ev,g_im_ev\n-1,0,0\n2,0,0\n";
        assert!(matches!(
            parse_spectrum(neg, SpectrumOrigin::Analytic("t".into())),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn unsorted_rows_are_sorted() {
        let text = "omega_ev,g_re_ev,g_im_ev\n2,0.2,0\n1,0.1,0\n3,0.3,0\n";
        let s = parse_spectrum(text, SpectrumOrigin::Analytic("t".into())).unwrap();
        assert_eq!(s.omega(), [1.0, 2.0, 3.0]);
    }

    #[test]
    fn active_samples_rejected_when_vacuum_included() {
        let r = CouplingSpectrum::new(
            vec![1.0, 2.0],
            vec![c(0.0, 0.0), c(0.0, -1e-6)],
            true,
            None,
            SpectrumOrigin::Analytic("t".into()),
        );
        assert!(matches!(r, Err(Error::Validation(_))));
    }

    #[test]
    fn metadata_and_values_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let osc = LorentzianOscillators::new(vec![Oscillator {
            strength: 0.02,
            center: 2.0,
            width: 0.1,
        }])
        .unwrap();
        let grid: Vec<f64> = (1..200).map(|i| 0.0137 * i as f64).collect();
        let s = CouplingSpectrum::from_source(&osc, &grid)
            .unwrap()
            .with_dipole(72.0)
            .unwrap();
        emit_spectrum(&s, &path).unwrap();
        let back = ingest_spectrum(&path).unwrap();
        assert_eq!(back.omega(), s.omega());
        assert_eq!(back.values(), s.values());
        assert_eq!(back.dipole_debye(), Some(72.0));
        let first = std::fs::read_to_string(&path).unwrap();
        emit_spectrum(&back, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), first);
    }

    #[test]
    fn zero_fit_recovers_line() {
        let grid: Vec<f64> = (0..=30).map(|i| 0.1 + 0.005 * i as f64).collect();
        let s = line_spectrum(178.685, 2.44152, &grid);
        let fit = extrapolate_zero(&s, DEFAULT_ZERO_FIT_WINDOW).unwrap();
        assert!((fit.intercept - 178.685).abs() < 1e-10);
        assert!((fit.slope - 2.44152).abs() < 1e-9);
        assert!(fit.residual_norm < 1e-10);
    }

    #[test]
    fn zero_fit_of_constant() {
        let grid: Vec<f64> = (0..=10).map(|i| 0.12 + 0.01 * i as f64).collect();
        let s = line_spectrum(3.5, 0.0, &grid);
        let fit = extrapolate_zero(&s, (0.12, 0.22)).unwrap();
        assert!((fit.intercept - 3.5).abs() < 1e-13);
        assert!(fit.slope.abs() < 1e-11);
    }

    #[test]
    fn zero_fit_noisy_line_within_confidence() {
        // Deterministic pseudo-noise; the standard error of the intercept
        // follows from the design matrix.
        let n = 40;
        let grid: Vec<f64> = (0..n).map(|i| 0.125 + 0.075 * i as f64 / (n - 1) as f64).collect();
        let sigma = 0.01;
        let mut state = 12345u64;
        let mut noise = || {
            let mut s = 0.0;
            for _ in 0..12 {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                s += (state >> 11) as f64 / (1u64 << 53) as f64;
            }
            (s - 6.0) * sigma
        };
        let g: Vec<Complex64> = grid.iter().map(|&w| c(1.0 + 2.0 * w + noise(), 0.0)).collect();
        let s = CouplingSpectrum::new(grid.clone(), g, false, None, SpectrumOrigin::Analytic("n".into())).unwrap();
        let fit = extrapolate_zero(&s, DEFAULT_ZERO_FIT_WINDOW).unwrap();
        let mx = grid.iter().sum::<f64>() / n as f64;
        let sxx: f64 = grid.iter().map(|w| (w - mx).powi(2)).sum();
        let se = sigma * (1.0 / n as f64 + mx * mx / sxx).sqrt();
        assert!((fit.intercept - 1.0).abs() < 3.0 * se, "{} vs se {se}", fit.intercept);
    }

    #[test]
    fn zero_fit_needs_three_samples() {
        let s = line_spectrum(1.0, 1.0, &[0.12, 0.13, 0.15, 0.5]);
        assert!(matches!(
            extrapolate_zero(&s, DEFAULT_ZERO_FIT_WINDOW),
            Err(Error::TooFewSamples { needed: 3, found: 2 })
        ));
    }

    #[test]
    fn resample_at_knots_is_exact_and_refuses_outside() {
        let grid: Vec<f64> = (1..50).map(|i| 0.2 * i as f64).collect();
        let osc = LorentzianOscillators::new(vec![Oscillator {
            strength: 0.1,
            center: 4.0,
            width: 0.3,
        }])
        .unwrap();
        let s = CouplingSpectrum::from_source(&osc, &grid).unwrap();
        let r = resample(&s, &grid[3..10]).unwrap();
        assert_eq!(r.values(), &s.values()[3..10]);
        assert!(resample(&s, &[0.1]).is_err());
        assert!(resample(&s, &[10.0]).is_err());
    }

    #[test]
    fn below_first_sample_im_vanishes_linearly() {
        let s = line_spectrum(1.0, 2.0, &[0.5, 1.0, 1.5]);
        let g = s.coupling(0.25).unwrap();
        assert!((g.im - 0.0025).abs() < 1e-15);
        assert!((g.re - 1.5).abs() < 1e-15);
        assert!(s.coupling(1.6).is_err());
    }

    proptest! {
        #[test]
        fn exact_line_points_leave_fit_unchanged(extra in prop::collection::vec(0.126f64..0.199, 1..10)) {
            let mut grid: Vec<f64> = (0..=8).map(|i| 0.125 + 0.075 * i as f64 / 8.0).collect();
            let base = extrapolate_zero(&line_spectrum(5.0, -1.0, &grid), DEFAULT_ZERO_FIT_WINDOW).unwrap();
            grid.extend(extra);
            grid.sort_by(f64::total_cmp);
            grid.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            let more = extrapolate_zero(&line_spectrum(5.0, -1.0, &grid), DEFAULT_ZERO_FIT_WINDOW).unwrap();
            prop_assert!((base.intercept - more.intercept).abs() < 1e-12);
            prop_assert!((base.slope - more.slope).abs() < 1e-10);
        }
    }
}
