//! Composite Gauss–Kronrod quadrature on adaptively refined panels.
//!
//! The rules here keep the integrand samples, so one refinement pass can feed
//! many weighted integrals (every target frequency of a shift table reuses the
//! same coupling samples).

use rayon::prelude::*;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Nodes per panel.
pub const PANEL_NODES: usize = 15;

/// Abscissae of the 15-point Kronrod rule mapped onto `[a, b]`, in increasing
/// order.
pub fn kronrod_nodes(a: f64, b: f64) -> [f64; PANEL_NODES] {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut x = [0.0; PANEL_NODES];
    for i in 0..7 {
        x[i] = c - h * XGK[i];
        x[14 - i] = c + h * XGK[i];
    }
    x[7] = c;
    x
}

/// Kronrod weights matching [`kronrod_nodes`].
pub fn kronrod_weights(a: f64, b: f64) -> [f64; PANEL_NODES] {
    let h = 0.5 * (b - a);
    let mut w = [0.0; PANEL_NODES];
    for i in 0..7 {
        w[i] = h * WGK[i];
        w[14 - i] = h * WGK[i];
    }
    w[7] = h * WGK[7];
    w
}

/// Kronrod estimate and `|K15 − G7|` for samples taken at [`kronrod_nodes`].
pub fn kronrod_estimate(a: f64, b: f64, f: &[f64; PANEL_NODES]) -> (f64, f64) {
    let h = 0.5 * (b - a);
    let mut k = WGK[7] * f[7];
    let mut g = WG[3] * f[7];
    for i in 0..7 {
        let pair = f[i] + f[14 - i];
        k += WGK[i] * pair;
        if i % 2 == 1 {
            g += WG[i / 2] * pair;
        }
    }
    (h * k, h * (k - g).abs())
}

/// Integrates `f` over `[a, b]` with a single 15-point panel.
pub fn gk15<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> (f64, f64) {
    let x = kronrod_nodes(a, b);
    let mut v = [0.0; PANEL_NODES];
    for (vi, xi) in v.iter_mut().zip(x) {
        *vi = f(xi);
    }
    kronrod_estimate(a, b, &v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of integrand evaluations.
    pub max_evals: usize,
    /// Panels narrower than this are never split.
    pub min_width: f64,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_evals: 200_000,
            min_width: 1e-9,
        }
    }
}

/// One panel with the integrand samples at its Kronrod nodes.
#[derive(Debug, Clone)]
pub struct Panel<T> {
    pub a: f64,
    pub b: f64,
    pub samples: Vec<T>,
    pub estimate: f64,
    pub error: f64,
}

impl<T> Panel<T> {
    pub fn nodes(&self) -> [f64; PANEL_NODES] {
        kronrod_nodes(self.a, self.b)
    }
    pub fn weights(&self) -> [f64; PANEL_NODES] {
        kronrod_weights(self.a, self.b)
    }
}

/// Result of adaptive refinement: the panels, the integral of the projected
/// scalar and its error estimate.
#[derive(Debug, Clone)]
pub struct AdaptiveRule<T> {
    pub panels: Vec<Panel<T>>,
    pub estimate: f64,
    pub error: f64,
    pub evals: usize,
    pub converged: bool,
}

impl<T> AdaptiveRule<T> {
    /// `(node, weight, sample)` triples in increasing node order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, &T)> + '_ {
        self.panels.iter().flat_map(|p| {
            let (x, w) = (p.nodes(), p.weights());
            p.samples
                .iter()
                .enumerate()
                .map(move |(i, s)| (x[i], w[i], s))
        })
    }

    pub fn node_count(&self) -> usize {
        self.panels.len() * PANEL_NODES
    }

    /// Largest gap between neighbouring nodes.
    pub fn max_node_gap(&self) -> f64 {
        let mut prev: Option<f64> = None;
        let mut gap: f64 = 0.0;
        for p in &self.panels {
            for x in p.nodes() {
                if let Some(q) = prev {
                    gap = gap.max(x - q);
                }
                prev = Some(x);
            }
        }
        gap
    }

    pub fn domain(&self) -> Option<(f64, f64)> {
        Some((self.panels.first()?.a, self.panels.last()?.b))
    }
}

fn eval_panel<T, F, P>(f: &F, project: &P, a: f64, b: f64) -> Result<Panel<T>>
where
    F: Fn(f64) -> Result<T> + Sync,
    P: Fn(f64, &T) -> f64 + Sync,
{
    let x = kronrod_nodes(a, b);
    let mut samples = Vec::with_capacity(PANEL_NODES);
    let mut v = [0.0; PANEL_NODES];
    for (i, &xi) in x.iter().enumerate() {
        let s = f(xi)?;
        v[i] = project(xi, &s);
        samples.push(s);
    }
    if v.iter().any(|y| !y.is_finite()) {
        return Err(Error::NonFinite(format!("integrand on [{a}, {b}]")));
    }
    let (estimate, error) = kronrod_estimate(a, b, &v);
    Ok(Panel {
        a,
        b,
        samples,
        estimate,
        error,
    })
}

/// Adaptively refines the panels spanned by `breakpoints` until the Kronrod
/// error of `∫ project(x, f(x)) dx` meets the tolerance.
///
/// A panel is split when its error exceeds its share of the tolerance in
/// proportion to its width. Each sweep evaluates new panels in parallel.
/// Running out of evaluations is not an error; the rule comes back with
/// `converged = false`.
pub fn adaptive<T, F, P>(
    f: F,
    project: P,
    breakpoints: &[f64],
    opts: &AdaptiveOptions,
) -> Result<AdaptiveRule<T>>
where
    T: Send + Sync,
    F: Fn(f64) -> Result<T> + Sync,
    P: Fn(f64, &T) -> f64 + Sync,
{
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|x| x.is_finite()).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1.0));
    if cuts.len() < 2 {
        return Err(Error::InvalidParameter(
            "adaptive quadrature needs an interval with two distinct ends".into(),
        ));
    }
    let (lo, hi) = (cuts[0], cuts[cuts.len() - 1]);
    let span = hi - lo;

    let mut panels: Vec<Panel<T>> = cuts
        .windows(2)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|w| eval_panel(&f, &project, w[0], w[1]))
        .collect::<Result<_>>()?;
    let mut evals = panels.len() * PANEL_NODES;

    loop {
        let estimate: f64 = panels.iter().map(|p| p.estimate).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let tol = opts.abs_tol.max(opts.rel_tol * estimate.abs());
        if error <= tol {
            return Ok(AdaptiveRule {
                panels,
                estimate,
                error,
                evals,
                converged: true,
            });
        }
        let split: Vec<usize> = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                p.error > tol * (p.b - p.a) / span && (p.b - p.a) > 2.0 * opts.min_width
            })
            .map(|(i, _)| i)
            .collect();
        if split.is_empty() || evals + 2 * split.len() * PANEL_NODES > opts.max_evals {
            log::debug!(
                "adaptive quadrature stopped on [{lo}, {hi}]: error {error:.3e} > {tol:.3e} after {evals} evaluations"
            );
            return Ok(AdaptiveRule {
                panels,
                estimate,
                error,
                evals,
                converged: false,
            });
        }
        let halves: Vec<(Panel<T>, Panel<T>)> = split
            .par_iter()
            .map(|&i| {
                let p = &panels[i];
                let m = 0.5 * (p.a + p.b);
                Ok((
                    eval_panel(&f, &project, p.a, m)?,
                    eval_panel(&f, &project, m, p.b)?,
                ))
            })
            .collect::<Result<_>>()?;
        evals += 2 * split.len() * PANEL_NODES;
        let mut next = Vec::with_capacity(panels.len() + split.len());
        let mut halves = halves.into_iter();
        let mut split_iter = split.iter().peekable();
        for (i, p) in panels.into_iter().enumerate() {
            if split_iter.peek() == Some(&&i) {
                split_iter.next();
                let (l, r) = halves.next().expect("one pair per split panel");
                next.push(l);
                next.push(r);
            } else {
                next.push(p);
            }
        }
        panels = next;
    }
}

/// Re-evaluates `rule` after splitting every panel wider than `max_width`
/// into equal pieces; panels already narrow enough keep their samples.
pub fn refine_to_width<T, F>(rule: AdaptiveRule<T>, f: F, max_width: f64) -> Result<AdaptiveRule<T>>
where
    T: Send,
    F: Fn(f64) -> Result<T> + Sync,
{
    if !(max_width > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "panel width cap must be positive, got {max_width}"
        )));
    }
    let AdaptiveRule {
        panels,
        estimate,
        error,
        mut evals,
        converged,
    } = rule;
    let mut out = Vec::with_capacity(panels.len());
    let mut pending = Vec::new();
    for p in panels {
        let width = p.b - p.a;
        if width <= max_width {
            out.push(Some(p));
        } else {
            let pieces = (width / max_width).ceil() as usize;
            for k in 0..pieces {
                let a = p.a + width * k as f64 / pieces as f64;
                let b = if k + 1 == pieces {
                    p.b
                } else {
                    p.a + width * (k + 1) as f64 / pieces as f64
                };
                pending.push((out.len(), a, b));
                out.push(None);
            }
        }
    }
    let fresh: Vec<(usize, Panel<T>)> = pending
        .par_iter()
        .map(|&(slot, a, b)| {
            let x = kronrod_nodes(a, b);
            let samples = x.iter().map(|&xi| f(xi)).collect::<Result<Vec<T>>>()?;
            Ok((
                slot,
                Panel {
                    a,
                    b,
                    samples,
                    estimate: f64::NAN,
                    error: 0.0,
                },
            ))
        })
        .collect::<Result<_>>()?;
    evals += fresh.len() * PANEL_NODES;
    for (slot, p) in fresh {
        out[slot] = Some(p);
    }
    Ok(AdaptiveRule {
        panels: out.into_iter().map(|p| p.expect("every slot filled")).collect(),
        estimate,
        error,
        evals,
        converged,
    })
}

/// Indices of local maxima that exceed ten times the median of `ys`.
pub fn find_peaks(ys: &[f64]) -> Vec<usize> {
    if ys.len() < 3 {
        return Vec::new();
    }
    let mut sorted: Vec<f64> = ys.iter().map(|y| y.abs()).collect();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    (1..ys.len() - 1)
        .filter(|&i| ys[i] > ys[i - 1] && ys[i] >= ys[i + 1] && ys[i] > 10.0 * median)
        .collect()
}

/// `n` points spaced uniformly in `[a, b]`, ends included.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| {
                if i + 1 == n {
                    b
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// `n` points spaced geometrically in `[a, b]`, `0 < a < b`.
pub fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    linspace(la, lb, n)
        .into_iter()
        .enumerate()
        .map(|(i, l)| if i == 0 { a } else if i + 1 == n { b } else { l.exp() })
        .collect()
}
