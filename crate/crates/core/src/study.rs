//! Exact Dirichlet eigenvalues of rectangles and mesh-refinement studies.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::assembly::assemble;
use crate::error::{Error, Result};
use crate::math::ln;
use crate::mesh::{CellPattern, Mesh, Rect};
use crate::opfun::OperatorFunction;
use crate::sim::{search, RegionBox, SimOptions};

/// `π² (m²/w² + n²/ℓ²)` for a `w x ℓ` rectangle.
pub fn exact_eigenvalue(rect: &Rect, m: u32, n: u32) -> f64 {
    let (m, n) = (m as f64, n as f64);
    PI * PI * (m * m / (rect.width() * rect.width()) + n * n / (rect.height() * rect.height()))
}

/// Distance from `exact_eigenvalue(rect, m, n)` to the nearest different
/// exact eigenvalue.
pub fn spectral_gap(rect: &Rect, m: u32, n: u32) -> f64 {
    let target = exact_eigenvalue(rect, m, n);
    // Any eigenvalue closer than the (1,·)/(·,1) neighbours has indices below
    // this bound.
    let bound = m.max(n) + 2;
    let mut gap = f64::INFINITY;
    for p in 1..=2 * bound {
        for q in 1..=2 * bound {
            let d = (exact_eigenvalue(rect, p, q) - target).abs();
            if d > 1e-12 * target {
                gap = gap.min(d);
            }
        }
    }
    gap
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRecord {
    pub n: usize,
    pub h: f64,
    pub lambda_h: f64,
    pub error: f64,
    /// `ln(e_prev / e) / ln(h_prev / h)`; absent on the first row.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOptions {
    pub sim: SimOptions,
    /// Search window width as a fraction of the spectral gap around the target.
    pub window_fraction: f64,
    pub pattern: CellPattern,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions { sim: SimOptions::default(), window_fraction: 0.4, pattern: CellPattern::Diagonal }
    }
}

/// Square search window centred on the exact target eigenvalue.
pub fn target_window(rect: &Rect, target: (u32, u32), window_fraction: f64) -> Result<RegionBox> {
    let exact = exact_eigenvalue(rect, target.0, target.1);
    let half = 0.5 * window_fraction * spectral_gap(rect, target.0, target.1);
    if !(half > 0.0) || !half.is_finite() || half >= exact {
        return Err(Error::invalid("window fraction must be positive and keep the window off z = 0"));
    }
    RegionBox::from_bounds(exact - half, exact + half, -half, half)
}

/// Solves for the target eigenvalue on each mesh of `n_list` and records the
/// error against the exact value.
pub fn convergence_study(
    rect: &Rect,
    n_list: &[usize],
    target: (u32, u32),
    opts: &StudyOptions,
) -> Result<Vec<ConvergenceRecord>> {
    if target.0 == 0 || target.1 == 0 {
        return Err(Error::invalid("target mode indices start at 1"));
    }
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("mesh counts must be strictly increasing"));
    }
    let exact = exact_eigenvalue(rect, target.0, target.1);
    let window = target_window(rect, target, opts.window_fraction)?;
    let mut records: Vec<ConvergenceRecord> = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let mesh = Mesh::uniform_with_pattern(n, *rect, opts.pattern)?;
        let op = OperatorFunction::new(assemble(&mesh)?)?;
        let found = search(&op, &window, &opts.sim)?;
        if found.estimates.len() != 1 {
            return Err(Error::AmbiguousTarget { n, found: found.estimates.len() });
        }
        let lambda_h = found.estimates[0].value.re;
        let error = (lambda_h - exact).abs();
        let order = records.last().map(|prev| ln(prev.error / error) / ln(prev.h / mesh.h()));
        records.push(ConvergenceRecord { n, h: mesh.h(), lambda_h, error, order });
    }
    Ok(records)
}

/// Least-squares slope of `ln(error)` against `ln(h)`.
pub fn fitted_rate(records: &[ConvergenceRecord]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = records.iter().filter(|r| r.error > 0.0).map(|r| (ln(r.h), ln(r.error))).collect();
    least_squares_slope(&pts)
}

pub fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
