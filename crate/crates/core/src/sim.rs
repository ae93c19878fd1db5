//! Spectral indicator search for the eigenvalues of `F_h` inside a rectangle
//! of the complex plane.
//!
//! For a box with center `c`, its circumscribed circle `|z - c| = r` is
//! sampled at `q` equispaced nodes and the indicator
//!
//! ```text
//! I = ‖ (1/q) Σ_j (z_j - c) F_h(z_j)⁻¹ f ‖ / ‖f‖
//! ```
//!
//! is the trapezoidal rule for `‖(2πi)⁻¹ ∮ F_h(z)⁻¹ f dz‖ / ‖f‖`. It is near
//! zero when no eigenvalue lies inside the circle and of the order of the
//! residue otherwise. Boxes above the threshold are split into four until they
//! are smaller than the size tolerance; their centers are then polished by
//! Rayleigh quotient iteration on the pencil `(A, M)`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linsolve::Factorization;
use crate::math::{cos, hypot, sin};
use crate::opfun::OperatorFunction;
use crate::rng::random_vector;

pub const DEFAULT_QUAD_POINTS: usize = 32;
pub const DEFAULT_THRESHOLD: f64 = 1e-3;
pub const DEFAULT_MAX_DEPTH: u32 = 40;
pub const DEFAULT_MARGIN: f64 = 0.1;
pub const DEFAULT_SEED: u64 = 20240601;
/// Relative size tolerance: boxes stop splitting below this times the region
/// diameter.
pub const DEFAULT_REL_TOL: f64 = 1e-6;
pub const RADIUS_NUDGE: f64 = 1.07;
pub const MAX_NUDGES: usize = 5;

const POLISH_MAX_ITERS: usize = 50;
const POLISH_REL_TOL: f64 = 1e-12;
const POLISH_SEED: u64 = 0x5e_ed0f_7a11;

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub quad_points: usize,
    pub threshold: f64,
    /// Absolute box size tolerance; `None` means `1e-6 x` region diameter.
    pub tol: Option<f64>,
    pub max_depth: u32,
    pub margin: f64,
    pub seed: u64,
    pub polish: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            quad_points: DEFAULT_QUAD_POINTS,
            threshold: DEFAULT_THRESHOLD,
            tol: None,
            max_depth: DEFAULT_MAX_DEPTH,
            margin: DEFAULT_MARGIN,
            seed: DEFAULT_SEED,
            polish: true,
        }
    }
}

impl SimOptions {
    fn validate(&self) -> Result<()> {
        if self.quad_points < 8 || !self.quad_points.is_multiple_of(2) {
            return Err(Error::invalid("quadrature points must be even and at least 8"));
        }
        if !(self.threshold > 0.0) || !self.threshold.is_finite() {
            return Err(Error::invalid("threshold must be positive"));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::invalid("size tolerance must be positive"));
            }
        }
        if !(self.margin >= 0.0) || !self.margin.is_finite() {
            return Err(Error::invalid("margin must be non-negative"));
        }
        Ok(())
    }
}

/// Axis-aligned box in the complex plane.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionBox {
    pub center: Complex64,
    pub half_width: f64,
    pub half_height: f64,
    pub level: u32,
    pub indicator: Option<f64>,
}

impl RegionBox {
    pub fn new(center: Complex64, half_width: f64, half_height: f64) -> Self {
        RegionBox { center, half_width, half_height, level: 0, indicator: None }
    }

    /// The box `[re_min, re_max] x [im_min, im_max]`.
    pub fn from_bounds(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let finite = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite());
        if !finite || !(re_max > re_min) || !(im_max > im_min) {
            return Err(Error::invalid("region must be a non-degenerate finite rectangle"));
        }
        Ok(RegionBox::new(
            Complex64::new(0.5 * (re_min + re_max), 0.5 * (im_min + im_max)),
            0.5 * (re_max - re_min),
            0.5 * (im_max - im_min),
        ))
    }

    pub fn diameter(&self) -> f64 {
        2.0 * hypot(self.half_width, self.half_height)
    }

    /// Radius of the circumscribed circle enlarged by `margin`.
    pub fn radius(&self, margin: f64) -> f64 {
        hypot(self.half_width, self.half_height) * (1.0 + margin)
    }

    pub fn contour_radius(&self) -> f64 {
        self.radius(DEFAULT_MARGIN)
    }

    pub fn size(&self) -> f64 {
        self.half_width.max(self.half_height)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z.re - self.center.re).abs() <= self.half_width && (z.im - self.center.im).abs() <= self.half_height
    }

    /// Whether the contour with the given margin keeps `z = 0` strictly outside.
    pub fn excludes_origin(&self, margin: f64) -> bool {
        self.center.norm() > self.radius(margin)
    }

    /// Splits the box into four.
    ///
    /// Boxes more than twice as long as they are tall (or the reverse) are cut
    /// into four strips across their long side; others into quadrants. This
    /// keeps descendants close to square, so contours do not sweep across
    /// many neighbouring boxes.
    pub fn children(&self) -> [RegionBox; 4] {
        let child = |dx: f64, dy: f64, hw: f64, hh: f64| RegionBox {
            center: Complex64::new(self.center.re + dx, self.center.im + dy),
            half_width: hw,
            half_height: hh,
            level: self.level + 1,
            indicator: None,
        };
        let (w, h) = (self.half_width, self.half_height);
        if w > 2.0 * h {
            let q = 0.25 * w;
            [-3.0, -1.0, 1.0, 3.0].map(|k| child(k * q, 0.0, q, h))
        } else if h > 2.0 * w {
            let q = 0.25 * h;
            [-3.0, -1.0, 1.0, 3.0].map(|k| child(0.0, k * q, w, q))
        } else {
            let (hw, hh) = (0.5 * w, 0.5 * h);
            [child(-hw, -hh, hw, hh), child(hw, -hh, hw, hh), child(-hw, hh, hw, hh), child(hw, hh, hw, hh)]
        }
    }

    /// Identifies a box and its mirror image in the real axis.
    fn mirror_key(&self) -> (u64, u64, u64, u64) {
        (
            self.center.re.to_bits(),
            (self.center.im.abs() + 0.0).to_bits(),
            self.half_width.to_bits(),
            self.half_height.to_bits(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenvalueEstimate {
    pub value: Complex64,
    pub enclosure_radius: f64,
    /// `(level, indicator)` along the chain of boxes that isolated the value.
    pub indicator_trace: Vec<(u32, f64)>,
    pub polish_residual: f64,
    pub polished: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchWarning {
    /// A box still above threshold when the depth limit was reached; usually a
    /// multiple eigenvalue with a too small threshold, or a tight cluster.
    UnresolvedCluster { center: Complex64, half_size: f64, indicator: f64 },
    /// Rayleigh quotient iteration did not settle; the estimate is the box
    /// center.
    PolishFailed { center: Complex64, residual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub estimates: Vec<EigenvalueEstimate>,
    pub warnings: Vec<SearchWarning>,
    /// Indicator evaluations actually performed (mirror images excluded).
    pub boxes_evaluated: usize,
}

/// Result of [`polish`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polished {
    pub value: f64,
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn check_contour(opfun: &OperatorFunction, center: Complex64, radius: f64, f: &[Complex64], q: usize) -> Result<f64> {
    if q < 8 || !q.is_multiple_of(2) {
        return Err(Error::invalid("quadrature points must be even and at least 8"));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::invalid("contour radius must be positive"));
    }
    if !(center.norm() > radius) {
        return Err(Error::invalid("contour must not enclose z = 0"));
    }
    let nf = opfun.norm_m(f);
    if !(nf > 0.0) {
        return Err(Error::invalid("probe vector must be nonzero"));
    }
    Ok(nf)
}

/// Indicator of the circle `|z - center| = radius` for probe vector `f`.
pub fn contour_indicator(
    opfun: &OperatorFunction,
    center: Complex64,
    radius: f64,
    f: &[Complex64],
    q: usize,
) -> Result<f64> {
    let nf = check_contour(opfun, center, radius, f, q)?;
    let mut acc = vec![Complex64::new(0.0, 0.0); f.len()];
    for j in 0..q {
        // The lower half mirrors the upper half exactly, so real-centred
        // contours visit conjugate pairs and share factorizations.
        let k = j.min(q - j);
        let theta = 2.0 * PI * k as f64 / q as f64;
        let upper = Complex64::new(radius * cos(theta), radius * sin(theta));
        let offset = if k == j { upper } else { upper.conj() };
        let z = center + offset;
        let w = opfun.solve_resolvent(z, f).map_err(|e| match e {
            Error::EigenvalueProximity { z } => Error::ContourCollision { z },
            other => other,
        })?;
        for (a, wi) in acc.iter_mut().zip(&w) {
            *a += offset * wi;
        }
    }
    let scale = 1.0 / q as f64;
    acc.iter_mut().for_each(|a| *a *= scale);
    Ok(opfun.norm_m(&acc) / nf)
}

/// Indicator of `region_box` with the default margin.
pub fn indicator(opfun: &OperatorFunction, region_box: &RegionBox, f: &[Complex64], q: usize) -> Result<f64> {
    contour_indicator(opfun, region_box.center, region_box.contour_radius(), f, q)
}

/// [`contour_indicator`] that enlarges the radius by [`RADIUS_NUDGE`] when a
/// node lands on an eigenvalue, at most [`MAX_NUDGES`] times.
fn robust_indicator(opfun: &OperatorFunction, center: Complex64, radius: f64, f: &[Complex64], q: usize) -> Result<f64> {
    let mut r = radius;
    let mut attempt = 0;
    loop {
        match contour_indicator(opfun, center, r, f, q) {
            Err(Error::ContourCollision { .. }) if attempt < MAX_NUDGES => {
                attempt += 1;
                r *= RADIUS_NUDGE;
            }
            other => return other,
        }
    }
}

/// The probe vector used by [`search`] for a given seed.
pub fn probe_vector(n: usize, seed: u64) -> Vec<Complex64> {
    random_vector(n, seed).into_iter().map(|x| Complex64::new(x, 0.0)).collect()
}

#[derive(Clone)]
struct Node {
    region: RegionBox,
    trace: Vec<(u32, f64)>,
}

struct Candidate {
    center: Complex64,
    radius: f64,
    indicator: f64,
    trace: Vec<(u32, f64)>,
}

/// Finds the eigenvalues of `F_h` in `region` by recursive subdivision.
///
/// `region` may sit close to the origin: boxes whose contour would enclose
/// `z = 0` are split before any indicator is evaluated.
pub fn search(opfun: &OperatorFunction, region: &RegionBox, opts: &SimOptions) -> Result<SearchOutcome> {
    opts.validate()?;
    if region.contains(Complex64::new(0.0, 0.0)) {
        return Err(Error::invalid("search region must not contain z = 0"));
    }
    let tol = opts.tol.unwrap_or(DEFAULT_REL_TOL * region.diameter());
    let f = probe_vector(opfun.n_dof(), opts.seed);

    let mut generation = Vec::new();
    let mut pending = vec![RegionBox { level: 0, indicator: None, ..region.clone() }];
    while let Some(b) = pending.pop() {
        if b.excludes_origin(opts.margin) {
            generation.push(Node { region: b, trace: Vec::new() });
        } else if b.level >= opts.max_depth {
            return Err(Error::invalid("search region is too close to z = 0"));
        } else {
            pending.extend(b.children());
        }
    }

    let mut candidates = Vec::new();
    let mut warnings = Vec::new();
    let mut evaluated = 0;
    while !generation.is_empty() {
        generation.sort_by(|a, b| {
            (a.region.center.re, a.region.center.im).partial_cmp(&(b.region.center.re, b.region.center.im)).unwrap()
        });
        let values = evaluate_generation(opfun, &generation, &f, opts, &mut evaluated)?;
        let mut next = Vec::new();
        for (mut node, value) in generation.into_iter().zip(values) {
            if value < opts.threshold {
                continue;
            }
            node.region.indicator = Some(value);
            node.trace.push((node.region.level, value));
            if node.region.size() < tol {
                candidates.push(Candidate {
                    center: node.region.center,
                    radius: node.region.radius(opts.margin),
                    indicator: value,
                    trace: node.trace,
                });
            } else if node.region.level >= opts.max_depth {
                warnings.push(SearchWarning::UnresolvedCluster {
                    center: node.region.center,
                    half_size: node.region.size(),
                    indicator: value,
                });
                candidates.push(Candidate {
                    center: node.region.center,
                    radius: node.region.radius(opts.margin),
                    indicator: value,
                    trace: node.trace,
                });
            } else {
                for child in node.region.children() {
                    next.push(Node { region: child, trace: node.trace.clone() });
                }
            }
        }
        generation = next;
    }

    let estimates = finalize(opfun, candidates, tol, opts, &mut warnings)?;
    Ok(SearchOutcome { estimates, warnings, boxes_evaluated: evaluated })
}

/// Indicators for one generation. A box and its mirror image in the real axis
/// share one evaluation: the pencil and the probe vector are real, so their
/// contour integrals are complex conjugates.
fn evaluate_generation(
    opfun: &OperatorFunction,
    generation: &[Node],
    f: &[Complex64],
    opts: &SimOptions,
    evaluated: &mut usize,
) -> Result<Vec<f64>> {
    let mut unique: BTreeMap<(u64, u64, u64, u64), usize> = BTreeMap::new();
    let mut reps: Vec<&RegionBox> = Vec::new();
    let slots: Vec<usize> = generation
        .iter()
        .map(|n| {
            *unique.entry(n.region.mirror_key()).or_insert_with(|| {
                reps.push(&n.region);
                reps.len() - 1
            })
        })
        .collect();
    let eval = |b: &&RegionBox| robust_indicator(opfun, b.center, b.radius(opts.margin), f, opts.quad_points);
    #[cfg(feature = "parallel")]
    let results: Vec<Result<f64>> = {
        use rayon::prelude::*;
        reps.par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<f64>> = reps.iter().map(eval).collect();
    *evaluated += reps.len();
    let values = results.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(slots.into_iter().map(|s| values[s]).collect())
}

fn finalize(
    opfun: &OperatorFunction,
    mut candidates: Vec<Candidate>,
    tol: f64,
    opts: &SimOptions,
    warnings: &mut Vec<SearchWarning>,
) -> Result<Vec<EigenvalueEstimate>> {
    candidates.sort_by(|a, b| (a.center.re, a.center.im).partial_cmp(&(b.center.re, b.center.im)).unwrap());
    let merge = 2.0 * tol;
    // Neighbouring boxes around one eigenvalue emit nearly equal centers; keep
    // the strongest indicator of each group.
    let mut groups: Vec<Candidate> = Vec::new();
    for c in candidates {
        match groups.iter_mut().find(|g| (g.center - c.center).norm() <= merge) {
            Some(g) if c.indicator > g.indicator => *g = c,
            Some(_) => {}
            None => groups.push(c),
        }
    }
    let mut estimates: Vec<EigenvalueEstimate> = Vec::new();
    for g in groups {
        let mut est = EigenvalueEstimate {
            value: g.center,
            enclosure_radius: g.radius,
            indicator_trace: g.trace,
            polish_residual: f64::NAN,
            polished: false,
        };
        if opts.polish {
            let p = polish(opfun, g.center)?;
            // A value outside the enclosing circle belongs to another eigenvalue.
            if p.converged && (Complex64::new(p.value, 0.0) - g.center).norm() <= 2.0 * g.radius.max(tol) {
                est.value = Complex64::new(p.value, 0.0);
                est.polish_residual = p.residual;
                est.polished = true;
            } else {
                est.polish_residual = p.residual;
                warnings.push(SearchWarning::PolishFailed { center: g.center, residual: p.residual });
            }
        }
        match estimates.iter_mut().find(|e| (e.value - est.value).norm() <= merge) {
            Some(e) if est.polished && (!e.polished || est.polish_residual < e.polish_residual) => *e = est,
            Some(_) => {}
            None => estimates.push(est),
        }
    }
    estimates.sort_by(|a, b| (a.value.re, a.value.im).partial_cmp(&(b.value.re, b.value.im)).unwrap());
    Ok(estimates)
}

/// Rayleigh quotient iteration on `A v = λ M v` from shift `Re(guess)`.
///
/// Stops when consecutive quotients agree to `1e-12` relative, or after 50
/// iterations. The residual is `‖A v - λ M v‖` in the mass norm with
/// `‖v‖ = 1`.
pub fn polish(opfun: &OperatorFunction, guess: Complex64) -> Result<Polished> {
    let system = opfun.system();
    let (a, m) = (system.stiffness(), system.mass());
    let mut v = random_vector(system.n_dof(), POLISH_SEED);
    let nv = system.mass_norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut sigma = guess.re;
    if !sigma.is_finite() {
        return Err(Error::invalid("non-finite polish guess"));
    }
    let mut lambda = sigma;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < POLISH_MAX_ITERS {
        iterations += 1;
        let factor = match Factorization::<f64>::factor_combination(&[(1.0, a), (-sigma, m)]) {
            Ok(f) => f,
            Err(Error::NearSingular { .. }) => {
                // The shift is an eigenvalue to working precision.
                let bump = 1e-10 * sigma.abs().max(f64::MIN_POSITIVE);
                Factorization::<f64>::factor_combination(&[(1.0, a), (-(sigma + bump), m)])?
            }
            Err(e) => return Err(e),
        };
        let mut w = factor.solve(&m.mul_vec(&v))?;
        let nw = system.mass_norm(&w);
        if !(nw > 0.0) || !nw.is_finite() {
            break;
        }
        w.iter_mut().for_each(|x| *x /= nw);
        v = w;
        let next = a.bilinear(&v, &v);
        let settled = (next - lambda).abs() < POLISH_REL_TOL * next.abs();
        lambda = next;
        sigma = next;
        if settled {
            converged = true;
            break;
        }
    }
    let av = a.mul_vec(&v);
    let mv = m.mul_vec(&v);
    let r: Vec<f64> = av.iter().zip(&mv).map(|(p, q)| p - lambda * q).collect();
    let residual = system.mass_norm(&r);
    Ok(Polished { value: lambda, residual, converged, iterations })
}

/// One cell of an indicator map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndicatorSample {
    pub re: f64,
    pub im: f64,
    /// `None` when the cell's contour would enclose `z = 0`.
    pub indicator: Option<f64>,
}

/// Indicators of an `nx x ny` grid of boxes tiling `region`, row by row from
/// the lowest imaginary part.
pub fn indicator_map(
    opfun: &OperatorFunction,
    region: &RegionBox,
    nx: usize,
    ny: usize,
    opts: &SimOptions,
) -> Result<Vec<IndicatorSample>> {
    opts.validate()?;
    if nx == 0 || ny == 0 {
        return Err(Error::invalid("indicator map needs at least one cell per direction"));
    }
    let f = probe_vector(opfun.n_dof(), opts.seed);
    let (hw, hh) = (region.half_width / nx as f64, region.half_height / ny as f64);
    let (re0, im0) = (region.center.re - region.half_width, region.center.im - region.half_height);
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let cell = RegionBox::new(
                Complex64::new(re0 + (2 * i + 1) as f64 * hw, im0 + (2 * j + 1) as f64 * hh),
                hw,
                hh,
            );
            let indicator = if cell.excludes_origin(opts.margin) {
                Some(robust_indicator(opfun, cell.center, cell.radius(opts.margin), &f, opts.quad_points)?)
            } else {
                None
            };
            out.push(IndicatorSample { re: cell.center.re, im: cell.center.im, indicator });
        }
    }
    Ok(out)
}
