//! Numerical probes of the approximation properties behind the convergence
//! result: the projections reproduce the L2 norm, `F_h(z)` stays bounded as
//! the mesh is refined, and `F_h(λ) p_h` approaches `p_h F(λ)`.
//!
//! The continuous `F(λ)` is replaced by its discretization on a reference mesh
//! that refines the coarse mesh uniformly, so projecting reference functions
//! onto the coarse space is exact.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::assembly::{assemble, l2_project, l2_project_refined};
use crate::error::{Error, Result};
use crate::linsolve::{dense_generalized_eig, DenseMatrix};
use crate::math::{ln, sin, sqrt};
use crate::mesh::{Mesh, Rect};
use crate::opfun::OperatorFunction;
use crate::rng::SeededVectors;
use crate::sim::{indicator, probe_vector, RegionBox, DEFAULT_QUAD_POINTS, DEFAULT_SEED};

/// Eigenvalue-free boxes keep every eigenvalue this many contour radii away
/// from their center.
pub const NULL_BOX_CLEARANCE: f64 = 2.5;

/// First Dirichlet eigenfunction of `rect`.
pub fn sine_mode(rect: &Rect) -> impl Fn(f64, f64) -> f64 {
    let r = *rect;
    move |x, y| sin(PI * (x - r.x0) / r.width()) * sin(PI * (y - r.y0) / r.height())
}

/// `‖sine_mode(rect)‖_{L2}`.
pub fn sine_mode_norm(rect: &Rect) -> f64 {
    0.5 * sqrt(rect.area())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRow {
    pub n: usize,
    pub h: f64,
    pub value: f64,
}

/// Orders `ln(v_prev / v) / ln(h_prev / h)` between consecutive rows.
pub fn observed_orders(rows: &[ProbeRow]) -> Vec<f64> {
    rows.windows(2).map(|w| ln(w[0].value / w[1].value) / ln(w[0].h / w[1].h)).collect()
}

/// `| ‖p_h f‖ - ‖f‖ |` for the first sine mode on each mesh.
pub fn projection_norm_defects(rect: &Rect, n_list: &[usize]) -> Result<Vec<ProbeRow>> {
    let f = sine_mode(rect);
    let exact = sine_mode_norm(rect);
    n_list
        .iter()
        .map(|&n| {
            let mesh = Mesh::uniform(n, *rect)?;
            let system = assemble(&mesh)?;
            let c = l2_project(&mesh, &system, &f)?;
            Ok(ProbeRow { n, h: mesh.h(), value: (system.mass_norm(&c) - exact).abs() })
        })
        .collect()
}

/// `operator_norm_estimate(z)` for every `z` on every mesh; row per mesh.
pub fn operator_norms(rect: &Rect, n_list: &[usize], shifts: &[Complex64]) -> Result<Vec<Vec<f64>>> {
    n_list
        .iter()
        .map(|&n| {
            let op = OperatorFunction::new(assemble(&Mesh::uniform(n, *rect)?)?)?;
            shifts.iter().map(|&z| op.operator_norm_estimate(z)).collect()
        })
        .collect()
}

/// `‖F_h(λ) p_h f - p_h F(λ) f‖` for the first sine mode, with `F(λ)` taken on
/// a mesh refined by `2^ref_levels`.
pub fn consistency_defects(rect: &Rect, n_list: &[usize], lambda: f64, ref_levels: u32) -> Result<Vec<ProbeRow>> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::invalid("consistency probe needs a finite nonzero λ"));
    }
    let f = sine_mode(rect);
    n_list
        .iter()
        .map(|&n| {
            let coarse = Mesh::uniform(n, *rect)?;
            let fine = Mesh::uniform(n << ref_levels, *rect)?;
            let coarse_op = OperatorFunction::new(assemble(&coarse)?)?;
            let fine_op = OperatorFunction::new(assemble(&fine)?)?;
            let (cs, fs) = (coarse_op.system(), fine_op.system());

            // Left: F_h(λ) p_h f.
            let ph_f = l2_project(&coarse, cs, &f)?;
            let th = coarse_op.apply_th_real(&ph_f)?;
            let left: Vec<f64> = th.iter().zip(&ph_f).map(|(t, p)| t - p / lambda).collect();

            // Right: p_h (T f - f/λ) with T f from the reference mesh.
            let u_ref = fine_op.apply_th_real(&l2_project(&fine, fs, &f)?)?;
            let u_global = fs.to_global(&u_ref);
            let locator = fine.locator();
            let ph_u = l2_project_refined(
                &coarse,
                cs,
                |x, y| locator.eval_p1(&u_global, [x, y]).unwrap_or(0.0),
                ref_levels,
            )?;
            let right: Vec<f64> = ph_u.iter().zip(&ph_f).map(|(u, p)| u - p / lambda).collect();

            let diff: Vec<f64> = left.iter().zip(&right).map(|(a, b)| a - b).collect();
            Ok(ProbeRow { n, h: coarse.h(), value: cs.mass_norm(&diff) })
        })
        .collect()
}

/// Indicator of a box known to enclose no eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct NullBox {
    pub n: usize,
    pub region: RegionBox,
    pub indicator: f64,
}

/// `count` seeded random square boxes on the unit square meshes of `n_list`
/// (taken in turn), each checked against the dense spectrum to have no
/// eigenvalue within [`NULL_BOX_CLEARANCE`] contour radii of its center.
pub fn cauchy_null_boxes(n_list: &[usize], count: usize, seed: u64) -> Result<Vec<NullBox>> {
    if n_list.is_empty() {
        return Err(Error::invalid("need at least one mesh"));
    }
    let mut setups = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let op = OperatorFunction::new(assemble(&Mesh::uniform(n, Rect::UNIT_SQUARE)?)?)?;
        let s = op.system();
        let values =
            dense_generalized_eig(&DenseMatrix::from_csr(s.stiffness()), &DenseMatrix::from_csr(s.mass()), false)?.values;
        let f = probe_vector(op.n_dof(), DEFAULT_SEED);
        setups.push((n, op, values, f));
    }
    let mut rng = SeededVectors::new(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (n, op, values, f) = &setups[out.len() % setups.len()];
        let top = 1.1 * values.last().copied().unwrap_or(1.0);
        let center = Complex64::new(0.5 * top * (rng.uniform() + 1.0), 2.0 * rng.uniform());
        let half = 0.5 + 2.5 * (rng.uniform() + 1.0);
        let region = RegionBox::new(center, half, half);
        let r = region.contour_radius();
        let crowded = values.iter().any(|&v| (Complex64::new(v, 0.0) - center).norm() < NULL_BOX_CLEARANCE * r);
        if crowded || !region.excludes_origin(crate::sim::DEFAULT_MARGIN) {
            continue;
        }
        let value = indicator(op, &region, f, DEFAULT_QUAD_POINTS)?;
        out.push(NullBox { n: *n, region, indicator: value });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_of_a_power_law() {
        let rows: Vec<ProbeRow> =
            [4usize, 8, 16].iter().map(|&n| ProbeRow { n, h: 1.0 / n as f64, value: 2.0 / (n * n) as f64 }).collect();
        for o in observed_orders(&rows) {
            assert!((o - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sine_mode_vanishes_on_boundary() {
        let r = Rect::new(1.0, -1.0, 3.0, 0.5).unwrap();
        let f = sine_mode(&r);
        assert!(f(1.0, 0.0).abs() < 1e-15 && f(2.0, 0.5).abs() < 1e-15);
        assert!((f(2.0, -0.25) - 1.0).abs() < 1e-15);
    }
}
