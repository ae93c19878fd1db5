//! Property runs for the three approximation conditions behind the
//! convergence theory: the projections reproduce norms, `F_h(z)` is bounded
//! uniformly in `h`, and `F_h(λ) p_h` approaches `p_h F(λ)`.

use fhsim_core::probes::{consistency_defects, observed_orders, operator_norms, projection_norm_defects};
use fhsim_core::{Complex64, Rect};

use crate::error::Result;

pub const MIN_ORDER: f64 = 1.8;
pub const MAX_NORM_VARIATION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

fn list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(", ")
}

/// `| ‖p_h f‖ - ‖f‖ |` for the first sine mode decays at order at least
/// [`MIN_ORDER`].
pub fn projection_norms(rect: &Rect, n_list: &[usize]) -> Result<CheckOutcome> {
    let rows = projection_norm_defects(rect, n_list)?;
    let orders = observed_orders(&rows);
    Ok(CheckOutcome {
        name: "b1 projection norms",
        passed: !orders.is_empty() && orders.iter().all(|&o| o >= MIN_ORDER),
        detail: format!("orders {}", list(&orders)),
    })
}

/// Relative spread of `‖F_h(z)‖` across meshes, per shift.
pub fn norm_variations(rect: &Rect, n_list: &[usize], shifts: &[Complex64]) -> Result<Vec<f64>> {
    let rows = operator_norms(rect, n_list, shifts)?;
    Ok((0..shifts.len())
        .map(|k| {
            let (lo, hi) =
                rows.iter().map(|r| r[k]).fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
            (hi - lo) / hi
        })
        .collect())
}

pub fn equiboundedness(rect: &Rect, n_list: &[usize], shifts: &[Complex64]) -> Result<CheckOutcome> {
    let variation = norm_variations(rect, n_list, shifts)?;
    Ok(CheckOutcome {
        name: "b2 equiboundedness",
        passed: variation.iter().all(|&v| v < MAX_NORM_VARIATION),
        detail: format!("relative norm variation {}", list(&variation)),
    })
}

/// `‖F_h(λ) p_h f - p_h F(λ) f‖` decays at order at least [`MIN_ORDER`], with
/// `F(λ)` taken on the mesh refined `2^ref_levels` times.
pub fn consistency(rect: &Rect, n_list: &[usize], lambda: f64, ref_levels: u32) -> Result<CheckOutcome> {
    let rows = consistency_defects(rect, n_list, lambda, ref_levels)?;
    let orders = observed_orders(&rows);
    Ok(CheckOutcome {
        name: "b3 consistency",
        passed: !orders.is_empty() && orders.iter().all(|&o| o >= MIN_ORDER),
        detail: format!("orders {}", list(&orders)),
    })
}

pub fn default_shifts() -> [Complex64; 3] {
    [Complex64::new(10.0, 0.0), Complex64::new(20.0, 5.0), Complex64::new(100.0, 0.0)]
}

/// The three checks with their standard settings on `rect`.
pub fn run_all(rect: &Rect) -> Result<Vec<CheckOutcome>> {
    Ok(vec![
        projection_norms(rect, &[4, 8, 16, 32])?,
        equiboundedness(rect, &[10, 20], &default_shifts())?,
        consistency(rect, &[4, 8, 16], 10.0, 2)?,
    ])
}
