//! The discrete solution operator `T_h = A⁻¹ M` and the operator function
//! `F_h(z) = T_h - z⁻¹ I` on interior coefficient vectors.
//!
//! Coefficient space carries the mass inner product `⟨x, y⟩ = yᴴ M x`, the
//! discrete counterpart of the L2(D) inner product. `T_h` is self-adjoint in
//! it, so `F_h(z)` is normal with `F_h(z)* = T_h - z̄⁻¹ I`.
//!
//! `F_h(z) w = f` is equivalent to `(M - z⁻¹ A) w = A f`: multiply by `A` and
//! use `A T_h = M`. One complex profile factorization per shift serves every
//! right-hand side at that shift.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;
use spin::Mutex;

use crate::assembly::AssembledSystem;
use crate::error::{Error, Result};
use crate::linsolve::Factorization;
use crate::math::sqrt;
use crate::rng::SeededVectors;

pub const DEFAULT_NORM_SAMPLES: usize = 20;
pub const DEFAULT_NORM_SEED: u64 = 20240601;
pub const DEFAULT_CACHE_CAPACITY: usize = 32;

const POWER_MAX_ITERS: usize = 2000;
const POWER_REL_TOL: f64 = 1e-13;

type ShiftKey = (u64, u64);

fn shift_key(z: Complex64) -> ShiftKey {
    // `+ 0.0` folds -0.0 into 0.0.
    ((z.re + 0.0).to_bits(), (z.im + 0.0).to_bits())
}

/// Bounded memo of shifted factorizations, evicted oldest first.
struct ShiftCache {
    entries: BTreeMap<ShiftKey, Arc<Factorization<Complex64>>>,
    order: VecDeque<ShiftKey>,
    capacity: usize,
    hits: u64,
    misses: u64,
}

impl ShiftCache {
    fn get(&mut self, key: &ShiftKey) -> Option<Arc<Factorization<Complex64>>> {
        let hit = self.entries.get(key).cloned();
        if hit.is_some() {
            self.hits += 1;
        }
        hit
    }

    fn insert(&mut self, key: ShiftKey, f: Arc<Factorization<Complex64>>) {
        if self.capacity == 0 || self.entries.contains_key(&key) {
            return;
        }
        while self.entries.len() >= self.capacity {
            match self.order.pop_front() {
                Some(old) => {
                    self.entries.remove(&old);
                }
                None => break,
            }
        }
        self.entries.insert(key, f);
        self.order.push_back(key);
    }
}

pub struct OperatorFunction {
    system: AssembledSystem,
    stiffness: Factorization<f64>,
    cache: Mutex<ShiftCache>,
}

impl OperatorFunction {
    pub fn new(system: AssembledSystem) -> Result<Self> {
        Self::with_cache_capacity(system, DEFAULT_CACHE_CAPACITY)
    }

    pub fn with_cache_capacity(system: AssembledSystem, capacity: usize) -> Result<Self> {
        let stiffness = Factorization::<f64>::factor(system.stiffness()).map_err(|_| Error::NotPositiveDefinite)?;
        if !stiffness.all_pivots_positive() {
            return Err(Error::NotPositiveDefinite);
        }
        let cache = ShiftCache {
            entries: BTreeMap::new(),
            order: VecDeque::new(),
            capacity,
            hits: 0,
            misses: 0,
        };
        Ok(OperatorFunction { system, stiffness, cache: Mutex::new(cache) })
    }

    pub fn system(&self) -> &AssembledSystem {
        &self.system
    }

    pub fn n_dof(&self) -> usize {
        self.system.n_dof()
    }

    /// `(hits, misses)` of the shift cache.
    pub fn cache_stats(&self) -> (u64, u64) {
        let c = self.cache.lock();
        (c.hits, c.misses)
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.n_dof() {
            return Err(Error::DimensionMismatch { expected: self.n_dof(), found: len });
        }
        Ok(())
    }

    /// `u = T_h f`, i.e. the solution of `A u = M f`.
    pub fn apply_th(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_dim(f.len())?;
        self.stiffness.solve_complex(&self.system.mass().mul_vec_complex(f))
    }

    pub fn apply_th_real(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(f.len())?;
        self.stiffness.solve(&self.system.mass().mul_vec(f))
    }

    /// `F_h(z) x = T_h x - x / z`.
    pub fn apply_f(&self, z: Complex64, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let zinv = nonzero_inverse(z)?;
        let mut u = self.apply_th(x)?;
        for (ui, xi) in u.iter_mut().zip(x) {
            *ui -= xi * zinv;
        }
        Ok(u)
    }

    /// Factorization of `M - z⁻¹ A`, from the cache when possible.
    ///
    /// The second value is `true` when the factorization belongs to `z̄`; the
    /// pencil is real, so that factor is the entrywise conjugate of the one
    /// for `z`.
    fn shifted(&self, z: Complex64) -> Result<(Arc<Factorization<Complex64>>, bool)> {
        let key = shift_key(z);
        let conj_key = shift_key(z.conj());
        {
            let mut cache = self.cache.lock();
            if let Some(f) = cache.get(&key) {
                return Ok((f, false));
            }
            if let Some(f) = cache.get(&conj_key) {
                return Ok((f, true));
            }
            cache.misses += 1;
        }
        let zinv = nonzero_inverse(z)?;
        let one = Complex64::new(1.0, 0.0);
        let f = Factorization::factor_combination(&[(one, self.system.mass()), (-zinv, self.system.stiffness())])
            .map_err(|e| match e {
                Error::NearSingular { .. } => Error::EigenvalueProximity { z },
                other => other,
            })?;
        let f = Arc::new(f);
        // Concurrent inserts of the same key keep the first; both are identical.
        self.cache.lock().insert(key, f.clone());
        Ok((f, false))
    }

    /// `w = F_h(z)⁻¹ f`.
    pub fn solve_resolvent(&self, z: Complex64, f: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_dim(f.len())?;
        let (factor, conjugated) = self.shifted(z)?;
        let mut rhs = self.system.stiffness().mul_vec_complex(f);
        if conjugated {
            rhs.iter_mut().for_each(|v| *v = v.conj());
            factor.solve_in_place(&mut rhs)?;
            rhs.iter_mut().for_each(|v| *v = v.conj());
        } else {
            factor.solve_in_place(&mut rhs)?;
        }
        Ok(rhs)
    }

    /// `√(xᴴ M x)`.
    pub fn norm_m(&self, x: &[Complex64]) -> f64 {
        let mx = self.system.mass().mul_vec_complex(x);
        let s: f64 = x.iter().zip(&mx).map(|(a, b)| (a.conj() * b).re).sum();
        sqrt(s.max(0.0))
    }

    /// Estimate of the operator norm `‖F_h(z)‖` induced by the mass norm, with
    /// the default sample count and seed.
    pub fn operator_norm_estimate(&self, z: Complex64) -> Result<f64> {
        self.operator_norm_estimate_with(z, DEFAULT_NORM_SAMPLES, DEFAULT_NORM_SEED)
    }

    /// Max over `samples` seeded random starts of `‖F_h(z) v‖` with `‖v‖ = 1`,
    /// where each start is first refined by power iteration on `F_h(z)* F_h(z)`.
    ///
    /// The sample sequence for a seed is a prefix of the sequence for any larger
    /// sample count.
    pub fn operator_norm_estimate_with(&self, z: Complex64, samples: usize, seed: u64) -> Result<f64> {
        let zinv = nonzero_inverse(z)?;
        let mut rng = SeededVectors::new(seed);
        let mut best: f64 = 0.0;
        for _ in 0..samples {
            let v: Vec<Complex64> = rng.vector(self.n_dof()).into_iter().map(|x| Complex64::new(x, 0.0)).collect();
            best = best.max(self.power_refined_norm(zinv, v)?);
        }
        Ok(best)
    }

    fn power_refined_norm(&self, zinv: Complex64, mut v: Vec<Complex64>) -> Result<f64> {
        let apply = |x: &[Complex64], shift: Complex64| -> Result<Vec<Complex64>> {
            let mut u = self.apply_th(x)?;
            for (ui, xi) in u.iter_mut().zip(x) {
                *ui -= xi * shift;
            }
            Ok(u)
        };
        let nv = self.norm_m(&v);
        if nv == 0.0 {
            return Ok(0.0);
        }
        v.iter_mut().for_each(|x| *x /= nv);
        let mut estimate = 0.0;
        for _ in 0..POWER_MAX_ITERS {
            let fv = apply(&v, zinv)?;
            let next = self.norm_m(&fv);
            let converged = (next - estimate).abs() <= POWER_REL_TOL * next;
            estimate = next;
            if converged || next == 0.0 {
                break;
            }
            let mut w = apply(&fv, zinv.conj())?;
            let nw = self.norm_m(&w);
            if nw == 0.0 {
                break;
            }
            w.iter_mut().for_each(|x| *x /= nw);
            v = w;
        }
        Ok(estimate)
    }
}

fn nonzero_inverse(z: Complex64) -> Result<Complex64> {
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::invalid("operator function is undefined at z = 0"));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::invalid("non-finite shift"));
    }
    Ok(z.inv())
}
