use fhsim_core::assembly::assemble;
use fhsim_core::linsolve::{dense_generalized_eig, DenseMatrix, Factorization, Field};
use fhsim_core::mesh::{Mesh, Rect};
use fhsim_core::rng::SeededVectors;
use fhsim_core::sparse::CsrMatrix;
use fhsim_core::{AssembledSystem, Complex64, Error};

fn system(n: usize) -> AssembledSystem {
    assemble(&Mesh::uniform(n, Rect::UNIT_SQUARE).unwrap()).unwrap()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn cnorm(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn oracle(s: &AssembledSystem, vectors: bool) -> fhsim_core::linsolve::GeneralizedEigen {
    dense_generalized_eig(&DenseMatrix::from_csr(s.stiffness()), &DenseMatrix::from_csr(s.mass()), vectors).unwrap()
}

#[test]
fn real_solve_residuals() {
    let mut rng = SeededVectors::new(7);
    for n in [2, 4, 8, 10] {
        let s = system(n);
        for a in [s.stiffness(), s.mass()] {
            let f = Factorization::<f64>::factor(a).unwrap();
            assert_eq!(f.field(), Field::Real);
            for _ in 0..100 {
                let b = rng.vector(a.dim());
                let x = f.solve(&b).unwrap();
                let r: Vec<f64> = a.mul_vec(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
                assert!(norm(&r) <= 1e-10 * norm(&b));
            }
        }
    }
}

#[test]
fn zero_right_hand_side() {
    let s = system(5);
    let f = Factorization::<f64>::factor(s.stiffness()).unwrap();
    assert!(f.solve(&vec![0.0; s.n_dof()]).unwrap().iter().all(|&v| v == 0.0));
}

#[test]
fn constant_load_recovers_ones() {
    let s = system(10);
    let ones = vec![1.0; s.n_dof()];
    let b = s.stiffness().mul_vec(&ones);
    let x = Factorization::<f64>::factor(s.stiffness()).unwrap().solve(&b).unwrap();
    assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-10));
}

#[test]
fn dimension_mismatch() {
    let s = system(4);
    let f = Factorization::<f64>::factor(s.stiffness()).unwrap();
    assert!(matches!(f.solve(&[1.0, 2.0]), Err(Error::DimensionMismatch { expected: 9, found: 2 })));
}

#[test]
fn profile_stays_within_band() {
    let n = 12;
    let s = system(n);
    let f = Factorization::<f64>::factor(s.stiffness()).unwrap();
    // Row-major interior numbering couples dofs at most n dofs apart.
    assert!(f.profile_size() <= s.n_dof() * n);
}

#[test]
fn shifted_scalar_is_singular() {
    let s = system(2);
    let r = Factorization::<f64>::factor_combination(&[(1.0, s.mass()), (-1.0 / 32.0, s.stiffness())]);
    assert!(matches!(r, Err(Error::NearSingular { index: 0, .. })));
}

#[test]
fn complex_solve_residuals() {
    let s = system(10);
    let mut rng = SeededVectors::new(3);
    for z in [Complex64::new(10.0, 1.0), Complex64::new(50.0, -4.0), Complex64::new(19.9, 1e-3)] {
        let terms = [(Complex64::new(1.0, 0.0), s.mass()), (-z.inv(), s.stiffness())];
        let f = Factorization::<Complex64>::factor_combination(&terms).unwrap();
        assert_eq!(f.field(), Field::Complex);
        for _ in 0..20 {
            let b: Vec<Complex64> =
                (0..s.n_dof()).map(|_| Complex64::new(rng.uniform(), rng.uniform())).collect();
            let x = f.solve(&b).unwrap();
            let r: Vec<Complex64> = s
                .mass()
                .mul_vec_complex(&x)
                .iter()
                .zip(s.stiffness().mul_vec_complex(&x))
                .zip(&b)
                .map(|((m, a), b)| m - z.inv() * a - b)
                .collect();
            assert!(cnorm(&r) <= 1e-10 * cnorm(&b));
        }
    }
}

#[test]
fn real_factor_solves_complex_rhs() {
    let s = system(6);
    let f = Factorization::<f64>::factor(s.stiffness()).unwrap();
    let b: Vec<Complex64> = (0..s.n_dof()).map(|i| Complex64::new(i as f64, -(i as f64) * 0.5)).collect();
    let x = f.solve_complex(&b).unwrap();
    let r: Vec<Complex64> = s.stiffness().mul_vec_complex(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
    assert!(cnorm(&r) <= 1e-10 * cnorm(&b));
}

#[test]
fn oracle_scalar() {
    let e = oracle(&system(2), false);
    assert_eq!(e.values.len(), 1);
    assert!((e.values[0] - 32.0).abs() < 1e-12);
}

#[test]
fn oracle_residuals() {
    for n in [4, 8] {
        let s = system(n);
        let e = oracle(&s, true);
        assert_eq!(e.values.len(), (n - 1) * (n - 1));
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        for (lambda, v) in e.values.iter().zip(e.vectors.as_ref().unwrap()) {
            let r: Vec<f64> =
                s.stiffness().mul_vec(v).iter().zip(s.mass().mul_vec(v)).map(|(a, m)| a - lambda * m).collect();
            assert!(norm(&r) <= 1e-8 * norm(v), "λ = {lambda}");
            assert!((s.mass_norm(v) - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn oracle_lies_above_exact_eigenvalues() {
    let pi2 = std::f64::consts::PI.powi(2);
    for n in [2, 4, 8] {
        let e = oracle(&system(n), false);
        assert!(e.values[0] > 2.0 * pi2);
        if n > 2 {
            assert!(e.values[1] > 5.0 * pi2 && e.values[2] > 5.0 * pi2);
        }
    }
}

#[test]
fn oracle_rejects_indefinite_mass() {
    let a = CsrMatrix::from_dense(&[vec![2.0, 0.0], vec![0.0, 2.0]]).unwrap();
    let m = CsrMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
    let r = dense_generalized_eig(&DenseMatrix::from_csr(&a), &DenseMatrix::from_csr(&m), false);
    assert!(matches!(r, Err(Error::InvalidArgument(_))));
}
