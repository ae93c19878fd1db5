use fhsim_core::assembly::{assemble, assemble_unreduced};
use fhsim_core::linsolve::Factorization;
use fhsim_core::mesh::{CellPattern, Mesh, Rect};
use fhsim_core::sparse::CsrMatrix;
use fhsim_core::{Complex64, RegionBox};
use proptest::prelude::*;

fn rect() -> impl Strategy<Value = Rect> {
    (-5.0..5.0f64, -5.0..5.0f64, 0.2..4.0f64, 0.2..4.0f64).prop_map(|(x, y, w, h)| Rect::new(x, y, x + w, y + h).unwrap())
}

fn pattern() -> impl Strategy<Value = CellPattern> {
    prop_oneof![Just(CellPattern::Diagonal), Just(CellPattern::AntiDiagonal), Just(CellPattern::CrissCross)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mesh_tiles_rectangle(n in 1usize..12, r in rect(), p in pattern()) {
        let m = Mesh::uniform_with_pattern(n, r, p).unwrap();
        prop_assert!((m.total_area() - r.area()).abs() <= 1e-12 * r.area());
        prop_assert_eq!(m.num_vertices() as i64 - m.edges().len() as i64 + m.num_triangles() as i64, 1);
        prop_assert!((0..m.num_triangles()).all(|t| m.triangle_area(t) > 0.0));
        // Boundary edges are exactly the edges used once.
        for ((a, b), count) in m.edges() {
            if count == 1 {
                prop_assert!(m.boundary_flags()[a] && m.boundary_flags()[b]);
            }
        }
    }

    #[test]
    fn refinement_quadruples(n in 1usize..8, r in rect()) {
        let m = Mesh::uniform(n, r).unwrap();
        let f = m.refine_uniform();
        prop_assert_eq!(f.num_triangles(), 4 * m.num_triangles());
        prop_assert_eq!(f.num_interior(), (2 * n - 1) * (2 * n - 1));
        prop_assert!((f.total_area() - m.total_area()).abs() <= 1e-12 * r.area());
        f.check().unwrap();
    }

    #[test]
    fn assembled_matrices_are_consistent(n in 1usize..9, r in rect(), p in pattern()) {
        let m = Mesh::uniform_with_pattern(n, r, p).unwrap();
        let (a, mass) = assemble_unreduced(&m).unwrap();
        prop_assert_eq!(a.symmetry_defect(), 0.0);
        prop_assert_eq!(mass.symmetry_defect(), 0.0);
        let scale = a.values().iter().fold(0.0f64, |s, v| s.max(v.abs()));
        for i in 0..a.dim() {
            prop_assert!(a.row(i).map(|(_, v)| v).sum::<f64>().abs() <= 1e-12 * scale);
        }
        let total: f64 = mass.values().iter().sum();
        prop_assert!((total - r.area()).abs() <= 1e-12 * r.area());
        if let Ok(s) = assemble(&m) {
            prop_assert!(Factorization::<f64>::factor(s.stiffness()).unwrap().all_pivots_positive());
            prop_assert!(Factorization::<f64>::factor(s.mass()).unwrap().all_pivots_positive());
        }
    }

    #[test]
    fn triplets_sum_duplicates(entries in prop::collection::vec((0usize..6, 0usize..6, -10.0..10.0f64), 0..40)) {
        let csr = CsrMatrix::from_triplets(6, &entries).unwrap();
        let mut dense = vec![vec![0.0; 6]; 6];
        for &(i, j, v) in &entries {
            dense[i][j] += v;
        }
        for (i, row) in dense.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                prop_assert!((csr.get(i, j) - v).abs() < 1e-12);
            }
        }
        for i in 0..6 {
            let cols: Vec<usize> = csr.row(i).map(|(j, _)| j).collect();
            prop_assert!(cols.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn banded_spd_solves(n in 1usize..40, band in 0usize..6, seed in 0u64..1000) {
        let mut rng = fhsim_core::rng::SeededVectors::new(seed);
        let mut t = Vec::new();
        for i in 0..n {
            let mut diag = 1.0;
            for j in i.saturating_sub(band)..i {
                let v = rng.uniform();
                t.push((i, j, v));
                t.push((j, i, v));
                diag += v.abs();
            }
            t.push((i, i, diag + 2.0 * band as f64));
        }
        let a = CsrMatrix::from_triplets(n, &t).unwrap();
        let f = Factorization::<f64>::factor(&a).unwrap();
        prop_assert!(f.all_pivots_positive());
        let b = rng.vector(n);
        let x = f.solve(&b).unwrap();
        let r: f64 = a.mul_vec(&x).iter().zip(&b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(r <= 1e-10 * nb.max(1e-300));

        let shift = Complex64::new(rng.uniform(), rng.uniform());
        let fc = Factorization::<Complex64>::factor_combination(&[(Complex64::new(1.0, 0.0), &a), (shift, &a)]);
        if let Ok(fc) = fc {
            let bc: Vec<Complex64> = b.iter().map(|&v| Complex64::new(v, -v)).collect();
            let xc = fc.solve(&bc).unwrap();
            let ax = a.mul_vec_complex(&xc);
            let rc: f64 = ax.iter().zip(&bc).map(|(p, q)| (p * (1.0 + shift) - q).norm_sqr()).sum::<f64>().sqrt();
            let nbc: f64 = bc.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            prop_assert!(rc <= 1e-9 * nbc.max(1e-300));
        }
    }

    #[test]
    fn children_tile_parent(re in 1.0..100.0f64, im in -5.0..5.0f64, hw in 0.01..50.0f64, hh in 0.01..50.0f64) {
        let b = RegionBox::new(Complex64::new(re, im), hw, hh);
        let kids = b.children();
        let area: f64 = kids.iter().map(|k| k.half_width * k.half_height).sum();
        prop_assert!((area - hw * hh).abs() <= 1e-12 * hw * hh);
        for k in &kids {
            prop_assert!(b.contains(k.center));
            prop_assert!(k.size() < b.size());
            let aspect = (k.half_width / k.half_height).max(k.half_height / k.half_width);
            let parent = (hw / hh).max(hh / hw);
            prop_assert!(aspect <= parent.max(2.0) + 1e-12);
        }
    }
}
