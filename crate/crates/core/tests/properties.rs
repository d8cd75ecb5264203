use nalgebra::DMatrix;
use proptest::prelude::*;

use fracflow::discretization::local_rt0_mass;
use fracflow::linalg::mtx::{read_matrix, write_matrix};
use fracflow::linalg::{amg_setup, AmgConfig, SparseMatrix};
use fracflow::meshing::{simplex_measure, Point};

fn triplets(n: usize) -> impl Strategy<Value = Vec<(usize, usize, f64)>> {
    prop::collection::vec((0..n, 0..n, -10.0..10.0f64), 0..4 * n)
}

fn simplex(d: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(prop::array::uniform3(-1.0..1.0f64), d + 1).prop_map(move |mut p| {
        for q in &mut p {
            for c in q.iter_mut().skip(d) {
                *c = 0.0;
            }
        }
        p
    })
}

/// Diagonally dominant symmetric matrix with the sparsity of `t`.
fn spd(n: usize, t: &[(usize, usize, f64)]) -> SparseMatrix<f64> {
    let mut all = Vec::new();
    let mut diag = vec![1.0; n];
    for &(i, j, v) in t {
        if i != j {
            all.push((i, j, -v.abs()));
            all.push((j, i, -v.abs()));
            diag[i] += v.abs();
            diag[j] += v.abs();
        }
    }
    all.extend(diag.iter().enumerate().map(|(i, &d)| (i, i, d)));
    SparseMatrix::from_triplets(n, n, &all).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spmv_agrees_with_dense(t in triplets(12), x in prop::collection::vec(-5.0..5.0f64, 12)) {
        let m = SparseMatrix::from_triplets(12, 12, &t).unwrap();
        let d = DMatrix::from_row_slice(12, 12, &m.to_dense());
        let oracle = &d * nalgebra::DVector::from_column_slice(&x);
        for (a, b) in m.spmv(&x).unwrap().iter().zip(oracle.iter()) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
        prop_assert_eq!(m.transpose().transpose(), m);
    }

    #[test]
    fn rt0_mass_scales_inversely(p in simplex(2), c in 1e-3..1e3f64) {
        prop_assume!(simplex_measure(&p) > 1e-3);
        let m1 = local_rt0_mass(&p, 1.0).unwrap();
        let mc = local_rt0_mass(&p, c).unwrap();
        for (a, b) in m1.iter().zip(&mc) {
            prop_assert!((a / c - b).abs() <= 1e-12 * a.abs().max(1e-300) / c);
        }
        let d = DMatrix::from_row_slice(3, 3, &m1);
        prop_assert!((&d - d.transpose()).amax() <= 1e-14 * d.amax());
        prop_assert!(d.cholesky().is_some());
    }

    #[test]
    fn rt0_mass_is_spd_on_tetrahedra(p in simplex(3)) {
        prop_assume!(simplex_measure(&p) > 1e-3);
        let d = DMatrix::from_row_slice(4, 4, &local_rt0_mass(&p, 1.0).unwrap());
        prop_assert!(d.cholesky().is_some());
    }

    #[test]
    fn amg_cycle_is_linear(t in triplets(80), a in -3.0..3.0f64, seed in 0u64..1000) {
        let m = spd(80, &t);
        let h = amg_setup(&m, &AmgConfig { max_coarse: 8, ..AmgConfig::default() }).unwrap();
        let r: Vec<f64> = (0..80).map(|i| ((i as u64 * 31 + seed) % 17) as f64 - 8.0).collect();
        let s: Vec<f64> = (0..80).map(|i| ((i as u64 * 7 + seed) % 13) as f64 - 6.0).collect();
        let comb: Vec<f64> = r.iter().zip(&s).map(|(x, y)| a * x + y).collect();
        let (cr, cs, cc) = (h.cycle(&r), h.cycle(&s), h.cycle(&comb));
        for i in 0..80 {
            let e = a * cr[i] + cs[i];
            prop_assert!((cc[i] - e).abs() <= 1e-10 * (1.0 + e.abs()));
        }
    }

    #[test]
    fn matrix_market_round_trip(t in triplets(9)) {
        let m = SparseMatrix::from_triplets(9, 9, &t).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.mtx");
        write_matrix(&path, &m).unwrap();
        let back: SparseMatrix<f64> = read_matrix(&path).unwrap();
        prop_assert_eq!(back, m);
    }
}
