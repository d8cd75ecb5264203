use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fracflow::bench::{case_geiger2d, solve};
use fracflow::discretization::{assemble_system, extract_diag, BlockSystem, DofMap};
use fracflow::linalg::{fgmres, Preconditioner, SparseMatrix};
use fracflow::meshing::mesh_structured;
use fracflow::precond::{block_fov, build_pressure_block, build_preconditioner, BlockPreconditioner, PrecondConfig, PrecondKind};
use fracflow::BlockSystemF32;

fn toy(a: &[f64], b: &[f64], nw: usize, np: usize) -> BlockSystem<f64> {
    let a = SparseMatrix::from_dense(nw, nw, a);
    let b = SparseMatrix::from_dense(np, nw, b);
    BlockSystem {
        d_a: extract_diag(&a).unwrap(),
        bt: b.transpose(),
        a,
        b,
        g: vec![0.0; nw],
        f: vec![0.0; np],
        dofs: DofMap {
            n_flux: nw,
            n_mortar: 0,
            n_w: nw,
            n_p: np,
            flux_range: vec![0..nw],
            mortar_range: Vec::new(),
            pressure_range: vec![0..np],
            face_dof: Vec::new(),
            cell_dof: Vec::new(),
        },
        boundary: Vec::new(),
        source_total: 0.0,
    }
}

fn geiger(m: usize, gamma: f64) -> BlockSystem<f64> {
    let (geom, params) = case_geiger2d(m, gamma, 1.0, 1.0).unwrap();
    assemble_system(&mesh_structured(&geom, m).unwrap(), &params).unwrap()
}

fn apply(p: &impl Preconditioner<f64>, r: &[f64]) -> Vec<f64> {
    let mut z = vec![0.0; r.len()];
    p.apply(r, &mut z);
    z
}

#[test]
fn block_diagonal_on_scalar_blocks() {
    // A = [2], B = [√6], so S = B A⁻¹ Bᵀ = 3
    let sys = toy(&[2.0], &[6f64.sqrt()], 1, 1);
    let p = build_preconditioner(&sys, PrecondConfig::exact(PrecondKind::Diag)).unwrap();
    let z = apply(&p, &[1.0, 1.0]);
    assert!((z[0] - 0.5).abs() < 1e-12 && (z[1] - 1.0 / 3.0).abs() < 1e-12);
}

/// Dense oracle for the exact triangular variants on a 4-dof toy system.
#[test]
fn triangular_variants_match_dense_block_inverses() {
    let a = [4.0, 1.0, 1.0, 3.0];
    let b = [1.0, 2.0, -1.0, 0.5];
    let sys = toy(&a, &b, 2, 2);
    let ad = DMatrix::from_row_slice(2, 2, &a);
    let bd = DMatrix::from_row_slice(2, 2, &b);
    let s = DMatrix::from_row_slice(2, 2, &sys.schur().to_dense());
    let mut lower = DMatrix::zeros(4, 4);
    lower.view_mut((0, 0), (2, 2)).copy_from(&ad);
    lower.view_mut((2, 0), (2, 2)).copy_from(&(-&bd));
    lower.view_mut((2, 2), (2, 2)).copy_from(&s);
    let mut upper = DMatrix::zeros(4, 4);
    upper.view_mut((0, 0), (2, 2)).copy_from(&ad);
    upper.view_mut((0, 2), (2, 2)).copy_from(&bd.transpose());
    upper.view_mut((2, 2), (2, 2)).copy_from(&s);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (kind, m) in [(PrecondKind::Lower, lower), (PrecondKind::Upper, upper)] {
        let p = build_preconditioner(&sys, PrecondConfig::exact(kind)).unwrap();
        let inv = m.try_inverse().unwrap();
        for _ in 0..5 {
            let r: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let z = apply(&p, &r);
            let oracle = &inv * DVector::from_vec(r);
            for (x, y) in z.iter().zip(oracle.iter()) {
                assert!((x - y).abs() < 1e-8, "{kind:?}");
            }
        }
    }
}

#[test]
fn zero_in_zero_out_for_all_variants() {
    let sys = geiger(8, 1e-2);
    let pressure = Arc::new(build_pressure_block(&sys, &Default::default()).unwrap());
    assert!(pressure.amg.num_levels() >= 1);
    for pc in PrecondConfig::all() {
        let p = BlockPreconditioner::with_pressure(&sys, pressure.clone(), pc).unwrap();
        assert!(apply(&p, &vec![0.0; sys.dim()]).iter().all(|&v| v == 0.0));
    }
}

#[test]
fn block_diagonal_is_positive() {
    let sys = geiger(8, 1e-2);
    let p = build_preconditioner(&sys, PrecondConfig::exact(PrecondKind::Diag)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let r: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let z = apply(&p, &r);
        assert!(z.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() > 0.0);
    }
}

#[test]
fn triangular_field_of_values_is_positive_and_robust() {
    for name in ["BL", "BU", "ML", "MU"] {
        let mut sigmas = Vec::new();
        for gamma in [1.0, 1e-2, 1e-4] {
            let sys = geiger(8, gamma);
            let p = build_preconditioner(&sys, name.parse().unwrap()).unwrap();
            let fov = block_fov(&sys, &p, 10, 13).unwrap();
            assert!(fov.sigma > 0.0 && fov.upsilon >= fov.sigma, "{name} gamma {gamma}: {fov:?}");
            sigmas.push(fov.sigma);
        }
        let (lo, hi) = sigmas.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &s| (l.min(s), h.max(s)));
        assert!(hi / lo <= 2.0, "{name}: {sigmas:?}");
    }
}

#[test]
fn inner_work_is_counted() {
    let sys = geiger(8, 1e-2);
    let p = build_preconditioner(&sys, "ML".parse().unwrap()).unwrap();
    let (_, rep) = fgmres(&sys.operator(), &p, &sys.rhs(), 1e-6, 200);
    let st = p.stats();
    assert!(rep.converged);
    assert_eq!(st.applications, rep.iterations);
    assert!(st.flux_iterations >= st.applications && st.pressure_iterations >= st.applications);
    assert_eq!(st.failures, 0);
    p.reset_stats();
    assert_eq!(p.stats(), Default::default());
}

#[test]
fn single_precision_solve_tracks_double() {
    let sys = geiger(8, 1e-2);
    let s32: BlockSystemF32 = sys.cast();
    for name in ["MD", "ML", "MU"] {
        let pc: PrecondConfig = name.parse().unwrap();
        let p64 = Arc::new(build_pressure_block(&sys, &pc.amg).unwrap());
        let p32 = Arc::new(build_pressure_block(&s32, &pc.amg).unwrap());
        let (x64, r64) = solve(&sys, p64, pc.clone(), 1e-5, 200).unwrap();
        let (x32, r32) = solve(&s32, p32, pc, 1e-5, 200).unwrap();
        assert!(r64.converged && r32.converged, "{name}");
        assert!(r32.iterations.abs_diff(r64.iterations) <= 2, "{name}: {} vs {}", r32.iterations, r64.iterations);
        let scale = x64.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = x32.iter().zip(&x64).fold(0.0f64, |m, (a, b)| m.max((f64::from(*a) - b).abs()));
        assert!(err <= 1e-3 * scale, "{name}: {err}");
    }
}
