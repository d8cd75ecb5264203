//! Post-solve checks: local mass conservation, global flux balance and
//! comparison against analytic fields.

use crate::discretization::{BlockSystem, FaceDof};
use crate::meshing::{MdMesh, Point};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConservationReport {
    /// Largest per-cell mass residual `|F + B w|`.
    pub max_cell_residual: f64,
    pub l2_cell_residual: f64,
    /// `‖F‖₂`.
    pub f_norm: f64,
    pub outflow: f64,
    pub inflow: f64,
    pub source: f64,
    /// `|outflow - inflow - source|`, relative to the largest of the three.
    pub balance: f64,
}

impl ConservationReport {
    /// Per-cell residuals within `10 tol ‖F‖` and balance within `balance_tol`.
    /// A system with `F = 0` is held to `10 tol` in absolute terms.
    pub fn passes(&self, tol: f64, balance_tol: f64) -> bool {
        let scale = if self.f_norm > 0.0 { self.f_norm } else { 1.0 };
        self.max_cell_residual <= 10.0 * tol * scale && self.balance <= balance_tol
    }
}

pub fn verify_solution<T: Real>(sys: &BlockSystem<T>, x: &[T]) -> ConservationReport {
    let w = &x[..sys.n_w()];
    let mut r = vec![T::zero(); sys.n_p()];
    sys.b.mul_into(w, &mut r);
    let mut max: f64 = 0.0;
    let mut sq = 0.0;
    for (ri, fi) in r.iter().zip(&sys.f) {
        let v = (*ri + *fi).as_f64().abs();
        max = max.max(v);
        sq += v * v;
    }
    let f_norm = sys.f.iter().map(|v| v.as_f64().powi(2)).sum::<f64>().sqrt();
    let (outflow, inflow) = sys.boundary_flux(w);
    let source = sys.source_total;
    let scale = outflow.max(inflow).max(source.abs());
    let gap = (outflow - inflow - source).abs();
    ConservationReport {
        max_cell_residual: max,
        l2_cell_residual: sq.sqrt(),
        f_norm,
        outflow,
        inflow,
        source,
        balance: if scale > 0.0 { gap / scale } else { gap },
    }
}

/// Flux degrees of freedom of the field `u`, using each face's normal
/// component at its centroid. Exact for constant fields.
pub fn interpolate_flux(mesh: &MdMesh, sys: &BlockSystem<f64>, u: impl Fn(&Point) -> Point) -> Vec<f64> {
    let mut w = vec![0.0; sys.n_w()];
    for d in 1..=mesh.dim {
        let lvl = &mesh.levels[d];
        for c in 0..lvl.num_cells() {
            for (i, &f) in lvl.cell_face_ids(c).iter().enumerate() {
                if let FaceDof::Dof { index, orientation } = sys.dofs.face_dof[d][f] {
                    let x = crate::meshing::centroid(&mesh.points(lvl.face(f)));
                    let n = mesh.face_normal(d, c, i);
                    let v = u(&x);
                    w[index] = orientation * (v[0] * n[0] + v[1] * n[1] + v[2] * n[2]);
                }
            }
        }
    }
    w
}

/// Largest deviation of the cell pressures from `p` at cell centroids.
pub fn pressure_error(mesh: &MdMesh, sys: &BlockSystem<f64>, x: &[f64], p: impl Fn(&Point) -> f64) -> f64 {
    let mut err: f64 = 0.0;
    for d in 0..=mesh.dim {
        for (c, &row) in sys.dofs.cell_dof[d].iter().enumerate() {
            let e = (x[sys.n_w() + row] - p(&mesh.centroid(d, c))).abs();
            err = err.max(e);
        }
    }
    err
}

/// Solve the full saddle-point system with dense LU; for small meshes.
pub fn direct_solve(sys: &BlockSystem<f64>) -> crate::Result<Vec<f64>> {
    let n = sys.dim();
    let nw = sys.n_w();
    let mut m = vec![0.0; n * n];
    for (i, j, v) in sys.a.iter() {
        m[i * n + j] = v;
    }
    for (i, j, v) in sys.b.iter() {
        m[(nw + i) * n + j] = -v;
        m[j * n + nw + i] = v;
    }
    Ok(crate::linalg::dense::DenseLu::factor(n, m)?.solve(&sys.rhs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{assemble_system, PhysicalParams, SideBc};
    use crate::geometry::{build_fracture_geometry, Domain};
    use crate::meshing::mesh_structured;

    fn linear_pressure(dim: usize, m: usize) {
        let geom = build_fracture_geometry(&Domain::unit(dim), &[]).unwrap();
        let mesh = mesh_structured(&geom, m).unwrap();
        let mut bc = vec![SideBc::Neumann(0.0); 2 * dim];
        bc[0] = SideBc::Dirichlet(1.0);
        bc[1] = SideBc::Dirichlet(0.0);
        let params = PhysicalParams::from_geometry(&geom, 1.0, bc);
        let sys = assemble_system(&mesh, &params).unwrap();
        let x = direct_solve(&sys).unwrap();
        let exact = interpolate_flux(&mesh, &sys, |_| [1.0, 0.0, 0.0]);
        let werr = x.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(werr < 1e-10, "flux error {werr}");
        assert!(pressure_error(&mesh, &sys, &x, |p| 1.0 - p[0]) < 1e-10);
        let rep = verify_solution(&sys, &x);
        assert!(rep.max_cell_residual < 1e-10);
        assert!((rep.outflow - 1.0).abs() < 1e-10 && (rep.inflow - 1.0).abs() < 1e-10);
        assert!(rep.balance < 1e-10);
    }

    #[test]
    fn linear_pressure_square() {
        linear_pressure(2, 4);
    }

    #[test]
    fn linear_pressure_cube() {
        linear_pressure(3, 2);
    }
}
