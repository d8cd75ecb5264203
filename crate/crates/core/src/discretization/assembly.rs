use super::dofs::{DofMap, FaceDof};
use super::rt0::local_rt0_mass;
use super::{PhysicalParams, SideBc};
use crate::error::{Error, Result};
use crate::linalg::{LinearOperator, SparseMatrix};
use crate::meshing::{FaceKind, MdMesh};
use crate::scalar::Real;

/// Face on the outer boundary of some level, kept for flux balances.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryFlux {
    pub level: usize,
    pub face: usize,
    pub side: usize,
    pub measure: f64,
    pub flux: FaceDof,
}

/// Saddle-point system `[[A, Bᵀ], [-B, 0]] [w; p] = [G; F]`.
#[derive(Clone, Debug)]
pub struct BlockSystem<T> {
    pub a: SparseMatrix<T>,
    pub b: SparseMatrix<T>,
    pub bt: SparseMatrix<T>,
    pub d_a: Vec<T>,
    pub g: Vec<T>,
    pub f: Vec<T>,
    pub dofs: DofMap,
    pub boundary: Vec<BoundaryFlux>,
    /// Integrated source over all cells.
    pub source_total: f64,
}

impl<T: Real> BlockSystem<T> {
    pub fn n_w(&self) -> usize {
        self.dofs.n_w
    }

    pub fn n_p(&self) -> usize {
        self.dofs.n_p
    }

    pub fn dim(&self) -> usize {
        self.dofs.n_w + self.dofs.n_p
    }

    pub fn rhs(&self) -> Vec<T> {
        self.g.iter().chain(&self.f).copied().collect()
    }

    /// Right-hand side of the symmetric form `[[A, Bᵀ], [B, 0]]`.
    pub fn symmetric_rhs(&self) -> Vec<T> {
        self.g.iter().copied().chain(self.f.iter().map(|&x| -x)).collect()
    }

    pub fn operator(&self) -> SaddleOperator<'_, T> {
        SaddleOperator {
            sys: self,
            symmetric: false,
        }
    }

    pub fn symmetric_operator(&self) -> SaddleOperator<'_, T> {
        SaddleOperator {
            sys: self,
            symmetric: true,
        }
    }

    pub fn schur(&self) -> SparseMatrix<T> {
        schur_complement(&self.b, &self.d_a)
    }

    pub fn cast<U: Real>(&self) -> BlockSystem<U> {
        let c = |v: &[T]| v.iter().map(|x| U::of(x.as_f64())).collect();
        BlockSystem {
            a: self.a.map_values(|x| U::of(x.as_f64())),
            b: self.b.map_values(|x| U::of(x.as_f64())),
            bt: self.bt.map_values(|x| U::of(x.as_f64())),
            d_a: c(&self.d_a),
            g: c(&self.g),
            f: c(&self.f),
            dofs: self.dofs.clone(),
            boundary: self.boundary.clone(),
            source_total: self.source_total,
        }
    }

    /// Total outward flux through the outer boundary of every level, split
    /// into outflow and inflow magnitudes.
    pub fn boundary_flux(&self, w: &[T]) -> (f64, f64) {
        let mut out = 0.0;
        let mut inflow = 0.0;
        for bf in &self.boundary {
            let q = match bf.flux {
                FaceDof::Dof { index, orientation } => orientation * w[index].as_f64(),
                FaceDof::Fixed(v) => v,
            } * bf.measure;
            if q >= 0.0 {
                out += q;
            } else {
                inflow -= q;
            }
        }
        (out, inflow)
    }
}

/// Matrix-free block operator of a [`BlockSystem`].
pub struct SaddleOperator<'a, T> {
    sys: &'a BlockSystem<T>,
    symmetric: bool,
}

impl<T: Real> LinearOperator<T> for SaddleOperator<'_, T> {
    fn dim(&self) -> usize {
        self.sys.dim()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        let nw = self.sys.n_w();
        let (xw, xp) = x.split_at(nw);
        let (yw, yp) = y.split_at_mut(nw);
        self.sys.a.mul_into(xw, yw);
        self.sys.bt.mul_add_into(T::one(), xp, yw);
        self.sys.b.mul_into(xw, yp);
        if !self.symmetric {
            yp.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// Assemble the coupled system on all levels of `mesh`.
pub fn assemble_system(mesh: &MdMesh, params: &PhysicalParams) -> Result<BlockSystem<f64>> {
    params.check(mesh)?;
    let dofs = DofMap::new(mesh, params)?;
    let (nw, np) = (dofs.n_w, dofs.n_p);
    let mut at = Vec::new();
    let mut bt = Vec::new();
    let mut g = vec![0.0; nw];
    let mut f = vec![0.0; np];
    let mut boundary = Vec::new();
    let mut source_total = 0.0;

    for d in 1..=mesh.dim {
        let lvl = &mesh.levels[d];
        for c in 0..lvl.num_cells() {
            let sd = lvl.cell_subdomain[c];
            let m = local_rt0_mass(&mesh.points(lvl.cell(c)), params.k[sd])
                .map_err(|e| Error::Assembly(format!("level {d} cell {c}: {e}")))?;
            let faces = lvl.cell_face_ids(c);
            let signs = lvl.cell_signs(c);
            let k = d + 1;
            let row = dofs.cell_dof[d][c];
            for i in 0..k {
                let si = f64::from(signs[i]);
                let fi = faces[i];
                let bij = -si * lvl.face_measure[fi];
                match dofs.face_dof[d][fi] {
                    FaceDof::Dof { index, orientation } => {
                        bt.push((row, index, bij * orientation));
                        for j in 0..k {
                            let sj = f64::from(signs[j]);
                            let v = si * sj * orientation * m[i * k + j];
                            match dofs.face_dof[d][faces[j]] {
                                FaceDof::Dof {
                                    index: jdx,
                                    orientation: oj,
                                } => at.push((index, jdx, v * oj)),
                                FaceDof::Fixed(w) => g[index] -= v * w,
                            }
                        }
                    }
                    FaceDof::Fixed(w) => f[row] += bij * w,
                }
            }
            f[row] += params.source[sd] * lvl.cell_measure[c];
            source_total += params.source[sd] * lvl.cell_measure[c];
        }
        for fi in 0..lvl.num_faces() {
            let FaceKind::Boundary { side } = lvl.face_kind[fi] else { continue };
            boundary.push(BoundaryFlux {
                level: d,
                face: fi,
                side,
                measure: lvl.face_measure[fi],
                flux: dofs.face_dof[d][fi],
            });
            if let (SideBc::Dirichlet(p), FaceDof::Dof { index, orientation }) = (params.bc[side], dofs.face_dof[d][fi]) {
                g[index] -= p * lvl.face_measure[fi] * orientation;
            }
        }
    }
    for (c, &row) in dofs.cell_dof[0].iter().enumerate() {
        f[row] += params.source[mesh.levels[0].cell_subdomain[c]];
        source_total += params.source[mesh.levels[0].cell_subdomain[c]];
    }

    for (gi, grid) in mesh.mortars.iter().enumerate() {
        let coef = params.gamma[grid.interface] / params.k_nu[grid.interface];
        let lower = &dofs.cell_dof[grid.higher_dim - 1];
        for (j, idx) in dofs.mortar_range[gi].clone().enumerate() {
            at.push((idx, idx, coef * grid.measure[j]));
            bt.push((lower[grid.lower_cells[j]], idx, grid.measure[j]));
        }
    }

    let a = SparseMatrix::from_triplets(nw, nw, &at)?;
    let b = SparseMatrix::from_triplets(np, nw, &bt)?;
    let d_a = extract_diag(&a)?;
    Ok(BlockSystem {
        bt: b.transpose(),
        a,
        b,
        d_a,
        g,
        f,
        dofs,
        boundary,
        source_total,
    })
}

/// Diagonal of `A`; every entry must be positive.
pub fn extract_diag<T: Real>(a: &SparseMatrix<T>) -> Result<Vec<T>> {
    let d = a.diagonal();
    if let Some(i) = d.iter().position(|&x| !(x > T::zero())) {
        return Err(Error::Assembly(format!("nonpositive diagonal entry {:e} at row {i}", d[i])));
    }
    Ok(d)
}

/// `S = B D_A⁻¹ Bᵀ`, exactly symmetric.
pub fn schur_complement<T: Real>(b: &SparseMatrix<T>, d_a: &[T]) -> SparseMatrix<T> {
    let inv: Vec<T> = d_a.iter().map(|&x| T::one() / x).collect();
    b.scaled_gram(&inv)
}

/// `D_h q = D_A⁻¹ Bᵀ q`.
pub fn discrete_gradient<T: Real>(sys: &BlockSystem<T>, q: &[T]) -> Vec<T> {
    let mut w = vec![T::zero(); sys.n_w()];
    sys.bt.mul_into(q, &mut w);
    for (x, &d) in w.iter_mut().zip(&sys.d_a) {
        *x /= d;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schur_by_hand() {
        let b = SparseMatrix::from_dense(1, 2, &[1.0, -1.0]);
        let s = schur_complement(&b, &[2.0, 2.0]);
        assert_eq!(s.to_dense(), vec![1.0]);
    }

    #[test]
    fn diagonal_of_scalar() {
        let a = SparseMatrix::from_dense(1, 1, &[3.5]);
        assert_eq!(extract_diag(&a).unwrap(), vec![3.5]);
        let z = SparseMatrix::from_dense(1, 1, &[0.0]);
        assert!(extract_diag(&z).is_err());
    }
}
