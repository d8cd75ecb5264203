use std::ops::Range;

use super::{PhysicalParams, SideBc};
use crate::error::Result;
use crate::meshing::{FaceKind, MdMesh};

/// What a mesh face contributes to the flux space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FaceDof {
    /// Unknown with this index in the flux/mortar block; the face flux is
    /// `orientation` times the unknown.
    Dof { index: usize, orientation: f64 },
    /// Eliminated face with this prescribed flux density in its global
    /// orientation.
    Fixed(f64),
}

/// Unknown numbering. Flux block: interior and Dirichlet faces for levels
/// `n..1`, then mortar cells per interface ordered by decreasing lower
/// dimension. Pressure block: cells for levels `n..0`, grouped by subdomain.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    pub n_flux: usize,
    pub n_mortar: usize,
    pub n_w: usize,
    pub n_p: usize,
    pub flux_range: Vec<Range<usize>>,
    /// Indexed by position in `mesh.mortars`.
    pub mortar_range: Vec<Range<usize>>,
    pub pressure_range: Vec<Range<usize>>,
    pub face_dof: Vec<Vec<FaceDof>>,
    /// Pressure index (within the pressure block) of every cell, per level.
    pub cell_dof: Vec<Vec<usize>>,
}

impl DofMap {
    pub fn new(mesh: &MdMesh, params: &PhysicalParams) -> Result<Self> {
        let n = mesh.dim;
        let mut face_dof: Vec<Vec<FaceDof>> = mesh.levels.iter().map(|l| vec![FaceDof::Fixed(0.0); l.num_faces()]).collect();
        let mut flux_range = vec![0..0; n + 1];
        let mut next = 0;
        for d in (1..=n).rev() {
            let lvl = &mesh.levels[d];
            let start = next;
            // Subdomain of the cell owning each boundary face.
            let mut owner = vec![usize::MAX; lvl.num_faces()];
            for c in 0..lvl.num_cells() {
                for &f in lvl.cell_face_ids(c) {
                    owner[f] = lvl.cell_subdomain[c];
                }
            }
            for f in 0..lvl.num_faces() {
                face_dof[d][f] = match lvl.face_kind[f] {
                    FaceKind::Interior => dof(&mut next),
                    FaceKind::Boundary { side } => match params.bc[side] {
                        SideBc::Dirichlet(_) => dof(&mut next),
                        SideBc::Neumann(v) => FaceDof::Fixed(v * params.neumann_scale[owner[f]]),
                    },
                    FaceKind::Tip => FaceDof::Fixed(0.0),
                    FaceKind::Slit { .. } => continue,
                };
            }
            flux_range[d] = start..next;
        }
        let n_flux = next;

        let mut order: Vec<usize> = (0..mesh.mortars.len()).collect();
        order.sort_by_key(|&g| std::cmp::Reverse(mesh.mortars[g].higher_dim));
        let mut mortar_range = vec![0..0; mesh.mortars.len()];
        for g in order {
            let grid = &mesh.mortars[g];
            let start = next;
            for j in 0..grid.len() {
                face_dof[grid.higher_dim][grid.faces[j]] = FaceDof::Dof {
                    index: next,
                    orientation: f64::from(grid.signs[j]),
                };
                next += 1;
            }
            mortar_range[g] = start..next;
        }
        let n_w = next;

        let ns = mesh.subdomain_dims.len();
        let mut cell_dof: Vec<Vec<usize>> = mesh.levels.iter().map(|l| vec![0; l.num_cells()]).collect();
        let mut pressure_range = vec![0..0; ns];
        let mut p = 0;
        for d in (0..=n).rev() {
            let lvl = &mesh.levels[d];
            let mut by_sd: Vec<Vec<usize>> = vec![Vec::new(); ns];
            for c in 0..lvl.num_cells() {
                by_sd[lvl.cell_subdomain[c]].push(c);
            }
            for (sd, cells) in by_sd.iter().enumerate() {
                if cells.is_empty() {
                    continue;
                }
                let start = p;
                for &c in cells {
                    cell_dof[d][c] = p;
                    p += 1;
                }
                pressure_range[sd] = start..p;
            }
        }
        Ok(Self {
            n_flux,
            n_mortar: n_w - n_flux,
            n_w,
            n_p: p,
            flux_range,
            mortar_range,
            pressure_range,
            face_dof,
            cell_dof,
        })
    }
}

fn dof(next: &mut usize) -> FaceDof {
    let d = FaceDof::Dof {
        index: *next,
        orientation: 1.0,
    };
    *next += 1;
    d
}
