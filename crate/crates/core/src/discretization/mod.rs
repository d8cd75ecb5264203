//! Mixed RT0/P0 discretization of the coupled flow problem on all
//! dimensions, with mortar fluxes on the interfaces.

mod assembly;
mod dofs;
pub mod rt0;

pub use assembly::{
    assemble_system, discrete_gradient, extract_diag, schur_complement, BlockSystem, BoundaryFlux, SaddleOperator,
};
pub use dofs::{DofMap, FaceDof};
pub use rt0::local_rt0_mass;

use crate::error::{Error, Result};
use crate::geometry::MdGeometry;
use crate::meshing::MdMesh;

/// Boundary condition value on one side of the box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SideBc {
    /// Prescribed pressure.
    Dirichlet(f64),
    /// Prescribed outward normal flux density.
    Neumann(f64),
}

/// Piecewise-constant physical data.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalParams {
    /// Permeability per subdomain (ignored for points).
    pub k: Vec<f64>,
    /// Normal permeability per interface.
    pub k_nu: Vec<f64>,
    /// Aperture per interface.
    pub gamma: Vec<f64>,
    /// Source per subdomain.
    pub source: Vec<f64>,
    /// Per box side, `2 * axis + high`.
    pub bc: Vec<SideBc>,
    /// Factor applied to prescribed fluxes on each subdomain's boundary.
    pub neumann_scale: Vec<f64>,
}

impl PhysicalParams {
    /// Take fracture and interface data from the geometry; rock gets `k_rock`.
    pub fn from_geometry(geom: &MdGeometry, k_rock: f64, bc: Vec<SideBc>) -> Self {
        let n = geom.dim();
        Self {
            k: geom.subdomains.iter().map(|s| if s.dim == n { k_rock } else { s.k }).collect(),
            k_nu: geom.interfaces.iter().map(|f| f.k_nu).collect(),
            gamma: geom.interfaces.iter().map(|f| f.gamma).collect(),
            source: vec![0.0; geom.subdomains.len()],
            bc,
            neumann_scale: vec![1.0; geom.subdomains.len()],
        }
    }

    /// Same values on every fracture, intersection and interface of `mesh`.
    pub fn uniform(mesh: &MdMesh, k_rock: f64, k_f: f64, k_nu: f64, gamma: f64, bc: Vec<SideBc>) -> Self {
        let n = mesh.dim;
        let ns = mesh.subdomain_dims.len();
        let ni = mesh.interfaces.len();
        Self {
            k: mesh.subdomain_dims.iter().map(|&d| if d == n { k_rock } else { k_f }).collect(),
            k_nu: vec![k_nu; ni],
            gamma: vec![gamma; ni],
            source: vec![0.0; ns],
            bc,
            neumann_scale: vec![1.0; ns],
        }
    }

    /// Scale prescribed fluxes on a `d`-dimensional subdomain by
    /// `gamma^(n - d)`, the cross-section it represents.
    pub fn scale_neumann_by_aperture(mut self, dims: &[usize], n: usize, gamma: f64) -> Self {
        for (s, &d) in self.neumann_scale.iter_mut().zip(dims) {
            *s = gamma.powi((n - d) as i32);
        }
        self
    }

    pub fn check(&self, mesh: &MdMesh) -> Result<()> {
        let ns = mesh.subdomain_dims.len();
        let ni = mesh.interfaces.len();
        let lens = [
            ("k", self.k.len(), ns),
            ("source", self.source.len(), ns),
            ("neumann_scale", self.neumann_scale.len(), ns),
            ("k_nu", self.k_nu.len(), ni),
            ("gamma", self.gamma.len(), ni),
            ("bc", self.bc.len(), 2 * mesh.dim),
        ];
        for (name, got, expected) in lens {
            if got != expected {
                return Err(Error::InvalidParameter(format!("{name}: {got} entries, expected {expected}")));
            }
        }
        for (i, (&k, &d)) in self.k.iter().zip(&mesh.subdomain_dims).enumerate() {
            if d > 0 && !(k > 0.0 && k.is_finite()) {
                return Err(Error::InvalidParameter(format!("subdomain {i}: permeability {k}")));
            }
        }
        for i in 0..ni {
            let (kn, g) = (self.k_nu[i], self.gamma[i]);
            if !(kn > 0.0 && kn.is_finite() && g > 0.0 && g.is_finite()) {
                return Err(Error::InvalidParameter(format!("interface {i}: k_nu {kn}, gamma {g}")));
            }
        }
        Ok(())
    }
}
