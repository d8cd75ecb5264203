//! Benchmark networks on the unit square and cube.
//!
//! 2D: the lines x = 1/2 and y = 1/2 cross the whole square; x = 3/4 and
//! y = 3/4 span the upper-right quarter; x = 5/8 and y = 5/8 span the
//! lower-left sixteenth of that quarter, [1/2, 3/4]². Together they cut the
//! rock into 10 pieces.
//!
//! 3D: the same construction with planes: x, y, z = 1/2 through the whole
//! cube, planes at 3/4 inside [1/2, 1]³ and planes at 5/8 inside
//! [1/2, 3/4]³, nine planes in total.
//!
//! Boundary conditions: outward flux -1 on x = 0, unit pressure on x = 1,
//! no flow elsewhere, on every dimension. Prescribed fluxes on a
//! `d`-dimensional subdomain are scaled by `gamma^(n-d)`.

use crate::discretization::{PhysicalParams, SideBc};
use crate::error::{Error, Result};
use crate::geometry::{build_fracture_geometry, BcKind, Domain, FractureSpec, MdGeometry};

pub const INFLOW: f64 = -1.0;
pub const OUTLET_PRESSURE: f64 = 1.0;

pub fn geiger2d_fractures(gamma: f64, k_f: f64, k_nu: f64) -> Vec<FractureSpec> {
    let s = |p: [f64; 2], q: [f64; 2]| FractureSpec::segment(p, q).with_params(gamma, k_f, k_nu);
    vec![
        s([0.0, 0.5], [1.0, 0.5]),
        s([0.5, 0.0], [0.5, 1.0]),
        s([0.5, 0.75], [1.0, 0.75]),
        s([0.75, 0.5], [0.75, 1.0]),
        s([0.5, 0.625], [0.75, 0.625]),
        s([0.625, 0.5], [0.625, 0.75]),
    ]
}

pub fn geiger3d_fractures(gamma: f64, k_f: f64, k_nu: f64) -> Vec<FractureSpec> {
    let mut out = Vec::new();
    for (c, lo, hi) in [(0.5, 0.0, 1.0), (0.75, 0.5, 1.0), (0.625, 0.5, 0.75)] {
        for axis in 0..3 {
            let mut a = [lo; 3];
            let mut b = [hi; 3];
            a[axis] = c;
            b[axis] = c;
            out.push(FractureSpec::rectangle(a, b).with_params(gamma, k_f, k_nu));
        }
    }
    out
}

fn flow_domain(dim: usize) -> Domain {
    let mut d = Domain::unit(dim);
    for kind in d.bc.iter_mut() {
        *kind = BcKind::Neumann;
    }
    d.with_bc(0, true, BcKind::Dirichlet)
}

/// Side values matching [`flow_domain`].
pub fn flow_bc(dim: usize) -> Vec<SideBc> {
    let mut bc = vec![SideBc::Neumann(0.0); 2 * dim];
    bc[0] = SideBc::Neumann(INFLOW);
    bc[1] = SideBc::Dirichlet(OUTLET_PRESSURE);
    bc
}

fn check_m(m: usize) -> Result<()> {
    if m == 0 || m % 8 != 0 {
        return Err(Error::Conformity(format!("m = {m}: the network needs m to be a multiple of 8")));
    }
    Ok(())
}

fn build(dim: usize, fr: Vec<FractureSpec>, gamma: f64) -> Result<(MdGeometry, PhysicalParams)> {
    let geom = build_fracture_geometry(&flow_domain(dim), &fr)?;
    let dims: Vec<usize> = geom.subdomains.iter().map(|s| s.dim).collect();
    let params = PhysicalParams::from_geometry(&geom, 1.0, flow_bc(dim)).scale_neumann_by_aperture(&dims, dim, gamma);
    Ok((geom, params))
}

pub fn case_geiger2d(m: usize, gamma: f64, k_f: f64, k_nu: f64) -> Result<(MdGeometry, PhysicalParams)> {
    check_m(m)?;
    build(2, geiger2d_fractures(gamma, k_f, k_nu), gamma)
}

pub fn case_geiger3d(m: usize, gamma: f64, k_f: f64, k_nu: f64) -> Result<(MdGeometry, PhysicalParams)> {
    check_m(m)?;
    build(3, geiger3d_fractures(gamma, k_f, k_nu), gamma)
}
