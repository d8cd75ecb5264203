//! Conforming simplicial meshes for every subdomain dimension, with slit
//! faces along fractures and matching mortar grids.

mod io;
mod structured;

pub use io::{export_mesh, import_mesh};
pub use structured::mesh_structured;

use crate::error::{Error, Result};
use crate::geometry::MdGeometry;

pub type Point = [f64; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceKind {
    Interior,
    /// On the outer boundary; `side` is `2 * axis + high`.
    Boundary { side: usize },
    /// One copy of a duplicated face on a lower-dimensional subdomain.
    Slit { interface: usize, lower_cell: usize },
    /// Immersed fracture end.
    Tip,
}

/// Mesh of all subdomains of one dimension.
///
/// Local face `i` of a cell is the face opposite its local vertex `i`. Face
/// signs are `+1` when the cell's outward normal agrees with the face's
/// global normal. Slit, boundary and tip faces are oriented outward from
/// their only cell.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplicialMesh {
    pub dim: usize,
    pub cells: Vec<usize>,
    pub cell_subdomain: Vec<usize>,
    pub cell_measure: Vec<f64>,
    pub faces: Vec<usize>,
    pub face_kind: Vec<FaceKind>,
    pub face_measure: Vec<f64>,
    pub cell_faces: Vec<usize>,
    pub cell_face_sign: Vec<i8>,
}

impl SimplicialMesh {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            cells: Vec::new(),
            cell_subdomain: Vec::new(),
            cell_measure: Vec::new(),
            faces: Vec::new(),
            face_kind: Vec::new(),
            face_measure: Vec::new(),
            cell_faces: Vec::new(),
            cell_face_sign: Vec::new(),
        }
    }

    pub fn num_cells(&self) -> usize {
        self.cell_subdomain.len()
    }

    pub fn num_faces(&self) -> usize {
        self.face_kind.len()
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        let k = self.dim + 1;
        &self.cells[c * k..(c + 1) * k]
    }

    pub fn face(&self, f: usize) -> &[usize] {
        let k = self.dim;
        &self.faces[f * k..(f + 1) * k]
    }

    pub fn cell_face_ids(&self, c: usize) -> &[usize] {
        if self.dim == 0 {
            return &[];
        }
        let k = self.dim + 1;
        &self.cell_faces[c * k..(c + 1) * k]
    }

    pub fn cell_signs(&self, c: usize) -> &[i8] {
        if self.dim == 0 {
            return &[];
        }
        let k = self.dim + 1;
        &self.cell_face_sign[c * k..(c + 1) * k]
    }

    /// `(cell, local index)` pairs incident to every face.
    pub fn face_cells(&self) -> Vec<Vec<(usize, usize)>> {
        let mut out = vec![Vec::new(); self.num_faces()];
        for c in 0..self.num_cells() {
            for (i, &f) in self.cell_face_ids(c).iter().enumerate() {
                out[f].push((c, i));
            }
        }
        out
    }
}

/// Pairing of mortar cells on one interface with the slit faces of the
/// higher-dimensional mesh and the cells of the lower-dimensional mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct MortarGrid {
    pub interface: usize,
    /// Dimension of the higher side.
    pub higher_dim: usize,
    pub faces: Vec<usize>,
    pub signs: Vec<i8>,
    pub lower_cells: Vec<usize>,
    pub measure: Vec<f64>,
}

impl MortarGrid {
    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InterfaceLink {
    pub lower: usize,
    pub higher: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MdMesh {
    pub dim: usize,
    pub vertices: Vec<Point>,
    /// `levels[d]` holds the cells of dimension `d`.
    pub levels: Vec<SimplicialMesh>,
    pub mortars: Vec<MortarGrid>,
    pub subdomain_dims: Vec<usize>,
    pub interfaces: Vec<InterfaceLink>,
    pub h: f64,
}

impl MdMesh {
    pub fn points(&self, ids: &[usize]) -> Vec<Point> {
        ids.iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn num_mortar_cells(&self) -> usize {
        self.mortars.iter().map(MortarGrid::len).sum()
    }

    pub fn num_cells(&self) -> usize {
        self.levels.iter().map(SimplicialMesh::num_cells).sum()
    }

    /// Cell centroid.
    pub fn centroid(&self, d: usize, c: usize) -> Point {
        centroid(&self.points(self.levels[d].cell(c)))
    }

    /// Global unit normal of the face at local position `i` of cell `c` on
    /// level `d`, within the cell's affine hull.
    pub fn face_normal(&self, d: usize, c: usize, i: usize) -> Point {
        let lvl = &self.levels[d];
        let n = outward_normal(&self.points(lvl.cell(c)), i);
        let s = f64::from(lvl.cell_signs(c)[i]);
        n.map(|x| s * x)
    }

    /// Check every structural invariant; the first violation is returned as
    /// an error naming the offending entity.
    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::MeshInvariant(m));
        if self.levels.len() != self.dim + 1 {
            return bad(format!("{} levels for dimension {}", self.levels.len(), self.dim));
        }
        let nv = self.vertices.len();
        for (d, lvl) in self.levels.iter().enumerate() {
            if lvl.dim != d {
                return bad(format!("level {d} reports dimension {}", lvl.dim));
            }
            let nc = lvl.num_cells();
            let nf = lvl.num_faces();
            if lvl.cells.len() != nc * (d + 1) || lvl.cell_measure.len() != nc {
                return bad(format!("level {d}: cell arrays disagree in length"));
            }
            if d > 0 && (lvl.cell_faces.len() != nc * (d + 1) || lvl.cell_face_sign.len() != nc * (d + 1)) {
                return bad(format!("level {d}: incidence arrays disagree in length"));
            }
            if lvl.faces.len() != nf * d || lvl.face_measure.len() != nf {
                return bad(format!("level {d}: face arrays disagree in length"));
            }
            for c in 0..nc {
                let v = lvl.cell(c);
                if let Some(&x) = v.iter().find(|&&x| x >= nv) {
                    return bad(format!("level {d} cell {c}: vertex {x} does not exist"));
                }
                let pts = self.points(v);
                let vol = if d == self.dim { signed_volume(&pts) } else { simplex_measure(&pts) };
                if !(vol > 0.0) {
                    return bad(format!("level {d} cell {c}: nonpositive volume {vol:e}"));
                }
                if (vol - lvl.cell_measure[c]).abs() > 1e-12 * vol {
                    return bad(format!("level {d} cell {c}: stored measure disagrees with geometry"));
                }
                if lvl.cell_subdomain[c] >= self.subdomain_dims.len() || self.subdomain_dims[lvl.cell_subdomain[c]] != d {
                    return bad(format!("level {d} cell {c}: subdomain tag of wrong dimension"));
                }
                for (i, (&f, &s)) in lvl.cell_face_ids(c).iter().zip(lvl.cell_signs(c)).enumerate() {
                    if f >= nf {
                        return bad(format!("level {d} cell {c}: face {f} does not exist"));
                    }
                    if s != 1 && s != -1 {
                        return bad(format!("level {d} cell {c}: sign {s}"));
                    }
                    let mut expect: Vec<usize> = v.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x).collect();
                    let mut got = lvl.face(f).to_vec();
                    expect.sort_unstable();
                    got.sort_unstable();
                    if expect != got {
                        return bad(format!("level {d} cell {c}: local face {i} does not match face {f}"));
                    }
                }
            }
            for f in 0..nf {
                let m = simplex_measure(&self.points(lvl.face(f)));
                if !(m > 0.0) || (m - lvl.face_measure[f]).abs() > 1e-12 * m {
                    return bad(format!("level {d} face {f}: bad measure"));
                }
            }
            for (f, inc) in lvl.face_cells().iter().enumerate() {
                let signs: Vec<i8> = inc.iter().map(|&(c, i)| lvl.cell_signs(c)[i]).collect();
                let ok = match lvl.face_kind[f] {
                    FaceKind::Interior => signs.len() == 2 && signs[0] == -signs[1],
                    _ => signs == [1],
                };
                if !ok {
                    return bad(format!("level {d} face {f}: incidence {signs:?} inconsistent with {:?}", lvl.face_kind[f]));
                }
            }
        }
        for (k, link) in self.interfaces.iter().enumerate() {
            let ns = self.subdomain_dims.len();
            if link.lower >= ns || link.higher >= ns || self.subdomain_dims[link.higher] != self.subdomain_dims[link.lower] + 1 {
                return bad(format!("interface {k}: invalid subdomain pair"));
            }
        }
        check_mortars(self)
    }
}

fn check_mortars(mesh: &MdMesh) -> Result<()> {
    let bad = |m: String| Err(Error::MeshInvariant(m));
    let mut used: Vec<Vec<bool>> = mesh.levels.iter().map(|l| vec![false; l.num_faces()]).collect();
    for (g, grid) in mesh.mortars.iter().enumerate() {
        let Some(link) = mesh.interfaces.get(grid.interface) else {
            return bad(format!("mortar grid {g}: interface {} does not exist", grid.interface));
        };
        let d = grid.higher_dim;
        if d == 0 || d > mesh.dim || mesh.subdomain_dims[link.higher] != d {
            return bad(format!("mortar grid {g}: higher dimension {d} inconsistent"));
        }
        let n = grid.len();
        if grid.signs.len() != n || grid.lower_cells.len() != n || grid.measure.len() != n {
            return bad(format!("mortar grid {g}: arrays disagree in length"));
        }
        let (hi, lo) = (&mesh.levels[d], &mesh.levels[d - 1]);
        let mut seen = std::collections::HashSet::new();
        for j in 0..n {
            let (f, c) = (grid.faces[j], grid.lower_cells[j]);
            if f >= hi.num_faces() {
                return bad(format!("mortar grid {g} cell {j}: face {f} does not exist"));
            }
            if c >= lo.num_cells() {
                return bad(format!("mortar grid {g} cell {j}: lower cell {c} does not exist"));
            }
            if !matches!(hi.face_kind[f], FaceKind::Slit { interface, lower_cell } if interface == grid.interface && lower_cell == c) {
                return bad(format!("mortar grid {g} cell {j}: face {f} is not the matching slit"));
            }
            if used[d][f] || !seen.insert(c) {
                return bad(format!("mortar grid {g} cell {j}: pairing is not injective"));
            }
            used[d][f] = true;
            if lo.cell_subdomain[c] != link.lower {
                return bad(format!("mortar grid {g} cell {j}: lower cell outside subdomain {}", link.lower));
            }
            let m = grid.measure[j];
            let tol = 1e-12 * m.abs().max(1e-300);
            if (m - hi.face_measure[f]).abs() > tol || (m - lo.cell_measure[c]).abs() > tol {
                return bad(format!("mortar grid {g} cell {j}: measures do not match"));
            }
        }
    }
    for (d, lvl) in mesh.levels.iter().enumerate() {
        for f in 0..lvl.num_faces() {
            if matches!(lvl.face_kind[f], FaceKind::Slit { .. }) && !used[d][f] {
                return bad(format!("level {d} slit face {f} has no mortar cell"));
            }
        }
    }
    Ok(())
}

/// Group the slit faces of every level into one mortar grid per interface of
/// `geom`. Mortar cells follow face order within each level.
pub fn build_mortar_grids(mut mesh: MdMesh, geom: &MdGeometry) -> Result<MdMesh> {
    let mut grids: Vec<MortarGrid> = geom
        .interfaces
        .iter()
        .enumerate()
        .map(|(k, f)| MortarGrid {
            interface: k,
            higher_dim: geom.subdomains[f.higher].dim,
            faces: Vec::new(),
            signs: Vec::new(),
            lower_cells: Vec::new(),
            measure: Vec::new(),
        })
        .collect();
    for d in 1..=mesh.dim {
        let (hi, lo) = (&mesh.levels[d], &mesh.levels[d - 1]);
        for f in 0..hi.num_faces() {
            let FaceKind::Slit { interface, lower_cell } = hi.face_kind[f] else { continue };
            let grid = grids
                .get_mut(interface)
                .ok_or_else(|| Error::Matching(format!("level {d} face {f}: unknown interface {interface}")))?;
            if grid.higher_dim != d {
                return Err(Error::Matching(format!("level {d} face {f}: interface {interface} has the wrong dimension")));
            }
            let (mf, mc) = (hi.face_measure[f], lo.cell_measure[lower_cell]);
            if (mf - mc).abs() > 1e-12 * mf {
                return Err(Error::Matching(format!(
                    "level {d} face {f}: measure {mf} against lower cell {lower_cell} measure {mc}"
                )));
            }
            grid.faces.push(f);
            grid.signs.push(1);
            grid.lower_cells.push(lower_cell);
            grid.measure.push(mf);
        }
    }
    if let Some(g) = grids.iter().find(|g| g.is_empty()) {
        return Err(Error::Matching(format!("interface {} has no mortar cells", g.interface)));
    }
    mesh.mortars = grids;
    check_mortars(&mesh)?;
    Ok(mesh)
}

pub fn centroid(p: &[Point]) -> Point {
    let mut c = [0.0; 3];
    for q in p {
        for a in 0..3 {
            c[a] += q[a];
        }
    }
    let k = p.len() as f64;
    c.map(|x| x / k)
}

fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

/// Unsigned `d`-volume of a simplex with `d + 1` vertices in R³ (1 for a
/// point).
pub fn simplex_measure(p: &[Point]) -> f64 {
    let d = p.len() - 1;
    let e: Vec<Point> = p[1..].iter().map(|q| sub(q, &p[0])).collect();
    let g = |i: usize, j: usize| dot3(&e[i], &e[j]);
    let det = match d {
        0 => 1.0,
        1 => g(0, 0),
        2 => g(0, 0) * g(1, 1) - g(0, 1) * g(0, 1),
        3 => {
            g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1)) - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
                + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0))
        }
        _ => panic!("simplex of dimension {d}"),
    };
    det.max(0.0).sqrt() / factorial(d)
}

/// Signed volume of a full-dimensional simplex in 2D (z ignored) or 3D.
pub fn signed_volume(p: &[Point]) -> f64 {
    match p.len() {
        3 => {
            let (a, b) = (sub(&p[1], &p[0]), sub(&p[2], &p[0]));
            0.5 * (a[0] * b[1] - a[1] * b[0])
        }
        4 => {
            let (a, b, c) = (sub(&p[1], &p[0]), sub(&p[2], &p[0]), sub(&p[3], &p[0]));
            (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0]))
                / 6.0
        }
        _ => simplex_measure(p),
    }
}

/// Outward unit normal of the face opposite vertex `i`, within the affine
/// hull of the simplex.
pub fn outward_normal(p: &[Point], i: usize) -> Point {
    let others: Vec<Point> = p.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, q)| *q).collect();
    let base = others[0];
    // Orthonormal basis of the face directions by Gram-Schmidt.
    let mut basis: Vec<Point> = Vec::new();
    for q in &others[1..] {
        let mut v = sub(q, &base);
        for b in &basis {
            let t = dot3(&v, b);
            for a in 0..3 {
                v[a] -= t * b[a];
            }
        }
        let nv = dot3(&v, &v).sqrt();
        basis.push(v.map(|x| x / nv));
    }
    let mut n = sub(&base, &p[i]);
    for b in &basis {
        let t = dot3(&n, b);
        for a in 0..3 {
            n[a] -= t * b[a];
        }
    }
    let nn = dot3(&n, &n).sqrt();
    n.map(|x| x / nn)
}
