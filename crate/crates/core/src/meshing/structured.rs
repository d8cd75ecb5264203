use std::collections::HashMap;

use super::{build_mortar_grids, signed_volume, simplex_measure, FaceKind, InterfaceLink, MdMesh, Point, SimplicialMesh};
use crate::error::{Error, Result};
use crate::geometry::{side_index, MdGeometry, Side};

/// Uniform lattice with `m` cells per unit length, aligned with the
/// compressed grid of the geometry.
struct Lattice {
    n: usize,
    cells: [usize; 3],
    /// Per axis and lattice index: coordinate index if it is a grid vertex.
    vertex: Vec<Vec<Option<usize>>>,
    /// Per axis and lattice cell: interval index containing it.
    interval: Vec<Vec<usize>>,
}

impl Lattice {
    fn new(geom: &MdGeometry, m: usize) -> Result<Self> {
        let n = geom.dim();
        let mut cells = [0; 3];
        let mut vertex = Vec::new();
        let mut interval = Vec::new();
        for a in 0..n {
            let lo = geom.domain.lo[a];
            let t = geom.domain.extent(a) * m as f64;
            if (t - t.round()).abs() > 1e-9 {
                return Err(Error::Conformity(format!(
                    "domain extent {} along axis {a} is not a multiple of 1/{m}",
                    geom.domain.extent(a)
                )));
            }
            cells[a] = t.round() as usize;
            let mut lat = Vec::new();
            for &c in &geom.grid.coords[a] {
                let t = (c - lo) * m as f64;
                if (t - t.round()).abs() > 1e-9 {
                    return Err(Error::Conformity(format!("coordinate {c} on axis {a} is not a multiple of 1/{m}")));
                }
                lat.push(t.round() as usize);
            }
            if lat.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Resolution(format!("m = {m} leaves a subdomain without cells along axis {a}")));
            }
            let mut v = vec![None; cells[a] + 1];
            for (k, &i) in lat.iter().enumerate() {
                v[i] = Some(k);
            }
            let mut iv = vec![0; cells[a]];
            for k in 0..lat.len() - 1 {
                for slot in &mut iv[lat[k]..lat[k + 1]] {
                    *slot = k;
                }
            }
            vertex.push(v);
            interval.push(iv);
        }
        Ok(Self {
            n,
            cells,
            vertex,
            interval,
        })
    }

    fn num_vertices(&self) -> usize {
        (0..self.n).map(|a| self.cells[a] + 1).product()
    }

    fn vertex_id(&self, ijk: [usize; 3]) -> usize {
        let mut id = 0;
        for a in (0..self.n).rev() {
            id = id * (self.cells[a] + 1) + ijk[a];
        }
        id
    }

    fn coords(&self, mut id: usize) -> [usize; 3] {
        let mut ijk = [0; 3];
        for (a, slot) in ijk.iter_mut().enumerate().take(self.n) {
            *slot = id % (self.cells[a] + 1);
            id /= self.cells[a] + 1;
        }
        ijk
    }

    /// Half index of the grid entity containing the relative interior of the
    /// simplex spanned by `verts`.
    fn half_index(&self, verts: &[usize]) -> [usize; 3] {
        let mut lo = [usize::MAX; 3];
        let mut hi = [0; 3];
        for &v in verts {
            let c = self.coords(v);
            for a in 0..self.n {
                lo[a] = lo[a].min(c[a]);
                hi[a] = hi[a].max(c[a]);
            }
        }
        let mut h = [0; 3];
        for a in 0..self.n {
            h[a] = if lo[a] == hi[a] {
                match self.vertex[a][lo[a]] {
                    Some(k) => 2 * k,
                    None => 2 * self.interval[a][lo[a]] + 1,
                }
            } else {
                debug_assert_eq!(self.interval[a][lo[a]], self.interval[a][hi[a] - 1]);
                2 * self.interval[a][lo[a]] + 1
            };
        }
        h
    }
}

struct Classifier<'a> {
    geom: &'a MdGeometry,
    lattice: Lattice,
    interfaces: HashMap<(usize, usize, Side), usize>,
}

impl Classifier<'_> {
    fn entity(&self, verts: &[usize]) -> usize {
        self.geom.grid.entity_index(&self.lattice.half_index(verts))
    }

    fn local_dim(&self, verts: &[usize]) -> usize {
        self.geom.local_dim[self.entity(verts)]
    }

    fn subdomain(&self, verts: &[usize]) -> Result<usize> {
        let e = self.entity(verts);
        self.geom.entity_subdomain[e]
            .ok_or_else(|| Error::MeshInvariant(format!("simplex {verts:?} is not inside a subdomain of its dimension")))
    }

    fn boundary_side(&self, verts: &[usize]) -> Option<usize> {
        let l = &self.lattice;
        let c: Vec<[usize; 3]> = verts.iter().map(|&v| l.coords(v)).collect();
        for a in 0..l.n {
            if c.iter().all(|x| x[a] == 0) {
                return Some(side_index(a, false));
            }
            if c.iter().all(|x| x[a] == l.cells[a]) {
                return Some(side_index(a, true));
            }
        }
        None
    }

    /// Side of the slit face `face` on which the cell with opposite vertex
    /// `opp` lies.
    fn side(&self, face: &[usize], opp: usize) -> Side {
        let l = &self.lattice;
        let fc: Vec<[usize; 3]> = face.iter().map(|&v| l.coords(v)).collect();
        let oc = l.coords(opp);
        for a in 0..l.n {
            if fc.iter().all(|x| x[a] == fc[0][a]) && oc[a] != fc[0][a] {
                return Side {
                    axis: a,
                    positive: oc[a] > fc[0][a],
                };
            }
        }
        unreachable!("slit face is axis-aligned")
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Uniform Kuhn triangulation of the domain with `m` cells per unit length,
/// slit along every fracture, with matching meshes on all lower-dimensional
/// subdomains and the mortar grids between them.
pub fn mesh_structured(geom: &MdGeometry, m: usize) -> Result<MdMesh> {
    if m < 2 {
        return Err(Error::Resolution(format!("m = {m}; at least 2 cells per unit length are required")));
    }
    let n = geom.dim();
    let lattice = Lattice::new(geom, m)?;
    let vertices: Vec<Point> = (0..lattice.num_vertices())
        .map(|id| {
            let c = lattice.coords(id);
            let mut p = [0.0; 3];
            for a in 0..n {
                p[a] = geom.domain.lo[a] + c[a] as f64 / m as f64;
            }
            p
        })
        .collect();
    let interfaces = geom
        .interfaces
        .iter()
        .enumerate()
        .map(|(k, f)| ((f.higher, f.lower, f.side), k))
        .collect();
    let cls = Classifier {
        geom,
        lattice,
        interfaces,
    };

    // Top-dimensional cells, positively oriented.
    let perms = permutations(n);
    let mut cells = Vec::new();
    let mut ncube = 1;
    for a in 0..n {
        ncube *= cls.lattice.cells[a];
    }
    for q in 0..ncube {
        let mut base = [0; 3];
        let mut r = q;
        for (a, slot) in base.iter_mut().enumerate().take(n) {
            *slot = r % cls.lattice.cells[a];
            r /= cls.lattice.cells[a];
        }
        for p in &perms {
            let mut cur = base;
            let mut tet = vec![cls.lattice.vertex_id(cur)];
            for &a in p {
                cur[a] += 1;
                tet.push(cls.lattice.vertex_id(cur));
            }
            let pts: Vec<Point> = tet.iter().map(|&v| vertices[v]).collect();
            if signed_volume(&pts) < 0.0 {
                tet.swap(n - 1, n);
            }
            cells.push(tet);
        }
    }

    let mut levels: Vec<SimplicialMesh> = (0..=n).map(SimplicialMesh::empty).collect();
    let mut current = cells;
    for d in (1..=n).rev() {
        let (mesh, lower) = build_level(d, &current, &vertices, &cls)?;
        levels[d] = mesh;
        current = lower;
    }
    let mut points = SimplicialMesh::empty(0);
    for c in &current {
        points.cells.push(c[0]);
        points.cell_subdomain.push(cls.subdomain(c)?);
        points.cell_measure.push(1.0);
    }
    levels[0] = points;

    let mesh = MdMesh {
        dim: n,
        vertices,
        levels,
        mortars: Vec::new(),
        subdomain_dims: geom.subdomains.iter().map(|s| s.dim).collect(),
        interfaces: geom
            .interfaces
            .iter()
            .map(|f| InterfaceLink {
                lower: f.lower,
                higher: f.higher,
            })
            .collect(),
        h: 1.0 / m as f64,
    };
    let mesh = build_mortar_grids(mesh, geom)?;
    mesh.check()?;
    Ok(mesh)
}

/// Build the faces of the level-`d` mesh. Returns the mesh and the cells of
/// level `d - 1` in order of first appearance.
fn build_level(d: usize, cells: &[Vec<usize>], vertices: &[Point], cls: &Classifier) -> Result<(SimplicialMesh, Vec<Vec<usize>>)> {
    let mut mesh = SimplicialMesh::empty(d);
    for c in cells {
        let pts: Vec<Point> = c.iter().map(|&v| vertices[v]).collect();
        mesh.cells.extend(c);
        mesh.cell_subdomain.push(cls.subdomain(c)?);
        mesh.cell_measure.push(simplex_measure(&pts));
    }
    let nc = cells.len();
    mesh.cell_faces = vec![usize::MAX; nc * (d + 1)];
    mesh.cell_face_sign = vec![0; nc * (d + 1)];

    let mut slot: HashMap<[usize; 3], usize> = HashMap::new();
    let mut keys: Vec<Vec<usize>> = Vec::new();
    let mut incident: Vec<Vec<(usize, usize)>> = Vec::new();
    for (c, cell) in cells.iter().enumerate() {
        for i in 0..=d {
            let mut key: Vec<usize> = cell.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
            key.sort_unstable();
            let mut k3 = [usize::MAX; 3];
            k3[..d].copy_from_slice(&key);
            let s = *slot.entry(k3).or_insert_with(|| {
                keys.push(key);
                incident.push(Vec::new());
                keys.len() - 1
            });
            incident[s].push((c, i));
        }
    }

    let mut lower: Vec<Vec<usize>> = Vec::new();
    for (key, inc) in keys.iter().zip(&incident) {
        let pts: Vec<Point> = key.iter().map(|&v| vertices[v]).collect();
        let measure = simplex_measure(&pts);
        let push = |mesh: &mut SimplicialMesh, kind: FaceKind, cells: &[(usize, usize, i8)]| {
            let f = mesh.face_kind.len();
            mesh.faces.extend(key);
            mesh.face_kind.push(kind);
            mesh.face_measure.push(measure);
            for &(c, i, s) in cells {
                mesh.cell_faces[c * (d + 1) + i] = f;
                mesh.cell_face_sign[c * (d + 1) + i] = s;
            }
        };
        if cls.local_dim(key) < d {
            let lower_cell = lower.len();
            let lower_sd = cls.subdomain(key)?;
            lower.push(key.clone());
            for &(c, i) in inc {
                let higher = mesh.cell_subdomain[c];
                let side = cls.side(key, cells[c][i]);
                let interface = *cls.interfaces.get(&(higher, lower_sd, side)).ok_or_else(|| {
                    Error::MeshInvariant(format!("slit {key:?} has no interface between {higher} and {lower_sd}"))
                })?;
                push(&mut mesh, FaceKind::Slit { interface, lower_cell }, &[(c, i, 1)]);
            }
            continue;
        }
        match inc.as_slice() {
            &[(c0, i0), (c1, i1)] => push(&mut mesh, FaceKind::Interior, &[(c0, i0, 1), (c1, i1, -1)]),
            &[(c, i)] => {
                let kind = match cls.boundary_side(key) {
                    Some(side) => FaceKind::Boundary { side },
                    None => FaceKind::Tip,
                };
                push(&mut mesh, kind, &[(c, i, 1)]);
            }
            _ => {
                return Err(Error::MeshInvariant(format!(
                    "face {key:?} on level {d} has {} incident cells",
                    inc.len()
                )))
            }
        }
    }
    Ok((mesh, lower))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_fracture_geometry, Domain, FractureSpec};

    #[test]
    fn plain_square_counts() {
        let g = build_fracture_geometry(&Domain::unit(2), &[]).unwrap();
        let m = mesh_structured(&g, 4).unwrap();
        assert_eq!(m.vertices.len(), 25);
        assert_eq!(m.levels[2].num_faces(), 56);
        assert_eq!(m.levels[2].num_cells(), 32);
        assert_eq!(m.levels[1].num_cells() + m.levels[0].num_cells(), 0);
    }

    #[test]
    fn single_fracture_counts() {
        let f = [FractureSpec::segment([0.5, 0.0], [0.5, 1.0])];
        let g = build_fracture_geometry(&Domain::unit(2), &f).unwrap();
        let m = mesh_structured(&g, 4).unwrap();
        assert_eq!(m.levels[1].num_cells(), 4);
        assert_eq!(m.levels[2].num_faces(), 60);
        assert_eq!(m.mortars.len(), 2);
        assert!(m.mortars.iter().all(|g| g.len() == 4));
    }

    #[test]
    fn misaligned_fracture() {
        let f = [FractureSpec::segment([0.3, 0.0], [0.3, 1.0])];
        let g = build_fracture_geometry(&Domain::unit(2), &f).unwrap();
        match mesh_structured(&g, 4) {
            Err(Error::Conformity(msg)) => assert!(msg.contains("0.3")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(mesh_structured(&g, 1), Err(Error::Resolution(_))));
    }

    #[test]
    fn kuhn_cube() {
        let g = build_fracture_geometry(&Domain::unit(3), &[]).unwrap();
        let m = mesh_structured(&g, 2).unwrap();
        assert_eq!(m.levels[3].num_cells(), 48);
        let total: f64 = m.levels[3].cell_measure.iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
    }
}
