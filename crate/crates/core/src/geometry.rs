//! Axis-aligned fracture networks and their decomposition into subdomains of
//! every dimension.
//!
//! The decomposition works on a compressed tensor grid built from the domain
//! bounds and all fracture coordinates. Every entity of that grid (a product of
//! per-axis vertices and open intervals) has a well-defined set of containing
//! fractures, hence a local dimension: `n` minus the number of distinct
//! fracture normals through it. Entities whose own dimension equals their local
//! dimension are the building blocks of subdomains.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BcKind {
    Dirichlet,
    Neumann,
}

/// Side of an axis-aligned box, indexed as `2 * axis + high`.
pub fn side_index(axis: usize, high: bool) -> usize {
    2 * axis + usize::from(high)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    pub dim: usize,
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    /// Boundary condition type per side, `2 * dim` entries.
    pub bc: Vec<BcKind>,
}

impl Domain {
    /// Unit square (`dim = 2`) or cube (`dim = 3`), Dirichlet everywhere.
    pub fn unit(dim: usize) -> Self {
        Self {
            dim,
            lo: [0.0; 3],
            hi: [1.0, 1.0, if dim == 3 { 1.0 } else { 0.0 }],
            bc: vec![BcKind::Dirichlet; 2 * dim],
        }
    }

    pub fn with_bc(mut self, axis: usize, high: bool, kind: BcKind) -> Self {
        self.bc[side_index(axis, high)] = kind;
        self
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    fn eps(&self) -> f64 {
        let s = (0..self.dim).map(|a| self.extent(a).abs()).fold(1.0, f64::max);
        1e-12 * s
    }
}

/// One planar fracture, given by two opposite corners of an axis-aligned box
/// that is flat along exactly one axis.
#[derive(Clone, Debug, PartialEq)]
pub struct FractureSpec {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub aperture: f64,
    pub k_f: f64,
    pub k_nu: f64,
}

impl FractureSpec {
    pub fn segment(p: [f64; 2], q: [f64; 2]) -> Self {
        Self::new([p[0], p[1], 0.0], [q[0], q[1], 0.0])
    }

    pub fn rectangle(lo: [f64; 3], hi: [f64; 3]) -> Self {
        Self::new(lo, hi)
    }

    fn new(a: [f64; 3], b: [f64; 3]) -> Self {
        Self {
            a,
            b,
            aperture: 1.0,
            k_f: 1.0,
            k_nu: 1.0,
        }
    }

    pub fn with_params(mut self, aperture: f64, k_f: f64, k_nu: f64) -> Self {
        self.aperture = aperture;
        self.k_f = k_f;
        self.k_nu = k_nu;
        self
    }

    pub fn lo(&self, axis: usize) -> f64 {
        self.a[axis].min(self.b[axis])
    }

    pub fn hi(&self, axis: usize) -> f64 {
        self.a[axis].max(self.b[axis])
    }

    /// The single axis along which the fracture is flat.
    pub fn normal_axis(&self, dim: usize, eps: f64) -> Result<usize> {
        let flat: Vec<usize> = (0..dim).filter(|&k| (self.a[k] - self.b[k]).abs() <= eps).collect();
        match flat.len() {
            0 => Err(Error::UnsupportedGeometry(format!(
                "fracture {:?}-{:?} is not axis-aligned",
                &self.a[..dim],
                &self.b[..dim]
            ))),
            1 => Ok(flat[0]),
            _ => Err(Error::DegenerateInput(format!(
                "fracture {:?}-{:?} has zero extent",
                &self.a[..dim],
                &self.b[..dim]
            ))),
        }
    }
}

/// Which side of a lower-dimensional subdomain its higher-dimensional
/// neighbour lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Side {
    pub axis: usize,
    pub positive: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Subdomain {
    pub dim: usize,
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub measure: f64,
    /// Fractures containing this subdomain; empty for rock.
    pub fractures: Vec<usize>,
    pub k: f64,
    pub k_nu: f64,
    pub aperture: f64,
}

/// Interface between a subdomain of dimension `d` (`lower`) and one side of an
/// adjacent subdomain of dimension `d + 1` (`higher`).
#[derive(Clone, Debug, PartialEq)]
pub struct Interface {
    pub lower: usize,
    pub higher: usize,
    pub side: Side,
    pub gamma: f64,
    pub k_nu: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPatch {
    pub subdomain: usize,
    pub side: usize,
    pub measure: f64,
}

/// Per-axis sorted distinct coordinates. Entities are addressed by half
/// indices: `2k` is coordinate `k`, `2k + 1` the open interval after it.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorGrid {
    pub dim: usize,
    pub coords: Vec<Vec<f64>>,
}

impl TensorGrid {
    fn span(&self, axis: usize) -> usize {
        2 * self.coords[axis].len() - 1
    }

    pub fn num_entities(&self) -> usize {
        (0..self.dim).map(|a| self.span(a)).product()
    }

    pub fn entity_index(&self, half: &[usize]) -> usize {
        let mut idx = 0;
        for a in (0..self.dim).rev() {
            idx = idx * self.span(a) + half[a];
        }
        idx
    }

    pub fn entity_half(&self, mut idx: usize) -> [usize; 3] {
        let mut h = [0; 3];
        for (a, slot) in h.iter_mut().enumerate().take(self.dim) {
            *slot = idx % self.span(a);
            idx /= self.span(a);
        }
        h
    }

    pub fn entity_dim(&self, half: &[usize]) -> usize {
        half[..self.dim].iter().filter(|&&h| h % 2 == 1).count()
    }

    fn entity_measure(&self, half: &[usize]) -> f64 {
        (0..self.dim)
            .filter(|&a| half[a] % 2 == 1)
            .map(|a| {
                let k = half[a] / 2;
                self.coords[a][k + 1] - self.coords[a][k]
            })
            .product()
    }

    fn entity_bounds(&self, half: &[usize]) -> ([f64; 3], [f64; 3]) {
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for a in 0..self.dim {
            let k = half[a] / 2;
            lo[a] = self.coords[a][k];
            hi[a] = if half[a] % 2 == 1 { self.coords[a][k + 1] } else { lo[a] };
        }
        (lo, hi)
    }

    /// Index of `x` among the coordinates of `axis`, if present.
    pub fn locate(&self, axis: usize, x: f64, eps: f64) -> Option<usize> {
        self.coords[axis].iter().position(|&c| (c - x).abs() <= eps)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MdGeometry {
    pub domain: Domain,
    pub fractures: Vec<FractureSpec>,
    pub grid: TensorGrid,
    pub local_dim: Vec<usize>,
    /// Owning subdomain of entities whose dimension equals their local
    /// dimension.
    pub entity_subdomain: Vec<Option<usize>>,
    /// Ordered by dimension, highest first.
    pub subdomains: Vec<Subdomain>,
    /// Ordered by the dimension of the lower side, highest first.
    pub interfaces: Vec<Interface>,
    pub boundary: Vec<BoundaryPatch>,
}

impl MdGeometry {
    pub fn dim(&self) -> usize {
        self.domain.dim
    }

    pub fn count(&self, dim: usize) -> usize {
        self.subdomains.iter().filter(|s| s.dim == dim).count()
    }

    /// Interfaces whose lower side is subdomain `i`.
    pub fn interfaces_of(&self, i: usize) -> Vec<usize> {
        (0..self.interfaces.len()).filter(|&k| self.interfaces[k].lower == i).collect()
    }

    pub fn find_interface(&self, higher: usize, lower: usize, side: Side) -> Option<usize> {
        self.interfaces
            .iter()
            .position(|f| f.higher == higher && f.lower == lower && f.side == side)
    }

    pub fn eps(&self) -> f64 {
        self.domain.eps()
    }

    pub fn dirichlet_measure(&self, dim: usize) -> f64 {
        self.boundary
            .iter()
            .filter(|p| self.subdomains[p.subdomain].dim == dim && self.domain.bc[p.side] == BcKind::Dirichlet)
            .map(|p| p.measure)
            .sum()
    }
}

fn check_domain(domain: &Domain) -> Result<()> {
    if domain.dim != 2 && domain.dim != 3 {
        return Err(Error::UnsupportedGeometry(format!("domain dimension {}", domain.dim)));
    }
    if domain.bc.len() != 2 * domain.dim {
        return Err(Error::InvalidParameter(format!(
            "{} boundary conditions for {} sides",
            domain.bc.len(),
            2 * domain.dim
        )));
    }
    for a in 0..domain.dim {
        if !(domain.extent(a) > 0.0) {
            return Err(Error::DegenerateInput(format!("domain extent along axis {a}")));
        }
    }
    Ok(())
}

fn check_fracture(domain: &Domain, i: usize, f: &FractureSpec) -> Result<usize> {
    let n = domain.dim;
    let eps = domain.eps();
    for (name, v) in [("aperture", f.aperture), ("k_f", f.k_f), ("k_nu", f.k_nu)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!("fracture {i}: {name} = {v}")));
        }
    }
    for a in 0..n {
        for x in [f.a[a], f.b[a]] {
            if !x.is_finite() || x < domain.lo[a] - eps || x > domain.hi[a] + eps {
                return Err(Error::InvalidParameter(format!(
                    "fracture {i}: coordinate {x} outside the domain along axis {a}"
                )));
            }
        }
    }
    let axis = f.normal_axis(n, eps)?;
    let c = f.a[axis];
    if (c - domain.lo[axis]).abs() <= eps || (c - domain.hi[axis]).abs() <= eps {
        return Err(Error::DegenerateInput(format!("fracture {i} lies on the domain boundary")));
    }
    Ok(axis)
}

/// Decompose `domain` by `fractures` into subdomains, interfaces and boundary
/// patches.
pub fn build_fracture_geometry(domain: &Domain, fractures: &[FractureSpec]) -> Result<MdGeometry> {
    check_domain(domain)?;
    let n = domain.dim;
    let eps = domain.eps();
    let normals: Vec<usize> = fractures
        .iter()
        .enumerate()
        .map(|(i, f)| check_fracture(domain, i, f))
        .collect::<Result<_>>()?;

    for i in 0..fractures.len() {
        for j in 0..i {
            let (fi, fj) = (&fractures[i], &fractures[j]);
            let ax = normals[i];
            if normals[j] != ax || (fi.a[ax] - fj.a[ax]).abs() > eps {
                continue;
            }
            let overlap = (0..n)
                .filter(|&a| a != ax)
                .all(|a| fi.hi(a).min(fj.hi(a)) - fi.lo(a).max(fj.lo(a)) > eps);
            if overlap {
                return Err(Error::DegenerateInput(format!("fractures {j} and {i} overlap")));
            }
        }
    }

    let coords: Vec<Vec<f64>> = (0..n)
        .map(|a| {
            let mut c = vec![domain.lo[a], domain.hi[a]];
            for f in fractures {
                c.push(f.a[a]);
                c.push(f.b[a]);
            }
            c.sort_by(f64::total_cmp);
            c.dedup_by(|x, y| (*x - *y).abs() <= eps);
            // Snap the ends back onto the exact domain bounds.
            let last = c.len() - 1;
            c[0] = domain.lo[a];
            c[last] = domain.hi[a];
            c
        })
        .collect();
    let grid = TensorGrid { dim: n, coords };

    // Per fracture: normal half index and tangential half-index ranges.
    let ranges: Vec<[(usize, usize); 3]> = fractures
        .iter()
        .zip(&normals)
        .map(|(f, &ax)| {
            let mut r = [(0, 0); 3];
            for (a, slot) in r.iter_mut().enumerate().take(n) {
                let lo = grid.locate(a, f.lo(a), eps).expect("coordinate registered");
                let hi = grid.locate(a, f.hi(a), eps).expect("coordinate registered");
                *slot = if a == ax { (2 * lo, 2 * lo) } else { (2 * lo, 2 * hi) };
            }
            r
        })
        .collect();

    let ne = grid.num_entities();
    let mut local_dim = vec![n; ne];
    let mut containing: Vec<Vec<usize>> = vec![Vec::new(); ne];
    for e in 0..ne {
        let h = grid.entity_half(e);
        let mut mask = 0usize;
        for (fi, r) in ranges.iter().enumerate() {
            if (0..n).all(|a| r[a].0 <= h[a] && h[a] <= r[a].1) {
                mask |= 1 << normals[fi];
                containing[e].push(fi);
            }
        }
        local_dim[e] = n - mask.count_ones() as usize;
    }

    // Connected components of same-dimension entities.
    let mut uf = UnionFind::new(ne);
    for e in 0..ne {
        let h = grid.entity_half(e);
        let k = grid.entity_dim(&h);
        if local_dim[e] != k + 1 {
            continue;
        }
        let mut nbrs = Vec::new();
        for a in 0..n {
            if h[a] % 2 == 1 {
                continue;
            }
            for up in [false, true] {
                if let Some(g) = step(&grid, &h, a, up) {
                    let ge = grid.entity_index(&g);
                    if local_dim[ge] == k + 1 && grid.entity_dim(&g) == k + 1 {
                        nbrs.push(ge);
                    }
                }
            }
        }
        for w in nbrs.windows(2) {
            uf.union(w[0], w[1]);
        }
    }

    let mut roots: BTreeMap<(std::cmp::Reverse<usize>, usize), Vec<usize>> = BTreeMap::new();
    let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for e in 0..ne {
        let h = grid.entity_half(e);
        if grid.entity_dim(&h) == local_dim[e] {
            by_root.entry(uf.find(e)).or_default().push(e);
        }
    }
    for (_, members) in by_root {
        let h = grid.entity_half(members[0]);
        roots.insert((std::cmp::Reverse(grid.entity_dim(&h)), members[0]), members);
    }

    let mut entity_subdomain = vec![None; ne];
    let mut subdomains = Vec::new();
    for ((std::cmp::Reverse(dim), _), members) in roots {
        let id = subdomains.len();
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        let mut measure = 0.0;
        let mut fr: Vec<usize> = Vec::new();
        for &e in &members {
            entity_subdomain[e] = Some(id);
            let h = grid.entity_half(e);
            measure += grid.entity_measure(&h);
            let (l, u) = grid.entity_bounds(&h);
            for a in 0..n {
                lo[a] = lo[a].min(l[a]);
                hi[a] = hi[a].max(u[a]);
            }
            fr.extend(&containing[e]);
        }
        for a in n..3 {
            lo[a] = 0.0;
            hi[a] = 0.0;
        }
        fr.sort_unstable();
        fr.dedup();
        let mean = |g: fn(&FractureSpec) -> f64| {
            if fr.is_empty() {
                1.0
            } else {
                fr.iter().map(|&i| g(&fractures[i])).sum::<f64>() / fr.len() as f64
            }
        };
        subdomains.push(Subdomain {
            dim,
            lo,
            hi,
            measure,
            k: mean(|f| f.k_f),
            k_nu: mean(|f| f.k_nu),
            aperture: mean(|f| f.aperture),
            fractures: fr,
        });
    }

    let mut ifaces: BTreeMap<(std::cmp::Reverse<usize>, usize, usize, Side), ()> = BTreeMap::new();
    let mut patches: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for e in 0..ne {
        let Some(sd) = entity_subdomain[e] else { continue };
        let h = grid.entity_half(e);
        let k = local_dim[e];
        for a in 0..n {
            for up in [false, true] {
                let Some(g) = step(&grid, &h, a, up) else { continue };
                let ge = grid.entity_index(&g);
                if h[a] % 2 == 0 {
                    if k < n && local_dim[ge] == k + 1 && grid.entity_dim(&g) == k + 1 {
                        let higher = entity_subdomain[ge].expect("matching entity has an owner");
                        let side = Side { axis: a, positive: up };
                        ifaces.insert((std::cmp::Reverse(k), sd, higher, side), ());
                    }
                } else if g[a] == 0 || g[a] == grid.span(a) - 1 {
                    *patches.entry((sd, side_index(a, g[a] != 0))).or_insert(0.0) += grid.entity_measure(&g);
                }
            }
        }
    }
    let interfaces = ifaces
        .into_keys()
        .map(|(_, lower, higher, side)| Interface {
            lower,
            higher,
            side,
            gamma: subdomains[lower].aperture,
            k_nu: subdomains[lower].k_nu,
        })
        .collect();
    let boundary = patches
        .into_iter()
        .map(|((subdomain, side), measure)| BoundaryPatch { subdomain, side, measure })
        .collect();

    Ok(MdGeometry {
        domain: domain.clone(),
        fractures: fractures.to_vec(),
        grid,
        local_dim,
        entity_subdomain,
        subdomains,
        interfaces,
        boundary,
    })
}

fn step(grid: &TensorGrid, h: &[usize; 3], axis: usize, up: bool) -> Option<[usize; 3]> {
    let mut g = *h;
    if up {
        if g[axis] + 1 >= grid.span(axis) {
            return None;
        }
        g[axis] += 1;
    } else {
        if g[axis] == 0 {
            return None;
        }
        g[axis] -= 1;
    }
    Some(g)
}

/// Check the structural invariants of a decomposition. Returns one message per
/// violation; an empty list means the geometry is consistent.
pub fn validate_geometry(geom: &MdGeometry) -> Vec<String> {
    let mut out = Vec::new();
    let ns = geom.subdomains.len();
    let n = geom.dim();
    for (k, f) in geom.interfaces.iter().enumerate() {
        if f.lower >= ns || f.higher >= ns {
            out.push(format!("interface {k} references a missing subdomain"));
            continue;
        }
        let (dl, dh) = (geom.subdomains[f.lower].dim, geom.subdomains[f.higher].dim);
        if dh != dl + 1 {
            out.push(format!("interface {k} connects dimensions {dh} and {dl}"));
        }
        if !(f.gamma > 0.0) || !(f.k_nu > 0.0) {
            out.push(format!("interface {k} has nonpositive aperture or normal permeability"));
        }
    }
    for (i, s) in geom.subdomains.iter().enumerate() {
        if !(s.k > 0.0) {
            out.push(format!("subdomain {i} has nonpositive permeability"));
        }
        if s.dim >= n {
            continue;
        }
        let adjacent = geom.interfaces.iter().filter(|f| f.lower == i).count();
        if s.dim == 0 && adjacent < 2 {
            out.push(format!("point subdomain {i} has {adjacent} adjacent branch ends"));
        } else if adjacent == 0 {
            out.push(format!("subdomain {i} (dimension {}) has no interfaces", s.dim));
        }
    }
    if !(geom.dirichlet_measure(n) > 0.0) {
        out.push("Dirichlet boundary of the top-dimensional domain has zero measure".into());
    }
    out
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}
