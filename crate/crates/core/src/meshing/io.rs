//! Plain-text mesh format.
//!
//! ```text
//! MDMESH <n>
//! H <h>
//! VERTICES <count>          x y z
//! SUBDOMAINS <count>        dim
//! INTERFACES <count>        lower higher
//! CELLS <d> <count>         subdomain v_0..v_d [f_0..f_d s_0..s_d]
//! FACES <d> <count>         I|T|S|B<side> v_0..v_{d-1}
//! SLITS <count>             level face interface lower_cell
//! MORTARS <count>           then per grid: GRID interface higher_dim cells
//!                           followed by: face sign lower_cell measure
//! ```
//!
//! `CELLS`/`FACES` blocks appear for `d = n` down to `0` (no faces at `d = 0`).
//! Ids are 0-based; `#` starts a comment line.

use std::fmt::Write as _;
use std::path::Path;

use super::{signed_volume, simplex_measure, FaceKind, InterfaceLink, MdMesh, MortarGrid, Point, SimplicialMesh};
use crate::error::{Error, Result};

pub fn export_mesh(mesh: &MdMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut s = String::new();
    let n = mesh.dim;
    let _ = writeln!(s, "MDMESH {n}");
    let _ = writeln!(s, "H {:.17e}", mesh.h);
    let _ = writeln!(s, "VERTICES {}", mesh.vertices.len());
    for p in &mesh.vertices {
        let _ = writeln!(s, "{:.17e} {:.17e} {:.17e}", p[0], p[1], p[2]);
    }
    let _ = writeln!(s, "SUBDOMAINS {}", mesh.subdomain_dims.len());
    for d in &mesh.subdomain_dims {
        let _ = writeln!(s, "{d}");
    }
    let _ = writeln!(s, "INTERFACES {}", mesh.interfaces.len());
    for f in &mesh.interfaces {
        let _ = writeln!(s, "{} {}", f.lower, f.higher);
    }
    let join = |v: &mut String, xs: &mut dyn Iterator<Item = String>| {
        for x in xs {
            v.push(' ');
            v.push_str(&x);
        }
    };
    let mut slits = Vec::new();
    for d in (0..=n).rev() {
        let lvl = &mesh.levels[d];
        let _ = writeln!(s, "CELLS {d} {}", lvl.num_cells());
        for c in 0..lvl.num_cells() {
            let mut line = lvl.cell_subdomain[c].to_string();
            join(&mut line, &mut lvl.cell(c).iter().map(usize::to_string));
            join(&mut line, &mut lvl.cell_face_ids(c).iter().map(usize::to_string));
            join(&mut line, &mut lvl.cell_signs(c).iter().map(i8::to_string));
            s.push_str(&line);
            s.push('\n');
        }
        if d == 0 {
            continue;
        }
        let _ = writeln!(s, "FACES {d} {}", lvl.num_faces());
        for f in 0..lvl.num_faces() {
            let mut line = match lvl.face_kind[f] {
                FaceKind::Interior => "I".to_string(),
                FaceKind::Tip => "T".to_string(),
                FaceKind::Boundary { side } => format!("B{side}"),
                FaceKind::Slit { interface, lower_cell } => {
                    slits.push((d, f, interface, lower_cell));
                    "S".to_string()
                }
            };
            join(&mut line, &mut lvl.face(f).iter().map(usize::to_string));
            s.push_str(&line);
            s.push('\n');
        }
    }
    let _ = writeln!(s, "SLITS {}", slits.len());
    for (d, f, i, c) in slits {
        let _ = writeln!(s, "{d} {f} {i} {c}");
    }
    let _ = writeln!(s, "MORTARS {}", mesh.mortars.len());
    for g in &mesh.mortars {
        let _ = writeln!(s, "GRID {} {} {}", g.interface, g.higher_dim, g.len());
        for j in 0..g.len() {
            let _ = writeln!(s, "{} {} {} {:.17e}", g.faces[j], g.signs[j], g.lower_cells[j], g.measure[j]);
        }
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

struct Reader<'a> {
    path: &'a Path,
    lines: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(path: &'a Path, text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .filter_map(|(i, l)| {
                let t = l.trim();
                (!t.is_empty() && !t.starts_with('#')).then(|| (i + 1, t.split_whitespace().collect()))
            })
            .collect();
        Self { path, lines, pos: 0 }
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line,
            msg: msg.into(),
        }
    }

    fn next(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        let r = self
            .lines
            .get(self.pos)
            .cloned()
            .ok_or_else(|| self.err(self.lines.last().map_or(0, |l| l.0), format!("unexpected end of file, expected {what}")))?;
        self.pos += 1;
        Ok(r)
    }

    fn header(&mut self, keyword: &str, nargs: usize) -> Result<(usize, Vec<usize>)> {
        let (ln, toks) = self.next(keyword)?;
        if toks[0] != keyword || toks.len() != nargs + 1 {
            return Err(self.err(ln, format!("expected `{keyword}` with {nargs} argument(s)")));
        }
        let args = toks[1..].iter().map(|t| self.int(ln, t)).collect::<Result<_>>()?;
        Ok((ln, args))
    }

    fn int(&self, ln: usize, t: &str) -> Result<usize> {
        t.parse().map_err(|_| self.err(ln, format!("expected a nonnegative integer, found `{t}`")))
    }

    fn float(&self, ln: usize, t: &str) -> Result<f64> {
        t.parse().map_err(|_| self.err(ln, format!("expected a number, found `{t}`")))
    }

    fn record(&mut self, what: &str, len: usize) -> Result<(usize, Vec<&'a str>)> {
        let (ln, toks) = self.next(what)?;
        if toks.len() != len {
            return Err(self.err(ln, format!("{what}: expected {len} fields, found {}", toks.len())));
        }
        Ok((ln, toks))
    }
}

/// Read a mesh written by [`export_mesh`] (or produced externally in the same
/// format) and validate every structural invariant.
pub fn import_mesh(path: impl AsRef<Path>) -> Result<MdMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut r = Reader::new(path, &text);
    let (ln, a) = r.header("MDMESH", 1)?;
    let n = a[0];
    if n != 2 && n != 3 {
        return Err(r.err(ln, format!("unsupported dimension {n}")));
    }
    let (ln, toks) = r.record("H", 2)?;
    if toks[0] != "H" {
        return Err(r.err(ln, "expected `H <mesh size>`"));
    }
    let h = r.float(ln, toks[1])?;

    let (_, a) = r.header("VERTICES", 1)?;
    let mut vertices: Vec<Point> = Vec::with_capacity(a[0]);
    for _ in 0..a[0] {
        let (ln, t) = r.record("vertex", 3)?;
        vertices.push([r.float(ln, t[0])?, r.float(ln, t[1])?, r.float(ln, t[2])?]);
    }
    let (_, a) = r.header("SUBDOMAINS", 1)?;
    let mut subdomain_dims = Vec::with_capacity(a[0]);
    for _ in 0..a[0] {
        let (ln, t) = r.record("subdomain", 1)?;
        subdomain_dims.push(r.int(ln, t[0])?);
    }
    let (_, a) = r.header("INTERFACES", 1)?;
    let mut interfaces = Vec::with_capacity(a[0]);
    for _ in 0..a[0] {
        let (ln, t) = r.record("interface", 2)?;
        interfaces.push(InterfaceLink {
            lower: r.int(ln, t[0])?,
            higher: r.int(ln, t[1])?,
        });
    }

    let mut levels: Vec<SimplicialMesh> = (0..=n).map(SimplicialMesh::empty).collect();
    let mut face_lines: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for d in (0..=n).rev() {
        let (ln, a) = r.header("CELLS", 2)?;
        if a[0] != d {
            return Err(r.err(ln, format!("expected cells of dimension {d}")));
        }
        let lvl = &mut levels[d];
        let width = if d == 0 { 2 } else { 1 + 3 * (d + 1) };
        for c in 0..a[1] {
            let (ln, t) = r.record("cell", width)?;
            lvl.cell_subdomain.push(r.int(ln, t[0])?);
            let verts = t[1..=d + 1].iter().map(|x| r.int(ln, x)).collect::<Result<Vec<_>>>()?;
            if let Some(&v) = verts.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::MeshInvariant(format!("level {d} cell {c}: vertex {v} does not exist")));
            }
            let pts: Vec<Point> = verts.iter().map(|&v| vertices[v]).collect();
            let vol = if d == n { signed_volume(&pts) } else { simplex_measure(&pts) };
            if !(vol > 0.0) {
                return Err(Error::MeshInvariant(format!("level {d} cell {c}: nonpositive volume {vol:e}")));
            }
            lvl.cells.extend(verts);
            lvl.cell_measure.push(vol);
            if d > 0 {
                for x in &t[d + 2..2 * d + 3] {
                    lvl.cell_faces.push(r.int(ln, x)?);
                }
                for x in &t[2 * d + 3..] {
                    let s: i8 = x.parse().map_err(|_| r.err(ln, format!("bad sign `{x}`")))?;
                    lvl.cell_face_sign.push(s);
                }
            }
        }
        if d == 0 {
            continue;
        }
        let (ln, a) = r.header("FACES", 2)?;
        if a[0] != d {
            return Err(r.err(ln, format!("expected faces of dimension {d}")));
        }
        for f in 0..a[1] {
            let (ln, t) = r.record("face", 1 + d)?;
            let kind = match t[0] {
                "I" => FaceKind::Interior,
                "T" => FaceKind::Tip,
                "S" => {
                    face_lines[d].push(f);
                    FaceKind::Slit {
                        interface: usize::MAX,
                        lower_cell: usize::MAX,
                    }
                }
                b if b.starts_with('B') => FaceKind::Boundary {
                    side: r.int(ln, &b[1..])?,
                },
                other => return Err(r.err(ln, format!("unknown face kind `{other}`"))),
            };
            let verts = t[1..].iter().map(|x| r.int(ln, x)).collect::<Result<Vec<_>>>()?;
            if let Some(&v) = verts.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::MeshInvariant(format!("level {d} face {f}: vertex {v} does not exist")));
            }
            let pts: Vec<Point> = verts.iter().map(|&v| vertices[v]).collect();
            levels[d].face_measure.push(simplex_measure(&pts));
            levels[d].faces.extend(verts);
            levels[d].face_kind.push(kind);
        }
    }

    let (_, a) = r.header("SLITS", 1)?;
    for _ in 0..a[0] {
        let (ln, t) = r.record("slit", 4)?;
        let (d, f) = (r.int(ln, t[0])?, r.int(ln, t[1])?);
        let (interface, lower_cell) = (r.int(ln, t[2])?, r.int(ln, t[3])?);
        match levels.get_mut(d).and_then(|l| l.face_kind.get_mut(f)) {
            Some(k @ FaceKind::Slit { .. }) => *k = FaceKind::Slit { interface, lower_cell },
            _ => return Err(Error::MeshInvariant(format!("slit record names level {d} face {f}, which is not a slit face"))),
        }
    }
    for (d, fs) in face_lines.iter().enumerate() {
        for &f in fs {
            if levels[d].face_kind[f] == (FaceKind::Slit { interface: usize::MAX, lower_cell: usize::MAX }) {
                return Err(Error::MeshInvariant(format!("level {d} slit face {f} has no slit record")));
            }
        }
    }

    let (_, a) = r.header("MORTARS", 1)?;
    let mut mortars = Vec::with_capacity(a[0]);
    for _ in 0..a[0] {
        let (ln, t) = r.record("mortar grid", 4)?;
        if t[0] != "GRID" {
            return Err(r.err(ln, "expected `GRID interface higher_dim cells`"));
        }
        let mut g = MortarGrid {
            interface: r.int(ln, t[1])?,
            higher_dim: r.int(ln, t[2])?,
            faces: Vec::new(),
            signs: Vec::new(),
            lower_cells: Vec::new(),
            measure: Vec::new(),
        };
        for _ in 0..r.int(ln, t[3])? {
            let (ln, t) = r.record("mortar cell", 4)?;
            g.faces.push(r.int(ln, t[0])?);
            g.signs.push(t[1].parse().map_err(|_| r.err(ln, format!("bad sign `{}`", t[1])))?);
            g.lower_cells.push(r.int(ln, t[2])?);
            g.measure.push(r.float(ln, t[3])?);
        }
        mortars.push(g);
    }
    if let Some(&(ln, _)) = r.lines.get(r.pos) {
        return Err(r.err(ln, "trailing content"));
    }
    let mesh = MdMesh {
        dim: n,
        vertices,
        levels,
        mortars,
        subdomain_dims,
        interfaces,
        h,
    };
    mesh.check()?;
    Ok(mesh)
}
