//! Writers for sweep tables, residual histories, system blocks and legacy
//! VTK solution files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::SweepTable;
use crate::discretization::{BlockSystem, FaceDof};
use crate::error::{Error, Result};
use crate::linalg::{mtx, SolveReport};
use crate::meshing::{centroid, MdMesh, Point};

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn table_csv(table: &SweepTable) -> String {
    let mut s = String::from("param,precond,iters,resid,seconds,ndof\n");
    for r in &table.rows {
        let _ = writeln!(s, "{},{},{},{:.6e},{:.6e},{}", r.param, r.precond, r.iterations, r.residual, r.seconds, r.ndof);
    }
    s
}

pub fn write_table_csv(table: &SweepTable, path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &table_csv(table))
}

/// One row per parameter value, one column per preconditioner. Solves that
/// did not converge are marked with `*`.
pub fn table_markdown(table: &SweepTable) -> String {
    let mut values: Vec<f64> = Vec::new();
    let mut preconds: Vec<&str> = Vec::new();
    for r in &table.rows {
        if !values.contains(&r.param) {
            values.push(r.param);
        }
        if !preconds.contains(&r.precond.as_str()) {
            preconds.push(&r.precond);
        }
    }
    let mut s = format!("| {} |", table.param);
    for p in &preconds {
        let _ = write!(s, " {p} |");
    }
    s.push_str("\n|---|");
    s.push_str(&"---|".repeat(preconds.len()));
    s.push('\n');
    for v in values {
        let _ = write!(s, "| {v} |");
        for p in &preconds {
            match table.rows.iter().find(|r| r.param == v && r.precond == *p) {
                Some(r) if r.converged => {
                    let _ = write!(s, " {} |", r.iterations);
                }
                Some(r) => {
                    let _ = write!(s, " {}* |", r.iterations);
                }
                None => s.push_str(" - |"),
            }
        }
        s.push('\n');
    }
    s
}

pub fn write_table_markdown(table: &SweepTable, path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &table_markdown(table))
}

/// Long-format history: `precond,iter,resid`.
pub fn write_residual_csv<'a>(solves: impl IntoIterator<Item = (&'a str, &'a SolveReport)>, path: impl AsRef<Path>) -> Result<()> {
    let mut s = String::from("precond,iter,resid\n");
    for (name, rep) in solves {
        for (i, r) in rep.residuals.iter().enumerate() {
            let _ = writeln!(s, "{name},{i},{r:.6e}");
        }
    }
    write_text(path.as_ref(), &s)
}

/// `A.mtx`, `B.mtx`, `S.mtx` as coordinate matrices and `D_A.mtx`,
/// `rhs.mtx` as array vectors, in `dir`.
pub fn write_system_mtx(sys: &BlockSystem<f64>, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths: Vec<PathBuf> = ["A", "B", "S", "D_A", "rhs"].iter().map(|n| dir.join(format!("{n}.mtx"))).collect();
    mtx::write_matrix(&paths[0], &sys.a)?;
    mtx::write_matrix(&paths[1], &sys.b)?;
    mtx::write_matrix(&paths[2], &sys.schur())?;
    mtx::write_vector(&paths[3], &sys.d_a)?;
    mtx::write_vector(&paths[4], &sys.rhs())?;
    Ok(paths)
}

/// Lowest-order Raviart-Thomas velocity at the centroid of every cell of
/// level `d >= 1`.
pub fn cell_velocities(mesh: &MdMesh, sys: &BlockSystem<f64>, w: &[f64], d: usize) -> Vec<Point> {
    let lvl = &mesh.levels[d];
    (0..lvl.num_cells())
        .map(|c| {
            let p = mesh.points(lvl.cell(c));
            let xc = centroid(&p);
            let mut u = [0.0; 3];
            for (i, &f) in lvl.cell_face_ids(c).iter().enumerate() {
                let s = f64::from(lvl.cell_signs(c)[i]);
                let q = match sys.dofs.face_dof[d][f] {
                    FaceDof::Dof { index, orientation } => s * orientation * w[index],
                    FaceDof::Fixed(v) => s * v,
                };
                let coef = q * lvl.face_measure[f] / (d as f64 * lvl.cell_measure[c]);
                for a in 0..3 {
                    u[a] += coef * (xc[a] - p[i][a]);
                }
            }
            u
        })
        .collect()
}

fn vtk_cell_type(d: usize) -> u8 {
    match d {
        0 => 1,
        1 => 3,
        2 => 5,
        _ => 10,
    }
}

/// Legacy VTK unstructured grid for one level, with cell pressure,
/// subdomain id and, for `d >= 1`, the reconstructed velocity.
pub fn level_vtk(mesh: &MdMesh, sys: &BlockSystem<f64>, x: &[f64], d: usize) -> String {
    let lvl = &mesh.levels[d];
    let nc = lvl.num_cells();
    let k = d + 1;
    let mut s = format!("# vtk DataFile Version 3.0\nlevel {d}\nASCII\nDATASET UNSTRUCTURED_GRID\nPOINTS {} double\n", mesh.vertices.len());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{} {} {}", v[0], v[1], v[2]);
    }
    let _ = writeln!(s, "CELLS {nc} {}", nc * (k + 1));
    for c in 0..nc {
        let _ = write!(s, "{k}");
        for v in lvl.cell(c) {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {nc}");
    for _ in 0..nc {
        let _ = writeln!(s, "{}", vtk_cell_type(d));
    }
    let _ = writeln!(s, "CELL_DATA {nc}\nSCALARS pressure double 1\nLOOKUP_TABLE default");
    let nw = sys.n_w();
    for &row in &sys.dofs.cell_dof[d] {
        let _ = writeln!(s, "{:.12e}", x[nw + row]);
    }
    let _ = writeln!(s, "SCALARS subdomain int 1\nLOOKUP_TABLE default");
    for &sd in &lvl.cell_subdomain {
        let _ = writeln!(s, "{sd}");
    }
    if d >= 1 {
        let _ = writeln!(s, "VECTORS velocity double");
        for u in cell_velocities(mesh, sys, &x[..nw], d) {
            let _ = writeln!(s, "{:.12e} {:.12e} {:.12e}", u[0], u[1], u[2]);
        }
    }
    s
}

/// One `<stem>_d<d>.vtk` per non-empty level.
pub fn write_solution_vtk(mesh: &MdMesh, sys: &BlockSystem<f64>, x: &[f64], dir: impl AsRef<Path>, stem: &str) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();
    for d in (0..=mesh.dim).rev() {
        if mesh.levels[d].num_cells() == 0 {
            continue;
        }
        let path = dir.join(format!("{stem}_d{d}.vtk"));
        write_text(&path, &level_vtk(mesh, sys, x, d))?;
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::verify::direct_solve;
    use crate::bench::SweepRow;
    use crate::discretization::{assemble_system, PhysicalParams, SideBc};
    use crate::geometry::{build_fracture_geometry, Domain};
    use crate::meshing::mesh_structured;

    #[test]
    fn velocity_of_uniform_flow() {
        let geom = build_fracture_geometry(&Domain::unit(2), &[]).unwrap();
        let mesh = mesh_structured(&geom, 4).unwrap();
        let bc = vec![SideBc::Neumann(0.0), SideBc::Neumann(0.0), SideBc::Dirichlet(1.0), SideBc::Dirichlet(0.0)];
        let sys = assemble_system(&mesh, &PhysicalParams::from_geometry(&geom, 2.0, bc)).unwrap();
        let x = direct_solve(&sys).unwrap();
        for u in cell_velocities(&mesh, &sys, &x[..sys.n_w()], 2) {
            assert!(u[0].abs() < 1e-12 && (u[1] - 2.0).abs() < 1e-12, "{u:?}");
        }
        let vtk = level_vtk(&mesh, &sys, &x, 2);
        assert!(vtk.contains("CELLS 32 128") && vtk.contains("SCALARS pressure double 1"));
    }

    fn row(param: f64, precond: &str, iterations: usize, converged: bool) -> SweepRow {
        SweepRow {
            param,
            precond: precond.into(),
            iterations,
            residual: 1e-7,
            seconds: 0.5,
            setup_seconds: 0.1,
            ndof: 100,
            converged,
            inner_failures: 0,
        }
    }

    #[test]
    fn table_formats() {
        let table = SweepTable {
            param: "gamma".into(),
            rows: vec![row(1.0, "BD", 20, true), row(1.0, "BL", 10, true), row(0.01, "BD", 21, true), row(0.01, "BL", 500, false)],
        };
        let csv = table_csv(&table);
        assert!(csv.starts_with("param,precond,iters,resid,seconds,ndof\n1,BD,20,"));
        assert_eq!(csv.lines().count(), 5);
        let md = table_markdown(&table);
        let lines: Vec<&str> = md.lines().collect();
        assert_eq!(lines[0], "| gamma | BD | BL |");
        assert_eq!(lines[3], "| 0.01 | 21 | 500* |");
    }
}
