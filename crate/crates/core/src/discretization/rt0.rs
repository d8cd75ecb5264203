//! Lowest-order Raviart-Thomas element on a simplex of any dimension.
//!
//! The basis function of local face `i` (opposite vertex `P_i`) is
//! `φ_i(x) = |f_i| / (d |T|) (x - P_i)`, which has unit outward normal flux
//! density on face `i` and zero on all other faces.

use crate::error::{Error, Result};
use crate::meshing::{simplex_measure, Point};

fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Face measures in local order (face `i` omits vertex `i`).
pub fn face_measures(p: &[Point]) -> Vec<f64> {
    (0..p.len())
        .map(|i| {
            let f: Vec<Point> = p.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, q)| *q).collect();
            simplex_measure(&f)
        })
        .collect()
}

/// `(K⁻¹ φ_i, φ_j)_T` for all local faces, row-major `(d+1) × (d+1)`,
/// integrated exactly.
pub fn local_rt0_mass(p: &[Point], k: f64) -> Result<Vec<f64>> {
    let n = p.len();
    let d = n - 1;
    if d == 0 {
        return Err(Error::Assembly("RT0 element on a point".into()));
    }
    if !(k > 0.0) {
        return Err(Error::Assembly(format!("permeability {k}")));
    }
    let vol = simplex_measure(p);
    let diam = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| dot3(&sub(&p[i], &p[j]), &sub(&p[i], &p[j]))).fold(0.0, f64::max).sqrt();
    if !(vol > 1e-14 * diam.powi(d as i32)) {
        return Err(Error::Assembly(format!("degenerate cell with measure {vol:e}")));
    }
    let fm = face_measures(p);
    // ∫ λ_k λ_l = |T| (1 + δ_kl) / ((d+1)(d+2))
    let w = vol / ((d + 1) * (d + 2)) as f64;
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            for a in 0..n {
                let ea = sub(&p[a], &p[i]);
                for b in 0..n {
                    let eb = sub(&p[b], &p[j]);
                    s += dot3(&ea, &eb) * if a == b { 2.0 } else { 1.0 };
                }
            }
            let v = fm[i] * fm[j] / ((d * d) as f64 * vol * vol * k) * w * s;
            m[i * n + j] = v;
            m[j * n + i] = v;
        }
    }
    Ok(m)
}
