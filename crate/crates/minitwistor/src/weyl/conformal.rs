//! Conformal structure from second-order tangency: a deformation direction
//! V is null when the section sigma_V = V^a d_a phi has a double zero, i.e.
//! the deformed curve meets the base curve to second order somewhere. For
//! degree-2 normal bundles the null directions sweep a smooth conic in the
//! projectivized tangent space; fitting that conic recovers the conformal
//! metric up to scale.

use super::SymMatrix;
use crate::error::{Error, Result};
use crate::family::{normal_transition_from_sweep, Family};
use nalgebra::DMatrix;
use num_complex::Complex64;

type C = Complex64;

/// Recover the conformal metric (up to scale, normalized to unit leading
/// entry) at parameter point t by fitting the conic of null directions.
/// Requires m = 3 and normal bundle degree 2.
pub fn conformal_from_family(fam: &Family, t: &[C], k: usize) -> Result<SymMatrix> {
    if fam.m() != 3 {
        return Err(Error::InvariantViolation {
            name: "conformal_from_family",
            detail: format!("requires a 3-parameter family, got m = {}", fam.m()),
        });
    }
    let sweep = fam.sweep(t, 1.0, k)?;
    let nt = normal_transition_from_sweep(&sweep)?;
    if nt.degree != 2 {
        return Err(Error::SectionNotQuadratic(nt.degree));
    }
    // null directions: at each sample z_k the direction annihilating both
    // sigma(z_k) and sigma'(z_k) meets the base curve to second order at
    // z_k; for 3 parameters it is the complex cross product of the rows.
    let n_dirs = 12usize.min(k);
    let stride = (k / n_dirs).max(1);
    let mut dirs: Vec<[C; 3]> = Vec::new();
    for j in 0..n_dirs {
        let idx = (j * stride) % k;
        let r1 = [
            sweep.dphi1[0][idx],
            sweep.dphi1[1][idx],
            sweep.dphi1[2][idx],
        ];
        let r2 = [
            sweep.dphi1_z[0][idx],
            sweep.dphi1_z[1][idx],
            sweep.dphi1_z[2][idx],
        ];
        let v = cross(&r1, &r2);
        let nrm = (v[0].norm_sqr() + v[1].norm_sqr() + v[2].norm_sqr()).sqrt();
        if nrm < 1e-10 {
            continue;
        }
        dirs.push([v[0] / nrm, v[1] / nrm, v[2] / nrm]);
    }
    if dirs.len() < 6 {
        return Err(Error::RankDeficient);
    }
    // fit the conic V^T G V = 0 through the null directions
    let mut mat = DMatrix::from_element(dirs.len(), 6, C::new(0.0, 0.0));
    for (row, v) in dirs.iter().enumerate() {
        mat[(row, 0)] = v[0] * v[0];
        mat[(row, 1)] = 2.0 * v[0] * v[1];
        mat[(row, 2)] = 2.0 * v[0] * v[2];
        mat[(row, 3)] = v[1] * v[1];
        mat[(row, 4)] = 2.0 * v[1] * v[2];
        mat[(row, 5)] = v[2] * v[2];
    }
    let svd = mat.svd(false, true);
    let v_t = svd.v_t.as_ref().ok_or(Error::SolverFailure("conic fit"))?;
    let sv = &svd.singular_values;
    let n_sv = sv.len();
    // the nullspace must be 1-dimensional and well separated
    let smallest = sv[n_sv - 1];
    let second = sv[n_sv - 2];
    if second <= 0.0 || smallest / second > 1e-5 {
        return Err(Error::InvariantViolation {
            name: "conformal conic fit",
            detail: format!(
                "null directions do not determine a unique conic (sv ratio {:.3e})",
                if second > 0.0 { smallest / second } else { f64::NAN }
            ),
        });
    }
    let row = v_t.row(n_sv - 1);
    let mut g = SymMatrix::zero(3);
    g.set(0, 0, row[0].conj());
    g.set(0, 1, row[1].conj());
    g.set(0, 2, row[2].conj());
    g.set(1, 1, row[3].conj());
    g.set(1, 2, row[4].conj());
    g.set(2, 2, row[5].conj());
    Ok(g.normalized())
}

fn cross(a: &[C; 3], b: &[C; 3]) -> [C; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Proportionality of two symmetric 3x3 matrices: the max 2x2 minor of the
/// stacked 6x2 component matrix, after normalizing both to unit max entry.
pub fn minors_residual(a: &SymMatrix, b: &SymMatrix) -> f64 {
    let na = a.max_abs().max(1e-300);
    let nb = b.max_abs().max(1e-300);
    let av: Vec<C> = a.packed().iter().map(|v| v / na).collect();
    let bv: Vec<C> = b.packed().iter().map(|v| v / nb).collect();
    let mut worst = 0.0f64;
    for i in 0..av.len() {
        for j in (i + 1)..av.len() {
            worst = worst.max((av[i] * bv[j] - av[j] * bv[i]).norm());
        }
    }
    worst
}
