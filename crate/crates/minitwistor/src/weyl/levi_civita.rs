//! Levi-Civita symbols of a metric field, numerically at a point or as an
//! exact rational field.

use super::{MetricField, SymMatrix};
use crate::error::{Error, Result};
use crate::exact::{MultiPoly, RatFunc};
use crate::family::{sym_count, sym_index, sym_pairs};
use crate::projconn::{Christoffel, ChristoffelField};
use num_complex::Complex64;

type C = Complex64;

const FD_STEP: f64 = 1e-4;

/// Gamma^c_ab = 1/2 g^{cd} (d_a g_db + d_b g_da - d_d g_ab) at t.
pub fn levi_civita(g: &MetricField, t: &[C]) -> Result<Christoffel> {
    let m = g.m();
    let gm = g.eval(t)?;
    let ginv = gm.inverse()?;
    let dg: Vec<SymMatrix> = (0..m)
        .map(|dir| g.eval_deriv(t, dir, FD_STEP))
        .collect::<Result<_>>()?;
    let mut out = Christoffel::zero(m);
    for c in 0..m {
        for a in 0..m {
            for b in a..m {
                let mut acc = C::new(0.0, 0.0);
                for d in 0..m {
                    let term = dg[a].get(d, b) + dg[b].get(d, a) - dg[d].get(a, b);
                    acc += ginv[(c, d)] * term;
                }
                out.set(c, a, b, 0.5 * acc);
            }
        }
    }
    Ok(out)
}

/// Componentwise max of the covariant derivative of g with respect to
/// `gamma` (zero for the Levi-Civita connection).
pub fn metricity_residual(g: &MetricField, gamma: &Christoffel, t: &[C]) -> Result<f64> {
    let m = g.m();
    let gm = g.eval(t)?;
    let mut worst = 0.0f64;
    for dir in 0..m {
        let dgd = g.eval_deriv(t, dir, FD_STEP)?;
        for a in 0..m {
            for b in a..m {
                let mut v = dgd.get(a, b);
                for d in 0..m {
                    v -= gamma.get(d, dir, a) * gm.get(d, b);
                    v -= gamma.get(d, dir, b) * gm.get(a, d);
                }
                worst = worst.max(v.norm());
            }
        }
    }
    Ok(worst)
}

/// Exact Levi-Civita field for an exact metric: the inverse metric is
/// computed by cofactor expansion over the rational function field, so the
/// result is an exact Christoffel field (symbolically differentiable).
pub fn levi_civita_exact(g: &MetricField) -> Result<ChristoffelField> {
    let (params, m, entries) = match g {
        MetricField::Exact { params, m, entries } => (params, *m, entries),
        _ => {
            return Err(Error::InvariantViolation {
                name: "levi_civita_exact",
                detail: "metric must be exact".into(),
            })
        }
    };
    let get = |a: usize, b: usize| entries[sym_index(m, a, b)].clone();
    // determinant and adjugate by Laplace expansion (m is small)
    let full: Vec<Vec<RatFunc>> = (0..m)
        .map(|i| (0..m).map(|j| get(i, j)).collect())
        .collect();
    let det = det_ratfunc(&full);
    if det.is_zero() {
        return Err(Error::SingularMetric);
    }
    let mut ginv: Vec<Vec<RatFunc>> = vec![vec![RatFunc::zero(); m]; m];
    for i in 0..m {
        for j in 0..m {
            let minor = minor_matrix(&full, i, j);
            let mut cof = det_ratfunc(&minor);
            if (i + j) % 2 == 1 {
                cof = cof.neg();
            }
            // adjugate transposes, but the matrix is symmetric
            ginv[i][j] = cof.div(&det)?;
        }
    }
    let dg: Vec<Vec<Vec<RatFunc>>> = (0..m)
        .map(|dir| {
            (0..m)
                .map(|i| {
                    (0..m)
                        .map(|j| get(i, j).derivative(&params[dir]))
                        .collect()
                })
                .collect()
        })
        .collect();
    // entries of the output are formed by sums of products below; keep them
    // reduced so downstream symbolic differentiation stays tractable
    let half = crate::exact::Scalar::from_ratio(1, 2);
    let mut vals = vec![RatFunc::zero(); m * sym_count(m)];
    for c in 0..m {
        for &(a, b) in sym_pairs(m).iter() {
            let mut acc = RatFunc::zero();
            for d in 0..m {
                let term = dg[a][d][b].add(&dg[b][d][a]).sub(&dg[d][a][b]);
                acc = acc.add(&ginv[c][d].mul(&term));
            }
            vals[c * sym_count(m) + sym_index(m, a, b)] = acc.mul_scalar(&half);
        }
    }
    Ok(ChristoffelField::Exact {
        params: params.clone(),
        m,
        vals,
    })
}

fn minor_matrix(mat: &[Vec<RatFunc>], drop_row: usize, drop_col: usize) -> Vec<Vec<RatFunc>> {
    mat.iter()
        .enumerate()
        .filter(|(i, _)| *i != drop_row)
        .map(|(_, row)| {
            row.iter()
                .enumerate()
                .filter(|(j, _)| *j != drop_col)
                .map(|(_, v)| v.clone())
                .collect()
        })
        .collect()
}

fn det_ratfunc(mat: &[Vec<RatFunc>]) -> RatFunc {
    let n = mat.len();
    if n == 0 {
        return RatFunc::from_poly(MultiPoly::one());
    }
    if n == 1 {
        return mat[0][0].clone();
    }
    let mut acc = RatFunc::zero();
    for j in 0..n {
        if mat[0][j].is_zero() {
            continue;
        }
        let minor = minor_matrix(mat, 0, j);
        let mut term = mat[0][j].mul(&det_ratfunc(&minor));
        if j % 2 == 1 {
            term = term.neg();
        }
        acc = acc.add(&term);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{parse_expr, ParseContext};

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    fn exact_metric(entries: &[(&str, usize, usize)], params: &[&str]) -> MetricField {
        let m = params.len();
        let ctx = ParseContext::new(params, &[]);
        let mut packed = vec![RatFunc::zero(); sym_count(m)];
        for (src, a, b) in entries {
            packed[sym_index(m, *a, *b)] =
                parse_expr(src, &ctx).unwrap().as_ratfunc().unwrap();
        }
        MetricField::Exact {
            params: params.iter().map(|s| s.to_string()).collect(),
            m,
            entries: packed,
        }
    }

    #[test]
    fn constant_metric_is_flat() {
        let g = exact_metric(&[("1", 0, 0), ("2", 1, 1)], &["t0", "t1"]);
        let lc = levi_civita(&g, &[c(0.3), c(-0.2)]).unwrap();
        assert!(lc.max_abs() < 1e-12);
    }

    #[test]
    fn polar_form_metric() {
        // g = dt0^2 + t0^2 dt1^2: Gamma^0_{11} = -t0, Gamma^1_{01} = 1/t0
        let g = exact_metric(&[("1", 0, 0), ("t0^2", 1, 1)], &["t0", "t1"]);
        let t = [c(0.7), c(0.2)];
        let lc = levi_civita(&g, &t).unwrap();
        assert!((lc.get(0, 1, 1) - c(-0.7)).norm() < 1e-9);
        assert!((lc.get(1, 0, 1) - c(1.0 / 0.7)).norm() < 1e-9);
        let res = metricity_residual(&g, &lc, &t).unwrap();
        assert!(res < 1e-9, "metricity {res}");
        // exact field agrees
        let lc_exact = levi_civita_exact(&g).unwrap().eval(&t).unwrap();
        assert!(lc.sub(&lc_exact).max_abs() < 1e-9);
    }
}
