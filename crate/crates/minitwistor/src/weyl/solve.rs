//! Solving for the 1-forms a and b and assembling the Weyl connection.
//!
//! A connection Gamma is projectively equivalent to a Weyl connection for g
//! exactly when `(grad g)_{abc} = a_a g_bc + b_b g_ac + b_c g_ab` for some
//! 1-forms: 18 equations in 6 unknowns, solved least-squares. The Weyl
//! connection itself is `D = LC(g) + 1/2 omega^# g - omega . I` with
//! `omega = a - 2b`; its defining compatibility is `(Dg)_{c;ab} = omega_c
//! g_ab` in the derivative-index-first convention used throughout.

use super::levi_civita::{levi_civita, levi_civita_exact};
use super::{MetricField, OneFormField, SymMatrix, WeylStructure};
use crate::error::{Error, Result};
use crate::family::{sym_count, sym_index, sym_pairs};
use crate::projconn::{Christoffel, ChristoffelField};
use nalgebra::DMatrix;
use num_complex::Complex64;

type C = Complex64;

const FD_STEP: f64 = 1e-4;

/// Covariant derivative of the metric: (grad g)_{abc} = d_a g_bc
/// - Gamma^d_ab g_dc - Gamma^d_ac g_bd. Derivative index first.
pub fn nabla_g(gamma: &Christoffel, g: &MetricField, t: &[C]) -> Result<Vec<SymMatrix>> {
    let m = g.m();
    let gm = g.eval(t)?;
    let mut out = Vec::with_capacity(m);
    for a in 0..m {
        let dga = g.eval_deriv(t, a, FD_STEP)?;
        let mut slab = SymMatrix::zero(m);
        for b in 0..m {
            for c in b..m {
                let mut v = dga.get(b, c);
                for d in 0..m {
                    v -= gamma.get(d, a, b) * gm.get(d, c);
                    v -= gamma.get(d, a, c) * gm.get(b, d);
                }
                slab.set(b, c, v);
            }
        }
        out.push(slab);
    }
    Ok(out)
}

/// Solve `(grad g)_{abc} = a_a g_bc + b_b g_ac + b_c g_ab` least-squares.
/// Returns (a, b, residual); a small residual certifies that gamma is
/// projectively equivalent to a Weyl connection for g.
pub fn solve_ab(
    gamma: &Christoffel,
    g: &MetricField,
    t: &[C],
) -> Result<(Vec<C>, Vec<C>, f64)> {
    let m = g.m();
    let gm = g.eval(t)?;
    let grad = nabla_g(gamma, g, t)?;
    let pairs = sym_pairs(m);
    let rows = m * pairs.len();
    let unknowns = 2 * m; // a_0..a_{m-1}, b_0..b_{m-1}
    let mut mat = DMatrix::from_element(rows, unknowns, C::new(0.0, 0.0));
    let mut rhs = DMatrix::from_element(rows, 1, C::new(0.0, 0.0));
    let mut row = 0;
    for a in 0..m {
        for &(b, c) in &pairs {
            // coefficient of a_mu: delta_{mu a} g_bc
            mat[(row, a)] = gm.get(b, c);
            // coefficient of b_mu: delta_{mu b} g_ac + delta_{mu c} g_ab
            mat[(row, m + b)] += gm.get(a, c);
            mat[(row, m + c)] += gm.get(a, b);
            rhs[(row, 0)] = grad[a].get(b, c);
            row += 1;
        }
    }
    let svd = mat.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax <= 0.0 || smin / smax < 1e-12 {
        return Err(Error::RankDeficient);
    }
    let x = svd
        .solve(&rhs, 1e-14)
        .map_err(|_| Error::SolverFailure("weyl 1-form least squares"))?;
    let res = (&mat * &x - &rhs)
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    let a_form: Vec<C> = (0..m).map(|i| x[(i, 0)]).collect();
    let b_form: Vec<C> = (0..m).map(|i| x[(m + i, 0)]).collect();
    Ok((a_form, b_form, res))
}

/// Assemble the Weyl structure from a metric and omega. When both are
/// exact, the connection field is exact (symbolically differentiable);
/// otherwise it is a pointwise evaluator.
pub fn assemble_weyl(metric: MetricField, omega: OneFormField) -> Result<WeylStructure> {
    let m = metric.m();
    if omega.m() != m {
        return Err(Error::InvariantViolation {
            name: "assemble_weyl",
            detail: "metric and 1-form dimensions differ".into(),
        });
    }
    let connection = match (&metric, &omega) {
        (MetricField::Exact { params, m, entries }, OneFormField::Exact { comps, .. }) => {
            let lc = levi_civita_exact(&metric)?;
            let lc_vals = match &lc {
                ChristoffelField::Exact { vals, .. } => vals.clone(),
                _ => unreachable!(),
            };
            // omega^c = g^{cd} omega_d, exact inverse via the same route
            // as levi_civita_exact
            let minv = exact_inverse(params, *m, entries)?;
            let mut vals = lc_vals;
            let half = crate::exact::Scalar::from_ratio(1, 2);
            for c in 0..*m {
                let mut omega_up = crate::exact::RatFunc::zero();
                for d in 0..*m {
                    omega_up = omega_up.add(&minv[c][d].mul(&comps[d]));
                }
                for &(a, b) in sym_pairs(*m).iter() {
                    let idx = c * sym_count(*m) + sym_index(*m, a, b);
                    let mut v = vals[idx].clone();
                    // + 1/2 omega^c g_ab
                    v = v.add(
                        &omega_up
                            .mul(&entries[sym_index(*m, a, b)])
                            .mul_scalar(&half),
                    );
                    // - 1/2 (omega_a d^c_b + omega_b d^c_a)
                    if c == b {
                        v = v.sub(&comps[a].mul_scalar(&half));
                    }
                    if c == a {
                        v = v.sub(&comps[b].mul_scalar(&half));
                    }
                    vals[idx] = v;
                }
            }
            ChristoffelField::Exact {
                params: params.clone(),
                m: *m,
                vals,
            }
        }
        _ => {
            let metric = metric.clone();
            let omega = omega.clone();
            ChristoffelField::from_fn(m, move |t| {
                weyl_connection_at(&metric, &omega, t)
            })
        }
    };
    Ok(WeylStructure {
        metric,
        omega,
        connection,
    })
}

fn exact_inverse(
    params: &[String],
    m: usize,
    entries: &[crate::exact::RatFunc],
) -> Result<Vec<Vec<crate::exact::RatFunc>>> {
    // reuse levi_civita_exact's expansion through a tiny local copy
    use crate::exact::RatFunc;
    let get = |a: usize, b: usize| entries[sym_index(m, a, b)].clone();
    let full: Vec<Vec<RatFunc>> = (0..m)
        .map(|i| (0..m).map(|j| get(i, j)).collect())
        .collect();
    let det = det_rf(&full);
    if det.is_zero() {
        return Err(Error::SingularMetric);
    }
    let mut inv = vec![vec![RatFunc::zero(); m]; m];
    for i in 0..m {
        for j in 0..m {
            let minor: Vec<Vec<RatFunc>> = full
                .iter()
                .enumerate()
                .filter(|(r, _)| *r != i)
                .map(|(_, row)| {
                    row.iter()
                        .enumerate()
                        .filter(|(c, _)| *c != j)
                        .map(|(_, v)| v.clone())
                        .collect()
                })
                .collect();
            let mut cof = det_rf(&minor);
            if (i + j) % 2 == 1 {
                cof = cof.neg();
            }
            inv[i][j] = cof.div(&det)?;
        }
    }
    let _ = params;
    Ok(inv)
}

fn det_rf(mat: &[Vec<crate::exact::RatFunc>]) -> crate::exact::RatFunc {
    use crate::exact::{MultiPoly, RatFunc};
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
        let minor: Vec<Vec<RatFunc>> = mat
            .iter()
            .skip(1)
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        let mut term = mat[0][j].mul(&det_rf(&minor));
        if j % 2 == 1 {
            term = term.neg();
        }
        acc = acc.add(&term);
    }
    acc
}

/// D = LC(g) + 1/2 omega^# g - 1/2 (omega_a d^c_b + omega_b d^c_a) at t.
pub fn weyl_connection_at(
    metric: &MetricField,
    omega: &OneFormField,
    t: &[C],
) -> Result<Christoffel> {
    let m = metric.m();
    let mut d = levi_civita(metric, t)?;
    let gm = metric.eval(t)?;
    let ginv = gm.inverse()?;
    let om = omega.eval(t)?;
    let om_up: Vec<C> = (0..m)
        .map(|c| (0..m).map(|e| ginv[(c, e)] * om[e]).sum())
        .collect();
    for c in 0..m {
        for a in 0..m {
            for b in a..m {
                let mut v = d.get(c, a, b) + 0.5 * om_up[c] * gm.get(a, b);
                if c == b {
                    v -= 0.5 * om[a];
                }
                if c == a {
                    v -= 0.5 * om[b];
                }
                d.set(c, a, b, v);
            }
        }
    }
    Ok(d)
}

/// Residual of the Weyl compatibility `(Dg)_{c;ab} = omega_c g_ab`
/// (derivative index first; the sign/constant is fixed by this module's
/// conventions and verified in tests).
pub fn weyl_compatibility_residual(ws: &WeylStructure, t: &[C]) -> Result<f64> {
    let m = ws.metric.m();
    let d = ws.connection.eval(t)?;
    let grad = nabla_g(&d, &ws.metric, t)?;
    let gm = ws.metric.eval(t)?;
    let om = ws.omega.eval(t)?;
    let mut worst = 0.0f64;
    for c in 0..m {
        for a in 0..m {
            for b in a..m {
                let expect = om[c] * gm.get(a, b);
                worst = worst.max((grad[c].get(a, b) - expect).norm());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{parse_expr, ParseContext, RatFunc};

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    fn exact_metric(entries: &[(&str, usize, usize)], params: &[&str]) -> MetricField {
        let m = params.len();
        let ctx = ParseContext::new(params, &[]);
        let mut packed = vec![RatFunc::zero(); sym_count(m)];
        for (src, a, b) in entries {
            packed[sym_index(m, *a, *b)] = parse_expr(src, &ctx).unwrap().as_ratfunc().unwrap();
        }
        MetricField::Exact {
            params: params.iter().map(|s| s.to_string()).collect(),
            m,
            entries: packed,
        }
    }

    #[test]
    fn flat_gamma_constant_g_gives_zero_forms() {
        let g = exact_metric(
            &[("1", 0, 0), ("1", 1, 1), ("1", 2, 2)],
            &["t0", "t1", "t2"],
        );
        let gamma = Christoffel::zero(3);
        let (a, b, res) = solve_ab(&gamma, &g, &[c(0.1), c(0.2), c(0.3)]).unwrap();
        assert!(res < 1e-12);
        assert!(a.iter().all(|x| x.norm() < 1e-12));
        assert!(b.iter().all(|x| x.norm() < 1e-12));
    }

    #[test]
    fn weyl_compatibility_sign_is_plus_one() {
        // any exact metric and 1-form: (Dg)_{c;ab} must equal +omega_c g_ab
        let g = exact_metric(
            &[("1", 0, 0), ("1 + t0^2", 1, 1), ("2", 2, 2)],
            &["t0", "t1", "t2"],
        );
        let ctx = ParseContext::new(&["t0", "t1", "t2"], &[]);
        let omega = OneFormField::Exact {
            params: vec!["t0".into(), "t1".into(), "t2".into()],
            comps: vec![
                parse_expr("t1", &ctx).unwrap().as_ratfunc().unwrap(),
                parse_expr("1/2", &ctx).unwrap().as_ratfunc().unwrap(),
                parse_expr("t0*t2", &ctx).unwrap().as_ratfunc().unwrap(),
            ],
        };
        let ws = assemble_weyl(g, omega).unwrap();
        let res = weyl_compatibility_residual(&ws, &[c(0.2), c(-0.1), c(0.3)]).unwrap();
        assert!(res < 1e-9, "compatibility residual {res}");
    }

    #[test]
    fn zero_omega_gives_levi_civita() {
        let g = exact_metric(
            &[("1", 0, 0), ("1 + t0^2", 1, 1), ("2", 2, 2)],
            &["t0", "t1", "t2"],
        );
        let omega = OneFormField::Exact {
            params: vec!["t0".into(), "t1".into(), "t2".into()],
            comps: vec![RatFunc::zero(), RatFunc::zero(), RatFunc::zero()],
        };
        let t = [c(0.4), c(0.1), c(-0.2)];
        let ws = assemble_weyl(g.clone(), omega).unwrap();
        let d = ws.connection.eval(&t).unwrap();
        let lc = levi_civita(&g, &t).unwrap();
        assert!(d.sub(&lc).max_abs() < 1e-10);
    }
}
