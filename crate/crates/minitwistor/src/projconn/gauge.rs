//! Projective-equivalence algebra: two connections are projectively
//! equivalent iff they differ by `xi_a d^c_b + xi_b d^c_a` for a 1-form xi.
//! The trace recovers xi, and the residual of the trace-form ansatz is the
//! operational equivalence test. Also the general coordinate transformation
//! of a connection field.

use super::{Christoffel, ChristoffelField};
use crate::cech::GaugeOneForm;
use crate::error::{Error, Result};
use crate::exact::RatFunc;
use num_complex::Complex64;
use std::collections::BTreeMap;

type C = Complex64;

/// Decompose the difference of two connections into its trace 1-form and
/// the residual off-trace part. Residual ~ 0 iff projectively equivalent.
pub fn projective_difference(ga: &Christoffel, gb: &Christoffel) -> (GaugeOneForm, f64) {
    assert_eq!(ga.m(), gb.m(), "dimension mismatch");
    let m = ga.m();
    let diff = ga.sub(gb);
    // trace: sum_b diff^b_{a b} = (m + 1) xi_a
    let mut xi = vec![C::new(0.0, 0.0); m];
    for (a, x) in xi.iter_mut().enumerate() {
        let mut acc = C::new(0.0, 0.0);
        for b in 0..m {
            acc += diff.get(b, a, b);
        }
        *x = acc / ((m + 1) as f64);
    }
    let mut residual = 0.0f64;
    for g in 0..m {
        for a in 0..m {
            for b in a..m {
                let mut expect = C::new(0.0, 0.0);
                if g == b {
                    expect += xi[a];
                }
                if g == a {
                    expect += xi[b];
                }
                residual = residual.max((diff.get(g, a, b) - expect).norm());
            }
        }
    }
    (GaugeOneForm { xi }, residual)
}

/// Gauge a connection inside its projective class:
/// `Gamma -> Gamma + xi_a d^c_b + xi_b d^c_a`.
pub fn gauge_connection(gamma: &Christoffel, xi: &GaugeOneForm) -> Christoffel {
    let m = gamma.m();
    assert_eq!(xi.m(), m, "dimension mismatch");
    let mut out = gamma.clone();
    for g in 0..m {
        for a in 0..m {
            for b in a..m {
                let mut v = out.get(g, a, b);
                if g == b {
                    v += xi.xi[a];
                }
                if g == a {
                    v += xi.xi[b];
                }
                out.set(g, a, b, v);
            }
        }
    }
    out
}

/// Gauge a whole field by a constant 1-form.
pub fn gauge_field(field: &ChristoffelField, xi: GaugeOneForm) -> ChristoffelField {
    let inner = field.clone();
    ChristoffelField::from_fn(field.m(), move |t| {
        Ok(gauge_connection(&inner.eval(t)?, &xi))
    })
}

/// A parameter chart change with exact components `t' = T(t)`.
#[derive(Clone, Debug)]
pub struct CoordMap {
    pub params: Vec<String>,
    pub components: Vec<RatFunc>,
}

impl CoordMap {
    pub fn m(&self) -> usize {
        self.components.len()
    }

    fn point_map(&self, t: &[C]) -> BTreeMap<String, C> {
        self.params
            .iter()
            .cloned()
            .zip(t.iter().copied())
            .collect()
    }

    pub fn apply(&self, t: &[C]) -> Result<Vec<C>> {
        let pt = self.point_map(t);
        self.components
            .iter()
            .map(|c| c.eval_complex_map(&pt))
            .collect()
    }

    /// J^{a'}_b = d T^{a'} / d t^b at t.
    pub fn jacobian(&self, t: &[C]) -> Result<nalgebra::DMatrix<C>> {
        let pt = self.point_map(t);
        let m = self.m();
        let mut j = nalgebra::DMatrix::from_element(m, m, C::new(0.0, 0.0));
        for (row, comp) in self.components.iter().enumerate() {
            for (col, p) in self.params.iter().enumerate() {
                j[(row, col)] = comp.derivative(p).eval_complex_map(&pt)?;
            }
        }
        Ok(j)
    }

    /// H^{a'}_{bc} = d^2 T^{a'} / dt^b dt^c at t.
    pub fn hessian(&self, t: &[C]) -> Result<Vec<nalgebra::DMatrix<C>>> {
        let pt = self.point_map(t);
        let m = self.m();
        let mut out = Vec::with_capacity(m);
        for comp in &self.components {
            let mut h = nalgebra::DMatrix::from_element(m, m, C::new(0.0, 0.0));
            for b in 0..m {
                let db = comp.derivative(&self.params[b]);
                for c in b..m {
                    let v = db.derivative(&self.params[c]).eval_complex_map(&pt)?;
                    h[(b, c)] = v;
                    h[(c, b)] = v;
                }
            }
            out.push(h);
        }
        Ok(out)
    }
}

/// Transform a connection given at points `t` to the chart `t' = T(t)`:
///
/// `Gamma'^{c'}_{a'b'} = (dt^{c'}/dt^d) [ Gamma^d_{mn} (dt^m/dt^{a'}) (dt^n/dt^{b'}) + d^2 t^d / dt^{a'} dt^{b'} ]`
///
/// applied pointwise with the inverse-map derivatives obtained from the
/// forward Jacobian and Hessian. Returns pairs (T(t), Gamma'(T(t))).
pub fn transform_coordinates(
    points: &[(Vec<C>, Christoffel)],
    map: &CoordMap,
) -> Result<Vec<(Vec<C>, Christoffel)>> {
    let m = map.m();
    let mut out = Vec::with_capacity(points.len());
    for (t, gamma) in points {
        let t_new = map.apply(t)?;
        let j = map.jacobian(t)?;
        let j_inv = j.clone().try_inverse().ok_or(Error::SingularJacobian)?;
        let h = map.hessian(t)?;
        // Hessian of the inverse map: d^2 t^d / dt^{a'} dt^{b'}
        //   = - (J^{-1})^d_e H^e_{fg} (J^{-1})^f_{a'} (J^{-1})^g_{b'}
        let mut gp = Christoffel::zero(m);
        for cp in 0..m {
            for ap in 0..m {
                for bp in ap..m {
                    let mut acc = C::new(0.0, 0.0);
                    for d in 0..m {
                        // bracket = Gamma^d_{mn} Jinv^m_{a'} Jinv^n_{b'} + Hinv^d_{a'b'}
                        let mut bracket = C::new(0.0, 0.0);
                        for mm in 0..m {
                            for nn in 0..m {
                                bracket +=
                                    gamma.get(d, mm, nn) * j_inv[(mm, ap)] * j_inv[(nn, bp)];
                            }
                        }
                        let mut hinv = C::new(0.0, 0.0);
                        for e in 0..m {
                            for f in 0..m {
                                for g in 0..m {
                                    hinv -= j_inv[(d, e)]
                                        * h[e][(f, g)]
                                        * j_inv[(f, ap)]
                                        * j_inv[(g, bp)];
                                }
                            }
                        }
                        bracket += hinv;
                        acc += j[(cp, d)] * bracket;
                    }
                    gp.set(cp, ap, bp, acc);
                }
            }
        }
        out.push((t_new, gp));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{parse_expr, ParseContext};

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    #[test]
    fn projective_difference_identity_and_gauge() {
        let mut g = Christoffel::zero(3);
        g.set(0, 0, 1, c(2.0));
        g.set(1, 1, 1, c(-1.0));
        let (xi, res) = projective_difference(&g, &g);
        assert!(res == 0.0);
        assert!(xi.xi.iter().all(|x| x.norm() == 0.0));

        // gauge by xi = (1, 0, 0), recover it
        let xi_in = GaugeOneForm {
            xi: vec![c(1.0), c(0.0), c(0.0)],
        };
        let gauged = gauge_connection(&g, &xi_in);
        let (xi_out, res2) = projective_difference(&gauged, &g);
        assert!(res2 < 1e-14);
        for (a, b) in xi_out.xi.iter().zip(xi_in.xi.iter()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn non_trace_difference_has_residual() {
        let g = Christoffel::zero(3);
        let mut g2 = Christoffel::zero(3);
        g2.set(0, 1, 1, c(1.0));
        let (_, res) = projective_difference(&g2, &g);
        assert!(res > 0.2, "residual {res}");
    }

    fn quad_map() -> CoordMap {
        let params = vec!["t0".to_string(), "t1".to_string(), "t2".to_string()];
        let ctx = ParseContext::new(&["t0", "t1", "t2"], &[]);
        let components = vec![
            parse_expr("t0 + t1^2", &ctx).unwrap().as_ratfunc().unwrap(),
            parse_expr("t1", &ctx).unwrap().as_ratfunc().unwrap(),
            parse_expr("t2", &ctx).unwrap().as_ratfunc().unwrap(),
        ];
        CoordMap { params, components }
    }

    #[test]
    fn linear_map_preserves_flat() {
        let params = vec!["t0".to_string(), "t1".to_string(), "t2".to_string()];
        let ctx = ParseContext::new(&["t0", "t1", "t2"], &[]);
        let map = CoordMap {
            params,
            components: vec![
                parse_expr("2*t0", &ctx).unwrap().as_ratfunc().unwrap(),
                parse_expr("2*t1", &ctx).unwrap().as_ratfunc().unwrap(),
                parse_expr("2*t2", &ctx).unwrap().as_ratfunc().unwrap(),
            ],
        };
        let pts = vec![(vec![c(0.1), c(0.2), c(0.3)], Christoffel::zero(3))];
        let out = transform_coordinates(&pts, &map).unwrap();
        assert!(out[0].1.max_abs() < 1e-14);
    }

    #[test]
    fn quadratic_map_produces_hessian_entries() {
        // t'^0 = t0 + t1^2 on flat Gamma: only Gamma'^0_{1'1'} = -2 appears
        // (inverse map t0 = t'0 - t'1^2 has Hessian -2 there)
        let map = quad_map();
        let pts = vec![(vec![c(0.0), c(0.5), c(0.0)], Christoffel::zero(3))];
        let out = transform_coordinates(&pts, &map).unwrap();
        let gp = &out[0].1;
        assert!((gp.get(0, 1, 1) - c(-2.0)).norm() < 1e-12);
        let mut rest = 0.0f64;
        for g in 0..3 {
            for a in 0..3 {
                for b in a..3 {
                    if (g, a, b) != (0, 1, 1) {
                        rest = rest.max(gp.get(g, a, b).norm());
                    }
                }
            }
        }
        assert!(rest < 1e-12);
    }

    #[test]
    fn round_trip_map_restores_connection() {
        let map = quad_map();
        let params = vec!["t0".to_string(), "t1".to_string(), "t2".to_string()];
        let ctx = ParseContext::new(&["t0", "t1", "t2"], &[]);
        let inv = CoordMap {
            params,
            components: vec![
                parse_expr("t0 - t1^2", &ctx).unwrap().as_ratfunc().unwrap(),
                parse_expr("t1", &ctx).unwrap().as_ratfunc().unwrap(),
                parse_expr("t2", &ctx).unwrap().as_ratfunc().unwrap(),
            ],
        };
        let mut g = Christoffel::zero(3);
        g.set(0, 0, 1, c(0.7));
        g.set(2, 1, 2, c(-0.3));
        g.set(1, 0, 0, c(0.2));
        let pts = vec![(vec![c(0.1), c(-0.2), c(0.4)], g.clone())];
        let once = transform_coordinates(&pts, &map).unwrap();
        let back = transform_coordinates(&once, &inv).unwrap();
        assert!((back[0].0[0] - c(0.1)).norm() < 1e-12);
        let diff = back[0].1.sub(&g);
        assert!(diff.max_abs() < 1e-10, "round trip error {}", diff.max_abs());
    }
}
