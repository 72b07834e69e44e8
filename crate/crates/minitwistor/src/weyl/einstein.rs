//! Einstein-Weyl residual: the trace-free part of the symmetrized Ricci
//! curvature of the Weyl connection, measured against the metric. The
//! proportionality function itself is unconstrained, so only the trace-free
//! part enters and the check is conformally invariant.

use super::{SymMatrix, WeylStructure};
use crate::error::Result;
use crate::projconn::ChristoffelField;
use num_complex::Complex64;

type C = Complex64;

/// Ricci tensor of a connection field at t (not symmetric for Weyl
/// connections): Ric_{sn} = R^mu_{s mu n} with
/// R^r_{s m n} = d_m G^r_{n s} - d_n G^r_{m s} + G^r_{m l} G^l_{n s}
///            - G^r_{n l} G^l_{m s}.
/// Derivatives are symbolic for exact fields and Richardson central
/// differences (step `h`) otherwise.
pub fn ricci(field: &ChristoffelField, t: &[C], h: f64) -> Result<Vec<Vec<C>>> {
    let m = field.m();
    let g0 = field.eval(t)?;
    let dg: Vec<_> = (0..m)
        .map(|dir| field.eval_deriv(t, dir, h))
        .collect::<Result<Vec<_>>>()?;
    let mut ric = vec![vec![C::new(0.0, 0.0); m]; m];
    for s in 0..m {
        for n in 0..m {
            let mut acc = C::new(0.0, 0.0);
            for mu in 0..m {
                // d_mu G^mu_{n s} - d_n G^mu_{mu s}
                acc += dg[mu].get(mu, n, s) - dg[n].get(mu, mu, s);
                // + G^mu_{mu l} G^l_{n s} - G^mu_{n l} G^l_{mu s}
                for l in 0..m {
                    acc += g0.get(mu, mu, l) * g0.get(l, n, s);
                    acc -= g0.get(mu, n, l) * g0.get(l, mu, s);
                }
            }
            ric[s][n] = acc;
        }
    }
    Ok(ric)
}

/// Norm of the trace-free part of the symmetrized Ricci of the Weyl
/// connection, relative to the size of Ricci itself (scale- and
/// conformal-representative-independent pass/fail).
pub fn einstein_weyl_residual(ws: &WeylStructure, t: &[C], h: f64) -> Result<f64> {
    let m = ws.metric.m();
    let ric = ricci(&ws.connection, t, h)?;
    let mut sym = SymMatrix::zero(m);
    for a in 0..m {
        for b in a..m {
            sym.set(a, b, 0.5 * (ric[a][b] + ric[b][a]));
        }
    }
    let gm = ws.metric.eval(t)?;
    let ginv = gm.inverse()?;
    // lambda = tr_g(sym Ric) / m
    let mut trace = C::new(0.0, 0.0);
    for a in 0..m {
        for b in 0..m {
            trace += ginv[(a, b)] * sym.get(a, b);
        }
    }
    let lambda = trace / (m as f64);
    let mut tf = 0.0f64;
    let mut scale = 0.0f64;
    for a in 0..m {
        for b in a..m {
            tf = tf.max((sym.get(a, b) - lambda * gm.get(a, b)).norm());
            scale = scale.max(sym.get(a, b).norm());
        }
    }
    Ok(tf / (1.0 + scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{parse_expr, ParseContext, RatFunc};
    use crate::family::{sym_count, sym_index};
    use crate::weyl::{assemble_weyl, MetricField, OneFormField};

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

    fn zero_omega(m: usize) -> OneFormField {
        OneFormField::Exact {
            params: vec!["t0".into(), "t1".into(), "t2".into()],
            comps: vec![RatFunc::zero(); m],
        }
    }

    #[test]
    fn flat_metric_is_einstein_weyl() {
        let g = exact_metric(
            &[("1", 0, 0), ("1", 1, 1), ("1", 2, 2)],
            &["t0", "t1", "t2"],
        );
        let ws = assemble_weyl(g, zero_omega(3)).unwrap();
        let r = einstein_weyl_residual(&ws, &[c(0.1), c(0.2), c(0.3)], 1e-3).unwrap();
        assert!(r < 1e-12, "residual {r}");
    }

    #[test]
    fn round_sphere_metric_is_einstein_weyl() {
        // constant-curvature rational metric: g = delta / (1 + |t|^2/4)^2,
        // Einstein, hence Einstein-Weyl with omega = 0
        let conf = "(1 + (t0^2 + t1^2 + t2^2)/4)^-2";
        let g = exact_metric(
            &[(conf, 0, 0), (conf, 1, 1), (conf, 2, 2)],
            &["t0", "t1", "t2"],
        );
        let ws = assemble_weyl(g, zero_omega(3)).unwrap();
        for t in [
            [c(0.1), c(0.2), c(-0.3)],
            [c(0.0), c(0.0), c(0.0)],
            [c(0.5), c(-0.4), c(0.2)],
        ] {
            let r = einstein_weyl_residual(&ws, &t, 1e-3).unwrap();
            assert!(r < 1e-9, "residual {r} at {t:?}");
        }
    }

    #[test]
    fn anisotropic_metric_is_not_einstein() {
        // a generic non-Einstein metric must show a sizable residual
        let g = exact_metric(
            &[("1 + t1^2", 0, 0), ("1", 1, 1), ("1 + t0^2 + 3*t0*t1", 2, 2)],
            &["t0", "t1", "t2"],
        );
        let ws = assemble_weyl(g, zero_omega(3)).unwrap();
        let r = einstein_weyl_residual(&ws, &[c(0.3), c(0.2), c(0.1)], 1e-3).unwrap();
        assert!(r > 1e-3, "residual {r}");
    }
}
