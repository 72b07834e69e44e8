//! Built-in families: the (1,1)-quadric line family and the double cover
//! branched along a (1,2)-curve in the quadric surface.

use super::{Family, Transition};
use crate::error::{Error, Result};
use crate::exact::{parse_expr, Assignment, BranchContext, ParseContext, RootSpec, Scalar};
use crate::Tolerances;
use num_complex::Complex64;
use std::collections::BTreeMap;

fn c64(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn base_assignment(pairs: &[(&str, f64)]) -> Assignment {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), c64(*v)))
        .collect()
}

/// Graphs of degree-1 rational maps: curves `eta = (a1*zeta + a0)/(b1*zeta + 1)`
/// in the quadric surface, in the charts `(w, z) = (eta - zeta, zeta)` and
/// `(wh, zh) = (1/eta - 1/zeta, 1/zeta)`. Parameters t = (a0, a1, b1) with
/// base point (0, 1, 0), the diagonal. Root-free: the whole pipeline has an
/// exact path for this family.
pub fn build_quadric_11() -> Result<Family> {
    let vars = ["w", "z", "zh", "a0", "a1", "b1"];
    let ctx = ParseContext::new(&vars, &[]);
    let phi1 = parse_expr("(a1*z + a0)/(b1*z + 1) - z", &ctx)?;
    let phi2 = parse_expr("(b1 + zh)/(a1 + a0*zh) - zh", &ctx)?;
    let f = parse_expr("-w/(z*(w + z))", &ctx)?;
    let g = parse_expr("1/z", &ctx)?;
    let base = base_assignment(&[
        ("w", 0.0),
        ("z", 1.0),
        ("zh", 1.0),
        ("a0", 0.0),
        ("a1", 1.0),
        ("b1", 0.0),
    ]);
    let branch = BranchContext::new(base, BTreeMap::new());
    Family::new(
        "quadric-11".into(),
        vec!["a0".into(), "a1".into(), "b1".into()],
        ("w".into(), "z".into(), "zh".into()),
        phi1,
        phi2,
        Transition { f, g },
        vec![Scalar::zero(), Scalar::one(), Scalar::zero()],
        (0.5, 2.0),
        branch,
        0.3,
        Tolerances::default(),
        BTreeMap::new(),
    )
}

/// The double cover of a neighbourhood of the (1,2)-curve `eta = zeta^2`
/// in the quadric surface, branched along the curve. Fiber charts
/// `w = sqrt(eta - zeta^2)`, `wh = sqrt(1/eta - 1/zeta^2)` give the
/// transition `f(w, z) = w/(z*sqrt(w^2 + z^2))`, `g(z) = 1/z`, and the
/// complete family is
///
/// `phi1 = i R(z)/sqrt(Q(z))`, `phi2 = i Rh(zh)/sqrt(Ph(zh))`
///
/// with `R = t2 z^2 + t1 z + t0`, `Q = t2^2 z^2 + 2 t1 t2 z + 1 + 2 t0 t2 + t1^2`,
/// `Rh(zh) = z^2 R(1/z)`, `Ph(zh) = z^2 P(1/z)`, `P = z^2 - 2 t0 t1 z - t0^2`.
/// Branch values continue from 1 on the base curve (t = 0, where Q = Ph = 1).
///
/// Records the exact polynomials P, Q, R and the discriminant
/// Delta = (1 + t0 t2)^2 + t1^2 (1 + 2 t0 t2) for identity checks.
pub fn build_branched_cover_12() -> Result<Family> {
    let vars = ["w", "z", "zh", "t0", "t1", "t2"];
    let plain = ParseContext::new(&vars, &[]);
    let q_poly = parse_expr("t2^2*z^2 + 2*t1*t2*z + 1 + 2*t0*t2 + t1^2", &plain)?
        .as_poly()
        .expect("polynomial");
    let ph_poly = parse_expr("1 - 2*t0*t1*zh - t0^2*zh^2", &plain)?
        .as_poly()
        .expect("polynomial");
    let st_poly = parse_expr("w^2 + z^2", &plain)?.as_poly().expect("polynomial");
    let roots = [
        RootSpec {
            symbol: "sQ".into(),
            defining: q_poly.clone(),
        },
        RootSpec {
            symbol: "sP".into(),
            defining: ph_poly.clone(),
        },
        RootSpec {
            symbol: "sT".into(),
            defining: st_poly,
        },
    ];
    let ctx = ParseContext::new(&vars, &roots);
    let phi1 = parse_expr("i*(t2*z^2 + t1*z + t0)/sQ", &ctx)?;
    let phi2 = parse_expr("i*(t0*zh^2 + t1*zh + t2)/sP", &ctx)?;
    let f = parse_expr("w/(z*sqrt(w^2 + z^2))", &ctx)?;
    let g = parse_expr("1/z", &ctx)?;

    let base = base_assignment(&[
        ("w", 0.0),
        ("z", 1.0),
        ("zh", 1.0),
        ("t0", 0.0),
        ("t1", 0.0),
        ("t2", 0.0),
    ]);
    let mut base_roots = BTreeMap::new();
    base_roots.insert("sQ".to_string(), c64(1.0));
    base_roots.insert("sP".to_string(), c64(1.0));
    base_roots.insert("sT".to_string(), c64(1.0));
    let branch = BranchContext::new(base, base_roots);

    let mut named = BTreeMap::new();
    named.insert(
        "P".to_string(),
        parse_expr("z^2 - 2*t0*t1*z - t0^2", &plain)?
            .as_poly()
            .expect("polynomial"),
    );
    named.insert("Q".to_string(), q_poly);
    named.insert(
        "R".to_string(),
        parse_expr("t2*z^2 + t1*z + t0", &plain)?
            .as_poly()
            .expect("polynomial"),
    );
    named.insert(
        "Delta".to_string(),
        parse_expr("(1 + t0*t2)^2 + t1^2*(1 + 2*t0*t2)", &plain)?
            .as_poly()
            .expect("polynomial"),
    );

    Family::new(
        "branched-cover-12".into(),
        vec!["t0".into(), "t1".into(), "t2".into()],
        ("w".into(), "z".into(), "zh".into()),
        phi1,
        phi2,
        Transition { f, g },
        vec![Scalar::zero(), Scalar::zero(), Scalar::zero()],
        (0.5, 2.0),
        branch,
        0.3,
        Tolerances::default(),
        named,
    )
}

/// Obstruction to an n-fold cover branched along a curve of the given
/// self-intersection: the self-intersection modulo n. The cover exists
/// along the curve iff this vanishes.
pub fn branched_cover_obstruction(selfint: i64, n: i64) -> Result<i64> {
    if n < 2 {
        return Err(Error::InvalidCoverOrder(n));
    }
    Ok(selfint.rem_euclid(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{MultiPoly, RatFunc};

    #[test]
    fn obstruction_arithmetic() {
        // a (1,n)-curve has self-intersection 2n
        for n in 2..6 {
            assert_eq!(branched_cover_obstruction(2 * n, n).unwrap(), 0);
        }
        assert_eq!(branched_cover_obstruction(5, 2).unwrap(), 1);
        assert_eq!(branched_cover_obstruction(6, 3).unwrap(), 0);
        assert!(branched_cover_obstruction(4, 1).is_err());
    }

    #[test]
    fn quadric_11_builds_and_is_exactly_compatible() {
        let fam = build_quadric_11().unwrap();
        assert_eq!(fam.m(), 3);
        // exact identity: phi2(g(z), t) = f(phi1(z, t), z)
        let phi1 = fam.phi1.as_ratfunc().unwrap();
        let phi2 = fam.phi2.as_ratfunc().unwrap();
        let f = fam.transition.f.as_ratfunc().unwrap();
        let g = fam.transition.g.as_ratfunc().unwrap();
        let lhs = phi2.subst("zh", &g).unwrap();
        let rhs = f.subst("w", &phi1).unwrap();
        assert!(lhs.sub(&rhs).is_zero());
    }

    #[test]
    fn quadric_11_base_vanishing_exact() {
        let fam = build_quadric_11().unwrap();
        let t0: std::collections::BTreeMap<String, Scalar> = fam
            .params
            .iter()
            .cloned()
            .zip(fam.t0_exact.iter().cloned())
            .collect();
        assert!(fam.phi1.eval_partial(&t0).unwrap().is_zero());
        assert!(fam.phi2.eval_partial(&t0).unwrap().is_zero());
    }

    #[test]
    fn branched_cover_builds() {
        let fam = build_branched_cover_12().unwrap();
        assert_eq!(fam.m(), 3);
        assert!(fam.named_polys.contains_key("Delta"));
    }

    #[test]
    fn cover_exact_identities() {
        let fam = build_branched_cover_12().unwrap();
        let p = &fam.named_polys["P"];
        let q = &fam.named_polys["Q"];
        let r = &fam.named_polys["R"];
        let delta = &fam.named_polys["Delta"];
        // P - (z^2 Q - R^2) = 0
        let z2 = MultiPoly::var("z").pow(2);
        let lhs = p.sub(&z2.mul(q).sub(&r.mul(r)));
        assert!(lhs.is_zero());
        // Delta^2 - Res_z(P, Q) = 0
        let res = MultiPoly::resultant(p, q, "z").unwrap();
        assert!(delta.mul(delta).sub(&res).is_zero());
    }

    #[test]
    fn rejects_degenerate_flat_family() {
        // f = w, g = z, phi = 0: Kodaira sections all vanish
        let vars = ["w", "z", "zh", "t0"];
        let ctx = ParseContext::new(&vars, &[]);
        let zero = RatFunc::zero();
        let err = Family::new(
            "degenerate".into(),
            vec!["t0".into()],
            ("w".into(), "z".into(), "zh".into()),
            crate::exact::RootExtElem::from_ratfunc(zero.clone()),
            crate::exact::RootExtElem::from_ratfunc(zero),
            Transition {
                f: parse_expr("w", &ctx).unwrap(),
                g: parse_expr("z", &ctx).unwrap(),
            },
            vec![Scalar::zero()],
            (0.5, 2.0),
            BranchContext::new(
                base_assignment(&[("w", 0.0), ("z", 1.0), ("zh", 1.0), ("t0", 0.0)]),
                BTreeMap::new(),
            ),
            0.3,
            Tolerances::default(),
            BTreeMap::new(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::InvariantViolation { name: "kodaira basis", .. }
        ));
    }
}
