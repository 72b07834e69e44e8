//! Exact cocycle data for root-free families: when phi, f and g are plain
//! rational functions, the compositions defining F, E, G and tau stay
//! inside the rational function field and can be formed by exact
//! substitution, giving a fully exact route through the splitting for
//! cross-validation of the quadrature pipeline.

use super::{sym_pairs, Family};
use crate::error::{Error, Result};
use crate::exact::{RatFunc, Scalar};
use std::collections::BTreeMap;

/// tau/F and its ingredients at an exact parameter point, univariate in z.
#[derive(Clone, Debug)]
pub struct ExactCocycleQuotient {
    pub z_var: String,
    pub zh_var: String,
    /// Normal-bundle transition F(z).
    pub f: RatFunc,
    pub e: RatFunc,
    pub tau: Vec<RatFunc>,
    /// h_alpha = tau_alpha / F, the functions split by partial fractions.
    pub h: Vec<RatFunc>,
    /// d_alpha phi1(z, t) and d^2 phi1 (sym-pair order), for extraction.
    pub dphi1: Vec<RatFunc>,
    pub ddphi1: Vec<RatFunc>,
    /// Chart-2 counterparts in the zh coordinate.
    pub dphi2: Vec<RatFunc>,
    pub ddphi2: Vec<RatFunc>,
}

/// Build the exact quotient for a root-free family at Gaussian-rational t.
pub fn exact_cocycle_quotient(fam: &Family, t: &[Scalar]) -> Result<ExactCocycleQuotient> {
    let m = fam.m();
    if t.len() != m {
        return Err(Error::FamilyInvalid("wrong parameter count".into()));
    }
    let phi1 = fam
        .phi1
        .as_ratfunc()
        .ok_or(Error::SubstitutionIntoRoots)?;
    let phi2 = fam
        .phi2
        .as_ratfunc()
        .ok_or(Error::SubstitutionIntoRoots)?;
    let f = fam
        .transition
        .f
        .as_ratfunc()
        .ok_or(Error::SubstitutionIntoRoots)?;
    let g = fam
        .transition
        .g
        .as_ratfunc()
        .ok_or(Error::SubstitutionIntoRoots)?;

    let w = &fam.fiber_w;
    let z = &fam.fiber_z;
    let zh = &fam.fiber_zh;

    let t_map: BTreeMap<String, Scalar> = fam
        .params
        .iter()
        .cloned()
        .zip(t.iter().cloned())
        .collect();

    let phi1_t = phi1.eval_partial(&t_map)?;
    let _ = &phi2;
    let g_t = g.eval_partial(&t_map)?;

    // transition derivatives composed onto the curve w = phi1(z, t)
    let f_w = f.derivative(w);
    let f_ww = f_w.derivative(w);
    let g_w = g.derivative(w);
    let g_ww = g_w.derivative(w);
    let on_curve = |r: &RatFunc| -> Result<RatFunc> {
        r.eval_partial(&t_map)?.subst(w, &phi1_t)
    };
    let f_w_c = on_curve(&f_w)?;
    let f_ww_c = on_curve(&f_ww)?;
    let g_w_c = on_curve(&g_w)?;
    let g_ww_c = on_curve(&g_ww)?;

    // chart-2 fiber derivatives composed at zh = g(z)
    let phi2_z = phi2.derivative(zh);
    let phi2_zz = phi2_z.derivative(zh);
    let matched = |r: &RatFunc| -> Result<RatFunc> {
        r.eval_partial(&t_map)?.subst(zh, &g_t)
    };
    let phi2_z_m = matched(&phi2_z)?;
    let phi2_zz_m = matched(&phi2_zz)?;

    let big_f = f_w_c.sub(&phi2_z_m.mul(&g_w_c));
    let e = f_ww_c
        .sub(&phi2_z_m.mul(&g_ww_c))
        .sub(&phi2_zz_m.mul(&g_w_c.mul(&g_w_c)));

    let mut dphi1 = Vec::with_capacity(m);
    let mut dphi2 = Vec::with_capacity(m);
    for p in &fam.params {
        dphi1.push(phi1.derivative(p).eval_partial(&t_map)?);
        dphi2.push(phi2.derivative(p).eval_partial(&t_map)?);
    }
    let mut ddphi1 = Vec::new();
    let mut ddphi2 = Vec::new();
    for (a, b) in sym_pairs(m) {
        ddphi1.push(
            phi1.derivative(&fam.params[a])
                .derivative(&fam.params[b])
                .eval_partial(&t_map)?,
        );
        ddphi2.push(
            phi2.derivative(&fam.params[a])
                .derivative(&fam.params[b])
                .eval_partial(&t_map)?,
        );
    }

    let half = Scalar::from_ratio(1, 2);
    let mut tau = Vec::with_capacity(m);
    let mut h = Vec::with_capacity(m);
    for alpha in 0..m {
        let dphi2_z_alpha = matched(&phi2.derivative(&fam.params[alpha]).derivative(zh))?;
        let g_alpha = dphi2_z_alpha.mul(&g_w_c);
        let tau_a = e.mul_scalar(&half).mul(&dphi1[alpha]).sub(&g_alpha);
        h.push(tau_a.div(&big_f)?);
        tau.push(tau_a);
    }

    Ok(ExactCocycleQuotient {
        z_var: z.clone(),
        zh_var: zh.clone(),
        f: big_f,
        e,
        tau,
        h,
        dphi1,
        ddphi1,
        dphi2,
        ddphi2,
    })
}
