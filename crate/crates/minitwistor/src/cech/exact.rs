//! Exact partial-fraction splitting for root-free rational cocycle data.
//!
//! When tau/F is a univariate rational function of z over the Gaussian
//! rationals (the parameter point substituted exactly), the Laurent split
//! is the classical partial-fraction decomposition: principal parts at
//! poles inside the annulus hole form the minus side, everything else the
//! plus side. Pole locations are found numerically, recognized as Gaussian
//! rationals, and then verified by exact division, so the split itself is
//! exact end to end.

use crate::error::{Error, Result};
use crate::exact::{MultiPoly, RatFunc, Scalar};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

/// Exact splitting of a cocycle quotient: theta1 in the z coordinate,
/// theta2 in the zh = 1/z coordinate.
#[derive(Clone, Debug)]
pub struct ExactCochain {
    pub z_var: String,
    pub zh_var: String,
    pub theta1: Vec<RatFunc>,
    pub theta2: Vec<RatFunc>,
}

/// Split exact quotients h_alpha(z) = tau_alpha/F into chart-holomorphic
/// parts by partial fractions, classifying each pole of the reduced
/// denominator against the annulus. The constant term stays on the plus
/// (chart 1) side, matching the numeric convention.
pub fn split_exact(
    h: &[RatFunc],
    z_var: &str,
    zh_var: &str,
    annulus: (f64, f64),
) -> Result<ExactCochain> {
    let mut theta1 = Vec::with_capacity(h.len());
    let mut theta2 = Vec::with_capacity(h.len());
    for q in h {
        let (plus, minus) = split_one(q, z_var, annulus)?;
        // theta2(zh) = -minus(z = 1/zh)
        let inv = RatFunc::new(
            MultiPoly::one(),
            MultiPoly::var(zh_var),
        )?;
        let minus_in_zh = minus.subst(z_var, &inv)?;
        theta1.push(plus);
        theta2.push(minus_in_zh.neg());
    }
    Ok(ExactCochain {
        z_var: z_var.to_string(),
        zh_var: zh_var.to_string(),
        theta1,
        theta2,
    })
}

fn split_one(h: &RatFunc, z_var: &str, annulus: (f64, f64)) -> Result<(RatFunc, RatFunc)> {
    for v in h.num().vars().iter().chain(h.den().vars().iter()) {
        if v != z_var {
            return Err(Error::InvariantViolation {
                name: "exact split",
                detail: format!("quotient must be univariate in {z_var}, found {v}"),
            });
        }
    }
    let den = upoly(h.den(), z_var)?;
    if den.len() == 1 {
        // polynomial: everything is plus
        return Ok((h.clone(), RatFunc::zero()));
    }
    let roots = u_roots(&to_c64(&den))?;
    let mut b_in = vec![Scalar::one()];
    let mut inside_count = 0usize;
    let mut remaining = den.clone();
    let guard_lo = annulus.0 * 1.2;
    let guard_hi = annulus.1 * 0.8;
    let mut seen: Vec<Complex64> = Vec::new();
    for r in &roots {
        let rho = r.norm();
        if rho > guard_lo && rho < guard_hi {
            return Err(Error::InvariantViolation {
                name: "exact split",
                detail: format!("pole at |z| = {rho:.4} inside the annulus"),
            });
        }
        if rho >= guard_hi {
            continue;
        }
        inside_count += 1;
        if seen.iter().any(|s| (s - r).norm() < 1e-7) {
            continue; // multiplicity handled by repeated division below
        }
        seen.push(*r);
        let p_hat = rationalize_c64(*r, 1_000_000, 1e-8).ok_or_else(|| Error::InvariantViolation {
            name: "exact split",
            detail: format!("pole {r} is not recognizably Gaussian rational"),
        })?;
        // linear factor z - p_hat; divide out with multiplicity
        let factor = vec![-&p_hat, Scalar::one()];
        let mut mult = 0usize;
        loop {
            match u_try_div(&remaining, &factor) {
                Some(q) => {
                    remaining = q;
                    mult += 1;
                }
                None => break,
            }
        }
        if mult == 0 {
            return Err(Error::InvariantViolation {
                name: "exact split",
                detail: format!("candidate pole {p_hat:?} does not divide the denominator"),
            });
        }
        for _ in 0..mult {
            b_in = u_mul(&b_in, &factor);
        }
    }
    if b_in.len() - 1 != inside_count {
        return Err(Error::InvariantViolation {
            name: "exact split",
            detail: "inside pole count does not match recognized factors".into(),
        });
    }
    if b_in.len() == 1 {
        // no inside poles: h entirely plus
        return Ok((h.clone(), RatFunc::zero()));
    }
    let b_out = remaining;
    // write h = q + r/D, then r/D = A/B_in + C/B_out via Bezout
    let num = upoly(h.num(), z_var)?;
    let (q, r) = u_divmod(&num, &den);
    let (g, u, v) = u_xgcd(&b_in, &b_out);
    // g is a nonzero constant (factors coprime); normalize
    let ginv = g[0].recip()?;
    let u = u_scale(&u, &ginv);
    let v = u_scale(&v, &ginv);
    // r/D = r*v/B_in + r*u/B_out ; principal part A = (r*v) mod B_in
    let rv = u_mul(&r, &v);
    let (_, a) = u_divmod(&rv, &b_in);
    let minus = RatFunc::new(
        from_upoly(&a, z_var),
        from_upoly(&b_in, z_var),
    )?;
    let plus = h.sub(&minus);
    let _ = (q, u);
    Ok((plus, minus))
}

// ---- univariate helpers over Scalar (ascending coefficients) ----

pub(crate) fn upoly(p: &MultiPoly, var: &str) -> Result<Vec<Scalar>> {
    for v in p.vars() {
        if v != var && p.contains_var(v) {
            return Err(Error::InvariantViolation {
                name: "univariate",
                detail: format!("unexpected variable {v}"),
            });
        }
    }
    let coeffs = p.univariate_in(var);
    Ok(coeffs
        .iter()
        .map(|c| c.as_constant().expect("constant coefficient"))
        .collect())
}

pub(crate) fn from_upoly(coeffs: &[Scalar], var: &str) -> MultiPoly {
    let polys: Vec<MultiPoly> = coeffs
        .iter()
        .map(|c| MultiPoly::constant(c.clone()))
        .collect();
    MultiPoly::from_univariate(var, &polys)
}

fn u_trim(mut p: Vec<Scalar>) -> Vec<Scalar> {
    while p.len() > 1 && p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
    p
}

pub(crate) fn u_mul(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    let mut out = vec![Scalar::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    u_trim(out)
}

fn u_scale(a: &[Scalar], s: &Scalar) -> Vec<Scalar> {
    u_trim(a.iter().map(|c| c * s).collect())
}

pub(crate) fn u_divmod(a: &[Scalar], b: &[Scalar]) -> (Vec<Scalar>, Vec<Scalar>) {
    let b = u_trim(b.to_vec());
    assert!(!(b.len() == 1 && b[0].is_zero()), "division by zero poly");
    let mut r = u_trim(a.to_vec());
    if r.len() < b.len() {
        return (vec![Scalar::zero()], r);
    }
    let mut q = vec![Scalar::zero(); r.len() - b.len() + 1];
    let lead = b.last().unwrap().clone();
    let lead_inv = lead.recip().expect("nonzero leading coefficient");
    while r.len() >= b.len() && !(r.len() == 1 && r[0].is_zero()) {
        let shift = r.len() - b.len();
        let coef = r.last().unwrap() * &lead_inv;
        q[shift] = &q[shift] + &coef;
        for (j, bj) in b.iter().enumerate() {
            r[shift + j] = &r[shift + j] - &(&coef * bj);
        }
        r = u_trim(r);
        if r.len() == 1 && r[0].is_zero() {
            break;
        }
        if r.len() <= shift + b.len() - 1 && r.len() < b.len() {
            break;
        }
    }
    (u_trim(q), u_trim(r))
}

fn u_try_div(a: &[Scalar], b: &[Scalar]) -> Option<Vec<Scalar>> {
    let (q, r) = u_divmod(a, b);
    if r.len() == 1 && r[0].is_zero() {
        Some(q)
    } else {
        None
    }
}

/// Extended Euclid: returns (g, u, v) with u*a + v*b = g.
pub(crate) fn u_xgcd(a: &[Scalar], b: &[Scalar]) -> (Vec<Scalar>, Vec<Scalar>, Vec<Scalar>) {
    let mut r0 = u_trim(a.to_vec());
    let mut r1 = u_trim(b.to_vec());
    let mut s0 = vec![Scalar::one()];
    let mut s1 = vec![Scalar::zero()];
    let mut t0 = vec![Scalar::zero()];
    let mut t1 = vec![Scalar::one()];
    while !(r1.len() == 1 && r1[0].is_zero()) {
        let (q, r) = u_divmod(&r0, &r1);
        let s = u_sub(&s0, &u_mul(&q, &s1));
        let t = u_sub(&t0, &u_mul(&q, &t1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
        t0 = t1;
        t1 = t;
    }
    (r0, s0, t0)
}

fn u_sub(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    let n = a.len().max(b.len());
    let mut out = vec![Scalar::zero(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] = &out[i] + x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] = &out[i] - y;
    }
    u_trim(out)
}

fn to_c64(p: &[Scalar]) -> Vec<Complex64> {
    p.iter().map(|c| c.to_complex64()).collect()
}

/// Durand-Kerner root finding for a univariate complex polynomial given by
/// ascending coefficients. Assumes a nonzero leading coefficient.
pub fn u_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut c = coeffs.to_vec();
    while c.len() > 1 && c.last().map(|x| x.norm() < 1e-300).unwrap_or(false) {
        c.pop();
    }
    let deg = c.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = c[deg];
    let monic: Vec<Complex64> = c.iter().map(|x| x / lead).collect();
    let eval = |x: Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (0..=deg).rev() {
            acc = acc * x + monic[k];
        }
        acc
    };
    let seed = Complex64::new(0.4, 0.9);
    let mut xs: Vec<Complex64> = (0..deg).map(|k| seed.powu(k as u32 + 1)).collect();
    for _ in 0..600 {
        let mut shift = 0.0f64;
        let prev = xs.clone();
        for i in 0..deg {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if j != i {
                    denom *= prev[i] - prev[j];
                }
            }
            if denom.norm() < 1e-280 {
                denom = Complex64::new(1e-280, 0.0);
            }
            let delta = eval(prev[i]) / denom;
            xs[i] = prev[i] - delta;
            shift = shift.max(delta.norm());
        }
        if shift < 1e-14 {
            return Ok(xs);
        }
    }
    // accept if the residuals are small even without per-step convergence
    let worst = xs.iter().map(|x| eval(*x).norm()).fold(0.0f64, f64::max);
    if worst < 1e-9 {
        Ok(xs)
    } else {
        Err(Error::SolverFailure("polynomial root iteration did not converge"))
    }
}

/// Recognize a float as a rational with small denominator by continued
/// fractions; verified against `tol`.
pub fn rationalize_f64(x: f64, max_den: u64, tol: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let mut a = x;
    let mut h0 = BigInt::from(1);
    let mut h1 = BigInt::from(a.floor() as i64);
    let mut k0 = BigInt::from(0);
    let mut k1 = BigInt::from(1);
    let mut frac = a - a.floor();
    for _ in 0..40 {
        let cand = BigRational::new(h1.clone(), k1.clone());
        let cand_f = cand.to_f64()?;
        if (cand_f - x).abs() <= tol {
            return Some(cand);
        }
        if frac.abs() < 1e-15 {
            break;
        }
        a = 1.0 / frac;
        let ai = a.floor();
        if !ai.is_finite() || ai.abs() > 1e15 {
            break;
        }
        let ai_b = BigInt::from(ai as i64);
        let h2 = &ai_b * &h1 + &h0;
        let k2 = &ai_b * &k1 + &k0;
        if k2.abs() > BigInt::from(max_den) {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        frac = a - ai;
    }
    let cand = BigRational::new(h1, k1);
    let cand_f = cand.to_f64()?;
    if (cand_f - x).abs() <= tol {
        Some(cand)
    } else {
        None
    }
}

pub fn rationalize_c64(x: Complex64, max_den: u64, tol: f64) -> Option<Scalar> {
    let re = rationalize_f64(x.re, max_den, tol)?;
    let im = rationalize_f64(x.im, max_den, tol)?;
    Some(Scalar::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{parse_expr, ParseContext};

    fn rf(src: &str) -> RatFunc {
        let ctx = ParseContext::new(&["z"], &[]);
        parse_expr(src, &ctx).unwrap().as_ratfunc().unwrap()
    }

    #[test]
    fn roots_of_cubic() {
        // (z-1)(z-2)(z+3i)
        let ctx = ParseContext::new(&["z"], &[]);
        let p = parse_expr("(z-1)*(z-2)*(z+3*i)", &ctx)
            .unwrap()
            .as_poly()
            .unwrap();
        let coeffs = upoly(&p, "z").unwrap();
        let roots = u_roots(&coeffs.iter().map(|c| c.to_complex64()).collect::<Vec<_>>()).unwrap();
        let mut found = [false; 3];
        for r in roots {
            for (i, target) in [
                Complex64::new(1.0, 0.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(0.0, -3.0),
            ]
            .iter()
            .enumerate()
            {
                if (r - target).norm() < 1e-10 {
                    found[i] = true;
                }
            }
        }
        assert!(found.iter().all(|&f| f));
    }

    #[test]
    fn rationalize_small_fractions() {
        let r = rationalize_f64(0.333333333333333, 1000, 1e-9).unwrap();
        assert_eq!(r, BigRational::new(BigInt::from(1), BigInt::from(3)));
        let r2 = rationalize_f64(-2.75, 1000, 1e-12).unwrap();
        assert_eq!(r2, BigRational::new(BigInt::from(-11), BigInt::from(4)));
        assert!(rationalize_f64(std::f64::consts::PI, 10, 1e-12).is_none());
    }

    #[test]
    fn exact_split_inside_and_outside_poles() {
        // h = 1/(z - 1/4) + 1/(z - 3): minus = 1/(z - 1/4), plus = 1/(z - 3)
        let h = rf("1/(z - 1/4) + 1/(z - 3)");
        let out = split_exact(&[h.clone()], "z", "zh", (0.5, 2.0)).unwrap();
        let plus_expect = rf("1/(z - 3)");
        assert_eq!(out.theta1[0], plus_expect);
        // theta2(zh) = -minus(1/zh) = -1/(1/zh - 1/4) = -4*zh/(4 - zh)
        let ctxh = ParseContext::new(&["zh"], &[]);
        let theta2_expect = parse_expr("-4*zh/(4 - zh)", &ctxh)
            .unwrap()
            .as_ratfunc()
            .unwrap();
        assert_eq!(out.theta2[0], theta2_expect);
        // consistency: plus + minus = h
        let minus = h.sub(&out.theta1[0]);
        let recon = out.theta1[0].add(&minus);
        assert!(recon.sub(&h).is_zero());
    }

    #[test]
    fn exact_split_rejects_pole_on_annulus() {
        let h = rf("1/(z - 1)");
        assert!(split_exact(&[h], "z", "zh", (0.5, 2.0)).is_err());
    }

    #[test]
    fn exact_split_with_multiplicity() {
        // double pole inside: 1/(z-1/5)^2
        let h = rf("(z + 7)/((z - 1/5)^2 * (z - 4))");
        let out = split_exact(&[h.clone()], "z", "zh", (0.5, 2.0)).unwrap();
        // plus part has its only pole at z = 4
        let plus = &out.theta1[0];
        let den_roots = u_roots(
            &upoly(plus.den(), "z")
                .unwrap()
                .iter()
                .map(|c| c.to_complex64())
                .collect::<Vec<_>>(),
        )
        .unwrap();
        for r in den_roots {
            assert!((r - Complex64::new(4.0, 0.0)).norm() < 1e-9);
        }
    }
}
