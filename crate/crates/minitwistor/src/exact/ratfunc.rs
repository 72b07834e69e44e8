//! Reduced rational functions: numerator/denominator pairs kept fully
//! reduced (unit gcd) with the denominator normalized to leading
//! coefficient 1 under the graded-lex order.

use crate::error::{Error, Result};
use crate::exact::{MultiPoly, Scalar};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, PartialEq, Eq)]
pub struct RatFunc {
    num: MultiPoly,
    den: MultiPoly,
}

impl RatFunc {
    pub fn new(num: MultiPoly, den: MultiPoly) -> Result<RatFunc> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mut rf = RatFunc { num, den };
        rf.reduce();
        Ok(rf)
    }

    pub fn from_poly(p: MultiPoly) -> RatFunc {
        RatFunc {
            num: p,
            den: MultiPoly::one(),
        }
    }

    pub fn zero() -> RatFunc {
        RatFunc::from_poly(MultiPoly::zero())
    }

    pub fn one() -> RatFunc {
        RatFunc::from_poly(MultiPoly::one())
    }

    pub fn constant(c: Scalar) -> RatFunc {
        RatFunc::from_poly(MultiPoly::constant(c))
    }

    pub fn num(&self) -> &MultiPoly {
        &self.num
    }

    pub fn den(&self) -> &MultiPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.as_constant().map(|c| c.is_one()).unwrap_or(false)
    }

    pub fn as_poly(&self) -> Option<&MultiPoly> {
        if self.is_polynomial() {
            Some(&self.num)
        } else {
            None
        }
    }

    pub fn as_constant(&self) -> Option<Scalar> {
        if self.is_polynomial() {
            self.num.as_constant()
        } else {
            None
        }
    }

    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.den = MultiPoly::one();
            return;
        }
        let g = MultiPoly::gcd(&self.num, &self.den);
        if !g.as_constant().map(|c| c.is_one()).unwrap_or(false) {
            self.num = self.num.exact_div(&g).expect("gcd divides num");
            self.den = self.den.exact_div(&g).expect("gcd divides den");
        }
        // normalize denominator leading coefficient to 1
        let lc = self.den.leading_coeff();
        if !lc.is_one() {
            let inv = lc.recip().expect("nonzero denominator");
            self.num = self.num.mul_scalar(&inv);
            self.den = self.den.mul_scalar(&inv);
        }
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn add(&self, other: &RatFunc) -> RatFunc {
        let num = self
            .num
            .mul(&other.den)
            .add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        RatFunc::new(num, den).expect("denominators nonzero")
    }

    pub fn sub(&self, other: &RatFunc) -> RatFunc {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        RatFunc::new(self.num.mul(&other.num), self.den.mul(&other.den))
            .expect("denominators nonzero")
    }

    pub fn div(&self, other: &RatFunc) -> Result<RatFunc> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        RatFunc::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    pub fn recip(&self) -> Result<RatFunc> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        RatFunc::new(self.den.clone(), self.num.clone())
    }

    pub fn mul_scalar(&self, c: &Scalar) -> RatFunc {
        RatFunc {
            num: self.num.mul_scalar(c),
            den: self.den.clone(),
        }
    }

    pub fn pow(&self, e: i32) -> Result<RatFunc> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let mut acc = RatFunc::one();
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    pub fn derivative(&self, var: &str) -> RatFunc {
        // (n/d)' = (n'd - nd')/d^2
        let num = self
            .num
            .derivative(var)
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative(var)));
        let den = self.den.mul(&self.den);
        RatFunc::new(num, den).expect("denominator nonzero")
    }

    pub fn contains_var(&self, var: &str) -> bool {
        self.num.contains_var(var) || self.den.contains_var(var)
    }

    /// Substitute a rational function for a variable.
    pub fn subst(&self, var: &str, value: &RatFunc) -> Result<RatFunc> {
        let sub_poly = |p: &MultiPoly| -> RatFunc {
            let coeffs = p.univariate_in(var);
            let mut acc = RatFunc::zero();
            for c in coeffs.iter().rev() {
                acc = acc.mul(value).add(&RatFunc::from_poly(c.clone()));
            }
            acc
        };
        let n = sub_poly(&self.num);
        let d = sub_poly(&self.den);
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        n.div(&d)
    }

    /// Substitute exact values for a subset of variables.
    pub fn eval_partial(&self, point: &BTreeMap<String, Scalar>) -> Result<RatFunc> {
        RatFunc::new(self.num.eval_partial(point), self.den.eval_partial(point))
    }

    pub fn eval_scalar(&self, point: &BTreeMap<String, Scalar>) -> Result<Scalar> {
        let d = self.den.eval_scalar(point)?;
        if d.is_zero() {
            return Err(Error::PoleEncountered { denom_abs: 0.0 });
        }
        Ok(&self.num.eval_scalar(point)? / &d)
    }

    pub fn eval_complex_map(&self, point: &BTreeMap<String, Complex64>) -> Result<Complex64> {
        let d = self.den.eval_complex_map(point)?;
        if d.norm() < 1e-13 {
            return Err(Error::PoleEncountered { denom_abs: d.norm() });
        }
        Ok(self.num.eval_complex_map(point)? / d)
    }

    /// Value of d/d(var) at a point, via the quotient rule on unreduced
    /// polynomial derivatives (avoids the gcd reduction of `derivative`).
    pub fn eval_derivative_at(
        &self,
        var: &str,
        point: &BTreeMap<String, Complex64>,
    ) -> Result<Complex64> {
        let d = self.den.eval_complex_map(point)?;
        if d.norm() < 1e-13 {
            return Err(Error::PoleEncountered { denom_abs: d.norm() });
        }
        let n = self.num.eval_complex_map(point)?;
        let dn = self.num.derivative(var).eval_complex_map(point)?;
        let dd = self.den.derivative(var).eval_complex_map(point)?;
        Ok((dn * d - n * dd) / (d * d))
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_polynomial() {
            if self.num.num_terms() > 1 {
                write!(f, "({})", self.num)
            } else {
                write!(f, "{}", self.num)
            }
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
