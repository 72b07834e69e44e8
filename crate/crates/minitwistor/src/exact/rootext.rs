//! Quadratic root extensions of the rational function field.
//!
//! An element is a multilinear combination of formal square roots
//! `s_j` with `s_j^2 = D_j` for declared polynomials `D_j`: the coefficient
//! map is keyed by subsets of the root list and `s_j^2` is always rewritten
//! away, so two elements over the same roots are equal iff all coefficients
//! are equal.

use crate::error::{Error, Result};
use crate::exact::{MultiPoly, RatFunc, Scalar};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RootSpec {
    pub symbol: String,
    pub defining: MultiPoly,
}

#[derive(Clone, PartialEq, Eq)]
pub struct RootExtElem {
    /// Sorted by symbol; every key bit refers to this list.
    roots: Vec<RootSpec>,
    /// Subset-of-roots bitmask -> coefficient. No zero coefficients stored.
    coeffs: BTreeMap<u32, RatFunc>,
}

impl RootExtElem {
    pub fn zero() -> Self {
        RootExtElem {
            roots: Vec::new(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        RootExtElem::from_ratfunc(RatFunc::one())
    }

    pub fn from_ratfunc(r: RatFunc) -> Self {
        let mut coeffs = BTreeMap::new();
        if !r.is_zero() {
            coeffs.insert(0u32, r);
        }
        RootExtElem {
            roots: Vec::new(),
            coeffs,
        }
    }

    pub fn from_poly(p: MultiPoly) -> Self {
        RootExtElem::from_ratfunc(RatFunc::from_poly(p))
    }

    pub fn constant(c: Scalar) -> Self {
        RootExtElem::from_ratfunc(RatFunc::constant(c))
    }

    pub fn var(name: &str) -> Self {
        RootExtElem::from_poly(MultiPoly::var(name))
    }

    /// The pure root element `s` for the given spec.
    pub fn root(spec: RootSpec) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(1u32, RatFunc::one());
        RootExtElem {
            roots: vec![spec],
            coeffs,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_root_free(&self) -> bool {
        self.coeffs.keys().all(|&k| k == 0)
    }

    /// The underlying rational function, when no roots occur.
    pub fn as_ratfunc(&self) -> Option<RatFunc> {
        if self.is_zero() {
            return Some(RatFunc::zero());
        }
        if self.is_root_free() {
            return self.coeffs.get(&0).cloned();
        }
        None
    }

    pub fn as_poly(&self) -> Option<MultiPoly> {
        self.as_ratfunc().and_then(|r| r.as_poly().cloned())
    }

    pub fn roots(&self) -> &[RootSpec] {
        &self.roots
    }

    pub fn coeff(&self, mask: u32) -> RatFunc {
        self.coeffs.get(&mask).cloned().unwrap_or_else(RatFunc::zero)
    }

    pub fn iter_coeffs(&self) -> impl Iterator<Item = (u32, &RatFunc)> {
        self.coeffs.iter().map(|(&k, v)| (k, v))
    }

    /// Drop roots not used by any coefficient key so equality is canonical.
    fn normalize(mut self) -> Self {
        self.coeffs.retain(|_, c| !c.is_zero());
        let mut used = 0u32;
        for k in self.coeffs.keys() {
            used |= k;
        }
        if used.count_ones() as usize == self.roots.len() {
            return self;
        }
        let keep: Vec<usize> = (0..self.roots.len())
            .filter(|&i| used & (1 << i) != 0)
            .collect();
        let remap: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(n, &o)| (o, n)).collect();
        let roots = keep.iter().map(|&i| self.roots[i].clone()).collect();
        let mut coeffs = BTreeMap::new();
        for (k, c) in self.coeffs {
            let mut nk = 0u32;
            for i in 0..32 {
                if k & (1 << i) != 0 {
                    nk |= 1 << remap[&(i as usize)];
                }
            }
            coeffs.insert(nk, c);
        }
        RootExtElem { roots, coeffs }
    }

    /// Re-express both elements over the union of their root lists.
    fn align(&self, other: &RootExtElem) -> Result<(RootExtElem, RootExtElem)> {
        if self.roots == other.roots {
            return Ok((self.clone(), other.clone()));
        }
        let mut union: Vec<RootSpec> = self.roots.clone();
        for r in &other.roots {
            match union.iter().find(|u| u.symbol == r.symbol) {
                Some(u) if u.defining != r.defining => {
                    return Err(Error::InvariantViolation {
                        name: "root_context",
                        detail: format!("root `{}` declared with two defining polynomials", r.symbol),
                    })
                }
                Some(_) => {}
                None => union.push(r.clone()),
            }
        }
        union.sort_by(|a, b| a.symbol.cmp(&b.symbol));
        Ok((self.embed(&union), other.embed(&union)))
    }

    fn embed(&self, union: &[RootSpec]) -> RootExtElem {
        let pos: Vec<usize> = self
            .roots
            .iter()
            .map(|r| union.iter().position(|u| u.symbol == r.symbol).unwrap())
            .collect();
        let mut coeffs = BTreeMap::new();
        for (&k, c) in &self.coeffs {
            let mut nk = 0u32;
            for (i, &p) in pos.iter().enumerate() {
                if k & (1 << i) != 0 {
                    nk |= 1 << p;
                }
            }
            coeffs.insert(nk, c.clone());
        }
        RootExtElem {
            roots: union.to_vec(),
            coeffs,
        }
    }

    pub fn neg(&self) -> RootExtElem {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn add(&self, other: &RootExtElem) -> Result<RootExtElem> {
        let (mut a, b) = self.align(other)?;
        for (k, c) in b.coeffs {
            let entry = a.coeffs.entry(k).or_insert_with(RatFunc::zero);
            *entry = entry.add(&c);
        }
        Ok(a.normalize())
    }

    pub fn sub(&self, other: &RootExtElem) -> Result<RootExtElem> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RootExtElem) -> Result<RootExtElem> {
        let (a, b) = self.align(other)?;
        let mut coeffs: BTreeMap<u32, RatFunc> = BTreeMap::new();
        for (&ka, ca) in &a.coeffs {
            for (&kb, cb) in &b.coeffs {
                // s_j * s_j = D_j for every shared root
                let shared = ka & kb;
                let mut c = ca.mul(cb);
                for (i, spec) in a.roots.iter().enumerate() {
                    if shared & (1 << i) != 0 {
                        c = c.mul(&RatFunc::from_poly(spec.defining.clone()));
                    }
                }
                let key = ka ^ kb;
                let entry = coeffs.entry(key).or_insert_with(RatFunc::zero);
                *entry = entry.add(&c);
            }
        }
        Ok(RootExtElem {
            roots: a.roots,
            coeffs,
        }
        .normalize())
    }

    pub fn mul_scalar(&self, s: &Scalar) -> RootExtElem {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = c.mul_scalar(s);
        }
        out.normalize()
    }

    /// Multiplicative inverse by iterated conjugation: write the element as
    /// `a + b*s` in its highest root, then `1/(a+bs) = (a-bs)/(a^2 - b^2 D)`
    /// and recurse on the root-count of the denominator.
    pub fn recip(&self) -> Result<RootExtElem> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(r) = self.as_ratfunc() {
            return Ok(RootExtElem::from_ratfunc(r.recip()?));
        }
        let nroots = self.roots.len();
        let top = (0..nroots)
            .rev()
            .find(|&i| self.coeffs.keys().any(|k| k & (1 << i) != 0))
            .expect("element has roots");
        let bit = 1u32 << top;
        let mut a = RootExtElem {
            roots: self.roots.clone(),
            coeffs: BTreeMap::new(),
        };
        let mut b = a.clone();
        for (&k, c) in &self.coeffs {
            if k & bit == 0 {
                a.coeffs.insert(k, c.clone());
            } else {
                b.coeffs.insert(k & !bit, c.clone());
            }
        }
        let a = a.normalize();
        let b = b.normalize();
        let d = RootExtElem::from_poly(self.roots[top].defining.clone());
        let denom = a.mul(&a)?.sub(&b.mul(&b)?.mul(&d)?)?;
        if denom.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let denom_inv = denom.recip()?;
        let s_elem = {
            let mut coeffs = BTreeMap::new();
            coeffs.insert(bit, RatFunc::one());
            RootExtElem {
                roots: self.roots.clone(),
                coeffs,
            }
        };
        let conj = a.sub(&b.mul(&s_elem)?)?;
        conj.mul(&denom_inv)
    }

    pub fn div(&self, other: &RootExtElem) -> Result<RootExtElem> {
        self.mul(&other.recip()?)
    }

    pub fn pow(&self, e: i32) -> Result<RootExtElem> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let mut acc = RootExtElem::one();
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base)?;
        }
        Ok(acc)
    }

    /// Exact partial derivative; roots differentiate by
    /// `d s_j = D_j' * s_j / (2 D_j)`, which preserves the multilinear form.
    pub fn derivative(&self, var: &str) -> Result<RootExtElem> {
        let mut out = RootExtElem {
            roots: self.roots.clone(),
            coeffs: BTreeMap::new(),
        };
        let two = Scalar::from_int(2);
        for (&k, c) in &self.coeffs {
            let mut dc = c.derivative(var);
            for (i, spec) in self.roots.iter().enumerate() {
                if k & (1 << i) != 0 {
                    let dd = spec.defining.derivative(var);
                    if dd.is_zero() {
                        continue;
                    }
                    let factor = RatFunc::new(dd, spec.defining.mul_scalar(&two))?;
                    dc = dc.add(&c.mul(&factor));
                }
            }
            if !dc.is_zero() {
                let entry = out.coeffs.entry(k).or_insert_with(RatFunc::zero);
                *entry = entry.add(&dc);
            }
        }
        Ok(out.normalize())
    }

    pub fn contains_var(&self, var: &str) -> bool {
        self.coeffs.values().any(|c| c.contains_var(var))
            || self.roots.iter().enumerate().any(|(i, r)| {
                r.defining.contains_var(var) && self.coeffs.keys().any(|k| k & (1 << i) != 0)
            })
    }

    /// Substitute a rational function for a variable. Only legal when no
    /// active root's defining polynomial involves that variable.
    pub fn subst(&self, var: &str, value: &RatFunc) -> Result<RootExtElem> {
        for (i, r) in self.roots.iter().enumerate() {
            let active = self.coeffs.keys().any(|k| k & (1 << i) != 0);
            if active && r.defining.contains_var(var) {
                return Err(Error::SubstitutionIntoRoots);
            }
        }
        let mut out = RootExtElem {
            roots: self.roots.clone(),
            coeffs: BTreeMap::new(),
        };
        for (&k, c) in &self.coeffs {
            let nc = c.subst(var, value)?;
            if !nc.is_zero() {
                out.coeffs.insert(k, nc);
            }
        }
        Ok(out.normalize())
    }

    /// Substitute exact values for a subset of variables (coefficients and
    /// defining polynomials alike).
    pub fn eval_partial(&self, point: &BTreeMap<String, Scalar>) -> Result<RootExtElem> {
        let roots: Vec<RootSpec> = self
            .roots
            .iter()
            .map(|r| RootSpec {
                symbol: r.symbol.clone(),
                defining: r.defining.eval_partial(point),
            })
            .collect();
        let mut coeffs = BTreeMap::new();
        for (&k, c) in &self.coeffs {
            let nc = c.eval_partial(point)?;
            if !nc.is_zero() {
                coeffs.insert(k, nc);
            }
        }
        Ok(RootExtElem { roots, coeffs }.normalize())
    }
}

impl fmt::Display for RootExtElem {
    /// Canonical printing in the expression grammar; roots appear as bare
    /// symbols (their defining polynomials are context).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&k, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, r) in self.roots.iter().enumerate() {
                if k & (1 << i) != 0 {
                    write!(f, "*{}", r.symbol)?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for RootExtElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
