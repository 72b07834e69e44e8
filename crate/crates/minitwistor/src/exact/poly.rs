//! Sparse multivariate polynomials over the Gaussian rationals.
//!
//! Variables are always stored sorted by name, so the monomial order
//! (graded lexicographic over that order) is globally consistent and every
//! polynomial has exactly one representation: no zero terms, exponent
//! vectors aligned with the sorted variable list.

use crate::error::{Error, Result};
use crate::exact::Scalar;
use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Exponent vector aligned with the owning polynomial's variable list,
/// ordered graded-lexicographically.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    fn total(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total()
            .cmp(&other.total())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly {
    vars: Vec<String>,
    terms: BTreeMap<Mono, Scalar>,
}

impl MultiPoly {
    // ---- constructors ----

    pub fn zero() -> Self {
        MultiPoly {
            vars: Vec::new(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Scalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Mono(Vec::new()), c);
        }
        MultiPoly {
            vars: Vec::new(),
            terms,
        }
    }

    pub fn one() -> Self {
        MultiPoly::constant(Scalar::one())
    }

    pub fn var(name: &str) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Mono(vec![1]), Scalar::one());
        MultiPoly {
            vars: vec![name.to_string()],
            terms,
        }
    }

    /// Build from raw (coefficient, sparse exponent) data over given vars.
    pub fn from_terms(vars: &[&str], terms: &[(Scalar, &[(usize, u32)])]) -> Self {
        let mut sorted: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        let perm = sort_permutation(&mut sorted);
        let mut map = BTreeMap::new();
        for (c, exps) in terms {
            if c.is_zero() {
                continue;
            }
            let mut mono = vec![0u32; sorted.len()];
            for &(idx, e) in exps.iter() {
                mono[perm[idx]] += e;
            }
            insert_term(&mut map, Mono(mono), c.clone());
        }
        let mut p = MultiPoly {
            vars: sorted,
            terms: map,
        };
        p.prune_vars();
        p
    }

    // ---- accessors ----

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(|m| m.total() == 0)
    }

    pub fn as_constant(&self) -> Option<Scalar> {
        if self.is_zero() {
            return Some(Scalar::zero());
        }
        if self.is_constant() {
            return self.terms.values().next().cloned();
        }
        None
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn iter_terms(&self) -> impl Iterator<Item = (&Mono, &Scalar)> {
        self.terms.iter()
    }

    /// Leading coefficient under the graded-lex order.
    pub fn leading_coeff(&self) -> Scalar {
        self.terms
            .iter()
            .next_back()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Scalar::zero)
    }

    pub fn total_degree(&self) -> u64 {
        self.terms.keys().map(|m| m.total()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: &str) -> Option<u32> {
        let idx = self.vars.iter().position(|v| v == var)?;
        self.terms.keys().map(|m| m.0[idx]).max()
    }

    pub fn contains_var(&self, var: &str) -> bool {
        match self.vars.iter().position(|v| v == var) {
            Some(idx) => self.terms.keys().any(|m| m.0[idx] > 0),
            None => false,
        }
    }

    /// Drop variables that no longer occur in any term.
    fn prune_vars(&mut self) {
        let used: Vec<bool> = (0..self.vars.len())
            .map(|i| self.terms.keys().any(|m| m.0[i] > 0))
            .collect();
        if used.iter().all(|&u| u) {
            return;
        }
        let keep: Vec<usize> = (0..self.vars.len()).filter(|&i| used[i]).collect();
        self.vars = keep.iter().map(|&i| self.vars[i].clone()).collect();
        let old = std::mem::take(&mut self.terms);
        for (m, c) in old {
            let mono = Mono(keep.iter().map(|&i| m.0[i]).collect());
            self.terms.insert(mono, c);
        }
    }

    /// Re-express on a variable list that is a superset of the current one.
    /// `superset` must be sorted.
    fn embed(&self, superset: &[String]) -> MultiPoly {
        if self.vars == superset {
            return self.clone();
        }
        let pos: Vec<usize> = self
            .vars
            .iter()
            .map(|v| superset.iter().position(|s| s == v).expect("superset"))
            .collect();
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut mono = vec![0u32; superset.len()];
            for (i, &e) in m.0.iter().enumerate() {
                mono[pos[i]] = e;
            }
            terms.insert(Mono(mono), c.clone());
        }
        MultiPoly {
            vars: superset.to_vec(),
            terms,
        }
    }

    fn merged_vars(&self, other: &MultiPoly) -> Vec<String> {
        let set: BTreeSet<&String> = self.vars.iter().chain(other.vars.iter()).collect();
        set.into_iter().cloned().collect()
    }

    pub(crate) fn align(&self, other: &MultiPoly) -> (MultiPoly, MultiPoly) {
        let vars = self.merged_vars(other);
        (self.embed(&vars), other.embed(&vars))
    }

    // ---- ring operations ----

    pub fn neg(&self) -> MultiPoly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        let (mut a, b) = self.align(other);
        for (m, c) in b.terms {
            insert_term(&mut a.terms, m, c);
        }
        a.prune_vars();
        a
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        if self.is_zero() || other.is_zero() {
            return MultiPoly::zero();
        }
        let (a, b) = self.align(other);
        let mut terms: BTreeMap<Mono, Scalar> = BTreeMap::new();
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                let mono = Mono(
                    ma.0.iter()
                        .zip(mb.0.iter())
                        .map(|(x, y)| x + y)
                        .collect(),
                );
                insert_term(&mut terms, mono, ca * cb);
            }
        }
        let mut p = MultiPoly {
            vars: a.vars,
            terms,
        };
        p.prune_vars();
        p
    }

    pub fn mul_scalar(&self, c: &Scalar) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero();
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = &*v * c;
        }
        out
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        let mut acc = MultiPoly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    // ---- calculus / evaluation ----

    pub fn derivative(&self, var: &str) -> MultiPoly {
        let idx = match self.vars.iter().position(|v| v == var) {
            Some(i) => i,
            None => return MultiPoly::zero(),
        };
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.0[idx];
            if e == 0 {
                continue;
            }
            let mut mono = m.0.clone();
            mono[idx] -= 1;
            insert_term(&mut terms, Mono(mono), c * &Scalar::from_int(e as i64));
        }
        let mut p = MultiPoly {
            vars: self.vars.clone(),
            terms,
        };
        p.prune_vars();
        p
    }

    /// Exact evaluation at a full Scalar assignment (by variable name).
    pub fn eval_scalar(&self, point: &BTreeMap<String, Scalar>) -> Result<Scalar> {
        let vals: Vec<&Scalar> = self
            .vars
            .iter()
            .map(|v| point.get(v).ok_or_else(|| Error::MissingAssignment(v.clone())))
            .collect::<Result<_>>()?;
        let mut acc = Scalar::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    term = &term * &vals[i].pow(e);
                }
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }

    /// Substitute exact values for a subset of variables.
    pub fn eval_partial(&self, point: &BTreeMap<String, Scalar>) -> MultiPoly {
        let mut acc = MultiPoly::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut exps: Vec<(usize, u32)> = Vec::new();
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                match point.get(&self.vars[i]) {
                    Some(val) => coeff = &coeff * &val.pow(e),
                    None => exps.push((i, e)),
                }
            }
            let var_refs: Vec<&str> = self.vars.iter().map(|s| s.as_str()).collect();
            let term = MultiPoly::from_terms(&var_refs, &[(coeff, &exps)]);
            acc = acc.add(&term);
        }
        acc
    }

    /// Numeric evaluation at a complex assignment (by variable name).
    pub fn eval_complex_map(&self, point: &BTreeMap<String, Complex64>) -> Result<Complex64> {
        let vals: Vec<Complex64> = self
            .vars
            .iter()
            .map(|v| {
                point
                    .get(v)
                    .copied()
                    .ok_or_else(|| Error::MissingAssignment(v.clone()))
            })
            .collect::<Result<_>>()?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut term = c.to_complex64();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    term *= vals[i].powu(e);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    // ---- univariate views (for gcd / resultant / substitution) ----

    /// Coefficients of `self` seen as univariate in `var`, ascending powers.
    /// Each coefficient is a polynomial in the remaining variables.
    pub fn univariate_in(&self, var: &str) -> Vec<MultiPoly> {
        let deg = self.degree_in(var).unwrap_or(0) as usize;
        let mut coeffs = vec![MultiPoly::zero(); deg + 1];
        let idx = self.vars.iter().position(|v| v == var);
        for (m, c) in &self.terms {
            let (e, rest) = match idx {
                Some(i) => {
                    let mut rest = m.0.clone();
                    let e = rest[i];
                    rest[i] = 0;
                    (e as usize, rest)
                }
                None => (0usize, m.0.clone()),
            };
            let exps: Vec<(usize, u32)> = rest
                .iter()
                .enumerate()
                .filter(|(_, &x)| x > 0)
                .map(|(i, &x)| (i, x))
                .collect();
            let var_refs: Vec<&str> = self.vars.iter().map(|s| s.as_str()).collect();
            let term = MultiPoly::from_terms(&var_refs, &[(c.clone(), &exps)]);
            coeffs[e] = coeffs[e].add(&term);
        }
        while coeffs.len() > 1 && coeffs.last().map(|p| p.is_zero()).unwrap_or(false) {
            coeffs.pop();
        }
        coeffs
    }

    pub fn from_univariate(var: &str, coeffs: &[MultiPoly]) -> MultiPoly {
        let v = MultiPoly::var(var);
        let mut acc = MultiPoly::zero();
        for (e, c) in coeffs.iter().enumerate() {
            acc = acc.add(&c.mul(&v.pow(e as u32)));
        }
        acc
    }

    /// Substitute a polynomial for a variable.
    pub fn subst_poly(&self, var: &str, value: &MultiPoly) -> MultiPoly {
        if !self.contains_var(var) {
            return self.clone();
        }
        let coeffs = self.univariate_in(var);
        // Horner
        let mut acc = MultiPoly::zero();
        for c in coeffs.iter().rev() {
            acc = acc.mul(value).add(c);
        }
        acc
    }

    // ---- exact division, gcd, resultant ----

    /// Exact division; errors if the division leaves a remainder.
    pub fn exact_div(&self, divisor: &MultiPoly) -> Result<MultiPoly> {
        if divisor.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(MultiPoly::zero());
        }
        if let Some(c) = divisor.as_constant() {
            let inv = c.recip()?;
            return Ok(self.mul_scalar(&inv));
        }
        let (a, b) = self.align(divisor);
        let mut rem = a.clone();
        let mut quo_terms: BTreeMap<Mono, Scalar> = BTreeMap::new();
        let (lead_m, lead_c) = {
            let (m, c) = b.terms.iter().next_back().unwrap();
            (m.clone(), c.clone())
        };
        let lead_inv = lead_c.recip()?;
        while !rem.is_zero() {
            let (rm, rc) = {
                let (m, c) = rem.terms.iter().next_back().unwrap();
                (m.clone(), c.clone())
            };
            // divide leading monomials
            let mut q_mono = Vec::with_capacity(rm.0.len());
            let mut ok = true;
            for (x, y) in rm.0.iter().zip(lead_m.0.iter()) {
                if x < y {
                    ok = false;
                    break;
                }
                q_mono.push(x - y);
            }
            if !ok {
                return Err(Error::InvariantViolation {
                    name: "exact_div",
                    detail: "division is not exact".into(),
                });
            }
            let q_coeff = &rc * &lead_inv;
            let q_term = MultiPoly {
                vars: rem.vars.clone(),
                terms: {
                    let mut t = BTreeMap::new();
                    t.insert(Mono(q_mono.clone()), q_coeff.clone());
                    t
                },
            };
            insert_term(&mut quo_terms, Mono(q_mono), q_coeff);
            rem = rem.sub(&q_term.mul(&b));
        }
        let mut q = MultiPoly {
            vars: a.vars,
            terms: quo_terms,
        };
        q.prune_vars();
        Ok(q)
    }

    /// Pseudo-division in `var`: returns (quotient, remainder, d) with
    /// `lc(b)^d * a = q*b + r` and `deg_var(r) < deg_var(b)`.
    fn pseudo_div_rem(a: &[MultiPoly], b: &[MultiPoly]) -> (Vec<MultiPoly>, u32) {
        // operates on univariate coefficient vectors; returns remainder and d
        let db = b.len() - 1;
        let lb = &b[db];
        let mut r: Vec<MultiPoly> = a.to_vec();
        let mut d = 0u32;
        while r.len() >= b.len() && !(r.len() == 1 && r[0].is_zero()) {
            let dr = r.len() - 1;
            let lr = r[dr].clone();
            // r = lb*r - lr * x^(dr-db) * b
            for c in r.iter_mut() {
                *c = c.mul(lb);
            }
            for k in 0..=db {
                r[dr - db + k] = r[dr - db + k].sub(&lr.mul(&b[k]));
            }
            d += 1;
            while r.len() > 1 && r.last().map(|p| p.is_zero()).unwrap_or(false) {
                r.pop();
            }
            if r.len() <= db {
                break;
            }
            if r.len() == 1 && r[0].is_zero() {
                break;
            }
        }
        (r, d)
    }

    /// Content of `self` as a univariate polynomial in `var`: the gcd of its
    /// coefficients (polynomials in the remaining variables).
    fn content_in(&self, var: &str) -> MultiPoly {
        let coeffs = self.univariate_in(var);
        let mut g = MultiPoly::zero();
        for c in &coeffs {
            if !c.is_zero() {
                g = MultiPoly::gcd(&g, c);
            }
        }
        g
    }

    /// Normalize so the leading coefficient (graded-lex) is 1.
    pub fn monic(&self) -> MultiPoly {
        if self.is_zero() {
            return MultiPoly::zero();
        }
        let lc = self.leading_coeff();
        self.mul_scalar(&lc.recip().expect("nonzero leading coeff"))
    }

    /// Multivariate gcd by primitive subresultant remainder sequences,
    /// normalized to leading coefficient 1.
    pub fn gcd(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
        if a.is_zero() {
            return b.monic();
        }
        if b.is_zero() {
            return a.monic();
        }
        if a.is_constant() || b.is_constant() {
            return MultiPoly::one();
        }
        // main variable: last (graded-lex heaviest) variable present in either
        let (aa, bb) = a.align(b);
        let var = {
            let mut pick = None;
            for v in aa.vars.iter().rev() {
                if aa.contains_var(v) || bb.contains_var(v) {
                    pick = Some(v.clone());
                    break;
                }
            }
            pick.expect("nonconstant polynomials have a variable")
        };
        let ca = aa.content_in(&var);
        let cb = bb.content_in(&var);
        let cont = MultiPoly::gcd(&ca, &cb);
        let pa = aa.exact_div(&ca).expect("content divides");
        let pb = bb.exact_div(&cb).expect("content divides");

        let ua = pa.univariate_in(&var);
        let ub = pb.univariate_in(&var);
        let (mut f, mut g) = if ua.len() >= ub.len() {
            (ua, ub)
        } else {
            (ub, ua)
        };
        loop {
            let (r, _) = MultiPoly::pseudo_div_rem(&f, &g);
            let rp = MultiPoly::from_univariate(&var, &r);
            if rp.is_zero() {
                break;
            }
            // primitive PRS: cheap to compute at our sizes and immune to blowup
            let rc = rp.content_in(&var);
            let rprim = rp.exact_div(&rc).expect("content divides");
            f = g;
            g = rprim.univariate_in(&var);
            if g.len() == 1 {
                // constant remainder: coprime primitive parts
                return cont.monic();
            }
        }
        let gp = MultiPoly::from_univariate(&var, &g);
        let gc = gp.content_in(&var);
        let gprim = gp.exact_div(&gc).expect("content divides");
        cont.mul(&gprim).monic()
    }

    /// Resultant of `p` and `q` with respect to `var`, computed by
    /// fraction-free (Bareiss) elimination on the Sylvester matrix.
    pub fn resultant(p: &MultiPoly, q: &MultiPoly, var: &str) -> Result<MultiPoly> {
        if p.is_zero() || q.is_zero() {
            return Err(Error::ResultantZeroInput);
        }
        if !p.contains_var(var) && !q.contains_var(var) {
            return Err(Error::ResultantVariableAbsent(var.to_string()));
        }
        let a = p.univariate_in(var);
        let b = q.univariate_in(var);
        let m = a.len() - 1;
        let n = b.len() - 1;
        if m == 0 {
            return Ok(a[0].pow(n as u32));
        }
        if n == 0 {
            return Ok(b[0].pow(m as u32));
        }
        let size = m + n;
        // Sylvester matrix: n rows of a's coefficients, m rows of b's.
        let mut mat: Vec<Vec<MultiPoly>> = vec![vec![MultiPoly::zero(); size]; size];
        for (row, chunk) in mat.iter_mut().enumerate().take(n) {
            for (k, c) in a.iter().enumerate() {
                chunk[row + (m - k)] = c.clone();
            }
        }
        for row in 0..m {
            for (k, c) in b.iter().enumerate() {
                mat[n + row][row + (n - k)] = c.clone();
            }
        }
        // Bareiss fraction-free elimination.
        let mut sign = 1i32;
        let mut prev = MultiPoly::one();
        for r in 0..size - 1 {
            if mat[r][r].is_zero() {
                let swap = (r + 1..size).find(|&i| !mat[i][r].is_zero());
                match swap {
                    Some(i) => {
                        mat.swap(r, i);
                        sign = -sign;
                    }
                    None => return Ok(MultiPoly::zero()),
                }
            }
            for i in r + 1..size {
                for j in r + 1..size {
                    let num = mat[r][r].mul(&mat[i][j]).sub(&mat[i][r].mul(&mat[r][j]));
                    mat[i][j] = num.exact_div(&prev).expect("Bareiss division is exact");
                }
                mat[i][r] = MultiPoly::zero();
            }
            prev = mat[r][r].clone();
        }
        let det = mat[size - 1][size - 1].clone();
        Ok(if sign < 0 { det.neg() } else { det })
    }
}

fn insert_term(map: &mut BTreeMap<Mono, Scalar>, mono: Mono, c: Scalar) {
    if c.is_zero() {
        return;
    }
    match map.entry(mono) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            let sum = &*e.get() + &c;
            if sum.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = sum;
            }
        }
    }
}

/// Sort `names` in place; returns `perm` with `perm[old_index] = new_index`.
fn sort_permutation(names: &mut [String]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..names.len()).collect();
    order.sort_by(|&i, &j| names[i].cmp(&names[j]));
    let sorted: Vec<String> = order.iter().map(|&i| names[i].clone()).collect();
    let mut perm = vec![0usize; names.len()];
    for (new_idx, &old_idx) in order.iter().enumerate() {
        perm[old_idx] = new_idx;
    }
    names.clone_from_slice(&sorted);
    perm
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        // print highest terms first for readability
        for (m, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mut factors: Vec<String> = Vec::new();
            if !c.is_one() || m.total() == 0 {
                factors.push(format!("{c}"));
            }
            for (i, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(self.vars[i].clone()),
                    _ => factors.push(format!("{}^{}", self.vars[i], e)),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
