//! Float-compiled forms of exact objects for hot numeric loops (annulus
//! sweeps, quadrature, geodesic right-hand sides). Compilation binds
//! variables to positions in a shared [`VarTable`] once, so evaluation is a
//! flat pass over terms with no name lookups or bignum traffic.

use crate::error::{Error, Result};
use crate::exact::{MultiPoly, RatFunc, RootExtElem};
use num_complex::Complex64;

#[derive(Clone, Debug, Default)]
pub struct VarTable {
    names: Vec<String>,
}

impl VarTable {
    pub fn new(names: &[String]) -> Self {
        VarTable {
            names: names.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }
}

#[derive(Clone, Debug)]
pub struct CompiledPoly {
    /// (coefficient, sparse exponents over VarTable positions)
    terms: Vec<(Complex64, Vec<(u16, u32)>)>,
}

impl CompiledPoly {
    pub fn compile(p: &MultiPoly, vt: &VarTable) -> Result<CompiledPoly> {
        let pos: Vec<u16> = p
            .vars()
            .iter()
            .map(|v| vt.index_of(v).map(|i| i as u16))
            .collect::<Result<_>>()?;
        let mut terms = Vec::with_capacity(p.num_terms());
        for (mono, c) in p.iter_terms() {
            let exps: Vec<(u16, u32)> = mono
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| (pos[i], e))
                .collect();
            terms.push((c.to_complex64(), exps));
        }
        Ok(CompiledPoly { terms })
    }

    pub fn eval(&self, point: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, exps) in &self.terms {
            let mut t = *c;
            for &(i, e) in exps {
                t *= point[i as usize].powu(e);
            }
            acc += t;
        }
        acc
    }
}

#[derive(Clone, Debug)]
pub struct CompiledRat {
    num: CompiledPoly,
    den: CompiledPoly,
}

impl CompiledRat {
    pub fn compile(r: &RatFunc, vt: &VarTable) -> Result<CompiledRat> {
        Ok(CompiledRat {
            num: CompiledPoly::compile(r.num(), vt)?,
            den: CompiledPoly::compile(r.den(), vt)?,
        })
    }

    pub fn eval(&self, point: &[Complex64], pole_tol: f64) -> Result<Complex64> {
        let d = self.den.eval(point);
        if d.norm() < pole_tol {
            return Err(Error::PoleEncountered { denom_abs: d.norm() });
        }
        Ok(self.num.eval(point) / d)
    }
}

/// Compiled root-extension element. Root values are supplied by the caller
/// (the branch tracker), aligned with `root_symbols`.
#[derive(Clone, Debug)]
pub struct CompiledElem {
    terms: Vec<(u32, CompiledRat)>,
    root_symbols: Vec<String>,
}

impl CompiledElem {
    pub fn compile(e: &RootExtElem, vt: &VarTable) -> Result<CompiledElem> {
        let terms = e
            .iter_coeffs()
            .map(|(mask, c)| Ok((mask, CompiledRat::compile(c, vt)?)))
            .collect::<Result<_>>()?;
        Ok(CompiledElem {
            terms,
            root_symbols: e.roots().iter().map(|r| r.symbol.clone()).collect(),
        })
    }

    pub fn root_symbols(&self) -> &[String] {
        &self.root_symbols
    }

    /// Evaluate given positional variable values and a root-value lookup
    /// aligned with `root_symbols`.
    pub fn eval(&self, point: &[Complex64], roots: &[Complex64], pole_tol: f64) -> Result<Complex64> {
        debug_assert_eq!(roots.len(), self.root_symbols.len());
        let mut acc = Complex64::new(0.0, 0.0);
        for (mask, c) in &self.terms {
            let mut t = c.eval(point, pole_tol)?;
            let mut m = *mask;
            while m != 0 {
                let i = m.trailing_zeros() as usize;
                t *= roots[i];
                m &= m - 1;
            }
            acc += t;
        }
        Ok(acc)
    }
}
