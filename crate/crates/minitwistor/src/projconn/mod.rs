//! The canonical projective connection: extraction from a splitting,
//! projective-equivalence algebra, geodesic integration, and the
//! totally-geodesic / fixed-intersection verifications.

mod checks;
mod extract;
mod gauge;
mod geodesic;

pub use checks::{
    same_intersection_check, tangent_space, totally_geodesic_check, zero_set, PointConstraint,
    SameIntersectionReport, TotallyGeodesicReport, ZeroSet,
};
pub use extract::{
    extract_connection, extract_connection_exact, extract_from_sweep, pipeline_field, Extraction,
    PipelineOpts,
};
pub use gauge::{gauge_connection, gauge_field, projective_difference, transform_coordinates, CoordMap};
pub use geodesic::{geodesic_integrate, GeodesicOpts, GeodesicPath, GeodesicSample};

use crate::error::{Error, Result};
use crate::exact::RatFunc;
use crate::family::{sym_count, sym_index};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::sync::Arc;

type C = Complex64;

/// Christoffel symbols at a point: Gamma^gamma_{alpha beta}, symmetric in
/// the lower pair (stored once per unordered pair).
#[derive(Clone, Debug)]
pub struct Christoffel {
    m: usize,
    /// vals[gamma * sym_count(m) + sym_index(m, a, b)]
    vals: Vec<C>,
}

impl Christoffel {
    pub fn zero(m: usize) -> Self {
        Christoffel {
            m,
            vals: vec![C::new(0.0, 0.0); m * sym_count(m)],
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, gamma: usize, a: usize, b: usize) -> C {
        self.vals[gamma * sym_count(self.m) + sym_index(self.m, a, b)]
    }

    pub fn set(&mut self, gamma: usize, a: usize, b: usize, v: C) {
        self.vals[gamma * sym_count(self.m) + sym_index(self.m, a, b)] = v;
    }

    /// Gamma^gamma_{alpha beta} v^alpha w^beta for all gamma.
    pub fn contract(&self, v: &[C], w: &[C]) -> Vec<C> {
        let m = self.m;
        let mut out = vec![C::new(0.0, 0.0); m];
        for (gamma, o) in out.iter_mut().enumerate() {
            let mut acc = C::new(0.0, 0.0);
            for a in 0..m {
                for b in 0..m {
                    acc += self.get(gamma, a, b) * v[a] * w[b];
                }
            }
            *o = acc;
        }
        out
    }

    pub fn sub(&self, other: &Christoffel) -> Christoffel {
        assert_eq!(self.m, other.m);
        Christoffel {
            m: self.m,
            vals: self
                .vals
                .iter()
                .zip(other.vals.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Entries as nested arrays [gamma][alpha][beta] (full symmetric form).
    pub fn to_nested(&self) -> Vec<Vec<Vec<C>>> {
        (0..self.m)
            .map(|g| {
                (0..self.m)
                    .map(|a| (0..self.m).map(|b| self.get(g, a, b)).collect())
                    .collect()
            })
            .collect()
    }
}

/// A Christoffel field over the parameter space: exact rational entries or
/// an opaque per-point evaluator (e.g. the extraction pipeline).
#[derive(Clone)]
pub enum ChristoffelField {
    Exact {
        params: Vec<String>,
        m: usize,
        /// vals[gamma * sym_count + pair]
        vals: Vec<RatFunc>,
    },
    Fn {
        m: usize,
        f: Arc<dyn Fn(&[C]) -> Result<Christoffel> + Send + Sync>,
    },
}

impl ChristoffelField {
    pub fn from_fn<F>(m: usize, f: F) -> Self
    where
        F: Fn(&[C]) -> Result<Christoffel> + Send + Sync + 'static,
    {
        ChristoffelField::Fn { m, f: Arc::new(f) }
    }

    pub fn constant(c: Christoffel) -> Self {
        let m = c.m();
        ChristoffelField::from_fn(m, move |_| Ok(c.clone()))
    }

    pub fn m(&self) -> usize {
        match self {
            ChristoffelField::Exact { m, .. } => *m,
            ChristoffelField::Fn { m, .. } => *m,
        }
    }

    pub fn eval(&self, t: &[C]) -> Result<Christoffel> {
        match self {
            ChristoffelField::Exact { params, m, vals } => {
                let pt: BTreeMap<String, C> =
                    params.iter().cloned().zip(t.iter().copied()).collect();
                let mut out = Christoffel::zero(*m);
                for (i, r) in vals.iter().enumerate() {
                    out.vals[i] = r.eval_complex_map(&pt)?;
                }
                Ok(out)
            }
            ChristoffelField::Fn { f, .. } => f(t),
        }
    }

    /// d/dt^dir of every entry: symbolic for exact fields,
    /// Richardson-extrapolated central differences otherwise.
    pub fn eval_deriv(&self, t: &[C], dir: usize, h: f64) -> Result<Christoffel> {
        match self {
            ChristoffelField::Exact { params, m, vals } => {
                let pt: BTreeMap<String, C> =
                    params.iter().cloned().zip(t.iter().copied()).collect();
                let mut out = Christoffel::zero(*m);
                for (i, r) in vals.iter().enumerate() {
                    out.vals[i] = r.eval_derivative_at(&params[dir], &pt)?;
                }
                Ok(out)
            }
            ChristoffelField::Fn { m, .. } => {
                let d1 = self.central_diff(t, dir, h)?;
                let d2 = self.central_diff(t, dir, h / 2.0)?;
                // Richardson: (4 D(h/2) - D(h)) / 3
                let mut out = Christoffel::zero(*m);
                for i in 0..out.vals.len() {
                    out.vals[i] = (4.0 * d2.vals[i] - d1.vals[i]) / 3.0;
                }
                Ok(out)
            }
        }
    }

    fn central_diff(&self, t: &[C], dir: usize, h: f64) -> Result<Christoffel> {
        let mut tp = t.to_vec();
        let mut tm = t.to_vec();
        tp[dir] += C::new(h, 0.0);
        tm[dir] -= C::new(h, 0.0);
        let gp = self.eval(&tp)?;
        let gm = self.eval(&tm)?;
        let mut out = Christoffel::zero(self.m());
        for i in 0..out.vals.len() {
            out.vals[i] = (gp.vals[i] - gm.vals[i]) / (2.0 * h);
        }
        Ok(out)
    }
}

/// Build an exact field from per-entry rational functions of the
/// parameters, given as (gamma, alpha, beta, value); unlisted entries are
/// zero.
pub fn exact_field(
    params: &[String],
    m: usize,
    entries: &[(usize, usize, usize, RatFunc)],
) -> Result<ChristoffelField> {
    let mut vals = vec![RatFunc::zero(); m * sym_count(m)];
    for (g, a, b, r) in entries {
        let idx = g * sym_count(m) + sym_index(m, *a, *b);
        if !vals[idx].is_zero() && vals[idx] != *r {
            return Err(Error::InvariantViolation {
                name: "christoffel symmetry",
                detail: format!("conflicting entries for ({g},{a},{b})"),
            });
        }
        vals[idx] = r.clone();
    }
    Ok(ChristoffelField::Exact {
        params: params.to_vec(),
        m,
        vals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_storage() {
        let mut g = Christoffel::zero(3);
        g.set(0, 0, 1, C::new(-1.0, 0.0));
        assert_eq!(g.get(0, 1, 0), C::new(-1.0, 0.0));
        let v = vec![C::new(1.0, 0.0), C::new(2.0, 0.0), C::new(0.0, 0.0)];
        let q = g.contract(&v, &v);
        // Gamma^0_{01} v^0 v^1 + Gamma^0_{10} v^1 v^0 = -4
        assert_eq!(q[0], C::new(-4.0, 0.0));
    }
}
