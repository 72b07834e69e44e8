//! The Einstein-Weyl layer for 3-dimensional moduli (normal bundle of
//! degree 2): conformal structure from second-order tangency of curves,
//! Levi-Civita symbols, the 1-forms a and b solving
//! `(grad g)_{abc} = a_a g_bc + b_b g_ac + b_c g_ab`, the Weyl connection
//! `D = LC + 1/2 omega^# g - omega . I` with `omega = a - 2b`, and the
//! trace-free symmetrized Ricci residual.

mod conformal;
mod einstein;
mod levi_civita;
mod solve;

pub use conformal::{conformal_from_family, minors_residual};
pub use einstein::{einstein_weyl_residual, ricci};
pub use levi_civita::{levi_civita, levi_civita_exact, metricity_residual};
pub use solve::{assemble_weyl, nabla_g, solve_ab, weyl_compatibility_residual, weyl_connection_at};

use crate::error::{Error, Result};
use crate::exact::RatFunc;
use crate::family::{sym_count, sym_index};
use crate::projconn::ChristoffelField;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::sync::Arc;

type C = Complex64;

/// Symmetric complex matrix in packed storage.
#[derive(Clone, Debug)]
pub struct SymMatrix {
    m: usize,
    vals: Vec<C>,
}

impl SymMatrix {
    pub fn zero(m: usize) -> Self {
        SymMatrix {
            m,
            vals: vec![C::new(0.0, 0.0); sym_count(m)],
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, a: usize, b: usize) -> C {
        self.vals[sym_index(self.m, a, b)]
    }

    pub fn set(&mut self, a: usize, b: usize, v: C) {
        self.vals[sym_index(self.m, a, b)] = v;
    }

    pub fn packed(&self) -> &[C] {
        &self.vals
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn to_dmatrix(&self) -> DMatrix<C> {
        DMatrix::from_fn(self.m, self.m, |i, j| self.get(i, j))
    }

    pub fn inverse(&self) -> Result<DMatrix<C>> {
        self.to_dmatrix()
            .try_inverse()
            .ok_or(Error::SingularMetric)
    }

    pub fn det(&self) -> C {
        self.to_dmatrix().determinant()
    }

    /// Scale so the first (row-major upper-triangle) entry of significant
    /// magnitude becomes 1.
    pub fn normalized(&self) -> SymMatrix {
        let maxv = self.max_abs();
        if maxv == 0.0 {
            return self.clone();
        }
        let pivot = self
            .vals
            .iter()
            .find(|v| v.norm() > 1e-8 * maxv)
            .copied()
            .unwrap_or(C::new(1.0, 0.0));
        SymMatrix {
            m: self.m,
            vals: self.vals.iter().map(|v| v / pivot).collect(),
        }
    }
}

/// Metric field over the parameter space: exact symmetric entries or an
/// opaque evaluator.
#[derive(Clone)]
pub enum MetricField {
    Exact {
        params: Vec<String>,
        m: usize,
        /// packed symmetric entries as rational functions of t
        entries: Vec<RatFunc>,
    },
    Fn {
        m: usize,
        f: Arc<dyn Fn(&[C]) -> Result<SymMatrix> + Send + Sync>,
    },
}

impl MetricField {
    pub fn m(&self) -> usize {
        match self {
            MetricField::Exact { m, .. } => *m,
            MetricField::Fn { m, .. } => *m,
        }
    }

    pub fn from_fn<F>(m: usize, f: F) -> Self
    where
        F: Fn(&[C]) -> Result<SymMatrix> + Send + Sync + 'static,
    {
        MetricField::Fn { m, f: Arc::new(f) }
    }

    pub fn eval(&self, t: &[C]) -> Result<SymMatrix> {
        match self {
            MetricField::Exact { params, m, entries } => {
                let pt: BTreeMap<String, C> =
                    params.iter().cloned().zip(t.iter().copied()).collect();
                let mut out = SymMatrix::zero(*m);
                for (i, e) in entries.iter().enumerate() {
                    out.vals[i] = e.eval_complex_map(&pt)?;
                }
                let det = out.det();
                if det.norm() < 1e-12 {
                    return Err(Error::SingularMetric);
                }
                Ok(out)
            }
            MetricField::Fn { f, .. } => {
                let out = f(t)?;
                if out.det().norm() < 1e-12 {
                    return Err(Error::SingularMetric);
                }
                Ok(out)
            }
        }
    }

    pub fn eval_deriv(&self, t: &[C], dir: usize, h: f64) -> Result<SymMatrix> {
        match self {
            MetricField::Exact { params, m, entries } => {
                let pt: BTreeMap<String, C> =
                    params.iter().cloned().zip(t.iter().copied()).collect();
                let mut out = SymMatrix::zero(*m);
                for (i, e) in entries.iter().enumerate() {
                    out.vals[i] = e.eval_derivative_at(&params[dir], &pt)?;
                }
                Ok(out)
            }
            MetricField::Fn { m, f } => {
                let diff = |step: f64| -> Result<SymMatrix> {
                    let mut tp = t.to_vec();
                    let mut tm = t.to_vec();
                    tp[dir] += C::new(step, 0.0);
                    tm[dir] -= C::new(step, 0.0);
                    let gp = f(&tp)?;
                    let gm = f(&tm)?;
                    let mut out = SymMatrix::zero(*m);
                    for i in 0..out.vals.len() {
                        out.vals[i] = (gp.vals[i] - gm.vals[i]) / (2.0 * step);
                    }
                    Ok(out)
                };
                let d1 = diff(h)?;
                let d2 = diff(h / 2.0)?;
                let mut out = SymMatrix::zero(*m);
                for i in 0..out.vals.len() {
                    out.vals[i] = (4.0 * d2.vals[i] - d1.vals[i]) / 3.0;
                }
                Ok(out)
            }
        }
    }

    /// Rescale by a constant (conformal representative change).
    pub fn scaled(&self, lambda: f64) -> MetricField {
        match self {
            MetricField::Exact { params, m, entries } => {
                let scale = crate::exact::Scalar::from_ratio((lambda * 1e6) as i64, 1_000_000);
                MetricField::Exact {
                    params: params.clone(),
                    m: *m,
                    entries: entries.iter().map(|e| e.mul_scalar(&scale)).collect(),
                }
            }
            MetricField::Fn { m, f } => {
                let f = f.clone();
                let m = *m;
                MetricField::from_fn(m, move |t| {
                    let mut g = f(t)?;
                    for v in g.vals.iter_mut() {
                        *v *= lambda;
                    }
                    Ok(g)
                })
            }
        }
    }
}

/// 1-form field over the parameter space.
#[derive(Clone)]
pub enum OneFormField {
    Exact {
        params: Vec<String>,
        comps: Vec<RatFunc>,
    },
    Fn {
        m: usize,
        f: Arc<dyn Fn(&[C]) -> Result<Vec<C>> + Send + Sync>,
    },
}

impl OneFormField {
    pub fn m(&self) -> usize {
        match self {
            OneFormField::Exact { comps, .. } => comps.len(),
            OneFormField::Fn { m, .. } => *m,
        }
    }

    pub fn from_fn<F>(m: usize, f: F) -> Self
    where
        F: Fn(&[C]) -> Result<Vec<C>> + Send + Sync + 'static,
    {
        OneFormField::Fn { m, f: Arc::new(f) }
    }

    pub fn eval(&self, t: &[C]) -> Result<Vec<C>> {
        match self {
            OneFormField::Exact { params, comps } => {
                let pt: BTreeMap<String, C> =
                    params.iter().cloned().zip(t.iter().copied()).collect();
                comps.iter().map(|c| c.eval_complex_map(&pt)).collect()
            }
            OneFormField::Fn { f, .. } => f(t),
        }
    }

    /// omega = a - 2b when both are exact; otherwise a pointwise evaluator.
    pub fn a_minus_2b(a: &OneFormField, b: &OneFormField) -> OneFormField {
        match (a, b) {
            (
                OneFormField::Exact { params, comps: ca },
                OneFormField::Exact { comps: cb, .. },
            ) => OneFormField::Exact {
                params: params.clone(),
                comps: ca
                    .iter()
                    .zip(cb.iter())
                    .map(|(x, y)| {
                        x.sub(&y.mul_scalar(&crate::exact::Scalar::from_int(2)))
                    })
                    .collect(),
            },
            _ => {
                let a = a.clone();
                let b = b.clone();
                OneFormField::from_fn(a.m(), move |t| {
                    let av = a.eval(t)?;
                    let bv = b.eval(t)?;
                    Ok(av
                        .iter()
                        .zip(bv.iter())
                        .map(|(x, y)| x - 2.0 * y)
                        .collect())
                })
            }
        }
    }
}

/// Metric, Weyl 1-form, and the Weyl connection they determine.
#[derive(Clone)]
pub struct WeylStructure {
    pub metric: MetricField,
    pub omega: OneFormField,
    pub connection: ChristoffelField,
}
