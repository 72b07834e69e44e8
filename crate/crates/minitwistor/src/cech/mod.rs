//! Splitting the 1-cocycle tau over the two-chart cover: the constructive
//! H^1 = 0 step. Numerically the quotient tau/F is torn into chart-
//! holomorphic halves by Laurent decomposition on the overlap circle; for
//! root-free rational data an exact partial-fraction path produces the same
//! split in closed form. The split is unique up to a fiber-constant 1-form
//! (the gauge), tracked by [`GaugeOneForm`].

pub mod exact;
mod split;
pub mod window;

pub use exact::{split_exact, ExactCochain};
pub use split::{split_cocycle, split_cocycle_from_sweep, SplitDiagnostics};
pub use window::{laurent_split, ConstantConvention, LaurentWindow, PowerSeries};

use crate::error::{Error, Result};
use crate::exact::RatFunc;
use num_complex::Complex64;
use std::collections::BTreeMap;

/// One chart component of a 0-cochain: a holomorphic function of the chart
/// coordinate at a fixed parameter point.
#[derive(Clone, Debug)]
pub enum ChartFn {
    Zero,
    /// Power series in the chart coordinate (from a Laurent split).
    Series(PowerSeries),
    /// Exact univariate rational function of the named chart coordinate.
    Exact { var: String, value: RatFunc },
    /// A chart function shifted by a fiber constant (gauge action).
    Shifted(Box<ChartFn>, Complex64),
}

impl ChartFn {
    pub fn eval(&self, coord: Complex64) -> Result<Complex64> {
        match self {
            ChartFn::Zero => Ok(Complex64::new(0.0, 0.0)),
            ChartFn::Series(s) => Ok(s.eval(coord)),
            ChartFn::Exact { var, value } => {
                let mut pt = BTreeMap::new();
                pt.insert(var.clone(), coord);
                value.eval_complex_map(&pt)
            }
            ChartFn::Shifted(inner, delta) => Ok(inner.eval(coord)? + delta),
        }
    }
}

/// 0-cochain with one function per chart per parameter index; splits tau.
#[derive(Clone, Debug)]
pub struct Cochain0Form {
    pub chart1: Vec<ChartFn>,
    pub chart2: Vec<ChartFn>,
}

impl Cochain0Form {
    pub fn zero(m: usize) -> Self {
        Cochain0Form {
            chart1: (0..m).map(|_| ChartFn::Zero).collect(),
            chart2: (0..m).map(|_| ChartFn::Zero).collect(),
        }
    }

    pub fn m(&self) -> usize {
        self.chart1.len()
    }

    pub fn eval1(&self, alpha: usize, z: Complex64) -> Result<Complex64> {
        self.chart1[alpha].eval(z)
    }

    pub fn eval2(&self, alpha: usize, zh: Complex64) -> Result<Complex64> {
        self.chart2[alpha].eval(zh)
    }

    /// Laurent-convergence check for the chart components: resummation on
    /// the unit circle must reproduce held coefficients with decaying tails.
    /// Series produced by `split_cocycle` satisfy it by construction; this
    /// guards hand-built cochains.
    pub fn validate_series_decay(&self, tail_tol: f64) -> Result<()> {
        let check = |f: &ChartFn| -> Result<()> {
            if let ChartFn::Series(s) = f {
                if let Some(last) = s.coeffs.last() {
                    if s.coeffs.len() > 4 && last.norm() > tail_tol {
                        return Err(Error::TailDecay {
                            tail: last.norm(),
                            tol: tail_tol,
                        });
                    }
                }
            }
            Ok(())
        };
        for f in self.chart1.iter().chain(self.chart2.iter()) {
            check(f)?;
        }
        Ok(())
    }
}

/// Fiber-constant gauge 1-form xi_alpha(t): the full freedom in splitting a
/// fixed cocycle over the two-chart cover.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeOneForm {
    pub xi: Vec<Complex64>,
}

impl GaugeOneForm {
    pub fn zero(m: usize) -> Self {
        GaugeOneForm {
            xi: vec![Complex64::new(0.0, 0.0); m],
        }
    }

    pub fn m(&self) -> usize {
        self.xi.len()
    }
}

/// Gauge action on a splitting: theta_i -> theta_i + xi on every chart.
/// The same cocycle is split (the difference of chart components is
/// unchanged), and every verification residual is preserved.
pub fn apply_gauge(theta: &Cochain0Form, xi: &GaugeOneForm) -> Cochain0Form {
    assert_eq!(theta.m(), xi.m(), "gauge dimension mismatch");
    let shift = |f: &ChartFn, d: Complex64| -> ChartFn {
        if d.norm() == 0.0 {
            f.clone()
        } else {
            match f {
                ChartFn::Series(s) => {
                    let mut s = s.clone();
                    s.shift_constant(d);
                    ChartFn::Series(s)
                }
                other => ChartFn::Shifted(Box::new(other.clone()), d),
            }
        }
    };
    Cochain0Form {
        chart1: theta
            .chart1
            .iter()
            .zip(xi.xi.iter())
            .map(|(f, &d)| shift(f, d))
            .collect(),
        chart2: theta
            .chart2
            .iter()
            .zip(xi.xi.iter())
            .map(|(f, &d)| shift(f, d))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauge_identity_is_noop() {
        let theta = Cochain0Form::zero(3);
        let out = apply_gauge(&theta, &GaugeOneForm::zero(3));
        for a in 0..3 {
            assert_eq!(
                out.eval1(a, Complex64::new(0.3, 0.1)).unwrap(),
                Complex64::new(0.0, 0.0)
            );
        }
    }

    #[test]
    fn gauge_shifts_constants_on_both_charts() {
        let theta = Cochain0Form::zero(2);
        let xi = GaugeOneForm {
            xi: vec![Complex64::new(1.0, -2.0), Complex64::new(0.5, 0.0)],
        };
        let out = apply_gauge(&theta, &xi);
        let z = Complex64::new(0.7, 0.2);
        for a in 0..2 {
            assert_eq!(out.eval1(a, z).unwrap(), xi.xi[a]);
            assert_eq!(out.eval2(a, z).unwrap(), xi.xi[a]);
        }
    }
}
