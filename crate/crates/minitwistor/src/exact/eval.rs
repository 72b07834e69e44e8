//! Branch-tracked complex evaluation.
//!
//! Root values are fixed at a base assignment by a [`BranchContext`] and
//! transported to evaluation points by analytic continuation along
//! straight-line (or piecewise-linear, via waypoints) paths, subdividing
//! adaptively until each step's root update is unambiguous: a step is
//! accepted only when the increment is smaller than the current root value.

use crate::error::{Error, Result};
use crate::exact::{CompiledElem, CompiledPoly, RootExtElem, VarTable};
use num_complex::Complex64;
use std::collections::BTreeMap;

pub type Assignment = BTreeMap<String, Complex64>;

#[derive(Clone, Debug)]
pub struct BranchContext {
    /// Values of every variable at the base point.
    pub base: Assignment,
    /// Chosen complex value of each root symbol at the base point.
    pub base_roots: BTreeMap<String, Complex64>,
}

impl BranchContext {
    pub fn new(base: Assignment, base_roots: BTreeMap<String, Complex64>) -> Self {
        BranchContext { base, base_roots }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ContinuationOpts {
    /// |D_j| below this along a path means a branch point was crossed.
    pub branch_tol: f64,
    /// |denominator| below this at an evaluation point means a pole.
    pub pole_tol: f64,
    /// Minimum sub-segment length before continuation gives up.
    pub min_segment: f64,
    /// Consistency tolerance for base root values (value^2 vs D at base).
    pub base_check: f64,
}

impl Default for ContinuationOpts {
    fn default() -> Self {
        ContinuationOpts {
            branch_tol: 1e-10,
            pole_tol: 1e-12,
            min_segment: 1e-10,
            base_check: 1e-9,
        }
    }
}

/// Carries the current point and root values along a continuation path.
/// Points are positional over a fixed [`VarTable`].
pub struct RootTracker {
    pub vt: VarTable,
    root_symbols: Vec<String>,
    definings: Vec<CompiledPoly>,
    point: Vec<Complex64>,
    values: Vec<Complex64>,
    opts: ContinuationOpts,
}

impl RootTracker {
    pub fn new(
        vt: VarTable,
        roots: &[(String, CompiledPoly)],
        base_point: Vec<Complex64>,
        base_values: &BTreeMap<String, Complex64>,
        opts: ContinuationOpts,
    ) -> Result<Self> {
        let mut symbols = Vec::new();
        let mut definings = Vec::new();
        let mut values = Vec::new();
        for (sym, d) in roots {
            let v = *base_values
                .get(sym)
                .ok_or_else(|| Error::MissingBranchValue(sym.clone()))?;
            let d0 = d.eval(&base_point);
            if (v * v - d0).norm() > opts.base_check * (1.0 + d0.norm()) {
                return Err(Error::InvalidBranchValue(sym.clone()));
            }
            symbols.push(sym.clone());
            definings.push(d.clone());
            values.push(v);
        }
        Ok(RootTracker {
            vt,
            root_symbols: symbols,
            definings,
            point: base_point,
            values,
            opts,
        })
    }

    pub fn point(&self) -> &[Complex64] {
        &self.point
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn root_symbols(&self) -> &[String] {
        &self.root_symbols
    }

    pub fn value_of(&self, symbol: &str) -> Option<Complex64> {
        self.root_symbols
            .iter()
            .position(|s| s == symbol)
            .map(|i| self.values[i])
    }

    /// Continue all roots along the straight segment from the current point
    /// to `target`, bisecting until every root update is unambiguous.
    pub fn advance_to(&mut self, target: &[Complex64]) -> Result<()> {
        debug_assert_eq!(target.len(), self.point.len());
        if self.root_symbols.is_empty() {
            self.point = target.to_vec();
            return Ok(());
        }
        let start = self.point.clone();
        let mut s_lo = 0.0f64;
        let mut s_hi = 1.0f64;
        loop {
            let probe: Vec<Complex64> = start
                .iter()
                .zip(target.iter())
                .map(|(a, b)| a + (b - a) * s_hi)
                .collect();
            match self.try_step(&probe)? {
                StepOutcome::Accepted(new_values) => {
                    self.values = new_values;
                    self.point = probe;
                    s_lo = s_hi;
                    if s_lo >= 1.0 {
                        return Ok(());
                    }
                    s_hi = 1.0;
                }
                StepOutcome::Ambiguous(sym) => {
                    let width = s_hi - s_lo;
                    if width < self.opts.min_segment {
                        return Err(Error::ContinuationStalled { root: sym });
                    }
                    s_hi = s_lo + width / 2.0;
                }
            }
        }
    }

    fn try_step(&self, probe: &[Complex64]) -> Result<StepOutcome> {
        let mut new_values = Vec::with_capacity(self.values.len());
        for (i, d) in self.definings.iter().enumerate() {
            let v = d.eval(probe);
            if v.norm() < self.opts.branch_tol {
                return Err(Error::BranchPointCrossed {
                    root: self.root_symbols[i].clone(),
                    d_abs: v.norm(),
                });
            }
            let cur = self.values[i];
            let cand = nearest_sqrt(v, cur);
            if (cand - cur).norm() >= cur.norm() {
                return Ok(StepOutcome::Ambiguous(self.root_symbols[i].clone()));
            }
            new_values.push(cand);
        }
        Ok(StepOutcome::Accepted(new_values))
    }
}

enum StepOutcome {
    Accepted(Vec<Complex64>),
    Ambiguous(String),
}

/// The square root of `v` closest to `near`.
pub fn nearest_sqrt(v: Complex64, near: Complex64) -> Complex64 {
    let p = v.sqrt();
    if (p - near).norm() <= (-p - near).norm() {
        p
    } else {
        -p
    }
}

/// Evaluate a root-extension element at a complex assignment, carrying
/// branch choices from `ctx.base` by analytic continuation. `waypoints`
/// optionally routes the continuation path through intermediate assignments
/// (each leg is a straight segment).
pub fn eval_complex(
    e: &RootExtElem,
    point: &Assignment,
    ctx: &BranchContext,
    waypoints: &[Assignment],
) -> Result<Complex64> {
    // variable universe: coefficient vars plus defining-poly vars
    let mut names: Vec<String> = Vec::new();
    let mut add = |vs: &[String]| {
        for v in vs {
            if !names.contains(v) {
                names.push(v.clone());
            }
        }
    };
    for (_, c) in e.iter_coeffs() {
        add(c.num().vars());
        add(c.den().vars());
    }
    for r in e.roots() {
        add(r.defining.vars());
    }
    names.sort();
    let vt = VarTable::new(&names);

    let assemble = |a: &Assignment| -> Result<Vec<Complex64>> {
        names
            .iter()
            .map(|n| {
                a.get(n)
                    .copied()
                    .ok_or_else(|| Error::MissingAssignment(n.clone()))
            })
            .collect()
    };

    let roots: Vec<(String, CompiledPoly)> = e
        .roots()
        .iter()
        .map(|r| Ok((r.symbol.clone(), CompiledPoly::compile(&r.defining, &vt)?)))
        .collect::<Result<_>>()?;
    let opts = ContinuationOpts::default();
    let mut tracker = RootTracker::new(vt.clone(), &roots, assemble(&ctx.base)?, &ctx.base_roots, opts)?;
    for wp in waypoints {
        tracker.advance_to(&assemble(wp)?)?;
    }
    let target = assemble(point)?;
    tracker.advance_to(&target)?;

    let compiled = CompiledElem::compile(e, &vt)?;
    compiled.eval(&target, tracker.values(), opts.pole_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{parse_expr, ParseContext, RootSpec};

    fn assignment(pairs: &[(&str, Complex64)]) -> Assignment {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn q_ctx() -> (ParseContext, BranchContext) {
        let base_ctx = ParseContext::new(&["z", "t0", "t1", "t2"], &[]);
        let q = parse_expr("t2^2*z^2 + 2*t1*t2*z + 1 + 2*t0*t2 + t1^2", &base_ctx)
            .unwrap()
            .as_poly()
            .unwrap();
        let spec = RootSpec {
            symbol: "sQ".into(),
            defining: q,
        };
        let pctx = ParseContext::new(&["z", "t0", "t1", "t2"], &[spec]);
        let base = assignment(&[
            ("z", c(1.0, 0.0)),
            ("t0", c(0.0, 0.0)),
            ("t1", c(0.0, 0.0)),
            ("t2", c(0.0, 0.0)),
        ]);
        let mut roots = BTreeMap::new();
        roots.insert("sQ".to_string(), c(1.0, 0.0));
        (pctx, BranchContext::new(base, roots))
    }

    #[test]
    fn base_point_value() {
        let (pctx, bctx) = q_ctx();
        let e = parse_expr("sQ", &pctx).unwrap();
        let v = eval_complex(&e, &bctx.base.clone(), &bctx, &[]).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn rational_pole_and_value() {
        let pctx = ParseContext::new(&["z"], &[]);
        let e = parse_expr("(z^2+1)/(z-2)", &pctx).unwrap();
        let bctx = BranchContext::new(assignment(&[("z", c(0.0, 0.0))]), BTreeMap::new());
        // value at z = i is 0
        let v = eval_complex(&e, &assignment(&[("z", c(0.0, 1.0))]), &bctx, &[]).unwrap();
        assert!(v.norm() < 1e-14);
        // pole at z = 2
        let err = eval_complex(&e, &assignment(&[("z", c(2.0, 0.0))]), &bctx, &[]).unwrap_err();
        assert!(matches!(err, Error::PoleEncountered { .. }));
    }

    #[test]
    fn continuation_tracks_principal_branch_near_base() {
        let (pctx, bctx) = q_ctx();
        let e = parse_expr("sQ", &pctx).unwrap();
        // small t2: sqrt(Q) near 1, matches principal sqrt
        let pt = assignment(&[
            ("z", c(1.0, 0.0)),
            ("t0", c(0.0, 0.0)),
            ("t1", c(0.0, 0.0)),
            ("t2", c(0.05, 0.0)),
        ]);
        let v = eval_complex(&e, &pt, &bctx, &[]).unwrap();
        let q = c(0.05f64 * 0.05, 0.0) + c(2.0 * 0.05, 0.0) * 0.0 + c(1.0, 0.0);
        assert!((v - q.sqrt()).norm() < 1e-12);
    }

    #[test]
    fn continuation_follows_non_principal_branch() {
        // sW^2 = w^2 + z^2 with base (w,z) = (0,1), value 1 = z there.
        // Continue z around the upper half circle to z = -1 with w = 0:
        // sqrt(z^2) tracked continuously equals z, so at z=-1 it is -1,
        // while the principal sqrt of (-1)^2 = 1 is +1.
        let base_ctx = ParseContext::new(&["w", "z"], &[]);
        let d = parse_expr("w^2 + z^2", &base_ctx).unwrap().as_poly().unwrap();
        let spec = RootSpec {
            symbol: "sW".into(),
            defining: d,
        };
        let pctx = ParseContext::new(&["w", "z"], &[spec]);
        let e = parse_expr("sW", &pctx).unwrap();
        let mut roots = BTreeMap::new();
        roots.insert("sW".to_string(), c(1.0, 0.0));
        let bctx = BranchContext::new(
            assignment(&[("w", c(0.0, 0.0)), ("z", c(1.0, 0.0))]),
            roots,
        );
        // waypoints along the upper unit semicircle
        let wps: Vec<Assignment> = (1..=8)
            .map(|k| {
                let th = std::f64::consts::PI * (k as f64) / 8.0;
                assignment(&[("w", c(0.0, 0.0)), ("z", c(th.cos(), th.sin()))])
            })
            .collect();
        let target = assignment(&[("w", c(0.0, 0.0)), ("z", c(-1.0, 0.0))]);
        let v = eval_complex(&e, &target, &bctx, &wps[..7]).unwrap();
        assert!((v - c(-1.0, 0.0)).norm() < 1e-12, "got {v}");
    }

    #[test]
    fn straight_path_through_branch_point_errors() {
        // same root, but the straight path from z=1 to z=-1 with w=0 passes
        // through z=0 where D = 0
        let base_ctx = ParseContext::new(&["w", "z"], &[]);
        let d = parse_expr("w^2 + z^2", &base_ctx).unwrap().as_poly().unwrap();
        let spec = RootSpec {
            symbol: "sW".into(),
            defining: d,
        };
        let pctx = ParseContext::new(&["w", "z"], &[spec]);
        let e = parse_expr("sW", &pctx).unwrap();
        let mut roots = BTreeMap::new();
        roots.insert("sW".to_string(), c(1.0, 0.0));
        let bctx = BranchContext::new(
            assignment(&[("w", c(0.0, 0.0)), ("z", c(1.0, 0.0))]),
            roots,
        );
        let target = assignment(&[("w", c(0.0, 0.0)), ("z", c(-1.0, 0.0))]);
        let err = eval_complex(&e, &target, &bctx, &[]).unwrap_err();
        assert!(matches!(
            err,
            Error::BranchPointCrossed { .. } | Error::ContinuationStalled { .. }
        ));
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let (pctx, bctx) = q_ctx();
        // e = i*R/sQ, differentiate in t0 and compare with central FD
        let e = parse_expr("i*(t2*z^2+t1*z+t0)/sQ", &pctx).unwrap();
        let de = e.derivative("t0").unwrap();
        let at = |t0: f64| -> Complex64 {
            let pt = assignment(&[
                ("z", c(0.7, 0.2)),
                ("t0", c(t0, 0.0)),
                ("t1", c(0.1, 0.0)),
                ("t2", c(0.05, 0.0)),
            ]);
            eval_complex(&e, &pt, &bctx, &[]).unwrap()
        };
        let h = 1e-5;
        let fd = (at(0.1 + h) - at(0.1 - h)) / (2.0 * h);
        let pt = assignment(&[
            ("z", c(0.7, 0.2)),
            ("t0", c(0.1, 0.0)),
            ("t1", c(0.1, 0.0)),
            ("t2", c(0.05, 0.0)),
        ]);
        let sym = eval_complex(&de, &pt, &bctx, &[]).unwrap();
        assert!((fd - sym).norm() / sym.norm().max(1.0) < 1e-7);
    }

    #[test]
    fn dphi_at_base_is_i_z_power() {
        // For phi = i*R/sQ at t = 0: d_alpha phi = i z^alpha
        let (pctx, bctx) = q_ctx();
        let phi = parse_expr("i*(t2*z^2+t1*z+t0)/sQ", &pctx).unwrap();
        let z0 = c(0.6, 0.3);
        for (alpha, var) in ["t0", "t1", "t2"].iter().enumerate() {
            let d = phi.derivative(var).unwrap();
            let pt = assignment(&[
                ("z", z0),
                ("t0", c(0.0, 0.0)),
                ("t1", c(0.0, 0.0)),
                ("t2", c(0.0, 0.0)),
            ]);
            let v = eval_complex(&d, &pt, &bctx, &[]).unwrap();
            let expect = c(0.0, 1.0) * z0.powu(alpha as u32);
            assert!((v - expect).norm() < 1e-12, "alpha={alpha}: {v} vs {expect}");
        }
    }
}
