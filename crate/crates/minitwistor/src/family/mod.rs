//! Two-chart families of rational curves in a surface.
//!
//! A [`Family`] holds holomorphic data `w = phi1(z, t)`, `wh = phi2(zh, t)`
//! in two fiber charts related by the surface transition
//! `wh = f(w, z)`, `zh = g(z)` normalized so `f(0, z) = 0`: the base curve
//! is `w = 0` in both charts and `phi_i(., t0) = 0`. The overlap is the
//! annulus `r_in < |z| < r_out`, and all numeric evaluation is carried out
//! by branch-tracked continuation from a single base assignment.

mod builders;
mod cocycle;
mod exact_path;
mod sweep;

pub use builders::{branched_cover_obstruction, build_branched_cover_12, build_quadric_11};
pub use cocycle::{
    antisymmetry_residual, kodaira_section, kodaira_section_from_sweep, normal_transition,
    normal_transition_from_sweep, tau_cocycle, tau_cocycle_from_sweep,
    verify_second_derivative_relation, Cocycle1Form, NormalTransition, SectionFn, TauData,
};
pub use exact_path::{exact_cocycle_quotient, ExactCocycleQuotient};
pub use sweep::AnnulusSweep;

use crate::error::{Error, Result};
use crate::exact::{
    BranchContext, CompiledElem, CompiledPoly, ContinuationOpts, MultiPoly, RootExtElem,
    RootTracker, Scalar, VarTable,
};
use crate::Tolerances;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::sync::OnceLock;

/// Surface transition from chart 1 to chart 2: `wh = f(w, z)`, `zh = g(z)`.
#[derive(Clone, Debug)]
pub struct Transition {
    pub f: RootExtElem,
    pub g: RootExtElem,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chart {
    One,
    Two,
}

pub struct Family {
    pub name: String,
    /// Moduli parameter names t^0 .. t^{m-1} (in index order).
    pub params: Vec<String>,
    pub fiber_z: String,
    pub fiber_zh: String,
    pub fiber_w: String,
    pub phi1: RootExtElem,
    pub phi2: RootExtElem,
    pub transition: Transition,
    /// Base parameter point, exact and floating.
    pub t0_exact: Vec<Scalar>,
    pub t0: Vec<Complex64>,
    /// Overlap annulus (r_in, r_out) with r_in < 1 < r_out.
    pub annulus: (f64, f64),
    pub branch: BranchContext,
    /// Radius of the validity neighbourhood around t0.
    pub validity_radius: f64,
    pub tol: Tolerances,
    /// Exact polynomials recorded by builders (resultants, discriminants...).
    pub named_polys: BTreeMap<String, MultiPoly>,
    cache: OnceLock<FamilyCache>,
}

/// Compiled symbolic derivatives shared by all numeric pipelines.
pub(crate) struct FamilyCache {
    pub vt: VarTable,
    pub idx_z: usize,
    pub idx_zh: usize,
    pub idx_w: usize,
    pub idx_params: Vec<usize>,
    /// Every root symbol with its compiled defining polynomial; `true`
    /// marks roots whose defining polynomial involves w (continuable only
    /// once the fiber value is known).
    pub roots: Vec<(String, CompiledPoly, bool)>,
    pub chart_roots: Vec<(String, CompiledPoly)>,
    pub trans_roots: Vec<(String, CompiledPoly)>,

    pub phi1: Bound,
    pub phi2: Bound,
    pub g: Bound,
    pub dphi1: Vec<Bound>,
    pub dphi2: Vec<Bound>,
    pub ddphi1: Vec<Bound>,
    pub ddphi2: Vec<Bound>,
    pub dphi1_z: Vec<Bound>,
    pub dphi2_z: Vec<Bound>,
    pub phi1_z: Bound,
    pub phi2_z: Bound,
    pub phi2_zz: Bound,
    pub f_w: Bound,
    pub f_ww: Bound,
    pub g_w: Bound,
    pub g_ww: Bound,
}

/// A compiled element together with the indices of its roots in the
/// family-wide root list; evaluation takes the family-wide value slate.
pub(crate) struct Bound {
    elem: CompiledElem,
    root_idx: Vec<usize>,
}

impl Bound {
    fn new(
        e: &RootExtElem,
        vt: &VarTable,
        all_roots: &[(String, CompiledPoly, bool)],
    ) -> Result<Bound> {
        let elem = CompiledElem::compile(e, vt)?;
        let root_idx = elem
            .root_symbols()
            .iter()
            .map(|s| {
                all_roots
                    .iter()
                    .position(|(name, _, _)| name == s)
                    .ok_or_else(|| Error::MissingBranchValue(s.clone()))
            })
            .collect::<Result<_>>()?;
        Ok(Bound { elem, root_idx })
    }

    pub fn eval(
        &self,
        point: &[Complex64],
        slate: &RootSlate,
        pole_tol: f64,
    ) -> Result<Complex64> {
        let mut local = [Complex64::new(0.0, 0.0); 16];
        debug_assert!(self.root_idx.len() <= 16);
        for (i, &gi) in self.root_idx.iter().enumerate() {
            local[i] = slate.values[gi];
        }
        self.elem
            .eval(point, &local[..self.root_idx.len()], pole_tol)
    }
}

/// Family-wide root values in `FamilyCache::roots` order.
#[derive(Clone, Debug)]
pub(crate) struct RootSlate {
    values: Vec<Complex64>,
    chart_slots: Vec<usize>,
    trans_slots: Vec<usize>,
}

impl RootSlate {
    fn new(cache: &FamilyCache) -> RootSlate {
        let chart_slots = cache
            .roots
            .iter()
            .enumerate()
            .filter(|(_, (_, _, w))| !w)
            .map(|(i, _)| i)
            .collect();
        let trans_slots = cache
            .roots
            .iter()
            .enumerate()
            .filter(|(_, (_, _, w))| *w)
            .map(|(i, _)| i)
            .collect();
        RootSlate {
            values: vec![Complex64::new(0.0, 0.0); cache.roots.len()],
            chart_slots,
            trans_slots,
        }
    }

    fn set_chart(&mut self, values: &[Complex64]) {
        for (k, &slot) in self.chart_slots.iter().enumerate() {
            self.values[slot] = values[k];
        }
    }

    fn set_trans(&mut self, values: &[Complex64]) {
        for (k, &slot) in self.trans_slots.iter().enumerate() {
            self.values[slot] = values[k];
        }
    }
}

/// Symmetric-pair index for (alpha, beta) with alpha <= beta.
pub fn sym_index(m: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    a * m - a * (a + 1) / 2 + b
}

pub fn sym_count(m: usize) -> usize {
    m * (m + 1) / 2
}

/// All (alpha, beta) with alpha <= beta in `sym_index` order.
pub fn sym_pairs(m: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity(sym_count(m));
    for a in 0..m {
        for b in a..m {
            v.push((a, b));
        }
    }
    v
}

/// Piecewise path for moving a fiber coordinate from `from` to `to` that
/// stays away from the origin: radial move first, then rotation in arcs of
/// at most pi/8.
pub(crate) fn arc_path(from: Complex64, to: Complex64) -> Vec<Complex64> {
    let mut out = Vec::new();
    let (_, th0) = from.to_polar();
    let (r1, th1) = to.to_polar();
    out.push(Complex64::from_polar(r1, th0));
    let mut dth = th1 - th0;
    while dth > std::f64::consts::PI {
        dth -= 2.0 * std::f64::consts::PI;
    }
    while dth < -std::f64::consts::PI {
        dth += 2.0 * std::f64::consts::PI;
    }
    let steps = ((dth.abs() / (std::f64::consts::PI / 8.0)).ceil() as usize).max(1);
    for k in 1..=steps {
        let th = th0 + dth * (k as f64) / (steps as f64);
        out.push(Complex64::from_polar(r1, th));
    }
    out
}

impl std::fmt::Debug for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Family")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("annulus", &self.annulus)
            .finish_non_exhaustive()
    }
}

impl Family {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: String,
        params: Vec<String>,
        fiber: (String, String, String), // (w, z, zh)
        phi1: RootExtElem,
        phi2: RootExtElem,
        transition: Transition,
        t0_exact: Vec<Scalar>,
        annulus: (f64, f64),
        branch: BranchContext,
        validity_radius: f64,
        tol: Tolerances,
        named_polys: BTreeMap<String, MultiPoly>,
    ) -> Result<Family> {
        let t0 = t0_exact.iter().map(|s| s.to_complex64()).collect();
        let fam = Family {
            name,
            params,
            fiber_w: fiber.0,
            fiber_z: fiber.1,
            fiber_zh: fiber.2,
            phi1,
            phi2,
            transition,
            t0_exact,
            t0,
            annulus,
            branch,
            validity_radius,
            tol,
            named_polys,
            cache: OnceLock::new(),
        };
        fam.validate()?;
        Ok(fam)
    }

    pub fn m(&self) -> usize {
        self.params.len()
    }

    pub(crate) fn cache(&self) -> Result<&FamilyCache> {
        if let Some(c) = self.cache.get() {
            return Ok(c);
        }
        let built = self.build_cache()?;
        let _ = self.cache.set(built);
        Ok(self.cache.get().expect("cache just set"))
    }

    fn build_cache(&self) -> Result<FamilyCache> {
        let mut names: Vec<String> = vec![
            self.fiber_w.clone(),
            self.fiber_z.clone(),
            self.fiber_zh.clone(),
        ];
        names.extend(self.params.iter().cloned());
        names.sort();
        names.dedup();
        let vt = VarTable::new(&names);
        let idx_w = vt.index_of(&self.fiber_w)?;
        let idx_z = vt.index_of(&self.fiber_z)?;
        let idx_zh = vt.index_of(&self.fiber_zh)?;
        let idx_params = self
            .params
            .iter()
            .map(|p| vt.index_of(p))
            .collect::<Result<Vec<_>>>()?;

        let mut roots: Vec<(String, CompiledPoly, bool)> = Vec::new();
        for (owner, e) in [
            ("phi1", &self.phi1),
            ("phi2", &self.phi2),
            ("f", &self.transition.f),
            ("g", &self.transition.g),
        ] {
            for r in e.roots() {
                let with_w = r.defining.contains_var(&self.fiber_w);
                if with_w && owner != "f" {
                    return Err(Error::InvariantViolation {
                        name: "root variables",
                        detail: format!(
                            "root `{}` used by {owner} depends on the fiber value {}",
                            r.symbol, self.fiber_w
                        ),
                    });
                }
                if roots.iter().any(|(s, _, _)| s == &r.symbol) {
                    continue;
                }
                let cp = CompiledPoly::compile(&r.defining, &vt)?;
                roots.push((r.symbol.clone(), cp, with_w));
            }
        }
        let chart_roots: Vec<(String, CompiledPoly)> = roots
            .iter()
            .filter(|(_, _, w)| !w)
            .map(|(s, p, _)| (s.clone(), p.clone()))
            .collect();
        let trans_roots: Vec<(String, CompiledPoly)> = roots
            .iter()
            .filter(|(_, _, w)| *w)
            .map(|(s, p, _)| (s.clone(), p.clone()))
            .collect();

        let m = self.m();
        let mut sym_dphi1 = Vec::with_capacity(m);
        let mut sym_dphi2 = Vec::with_capacity(m);
        for p in &self.params {
            sym_dphi1.push(self.phi1.derivative(p)?);
            sym_dphi2.push(self.phi2.derivative(p)?);
        }
        let mut sym_ddphi1 = Vec::new();
        let mut sym_ddphi2 = Vec::new();
        for (a, b) in sym_pairs(m) {
            sym_ddphi1.push(sym_dphi1[a].derivative(&self.params[b])?);
            sym_ddphi2.push(sym_dphi2[a].derivative(&self.params[b])?);
        }
        let sym_ddphi1 = sym_ddphi1;
        let sym_ddphi2 = sym_ddphi2;
        let phi1_z = self.phi1.derivative(&self.fiber_z)?;
        let phi2_z = self.phi2.derivative(&self.fiber_zh)?;
        let phi2_zz = phi2_z.derivative(&self.fiber_zh)?;
        let dphi1_z: Vec<RootExtElem> = sym_dphi1
            .iter()
            .map(|e| e.derivative(&self.fiber_z))
            .collect::<Result<_>>()?;
        let dphi2_z: Vec<RootExtElem> = sym_dphi2
            .iter()
            .map(|e| e.derivative(&self.fiber_zh))
            .collect::<Result<_>>()?;
        let f_w = self.transition.f.derivative(&self.fiber_w)?;
        let f_ww = f_w.derivative(&self.fiber_w)?;
        let g_w = self.transition.g.derivative(&self.fiber_w)?;
        let g_ww = g_w.derivative(&self.fiber_w)?;

        let bound = |e: &RootExtElem| Bound::new(e, &vt, &roots);
        let bound_vec = |es: &[RootExtElem]| -> Result<Vec<Bound>> {
            es.iter().map(|e| Bound::new(e, &vt, &roots)).collect()
        };

        Ok(FamilyCache {
            phi1: bound(&self.phi1)?,
            phi2: bound(&self.phi2)?,
            g: bound(&self.transition.g)?,
            dphi1: bound_vec(&sym_dphi1)?,
            dphi2: bound_vec(&sym_dphi2)?,
            ddphi1: bound_vec(&sym_ddphi1)?,
            ddphi2: bound_vec(&sym_ddphi2)?,
            dphi1_z: bound_vec(&dphi1_z)?,
            dphi2_z: bound_vec(&dphi2_z)?,
            phi1_z: bound(&phi1_z)?,
            phi2_z: bound(&phi2_z)?,
            phi2_zz: bound(&phi2_zz)?,
            f_w: bound(&f_w)?,
            f_ww: bound(&f_ww)?,
            g_w: bound(&g_w)?,
            g_ww: bound(&g_ww)?,
            vt,
            idx_z,
            idx_zh,
            idx_w,
            idx_params,
            roots,
            chart_roots,
            trans_roots,
        })
    }

    pub(crate) fn base_point(&self, cache: &FamilyCache) -> Result<Vec<Complex64>> {
        cache
            .vt
            .names()
            .iter()
            .map(|n| {
                self.branch
                    .base
                    .get(n)
                    .copied()
                    .ok_or_else(|| Error::MissingAssignment(n.clone()))
            })
            .collect()
    }

    pub(crate) fn chart_tracker(&self, cache: &FamilyCache) -> Result<RootTracker> {
        RootTracker::new(
            cache.vt.clone(),
            &cache.chart_roots,
            self.base_point(cache)?,
            &self.branch.base_roots,
            ContinuationOpts::default(),
        )
    }

    pub(crate) fn trans_tracker(&self, cache: &FamilyCache) -> Result<RootTracker> {
        RootTracker::new(
            cache.vt.clone(),
            &cache.trans_roots,
            self.base_point(cache)?,
            &self.branch.base_roots,
            ContinuationOpts::default(),
        )
    }

    pub(crate) fn new_slate(&self, cache: &FamilyCache) -> RootSlate {
        RootSlate::new(cache)
    }

    pub fn in_validity_region(&self, t: &[Complex64]) -> bool {
        t.iter()
            .zip(self.t0.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
            <= self.validity_radius
    }

    pub fn require_validity(&self, t: &[Complex64]) -> Result<()> {
        if t.len() != self.m() {
            return Err(Error::FamilyInvalid(format!(
                "expected {} parameter values, got {}",
                self.m(),
                t.len()
            )));
        }
        if !self.in_validity_region(t) {
            return Err(Error::FamilyInvalid(format!(
                "parameter point outside the validity neighbourhood (radius {})",
                self.validity_radius
            )));
        }
        Ok(())
    }

    // ---- construction-time invariants ----

    fn validate(&self) -> Result<()> {
        let (r_in, r_out) = self.annulus;
        if !(0.0 < r_in && r_in < 1.0 && 1.0 < r_out) {
            return Err(Error::InvariantViolation {
                name: "annulus",
                detail: format!("need 0 < r_in < 1 < r_out, got ({r_in}, {r_out})"),
            });
        }
        if self.params.is_empty() {
            return Err(Error::InvariantViolation {
                name: "parameters",
                detail: "family must have at least one parameter".into(),
            });
        }
        self.validate_chart_normalization()?;
        self.validate_base_vanishing()?;
        self.validate_compatibility()?;
        self.validate_kodaira_basis()?;
        Ok(())
    }

    /// Transition normalization: f(0, z) = 0 identically.
    fn validate_chart_normalization(&self) -> Result<()> {
        if let Some(rf) = self.transition.f.as_ratfunc() {
            let at0 = rf.subst(&self.fiber_w, &crate::exact::RatFunc::zero())?;
            if !at0.is_zero() {
                return Err(Error::InvariantViolation {
                    name: "transition normalization f(0, z) = 0",
                    detail: format!("f(0, z) = {at0}"),
                });
            }
            return Ok(());
        }
        let cache = self.cache()?;
        let opts = ContinuationOpts::default();
        let f_bound = Bound::new(&self.transition.f, &cache.vt, &cache.roots)?;
        for k in 0..20 {
            let th = 2.0 * std::f64::consts::PI * (k as f64) / 20.0 + 0.13;
            let radius = self.annulus.0 * 1.2 + (self.annulus.1 * 0.8 - self.annulus.0 * 1.2) * ((k % 5) as f64) / 4.0;
            let z = Complex64::from_polar(radius, th);
            let mut chart = self.chart_tracker(cache)?;
            let mut trans = self.trans_tracker(cache)?;
            let mut target = chart.point().to_vec();
            for wp in arc_path(target[cache.idx_z], z) {
                target[cache.idx_z] = wp;
                chart.advance_to(&target)?;
                trans.advance_to(&target)?;
            }
            let mut slate = RootSlate::new(cache);
            slate.set_chart(chart.values());
            slate.set_trans(trans.values());
            let v = f_bound.eval(&target, &slate, opts.pole_tol)?;
            if v.norm() > 1e-10 {
                return Err(Error::InvariantViolation {
                    name: "transition normalization f(0, z) = 0",
                    detail: format!("|f(0, z)| = {:.3e} at z = {z}", v.norm()),
                });
            }
        }
        Ok(())
    }

    /// phi_i(., t0) = 0 (exact whenever coefficients vanish symbolically).
    fn validate_base_vanishing(&self) -> Result<()> {
        let t0_map: BTreeMap<String, Scalar> = self
            .params
            .iter()
            .cloned()
            .zip(self.t0_exact.iter().cloned())
            .collect();
        for (name, chart, phi) in [
            ("phi1", Chart::One, &self.phi1),
            ("phi2", Chart::Two, &self.phi2),
        ] {
            let at0 = phi.eval_partial(&t0_map)?;
            if at0.is_zero() {
                continue;
            }
            // sampled fallback for families whose coefficients do not
            // vanish symbolically at t0
            let mut worst = 0.0f64;
            for k in 0..20 {
                let th = 2.0 * std::f64::consts::PI * (k as f64) / 20.0 + 0.21;
                let radius =
                    self.annulus.0 * 1.2 + (self.annulus.1 * 0.8 - self.annulus.0 * 1.2) * ((k % 7) as f64) / 6.0;
                let zc = Complex64::from_polar(radius, th);
                let mut ev = self.point_evaluator(chart, zc)?;
                worst = worst.max(ev.phi_at(&self.t0.clone())?.norm());
            }
            if worst > 1e-10 {
                return Err(Error::InvariantViolation {
                    name: "base normalization phi(., t0) = 0",
                    detail: format!("|{name}(., t0)| = {worst:.3e} at samples"),
                });
            }
        }
        Ok(())
    }

    fn validate_compatibility(&self) -> Result<()> {
        let worst = self.compatibility_residual(20, 0x5eed)?;
        if worst > self.tol.compatibility {
            return Err(Error::InvariantViolation {
                name: "chart compatibility phi2(g(z), t) = f(phi1(z, t), z)",
                detail: format!("residual {worst:.3e}"),
            });
        }
        Ok(())
    }

    /// Max |phi2(g(z), t) - f(phi1(z, t), z)| over `n` pseudo-random
    /// samples (z on the annulus, t near t0).
    pub fn compatibility_residual(&self, n: usize, seed: u64) -> Result<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let cache = self.cache()?;
        let f_bound = Bound::new(&self.transition.f, &cache.vt, &cache.roots)?;
        let mut worst = 0.0f64;
        for _ in 0..n {
            let radius = rng.gen_range(self.annulus.0 * 1.1..self.annulus.1 * 0.9);
            let th = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
            let z = Complex64::from_polar(radius, th);
            let scale = (self.validity_radius * 0.5).min(0.1);
            let t: Vec<Complex64> = self
                .t0
                .iter()
                .map(|t0| t0 + Complex64::new(rng.gen_range(-scale..scale), 0.0))
                .collect();
            let diff = self.compatibility_at(cache, &f_bound, z, &t)?;
            worst = worst.max(diff);
        }
        Ok(worst)
    }

    fn compatibility_at(
        &self,
        cache: &FamilyCache,
        f_bound: &Bound,
        z: Complex64,
        t: &[Complex64],
    ) -> Result<f64> {
        let opts = ContinuationOpts::default();
        let mut chart = self.chart_tracker(cache)?;
        let mut target = chart.point().to_vec();
        let zh_base = target[cache.idx_zh];
        for wp in arc_path(target[cache.idx_z], z) {
            target[cache.idx_z] = wp;
            chart.advance_to(&target)?;
        }
        let mut slate = RootSlate::new(cache);
        slate.set_chart(chart.values());
        let zh = cache.g.eval(&target, &slate, opts.pole_tol)?;
        for wp in arc_path(zh_base, zh) {
            target[cache.idx_zh] = wp;
            chart.advance_to(&target)?;
        }
        for (i, &pi) in cache.idx_params.iter().enumerate() {
            target[pi] = t[i];
        }
        chart.advance_to(&target)?;
        slate.set_chart(chart.values());
        let w = cache.phi1.eval(&target, &slate, opts.pole_tol)?;
        let phi2_at = cache.phi2.eval(&target, &slate, opts.pole_tol)?;

        let mut trans = self.trans_tracker(cache)?;
        let mut tt = trans.point().to_vec();
        for wp in arc_path(tt[cache.idx_z], z) {
            tt[cache.idx_z] = wp;
            trans.advance_to(&tt)?;
        }
        for (i, &pi) in cache.idx_params.iter().enumerate() {
            tt[pi] = t[i];
        }
        trans.advance_to(&tt)?;
        tt[cache.idx_w] = w;
        trans.advance_to(&tt)?;
        slate.set_trans(trans.values());
        let f_val = f_bound.eval(&tt, &slate, opts.pole_tol)?;
        Ok((phi2_at - f_val).norm())
    }

    /// The sections d_alpha phi1(., t0) must be linearly independent
    /// (rejects degenerate families whose Kodaira map has no rank).
    fn validate_kodaira_basis(&self) -> Result<()> {
        let cache = self.cache()?;
        let m = self.m();
        let nsamp = 2 * m + 3;
        let opts = ContinuationOpts::default();
        let mut rows = Vec::new();
        for k in 0..nsamp {
            let th = 2.0 * std::f64::consts::PI * (k as f64) / (nsamp as f64) + 0.31;
            let z = Complex64::from_polar(1.0, th);
            let mut chart = self.chart_tracker(cache)?;
            let mut target = chart.point().to_vec();
            for wp in arc_path(target[cache.idx_z], z) {
                target[cache.idx_z] = wp;
                chart.advance_to(&target)?;
            }
            let mut slate = RootSlate::new(cache);
            slate.set_chart(chart.values());
            let row: Vec<Complex64> = cache
                .dphi1
                .iter()
                .map(|b| b.eval(&target, &slate, opts.pole_tol))
                .collect::<Result<_>>()?;
            rows.push(row);
        }
        let mat = nalgebra::DMatrix::from_fn(nsamp, m, |i, j| rows[i][j]);
        let svd = mat.svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if smax <= 0.0 || smin / smax < 1e-8 {
            return Err(Error::InvariantViolation {
                name: "kodaira basis",
                detail: format!(
                    "sections d_alpha phi are linearly dependent at t0 (sigma_min/sigma_max = {:.3e})",
                    if smax > 0.0 { smin / smax } else { 0.0 }
                ),
            });
        }
        Ok(())
    }

    /// Evaluator for phi and d_alpha phi at a fixed fiber point, with the
    /// parameter point moved continuously between calls.
    pub fn point_evaluator(&self, chart: Chart, fiber: Complex64) -> Result<PointEvaluator<'_>> {
        PointEvaluator::new(self, chart, fiber)
    }
}

/// Evaluates chart data at a fixed fiber coordinate while the parameter
/// point moves along a path (deviation and tangency checks).
pub struct PointEvaluator<'f> {
    fam: &'f Family,
    chart: Chart,
    tracker: RootTracker,
    target: Vec<Complex64>,
    slate: RootSlate,
    opts: ContinuationOpts,
}

impl<'f> PointEvaluator<'f> {
    fn new(fam: &'f Family, chart: Chart, fiber: Complex64) -> Result<Self> {
        let cache = fam.cache()?;
        let opts = ContinuationOpts::default();
        let mut tracker = fam.chart_tracker(cache)?;
        let mut target = tracker.point().to_vec();
        let idx = match chart {
            Chart::One => cache.idx_z,
            Chart::Two => cache.idx_zh,
        };
        for wp in arc_path(target[idx], fiber) {
            target[idx] = wp;
            tracker.advance_to(&target)?;
        }
        let mut slate = RootSlate::new(cache);
        slate.set_chart(tracker.values());
        Ok(PointEvaluator {
            fam,
            chart,
            tracker,
            target,
            slate,
            opts,
        })
    }

    fn move_to(&mut self, t: &[Complex64]) -> Result<()> {
        let cache = self.fam.cache()?;
        for (i, &pi) in cache.idx_params.iter().enumerate() {
            self.target[pi] = t[i];
        }
        self.tracker.advance_to(&self.target)?;
        self.slate.set_chart(self.tracker.values());
        Ok(())
    }

    /// phi on this evaluator's chart at (fiber, t).
    pub fn phi_at(&mut self, t: &[Complex64]) -> Result<Complex64> {
        self.move_to(t)?;
        let cache = self.fam.cache()?;
        let b = match self.chart {
            Chart::One => &cache.phi1,
            Chart::Two => &cache.phi2,
        };
        b.eval(&self.target, &self.slate, self.opts.pole_tol)
    }

    /// d_alpha phi on this evaluator's chart at (fiber, t).
    pub fn dphi_at(&mut self, t: &[Complex64]) -> Result<Vec<Complex64>> {
        self.move_to(t)?;
        let cache = self.fam.cache()?;
        let list = match self.chart {
            Chart::One => &cache.dphi1,
            Chart::Two => &cache.dphi2,
        };
        list.iter()
            .map(|b| b.eval(&self.target, &self.slate, self.opts.pole_tol))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sym_index_layout() {
        assert_eq!(sym_count(3), 6);
        let pairs = sym_pairs(3);
        assert_eq!(pairs, vec![(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]);
        for (i, &(a, b)) in pairs.iter().enumerate() {
            assert_eq!(sym_index(3, a, b), i);
            assert_eq!(sym_index(3, b, a), i);
        }
    }

    #[test]
    fn arc_path_avoids_origin() {
        let path = arc_path(Complex64::new(1.0, 0.0), Complex64::new(-0.8, -0.1));
        for p in &path {
            assert!(p.norm() > 0.5);
        }
        let last = path.last().unwrap();
        assert!((last - Complex64::new(-0.8, -0.1)).norm() < 1e-12);
    }
}
