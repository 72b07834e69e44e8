//! Annulus sweeps: walk the circle |z| = r once, carrying every root branch
//! by continuation step to step, and tabulate all chart and transition data
//! the cocycle pipeline needs. A final wrap-around step checks that no root
//! picked up monodromy (it cannot, for a family valid at this t, so a
//! mismatch reports the family as invalid).

use super::{arc_path, sym_count, Family, RootSlate};
use crate::cech::window::circle_points;
use crate::error::{Error, Result};
use crate::exact::ContinuationOpts;
use num_complex::Complex64;

type C = Complex64;

pub struct AnnulusSweep {
    pub t: Vec<C>,
    pub radius: f64,
    /// Circle sample points z_k (k = 0..K equispaced).
    pub z: Vec<C>,
    /// Matched chart-2 coordinates zh_k = g(z_k).
    pub zh: Vec<C>,
    /// phi1(z_k, t): the fiber value w on the curve.
    pub w: Vec<C>,
    pub phi2: Vec<C>,
    /// [alpha][k]
    pub dphi1: Vec<Vec<C>>,
    pub dphi2: Vec<Vec<C>>,
    /// [sym pair][k]
    pub ddphi1: Vec<Vec<C>>,
    pub ddphi2: Vec<Vec<C>>,
    /// d^2 phi / dz dt^alpha, per chart
    pub dphi1_z: Vec<Vec<C>>,
    pub dphi2_z: Vec<Vec<C>>,
    pub phi1_z: Vec<C>,
    pub phi2_z: Vec<C>,
    pub phi2_zz: Vec<C>,
    pub f_w: Vec<C>,
    pub f_ww: Vec<C>,
    pub g_w: Vec<C>,
    pub g_ww: Vec<C>,
    /// Normal bundle transition F = f_w - phi2_z * g_w on the curve.
    pub big_f: Vec<C>,
    /// E = f_ww - phi2_z * g_ww - phi2_zz * g_w^2 on the curve.
    pub e: Vec<C>,
    /// G_alpha = (d^2 phi2 / dzh dt^alpha) * g_w, [alpha][k].
    pub g_alpha: Vec<Vec<C>>,
    /// tau_alpha = E/2 * dphi1_alpha - G_alpha, [alpha][k].
    pub tau: Vec<Vec<C>>,
}

impl Family {
    /// Evaluate all pipeline data on K points of the circle |z| = radius at
    /// the parameter point t.
    pub fn sweep(&self, t: &[C], radius: f64, k: usize) -> Result<AnnulusSweep> {
        self.require_validity(t)?;
        let cache = self.cache()?;
        let opts = ContinuationOpts::default();
        let m = self.m();
        let pairs = sym_count(m);
        let zs = circle_points(radius, k);

        let mut chart = self.chart_tracker(cache)?;
        let mut trans = self.trans_tracker(cache)?;
        let mut slate: RootSlate = self.new_slate(cache);

        // Leg 1: fiber coordinates to the start of the circle at base t.
        let mut pt = chart.point().to_vec();
        let zh_base = pt[cache.idx_zh];
        for wp in arc_path(pt[cache.idx_z], zs[0]) {
            pt[cache.idx_z] = wp;
            chart.advance_to(&pt)?;
            trans.advance_to(&pt)?;
        }
        slate.set_chart(chart.values());
        let zh0 = cache.g.eval(&pt, &slate, opts.pole_tol)?;
        for wp in arc_path(zh_base, zh0) {
            pt[cache.idx_zh] = wp;
            chart.advance_to(&pt)?;
            trans.advance_to(&pt)?;
        }
        // Leg 2: parameter point (fiber fixed).
        for (i, &pi) in cache.idx_params.iter().enumerate() {
            pt[pi] = t[i];
        }
        chart.advance_to(&pt)?;
        trans.advance_to(&pt)?;
        slate.set_chart(chart.values());
        // Leg 3: lift the transition tracker onto the curve (w = phi1).
        let w0 = cache.phi1.eval(&pt, &slate, opts.pole_tol)?;
        pt[cache.idx_w] = w0;
        trans.advance_to(&pt)?;
        slate.set_trans(trans.values());

        let mut out = AnnulusSweep {
            t: t.to_vec(),
            radius,
            z: zs.clone(),
            zh: Vec::with_capacity(k),
            w: Vec::with_capacity(k),
            phi2: Vec::with_capacity(k),
            dphi1: vec![Vec::with_capacity(k); m],
            dphi2: vec![Vec::with_capacity(k); m],
            ddphi1: vec![Vec::with_capacity(k); pairs],
            ddphi2: vec![Vec::with_capacity(k); pairs],
            dphi1_z: vec![Vec::with_capacity(k); m],
            dphi2_z: vec![Vec::with_capacity(k); m],
            phi1_z: Vec::with_capacity(k),
            phi2_z: Vec::with_capacity(k),
            phi2_zz: Vec::with_capacity(k),
            f_w: Vec::with_capacity(k),
            f_ww: Vec::with_capacity(k),
            g_w: Vec::with_capacity(k),
            g_ww: Vec::with_capacity(k),
            big_f: Vec::with_capacity(k),
            e: Vec::with_capacity(k),
            g_alpha: vec![Vec::with_capacity(k); m],
            tau: vec![Vec::with_capacity(k); m],
        };

        let start_chart_values = chart.values().to_vec();
        let start_trans_values = trans.values().to_vec();

        for step in 0..k {
            if step > 0 {
                // advance both fiber coordinates one circle step
                pt[cache.idx_z] = zs[step];
                chart.advance_to(&pt)?;
                slate.set_chart(chart.values());
                let zh = cache.g.eval(&pt, &slate, opts.pole_tol)?;
                pt[cache.idx_zh] = zh;
                chart.advance_to(&pt)?;
                slate.set_chart(chart.values());
                let w = cache.phi1.eval(&pt, &slate, opts.pole_tol)?;
                pt[cache.idx_w] = w;
                trans.advance_to(&pt)?;
                slate.set_trans(trans.values());
            }
            self.tabulate_point(cache, &pt, &slate, &mut out)?;
        }

        // Monodromy check: close the loop back to the first point.
        pt[cache.idx_z] = zs[0];
        chart.advance_to(&pt)?;
        slate.set_chart(chart.values());
        let zh = cache.g.eval(&pt, &slate, opts.pole_tol)?;
        pt[cache.idx_zh] = zh;
        chart.advance_to(&pt)?;
        slate.set_chart(chart.values());
        let w = cache.phi1.eval(&pt, &slate, opts.pole_tol)?;
        pt[cache.idx_w] = w;
        trans.advance_to(&pt)?;
        let drift = chart
            .values()
            .iter()
            .zip(start_chart_values.iter())
            .chain(trans.values().iter().zip(start_trans_values.iter()))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        if drift > 1e-8 {
            return Err(Error::FamilyInvalid(format!(
                "nontrivial root monodromy around |z| = {radius} (drift {drift:.3e})"
            )));
        }
        Ok(out)
    }

    fn tabulate_point(
        &self,
        cache: &super::FamilyCache,
        pt: &[C],
        slate: &RootSlate,
        out: &mut AnnulusSweep,
    ) -> Result<()> {
        let opts = ContinuationOpts::default();
        let tol = opts.pole_tol;
        let m = self.m();

        out.zh.push(pt[cache.idx_zh]);
        out.w.push(pt[cache.idx_w]);
        out.phi2.push(cache.phi2.eval(pt, slate, tol)?);
        for a in 0..m {
            out.dphi1[a].push(cache.dphi1[a].eval(pt, slate, tol)?);
            out.dphi2[a].push(cache.dphi2[a].eval(pt, slate, tol)?);
            out.dphi1_z[a].push(cache.dphi1_z[a].eval(pt, slate, tol)?);
            out.dphi2_z[a].push(cache.dphi2_z[a].eval(pt, slate, tol)?);
        }
        for p in 0..sym_count(m) {
            out.ddphi1[p].push(cache.ddphi1[p].eval(pt, slate, tol)?);
            out.ddphi2[p].push(cache.ddphi2[p].eval(pt, slate, tol)?);
        }
        out.phi1_z.push(cache.phi1_z.eval(pt, slate, tol)?);
        let phi2_z = cache.phi2_z.eval(pt, slate, tol)?;
        let phi2_zz = cache.phi2_zz.eval(pt, slate, tol)?;
        out.phi2_z.push(phi2_z);
        out.phi2_zz.push(phi2_zz);
        let f_w = cache.f_w.eval(pt, slate, tol)?;
        let f_ww = cache.f_ww.eval(pt, slate, tol)?;
        let g_w = cache.g_w.eval(pt, slate, tol)?;
        let g_ww = cache.g_ww.eval(pt, slate, tol)?;
        out.f_w.push(f_w);
        out.f_ww.push(f_ww);
        out.g_w.push(g_w);
        out.g_ww.push(g_ww);

        let big_f = f_w - phi2_z * g_w;
        let e = f_ww - phi2_z * g_ww - phi2_zz * g_w * g_w;
        out.big_f.push(big_f);
        out.e.push(e);
        let idx = out.w.len() - 1;
        for a in 0..m {
            let g_a = out.dphi2_z[a][idx] * g_w;
            let tau_a = 0.5 * e * out.dphi1[a][idx] - g_a;
            out.g_alpha[a].push(g_a);
            out.tau[a].push(tau_a);
        }
        Ok(())
    }
}

/// Winding number of a closed loop of nonzero values (sum of turning
/// angles / 2 pi, rounded; errors if far from an integer or if any value
/// is nearly zero).
pub fn winding_number(values: &[C]) -> Result<i32> {
    let mut total = 0.0f64;
    let n = values.len();
    for i in 0..n {
        let a = values[i];
        let b = values[(i + 1) % n];
        if a.norm() < 1e-12 || b.norm() < 1e-12 {
            return Err(Error::FamilyInvalid(
                "winding number of a vanishing loop".into(),
            ));
        }
        total += (b / a).arg();
    }
    let w = total / (2.0 * std::f64::consts::PI);
    let rounded = w.round();
    if (w - rounded).abs() > 1e-6 {
        return Err(Error::FamilyInvalid(format!(
            "winding number {w} is not an integer"
        )));
    }
    Ok(rounded as i32)
}

#[cfg(test)]
mod tests {
    use super::super::{build_branched_cover_12, build_quadric_11};
    use super::*;

    #[test]
    fn winding_of_powers() {
        let pts = circle_points(1.0, 64);
        let sq: Vec<C> = pts.iter().map(|z| z * z).collect();
        assert_eq!(winding_number(&sq).unwrap(), 2);
        let inv: Vec<C> = pts.iter().map(|z| 1.0 / (z * z)).collect();
        assert_eq!(winding_number(&inv).unwrap(), -2);
    }

    #[test]
    fn quadric_sweep_matches_closed_forms_at_t0() {
        let fam = build_quadric_11().unwrap();
        let t0 = fam.t0.clone();
        let sw = fam.sweep(&t0, 1.0, 32).unwrap();
        for (k, &z) in sw.z.iter().enumerate() {
            // F = -1/z^2, E = 2/z^3 at the base point
            assert!((sw.big_f[k] - (-1.0 / (z * z))).norm() < 1e-12);
            assert!((sw.e[k] - 2.0 / (z * z * z)).norm() < 1e-12);
            // dphi1 = (1, z, -z^2)
            assert!((sw.dphi1[0][k] - C::new(1.0, 0.0)).norm() < 1e-12);
            assert!((sw.dphi1[1][k] - z).norm() < 1e-12);
            assert!((sw.dphi1[2][k] + z * z).norm() < 1e-12);
            // tau = (z^-3, z^-2, -z^-1)
            assert!((sw.tau[0][k] - 1.0 / (z * z * z)).norm() < 1e-12);
            assert!((sw.tau[1][k] - 1.0 / (z * z)).norm() < 1e-12);
            assert!((sw.tau[2][k] + 1.0 / z).norm() < 1e-12);
            // G = 0 (g has no w dependence)
            assert!(sw.g_alpha[0][k].norm() < 1e-14);
        }
    }

    #[test]
    fn cover_sweep_at_t0() {
        let fam = build_branched_cover_12().unwrap();
        let t0 = fam.t0.clone();
        let sw = fam.sweep(&t0, 1.0, 64).unwrap();
        for (k, &z) in sw.z.iter().enumerate() {
            // F = 1/z^2 and tau = 0 at the base point
            assert!((sw.big_f[k] - 1.0 / (z * z)).norm() < 1e-12, "F at {z}");
            for a in 0..3 {
                assert!(sw.tau[a][k].norm() < 1e-13);
            }
            // dphi1 = i z^alpha, dphi2 = i zh^(2-alpha)
            let i = C::new(0.0, 1.0);
            assert!((sw.dphi1[0][k] - i).norm() < 1e-12);
            assert!((sw.dphi1[1][k] - i * z).norm() < 1e-12);
            assert!((sw.dphi1[2][k] - i * z * z).norm() < 1e-12);
            let zh = sw.zh[k];
            assert!((sw.dphi2[0][k] - i * zh * zh).norm() < 1e-12);
            assert!((sw.dphi2[1][k] - i * zh).norm() < 1e-12);
            assert!((sw.dphi2[2][k] - i).norm() < 1e-12);
        }
    }

    #[test]
    fn cover_normal_bundle_degree_is_two() {
        let fam = build_branched_cover_12().unwrap();
        let t = vec![C::new(0.11, 0.0), C::new(-0.07, 0.0), C::new(0.05, 0.0)];
        let sw = fam.sweep(&t, 1.0, 128).unwrap();
        // degree of N = winding of 1/F around the circle
        assert_eq!(-winding_number(&sw.big_f).unwrap(), 2);
        let fam2 = build_quadric_11().unwrap();
        let t2 = vec![C::new(0.08, 0.0), C::new(1.05, 0.0), C::new(-0.06, 0.0)];
        let sw2 = fam2.sweep(&t2, 1.0, 128).unwrap();
        assert_eq!(-winding_number(&sw2.big_f).unwrap(), 2);
    }
}
