//! The Cech objects of the construction: the normal-bundle transition F,
//! the Kodaira sections sigma_V, the cochains E and G_alpha, the 1-cocycle
//! tau, and the second-derivative matching relation used to certify a
//! splitting.

use super::sweep::winding_number;
use super::{sym_index, AnnulusSweep, Family};
use crate::cech::window::LaurentWindow;
use crate::cech::Cochain0Form;
use crate::error::{Error, Result};
use num_complex::Complex64;

type C = Complex64;

/// Transition data of the normal bundle at fixed t, tabulated on a circle.
#[derive(Clone, Debug)]
pub struct NormalTransition {
    pub radius: f64,
    pub z: Vec<C>,
    pub values: Vec<C>,
    /// Degree of the normal bundle: the winding of 1/F around the circle
    /// (F is oriented chart-2-from-chart-1, so its own winding is -degree).
    pub degree: i32,
}

/// F = df/dw|_{w=phi1} - (dphi2/dzh)|_{zh=g} * dg/dw|_{w=phi1}, with its
/// nonvanishing on the annulus checked and the bundle degree attached.
pub fn normal_transition(fam: &Family, t: &[C], radius: f64, k: usize) -> Result<NormalTransition> {
    let sweep = fam.sweep(t, radius, k)?;
    normal_transition_from_sweep(&sweep)
}

pub fn normal_transition_from_sweep(sweep: &AnnulusSweep) -> Result<NormalTransition> {
    let min = sweep.big_f.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    if min < 1e-8 {
        return Err(Error::FamilyInvalid(format!(
            "normal bundle transition nearly vanishes on the annulus (min |F| = {min:.3e})"
        )));
    }
    let degree = -winding_number(&sweep.big_f)?;
    Ok(NormalTransition {
        radius: sweep.radius,
        z: sweep.z.clone(),
        values: sweep.big_f.clone(),
        degree,
    })
}

/// A global section of the normal bundle in both chart trivializations.
#[derive(Clone, Debug)]
pub struct SectionFn {
    pub radius: f64,
    pub z: Vec<C>,
    /// sigma_1(z_k) on chart 1.
    pub values1: Vec<C>,
    /// sigma_2 at the matched points zh_k = g(z_k).
    pub values2: Vec<C>,
    /// max_k |sigma_2(g(z_k)) - F(z_k) sigma_1(z_k)|.
    pub transform_residual: f64,
}

impl SectionFn {
    /// Window of sigma_1 on the circle (holomorphic continuation into the
    /// chart-1 disc).
    pub fn window1(&self) -> LaurentWindow {
        LaurentWindow::from_samples(&self.values1, self.radius)
    }

    /// Window of sigma_2 in the zh coordinate. Requires zh = 1/z so the
    /// matched samples reorder onto an equispaced zh circle.
    pub fn window2(&self) -> Result<LaurentWindow> {
        let k = self.values2.len();
        let zh_radius = 1.0 / self.radius;
        let mut vals = vec![C::new(0.0, 0.0); k];
        for j in 0..k {
            vals[j] = self.values2[(k - j) % k];
        }
        // sanity: matched points must satisfy zh = 1/z
        Ok(LaurentWindow::from_samples(&vals, zh_radius))
    }
}

/// The Kodaira map: sigma_i = V^alpha d_alpha phi_i per chart, with the
/// transformation residual sigma_2 o g = F sigma_1 attached.
pub fn kodaira_section(fam: &Family, t: &[C], v: &[C], radius: f64, k: usize) -> Result<SectionFn> {
    let sweep = fam.sweep(t, radius, k)?;
    kodaira_section_from_sweep(fam, &sweep, v)
}

pub fn kodaira_section_from_sweep(fam: &Family, sweep: &AnnulusSweep, v: &[C]) -> Result<SectionFn> {
    let m = fam.m();
    if v.len() != m {
        return Err(Error::FamilyInvalid(format!(
            "tangent vector has {} components, expected {m}",
            v.len()
        )));
    }
    let k = sweep.z.len();
    let mut values1 = Vec::with_capacity(k);
    let mut values2 = Vec::with_capacity(k);
    let mut residual = 0.0f64;
    for idx in 0..k {
        let s1: C = (0..m).map(|a| v[a] * sweep.dphi1[a][idx]).sum();
        let s2: C = (0..m).map(|a| v[a] * sweep.dphi2[a][idx]).sum();
        residual = residual.max((s2 - sweep.big_f[idx] * s1).norm());
        values1.push(s1);
        values2.push(s2);
    }
    Ok(SectionFn {
        radius: sweep.radius,
        z: sweep.z.clone(),
        values1,
        values2,
        transform_residual: residual,
    })
}

/// The 1-cocycle tau_alpha on the ordered chart pair, tabulated on the
/// circle together with its ingredients.
#[derive(Clone, Debug)]
pub struct Cocycle1Form {
    pub radius: f64,
    pub z: Vec<C>,
    /// [alpha][k]
    pub values: Vec<Vec<C>>,
}

#[derive(Clone, Debug)]
pub struct TauData {
    pub e: Vec<C>,
    /// [alpha][k]: G vanishes identically when g is independent of w.
    pub g_alpha: Vec<Vec<C>>,
    pub tau: Cocycle1Form,
    /// Antisymmetry residual of the pair-reversed cocycle (see
    /// [`antisymmetry_residual`]).
    pub antisymmetry: f64,
}

/// E, G and tau = E/2 * d_alpha phi - G_alpha at fixed t.
pub fn tau_cocycle(fam: &Family, t: &[C], radius: f64, k: usize) -> Result<TauData> {
    let sweep = fam.sweep(t, radius, k)?;
    tau_cocycle_from_sweep(fam, &sweep)
}

pub fn tau_cocycle_from_sweep(fam: &Family, sweep: &AnnulusSweep) -> Result<TauData> {
    let antisymmetry = antisymmetry_residual(fam, sweep)?;
    Ok(TauData {
        e: sweep.e.clone(),
        g_alpha: sweep.g_alpha.clone(),
        tau: Cocycle1Form {
            radius: sweep.radius,
            z: sweep.z.clone(),
            values: sweep.tau.clone(),
        },
        antisymmetry,
    })
}

/// On a two-chart cover the cocycle condition reduces to antisymmetry under
/// pair reversal: the cocycle computed from the inverse transition must
/// satisfy tau_12 o m = -tau_21 / F^2 at matched points. The reversed E is
/// obtained from inverse-function derivatives (f_inv_ww = -f_ww / f_w^3),
/// valid when g is independent of w (then both G terms vanish).
pub fn antisymmetry_residual(fam: &Family, sweep: &AnnulusSweep) -> Result<f64> {
    let m = fam.m();
    let max_gw = sweep.g_w.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    if max_gw > 1e-12 {
        return Err(Error::FamilyInvalid(
            "pair-reversal check implemented for w-independent g only".into(),
        ));
    }
    let mut worst = 0.0f64;
    for k in 0..sweep.z.len() {
        let f_w = sweep.f_w[k];
        let f_ww = sweep.f_ww[k];
        let big_f = sweep.big_f[k];
        let e_rev = -f_ww / (f_w * f_w * f_w);
        for a in 0..m {
            // source chart of the reversed pair is chart 2
            let dphi2 = sweep.dphi2[a][k];
            let tau_rev = 0.5 * e_rev * dphi2;
            let expect = -sweep.tau[a][k] / (big_f * big_f);
            worst = worst.max((tau_rev - expect).norm());
        }
    }
    Ok(worst)
}

/// Residual of the second-derivative matching relation rewritten with a
/// splitting theta: with Phi_i = dd phi_i + theta_i,a d_b phi_i +
/// theta_i,b d_a phi_i per chart, a genuine splitting makes {Phi_i} a
/// global section, i.e. Phi_2(g(z)) = F(z) Phi_1(z) on the annulus.
/// Returns max over circle samples and index pairs of |lhs - rhs|.
pub fn verify_second_derivative_relation(
    fam: &Family,
    sweep: &AnnulusSweep,
    theta: &Cochain0Form,
) -> Result<f64> {
    let m = fam.m();
    let mut worst = 0.0f64;
    for k in 0..sweep.z.len() {
        let z = sweep.z[k];
        let zh = sweep.zh[k];
        let th1: Vec<C> = (0..m).map(|a| theta.eval1(a, z)).collect::<Result<_>>()?;
        let th2: Vec<C> = (0..m).map(|a| theta.eval2(a, zh)).collect::<Result<_>>()?;
        for a in 0..m {
            for b in a..m {
                let p = sym_index(m, a, b);
                let phi1 = sweep.ddphi1[p][k]
                    + th1[a] * sweep.dphi1[b][k]
                    + th1[b] * sweep.dphi1[a][k];
                let phi2 = sweep.ddphi2[p][k]
                    + th2[a] * sweep.dphi2[b][k]
                    + th2[b] * sweep.dphi2[a][k];
                worst = worst.max((phi2 - sweep.big_f[k] * phi1).norm());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::super::{build_branched_cover_12, build_quadric_11};
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn normal_transition_degrees() {
        let quadric = build_quadric_11().unwrap();
        let nt = normal_transition(&quadric, &quadric.t0.clone(), 1.0, 64).unwrap();
        assert_eq!(nt.degree, 2);
        for (z, f) in nt.z.iter().zip(nt.values.iter()) {
            assert!((f + 1.0 / (z * z)).norm() < 1e-12);
        }
        let cover = build_branched_cover_12().unwrap();
        let nt2 = normal_transition(&cover, &cover.t0.clone(), 1.0, 64).unwrap();
        assert_eq!(nt2.degree, 2);
        for (z, f) in nt2.z.iter().zip(nt2.values.iter()) {
            assert!((f - 1.0 / (z * z)).norm() < 1e-12);
        }
    }

    #[test]
    fn kodaira_sections_transform_correctly() {
        let cover = build_branched_cover_12().unwrap();
        let t0 = cover.t0.clone();
        // basis vector sections at t0: sigma1 = i z^alpha
        for alpha in 0..3 {
            let mut v = vec![c(0.0, 0.0); 3];
            v[alpha] = c(1.0, 0.0);
            let s = kodaira_section(&cover, &t0, &v, 1.0, 32).unwrap();
            assert!(s.transform_residual < 1e-12);
            for (z, s1) in s.z.iter().zip(s.values1.iter()) {
                let expect = c(0.0, 1.0) * z.powu(alpha as u32);
                assert!((s1 - expect).norm() < 1e-12);
            }
        }
        // zero vector gives the zero section
        let s0 = kodaira_section(&cover, &t0, &[c(0.0, 0.0); 3], 1.0, 32).unwrap();
        assert!(s0.values1.iter().all(|v| v.norm() == 0.0));
        assert!(s0.values2.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn section_transform_residual_at_random_t_and_v() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let cover = build_branched_cover_12().unwrap();
        for _ in 0..20 {
            let t: Vec<C> = (0..3)
                .map(|_| c(rng.gen_range(-0.12..0.12), rng.gen_range(-0.03..0.03)))
                .collect();
            let v: Vec<C> = (0..3)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let s = kodaira_section(&cover, &t, &v, 1.0, 64).unwrap();
            assert!(s.transform_residual < 1e-10, "residual {}", s.transform_residual);
        }
    }

    #[test]
    fn tau_values_and_antisymmetry() {
        // (1,1) family at t0: E = 2/z^3, tau = (z^-3, z^-2, -z^-1), G = 0
        let quadric = build_quadric_11().unwrap();
        let td = tau_cocycle(&quadric, &quadric.t0.clone(), 1.0, 32).unwrap();
        assert!(td.antisymmetry < 1e-12);
        for (k, z) in td.tau.z.iter().enumerate() {
            assert!((td.e[k] - 2.0 / (z * z * z)).norm() < 1e-12);
            assert!((td.tau.values[0][k] - 1.0 / (z * z * z)).norm() < 1e-12);
            assert!((td.tau.values[1][k] - 1.0 / (z * z)).norm() < 1e-12);
            assert!((td.tau.values[2][k] + 1.0 / z).norm() < 1e-12);
            for a in 0..3 {
                assert!(td.g_alpha[a][k].norm() < 1e-14);
            }
        }
        // (1,2) cover at t0: E = 0 hence tau = 0
        let cover = build_branched_cover_12().unwrap();
        let td2 = tau_cocycle(&cover, &cover.t0.clone(), 1.0, 32).unwrap();
        for k in 0..td2.e.len() {
            assert!(td2.e[k].norm() < 1e-13);
            for a in 0..3 {
                assert!(td2.tau.values[a][k].norm() < 1e-13);
            }
        }
        // antisymmetry at a shifted t
        let t = vec![c(0.08, 0.0), c(-0.05, 0.0), c(0.1, 0.0)];
        let td3 = tau_cocycle(&cover, &t, 1.0, 64).unwrap();
        assert!(td3.antisymmetry < 1e-10, "{}", td3.antisymmetry);
    }

    #[test]
    fn relation_holds_with_zero_theta_at_cover_base() {
        // tau = 0 at t0 makes the relation the bare chain rule
        let cover = build_branched_cover_12().unwrap();
        let sweep = cover.sweep(&cover.t0.clone(), 1.0, 32).unwrap();
        let theta = Cochain0Form::zero(3);
        let r = verify_second_derivative_relation(&cover, &sweep, &theta).unwrap();
        assert!(r < 1e-12, "residual {r}");
    }

    #[test]
    fn relation_detects_perturbed_theta() {
        let cover = build_branched_cover_12().unwrap();
        let sweep = cover.sweep(&cover.t0.clone(), 1.0, 32).unwrap();
        let mut theta = Cochain0Form::zero(3);
        theta.chart1[0] = crate::cech::ChartFn::Shifted(
            Box::new(crate::cech::ChartFn::Zero),
            c(1.0, 0.0),
        );
        let r = verify_second_derivative_relation(&cover, &sweep, &theta).unwrap();
        // lower bound: min |F * dphi1_0| = min |z^-2 * i| = 1/r^2 at r = 1
        assert!(r > 0.5, "residual {r} should be bounded below");
    }
}
