//! Geometric verifications along geodesics:
//!
//! - the point-constraint submanifolds `P_y = { t : phi(z0, t) = w0 }` are
//!   totally geodesic (tangent geodesics stay on them);
//! - geodesics through the base point consist of curves with a fixed
//!   intersection with the base curve (the zero set of phi(., t(s)) does
//!   not move).

use super::geodesic::{geodesic_integrate, GeodesicOpts};
use super::ChristoffelField;
use crate::cech::exact::u_roots;
use crate::cech::window::LaurentWindow;
use crate::error::{Error, Result};
use crate::family::{Chart, Family};
use num_complex::Complex64;

type C = Complex64;

/// A point y of the surface seen through one chart: the constraint
/// phi_chart(fiber, t) = value cuts out P_y in the moduli space.
#[derive(Clone, Debug)]
pub struct PointConstraint {
    pub chart: Chart,
    pub fiber: C,
    pub value: C,
}

/// Basis of the kernel of the row vector d_alpha phi(z0, t): the tangent
/// space of P_y at t (m-1 vectors).
pub fn tangent_space(fam: &Family, y: &PointConstraint, t: &[C]) -> Result<Vec<Vec<C>>> {
    let mut ev = fam.point_evaluator(y.chart, y.fiber)?;
    let row = ev.dphi_at(t)?;
    let m = row.len();
    let (pivot, pmax) = row
        .iter()
        .enumerate()
        .map(|(i, v)| (i, v.norm()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty row");
    if pmax < 1e-12 {
        return Err(Error::FamilyInvalid(
            "d_alpha phi vanishes at the constraint point".into(),
        ));
    }
    let mut basis = Vec::with_capacity(m - 1);
    for q in 0..m {
        if q == pivot {
            continue;
        }
        let mut v = vec![C::new(0.0, 0.0); m];
        v[q] = C::new(1.0, 0.0);
        v[pivot] = -row[q] / row[pivot];
        basis.push(v);
    }
    Ok(basis)
}

#[derive(Clone, Debug)]
pub struct TotallyGeodesicReport {
    /// max over path samples of |phi(z0, t(s)) - w0|.
    pub max_deviation: f64,
    pub samples_checked: usize,
    pub end_s: f64,
}

/// Integrate the geodesic with tangent initial data and measure how far the
/// path drifts off the constraint surface P_y.
pub fn totally_geodesic_check(
    fam: &Family,
    field: &ChristoffelField,
    y: &PointConstraint,
    t_start: &[C],
    v: &[C],
    s_max: f64,
) -> Result<TotallyGeodesicReport> {
    let mut ev = fam.point_evaluator(y.chart, y.fiber)?;
    // start point must satisfy the constraint
    let phi0 = ev.phi_at(t_start)?;
    if (phi0 - y.value).norm() > 1e-8 {
        return Err(Error::FamilyInvalid(format!(
            "start point violates the constraint by {:.3e}",
            (phi0 - y.value).norm()
        )));
    }
    // tangency precondition
    let row = ev.dphi_at(t_start)?;
    let pairing: C = row.iter().zip(v.iter()).map(|(r, vi)| r * vi).sum();
    let vnorm: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let rnorm: f64 = row.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if pairing.norm() > 1e-10 * vnorm.max(1e-300) * rnorm.max(1.0) {
        return Err(Error::NotTangent(pairing.norm()));
    }
    let opts = GeodesicOpts {
        validity_radius: Some((fam.t0.clone(), fam.validity_radius)),
        ..Default::default()
    };
    let path = geodesic_integrate(field, t_start, v, s_max, &opts)?;
    // walk the samples in order so branch continuation follows the path
    let mut worst = 0.0f64;
    for sample in &path.samples {
        let val = ev.phi_at(&sample.t)?;
        worst = worst.max((val - y.value).norm());
    }
    Ok(TotallyGeodesicReport {
        max_deviation: worst,
        samples_checked: path.samples.len(),
        end_s: path.end().s,
    })
}

/// Zero sets of phi(., t) in both chart discs, from resummed windows.
#[derive(Clone, Debug)]
pub struct ZeroSet {
    pub chart1: Vec<C>,
    pub chart2: Vec<C>,
}

impl ZeroSet {
    pub fn cardinality(&self) -> usize {
        self.chart1.len() + self.chart2.len()
    }
}

/// Find the zeros of phi1 on |z| <= seam and of phi2 on |zh| < 1/seam.
/// Together the two discs partition the fiber, so every intersection point
/// with the base curve is counted exactly once.
pub fn zero_set(fam: &Family, t: &[C], k: usize) -> Result<ZeroSet> {
    let sweep = fam.sweep(t, 1.0, k)?;
    let seam = 1.0 + 1e-3;
    let floor_rel = 1e-11;

    let w1 = LaurentWindow::from_samples(&sweep.w, 1.0);
    let chart1 = window_roots_in_disc(&w1, seam, floor_rel)?;

    // chart 2 samples reordered onto an equispaced zh circle (zh = 1/z)
    for (z, zh) in sweep.z.iter().zip(sweep.zh.iter()) {
        if (z * zh - 1.0).norm() > 1e-10 {
            return Err(Error::FamilyInvalid(
                "zero-set windows require the chart identification g(z) = 1/z".into(),
            ));
        }
    }
    let kk = sweep.phi2.len();
    let vals2: Vec<C> = (0..kk).map(|j| sweep.phi2[(kk - j) % kk]).collect();
    let w2 = LaurentWindow::from_samples(&vals2, 1.0);
    let chart2 = window_roots_in_disc(&w2, 1.0 / seam, floor_rel)?;

    Ok(ZeroSet { chart1, chart2 })
}

fn window_roots_in_disc(window: &LaurentWindow, disc: f64, floor_rel: f64) -> Result<Vec<C>> {
    // plus-part coefficients (the function is holomorphic on the disc, so
    // negative coefficients are noise; check they are small)
    let half = (window.len() / 2) as i64;
    let maxc = window.max_abs_coeff();
    if maxc == 0.0 {
        return Err(Error::FamilyInvalid(
            "zero set of the identically vanishing function".into(),
        ));
    }
    for n in 1..=half {
        if window.coeff(-n).norm() > 1e-8 * maxc {
            return Err(Error::FamilyInvalid(
                "function is not holomorphic on the chart disc".into(),
            ));
        }
    }
    let mut coeffs: Vec<C> = (0..half).map(|n| window.coeff(n)).collect();
    let floor = floor_rel * maxc;
    while coeffs.len() > 1 && coeffs.last().map(|c| c.norm() < floor).unwrap_or(false) {
        coeffs.pop();
    }
    if coeffs.len() <= 1 {
        return Ok(Vec::new());
    }
    let roots = u_roots(&coeffs)?;
    Ok(roots.into_iter().filter(|r| r.norm() <= disc).collect())
}

/// Greedy minimal matching between two equal-cardinality zero multisets;
/// returns the max matched displacement.
fn match_drift(reference: &[C], current: &[C]) -> f64 {
    let mut used = vec![false; current.len()];
    let mut worst = 0.0f64;
    for r in reference {
        let mut best = f64::INFINITY;
        let mut best_i = usize::MAX;
        for (i, c) in current.iter().enumerate() {
            if !used[i] {
                let d = (r - c).norm();
                if d < best {
                    best = d;
                    best_i = i;
                }
            }
        }
        if best_i != usize::MAX {
            used[best_i] = true;
            worst = worst.max(best);
        }
    }
    worst
}

#[derive(Clone, Debug)]
pub struct SameIntersectionReport {
    pub max_drift: f64,
    pub reference: ZeroSet,
    pub probes: usize,
}

/// Integrate a geodesic from t0 and track the zero set of phi(., t(s)) on
/// both charts; the drift relative to the first probe must stay small
/// (the intersection with the base curve is fixed along geodesics).
pub fn same_intersection_check(
    fam: &Family,
    field: &ChristoffelField,
    v: &[C],
    s_max: f64,
    probes: usize,
    window_k: usize,
) -> Result<SameIntersectionReport> {
    let opts = GeodesicOpts {
        validity_radius: Some((fam.t0.clone(), fam.validity_radius)),
        ..Default::default()
    };
    let path = geodesic_integrate(field, &fam.t0.clone(), v, s_max, &opts)?;
    let t_at = |s: f64| -> Vec<C> {
        // linear interpolation on the dense sample sequence
        let samples = &path.samples;
        if s <= samples[0].s {
            return samples[0].t.clone();
        }
        for w in samples.windows(2) {
            if s <= w[1].s {
                let f = (s - w[0].s) / (w[1].s - w[0].s);
                return w[0]
                    .t
                    .iter()
                    .zip(w[1].t.iter())
                    .map(|(a, b)| a + (b - a) * f)
                    .collect();
            }
        }
        samples.last().unwrap().t.clone()
    };

    let end_s = path.end().s;
    let mut reference: Option<ZeroSet> = None;
    let mut worst = 0.0f64;
    for j in 1..=probes {
        let s = end_s * (j as f64) / (probes as f64);
        let t = t_at(s);
        let zs = zero_set(fam, &t, window_k)?;
        match &reference {
            None => reference = Some(zs),
            Some(r) => {
                if zs.chart1.len() != r.chart1.len() || zs.chart2.len() != r.chart2.len() {
                    return Err(Error::ZeroSetCardinality {
                        was: r.cardinality(),
                        now: zs.cardinality(),
                        s,
                    });
                }
                worst = worst.max(match_drift(&r.chart1, &zs.chart1));
                worst = worst.max(match_drift(&r.chart2, &zs.chart2));
            }
        }
    }
    Ok(SameIntersectionReport {
        max_drift: worst,
        reference: reference.expect("at least one probe"),
        probes,
    })
}
