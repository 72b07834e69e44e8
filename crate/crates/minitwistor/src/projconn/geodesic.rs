//! Geodesic integration: t'' + Gamma(t)(t', t') = 0 in an affine
//! parameterization of the chosen representative connection, by adaptive
//! Dormand-Prince 5(4) stepping over the complex state (t, t').
//!
//! Projective statements only see the trace as a point set, so the
//! unparameterized-path comparisons work on arc-length-truncated traces.

use super::ChristoffelField;
use crate::error::{Error, Result};
use num_complex::Complex64;

type C = Complex64;

#[derive(Clone, Debug)]
pub struct GeodesicOpts {
    /// Local error tolerance per step (absolute and relative).
    pub tol: f64,
    pub max_steps: usize,
    /// Cap on the step size as a fraction of s_max (keeps traces dense for
    /// deviation checks).
    pub max_step_fraction: f64,
    /// Abort when |t - t_center| exceeds this radius (None disables).
    pub validity_radius: Option<(Vec<C>, f64)>,
}

impl Default for GeodesicOpts {
    fn default() -> Self {
        GeodesicOpts {
            tol: 1e-10,
            max_steps: 100_000,
            max_step_fraction: 0.02,
            validity_radius: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GeodesicSample {
    pub s: f64,
    pub t: Vec<C>,
    pub v: Vec<C>,
}

#[derive(Clone, Debug)]
pub struct GeodesicPath {
    pub samples: Vec<GeodesicSample>,
}

impl GeodesicPath {
    pub fn end(&self) -> &GeodesicSample {
        self.samples.last().expect("nonempty path")
    }

    /// Euclidean arc length of the polyline trace in C^m (= R^{2m}).
    pub fn arc_length(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| dist(&w[0].t, &w[1].t))
            .sum()
    }

    /// Truncate the trace to the prefix of given arc length.
    pub fn truncate_at_arc_length(&self, length: f64) -> Vec<Vec<C>> {
        let mut out = vec![self.samples[0].t.clone()];
        let mut acc = 0.0;
        for w in self.samples.windows(2) {
            let d = dist(&w[0].t, &w[1].t);
            if acc + d >= length {
                let frac = if d > 0.0 { (length - acc) / d } else { 0.0 };
                let pt: Vec<C> = w[0]
                    .t
                    .iter()
                    .zip(w[1].t.iter())
                    .map(|(a, b)| a + (b - a) * frac)
                    .collect();
                out.push(pt);
                return out;
            }
            acc += d;
            out.push(w[1].t.clone());
        }
        out
    }

    /// Max over samples of the distance to the other trace (as a polyline),
    /// symmetrized: the Hausdorff distance of the two traces.
    pub fn hausdorff_to(trace_a: &[Vec<C>], trace_b: &[Vec<C>]) -> f64 {
        let directed = |xs: &[Vec<C>], ys: &[Vec<C>]| -> f64 {
            xs.iter()
                .map(|p| point_to_polyline(p, ys))
                .fold(0.0f64, f64::max)
        };
        directed(trace_a, trace_b).max(directed(trace_b, trace_a))
    }

    /// Consistency of the stored samples with the ODE: central-difference
    /// acceleration against -Gamma(t)(v, v). Second-order in the step, so
    /// this is a sanity bound (~ h^2), not the integrator tolerance.
    pub fn max_ode_residual(&self, field: &ChristoffelField) -> Result<f64> {
        let mut worst = 0.0f64;
        for w in self.samples.windows(3) {
            let (a, b, c) = (&w[0], &w[1], &w[2]);
            let ds = c.s - a.s;
            if ds <= 0.0 {
                continue;
            }
            let gamma = field.eval(&b.t)?;
            let acc = gamma.contract(&b.v, &b.v);
            for i in 0..b.t.len() {
                let vdot = (c.v[i] - a.v[i]) / ds;
                worst = worst.max((vdot + acc[i]).norm());
            }
        }
        Ok(worst)
    }
}

fn dist(a: &[C], b: &[C]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn point_to_segment(p: &[C], a: &[C], b: &[C]) -> f64 {
    // treat C^m as R^{2m}; project p onto segment [a, b]
    let mut ab2 = 0.0;
    let mut ap_ab = 0.0;
    for i in 0..p.len() {
        let d = b[i] - a[i];
        ab2 += d.norm_sqr();
        let e = p[i] - a[i];
        ap_ab += e.re * d.re + e.im * d.im;
    }
    let s = if ab2 > 0.0 {
        (ap_ab / ab2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let proj: Vec<C> = a.iter().zip(b.iter()).map(|(x, y)| x + (y - x) * s).collect();
    dist(p, &proj)
}

fn point_to_polyline(p: &[C], line: &[Vec<C>]) -> f64 {
    line.windows(2)
        .map(|w| point_to_segment(p, &w[0], &w[1]))
        .fold(f64::INFINITY, f64::min)
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];
const C_NODES: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

/// Integrate the geodesic equation from (t_init, v_init) over s in
/// [0, s_max].
pub fn geodesic_integrate(
    field: &ChristoffelField,
    t_init: &[C],
    v_init: &[C],
    s_max: f64,
    opts: &GeodesicOpts,
) -> Result<GeodesicPath> {
    let m = field.m();
    if t_init.len() != m || v_init.len() != m {
        return Err(Error::FamilyInvalid("state dimension mismatch".into()));
    }
    let vnorm: f64 = v_init.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if vnorm == 0.0 {
        return Err(Error::FamilyInvalid("zero initial velocity".into()));
    }
    let rhs = |state: &[C]| -> Result<Vec<C>> {
        let (t, v) = state.split_at(m);
        let gamma = field.eval(t)?;
        let acc = gamma.contract(v, v);
        let mut out = Vec::with_capacity(2 * m);
        out.extend_from_slice(v);
        out.extend(acc.iter().map(|a| -a));
        Ok(out)
    };

    let mut state: Vec<C> = t_init.iter().chain(v_init.iter()).copied().collect();
    let mut s = 0.0f64;
    let h_max = s_max * opts.max_step_fraction;
    let mut h = h_max.min(s_max / 100.0);
    let mut samples = vec![GeodesicSample {
        s,
        t: t_init.to_vec(),
        v: v_init.to_vec(),
    }];
    let mut k0 = rhs(&state)?;
    for _ in 0..opts.max_steps {
        if s >= s_max {
            return Ok(GeodesicPath { samples });
        }
        if h < 1e-14 * s_max {
            return Err(Error::StepUnderflow { s });
        }
        h = h.min(s_max - s);
        // stages
        let mut k = vec![k0.clone()];
        for stage in 0..6 {
            let mut y = state.clone();
            for (j, kj) in k.iter().enumerate() {
                let a = A[stage][j];
                if a != 0.0 {
                    for (yi, ki) in y.iter_mut().zip(kj.iter()) {
                        *yi += ki * (a * h);
                    }
                }
            }
            let _ = C_NODES;
            k.push(rhs(&y)?);
        }
        // 5th and 4th order solutions
        let mut y5 = state.clone();
        let mut err = 0.0f64;
        let mut scale = 1.0f64;
        for i in 0..state.len() {
            let mut d5 = C::new(0.0, 0.0);
            let mut d4 = C::new(0.0, 0.0);
            for j in 0..7 {
                d5 += k[j][i] * (B5[j] * h);
                d4 += k[j][i] * (B4[j] * h);
            }
            y5[i] += d5;
            err = err.max((d5 - d4).norm());
            scale = scale.max(y5[i].norm());
        }
        let tol = opts.tol * scale.max(1.0);
        if err <= tol {
            s += h;
            state = y5;
            k0 = k[6].clone(); // FSAL
            let (t, v) = state.split_at(m);
            if let Some((center, radius)) = &opts.validity_radius {
                if dist(t, center) > *radius {
                    return Err(Error::LeftValidityRegion { s });
                }
            }
            samples.push(GeodesicSample {
                s,
                t: t.to_vec(),
                v: v.to_vec(),
            });
        }
        let factor = if err > 0.0 {
            0.9 * (tol / err).powf(0.2)
        } else {
            5.0
        };
        h *= factor.clamp(0.2, 5.0);
        h = h.min(h_max);
    }
    Err(Error::StepUnderflow { s })
}

#[cfg(test)]
mod tests {
    use super::super::{gauge_connection, Christoffel, ChristoffelField};
    use super::*;
    use crate::cech::GaugeOneForm;

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    #[test]
    fn flat_geodesics_are_straight_lines() {
        let field = ChristoffelField::constant(Christoffel::zero(3));
        let v = vec![c(1.0), c(2.0), c(3.0)];
        let path = geodesic_integrate(
            &field,
            &[c(0.0), c(0.0), c(0.0)],
            &v,
            1.0,
            &GeodesicOpts::default(),
        )
        .unwrap();
        for sample in &path.samples {
            for i in 0..3 {
                assert!((sample.t[i] - v[i] * sample.s).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn gauged_flat_traces_same_point_set() {
        // flat connection gauged by a constant 1-form: same unparameterized
        // geodesics, different parameterization
        let flat = Christoffel::zero(3);
        let xi = GaugeOneForm {
            xi: vec![c(0.35), c(-0.2), c(0.1)],
        };
        let gauged = ChristoffelField::constant(gauge_connection(&flat, &xi));
        let flat_field = ChristoffelField::constant(flat);
        let t0 = vec![c(0.0), c(0.0), c(0.0)];
        let v0 = vec![c(0.3), c(-0.1), c(0.2)];
        let p1 = geodesic_integrate(&flat_field, &t0, &v0, 1.0, &GeodesicOpts::default()).unwrap();
        let p2 = geodesic_integrate(&gauged, &t0, &v0, 1.4, &GeodesicOpts::default()).unwrap();
        let len = p1.arc_length().min(p2.arc_length());
        let tr1 = p1.truncate_at_arc_length(len * 0.999);
        let tr2 = p2.truncate_at_arc_length(len * 0.999);
        let d = GeodesicPath::hausdorff_to(&tr1, &tr2);
        assert!(d < 1e-7, "hausdorff {d}");
        // but the parameterizations differ
        let e1 = p1.end();
        let mid2 = &p2.samples[p2.samples.len() / 2];
        assert!((e1.s - mid2.s).abs() > 1e-3);
    }

    #[test]
    fn ode_residual_is_small_on_dense_samples() {
        let mut g = Christoffel::zero(2);
        g.set(0, 0, 0, c(0.3));
        g.set(1, 0, 1, c(-0.2));
        let field = ChristoffelField::constant(g);
        let path = geodesic_integrate(
            &field,
            &[c(0.0), c(0.1)],
            &[c(0.5), c(0.4)],
            1.0,
            &GeodesicOpts::default(),
        )
        .unwrap();
        let r = path.max_ode_residual(&field).unwrap();
        // central-difference reconstruction is O(h^2)
        assert!(r < 1e-3, "residual {r}");
    }

    #[test]
    fn validity_region_abort() {
        let field = ChristoffelField::constant(Christoffel::zero(1));
        let opts = GeodesicOpts {
            validity_radius: Some((vec![c(0.0)], 0.3)),
            ..Default::default()
        };
        let err = geodesic_integrate(&field, &[c(0.0)], &[c(1.0)], 1.0, &opts).unwrap_err();
        assert!(matches!(err, Error::LeftValidityRegion { .. }));
    }
}
