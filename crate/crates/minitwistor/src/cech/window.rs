//! Laurent windows: truncated Laurent expansions of functions holomorphic
//! near a circle |z| = r, computed from equispaced samples by a single FFT.
//! The window is the discretization backbone for splitting cocycles over the
//! two-chart cover and for reading off zero sets of sections.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::sync::{Mutex, OnceLock};

/// Coefficients `c_n` for `n` in `[-K/2, K/2)`, so that on |z| = r
/// `f(z) ~ sum c_n z^n` reproduces the samples.
#[derive(Clone, Debug)]
pub struct LaurentWindow {
    pub radius: f64,
    /// coeffs[j] = c_{j - K/2}
    coeffs: Vec<Complex64>,
}

/// Where the constant coefficient goes when a window is torn into
/// chart-holomorphic halves. `Plus` is the fixed project-wide convention;
/// `Minus` exists to exercise the gauge freedom.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstantConvention {
    Plus,
    Minus,
}

fn fft_forward(buf: &mut [Complex64]) {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    let planner = PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()));
    let fft = {
        let mut guard = planner.lock().expect("fft planner lock");
        guard.plan_fft_forward(buf.len())
    };
    fft.process(buf);
}

/// The K sample points `r * exp(2 pi i k / K)`, k = 0..K.
pub fn circle_points(radius: f64, k: usize) -> Vec<Complex64> {
    (0..k)
        .map(|j| {
            let th = 2.0 * std::f64::consts::PI * (j as f64) / (k as f64);
            Complex64::from_polar(radius, th)
        })
        .collect()
}

impl LaurentWindow {
    /// Build from samples at `circle_points(radius, K)`. K must be even.
    pub fn from_samples(samples: &[Complex64], radius: f64) -> LaurentWindow {
        let k = samples.len();
        assert!(k >= 4 && k % 2 == 0, "window size must be even and >= 4");
        let mut buf = samples.to_vec();
        fft_forward(&mut buf);
        let half = k / 2;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let n = j as i64 - half as i64;
            let m = n.rem_euclid(k as i64) as usize;
            *c = buf[m] / (k as f64) * radius.powi(-(n as i32));
        }
        LaurentWindow { radius, coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, n: i64) -> Complex64 {
        let half = (self.coeffs.len() / 2) as i64;
        if n < -half || n >= half {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[(n + half) as usize]
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest magnitude among the outermost coefficient pair; small tails
    /// certify that the window captured the function.
    pub fn tail(&self) -> f64 {
        let k = self.coeffs.len();
        self.coeffs[0].norm().max(self.coeffs[k - 1].norm())
    }

    pub fn validate(&self, samples: &[Complex64], tail_tol: f64, recon_tol: f64) -> Result<()> {
        if self.tail() > tail_tol {
            return Err(Error::TailDecay {
                tail: self.tail(),
                tol: tail_tol,
            });
        }
        let pts = circle_points(self.radius, samples.len());
        let mut worst = 0.0f64;
        for (p, s) in pts.iter().zip(samples.iter()) {
            worst = worst.max((self.eval(*p) - s).norm());
        }
        if worst > recon_tol {
            return Err(Error::ResidualExceeded {
                what: "laurent window reconstruction",
                value: worst,
                tol: recon_tol,
            });
        }
        Ok(())
    }

    /// Resum the window at a point (convergent for points near the circle,
    /// inside for the plus part, outside for the minus part).
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let half = (self.coeffs.len() / 2) as i64;
        // plus part by Horner in z
        let mut plus = Complex64::new(0.0, 0.0);
        for n in (0..half).rev() {
            plus = plus * z + self.coeff(n);
        }
        // minus part by Horner in 1/z: innermost coefficient first
        let zi = 1.0 / z;
        let mut minus = Complex64::new(0.0, 0.0);
        for n in (1..=half).rev() {
            minus = (minus + self.coeff(-n)) * zi;
        }
        plus + minus
    }

    /// Tear into (plus, minus): `plus[n] = c_n` for n >= 0 and
    /// `minus[n-1] = c_{-n}` for n >= 1. The constant goes to the side named
    /// by `convention`.
    pub fn split(&self, convention: ConstantConvention) -> (Vec<Complex64>, Vec<Complex64>) {
        let half = (self.coeffs.len() / 2) as i64;
        let mut plus: Vec<Complex64> = (0..half).map(|n| self.coeff(n)).collect();
        let mut minus: Vec<Complex64> = (1..=half).map(|n| self.coeff(-n)).collect();
        if convention == ConstantConvention::Minus {
            // move c_0 into the minus side's constant slot by prepending it;
            // minus then represents c_0 + sum_{n>=1} c_{-n} z^{-n}
            minus.insert(0, plus[0]);
            plus[0] = Complex64::new(0.0, 0.0);
        }
        (plus, minus)
    }
}

/// A one-sided power series `sum a_n u^n`, n >= 0, used for the
/// chart-holomorphic halves of a split window.
#[derive(Clone, Debug)]
pub struct PowerSeries {
    pub coeffs: Vec<Complex64>,
}

impl PowerSeries {
    pub fn zero() -> Self {
        PowerSeries { coeffs: Vec::new() }
    }

    pub fn eval(&self, u: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * u + c;
        }
        acc
    }

    pub fn shift_constant(&mut self, delta: Complex64) {
        if self.coeffs.is_empty() {
            self.coeffs.push(delta);
        } else {
            self.coeffs[0] += delta;
        }
    }

    /// Truncate trailing coefficients below `floor`, returning the
    /// polynomial coefficient vector that remains.
    pub fn significant_coeffs(&self, floor: f64) -> Vec<Complex64> {
        let mut out = self.coeffs.clone();
        while out.len() > 1 && out.last().map(|c| c.norm() < floor).unwrap_or(false) {
            out.pop();
        }
        out
    }
}

/// Split a function given by samples on |z| = r into chart-holomorphic
/// halves: `h(z) = plus(z) + minus(1/z)` with `minus(0) = 0` under the
/// `Plus` convention. Returns the two series (minus reindexed in u = 1/z).
pub fn laurent_split(
    samples: &[Complex64],
    radius: f64,
    convention: ConstantConvention,
    tail_tol: f64,
    recon_tol: f64,
) -> Result<(PowerSeries, PowerSeries, LaurentWindow)> {
    let window = LaurentWindow::from_samples(samples, radius);
    window.validate(samples, tail_tol, recon_tol)?;
    let (plus, minus) = window.split(convention);
    let minus_series = match convention {
        ConstantConvention::Plus => {
            // minus[j] = c_{-(j+1)}: as a series in u = 1/z with zero constant
            let mut coeffs = vec![Complex64::new(0.0, 0.0)];
            coeffs.extend_from_slice(&minus);
            PowerSeries { coeffs }
        }
        ConstantConvention::Minus => PowerSeries { coeffs: minus },
    };
    Ok((PowerSeries { coeffs: plus }, minus_series, window))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample<F: Fn(Complex64) -> Complex64>(f: F, r: f64, k: usize) -> Vec<Complex64> {
        circle_points(r, k).into_iter().map(f).collect()
    }

    #[test]
    fn splits_explicit_laurent_polynomial() {
        // h = 3/z + 2 + z  ->  plus = 2 + z, minus = 3/z
        let s = sample(|z| 3.0 / z + 2.0 + z, 1.0, 64);
        let (plus, minus, _) =
            laurent_split(&s, 1.0, ConstantConvention::Plus, 1e-12, 1e-10).unwrap();
        assert!((plus.coeffs[0] - c(2.0, 0.0)).norm() < 1e-12);
        assert!((plus.coeffs[1] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(plus.coeffs[2..].iter().all(|x| x.norm() < 1e-12));
        assert!(minus.coeffs[0].norm() < 1e-12);
        assert!((minus.coeffs[1] - c(3.0, 0.0)).norm() < 1e-12);
        assert!(minus.coeffs[2..].iter().all(|x| x.norm() < 1e-12));
    }

    #[test]
    fn pole_outside_goes_entirely_to_plus() {
        // 1/(z-3) is holomorphic on |z| <= 1: minus part empty
        let s = sample(|z| 1.0 / (z - 3.0), 1.0, 128);
        let (plus, minus, _) =
            laurent_split(&s, 1.0, ConstantConvention::Plus, 1e-12, 1e-10).unwrap();
        assert!(minus.coeffs.iter().all(|x| x.norm() < 1e-13));
        // geometric series -1/3 * (1 + z/3 + ...)
        assert!((plus.coeffs[0] - c(-1.0 / 3.0, 0.0)).norm() < 1e-13);
        assert!((plus.coeffs[1] - c(-1.0 / 9.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn pole_on_circle_fails_tail_decay() {
        let s = sample(|z| 1.0 / (z - 1.02), 1.0, 64);
        let err = laurent_split(&s, 1.0, ConstantConvention::Plus, 1e-12, 1e-10).unwrap_err();
        assert!(matches!(err, Error::TailDecay { .. }));
    }

    #[test]
    fn reconstruction_on_circle() {
        let f = |z: Complex64| (2.0 * z + 0.5).sin() / (z - 4.0) + 1.0 / (z * z);
        let s = sample(f, 1.0, 256);
        let w = LaurentWindow::from_samples(&s, 1.0);
        for z in circle_points(1.0, 37) {
            assert!((w.eval(z) - f(z)).norm() < 1e-10);
        }
    }

    #[test]
    fn constant_convention_flip_moves_c0() {
        let s = sample(|z| 3.0 / z + 2.0 + z, 1.0, 64);
        let (plus_p, minus_p, _) =
            laurent_split(&s, 1.0, ConstantConvention::Plus, 1e-12, 1e-10).unwrap();
        let (plus_m, minus_m, _) =
            laurent_split(&s, 1.0, ConstantConvention::Minus, 1e-12, 1e-10).unwrap();
        assert!((plus_p.coeffs[0] - c(2.0, 0.0)).norm() < 1e-12);
        assert!(plus_m.coeffs[0].norm() < 1e-13);
        assert!((minus_m.coeffs[0] - c(2.0, 0.0)).norm() < 1e-12);
        assert!(minus_p.coeffs[0].norm() < 1e-13);
    }

    #[test]
    fn analyticity_sorting_is_exact() {
        // plus part has no negative-index coefficients by construction;
        // check the split of a generic analytic sample agrees with eval
        let f = |z: Complex64| 1.0 / (z - 2.5) + 2.0 / (z * z * z);
        let s = sample(f, 1.0, 128);
        let (plus, minus, _) =
            laurent_split(&s, 1.0, ConstantConvention::Plus, 1e-12, 1e-10).unwrap();
        for z in circle_points(1.0, 17) {
            let recon = plus.eval(z) + minus.eval(1.0 / z);
            assert!((recon - f(z)).norm() < 1e-11);
        }
    }
}
