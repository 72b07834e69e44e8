//! Symbolic-numeric toolkit for the canonical projective connection on the
//! moduli space of a complete two-chart family of rational curves in a
//! complex surface, and for the Einstein-Weyl structure it induces when the
//! normal bundle has degree 2.
//!
//! The pipeline follows the constructive proof that such moduli spaces carry
//! a projective structure:
//!
//! 1. [`family`] — two-chart family data `w = phi(z, t)`, the normal-bundle
//!    transition `F`, the cochains `E`, `G` and the 1-cocycle `tau`;
//! 2. [`cech`] — splitting of `tau` over the two-chart cover by Laurent
//!    decomposition on the overlap annulus (with an exact partial-fraction
//!    path for rational data), plus the fiber-constant gauge freedom;
//! 3. [`projconn`] — extraction of the Christoffel symbols from the split,
//!    projective-equivalence algebra, geodesic integration, and the
//!    totally-geodesic / fixed-intersection verifications;
//! 4. [`weyl`] — conformal structure from second-order tangency, the Weyl
//!    connection `D = LC + (1/2) omega^# g - omega . I`, and the
//!    Einstein-Weyl residual.
//!
//! Everything closed-form lives in [`exact`]: multivariate rational
//! functions over the Gaussian rationals, optionally extended by formal
//! square roots, with a branch-tracked complex evaluator.

pub mod cech;
pub mod config;
pub mod error;
pub mod exact;
pub mod exec;
pub mod family;
pub mod projconn;
pub mod reference;
pub mod report;
pub mod weyl;

pub use error::{Error, Result};

/// Default tolerances for the numeric pipeline. All are overridable from
/// family configs and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Laurent window reconstruction error on the sample circle.
    pub reconstruction: f64,
    /// Residual of the second-derivative matching relation after a split.
    pub residual: f64,
    /// Tail-decay threshold for Laurent windows.
    pub tail: f64,
    /// Least-squares residual of the connection extraction.
    pub extraction: f64,
    /// Section transformation residual (sigma_2 o g = F sigma_1).
    pub section: f64,
    /// Family chart-compatibility residual.
    pub compatibility: f64,
    /// Per-step local error for geodesic integration.
    pub geodesic_step: f64,
    /// Totally-geodesic deviation bound.
    pub deviation: f64,
    /// Zero-set drift bound along geodesics.
    pub drift: f64,
    /// Weyl-layer least squares and projective-equivalence residuals.
    pub weyl: f64,
    /// Einstein-Weyl trace-free Ricci residual.
    pub einstein_weyl: f64,
    /// Conformal-structure proportionality (2x2 minors).
    pub conformal: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            reconstruction: 1e-10,
            residual: 1e-9,
            tail: 1e-12,
            extraction: 1e-8,
            section: 1e-10,
            compatibility: 1e-10,
            geodesic_step: 1e-10,
            deviation: 1e-6,
            drift: 1e-5,
            weyl: 1e-8,
            einstein_weyl: 1e-6,
            conformal: 1e-7,
        }
    }
}

impl Tolerances {
    /// Override a named tolerance; key names match the field names.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match key {
            "reconstruction" => self.reconstruction = value,
            "residual" => self.residual = value,
            "tail" => self.tail = value,
            "extraction" => self.extraction = value,
            "section" => self.section = value,
            "compatibility" => self.compatibility = value,
            "geodesic_step" => self.geodesic_step = value,
            "deviation" => self.deviation = value,
            "drift" => self.drift = value,
            "weyl" => self.weyl = value,
            "einstein_weyl" => self.einstein_weyl = value,
            "conformal" => self.conformal = value,
            _ => return Err(Error::Config(format!("unknown tolerance `{key}`"))),
        }
        Ok(())
    }
}
