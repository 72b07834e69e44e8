//! Family configuration files: TOML documents that either name a built-in
//! family (`builder = "quadric-11" | "branched-cover-12"`, with optional
//! annulus/tolerance overrides) or spell out a family longhand with
//! expression strings for the transition, the chart functions, and declared
//! square roots.

use crate::error::{Error, Result};
use crate::exact::{
    parse_expr, Assignment, BranchContext, MultiPoly, ParseContext, RootSpec, Scalar,
};
use crate::family::{build_branched_cover_12, build_quadric_11, Family, Transition};
use crate::Tolerances;
use num_complex::Complex64;
use num_rational::BigRational;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

/// A real number or an [re, im] pair.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum NumOrPair {
    Num(f64),
    Pair([f64; 2]),
}

impl NumOrPair {
    fn to_c64(&self) -> Complex64 {
        match self {
            NumOrPair::Num(x) => Complex64::new(*x, 0.0),
            NumOrPair::Pair([re, im]) => Complex64::new(*re, *im),
        }
    }

    fn to_scalar(&self) -> Result<Scalar> {
        let conv = |x: f64| -> Result<BigRational> {
            BigRational::from_float(x).ok_or_else(|| {
                Error::Config(format!("value {x} is not representable exactly"))
            })
        };
        match self {
            NumOrPair::Num(x) => Ok(Scalar::new(conv(*x)?, BigRational::from_float(0.0).unwrap())),
            NumOrPair::Pair([re, im]) => Ok(Scalar::new(conv(*re)?, conv(*im)?)),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    /// Reserved builder names take precedence over longhand sections.
    pub builder: Option<String>,
    pub name: Option<String>,
    pub variables: Option<VariablesSection>,
    pub roots: Option<BTreeMap<String, String>>,
    pub transition: Option<TransitionSection>,
    pub family: Option<FamilySection>,
    pub base: Option<BaseSection>,
    pub annulus: Option<AnnulusSection>,
    pub tolerances: Option<Tolerances>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariablesSection {
    pub params: Vec<String>,
    #[serde(default = "default_w")]
    pub fiber_w: String,
    #[serde(default = "default_z")]
    pub fiber_z: String,
    #[serde(default = "default_zh")]
    pub fiber_zh: String,
}

fn default_w() -> String {
    "w".into()
}
fn default_z() -> String {
    "z".into()
}
fn default_zh() -> String {
    "zh".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionSection {
    pub f: String,
    pub g: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySection {
    pub phi1: String,
    pub phi2: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseSection {
    pub t0: Vec<NumOrPair>,
    pub fiber: BTreeMap<String, NumOrPair>,
    #[serde(default)]
    pub branch: BTreeMap<String, NumOrPair>,
    pub validity_radius: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnulusSection {
    pub r_in: f64,
    pub r_out: f64,
}

pub fn load_family(path: &Path) -> Result<Family> {
    let text = std::fs::read_to_string(path)?;
    family_from_str(&text)
}

pub fn family_from_str(text: &str) -> Result<Family> {
    let cfg: FamilyConfig =
        toml::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))?;
    build_from_config(cfg)
}

fn build_from_config(cfg: FamilyConfig) -> Result<Family> {
    if let Some(builder) = &cfg.builder {
        let mut fam = match builder.as_str() {
            "quadric-11" => build_quadric_11()?,
            "branched-cover-12" => build_branched_cover_12()?,
            other => return Err(Error::UnknownBuilder(other.to_string())),
        };
        if let Some(a) = &cfg.annulus {
            fam.annulus = (a.r_in, a.r_out);
        }
        if let Some(tol) = cfg.tolerances {
            fam.tol = tol;
        }
        if let Some(base) = &cfg.base {
            if let Some(vr) = base.validity_radius {
                fam.validity_radius = vr;
            }
        }
        return Ok(fam);
    }

    let vars = cfg
        .variables
        .ok_or_else(|| Error::Config("missing [variables] section".into()))?;
    let trans = cfg
        .transition
        .ok_or_else(|| Error::Config("missing [transition] section".into()))?;
    let famsec = cfg
        .family
        .ok_or_else(|| Error::Config("missing [family] section".into()))?;
    let base = cfg
        .base
        .ok_or_else(|| Error::Config("missing [base] section".into()))?;

    let mut all_vars: Vec<&str> = vec![&vars.fiber_w, &vars.fiber_z, &vars.fiber_zh];
    all_vars.extend(vars.params.iter().map(|s| s.as_str()));

    // roots parse in the plain variable context
    let plain = ParseContext::new(&all_vars, &[]);
    let mut root_specs: Vec<RootSpec> = Vec::new();
    if let Some(roots) = &cfg.roots {
        for (sym, src) in roots {
            let poly: MultiPoly = parse_expr(src, &plain)?
                .as_poly()
                .ok_or_else(|| Error::Config(format!("root `{sym}` must define a polynomial")))?;
            root_specs.push(RootSpec {
                symbol: sym.clone(),
                defining: poly,
            });
        }
    }
    let ctx = ParseContext::new(&all_vars, &root_specs);

    let phi1 = parse_expr(&famsec.phi1, &ctx)?;
    let phi2 = parse_expr(&famsec.phi2, &ctx)?;
    let f = parse_expr(&trans.f, &ctx)?;
    let g = parse_expr(&trans.g, &ctx)?;

    if base.t0.len() != vars.params.len() {
        return Err(Error::Config(format!(
            "base.t0 has {} entries for {} parameters",
            base.t0.len(),
            vars.params.len()
        )));
    }
    let t0_exact: Vec<Scalar> = base
        .t0
        .iter()
        .map(|v| v.to_scalar())
        .collect::<Result<_>>()?;

    let mut assignment: Assignment = Assignment::new();
    for (name, v) in &base.fiber {
        assignment.insert(name.clone(), v.to_c64());
    }
    for (name, v) in vars.params.iter().zip(base.t0.iter()) {
        assignment.insert(name.clone(), v.to_c64());
    }
    let base_roots: BTreeMap<String, Complex64> = base
        .branch
        .iter()
        .map(|(k, v)| (k.clone(), v.to_c64()))
        .collect();
    let branch = BranchContext::new(assignment, base_roots);

    let annulus = cfg
        .annulus
        .map(|a| (a.r_in, a.r_out))
        .unwrap_or((0.5, 2.0));
    let tol = cfg.tolerances.unwrap_or_default();

    Family::new(
        cfg.name.unwrap_or_else(|| "custom".into()),
        vars.params.clone(),
        (
            vars.fiber_w.clone(),
            vars.fiber_z.clone(),
            vars.fiber_zh.clone(),
        ),
        phi1,
        phi2,
        Transition { f, g },
        t0_exact,
        annulus,
        branch,
        base.validity_radius.unwrap_or(0.3),
        tol,
        BTreeMap::new(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const QUADRIC_LONGHAND: &str = r#"
name = "quadric-11-longhand"

[variables]
params = ["a0", "a1", "b1"]

[transition]
f = "-w/(z*(w + z))"
g = "1/z"

[family]
phi1 = "(a1*z + a0)/(b1*z + 1) - z"
phi2 = "(b1 + zh)/(a1 + a0*zh) - zh"

[base]
t0 = [0.0, 1.0, 0.0]
fiber = { w = 0.0, z = 1.0, zh = 1.0 }
"#;

    #[test]
    fn builder_dispatch() {
        let fam = family_from_str("builder = \"quadric-11\"").unwrap();
        assert_eq!(fam.name, "quadric-11");
        let fam2 = family_from_str("builder = \"branched-cover-12\"").unwrap();
        assert_eq!(fam2.name, "branched-cover-12");
        let err = family_from_str("builder = \"nope\"").unwrap_err();
        assert!(matches!(err, Error::UnknownBuilder(_)));
    }

    #[test]
    fn longhand_quadric_matches_builder() {
        let longhand = family_from_str(QUADRIC_LONGHAND).unwrap();
        let builder = build_quadric_11().unwrap();
        // cross-evaluate phi at 50 sample points
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let z = Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            if z.norm() < 0.55 || z.norm() > 1.9 {
                continue;
            }
            let t = vec![
                Complex64::new(rng.gen_range(-0.1..0.1), 0.0),
                Complex64::new(1.0 + rng.gen_range(-0.1..0.1), 0.0),
                Complex64::new(rng.gen_range(-0.1..0.1), 0.0),
            ];
            let mut e1 = longhand
                .point_evaluator(crate::family::Chart::One, z)
                .unwrap();
            let mut e2 = builder
                .point_evaluator(crate::family::Chart::One, z)
                .unwrap();
            let v1 = e1.phi_at(&t).unwrap();
            let v2 = e2.phi_at(&t).unwrap();
            assert!((v1 - v2).norm() < 1e-12);
        }
    }

    #[test]
    fn bad_normalization_is_rejected_with_invariant_name() {
        let cfg = r#"
[variables]
params = ["a0"]

[transition]
f = "w + z"
g = "1/z"

[family]
phi1 = "a0*z"
phi2 = "a0*zh"

[base]
t0 = [0.0]
fiber = { w = 0.0, z = 1.0, zh = 1.0 }
"#;
        let err = family_from_str(cfg).unwrap_err();
        let msg = format!("{err}");
        assert!(
            msg.contains("f(0, z) = 0"),
            "error should cite the chart normalization invariant, got: {msg}"
        );
    }

    #[test]
    fn parse_error_reports_position() {
        let err = family_from_str("builder = ").unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("line"), "toml errors carry line/column: {msg}");
    }
}
