//! Closed-form reference data for the branched double cover family: the
//! published connection table, the conformal metric, and the 1-forms a, b
//! of its Weyl structure, all as exact rational functions of (t0, t1, t2)
//! with Delta = (1 + t0 t2)^2 + t1^2 (1 + 2 t0 t2).
//!
//! The b1 entry circulates in two variants differing by one index
//! ((1 + t0*t1) against the symmetric (1 + t0*t2)); both are provided and
//! the pipeline decides which one it reproduces.

use crate::error::Result;
use crate::exact::{parse_expr, ParseContext, RatFunc};
use crate::family::{sym_count, sym_index};
use crate::projconn::ChristoffelField;
use crate::weyl::{MetricField, OneFormField};

pub const PARAMS: [&str; 3] = ["t0", "t1", "t2"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum B1Variant {
    /// b1 = -3 t1 (1 + t0*t2) / (4 Delta)
    T0T2,
    /// b1 = -3 t1 (1 + t0*t1) / (4 Delta)
    T0T1,
}

impl std::fmt::Display for B1Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            B1Variant::T0T2 => write!(f, "1 + t0*t2"),
            B1Variant::T0T1 => write!(f, "1 + t0*t1"),
        }
    }
}

fn ctx() -> ParseContext {
    ParseContext::new(&PARAMS, &[])
}

fn rf(src: &str) -> RatFunc {
    parse_expr(src, &ctx())
        .expect("reference closed form parses")
        .as_ratfunc()
        .expect("reference closed form is rational")
}

fn params_vec() -> Vec<String> {
    PARAMS.iter().map(|s| s.to_string()).collect()
}

pub fn delta() -> RatFunc {
    rf("(1 + t0*t2)^2 + t1^2*(1 + 2*t0*t2)")
}

/// The reference torsion-free representative of the canonical projective
/// structure on the cover's moduli space. All unlisted entries vanish.
pub fn cover_connection() -> Result<ChristoffelField> {
    let d = "((1 + t0*t2)^2 + t1^2*(1 + 2*t0*t2))";
    let entries: Vec<(usize, usize, usize, RatFunc)> = vec![
        (0, 0, 0, rf(&format!("t2*(1 + t0*t2)/{d}"))),
        (1, 0, 0, rf(&format!("-t1*t2^2/{d}"))),
        (0, 0, 1, rf(&format!("t1*(1 + 3*t0*t2)/(2*{d})"))),
        (1, 0, 1, rf(&format!("t2*(2 + t1^2 + 2*t0*t2)/(2*{d})"))),
        (0, 0, 2, rf(&format!("t0*(1 + t0*t2 + t1^2)/(2*{d})"))),
        (1, 0, 2, rf(&format!("-t1*(1 + t1^2)/(2*{d})"))),
        (0, 1, 1, rf(&format!("-t0*(1 + t0*t2)/{d}"))),
        (1, 1, 1, rf(&format!("t0*t1*t2/{d}"))),
        (0, 1, 2, rf(&format!("-t0^2*t1/(2*{d})"))),
        (1, 1, 2, rf(&format!("-t0*(1 + t0*t2 + t1^2)/(2*{d})"))),
    ];
    crate::projconn::exact_field(&params_vec(), 3, &entries)
}

/// The conformal representative
/// g = t1^2 t2^2 dt0^2 + (1+t0 t2)^2 dt1^2 + 4 t0^2 (1+t1^2) dt2^2
///   + 2 t1 t2 (1+t0 t2) dt0 dt1 - 4 (1+t1^2)(1+t0 t2) dt0 dt2
///   - 4 t0^2 t1 t2 dt1 dt2
/// stored with the symmetric convention (off-diagonals are half the
/// cross-term coefficients).
pub fn cover_metric() -> MetricField {
    let mut entries = vec![RatFunc::zero(); sym_count(3)];
    entries[sym_index(3, 0, 0)] = rf("t1^2*t2^2");
    entries[sym_index(3, 1, 1)] = rf("(1 + t0*t2)^2");
    entries[sym_index(3, 2, 2)] = rf("4*t0^2*(1 + t1^2)");
    entries[sym_index(3, 0, 1)] = rf("t1*t2*(1 + t0*t2)");
    entries[sym_index(3, 0, 2)] = rf("-2*(1 + t1^2)*(1 + t0*t2)");
    entries[sym_index(3, 1, 2)] = rf("-2*t0^2*t1*t2");
    MetricField::Exact {
        params: params_vec(),
        m: 3,
        entries,
    }
}

pub fn cover_one_form_a() -> OneFormField {
    let d = "((1 + t0*t2)^2 + t1^2*(1 + 2*t0*t2))";
    OneFormField::Exact {
        params: params_vec(),
        comps: vec![
            rf(&format!("3*t1^2*t2/(2*{d})")),
            rf(&format!("-3*t1*(1 + t0*t2)/(4*{d})")),
            rf(&format!("-3*t0*(1 + t0*t2 + t1^2)/(2*{d})")),
        ],
    }
}

pub fn cover_one_form_b(variant: B1Variant) -> OneFormField {
    let d = "((1 + t0*t2)^2 + t1^2*(1 + 2*t0*t2))";
    let b1 = match variant {
        B1Variant::T0T2 => format!("-3*t1*(1 + t0*t2)/(4*{d})"),
        B1Variant::T0T1 => format!("-3*t1*(1 + t0*t1)/(4*{d})"),
    };
    OneFormField::Exact {
        params: params_vec(),
        comps: vec![
            rf(&format!("-3*t1^2*t2/(4*{d})")),
            rf(&b1),
            rf(&format!("-3*t0*(1 + t0*t2 + t1^2)/(2*{d})")),
        ],
    }
}

/// omega = a - 2b.
pub fn cover_omega(variant: B1Variant) -> OneFormField {
    OneFormField::a_minus_2b(&cover_one_form_a(), &cover_one_form_b(variant))
}
