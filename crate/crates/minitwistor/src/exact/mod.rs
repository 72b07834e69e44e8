//! Exact arithmetic over the Gaussian rationals: multivariate polynomials,
//! reduced rational functions, quadratic root extensions, an expression
//! parser, and a branch-tracked complex evaluator.

mod compiled;
mod eval;
mod parser;
mod poly;
mod ratfunc;
mod rootext;
mod scalar;

pub use compiled::{CompiledElem, CompiledPoly, CompiledRat, VarTable};
pub use eval::{eval_complex, Assignment, BranchContext, ContinuationOpts, RootTracker};
pub use parser::{parse_expr, ParseContext};
pub use poly::MultiPoly;
pub use ratfunc::RatFunc;
pub use rootext::{RootExtElem, RootSpec};
pub use scalar::Scalar;
