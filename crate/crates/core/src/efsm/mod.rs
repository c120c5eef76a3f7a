//! Guarded-command machines over bounded natural-number variables.
//!
//! ```text
//! system sum {
//!   nodes c0 c1 c2 ;
//!   var i : 0..11 ;
//!   var s : 0..66 ;
//!   var m : 0..10 ;
//!   trans c0 -> c1 { i := 0 ; s := 0 ; }
//!   trans c1 -> c1 when i < m { i := i + 1 ; s := s + i + 1 ; }
//!   trans c1 -> c2 when i >= m { }
//! }
//! ```
//!
//! Updates of one arrow are parallel: every right-hand side reads the
//! pre-state. Subtraction truncates at zero and `gcd(0, 0) = 0`. A model is
//! made finite by the declared variable bounds; an update that leaves its
//! bounds drops that transition instance (with a warning) instead of
//! aborting, which can only turn states final and never hides a
//! counterexample.

mod ast;
mod expand;
mod parse;

pub use ast::{Arrow, BoolExpr, CmpOp, EfsmModel, IntExpr, IntOp, Pos, VarDecl};
pub use expand::{
    expand, expand_with_limit, select_component, EvalError, ExpandError, Expansion, PredicateError, RangeWarning,
    SelectError, DEFAULT_STATE_LIMIT,
};
pub use parse::{parse_bool_expr, parse_formula, parse_model, ParseError, ParseErrorKind};
