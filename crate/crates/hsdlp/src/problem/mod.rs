//! LP data model: the user-facing two-sided form, the internal standard
//! form, the crush/uncrush maps between them, and the solution type.
//!
//! A problem enters as a [`GeneralLP`]: ranged rows `l^b <= Ax <= u^b` and
//! arbitrary variable bounds `l^x <= x <= u^x`, either sense. Before the
//! interior-point solve it is converted ([`to_standard_form`]) to the
//! internal shape
//!
//! ```text
//!     min c'x   s.t.  Ax = b,  x_I <= u,  x >= 0
//! ```
//!
//! where upper bounds are kept as a separate index set rather than rows.
//! [`uncrush`] maps a standard-form solution (or certificate ray) back to
//! the original variables.

mod general;
mod solution;
mod standard;

pub use general::{Bound, Diagnostic, GeneralLP, Sense};
pub use solution::{Solution, SolveStats, Status};
pub use standard::{
    to_standard_form, uncrush, BoundedCols, CrushError, RowImage, StandardLP, VarImage,
    VariableMap,
};
