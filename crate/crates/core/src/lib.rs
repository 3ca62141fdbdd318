//! Numerical verification engine for boundary reflection algebras.
//!
//! The crate builds fused R-matrices over ordered index sets, solutions of
//! the generalized reflection equations and their duals, dressing operators,
//! and commuting quantum-trace operators, and checks every identity as a
//! relative Frobenius residual on small dense matrices.

pub mod error;
pub mod space;
pub mod multiop;
pub mod sampling;
pub mod report;
pub mod rmodel;
pub mod fused;
pub mod laurent;
pub mod ybtraces;
pub mod reflection;
pub mod traces;
pub mod dump;
#[doc(hidden)]
pub mod oracle;

pub use error::{CoreError, Result};
pub use multiop::{C64, EPS_FLOOR, MultiOp};
pub use space::{IndexSet, Label, Orientation, Space, SpaceKind, SpaceRegistry};
