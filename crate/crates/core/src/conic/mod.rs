//! Standard-form conic programming.
//!
//! Programs are written as
//!
//! ```text
//! minimize    c^T x
//! subject to  A x + s = b,   s in K
//! ```
//!
//! where `K` is a product of zero, nonnegative and second-order cones. The
//! dual is `maximize -b^T y  s.t.  A^T y + c = 0,  y in K*`.

mod admm;
mod complex;
mod cone;
mod program;
mod sparse;
mod stuffing;

pub use admm::{admm_solve, AdmmSettings, AdmmSolver, ConicSolution, SolveStatus, WarmStart};
pub use complex::{
    embed_complex, AffineExpr, ComplexConstraint, ComplexSocp, EmbeddedProgram, RealForm,
};
pub use cone::{project_cone, project_cone_product, Cone};
pub use program::StandardConicProgram;
pub use sparse::SparseMatrix;
pub use stuffing::{stuff, Entry, ParamValues, StuffingTemplate, TemplateBuilder};
