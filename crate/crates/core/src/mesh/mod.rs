//! Grid, Kuhn tessellation, fields and discrete differential operators.

mod field;
mod grid;
mod kuhn;
mod ops;

pub use field::{Layout, ScalarField, VectorField};
pub use grid::Grid;
pub use kuhn::{kuhn_tessellate, KuhnMesh, Simplex};
pub use ops::{div_fdm, div_p0, grad_fdm, grad_p1, Discretization, Operators};
