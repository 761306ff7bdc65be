//! Level set minimizing movements for crystalline mean curvature flow.
//!
//! The normal velocity law is `V = β(ν)(κ_σ + f)`. Each time step redistances the level set
//! function in the `β°` metric and then solves the total variation resolvent
//!
//! ```text
//! v = argmin (μ/2)‖v − (w − f/μ)‖² + ‖σ(∇v)‖₁,    μ = 1/h,
//! ```
//!
//! by split Bregman iteration. The evolving set is `{v ≤ 0}`.
//!
//! Modules, bottom up:
//!
//! - [`anisotropy`]: `σ`, `σ°`, Wulff projections and the shrink operator.
//! - [`mesh`]: the uniform grid on `(−½, ½)ⁿ`, its Kuhn tessellation, node and vector fields and
//!   the finite difference / finite element operators.
//! - [`redistance`]: anisotropic signed distance by exact initialization plus fast sweeping.
//! - [`bregman`]: the split Bregman resolvent solver.
//! - [`flow`]: the outer time loop.
//! - [`exact`] and [`ode`]: self-similar reference solutions.
//! - [`metrics`]: surface extraction and Hausdorff distances.
//! - [`benchmark`]: the registered benchmark problems.

pub mod anisotropy;
pub mod benchmark;
pub mod bregman;
pub mod error;
pub mod exact;
pub mod flow;
pub mod mesh;
pub mod metrics;
pub mod ode;
pub mod redistance;

pub use anisotropy::{Anisotropy, Kind};
pub use benchmark::Benchmark;
pub use bregman::BregmanState;
pub use error::{Error, Result};
pub use exact::SelfSimilarSolution;
pub use flow::{Flow, FlowConfig, StepReport, Trajectory};
pub use mesh::{Discretization, Grid, KuhnMesh, Layout, Operators, ScalarField, VectorField};
pub use metrics::{HausdorffMode, SurfaceMesh};
pub use redistance::{Redistancer, SignedDistance};


