//! Finite-difference solvers for singularly perturbed competition systems
//!
//! ```text
//! Δu_i = (A_i / ε) Π_j u_j^{α_j}   in Ω,      u_i = φ_i   on ∂Ω,
//! ```
//!
//! with partially segregated boundary data (`Π φ_i = 0`), and for the
//! explicit segregated limit as `ε → 0`.

pub mod analysis;
pub mod config;
pub mod elliptic;
pub mod epsilon;
pub mod error;
pub mod expr;
pub mod field;
pub mod geometry;
pub mod limit;
pub mod problem;

pub use config::{parse_config, parse_config_str, CouplingSpec, SolverConfig, SystemConfig};
pub use elliptic::{
    apply_laplacian, solve_harmonic, solve_screened, solve_screened_from, LinearSettings, LinearSolveStats,
    DEFAULT_LINEAR_TOL,
};
pub use epsilon::{
    difference_harmonicity_check, initialize, solve_epsilon, solve_epsilon_from, solve_epsilon_observed, sweep,
    FixedPointSettings, IterationState, SolveResult,
};
pub use error::{Error, Result};
pub use expr::Expr;
pub use field::{BoundaryValues, ScalarField};
pub use geometry::{build_grid, BoundaryParam, BoundaryPoint, Domain, End, Grid, NodeClass, Side};
pub use limit::{construct_limit, harmonic_differences, pivot_equivalence_check, solve_limit, LimitResult};
pub use problem::{BoundaryDatum, CouplingWeights, Exponents, Problem, Weight};
