//! Diagnostics on computed fields: norms and energies, segregation
//! residuals, zero sets and interfaces with their jump conditions, and the
//! ε-convergence study.

pub mod interfaces;
pub mod norms;
pub mod rate;
pub mod segregation;

pub use interfaces::{
    boundary_contacts, default_delta, extract_supports_and_interfaces, jump_condition_check, meeting_point, ElementKind, InterfaceElement,
    InterfaceSet, JumpSettings, JumpStats, PairInterface,
};
pub use norms::{discrete_energy, lp_distance, norm_lp};
pub use rate::{geometric_ladder, rate_study, RateEntry, RateTable};
pub use segregation::{laplacian_measure, mass_near, segregation_residual, SegregationResidual};
