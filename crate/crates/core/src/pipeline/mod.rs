//! From absolute bounds to a certified list of solutions.

pub mod bounds;
pub mod cascade;

pub use bounds::{derive_two_solution_bounds, BoundState, BoundSummary, TrailEntry};
pub use cascade::{global_reduction, CascadeOptions};
pub mod instance;

pub use instance::{dependent_gap_bound, solve_instance, solve_y, verify_solution, InstanceReport, SolveOptions};
pub mod prove;

pub use prove::{enumerate_candidates, prove_theorem, Certificate, ProveOptions, Verdict};
