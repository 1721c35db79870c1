//! Bound reduction: continued fractions, LLL approximation lattices and
//! Baker-Davenport.

pub mod bakdav;
pub mod cf;
pub mod deweger;
pub mod lll;

pub use bakdav::{baker_davenport, build_kappa_list, build_kappa_list_at, BdBound, KappaPair};
pub use cf::{cf_gap_bound, continued_fraction, continued_fraction_with, ConvergentTable, GapBound};
pub use deweger::{approximation_lattice, de_weger_reduce, ApproxLattice, DeWegerInput, Reduced};
pub use lll::{lattice_distance_lower_bound, lll_reduce, IntegerLattice};
