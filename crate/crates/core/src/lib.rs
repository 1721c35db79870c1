//! Certified solver for `F_n + F_m = y^a`.

pub mod arbreal;
pub mod error;
pub mod independence;
pub mod linforms;
pub mod pipeline;
pub mod quadfield;
pub mod reduction;

pub use arbreal::{ArbError, CertifiedReal};
pub use error::{FibpowError, Result};
