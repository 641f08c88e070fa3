//! Exact computations for line bundles on moduli of flat bundles over
//! surfaces, built from 2-group bundles.

pub mod cli;
pub mod cochain;
pub mod error;
pub mod group;
pub mod groupoid;
pub mod lift;
pub mod moduli;
pub mod qz;
pub mod snf;

pub use cochain::{alpha_cyclic, Coboundary, Cochain};
pub use error::{Error, Result};
pub use group::{FiniteGroup, GroupHom};
pub use qz::QZ;
