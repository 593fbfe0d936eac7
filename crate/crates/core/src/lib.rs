//! Braid-cocycle quasimorphisms for area-preserving maps of the disk.
//!
//! The pipeline: a [`dynamics::DiskMap`] moves n sample points, the motion
//! closes up to a braid ([`cocycle`]), the braid maps to PSL(2,Z) acting on
//! the Farey graph ([`farey`]), and counting quasimorphisms
//! ([`quasimorphism`]) are integrated over configurations ([`gg`]). The
//! [`entropy`] and [`norms`] modules supply the comparison side.

pub mod braid;
pub mod cocycle;
pub mod dynamics;
pub mod entropy;
pub mod error;
pub mod farey;
pub mod gg;
pub mod int;
pub mod norms;
pub mod quasimorphism;
pub mod stats;

pub use error::{Error, Result};
