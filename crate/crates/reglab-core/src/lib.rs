//! Exact-arithmetic verification of metric regularity properties for
//! set-valued mappings on finite and discretized metric spaces.
//!
//! Everything is computed over arbitrary-precision rationals so that
//! strict and non-strict inequalities in the various regularity
//! criteria are decided without floating-point tolerances. The crate
//! is `no_std` + `alloc`; IO, file formats, and the command-line front
//! end live in the companion `reglab` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod criteria;
pub mod error;
pub mod evp;
pub mod extnum;
pub mod gallery;
pub mod maps;
pub mod perturb;
pub mod point;
pub mod rat;
pub mod regularity;
pub mod spaces;
pub mod verdict;

pub use error::Error;
pub use extnum::ExtReal;
pub use point::Point;
pub use rat::Rat;
pub use verdict::{Verdict, Witness};
