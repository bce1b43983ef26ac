//! Exact polynomial integrals over the real orthogonal group `O_n`.

pub mod error;
pub mod exactnum;
pub mod integrals;
pub mod matrix;
pub mod normalization;
pub mod pairings;
pub mod spheremodel;
pub mod threerow;
pub mod verify;
pub mod weingarten;

pub use error::{Error, Result};
pub use exactnum::{bracket, dfact, BracketSpec, Rational};
pub use integrals::{i_value, j_value, Method};
pub use matrix::ExponentMatrix;
pub use pairings::{Pairing, TypeAssignment, TypeMatrix};
