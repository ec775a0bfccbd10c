//! Ramification filtrations of explicit towers over F_q((t)).

pub mod error;
pub mod finite_field;
pub mod galois;
pub mod expr;
pub mod laurent;
pub mod pgroups;
pub mod ramification;
pub mod tower;
pub mod witness;

pub use error::{Error, Result};
pub use finite_field::{Fq, FqElem, FqField};
pub use laurent::LaurentSeries;
