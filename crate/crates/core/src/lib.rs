//! Two-dimensional Huygens potentials and their Hadamard coefficients.

pub mod chebyshev;
pub mod error;
pub mod hadamard;
pub mod kdata;
mod laurent;
pub mod numeric;
pub mod rational;
pub mod scalar;
pub mod separated;
pub mod spectral;
mod text;
pub mod trig;
pub mod trig2;
pub mod verify;
pub mod wronskian;

pub use error::{Error, Result};
pub use kdata::{KData, Phase};
pub use rational::{Denominator, Rational, TrigRational, TrigRational2, Var};
pub use scalar::{Mode, Scalar};
pub use trig::{Basis, Kind, TrigPoly};
pub use trig2::TrigPoly2;
