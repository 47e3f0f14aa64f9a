//! Shorts of positive semidefinite forms and the short-type decomposition
//! `t = t_{ker w} + (t - t_{ker w})` into a `w`-absolutely continuous and a `w`-singular part,
//! for Gram matrices, positive operators, charges on finite rings of sets and positive
//! functionals on finite-dimensional *-algebras.

pub mod charges;
pub mod error;
pub mod forms;
pub mod functionals;
pub mod io;
pub mod linalg;
pub mod operator;
pub mod sample;
pub mod verify;

pub use error::{Error, Result};
pub use forms::PsdForm;
pub use linalg::{HermitianMatrix, Subspace, Tolerance};
