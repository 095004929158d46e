//! Few-point cubature formulas of odd degree for symmetric product weights
//! and for the sphere, built from Smolyak sparse grids and regular simplex
//! point sets, with exactness certification and lower bounds.

pub mod compose;
pub mod document;
pub mod error;
pub mod formula;
pub mod linalg;
pub mod multi_index;
pub mod smolyak;
pub mod special;
pub mod sphere;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
pub use formula::{Counts, CubatureFormula, Target};
pub use weights::{KnotLadder, ProductWeight, Rule1D, Weight1D};
