pub mod audit;
pub mod complex;
pub mod coxeter;
pub mod building;
pub mod error;
pub mod filtration;
pub mod homology;
pub mod metric;
pub mod supports;
pub mod verify;

pub use complex::{Simplex, SimplicialComplex, VertexId, VertexType};
pub use error::{Error, Result};
