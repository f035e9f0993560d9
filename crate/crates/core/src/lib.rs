pub mod effective;
pub mod error;
pub mod floquet;
pub mod lattice;
pub mod linalg;
pub mod spectral;
pub mod topology;

pub use error::{Error, Result};
pub use lattice::{DefectSpec, DriveSpec, Frame, LatticeSpec, ModelConfig};
