pub mod analysis;
pub mod assembly;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod mesh;
pub mod polybasis;
pub mod solvers;
pub mod wgspace;

pub use error::{Result, WgError};
