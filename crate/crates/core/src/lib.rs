pub mod concave;
pub mod convex;
pub mod curve;
pub mod decomp;
pub mod error;
pub mod fixtures;
pub mod geom;
pub mod mc;
pub mod pair;
mod poly;
pub mod quad;
pub mod triangle;

pub use error::{Error, Result};
