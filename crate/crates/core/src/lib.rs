//! Turing machines compiled into planar gradient flows.

pub mod beltrami;
pub mod curve;
pub mod error;
pub mod field;
pub mod flow;
pub mod io;
pub mod logmag;
pub mod machine;
pub mod quad;
pub mod robust;
pub mod sphere;

pub use error::{Error, Result};
