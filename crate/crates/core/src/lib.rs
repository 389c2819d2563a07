//! Proof-structures of multiplicative exponential linear logic, their Taylor
//! expansion into differential nets, and the reconstruction of a
//! proof-structure from two of its expansion terms.

pub mod components;
pub mod error;
pub mod id;
pub mod io;
pub mod iso;
pub mod net;
pub mod ops;
pub mod rebuild;
pub mod relsem;
pub mod taylor;
pub mod validate;

pub use error::{Error, Result};
pub use id::{Path, PortId};
pub use net::{BoxData, Label, Net};
