//! Verification and certification of no-signaling, quantum and local channel
//! assemblages.

pub mod assemblage;
pub mod certify;
pub mod chanasm;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod quantum;
pub mod random;
pub mod security;
pub mod tolerance;

pub use error::{Error, Result};
pub use tolerance::Tolerances;
