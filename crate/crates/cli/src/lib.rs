//! Document format, commands and reports of the `chansteer` binary.

pub mod commands;
pub mod doc;
pub mod fixtures;
pub mod report;

pub use doc::{parse, DocError, Document, Kind, Payload};
pub use report::{Report, Status};
