//! Exact intersection searching among segments, triangles and tetrahedra in R^4.

pub mod error;
pub mod kernel;

pub use error::{Error, Result};
pub mod oracle;
pub mod report;

pub use report::{Hit, IntersectionReport, QueryMode, ReportBuilder};
pub mod rangetree;
pub mod arrangement;
pub mod cli;
pub mod ccd;
pub mod complexity;
pub mod scene;
