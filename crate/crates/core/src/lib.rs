//! Discrete Steklov (Dirichlet-to-Neumann) spectra of finite trees with
//! boundary, the boundary-balanced partition constructions behind the known
//! upper bounds for Steklov eigenvalues on trees, and a harness that
//! certifies those bounds against exactly computed spectra.

pub mod bounds;
pub mod config;
pub mod eigen;
pub mod error;
pub mod generators;
pub mod graph;
pub mod harmonic;
pub mod harness;
pub mod io;
pub mod partition;
pub mod spectra;

pub use bounds::{BoundId, BoundReport};
pub use config::Tolerances;
pub use error::{Error, Result};
pub use generators::{FamilySpec, Variant};
pub use graph::{BoundaryTree, Branch, SubtreeRef};
pub use harmonic::{BoundaryFunction, DtnMatrix, VertexFunction};
pub use partition::PartitionCertificate;
pub use spectra::SteklovSpectrum;

/// Schema tag carried by every JSON document the crate writes.
pub const SCHEMA: &str = "steklov-trees/1";
