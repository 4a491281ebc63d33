//! Density evolution, EBP curve tracing and finite-length simulation for
//! spatially-coupled MacKay-Neal codes over channels whose output is an
//! affine subspace of F_2^m.

pub mod channel;
pub mod cli;
pub mod de;
pub mod ensemble;
pub mod gf2;
pub mod sim;
