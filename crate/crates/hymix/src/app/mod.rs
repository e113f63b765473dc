//! Manufactured solutions, error evaluation, configuration, and the study
//! drivers behind the command line interface.

pub mod manufactured;

pub use manufactured::ManufacturedSolution;
