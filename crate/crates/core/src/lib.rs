pub mod cli;
pub mod elliptic;
pub mod error;
pub mod functionals;
pub mod nonlinearity;
pub mod pipeline;
pub mod reference;
pub mod sensitivity;
pub mod solver;
pub mod spectral;
pub mod stability;
pub mod verify;

pub use error::{Error, Result};
pub use functionals::{evaluate_functionals, FunctionalRecord};
pub use nonlinearity::Nonlinearity;
pub use reference::{Matrix3, WaveParameters};
pub use solver::{petviashvili_solve, RootSign, SolveOutcome, SolverConfig};
pub use spectral::{PeriodicGrid, WaveProfile};
