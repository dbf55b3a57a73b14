//! Thermal stability of `Z_d` quantum double memories on the torus:
//! qudit Pauli algebra, syndromes and anyon masses, the constructive
//! energy-barrier path, defect lines, and Pauli-frame thermal dynamics.

pub mod barrier;
pub mod config;
pub mod defects;
pub mod error;
pub mod fixtures;
pub mod flow;
pub mod lattice;
pub mod masses;
pub mod multiset;
pub mod oracle;
pub mod qudit;
pub mod scalar;
pub mod thermal;

pub use barrier::{path_barrier, schedule_path, LocalErrorsPath};
pub use config::{ErrorFile, SimConfig};
pub use defects::{DefectConfig, Defects};
pub use error::{Error, Result};
pub use lattice::{LogicalClass, Sector, Syndrome, TorusLattice};
pub use masses::{MassSpec, MassTable};
pub use multiset::Multiset;
pub use qudit::{DitVector, PauliError, QuditStep};
pub use scalar::{Energy, Exact, ThermalScalar};

pub type MassTableF64 = MassTable<f64>;
pub type MassTableF32 = MassTable<f32>;
pub type MassTableExact = MassTable<Exact>;
pub type PathF64 = LocalErrorsPath<f64>;
pub type PathExact = LocalErrorsPath<Exact>;
pub type DynamicsF64 = thermal::Dynamics<f64>;
pub type RateModelF64 = thermal::RateModel<f64>;
