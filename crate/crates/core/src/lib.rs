//! Sample-based quantum diagonalization (SQD) on classical hardware.
//!
//! The pipeline runs in three stages: configurations are sampled from a
//! simulated LUCJ state ([`lucj`]), repaired and diagonalized batch by batch
//! ([`recovery`], [`subspace`]), and the resulting energy-variance pairs are
//! extrapolated to zero variance ([`extrapolate`]). [`benchstats`] turns the
//! energies into benchmark error tables.

pub mod benchstats;
pub mod determinant;
pub mod error;
pub mod extrapolate;
pub mod integrals;
pub mod lucj;
pub mod recovery;
pub mod rng;
pub mod subspace;

#[cfg(test)]
pub(crate) mod oracle;

pub use determinant::{excitation_degree, slater_condon, Determinant, DeterminantBasis};
pub use error::{Error, Result};
pub use integrals::{parse_fcidump, write_fcidump, IntegralSet};
pub use lucj::{LucjParams, NoiseModel, ResourceEstimate, SampleSet, SectorState};
pub use recovery::{run_sqd, SqdPlan, SqdResult};
pub use subspace::{EnergyVariancePoint, SubspaceWavefunction};
