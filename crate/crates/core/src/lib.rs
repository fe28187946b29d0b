//! Exact pure-dephasing dynamics of quantum registers whose qubits sit
//! approximately periodically in space and couple to a common bosonic bath.
//!
//! * [`geometry`]: lattice sites with quenched disorder.
//! * [`bath`]: mode spectrum, thermal occupation, spectral moments.
//! * [`dephasing`]: closed-form damping, Lamb phase, reduced density, fidelity.
//! * [`regimes`]: independent/collective classification and disorder averages.
//! * [`codes`]: pairing encodings that suppress collective dephasing.
//! * [`oracle`]: truncated-Fock reference integrator for cross-checks.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod codes;
pub mod dephasing;
pub mod error;
pub mod geometry;
pub mod numeric;
pub mod oracle;
pub mod regimes;

pub use bath::{BathSpectrum, CouplingForm, Dimensionality, Mode, SpectralMoments};
pub use codes::{PairingCode, PairingPlan};
pub use dephasing::{BasisLabel, DephasingModel, PairFactors, ReducedDensity, RegisterState};
pub use error::{Error, Result};
pub use geometry::{RegisterGeometry, Vec3};
pub use numeric::Estimate;
pub use regimes::{Regime, RegimeReport};
