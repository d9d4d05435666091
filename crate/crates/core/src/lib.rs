//! Thermalization of a two-level system under a quantum SWITCH of two
//! thermalizing channels.
//!
//! All inverse temperatures are carried as dimensionless products `β·Δ`
//! (Δ is the qubit gap). Angles are radians. The tensor ordering of joint
//! states is control ⊗ system throughout.
//!
//! * [`qmat`]: fixed-size 2×2 / 4×4 complex matrices and density-matrix checks.
//! * [`thermal`]: Gibbs states and the four-operator thermalizing channel.
//! * [`switch_sim`]: brute-force SWITCH simulation and postselection (the oracle).
//! * [`closed_form`]: direct evaluation of the effective-temperature formulas.
//! * [`optimize`]: numerical extremization over the measurement direction and sweeps.
//! * [`cli`]: the command-line front end.

pub mod cli;
pub mod closed_form;
mod error;
pub mod optimize;
pub mod qmat;
pub mod sweep;
pub mod switch_sim;
pub mod thermal;

pub use closed_form::{AlphaCoeffs, BathConfig};
pub use error::{Error, Result};
pub use qmat::{CMat2, CMat4, DensityMatrix2};
pub use switch_sim::{ControlSpec, JointState4, MeasureSpec, PostselectResult};
pub use thermal::{KrausChannel, ThermalParams};
