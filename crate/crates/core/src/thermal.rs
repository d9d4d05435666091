//! Gibbs states of the qubit `H = Δ|1⟩⟨1|` and the thermalizing channel.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmat::{self, pauli, CMat2, DensityMatrix2};

/// Largest off-diagonal magnitude for which a state still counts as diagonal
/// when extracting an inverse temperature.
pub const TOL_STATE_DIAGONAL: f64 = 1e-10;
/// Populations at or below this are treated as zero.
pub const MIN_POPULATION: f64 = 1e-300;

/// Dimensionless inverse temperature `β·Δ`. Zero (infinite temperature) is
/// accepted; negative or non-finite values are not.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ThermalParams {
    beta_delta: f64,
}

impl ThermalParams {
    pub fn new(beta_delta: f64) -> Result<Self> {
        if !beta_delta.is_finite() || beta_delta < 0.0 {
            return Err(Error::InvalidParameter {
                name: "beta_delta",
                value: beta_delta,
                reason: "must be finite and nonnegative",
            });
        }
        Ok(ThermalParams { beta_delta })
    }

    pub fn beta_delta(&self) -> f64 {
        self.beta_delta
    }
}

/// A qubit channel with exactly four Kraus operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrausChannel {
    kraus_ops: [CMat2; 4],
}

impl KrausChannel {
    /// Builds a channel; fails if `Σ K†K` deviates from the identity by more
    /// than `1e-12`.
    pub fn new(kraus_ops: [CMat2; 4]) -> Result<Self> {
        let ch = KrausChannel { kraus_ops };
        let violation = check_cptp(&ch);
        if violation > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "kraus completeness violation",
                value: violation,
                reason: "sum of K^dagger K must equal the identity",
            });
        }
        Ok(ch)
    }

    /// Builds a channel without the completeness check, e.g. to probe
    /// [`check_cptp`] itself.
    pub fn from_ops_unchecked(kraus_ops: [CMat2; 4]) -> Self {
        KrausChannel { kraus_ops }
    }

    /// The identity channel, `K_1 = I` padded with three zero operators.
    pub fn identity() -> Self {
        KrausChannel {
            kraus_ops: [CMat2::identity(), CMat2::zeros(), CMat2::zeros(), CMat2::zeros()],
        }
    }

    pub fn ops(&self) -> &[CMat2; 4] {
        &self.kraus_ops
    }
}

fn boltzmann_factor(p: ThermalParams) -> f64 {
    (-p.beta_delta).exp()
}

/// `diag(1, e^{-βΔ}) / (1 + e^{-βΔ})`
pub fn thermal_state(p: ThermalParams) -> DensityMatrix2 {
    let w = boltzmann_factor(p);
    let z = 1.0 + w;
    DensityMatrix2::new_unchecked(CMat2::from_real_diag([1.0 / z, w / z]))
}

/// Effective `β·Δ = -ln(ρ_11/ρ_00)` of a diagonal state.
pub fn beta_from_state(rho: &DensityMatrix2) -> Result<f64> {
    beta_from_populations_checked(rho.matrix())
}

pub(crate) fn beta_from_populations_checked(m: &CMat2) -> Result<f64> {
    let off = m.max_offdiag();
    if off > TOL_STATE_DIAGONAL {
        return Err(Error::NonDiagonalState { max_offdiag: off });
    }
    let ground = m[(0, 0)].re;
    let excited = m[(1, 1)].re;
    if ground <= MIN_POPULATION || excited <= MIN_POPULATION {
        return Err(Error::DegeneratePopulation { ground, excited });
    }
    Ok(-(excited.ln() - ground.ln()))
}

/// The four-operator thermalizing channel `K_k = A σ_k / √2` with
/// `A = √ρ_T` and `σ_k ∈ (I, σ_x, σ_y, σ_z)`, in that order.
pub fn thermal_kraus(p: ThermalParams) -> KrausChannel {
    let a = qmat::diag_sqrt(thermal_state(p).matrix())
        .expect("thermal state is diagonal with positive populations");
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let a = a.scale(s);
    KrausChannel {
        kraus_ops: [a, a * pauli::x(), a * pauli::y(), a * pauli::z()],
    }
}

/// `Σ K ρ K†`
pub fn apply_channel(ch: &KrausChannel, rho: &DensityMatrix2) -> DensityMatrix2 {
    let out: CMat2 = ch.kraus_ops.iter().map(|k| k.sandwich(rho.matrix())).sum();
    DensityMatrix2::new_unchecked(out)
}

/// `max |Σ K†K − I|` over entries.
pub fn check_cptp(ch: &KrausChannel) -> f64 {
    let sum: CMat2 = ch.kraus_ops.iter().map(|k| k.adjoint() * *k).sum();
    sum.max_abs_diff(&CMat2::identity())
}
