//! Brute-force simulation of the quantum SWITCH of two qubit channels.
//!
//! This is the ground truth the closed forms are checked against: the 16
//! SWITCH Kraus operators are built explicitly, the joint control ⊗ system
//! state is evolved by a full Kraus sum, and the control is projected onto a
//! Bloch direction.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::closed_form::BathConfig;
use crate::error::{Error, Result};
use crate::qmat::{self, CMat, CMat2, CMat4, DensityMatrix2, Tolerances};
use crate::thermal::{self, KrausChannel, ThermalParams};

/// Postselection outcomes with probability below this are rejected.
pub const P_MIN: f64 = 1e-12;

/// Maps a polar/azimuthal pair onto `θ ∈ [0, π]`, `φ ∈ [0, 2π)` while keeping
/// the same point on the sphere.
fn normalize_angles(theta: f64, phi: f64) -> (f64, f64) {
    let mut theta = theta.rem_euclid(TAU);
    let mut phi = phi;
    if theta > PI {
        theta = TAU - theta;
        phi += PI;
    }
    (theta, normalize_azimuth(phi))
}

pub(crate) fn normalize_azimuth(phi: f64) -> f64 {
    let p = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if p >= TAU {
        0.0
    } else {
        p
    }
}

fn check_angle(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "angle must be finite",
        })
    }
}

/// Control qubit `ρ_c = (I + n·σ)/2` with Bloch vector
/// `r (sinθ cosφ, sinθ sinφ, cosθ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlSpec {
    r: f64,
    theta: f64,
    phi: f64,
}

impl ControlSpec {
    pub fn new(r: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidParameter {
                name: "r",
                value: r,
                reason: "Bloch radius must lie in [0, 1]",
            });
        }
        check_angle("theta", theta)?;
        check_angle("phi", phi)?;
        let (theta, phi) = normalize_angles(theta, phi);
        Ok(ControlSpec { r, theta, phi })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Measurement direction `(Θ, Φ)` of the control; the postselected outcome
/// is `|ψ⟩ = cos(Θ/2)|0⟩ + e^{iΦ} sin(Θ/2)|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureSpec {
    theta: f64,
    phi: f64,
}

impl MeasureSpec {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        check_angle("Theta", theta)?;
        check_angle("Phi", phi)?;
        let (theta, phi) = normalize_angles(theta, phi);
        Ok(MeasureSpec { theta, phi })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// The other outcome of the same measurement, `(π − Θ, Φ + π)`.
    pub fn antipodal(&self) -> MeasureSpec {
        let (theta, phi) = normalize_angles(PI - self.theta, self.phi + PI);
        MeasureSpec { theta, phi }
    }

    fn ket(&self) -> [Complex64; 2] {
        let half = 0.5 * self.theta;
        [
            Complex64::new(half.cos(), 0.0),
            Complex64::from_polar(half.sin(), self.phi),
        ]
    }
}

/// Joint control ⊗ system state after the SWITCH.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointState4(CMat4);

impl JointState4 {
    /// Validates Hermiticity, unit trace and positivity (eigenvalue floor
    /// `-1e-10`).
    pub fn new(m: CMat4) -> Result<Self> {
        let s = JointState4(m);
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let tol = Tolerances {
            psd: qmat::TOL_PSD_4,
            ..Tolerances::default()
        };
        qmat::validate_density4(&self.0, &tol)
    }

    pub fn matrix(&self) -> &CMat4 {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostselectResult {
    /// Normalized conditional system state.
    pub rho_f: DensityMatrix2,
    /// Success probability of the postselected outcome.
    pub prob: f64,
    /// Effective `β_f·Δ` of `rho_f`.
    pub beta_f: f64,
    /// Largest off-diagonal magnitude of the unnormalized conditional state.
    pub max_offdiag: f64,
}

pub fn control_state(c: &ControlSpec) -> DensityMatrix2 {
    let (st, ct) = c.theta.sin_cos();
    let nx = c.r * st * c.phi.cos();
    let ny = c.r * st * c.phi.sin();
    let nz = c.r * ct;
    let m = CMat::<2>([
        [Complex64::new(0.5 * (1.0 + nz), 0.0), Complex64::new(0.5 * nx, -0.5 * ny)],
        [Complex64::new(0.5 * nx, 0.5 * ny), Complex64::new(0.5 * (1.0 - nz), 0.0)],
    ]);
    DensityMatrix2::new_unchecked(m)
}

/// The 16 SWITCH operators
/// `M_ij = |0⟩⟨0| ⊗ K2_i K1_j + |1⟩⟨1| ⊗ K1_j K2_i`,
/// stored at index `4*i + j` (`i` runs over `e2`, `j` over `e1`).
pub fn switch_kraus(e1: &KrausChannel, e2: &KrausChannel) -> [CMat4; 16] {
    let p0 = CMat2::from_real_diag([1.0, 0.0]);
    let p1 = CMat2::from_real_diag([0.0, 1.0]);
    let mut out = [CMat4::zeros(); 16];
    for (i, k2) in e2.ops().iter().enumerate() {
        for (j, k1) in e1.ops().iter().enumerate() {
            out[4 * i + j] = qmat::kron(&p0, &(*k2 * *k1)) + qmat::kron(&p1, &(*k1 * *k2));
        }
    }
    out
}

/// `Σ_ij M_ij (ρ_c ⊗ ρ) M_ij†`
pub fn apply_switch(
    c: &ControlSpec,
    rho_i: &DensityMatrix2,
    e1: &KrausChannel,
    e2: &KrausChannel,
) -> JointState4 {
    let input = qmat::kron(control_state(c).matrix(), rho_i.matrix());
    let out: CMat4 = switch_kraus(e1, e2).iter().map(|m| m.sandwich(&input)).sum();
    JointState4(out)
}

/// Unnormalized conditional system state `⟨ψ|S|ψ⟩` and its trace.
pub fn conditional_state(joint: &JointState4, m: &MeasureSpec) -> (CMat2, f64) {
    let psi = m.ket();
    let mut block = CMat2::zeros();
    for a in 0..2 {
        for b in 0..2 {
            let w = psi[a].conj() * psi[b];
            block = block + qmat::control_block(&joint.0, a, b).scale(w);
        }
    }
    let prob = block.trace().re;
    (block, prob)
}

pub fn postselect(joint: &JointState4, m: &MeasureSpec) -> Result<PostselectResult> {
    postselect_with(joint, m, P_MIN)
}

/// As [`postselect`] with an explicit zero-probability cutoff.
pub fn postselect_with(joint: &JointState4, m: &MeasureSpec, p_min: f64) -> Result<PostselectResult> {
    let (block, prob) = conditional_state(joint, m);
    if !(prob >= p_min) {
        return Err(Error::ZeroProbabilityPostselection {
            prob,
            measure_theta: m.theta,
            measure_phi: m.phi,
        });
    }
    let max_offdiag = block.max_offdiag();
    let normalized = block.scale_real(1.0 / prob);
    let beta_f = thermal::beta_from_populations_checked(&normalized)?;
    let rho_f = DensityMatrix2::new(normalized)?;
    Ok(PostselectResult {
        rho_f,
        prob,
        beta_f,
        max_offdiag,
    })
}

/// Both thermal channels built from `baths`, the system prepared thermally
/// at `β_i`, SWITCH applied, control postselected along `m`.
pub fn oracle_beta_f(baths: &BathConfig, c: &ControlSpec, m: &MeasureSpec) -> Result<PostselectResult> {
    let joint = oracle_joint_state(baths, c)?;
    postselect(&joint, m)
}

pub fn oracle_joint_state(baths: &BathConfig, c: &ControlSpec) -> Result<JointState4> {
    let e1 = thermal::thermal_kraus(ThermalParams::new(baths.beta_t1())?);
    let e2 = thermal::thermal_kraus(ThermalParams::new(baths.beta_t2())?);
    let rho_i = thermal::thermal_state(ThermalParams::new(baths.beta_i())?);
    Ok(apply_switch(c, &rho_i, &e1, &e2))
}
