//! Closed-form effective inverse temperature and success probability of the
//! postselected system state.
//!
//! Every function works with dimensionless `β·Δ`. Writing
//! `u = 1 + r cosΘ cosθ`, `v = cosΘ + r cosθ` and
//! `s = r sinΘ sinθ cos(Φ − φ)`, the unnormalized conditional state is
//!
//! ```text
//! ¼ [ (1 − r cosθ)(1 − cosΘ) ρ_T1 + (1 + r cosθ)(1 + cosΘ) ρ_T2 + 2 s ρ_T1 ρ_i ρ_T2 ]
//! ```
//!
//! and its populations give `β_f` through the α coefficients below.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::switch_sim::{normalize_azimuth, ControlSpec, MeasureSpec};

/// Smallest accepted closed-form denominator (ground-population weight).
pub const MIN_DENOMINATOR: f64 = 1e-12;

/// Above this ratio between numerator and denominator the logarithm is
/// taken as `ln N − ln D`.
const SPLIT_LOG_RATIO: f64 = 1e8;

fn check_beta(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "inverse temperature must be finite and nonnegative",
        })
    }
}

/// Inverse temperatures of the two baths and of the initial system state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathConfig {
    beta_t1: f64,
    beta_t2: f64,
    beta_i: f64,
}

impl BathConfig {
    pub fn new(beta_t1: f64, beta_t2: f64, beta_i: f64) -> Result<Self> {
        Ok(BathConfig {
            beta_t1: check_beta("beta_t1", beta_t1)?,
            beta_t2: check_beta("beta_t2", beta_t2)?,
            beta_i: check_beta("beta_i", beta_i)?,
        })
    }

    pub fn identical(beta_t: f64, beta_i: f64) -> Result<Self> {
        Self::new(beta_t, beta_t, beta_i)
    }

    /// Second bath at `β_T2 = n β_T1`.
    pub fn with_ratio(beta_t1: f64, n: f64, beta_i: f64) -> Result<Self> {
        let n = check_beta("n", n)?;
        Self::new(beta_t1, n * beta_t1, beta_i)
    }

    pub fn beta_t1(&self) -> f64 {
        self.beta_t1
    }

    pub fn beta_t2(&self) -> f64 {
        self.beta_t2
    }

    pub fn beta_i(&self) -> f64 {
        self.beta_i
    }

    /// Asymmetry ratio `β_T2 / β_T1`, undefined when `β_T1 = 0`.
    pub fn n(&self) -> Option<f64> {
        (self.beta_t1 > 0.0).then(|| self.beta_t2 / self.beta_t1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaCoeffs {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
}

pub fn alpha_coeffs(b: &BathConfig) -> AlphaCoeffs {
    let e1 = (-b.beta_t1).exp();
    let e2 = (-b.beta_t2).exp();
    AlphaCoeffs {
        a1: 2.0 * (-(b.beta_t1 + b.beta_t2)).exp() + e1 + e2,
        a2: e1 - e2,
        a3: (-(b.beta_i + b.beta_t1 + b.beta_t2)).exp(),
        a4: 2.0 + e1 + e2,
    }
}

/// Angle-dependent weights shared by all formulas.
#[derive(Debug, Clone, Copy)]
struct AngleTerms {
    /// 1 + r cosΘ cosθ
    diag: f64,
    /// cosΘ + r cosθ
    tilt: f64,
    /// r sinΘ sinθ cos(Φ − φ)
    coherence: f64,
}

impl AngleTerms {
    fn new(c: &ControlSpec, m: &MeasureSpec) -> Self {
        let (st, ct) = c.theta().sin_cos();
        let (sm, cm) = m.theta().sin_cos();
        let r = c.r();
        AngleTerms {
            diag: 1.0 + r * cm * ct,
            tilt: cm + r * ct,
            coherence: r * sm * st * (m.phi() - c.phi()).cos(),
        }
    }
}

fn ln_ratio(num: f64, den: f64) -> f64 {
    let (hi, lo) = if num > den { (num, den) } else { (den, num) };
    if hi > SPLIT_LOG_RATIO * lo {
        num.ln() - den.ln()
    } else {
        (num / den).ln()
    }
}

fn finish(beta_f: f64, num: f64, den: f64, m: &MeasureSpec) -> Result<f64> {
    if !(den >= MIN_DENOMINATOR) {
        return Err(Error::DegenerateDenominator {
            denominator: den,
            measure_theta: m.theta(),
            measure_phi: m.phi(),
        });
    }
    if !(num > 0.0) {
        return Err(Error::DegeneratePopulation {
            ground: den,
            excited: num,
        });
    }
    let value = beta_f - ln_ratio(num, den);
    if value < 0.0 {
        log::debug!("population inversion: beta_f = {value} at Theta={}, Phi={}", m.theta(), m.phi());
    }
    Ok(value)
}

/// `β_f·Δ` for identical baths at `β_T`.
pub fn beta_f_identical(beta_t: f64, beta_i: f64, c: &ControlSpec, m: &MeasureSpec) -> Result<f64> {
    let beta_t = check_beta("beta_t", beta_t)?;
    let beta_i = check_beta("beta_i", beta_i)?;
    let t = AngleTerms::new(c, m);
    let base = (1.0 + (-beta_i).exp()) * (1.0 + (-beta_t).exp()) * t.diag;
    let num = base + (-(beta_i + beta_t)).exp() * t.coherence;
    let den = base + t.coherence;
    finish(beta_t, num, den, m)
}

/// `β_f·Δ` for arbitrary baths.
pub fn beta_f_general(b: &BathConfig, c: &ControlSpec, m: &MeasureSpec) -> Result<f64> {
    let a = alpha_coeffs(b);
    let t = AngleTerms::new(c, m);
    let pre = 1.0 + (-b.beta_i).exp();
    let num = pre * (a.a1 * t.diag - a.a2 * t.tilt) + 2.0 * a.a3 * t.coherence;
    let den = pre * (a.a4 * t.diag + a.a2 * t.tilt) + 2.0 * t.coherence;
    finish(0.0, num, den, m)
}

/// `γ = tr(ρ_T ρ_i ρ_T)`, the weight of the interference term in the
/// success probability for identical baths.
pub fn gamma_coeff(beta_t: f64, beta_i: f64) -> f64 {
    let et = (-beta_t).exp();
    let ei = (-beta_i).exp();
    (1.0 + (-(beta_i + 2.0 * beta_t)).exp()) / ((1.0 + ei) * (1.0 + et) * (1.0 + et))
}

/// `tr(ρ_T1 ρ_i ρ_T2)`; reduces to [`gamma_coeff`] for identical baths.
pub fn gamma_general(b: &BathConfig) -> f64 {
    let e1 = (-b.beta_t1).exp();
    let e2 = (-b.beta_t2).exp();
    let ei = (-b.beta_i).exp();
    (1.0 + (-(b.beta_i + b.beta_t1 + b.beta_t2)).exp()) / ((1.0 + e1) * (1.0 + e2) * (1.0 + ei))
}

/// Postselection success probability for identical baths.
pub fn success_prob(beta_t: f64, beta_i: f64, c: &ControlSpec, m: &MeasureSpec) -> f64 {
    let t = AngleTerms::new(c, m);
    0.5 * (t.diag + gamma_coeff(beta_t, beta_i) * t.coherence)
}

/// Postselection success probability for arbitrary baths: the trace of the
/// unnormalized conditional state.
pub fn success_prob_general(b: &BathConfig, c: &ControlSpec, m: &MeasureSpec) -> f64 {
    let t = AngleTerms::new(c, m);
    // w1 + w2 = 2u exactly; keep the interference weight separate
    0.5 * (t.diag + gamma_general(b) * t.coherence)
}

/// `(p₊, p₋) = ½ sin²θ (1 ± γ)` for a pure control at the analytic optima.
pub fn success_prob_opt(beta_t: f64, beta_i: f64, theta: f64) -> (f64, f64) {
    let g = gamma_coeff(beta_t, beta_i);
    let s2 = theta.sin().powi(2);
    (0.5 * s2 * (1.0 + g), 0.5 * s2 * (1.0 - g))
}

/// Stationary measurement directions of `β_f` for identical baths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticOptima {
    /// Aligned phase, `Φ = φ`: maximum of `β_f` (strongest cooling).
    pub max: MeasureSpec,
    /// Anti-aligned phase, `Φ = φ + π`: minimum of `β_f`.
    pub min: MeasureSpec,
}

pub fn analytic_optima_identical(c: &ControlSpec) -> AnalyticOptima {
    let cos_arg = (c.r() * (PI - c.theta()).cos()).clamp(-1.0, 1.0);
    let theta_m = cos_arg.acos();
    let max = MeasureSpec::new(theta_m, c.phi()).expect("finite angles");
    let min = MeasureSpec::new(theta_m, normalize_azimuth(c.phi() + PI)).expect("finite angles");
    AnalyticOptima { max, min }
}
