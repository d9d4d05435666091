#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use ico_thermal::qmat::CMat2;
use ico_thermal::{BathConfig, ControlSpec, DensityMatrix2, MeasureSpec};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// ρ = G G† / tr(G G†) for a Gaussian-ish random complex G.
pub fn random_density(rng: &mut impl Rng) -> DensityMatrix2 {
    let mut g = CMat2::zeros();
    for r in 0..2 {
        for c in 0..2 {
            g[(r, c)] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let m = g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix2::new(m.scale_real(1.0 / tr)).expect("G G^dagger is a state")
}

pub fn random_cmat2(rng: &mut impl Rng) -> CMat2 {
    let mut g = CMat2::zeros();
    for r in 0..2 {
        for c in 0..2 {
            g[(r, c)] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    g
}

pub fn random_control(rng: &mut impl Rng) -> ControlSpec {
    ControlSpec::new(rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=PI), rng.gen_range(0.0..TAU)).unwrap()
}

pub fn random_measure(rng: &mut impl Rng) -> MeasureSpec {
    MeasureSpec::new(rng.gen_range(0.0..=PI), rng.gen_range(0.0..TAU)).unwrap()
}

pub fn random_baths(rng: &mut impl Rng, lo: f64, hi: f64) -> BathConfig {
    BathConfig::new(rng.gen_range(lo..=hi), rng.gen_range(lo..=hi), rng.gen_range(lo..=hi)).unwrap()
}

/// Smallest distance between two azimuths on the circle.
pub fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}
