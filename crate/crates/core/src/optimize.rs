//! Numerical extremization of `β_f` over the measurement direction, and the
//! sweeps built on it.
//!
//! The search evaluates `β_f` on a coarse `(Θ, Φ)` grid, seeds local
//! refinement from the best grid-local extrema, then alternates
//! golden-section searches along Θ and Φ. A few three-point parabolic steps
//! finish each coordinate, which pins the angles far below the golden
//! section's resolution on flat optima. Points whose postselection
//! probability does not exceed `min_prob` are infeasible.

use std::cmp::Ordering;
use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::closed_form::{beta_f_general, success_prob_general, BathConfig};
use crate::error::{Error, Result};
use crate::sweep::{check_grid, linspace, Axis, SweepTable};
use crate::switch_sim::{ControlSpec, MeasureSpec, P_MIN};

/// Values closer than this are treated as tied.
const TIE_TOL: f64 = 1e-12;
/// Step of the finishing parabolic fits.
const POLISH_STEP: f64 = 1e-5;
const POLISH_ROUNDS: usize = 4;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    /// Coarse grid points along Θ ∈ [0, π], endpoints included.
    pub grid_theta: usize,
    /// Coarse grid points along Φ ∈ [0, 2π), endpoint excluded.
    pub grid_phi: usize,
    /// Golden-section bracket width at which refinement stops.
    pub angle_tol: f64,
    /// Feasibility threshold on the success probability.
    pub min_prob: f64,
    /// Number of grid-local extrema refined.
    pub seeds: usize,
    pub max_sweeps: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            grid_theta: 181,
            grid_phi: 73,
            angle_tol: 1e-9,
            min_prob: P_MIN,
            seeds: 4,
            max_sweeps: 200,
        }
    }
}

impl OptimizerSettings {
    fn validate(&self) -> Result<()> {
        if self.grid_theta < 2 || self.grid_phi < 1 {
            return Err(Error::InvalidGrid(format!(
                "coarse grid {}x{} too small (need at least 2x1)",
                self.grid_theta, self.grid_phi
            )));
        }
        if !(self.angle_tol > 0.0) || self.seeds == 0 {
            return Err(Error::InvalidGrid("angle tolerance and seed count must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremum {
    pub beta_f: f64,
    /// Θ
    pub measure_theta: f64,
    /// Φ
    pub measure_phi: f64,
    pub prob: f64,
}

impl Extremum {
    pub fn angles(&self) -> MeasureSpec {
        MeasureSpec::new(self.measure_theta, self.measure_phi).expect("finite angles")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremaResult {
    pub beta_f_max: f64,
    pub angles_max: MeasureSpec,
    pub prob_max: f64,
    pub beta_f_min: f64,
    pub angles_min: MeasureSpec,
    pub prob_min: f64,
}

impl ExtremaResult {
    fn from_pair(max: Extremum, min: Extremum) -> Self {
        ExtremaResult {
            beta_f_max: max.beta_f,
            angles_max: max.angles(),
            prob_max: max.prob,
            beta_f_min: min.beta_f,
            angles_min: min.angles(),
            prob_min: min.prob,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goal {
    Maximize,
    Minimize,
}

impl Goal {
    fn sign(self) -> f64 {
        match self {
            Goal::Maximize => 1.0,
            Goal::Minimize => -1.0,
        }
    }
}

#[derive(Clone, Copy)]
struct Objective<'a> {
    baths: &'a BathConfig,
    control: &'a ControlSpec,
    min_prob: f64,
    goal: Goal,
}

impl Objective<'_> {
    fn eval(&self, theta: f64, phi: f64) -> Option<Extremum> {
        let theta = theta.clamp(0.0, PI);
        let m = MeasureSpec::new(theta, phi).ok()?;
        let prob = success_prob_general(self.baths, self.control, &m);
        if !(prob > self.min_prob) {
            return None;
        }
        let beta_f = beta_f_general(self.baths, self.control, &m).ok()?;
        Some(Extremum {
            beta_f,
            measure_theta: m.theta(),
            measure_phi: m.phi(),
            prob,
        })
    }

    fn score(&self, theta: f64, phi: f64) -> f64 {
        self.eval(theta, phi)
            .map_or(f64::NEG_INFINITY, |e| self.goal.sign() * e.beta_f)
    }

    /// `Less` when `a` is the better point: higher score, then higher
    /// probability, then smaller Θ, then smaller Φ.
    fn rank(&self, a: &Extremum, b: &Extremum) -> Ordering {
        let sa = self.goal.sign() * a.beta_f;
        let sb = self.goal.sign() * b.beta_f;
        if sa > sb + TIE_TOL {
            return Ordering::Less;
        }
        if sb > sa + TIE_TOL {
            return Ordering::Greater;
        }
        b.prob
            .total_cmp(&a.prob)
            .then(a.measure_theta.total_cmp(&b.measure_theta))
            .then(a.measure_phi.total_cmp(&b.measure_phi))
    }
}

/// Golden-section search for the largest `f` on `[lo, hi]`; returns the
/// best of the converged point and the two endpoints.
fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = (mid, f(mid));
    for x in [lo, hi] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// One parabolic step through `x - h, x, x + h`. Returns the vertex when the
/// fit is concave and the vertex lies inside the stencil.
fn parabolic_step(f: impl Fn(f64) -> f64, x: f64, f0: f64, h: f64) -> Option<f64> {
    let fp = f(x + h);
    let fm = f(x - h);
    let curvature = fp - 2.0 * f0 + fm;
    if !(curvature < 0.0) || !fp.is_finite() || !fm.is_finite() {
        return None;
    }
    let t = -0.5 * h * (fp - fm) / curvature;
    (t.abs() < h).then_some(x + t)
}

fn coarse_phis(settings: &OptimizerSettings, pin_phi: Option<f64>) -> Vec<f64> {
    match pin_phi {
        Some(p) => vec![p],
        None => (0..settings.grid_phi)
            .map(|k| TAU * k as f64 / settings.grid_phi as f64)
            .collect(),
    }
}

fn search(obj: Objective<'_>, settings: &OptimizerSettings, pin_phi: Option<f64>) -> Result<Extremum> {
    let thetas = linspace(0.0, PI, settings.grid_theta);
    let phis = coarse_phis(settings, pin_phi);
    let (nt, np) = (thetas.len(), phis.len());

    let grid: Vec<Option<Extremum>> = (0..nt * np)
        .into_par_iter()
        .map(|idx| obj.eval(thetas[idx / np], phis[idx % np]))
        .collect();
    let score = |idx: usize| {
        grid[idx].map_or(f64::NEG_INFINITY, |e| obj.goal.sign() * e.beta_f)
    };

    // grid-local extrema (Φ wraps around)
    let mut seeds: Vec<(usize, Extremum)> = Vec::new();
    for i in 0..nt {
        for j in 0..np {
            let idx = i * np + j;
            let Some(e) = grid[idx] else { continue };
            let s = score(idx);
            let mut neighbours = Vec::with_capacity(8);
            for di in [-1i64, 0, 1] {
                let ii = i as i64 + di;
                if ii < 0 || ii >= nt as i64 {
                    continue;
                }
                for dj in [-1i64, 0, 1] {
                    if (di, dj) == (0, 0) || (np == 1 && dj != 0) {
                        continue;
                    }
                    let jj = (j as i64 + dj).rem_euclid(np as i64) as usize;
                    neighbours.push(ii as usize * np + jj);
                }
            }
            if neighbours.iter().all(|&n| score(n) <= s) {
                seeds.push((idx, e));
            }
        }
    }
    if seeds.is_empty() {
        return Err(Error::NoFeasiblePoint {
            min_prob: settings.min_prob,
        });
    }
    seeds.sort_by(|a, b| obj.rank(&a.1, &b.1));
    seeds.truncate(settings.seeds);

    let h_theta = PI / (nt - 1) as f64;
    let h_phi = TAU / np as f64;
    let refined: Vec<Extremum> = seeds
        .par_iter()
        .map(|&(idx, start)| {
            let seed = (thetas[idx / np], phis[idx % np]);
            refine(obj, seed, h_theta, h_phi, pin_phi.is_some(), settings).unwrap_or(start)
        })
        .collect();

    let mut best = refined[0];
    for e in &refined[1..] {
        if obj.rank(e, &best) == Ordering::Less {
            best = *e;
        }
    }
    Ok(best)
}

fn refine(
    obj: Objective<'_>,
    (mut theta, mut phi): (f64, f64),
    h_theta: f64,
    h_phi: f64,
    phi_pinned: bool,
    settings: &OptimizerSettings,
) -> Option<Extremum> {
    let mut current = obj.score(theta, phi);
    for _ in 0..settings.max_sweeps {
        let (t_new, s_new) = golden_max(
            |t| obj.score(t, phi),
            (theta - h_theta).max(0.0),
            (theta + h_theta).min(PI),
            settings.angle_tol,
        );
        let mut moved = 0.0;
        if s_new >= current {
            moved += (t_new - theta).abs();
            theta = t_new;
            current = s_new;
        }
        if !phi_pinned {
            let (p_new, s_new) = golden_max(
                |p| obj.score(theta, p),
                phi - h_phi,
                phi + h_phi,
                settings.angle_tol,
            );
            if s_new >= current {
                moved += (p_new - phi).abs();
                phi = p_new;
                current = s_new;
            }
        }
        if moved < settings.angle_tol {
            break;
        }
    }

    // Accept a parabolic vertex unless it is worse than the current point by
    // more than rounding.
    let slack = |s: f64| 4.0 * f64::EPSILON * s.abs().max(1.0);
    for _ in 0..POLISH_ROUNDS {
        if theta - POLISH_STEP >= 0.0 && theta + POLISH_STEP <= PI {
            if let Some(t) = parabolic_step(|t| obj.score(t, phi), theta, current, POLISH_STEP) {
                let s = obj.score(t, phi);
                if s >= current - slack(current) {
                    theta = t;
                    current = s;
                }
            }
        }
        if !phi_pinned {
            if let Some(p) = parabolic_step(|p| obj.score(theta, p), phi, current, POLISH_STEP) {
                let s = obj.score(theta, p);
                if s >= current - slack(current) {
                    phi = p;
                    current = s;
                }
            }
        }
    }
    obj.eval(theta, phi)
}

/// Global maximum and minimum of `β_f` over `(Θ, Φ)` with default settings.
pub fn find_extrema(b: &BathConfig, c: &ControlSpec) -> Result<ExtremaResult> {
    find_extrema_with(b, c, &OptimizerSettings::default())
}

pub fn find_extrema_with(b: &BathConfig, c: &ControlSpec, settings: &OptimizerSettings) -> Result<ExtremaResult> {
    let max = extremum(b, c, Goal::Maximize, None, settings)?;
    let min = extremum(b, c, Goal::Minimize, None, settings)?;
    Ok(ExtremaResult::from_pair(max, min))
}

/// One extremum; `pin_phi` fixes the measurement azimuth and searches Θ only.
pub fn extremum(
    b: &BathConfig,
    c: &ControlSpec,
    goal: Goal,
    pin_phi: Option<f64>,
    settings: &OptimizerSettings,
) -> Result<Extremum> {
    settings.validate()?;
    let obj = Objective {
        baths: b,
        control: c,
        min_prob: settings.min_prob,
        goal,
    };
    search(obj, settings, pin_phi)
}

/// Verification mode: exhaustive scan of `n_theta × n_phi` points with
/// Θ ∈ [0, π] and Φ ∈ [0, 2π], both endpoints included, no refinement.
pub fn find_extrema_brute(
    b: &BathConfig,
    c: &ControlSpec,
    n_theta: usize,
    n_phi: usize,
    min_prob: f64,
) -> Result<ExtremaResult> {
    if n_theta < 2 || n_phi < 2 {
        return Err(Error::InvalidGrid("brute grid needs at least 2x2 points".into()));
    }
    let thetas = linspace(0.0, PI, n_theta);
    let phis = linspace(0.0, TAU, n_phi);
    let max_obj = Objective {
        baths: b,
        control: c,
        min_prob,
        goal: Goal::Maximize,
    };
    let min_obj = Objective {
        goal: Goal::Minimize,
        ..max_obj
    };
    let pick = |obj: Objective<'_>| -> Option<Extremum> {
        thetas
            .par_iter()
            .filter_map(|&t| {
                phis.iter()
                    .filter_map(|&p| obj.eval(t, p))
                    .min_by(|x, y| obj.rank(x, y))
            })
            .min_by(|x, y| obj.rank(x, y))
    };
    let none = || Error::NoFeasiblePoint { min_prob };
    let max = pick(max_obj).ok_or_else(none)?;
    let min = pick(min_obj).ok_or_else(none)?;
    Ok(ExtremaResult::from_pair(max, min))
}

/// `n` interior points `kπ/(n+1)`, `k = 1..=n`, avoiding the poles where
/// the optimal Θ is not unique.
pub fn interior_theta_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|k| PI * k as f64 / (n + 1) as f64).collect()
}

fn base_metadata(kind: &str, b: &BathConfig) -> Vec<(String, String)> {
    let mut meta = vec![
        ("kind".to_string(), kind.to_string()),
        ("beta_t1".to_string(), b.beta_t1().to_string()),
        ("beta_t2".to_string(), b.beta_t2().to_string()),
        ("beta_i".to_string(), b.beta_i().to_string()),
    ];
    if let Some(n) = b.n() {
        meta.push(("n".to_string(), n.to_string()));
    }
    meta
}

fn settings_metadata(meta: &mut Vec<(String, String)>, s: &OptimizerSettings) {
    meta.push(("grid_theta".to_string(), s.grid_theta.to_string()));
    meta.push(("grid_phi".to_string(), s.grid_phi.to_string()));
    meta.push(("angle_tol".to_string(), s.angle_tol.to_string()));
    meta.push(("min_prob".to_string(), s.min_prob.to_string()));
}

fn version_metadata(meta: &mut Vec<(String, String)>) {
    meta.push(("tool_version".to_string(), env!("CARGO_PKG_VERSION").to_string()));
}

/// For each control polar angle θ (φ = 0), the Θ maximizing `β_f` with the
/// measurement azimuth held at Φ = φ.
pub fn optimal_theta_curve(
    b: &BathConfig,
    r: f64,
    theta_grid: &[f64],
    settings: &OptimizerSettings,
) -> Result<SweepTable> {
    check_grid("theta", theta_grid)?;
    ControlSpec::new(r, 0.0, 0.0)?;
    settings.validate()?;
    let rows: Vec<Option<Extremum>> = theta_grid
        .par_iter()
        .map(|&theta| {
            let c = ControlSpec::new(r, theta, 0.0).ok()?;
            extremum(b, &c, Goal::Maximize, Some(0.0), settings).ok()
        })
        .collect();

    let mut meta = base_metadata("theta-curve", b);
    meta.push(("r".to_string(), r.to_string()));
    meta.push(("phi".to_string(), "0".to_string()));
    meta.push(("Phi".to_string(), "0".to_string()));
    settings_metadata(&mut meta, settings);
    version_metadata(&mut meta);

    SweepTable::new(
        meta,
        vec![Axis::new("theta", theta_grid.to_vec())?],
        vec!["Theta_opt".into(), "beta_f_max".into()],
        vec![
            rows.iter().map(|e| e.map_or(f64::NAN, |e| e.measure_theta)).collect(),
            rows.iter().map(|e| e.map_or(f64::NAN, |e| e.beta_f)).collect(),
        ],
        rows.iter().map(Option::is_none).collect(),
    )
}

/// `Δβ = β_f − β_T1` over `(θ, Θ)` with φ = 0 and Φ = `delta_phi`.
pub fn heatmap(
    b: &BathConfig,
    r: f64,
    delta_phi: f64,
    theta_grid: &[f64],
    measure_theta_grid: &[f64],
) -> Result<SweepTable> {
    check_grid("theta", theta_grid)?;
    check_grid("Theta", measure_theta_grid)?;
    ControlSpec::new(r, 0.0, 0.0)?;
    MeasureSpec::new(0.0, delta_phi)?;
    let nm = measure_theta_grid.len();
    let cells: Vec<Option<f64>> = (0..theta_grid.len() * nm)
        .into_par_iter()
        .map(|idx| {
            let c = ControlSpec::new(r, theta_grid[idx / nm], 0.0).ok()?;
            let m = MeasureSpec::new(measure_theta_grid[idx % nm], delta_phi).ok()?;
            if !(success_prob_general(b, &c, &m) > P_MIN) {
                return None;
            }
            beta_f_general(b, &c, &m).ok().map(|v| v - b.beta_t1())
        })
        .collect();

    let mut meta = base_metadata("heatmap", b);
    meta.push(("r".to_string(), r.to_string()));
    meta.push(("phi".to_string(), "0".to_string()));
    meta.push(("delta_phi".to_string(), delta_phi.to_string()));
    meta.push(("p_min".to_string(), P_MIN.to_string()));
    version_metadata(&mut meta);

    SweepTable::new(
        meta,
        vec![
            Axis::new("theta", theta_grid.to_vec())?,
            Axis::new("Theta", measure_theta_grid.to_vec())?,
        ],
        vec!["delta_beta".into()],
        vec![cells.iter().map(|v| v.unwrap_or(f64::NAN)).collect()],
        cells.iter().map(Option::is_none).collect(),
    )
}

/// Per control angle θ (φ = 0): the extrema over `(Θ, Φ)`.
pub fn extrema_over_theta(
    b: &BathConfig,
    r: f64,
    theta_grid: &[f64],
    settings: &OptimizerSettings,
) -> Result<SweepTable> {
    check_grid("theta", theta_grid)?;
    ControlSpec::new(r, 0.0, 0.0)?;
    settings.validate()?;
    let rows = theta_layer(b, r, theta_grid, settings);

    let mut meta = base_metadata("extrema-vs-theta", b);
    meta.push(("r".to_string(), r.to_string()));
    meta.push(("phi".to_string(), "0".to_string()));
    settings_metadata(&mut meta, settings);
    version_metadata(&mut meta);

    let col = |f: fn(&ExtremaResult) -> f64| -> Vec<f64> {
        rows.iter().map(|e| e.as_ref().map_or(f64::NAN, f)).collect()
    };
    SweepTable::new(
        meta,
        vec![Axis::new("theta", theta_grid.to_vec())?],
        [
            "beta_f_max", "Theta_max", "Phi_max", "prob_max", "beta_f_min", "Theta_min", "Phi_min",
            "prob_min",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
        vec![
            col(|e| e.beta_f_max),
            col(|e| e.angles_max.theta()),
            col(|e| e.angles_max.phi()),
            col(|e| e.prob_max),
            col(|e| e.beta_f_min),
            col(|e| e.angles_min.theta()),
            col(|e| e.angles_min.phi()),
            col(|e| e.prob_min),
        ],
        rows.iter().map(Option::is_none).collect(),
    )
}

fn theta_layer(
    b: &BathConfig,
    r: f64,
    theta_grid: &[f64],
    settings: &OptimizerSettings,
) -> Vec<Option<ExtremaResult>> {
    theta_grid
        .par_iter()
        .map(|&theta| {
            let c = ControlSpec::new(r, theta, 0.0).ok()?;
            find_extrema_with(b, &c, settings).ok()
        })
        .collect()
}

/// Extremal `β_f` over `(θ, Θ, Φ)` for one bath configuration: `(max, θ at
/// max, min, θ at min)`. θ runs over `theta_grid`, `(Θ, Φ)` are optimized.
pub fn global_extrema(
    b: &BathConfig,
    r: f64,
    theta_grid: &[f64],
    settings: &OptimizerSettings,
) -> Result<(f64, f64, f64, f64)> {
    check_grid("theta", theta_grid)?;
    let rows = theta_layer(b, r, theta_grid, settings);
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for (theta, row) in theta_grid.iter().zip(&rows) {
        let Some(e) = row else { continue };
        best = Some(match best {
            None => (e.beta_f_max, *theta, e.beta_f_min, *theta),
            Some((mx, tmx, mn, tmn)) => {
                let (mx, tmx) = if e.beta_f_max > mx + TIE_TOL { (e.beta_f_max, *theta) } else { (mx, tmx) };
                let (mn, tmn) = if e.beta_f_min < mn - TIE_TOL { (e.beta_f_min, *theta) } else { (mn, tmn) };
                (mx, tmx, mn, tmn)
            }
        });
    }
    best.ok_or(Error::NoFeasiblePoint {
        min_prob: settings.min_prob,
    })
}

/// Globally optimized `β_f^max / β_T1` and `β_f^min / β_T1` against the bath
/// asymmetry `n = β_T2/β_T1`, for each control purity in `r_list`.
pub fn extrema_vs_n(
    beta_t1: f64,
    beta_i: f64,
    n_grid: &[f64],
    r_list: &[f64],
    theta_grid: &[f64],
    settings: &OptimizerSettings,
) -> Result<SweepTable> {
    if !(beta_t1 > 0.0) {
        return Err(Error::InvalidParameter {
            name: "beta_t1",
            value: beta_t1,
            reason: "normalization by beta_t1 needs beta_t1 > 0",
        });
    }
    check_grid("n", n_grid)?;
    check_grid("r", r_list)?;
    check_grid("theta", theta_grid)?;
    settings.validate()?;
    for &r in r_list {
        ControlSpec::new(r, 0.0, 0.0)?;
    }
    for &n in n_grid {
        BathConfig::with_ratio(beta_t1, n, beta_i)?;
    }
    let nr = r_list.len();
    let cells: Vec<Option<(f64, f64, f64, f64)>> = (0..n_grid.len() * nr)
        .into_par_iter()
        .map(|idx| {
            let b = BathConfig::with_ratio(beta_t1, n_grid[idx / nr], beta_i).ok()?;
            global_extrema(&b, r_list[idx % nr], theta_grid, settings).ok()
        })
        .collect();

    let mut meta = vec![
        ("kind".to_string(), "extrema-vs-n".to_string()),
        ("beta_t1".to_string(), beta_t1.to_string()),
        ("beta_i".to_string(), beta_i.to_string()),
        ("theta_points".to_string(), theta_grid.len().to_string()),
        ("phi".to_string(), "0".to_string()),
    ];
    settings_metadata(&mut meta, settings);
    version_metadata(&mut meta);

    let col = |f: fn(&(f64, f64, f64, f64)) -> f64| -> Vec<f64> {
        cells.iter().map(|c| c.as_ref().map_or(f64::NAN, f)).collect()
    };
    SweepTable::new(
        meta,
        vec![Axis::new("n", n_grid.to_vec())?, Axis::new("r", r_list.to_vec())?],
        vec![
            "beta_f_max_norm".into(),
            "beta_f_min_norm".into(),
            "theta_at_max".into(),
            "theta_at_min".into(),
        ],
        vec![
            cells.iter().map(|c| c.map_or(f64::NAN, |c| c.0 / beta_t1)).collect(),
            cells.iter().map(|c| c.map_or(f64::NAN, |c| c.2 / beta_t1)).collect(),
            col(|c| c.1),
            col(|c| c.3),
        ],
        cells.iter().map(Option::is_none).collect(),
    )
}
