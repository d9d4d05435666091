//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI, TAU};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use ico_thermal::closed_form::{
    analytic_optima_identical, beta_f_general, beta_f_identical, gamma_coeff, success_prob,
    success_prob_opt,
};
use ico_thermal::optimize::{
    find_extrema, global_extrema, interior_theta_grid, optimal_theta_curve, OptimizerSettings,
};
use ico_thermal::qmat::{self, CMat2};
use ico_thermal::switch_sim::{conditional_state, control_state, oracle_beta_f, oracle_joint_state};
use ico_thermal::thermal::thermal_state;
use ico_thermal::{BathConfig, ControlSpec, MeasureSpec, ThermalParams};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rho_t(beta: f64) -> CMat2 {
    *thermal_state(ThermalParams::new(beta).unwrap()).matrix()
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(1001);
    let (mut worst_beta, mut worst_prob, mut n) = (0.0f64, 0.0f64, 0);
    while n < 1000 {
        let b = common::random_baths(&mut rng, 0.05, 10.0);
        let c = common::random_control(&mut rng);
        let m = common::random_measure(&mut rng);
        let Ok(o) = oracle_beta_f(&b, &c, &m) else { continue };
        if o.prob <= 1e-6 {
            continue;
        }
        match beta_f_general(&b, &c, &m) {
            Ok(v) => worst_beta = worst_beta.max((v - o.beta_f).abs()),
            Err(_) => worst_beta = f64::INFINITY,
        }
        // identical-bath probability formula against the simulation
        let bi = BathConfig::identical(b.beta_t1(), b.beta_i()).unwrap();
        let oi = oracle_joint_state(&bi, &c).unwrap();
        let (_, p) = conditional_state(&oi, &m);
        worst_prob = worst_prob.max((success_prob(b.beta_t1(), b.beta_i(), &c, &m) - p).abs());
        n += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst_beta < 1e-9 && worst_prob < 1e-12 && secs < 5.0,
        format!("max|dbeta|={worst_beta:.2e} max|dp|={worst_prob:.2e} draws={n} time={secs:.2}s"),
    )
}

fn reduction_identity() -> Outcome {
    let mut rng = common::rng(1002);
    let (mut worst, mut n) = (0.0f64, 0);
    while n < 200 {
        let bt = rng.gen_range(0.05..10.0);
        let bi = rng.gen_range(0.05..10.0);
        let c = common::random_control(&mut rng);
        let m = common::random_measure(&mut rng);
        let b = BathConfig::identical(bt, bi).unwrap();
        let (Ok(g), Ok(i)) = (beta_f_general(&b, &c, &m), beta_f_identical(bt, bi, &c, &m)) else { continue };
        worst = worst.max((g - i).abs());
        n += 1;
    }
    outcome(worst < 1e-12, format!("max|general-identical|={worst:.2e} draws={n}"))
}

fn classical_limits() -> Outcome {
    let mut rng = common::rng(1003);
    let mut worst = [0.0f64; 4];
    for _ in 0..200 {
        let bt = rng.gen_range(0.05..10.0);
        let bi = rng.gen_range(0.05..10.0);
        let m = common::random_measure(&mut rng);
        let c0 = ControlSpec::new(0.0, rng.gen_range(0.0..PI), rng.gen_range(0.0..TAU)).unwrap();
        worst[0] = worst[0].max((beta_f_identical(bt, bi, &c0, &m).unwrap() - bt).abs());
        let pole = ControlSpec::new(rng.gen_range(0.0..1.0), 0.0, 0.0).unwrap();
        let feasible = MeasureSpec::new(rng.gen_range(0.0..FRAC_PI_2), m.phi()).unwrap();
        worst[1] = worst[1].max((beta_f_identical(bt, bi, &pole, &feasible).unwrap() - bt).abs());
        let b = common::random_baths(&mut rng, 0.05, 10.0);
        let north = ControlSpec::new(1.0, 0.0, 0.0).unwrap();
        let south = ControlSpec::new(1.0, PI, 0.0).unwrap();
        let up = MeasureSpec::new(0.0, 0.0).unwrap();
        let down = MeasureSpec::new(PI, 0.0).unwrap();
        worst[2] = worst[2].max((beta_f_general(&b, &north, &up).unwrap() - b.beta_t2()).abs());
        worst[3] = worst[3].max((beta_f_general(&b, &south, &down).unwrap() - b.beta_t1()).abs());
    }
    outcome(
        worst.iter().all(|w| *w < 1e-12),
        format!(
            "r=0:{:.1e} theta=0:{:.1e} (0,0)->T2:{:.1e} (pi,pi)->T1:{:.1e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn analytic_optima() -> Outcome {
    let mut rng = common::rng(1004);
    let (mut worst_angle, mut worst_grad, mut n) = (0.0f64, 0.0f64, 0);
    let h = 1e-6;
    while n < 100 {
        let c = ControlSpec::new(rng.gen_range(0.05..=1.0), rng.gen_range(0.0..=PI), rng.gen_range(0.0..TAU)).unwrap();
        if c.theta().sin() <= 0.05 {
            continue;
        }
        let bt = rng.gen_range(0.05..10.0);
        let bi = rng.gen_range(0.05..10.0);
        let b = BathConfig::identical(bt, bi).unwrap();
        let got = find_extrema(&b, &c).unwrap();
        let want = analytic_optima_identical(&c);
        for (g, w) in [(got.angles_max, want.max), (got.angles_min, want.min)] {
            worst_angle = worst_angle
                .max((g.theta() - w.theta()).abs())
                .max(common::angle_gap(g.phi(), w.phi()));
            let f = |t: f64, p: f64| beta_f_identical(bt, bi, &c, &MeasureSpec::new(t, p).unwrap()).unwrap();
            let gt = (f(w.theta() + h, w.phi()) - f(w.theta() - h, w.phi())) / (2.0 * h);
            let gp = (f(w.theta(), w.phi() + h) - f(w.theta(), w.phi() - h)) / (2.0 * h);
            worst_grad = worst_grad.max(gt.abs()).max(gp.abs());
        }
        n += 1;
    }
    outcome(
        worst_angle < 1e-6 && worst_grad < 1e-6,
        format!("max angle error={worst_angle:.2e} rad, max |grad|={worst_grad:.2e}, draws={n}"),
    )
}

fn structural_identities() -> Outcome {
    let mut rng = common::rng(1005);
    let (mut joint_err, mut cond_err, mut offdiag, mut compl) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let b = common::random_baths(&mut rng, 0.05, 10.0);
        let c = common::random_control(&mut rng);
        let m = common::random_measure(&mut rng);
        let joint = oracle_joint_state(&b, &c).unwrap();
        let rc = control_state(&c);
        let (t1, t2, ri) = (rho_t(b.beta_t1()), rho_t(b.beta_t2()), rho_t(b.beta_i()));
        let coh = t1 * ri * t2;
        for (a, bb, x) in [(0, 0, t2), (1, 1, t1), (0, 1, coh), (1, 0, coh)] {
            let want = x.scale(rc.matrix()[(a, bb)]);
            joint_err = joint_err.max(qmat::control_block(joint.matrix(), a, bb).max_abs_diff(&want));
        }
        let rz = c.r() * c.theta().cos();
        let cm = m.theta().cos();
        let w1 = 0.25 * (1.0 - rz) * (1.0 - cm);
        let w2 = 0.25 * (1.0 + rz) * (1.0 + cm);
        let w3 = 0.5 * c.r() * m.theta().sin() * c.theta().sin() * (m.phi() - c.phi()).cos();
        let want = t1.scale_real(w1) + t2.scale_real(w2) + coh.scale_real(w3);
        let (block, p) = conditional_state(&joint, &m);
        cond_err = cond_err.max(block.max_abs_diff(&want));
        offdiag = offdiag.max(block.max_offdiag());
        let flipped = MeasureSpec::new(PI - m.theta(), m.phi() + PI).unwrap();
        let (_, q) = conditional_state(&joint, &flipped);
        compl = compl.max((p + q - 1.0).abs());
    }
    outcome(
        joint_err < 1e-12 && cond_err < 1e-12 && offdiag < 1e-12 && compl < 1e-12,
        format!("joint={joint_err:.1e} conditional={cond_err:.1e} offdiag={offdiag:.1e} p+p'-1={compl:.1e}"),
    )
}

fn gamma_bounds() -> Outcome {
    let (lo, hi) = (0.01f64.ln(), 20f64.ln());
    let grid: Vec<f64> = (0..60).map(|k| (lo + (hi - lo) * k as f64 / 59.0).exp()).collect();
    let mut inside = true;
    for &bt in &grid {
        for &bi in &grid {
            let g = gamma_coeff(bt, bi);
            inside &= g > 0.0 && g < 1.0;
        }
    }
    let g20 = gamma_coeff(20.0, 20.0);
    outcome(inside && g20 > 0.999, format!("all in (0,1): {inside}, gamma(20,20)={g20:.12}"))
}

fn extrema_reproduction() -> Outcome {
    let start = Instant::now();
    let grid = interior_theta_grid(91);
    let settings = OptimizerSettings::default();
    let ns = [0.5, 1.0, 2.0];
    let rs = [0.5, 1.0];
    let mut ext = [[(0.0, 0.0); 2]; 3];
    for (i, &n) in ns.iter().enumerate() {
        let b = BathConfig::with_ratio(1.0, n, 1.0).unwrap();
        for (j, &r) in rs.iter().enumerate() {
            let (mx, _, mn, _) = global_extrema(&b, r, &grid, &settings).unwrap();
            ext[i][j] = (mx, mn);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let spread = |i: usize, j: usize| ext[i][j].0 - ext[i][j].1;
    let brackets = (0..3).all(|i| ext[i][1].0 > 1.0 && 1.0 > ext[i][1].1);
    let asym = spread(0, 1) >= spread(1, 1) && spread(2, 1) >= spread(1, 1);
    let purity = (0..3).all(|i| spread(i, 0) < spread(i, 1));
    let mut detail = String::new();
    for (i, n) in ns.iter().enumerate() {
        detail += &format!(
            "n={n}: r=1 [{:.4}, {:.4}] r=0.5 [{:.4}, {:.4}]; ",
            ext[i][1].1, ext[i][1].0, ext[i][0].1, ext[i][0].0
        );
    }
    detail += &format!("time={secs:.2}s");
    outcome(brackets && asym && purity && secs < 30.0, detail)
}

fn theta_curves() -> Outcome {
    let grid = interior_theta_grid(181);
    let settings = OptimizerSettings::default();
    let b = BathConfig::with_ratio(1.0, 1.0, 1.0).unwrap();
    let t = optimal_theta_curve(&b, 1.0, &grid, &settings).unwrap();
    let worst = grid
        .iter()
        .zip(t.column("Theta_opt").unwrap())
        .map(|(th, opt)| (opt - (PI - th)).abs())
        .fold(0.0f64, f64::max);
    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let mut identical = Vec::new();
    for (n, file) in [(0.5, "theta_curve_n0.5.csv"), (2.0, "theta_curve_n2.csv")] {
        let b = BathConfig::with_ratio(1.0, n, 1.0).unwrap();
        let fresh = optimal_theta_curve(&b, 1.0, &grid, &settings).unwrap().to_csv_string();
        let stored = std::fs::read_to_string(golden.join(file)).unwrap_or_default();
        identical.push(fresh == stored);
    }
    outcome(
        worst < 1e-6 && identical.iter().all(|x| *x),
        format!("n=1 max|Theta-(pi-theta)|={worst:.2e}; golden n=0.5:{} n=2:{}", identical[0], identical[1]),
    )
}

fn p_opt_consistency() -> Outcome {
    let b = BathConfig::identical(1.0, 1.0).unwrap();
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for theta in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_2] {
        let c = ControlSpec::new(1.0, theta, 0.0).unwrap();
        let opt = analytic_optima_identical(&c);
        let (pp, pm) = success_prob_opt(1.0, 1.0, theta);
        for (m, lit) in [(opt.max, pp), (opt.min, pm)] {
            let eq = success_prob(1.0, 1.0, &c, &m);
            let oracle = oracle_beta_f(&b, &c, &m).map(|o| o.prob).unwrap_or(f64::NAN);
            worst = worst.max((eq - oracle).abs());
            detail += &format!("[{theta:.4}: oracle={oracle:.12} formula={eq:.12} p_opt={lit:.12}] ");
        }
    }
    outcome(worst < 1e-12, format!("max|oracle-formula|={worst:.1e} {detail}"))
}

fn worked_numbers() -> Outcome {
    let c = ControlSpec::new(1.0, FRAC_PI_2, 0.0).unwrap();
    let m = MeasureSpec::new(FRAC_PI_2, 0.0).unwrap();
    let bf = beta_f_identical(1.0, 1.0, &c, &m).unwrap();
    let p = success_prob(1.0, 1.0, &c, &m);
    let b2 = BathConfig::with_ratio(1.0, 2.0, 1.0).unwrap();
    let bf2 = beta_f_general(&b2, &c, &m).unwrap();
    outcome(
        (bf - 1.3583).abs() <= 5e-4 && (p - 0.7051).abs() <= 5e-4 && (bf2 - 1.8404).abs() <= 5e-4,
        format!("beta_f={bf:.10} p={p:.10} beta_f(n=2)={bf2:.10}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("oracle equivalence", oracle_equivalence),
        ("reduction identity", reduction_identity),
        ("classical limits", classical_limits),
        ("analytic optima", analytic_optima),
        ("structural identities", structural_identities),
        ("gamma bounds", gamma_bounds),
        ("extrema vs bath ratio", extrema_reproduction),
        ("optimal Theta curves", theta_curves),
        ("p_opt consistency", p_opt_consistency),
        ("worked numbers", worked_numbers),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("AC{:<2} {:<24} {}  {}", k + 1, name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
