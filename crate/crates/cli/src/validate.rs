//! Tiered validation suites and the cross-validation report.
//!
//! * `quick`: closed-form chain, eigenvalues against independent
//!   oracles, viscosity residuals, baseline equivalence (seconds).
//! * `full`: adds the grid Hamilton-Jacobi convergence study (minutes).
//! * `pde`: adds direct parabolic simulations cross-validating every
//!   speed prediction (tens of minutes at most).

use kpp_front_core::eigen::{self, EigenOptions};
use kpp_front_core::fl_explicit::{self, construct_explicit, verify_viscosity};
use kpp_front_core::hj_solver::{self, InitialGuess, JunctionProblem};
use kpp_front_core::simulate::{self, Scheme, Shift, SimConfig};
use kpp_front_core::speed::{baseline_speed, regime_boundaries, rightward_speed, SpeedInputs};
use kpp_front_core::{EnvironmentProfile, Hamiltonian, Regime};

use crate::util::provenance;

pub struct CheckOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, pass: bool, detail: String) -> Self {
        CheckOutcome { name, pass, detail }
    }
}

/// One row of the speed cross-validation: every route to the same number.
#[derive(Debug, Clone)]
pub struct CrossValidationRow {
    pub inputs: SpeedInputs,
    pub c_formula: f64,
    pub s_hat_explicit: f64,
    pub s_hat_numeric: Option<f64>,
    pub c_empirical: Option<f64>,
    pub regime: Regime,
    pub max_pairwise_dev: f64,
    pub pass: bool,
}

#[derive(Debug, Default)]
pub struct CrossValidationReport {
    pub rows: Vec<CrossValidationRow>,
}

impl CrossValidationReport {
    pub fn to_csv(&self, config_repr: &str) -> String {
        let mut out = String::new();
        out.push_str(&provenance(config_repr));
        out.push('\n');
        out.push_str(
            "c1,r_minus,r_plus,lambda1,c_formula,s_hat_explicit,s_hat_numeric,c_empirical,regime,max_pairwise_dev,pass\n",
        );
        for row in &self.rows {
            let num = row
                .s_hat_numeric
                .map(|v| v.to_string())
                .unwrap_or_default();
            let emp = row.c_empirical.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{:?},{},{}\n",
                row.inputs.c1,
                row.inputs.r_minus,
                row.inputs.r_plus,
                row.inputs.lambda1,
                row.c_formula,
                row.s_hat_explicit,
                num,
                emp,
                row.regime,
                row.max_pairwise_dev,
                row.pass
            ));
        }
        out
    }
}

fn xorshift(state: &mut u64) -> f64 {
    *state ^= *state << 13;
    *state ^= *state >> 7;
    *state ^= *state << 17;
    (state.wrapping_mul(0x2545F4914F6CDD1D) >> 11) as f64 / (1u64 << 53) as f64
}

fn random_inputs(state: &mut u64) -> SpeedInputs {
    let range = |state: &mut u64, lo: f64, hi: f64| lo + (hi - lo) * xorshift(state);
    let r_minus = range(state, 0.1, 5.0);
    let r_plus = range(state, 0.1, 5.0);
    let bump = if xorshift(state) < 0.3 {
        0.0
    } else {
        range(state, 0.0, 4.0)
    };
    let lambda1 = r_minus.max(r_plus) + bump;
    let c_hi = 2.0 * (r_minus.sqrt() + (lambda1 - r_minus).sqrt()) + 3.0;
    let c1 = range(state, -2.0, c_hi);
    SpeedInputs {
        c1,
        r_minus,
        r_plus,
        lambda1,
    }
}

pub fn check_closed_form_chain(seed: u64) -> CheckOutcome {
    let mut state = seed.max(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let inp = random_inputs(&mut state);
        let speed = match rightward_speed(&inp) {
            Ok(s) => s,
            Err(e) => return CheckOutcome::new("closed-form chain", false, e.to_string()),
        };
        let sol = match construct_explicit(&inp) {
            Ok(s) => s,
            Err(e) => return CheckOutcome::new("closed-form chain", false, e.to_string()),
        };
        if sol.free_boundary != speed.c_star {
            return CheckOutcome::new(
                "closed-form chain",
                false,
                format!("free boundary mismatch at {inp:?}"),
            );
        }
        // continuity at the three regime boundaries
        let (b1, b2, b3) = regime_boundaries(&inp);
        let case3 = |c1: f64| {
            let mu = 0.5 * c1 - (inp.lambda1 - inp.r_minus).sqrt();
            mu + inp.r_minus / mu
        };
        worst = worst.max((2.0 * inp.r_plus.sqrt() - b1).abs());
        if inp.lambda1 > inp.r_minus {
            worst = worst.max((b2 - case3(b2)).abs());
        }
        worst = worst.max((case3(b3) - 2.0 * inp.r_minus.sqrt()).abs());
        // bounds and regime-specific properties
        let lo = (2.0 * inp.r_minus.sqrt()).min(2.0 * inp.r_plus.sqrt());
        let hi = (2.0 * inp.r_plus.sqrt())
            .max(inp.c1)
            .max(2.0 * inp.r_minus.sqrt());
        let c = speed.c_star;
        if !(c >= lo - 1e-12 && c <= hi + 1e-12) {
            return CheckOutcome::new("closed-form chain", false, format!("bounds fail {inp:?}"));
        }
        if speed.regime == Regime::NonlocalPulling
            && !(c > 2.0 * inp.r_minus.sqrt() - 1e-12 && c < inp.c1 + 1e-12)
        {
            return CheckOutcome::new("closed-form chain", false, format!("pulling fails {inp:?}"));
        }
        let base = baseline_speed(&inp).unwrap().c_star;
        if c < base - 1e-12 {
            return CheckOutcome::new(
                "closed-form chain",
                false,
                format!("enhancement fails {inp:?}"),
            );
        }
    }
    CheckOutcome::new(
        "closed-form chain",
        worst < 1e-12,
        format!("1000 random inputs, worst boundary gap {worst:.2e}"),
    )
}

pub fn check_eigenvalues() -> CheckOutcome {
    let opts = EigenOptions::default();
    let constant = EnvironmentProfile::constant(1.7).unwrap();
    let c = eigen::lambda1(&constant, &opts).unwrap();
    if (c.lambda1 - 1.7).abs() > 1e-6 {
        return CheckOutcome::new("eigenvalues", false, format!("constant: {}", c.lambda1));
    }
    // symmetric square well against the transcendental matching root
    let well = EnvironmentProfile::three_patch(1.0, 2.0, 1.0, 2.0).unwrap();
    let got = eigen::lambda1(&well, &opts).unwrap().lambda1;
    let oracle = square_well_oracle(1.0, 2.0, 2.0);
    if (got - oracle).abs() > 1e-5 {
        return CheckOutcome::new(
            "eigenvalues",
            false,
            format!("square well: {got} vs oracle {oracle}"),
        );
    }
    // three-patch detection threshold against the closed-form length
    let l_bar = threshold_bisect(1.0, 3.0, 2.0);
    let exact = std::f64::consts::FRAC_PI_4;
    if (l_bar - exact).abs() > 1e-3 {
        return CheckOutcome::new(
            "eigenvalues",
            false,
            format!("threshold: {l_bar} vs pi/4 = {exact}"),
        );
    }
    CheckOutcome::new(
        "eigenvalues",
        true,
        format!("well oracle gap {:.2e}, threshold gap {:.2e}", (got - oracle).abs(), (l_bar - exact).abs()),
    )
}

/// Ground state of the symmetric square well by bisection of
/// k tan(k L / 2) = beta.
pub fn square_well_oracle(r_tail: f64, r_mid: f64, l: f64) -> f64 {
    let f = |lam: f64| {
        let k = (r_mid - lam).sqrt();
        (lam - r_tail).sqrt() - k * (k * l / 2.0).tan()
    };
    let mut lo = r_tail + 1e-13;
    let mut hi = r_mid - 1e-13;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Smallest patch length whose eigenvalue exceeds the tail maximum,
/// located by bisection of the detector on a wide, fine grid.
pub fn threshold_bisect(r_minus: f64, r_mid: f64, r_plus: f64) -> f64 {
    let tail_max = r_minus.max(r_plus);
    let opts = EigenOptions {
        half_width_schedule: Some(vec![8000.0]),
        grid_step_schedule: Some(vec![0.04]),
        tol: 1e-6,
    };
    let has_bump = |l: f64| {
        let p = EnvironmentProfile::three_patch(r_minus, r_mid, r_plus, l).unwrap();
        eigen::lambda1(&p, &opts).unwrap().lambda1 > tail_max + 1.5e-7
    };
    let mut lo = 0.5;
    let mut hi = 1.1;
    for _ in 0..12 {
        let mid = 0.5 * (lo + hi);
        if has_bump(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn canonical_points() -> Vec<SpeedInputs> {
    [1.0, 2.5, 3.0, 5.0]
        .iter()
        .map(|&c1| SpeedInputs::new(c1, 1.0, 1.0, 2.0).unwrap())
        .collect()
}

pub fn check_viscosity_residuals() -> CheckOutcome {
    let mut worst = 0.0f64;
    for inp in canonical_points() {
        let sol = construct_explicit(&inp).unwrap();
        let h = Hamiltonian::single(inp.c1, inp.r_minus, inp.r_plus).unwrap();
        let report = verify_viscosity(&sol, &h, sol.flux_limiter, 10_000);
        worst = worst.max(report.worst());
        if !report.pass {
            return CheckOutcome::new(
                "viscosity residuals",
                false,
                format!("c1 = {}: {report:?}", inp.c1),
            );
        }
    }
    CheckOutcome::new(
        "viscosity residuals",
        true,
        format!("four regimes, worst residual {worst:.2e}"),
    )
}

pub fn check_ishii_equivalence() -> CheckOutcome {
    for (r_minus, r_plus) in [(1.0f64, 2.0f64), (2.0, 1.0), (1.5, 1.5)] {
        let lambda = r_minus.max(r_plus);
        for k in 0..40 {
            let c1 = 0.2 + 0.2 * k as f64;
            let inp = SpeedInputs::new(c1, r_minus, r_plus, lambda).unwrap();
            match fl_explicit::ishii_equivalence_check(&inp) {
                Ok(true) => {}
                Ok(false) => {
                    return CheckOutcome::new(
                        "Ishii equivalence",
                        false,
                        format!("gap at c1 = {c1}, r = ({r_minus}, {r_plus})"),
                    )
                }
                Err(e) => return CheckOutcome::new("Ishii equivalence", false, e.to_string()),
            }
        }
    }
    CheckOutcome::new("Ishii equivalence", true, "120 baseline points".into())
}

pub fn check_hj_convergence() -> CheckOutcome {
    let mut detail = String::new();
    for inp in canonical_points() {
        let problem =
            JunctionProblem::single_junction(inp.c1, inp.r_minus, inp.r_plus, inp.lambda1, 12.0)
                .unwrap();
        let explicit = construct_explicit(&inp).unwrap();
        let mut errors = Vec::new();
        for &h in &[4e-3, 2e-3, 1e-3] {
            let sol = hj_solver::solve(&problem, h, 1e-10, 100_000).unwrap();
            let mut sup = 0.0f64;
            for i in 0..sol.values.len() - 2 {
                sup = sup.max((sol.values[i] - explicit.evaluate(sol.node(i))).abs());
            }
            errors.push(sup);
        }
        if errors[2] > 5e-3 {
            return CheckOutcome::new(
                "HJ grid convergence",
                false,
                format!("c1 = {}: error {} at h = 1e-3", inp.c1, errors[2]),
            );
        }
        // the closed-form nodewise solve reproduces the piecewise
        // zero/affine/quadratic solutions to machine precision, in which
        // case the halving ratio is pure rounding noise and first-order
        // convergence holds vacuously
        let machine_exact = errors.iter().all(|e| *e <= 1e-10);
        if !machine_exact {
            for w in errors.windows(2) {
                let ratio = w[0] / w[1];
                if !(1.6..=2.4).contains(&ratio) {
                    return CheckOutcome::new(
                        "HJ grid convergence",
                        false,
                        format!("c1 = {}: halving ratio {ratio:.2} outside 2 +- 20%", inp.c1),
                    );
                }
            }
        }
        // discrete uniqueness at the middle resolution
        let a = hj_solver::solve_with_init(&problem, 2e-3, 1e-10, 100_000, InitialGuess::Zeros)
            .unwrap();
        let b = hj_solver::solve_with_init(&problem, 2e-3, 1e-10, 100_000, InitialGuess::FarField)
            .unwrap();
        let gap = a
            .values
            .iter()
            .zip(&b.values)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        if gap > 1e-9 {
            return CheckOutcome::new(
                "HJ grid convergence",
                false,
                format!("c1 = {}: initializations differ by {gap:.2e}", inp.c1),
            );
        }
        detail.push_str(&format!("c1={}: err(1e-3)={:.1e}; ", inp.c1, errors[2]));
    }
    CheckOutcome::new("HJ grid convergence", true, detail)
}

/// The eigenvalue-2 three-patch used by the PDE cross-validation:
/// tails 1, core 3, patch length pi/2 (transcendental matching gives
/// lambda1 = 2 exactly).
pub fn lambda2_profile() -> EnvironmentProfile {
    EnvironmentProfile::three_patch(1.0, 3.0, 1.0, std::f64::consts::FRAC_PI_2).unwrap()
}

pub fn pde_cross_validation(t_end: f64, dx: f64) -> (CrossValidationReport, CheckOutcome) {
    let mut report = CrossValidationReport::default();
    let profile = lambda2_profile();
    // the realized eigenvalue must sit at 2 within the declared window
    let eig = eigen::lambda1(&profile, &EigenOptions::default()).unwrap();
    if (eig.lambda1 - 2.0).abs() > 0.02 {
        return (
            report,
            CheckOutcome::new(
                "PDE cross-validation",
                false,
                format!("profile eigenvalue {} not within 0.02 of 2", eig.lambda1),
            ),
        );
    }
    let mut all_pass = true;
    let mut detail = String::new();
    for inp in canonical_points() {
        let c_formula = rightward_speed(&inp).unwrap();
        let explicit = construct_explicit(&inp).unwrap();
        let problem =
            JunctionProblem::single_junction(inp.c1, inp.r_minus, inp.r_plus, inp.lambda1, 12.0)
                .unwrap();
        let h = 2e-3;
        let s_hat_numeric = hj_solver::multi_junction_speed(&problem, h, 1e-10).unwrap();
        let mut config = SimConfig::single(profile.clone(), inp.c1, dx, dx, t_end, 0.5);
        config.sample_interval = t_end / 1000.0;
        let handle = simulate::simulate(&config).unwrap();
        let trace = handle.front_speed(0.5 * profile.inf_g()).unwrap();
        let dev_numeric = (s_hat_numeric - c_formula.c_star).abs();
        let dev_empirical = (trace.fitted_speed - c_formula.c_star).abs() / c_formula.c_star;
        let pass = explicit.free_boundary == c_formula.c_star
            && dev_numeric <= 10.0 * h
            && dev_empirical <= 0.07;
        all_pass &= pass;
        detail.push_str(&format!(
            "c1={}: pde {:.3} vs {:.3}; ",
            inp.c1, trace.fitted_speed, c_formula.c_star
        ));
        report.rows.push(CrossValidationRow {
            inputs: inp,
            c_formula: c_formula.c_star,
            s_hat_explicit: explicit.free_boundary,
            s_hat_numeric: Some(s_hat_numeric),
            c_empirical: Some(trace.fitted_speed),
            regime: c_formula.regime,
            max_pairwise_dev: dev_numeric.max(dev_empirical * c_formula.c_star),
            pass,
        });
    }
    (
        report,
        CheckOutcome::new("PDE cross-validation", all_pass, detail),
    )
}

pub fn check_rate_function() -> CheckOutcome {
    let profile = EnvironmentProfile::constant(1.0).unwrap();
    let mut config = SimConfig::single(profile, 0.0, 0.15, 0.4 * 0.15 * 0.15, 400.0, 2.6);
    config.scheme = Scheme::ExplicitEuler;
    config.snapshot_times = vec![200.0, 400.0];
    let handle = match simulate::simulate(&config) {
        Ok(h) => h,
        Err(e) => return CheckOutcome::new("rate function", false, e.to_string()),
    };
    let w400 = handle.rate_function(400.0).unwrap();
    let w200 = handle.rate_function(200.0).unwrap();
    let lookup = |w: &[(f64, f64)], s: f64| -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        for &(si, wi) in w {
            let d = (si - s).abs();
            if d < best.0 {
                best = (d, wi);
            }
        }
        best.1
    };
    let mut sup_vs_exact = 0.0f64;
    let mut sup_homog = 0.0f64;
    for k in 0..=400 {
        let s = 4.0 * k as f64 / 400.0;
        let exact = (0.25 * s * s - 1.0).max(0.0);
        sup_vs_exact = sup_vs_exact.max((lookup(&w400, s) - exact).abs());
        sup_homog = sup_homog.max((lookup(&w400, s) - lookup(&w200, s)).abs());
    }
    CheckOutcome::new(
        "rate function",
        sup_vs_exact <= 0.15 && sup_homog <= 0.1,
        format!("sup gap vs s^2/4 - 1: {sup_vs_exact:.3}, t vs 2t: {sup_homog:.3}"),
    )
}

pub fn check_multi_junction() -> CheckOutcome {
    // grid check: inactive second junction within a 2h band
    let h = 2e-3;
    let two = JunctionProblem::new(
        Hamiltonian::new(vec![2.5, 6.0], vec![1.0, 1.0, 1.0]).unwrap(),
        vec![2.0 - 0.25 * 2.5 * 2.5, -50.0],
        14.0,
    )
    .unwrap();
    let one = JunctionProblem::single_junction(2.5, 1.0, 1.0, 2.0, 14.0).unwrap();
    let sol2 = hj_solver::solve(&two, h, 1e-10, 100_000).unwrap();
    let sol1 = hj_solver::solve(&one, h, 1e-10, 100_000).unwrap();
    let band = sol1
        .values
        .iter()
        .zip(&sol2.values)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if band > 2.0 * h {
        return CheckOutcome::new(
            "multi-junction",
            false,
            format!("inactive junction moved the solution by {band:.2e}"),
        );
    }
    // PDE vs grid: two active features, keep-pace at the first junction;
    // the grid problem carries the limiters the two bumps induce
    let paired = JunctionProblem::new(
        Hamiltonian::new(vec![2.5, 6.0], vec![1.0, 1.0, 1.0]).unwrap(),
        vec![2.0 - 0.25 * 2.5 * 2.5, 2.0 - 0.25 * 6.0 * 6.0],
        14.0,
    )
    .unwrap();
    let speed_grid = hj_solver::multi_junction_speed(&paired, h, 1e-10).unwrap();
    let bump = lambda2_profile();
    let t_end = 240.0;
    let config = SimConfig {
        shifts: vec![
            Shift {
                c: 2.5,
                profile: bump.clone(),
            },
            Shift {
                c: 6.0,
                profile: bump,
            },
        ],
        x_min: -3.0 * t_end,
        x_max: 6.6 * t_end,
        dx: 0.05,
        dt: 0.05,
        t_end,
        scheme: Scheme::ImexCrankNicolson,
        u0: Default::default(),
        front_levels: vec![0.5],
        snapshot_times: vec![],
        sample_interval: t_end / 1000.0,
    };
    let handle = match simulate::multi_shift_simulate(&config) {
        Ok(h) => h,
        Err(e) => return CheckOutcome::new("multi-junction", false, e.to_string()),
    };
    let fitted = handle.front_speed(0.5).unwrap().fitted_speed;
    let dev = (fitted - speed_grid).abs() / speed_grid;
    CheckOutcome::new(
        "multi-junction",
        dev <= 0.07,
        format!("grid {speed_grid:.3} vs PDE {fitted:.3} ({:.1}%)", 100.0 * dev),
    )
}

pub fn run_suite(suite: &str, seed: u64) -> (Vec<CheckOutcome>, Option<CrossValidationReport>) {
    let mut outcomes = vec![
        check_closed_form_chain(seed),
        check_eigenvalues(),
        check_viscosity_residuals(),
        check_ishii_equivalence(),
    ];
    let mut report = None;
    if suite == "full" || suite == "pde" {
        outcomes.push(check_hj_convergence());
    }
    if suite == "pde" {
        let (r, outcome) = pde_cross_validation(400.0, 0.05);
        outcomes.push(outcome);
        outcomes.push(check_rate_function());
        outcomes.push(check_multi_junction());
        report = Some(r);
    }
    (outcomes, report)
}
