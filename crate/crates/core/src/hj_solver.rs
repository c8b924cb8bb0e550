//! Monotone grid solver for the stationary flux-limited obstacle problem
//!
//! ```text
//! min{rho, rho + H(s, rho')} = 0            on (0, s_max), s != c_i
//! min{rho(c_i), rho(c_i) + F_i(rho'(c_i+), rho'(c_i-))} = 0
//! rho(0) = 0,   rho = s^2/4 - R(s_max) on a right ghost band
//! ```
//!
//! The interior update is the Godunov flux built from the monotone
//! envelopes of H: at each node solve
//!
//! ```text
//! x + max(H+(s, (x - a)/h), H-(s, (b - x)/h)) = 0,  rho_i = max(0, x)
//! ```
//!
//! with a, b the current left/right neighbor values. Both envelope terms
//! are increasing in x, so the root of the max is the min of the two
//! single-envelope roots, each available in closed form because H is a
//! parabola in p. At a junction node the A-term joins the max and the
//! two envelope terms take their one-sided rates, which makes the
//! junction update structurally identical to the interior one.
//! Gauss-Seidel sweeps alternate direction until the sup-norm update
//! drops below tolerance.

use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::hamiltonian::{Hamiltonian, Side};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_SWEEPS: usize = 100_000;

/// Grid step default: s_max / 10_000.
pub fn default_step(s_max: f64) -> f64 {
    1e-4 * s_max
}

#[derive(Debug, Clone, PartialEq)]
pub struct JunctionProblem {
    hamiltonian: Hamiltonian,
    /// one flux limiter per junction
    flux_limiters: Vec<f64>,
    s_max: f64,
}

/// JSON form: junction speeds, per-segment rates, per-junction limiters
/// given either directly or as eigenvalues (A_i = lambda1_i - c_i^2/4).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JunctionProblemSpec {
    pub junctions: Vec<f64>,
    pub r_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1s: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux_limiters: Option<Vec<f64>>,
    pub s_max: f64,
}

impl TryFrom<JunctionProblemSpec> for JunctionProblem {
    type Error = SolveError;
    fn try_from(spec: JunctionProblemSpec) -> Result<Self, SolveError> {
        let hamiltonian = Hamiltonian::new(spec.junctions.clone(), spec.r_values.clone())?;
        let limiters = match (&spec.flux_limiters, &spec.lambda1s) {
            (Some(a), None) => a.clone(),
            (None, Some(l)) => {
                if l.len() != spec.junctions.len() {
                    return Err(SolveError::InvalidProblem(
                        "need one lambda1 per junction".into(),
                    ));
                }
                l.iter()
                    .zip(&spec.junctions)
                    .map(|(lam, c)| lam - 0.25 * c * c)
                    .collect()
            }
            (Some(_), Some(_)) => {
                return Err(SolveError::InvalidProblem(
                    "give either flux_limiters or lambda1s, not both".into(),
                ))
            }
            (None, None) => {
                if spec.junctions.is_empty() {
                    Vec::new()
                } else {
                    return Err(SolveError::InvalidProblem(
                        "missing flux_limiters or lambda1s".into(),
                    ));
                }
            }
        };
        JunctionProblem::new(hamiltonian, limiters, spec.s_max)
    }
}

impl JunctionProblem {
    pub fn new(
        hamiltonian: Hamiltonian,
        flux_limiters: Vec<f64>,
        s_max: f64,
    ) -> Result<Self, SolveError> {
        if flux_limiters.len() != hamiltonian.junctions().len() {
            return Err(SolveError::InvalidProblem(format!(
                "{} junctions but {} flux limiters",
                hamiltonian.junctions().len(),
                flux_limiters.len()
            )));
        }
        if hamiltonian
            .junctions()
            .iter()
            .any(|c| *c <= 0.0 || *c >= s_max)
        {
            return Err(SolveError::InvalidProblem(
                "junctions must lie strictly inside (0, s_max)".into(),
            ));
        }
        let r_last = *hamiltonian.r_values().last().unwrap();
        let mut reach = r_last.sqrt();
        for (c, a) in hamiltonian.junctions().iter().zip(&flux_limiters) {
            reach = reach.max((0.25 * c * c + a).max(0.0).sqrt() + 0.5 * c);
        }
        if s_max <= 2.0 * reach {
            return Err(SolveError::InvalidProblem(format!(
                "s_max = {s_max} too small; the far-field quadratic regime starts near {}",
                2.0 * reach
            )));
        }
        Ok(Self {
            hamiltonian,
            flux_limiters,
            s_max,
        })
    }

    pub fn single_junction(
        c1: f64,
        r_minus: f64,
        r_plus: f64,
        lambda1: f64,
        s_max: f64,
    ) -> Result<Self, SolveError> {
        let h = Hamiltonian::single(c1, r_minus, r_plus)?;
        let limiters = if h.junctions().is_empty() {
            Vec::new()
        } else {
            vec![lambda1 - 0.25 * c1 * c1]
        };
        Self::new(h, limiters, s_max)
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn flux_limiters(&self) -> &[f64] {
        &self.flux_limiters
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }
}

/// Converged grid values and diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSolution {
    pub h: f64,
    pub values: Vec<f64>,
    /// full alternating sweeps performed
    pub iterations: usize,
    /// sup-norm of min(rho, rho + H_God) at the final state
    pub residual: f64,
    /// largest grid node whose value is at or below the zero threshold
    pub s_hat_numeric: f64,
}

impl GridSolution {
    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn free_boundary(&self, value_threshold: f64) -> f64 {
        let mut s_hat = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            if v <= value_threshold {
                s_hat = self.node(i);
            }
        }
        s_hat
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialGuess {
    /// all interior nodes start at zero (subsolution side)
    Zeros,
    /// all interior nodes start well above the solution
    FarField,
}

/// Root of x + H+(s, (x-a)/h) = 0 in x. H+ is flat at the parabola
/// minimum for small slopes; otherwise the raw quadratic applies and the
/// unique root with (x-a)/h >= s/2 is taken.
fn root_backward(s: f64, a: f64, r: f64, h: f64) -> f64 {
    let x_flat = 0.25 * s * s - r;
    if x_flat - a <= 0.5 * s * h {
        x_flat
    } else {
        let disc = ((s - h) * (s - h) - 4.0 * (a + r)).max(0.0);
        a + 0.5 * h * ((s - h) + disc.sqrt())
    }
}

/// Root of x + H-(s, (b-x)/h) = 0 in x, mirrored logic.
fn root_forward(s: f64, b: f64, r: f64, h: f64) -> f64 {
    let x_flat = 0.25 * s * s - r;
    if b - x_flat >= 0.5 * s * h {
        x_flat
    } else {
        let disc = ((s + h) * (s + h) - 4.0 * (b + r)).max(0.0);
        b - 0.5 * h * ((s + h) - disc.sqrt())
    }
}

/// One nodewise update: the exact solution of the discrete obstacle
/// equation at node s given neighbor values a (left) and b (right).
/// Exposed for the monotonicity property tests.
pub fn interior_update(s: f64, a: f64, b: f64, r: f64, h: f64) -> f64 {
    root_backward(s, a, r, h).min(root_forward(s, b, r, h)).max(0.0)
}

/// Junction-node update: the A-term joins the Godunov max and the two
/// envelope terms use their one-sided rates.
pub fn junction_update(c: f64, a: f64, b: f64, r_left: f64, r_right: f64, limiter: f64, h: f64) -> f64 {
    (-limiter)
        .min(root_backward(c, a, r_left, h))
        .min(root_forward(c, b, r_right, h))
        .max(0.0)
}

pub fn solve(
    problem: &JunctionProblem,
    h: f64,
    tol: f64,
    max_sweeps: usize,
) -> Result<GridSolution, SolveError> {
    solve_with_init(problem, h, tol, max_sweeps, InitialGuess::Zeros)
}

pub fn solve_with_init(
    problem: &JunctionProblem,
    h: f64,
    tol: f64,
    max_sweeps: usize,
    init: InitialGuess,
) -> Result<GridSolution, SolveError> {
    if !(h > 0.0) || !(tol > 0.0) {
        return Err(SolveError::InvalidProblem(
            "grid step and tolerance must be positive".into(),
        ));
    }
    let n = (problem.s_max / h).round() as usize;
    if n < 8 {
        return Err(SolveError::InvalidProblem(
            "grid too coarse for the ghost band".into(),
        ));
    }
    // junctions must land exactly on grid nodes
    let mut junction_index = vec![usize::MAX; n + 1];
    for (j, &c) in problem.hamiltonian.junctions().iter().enumerate() {
        let k = c / h;
        if (k - k.round()).abs() > 1e-6 {
            return Err(SolveError::GridMisaligned { junction: c, h });
        }
        junction_index[k.round() as usize] = j;
    }

    let ham = &problem.hamiltonian;
    let r_last = *ham.r_values().last().unwrap();
    let far_field = |s: f64| 0.25 * s * s - r_last;

    let mut rho = vec![0.0; n + 1];
    match init {
        InitialGuess::Zeros => {}
        InitialGuess::FarField => {
            let top = far_field(problem.s_max).abs() + 10.0;
            for (i, v) in rho.iter_mut().enumerate() {
                *v = far_field(i as f64 * h).max(0.0) + top;
            }
        }
    }
    // boundary pins: rho(0) = 0 and the exact quadratic on the last two nodes
    rho[0] = 0.0;
    rho[n - 1] = far_field((n - 1) as f64 * h);
    rho[n] = far_field(n as f64 * h);

    // per-node rate (one-sided pair at junctions)
    let rates: Vec<f64> = (0..=n).map(|i| ham.r_at(i as f64 * h)).collect();

    let mut sweeps = 0usize;
    let mut sup_update = f64::INFINITY;
    while sweeps < max_sweeps {
        sup_update = 0.0;
        let mut pass = |range: &mut dyn Iterator<Item = usize>, sup: &mut f64| {
            for i in range {
                let s = i as f64 * h;
                let a = rho[i - 1];
                let b = rho[i + 1];
                let j = junction_index[i];
                let new = if j != usize::MAX {
                    junction_update(
                        s,
                        a,
                        b,
                        ham.r_side(j, Side::Left),
                        ham.r_side(j, Side::Right),
                        problem.flux_limiters[j],
                        h,
                    )
                } else {
                    interior_update(s, a, b, rates[i], h)
                };
                let delta = (new - rho[i]).abs();
                if delta > *sup {
                    *sup = delta;
                }
                rho[i] = new;
            }
        };
        pass(&mut (1..=n - 2), &mut sup_update);
        pass(&mut (1..=n - 2).rev(), &mut sup_update);
        sweeps += 1;
        if sup_update < tol {
            break;
        }
    }
    if sup_update >= tol {
        return Err(SolveError::NoConvergence {
            sweeps,
            residual: sup_update,
        });
    }

    // residual of the discrete complementarity condition
    let mut residual = 0.0f64;
    for i in 1..=n - 2 {
        let s = i as f64 * h;
        let (a, b) = (rho[i - 1], rho[i + 1]);
        let j = junction_index[i];
        let h_god = if j != usize::MAX {
            problem.flux_limiters[j]
                .max(ham.h_plus_side(j, Side::Left, (rho[i] - a) / h))
                .max(ham.h_minus_side(j, Side::Right, (b - rho[i]) / h))
        } else {
            ham.h_plus(s, (rho[i] - a) / h)
                .max(ham.h_minus(s, (b - rho[i]) / h))
        };
        residual = residual.max(rho[i].min(rho[i] + h_god).abs());
    }

    let threshold = 10.0 * tol;
    let mut solution = GridSolution {
        h,
        values: rho,
        iterations: sweeps,
        residual,
        s_hat_numeric: 0.0,
    };
    solution.s_hat_numeric = solution.free_boundary(threshold);
    Ok(solution)
}

/// Spreading speed of the multi-junction problem: the numerical free
/// boundary of the converged grid solution.
pub fn multi_junction_speed(problem: &JunctionProblem, h: f64, tol: f64) -> Result<f64, SolveError> {
    Ok(solve(problem, h, tol, DEFAULT_MAX_SWEEPS)?.s_hat_numeric)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fl_explicit::construct_explicit;
    use crate::speed::{baseline_speed, rightward_speed, SpeedInputs};

    fn canonical(c1: f64) -> (JunctionProblem, SpeedInputs) {
        let inputs = SpeedInputs::new(c1, 1.0, 1.0, 2.0).unwrap();
        let problem = JunctionProblem::single_junction(c1, 1.0, 1.0, 2.0, 12.0).unwrap();
        (problem, inputs)
    }

    fn sup_error_vs_explicit(problem: &JunctionProblem, inputs: &SpeedInputs, h: f64) -> f64 {
        let sol = solve(problem, h, DEFAULT_TOL, DEFAULT_MAX_SWEEPS).unwrap();
        let explicit = construct_explicit(inputs).unwrap();
        let n = sol.values.len();
        let mut sup = 0.0f64;
        // skip the ghost band where the boundary condition is pinned
        for i in 0..n - 2 {
            let s = sol.node(i);
            sup = sup.max((sol.values[i] - explicit.evaluate(s)).abs());
        }
        sup
    }

    #[test]
    fn nonlocal_pulling_case_matches_explicit() {
        let (problem, inputs) = canonical(3.0);
        let h = 2e-3;
        let err = sup_error_vs_explicit(&problem, &inputs, h);
        assert!(err <= 5e-3, "sup error {err}");
        let sol = solve(&problem, h, DEFAULT_TOL, DEFAULT_MAX_SWEEPS).unwrap();
        assert!(
            (sol.s_hat_numeric - 2.5).abs() <= 10.0 * h,
            "free boundary {}",
            sol.s_hat_numeric
        );
    }

    #[test]
    fn homogeneous_reduction() {
        // junction present but inactive (A = A0), constant rate
        let problem = JunctionProblem::single_junction(2.0, 1.0, 1.0, 1.0, 10.0).unwrap();
        let h = 2e-3;
        let sol = solve(&problem, h, DEFAULT_TOL, DEFAULT_MAX_SWEEPS).unwrap();
        let mut sup = 0.0f64;
        for i in 0..sol.values.len() - 2 {
            let s = sol.node(i);
            let exact = (0.25 * s * s - 1.0).max(0.0);
            sup = sup.max((sol.values[i] - exact).abs());
        }
        assert!(sup <= 5.0 * h, "sup error {sup}");
    }

    #[test]
    fn inactive_second_junction_reduces_to_single() {
        let h = 2e-3;
        let two = JunctionProblem::new(
            Hamiltonian::new(vec![2.5, 6.0], vec![1.0, 1.0, 1.0]).unwrap(),
            vec![2.0 - 0.25 * 2.5 * 2.5, -50.0],
            12.0,
        )
        .unwrap();
        let one = JunctionProblem::single_junction(2.5, 1.0, 1.0, 2.0, 12.0).unwrap();
        let sol2 = solve(&two, h, DEFAULT_TOL, DEFAULT_MAX_SWEEPS).unwrap();
        let sol1 = solve(&one, h, DEFAULT_TOL, DEFAULT_MAX_SWEEPS).unwrap();
        let sup = sol1
            .values
            .iter()
            .zip(&sol2.values)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(sup <= 2.0 * h, "two-junction deviates by {sup}");
    }

    #[test]
    fn discrete_uniqueness_from_two_initializations() {
        let (problem, _) = canonical(3.0);
        let h = 4e-3;
        let a = solve_with_init(&problem, h, DEFAULT_TOL, DEFAULT_MAX_SWEEPS, InitialGuess::Zeros)
            .unwrap();
        let b = solve_with_init(
            &problem,
            h,
            DEFAULT_TOL,
            DEFAULT_MAX_SWEEPS,
            InitialGuess::FarField,
        )
        .unwrap();
        let sup = a
            .values
            .iter()
            .zip(&b.values)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(sup <= 1e-9, "initializations disagree by {sup}");
    }

    #[test]
    fn nodewise_update_is_monotone_in_neighbors() {
        let mut rng = crate::test_util::Rng::new(0xAB5);
        for _ in 0..10_000 {
            let s = rng.in_range(0.05, 10.0);
            let a = rng.in_range(0.0, 20.0);
            let b = rng.in_range(0.0, 20.0);
            let r = rng.in_range(0.2, 3.0);
            let h = rng.in_range(5e-4, 2e-2);
            let delta = rng.in_range(1e-9, 0.5);
            let base = interior_update(s, a, b, r, h);
            assert!(
                interior_update(s, a + delta, b, r, h) >= base - 1e-13,
                "backward neighbor monotonicity fails"
            );
            assert!(
                interior_update(s, a, b + delta, r, h) >= base - 1e-13,
                "forward neighbor monotonicity fails"
            );
            // junction update inherits the same structure
            let limiter = rng.in_range(-3.0, 3.0);
            let jb = junction_update(s, a, b, r, r * 1.3, limiter, h);
            assert!(junction_update(s, a + delta, b, r, r * 1.3, limiter, h) >= jb - 1e-13);
            assert!(junction_update(s, a, b + delta, r, r * 1.3, limiter, h) >= jb - 1e-13);
        }
    }

    #[test]
    fn obstacle_consistency_at_convergence() {
        let (problem, _) = canonical(3.0);
        let sol = solve(&problem, 4e-3, DEFAULT_TOL, DEFAULT_MAX_SWEEPS).unwrap();
        assert!(sol.residual <= 10.0 * DEFAULT_TOL, "residual {}", sol.residual);
    }

    #[test]
    fn values_nonnegative_and_nondecreasing() {
        let (problem, _) = canonical(5.0);
        let sol = solve(&problem, 2e-3, DEFAULT_TOL, DEFAULT_MAX_SWEEPS).unwrap();
        let mut prev = -1.0;
        for &v in &sol.values {
            assert!(v >= 0.0);
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }

    #[test]
    fn speed_matches_formula_on_all_regimes() {
        let h = 2e-3;
        for c1 in [1.0, 2.5, 3.0, 5.0] {
            let (problem, inputs) = canonical(c1);
            let speed = multi_junction_speed(&problem, h, DEFAULT_TOL).unwrap();
            let formula = rightward_speed(&inputs).unwrap().c_star;
            assert!(
                (speed - formula).abs() <= 10.0 * h,
                "c1 = {c1}: grid {speed} vs formula {formula}"
            );
        }
    }

    #[test]
    fn raising_a_limiter_never_slows_the_front() {
        let h = 2e-3;
        let mut prev = 0.0;
        for lambda in [1.0, 1.5, 2.0, 2.4] {
            let problem = JunctionProblem::single_junction(3.0, 1.0, 1.0, lambda, 12.0).unwrap();
            let speed = multi_junction_speed(&problem, h, DEFAULT_TOL).unwrap();
            assert!(speed >= prev - 1e-9, "speed decreased: {speed} < {prev}");
            prev = speed;
        }
    }

    #[test]
    fn two_patch_staircase_matches_baseline_formula() {
        // R = 1 below 2.5, 1.5 between the junctions, 1 beyond; limiters
        // inactive, so the free boundary obeys the tail-rate formula with
        // r_plus = 1.5 seen across the first junction
        let problem = JunctionProblem::new(
            Hamiltonian::new(vec![2.5, 6.0], vec![1.0, 1.5, 1.0]).unwrap(),
            vec![1.5 - 0.25 * 2.5 * 2.5, 1.5 - 0.25 * 6.0 * 6.0],
            14.0,
        )
        .unwrap();
        let h = 2e-3;
        let speed = multi_junction_speed(&problem, h, DEFAULT_TOL).unwrap();
        let formula = baseline_speed(&SpeedInputs::new(2.5, 1.0, 1.5, 1.5).unwrap())
            .unwrap()
            .c_star;
        assert!(
            (speed - formula).abs() <= 10.0 * h,
            "staircase speed {speed} vs formula {formula}"
        );
    }

    #[test]
    fn misaligned_junction_is_rejected() {
        let problem = JunctionProblem::single_junction(3.0001, 1.0, 1.0, 2.0, 12.0).unwrap();
        assert!(matches!(
            solve(&problem, 1e-3, DEFAULT_TOL, DEFAULT_MAX_SWEEPS),
            Err(SolveError::GridMisaligned { .. })
        ));
    }

    #[test]
    fn undersized_domain_is_rejected() {
        assert!(matches!(
            JunctionProblem::single_junction(3.0, 1.0, 1.0, 2.0, 5.0),
            Err(SolveError::InvalidProblem(_))
        ));
    }

    #[test]
    fn spec_json_round_trip() {
        let text = r#"{"junctions": [2.5, 6.0], "r_values": [1.0, 1.0, 1.0],
                       "lambda1s": [2.0, 2.0], "s_max": 16.0}"#;
        let spec: JunctionProblemSpec = serde_json::from_str(text).unwrap();
        let problem = JunctionProblem::try_from(spec).unwrap();
        assert_eq!(problem.flux_limiters().len(), 2);
        assert!((problem.flux_limiters()[0] - (2.0 - 1.5625)).abs() < 1e-15);
    }
}
