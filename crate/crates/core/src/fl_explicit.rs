//! Exact flux-limited solutions on the ray-speed axis.
//!
//! For a single junction at c1 with tail rates r_minus, r_plus and
//! eigenvalue lambda1 (flux limiter A = lambda1 - c1^2/4) the stationary
//! obstacle problem
//!
//! ```text
//! min{rho, rho + H(s, rho')} = 0       s > 0, s != c1
//! min{rho(c1), rho(c1) + F_A(rho'(c1+), rho'(c1-))} = 0
//! rho(0) = 0,  rho(s)/s -> infinity
//! ```
//!
//! has a closed-form solution in each of the four speed regimes, built
//! from at most five pieces: a zero plateau, one or two affine ramps with
//! slopes mu-+, and trailing quadratics s^2/4 - r. The free boundary of
//! the zero set is the spreading speed. [`verify_viscosity`] checks the
//! sub/supersolution inequalities numerically, including the junction
//! condition against lattices of one-sided test slopes.

use serde::{Deserialize, Serialize};

use crate::error::SpeedError;
use crate::hamiltonian::Hamiltonian;
use crate::speed::{mu_pair, rightward_speed, Regime, SpeedInputs};

/// Residual tolerance for the closed-form constructions; the pieces are
/// exact, so this only covers floating-point noise.
pub const VISCOSITY_TOL: f64 = 1e-9;

/// Analytic descriptor of one solution piece.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "piece")]
pub enum Piece {
    Zero,
    Affine { slope: f64, intercept: f64 },
    Quadratic { r: f64 },
}

impl Piece {
    fn value(&self, s: f64) -> f64 {
        match self {
            Piece::Zero => 0.0,
            Piece::Affine { slope, intercept } => slope * s + intercept,
            Piece::Quadratic { r } => 0.25 * s * s - r,
        }
    }

    fn slope(&self, s: f64) -> f64 {
        match self {
            Piece::Zero => 0.0,
            Piece::Affine { slope, .. } => *slope,
            Piece::Quadratic { .. } => 0.5 * s,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Piece::Zero => "zero",
            Piece::Affine { .. } => "affine",
            Piece::Quadratic { .. } => "quadratic",
        }
    }
}

/// A continuous piecewise solution on [0, infinity).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseSolution {
    /// ascending interior breakpoints; piece i lives on
    /// [breakpoints[i-1], breakpoints[i]] and the last piece is unbounded
    breakpoints: Vec<f64>,
    pieces: Vec<Piece>,
    /// flux limiter A the construction corresponds to
    pub flux_limiter: f64,
    /// rho(c1), zero when the junction sits inside the zero plateau
    pub junction_value: f64,
    /// largest s with rho(s) = 0; equals the spreading speed
    pub free_boundary: f64,
}

impl PiecewiseSolution {
    fn assemble(
        breakpoints: Vec<f64>,
        pieces: Vec<Piece>,
        flux_limiter: f64,
        free_boundary: f64,
        c1: f64,
    ) -> Self {
        debug_assert_eq!(pieces.len(), breakpoints.len() + 1);
        // drop interior pieces whose interval degenerated to a point
        let mut keep_breaks = Vec::with_capacity(breakpoints.len());
        let mut keep_pieces = vec![pieces[0]];
        for (k, &b) in breakpoints.iter().enumerate() {
            if keep_breaks.last().is_some_and(|&prev| b <= prev) {
                // empty interval: replace the previous piece boundary
                keep_pieces.pop();
                keep_pieces.push(pieces[k + 1]);
            } else {
                keep_breaks.push(b);
                keep_pieces.push(pieces[k + 1]);
            }
        }
        let mut sol = PiecewiseSolution {
            breakpoints: keep_breaks,
            pieces: keep_pieces,
            flux_limiter,
            junction_value: 0.0,
            free_boundary,
        };
        sol.junction_value = if c1 > 0.0 { sol.evaluate(c1) } else { 0.0 };
        sol
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn evaluate(&self, s: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|b| s > *b);
        self.pieces[idx].value(s)
    }

    pub fn piece_tag(&self, s: f64) -> &'static str {
        let idx = self.breakpoints.partition_point(|b| s > *b);
        self.pieces[idx].tag()
    }

    /// One-sided derivative from the left.
    pub fn slope_left(&self, s: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|b| *b < s);
        self.pieces[idx].slope(s)
    }

    /// One-sided derivative from the right.
    pub fn slope_right(&self, s: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|b| *b <= s);
        self.pieces[idx].slope(s)
    }
}

/// Build the case-matched explicit solution for A = lambda1 - c1^2/4.
pub fn construct_explicit(inputs: &SpeedInputs) -> Result<PiecewiseSolution, SpeedError> {
    let result = rightward_speed(inputs)?;
    let SpeedInputs {
        c1,
        r_minus,
        r_plus,
        lambda1,
    } = *inputs;
    let a = lambda1 - 0.25 * c1 * c1;
    let s_hat = result.c_star;

    let sol = match result.regime {
        Regime::KppRight => PiecewiseSolution::assemble(
            vec![2.0 * r_plus.sqrt()],
            vec![Piece::Zero, Piece::Quadratic { r: r_plus }],
            a,
            s_hat,
            c1,
        ),
        Regime::KeepPace => {
            let root = (c1 * c1 - 4.0 * r_plus).sqrt();
            let slope = 0.5 * (c1 + root);
            PiecewiseSolution::assemble(
                vec![c1, c1 + root],
                vec![
                    Piece::Zero,
                    Piece::Affine {
                        slope,
                        intercept: -slope * c1,
                    },
                    Piece::Quadratic { r: r_plus },
                ],
                a,
                s_hat,
                c1,
            )
        }
        Regime::NonlocalPulling => {
            let (mu_minus, mu_plus) = mu_pair(inputs);
            PiecewiseSolution::assemble(
                vec![s_hat, c1, 2.0 * mu_plus],
                vec![
                    Piece::Zero,
                    Piece::Affine {
                        slope: mu_minus,
                        intercept: -(mu_minus * mu_minus + r_minus),
                    },
                    Piece::Affine {
                        slope: mu_plus,
                        intercept: -(mu_plus * mu_plus + r_plus),
                    },
                    Piece::Quadratic { r: r_plus },
                ],
                a,
                s_hat,
                c1,
            )
        }
        Regime::KppLeft => {
            let (mu_minus, mu_plus) = mu_pair(inputs);
            PiecewiseSolution::assemble(
                vec![2.0 * r_minus.sqrt(), 2.0 * mu_minus, c1, 2.0 * mu_plus],
                vec![
                    Piece::Zero,
                    Piece::Quadratic { r: r_minus },
                    Piece::Affine {
                        slope: mu_minus,
                        intercept: -(mu_minus * mu_minus + r_minus),
                    },
                    Piece::Affine {
                        slope: mu_plus,
                        intercept: -(mu_plus * mu_plus + r_plus),
                    },
                    Piece::Quadratic { r: r_plus },
                ],
                a,
                s_hat,
                c1,
            )
        }
    };
    Ok(sol)
}

/// The Ishii-baseline solution implied by the tail rates alone, written
/// out case by case. Deliberately independent of [`construct_explicit`]
/// so the two routes cross-check each other at A = A0.
pub fn baseline_solution(c1: f64, r_minus: f64, r_plus: f64) -> Result<PiecewiseSolution, SpeedError> {
    if !(r_minus > 0.0 && r_plus > 0.0) {
        return Err(SpeedError::InvalidInputs(
            "tail rates must be positive".into(),
        ));
    }
    let lambda = r_minus.max(r_plus);
    let a0 = lambda - 0.25 * c1 * c1;
    let zero_quad_plus = |s_hat: f64| {
        PiecewiseSolution::assemble(
            vec![s_hat],
            vec![Piece::Zero, Piece::Quadratic { r: r_plus }],
            a0,
            s_hat,
            c1,
        )
    };
    if r_plus >= r_minus {
        // growth not worse ahead: either pure invasion, or the shifted
        // ramp drags an affine piece behind the junction
        let w = (r_plus - r_minus).sqrt();
        if c1 <= 2.0 * r_plus.sqrt() {
            Ok(zero_quad_plus(2.0 * r_plus.sqrt()))
        } else if c1 <= 2.0 * (r_minus.sqrt() + w) {
            let mu = 0.5 * c1 - w;
            let s_hat = mu + r_minus / mu;
            Ok(PiecewiseSolution::assemble(
                vec![s_hat, c1],
                vec![
                    Piece::Zero,
                    Piece::Affine {
                        slope: mu,
                        intercept: -(mu * mu + r_minus),
                    },
                    Piece::Quadratic { r: r_plus },
                ],
                a0,
                s_hat,
                c1,
            ))
        } else {
            let mu = 0.5 * c1 - w;
            Ok(PiecewiseSolution::assemble(
                vec![2.0 * r_minus.sqrt(), 2.0 * mu, c1],
                vec![
                    Piece::Zero,
                    Piece::Quadratic { r: r_minus },
                    Piece::Affine {
                        slope: mu,
                        intercept: -(mu * mu + r_minus),
                    },
                    Piece::Quadratic { r: r_plus },
                ],
                a0,
                2.0 * r_minus.sqrt(),
                c1,
            ))
        }
    } else {
        // richer wake: keep-pace band between the tail speeds
        let v = (r_minus - r_plus).sqrt();
        if c1 <= 2.0 * r_plus.sqrt() {
            Ok(zero_quad_plus(2.0 * r_plus.sqrt()))
        } else if c1 <= 2.0 * r_minus.sqrt() {
            let root = (c1 * c1 - 4.0 * r_plus).sqrt();
            let slope = 0.5 * (c1 + root);
            Ok(PiecewiseSolution::assemble(
                vec![c1, c1 + root],
                vec![
                    Piece::Zero,
                    Piece::Affine {
                        slope,
                        intercept: -slope * c1,
                    },
                    Piece::Quadratic { r: r_plus },
                ],
                a0,
                c1,
                c1,
            ))
        } else {
            let mu_plus = 0.5 * c1 + v;
            Ok(PiecewiseSolution::assemble(
                vec![2.0 * r_minus.sqrt(), c1, 2.0 * mu_plus],
                vec![
                    Piece::Zero,
                    Piece::Quadratic { r: r_minus },
                    Piece::Affine {
                        slope: mu_plus,
                        intercept: -(mu_plus * mu_plus + r_plus),
                    },
                    Piece::Quadratic { r: r_plus },
                ],
                a0,
                2.0 * r_minus.sqrt(),
                c1,
            ))
        }
    }
}

/// Numerical check of the sub/supersolution inequalities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualReport {
    /// max |rho + H(s, rho')| over smooth positive samples
    pub classical_max: f64,
    /// max violation of rho + H(s, 0) >= 0 inside the zero set
    pub obstacle_max: f64,
    /// max violation of the junction subsolution inequality
    pub junction_sub_max: f64,
    /// max violation of the junction supersolution inequality
    pub junction_super_max: f64,
    /// max violation at interior kinks (one-sided test slopes)
    pub kink_max: f64,
    pub samples: usize,
    pub tol: f64,
    pub pass: bool,
}

impl ResidualReport {
    pub fn worst(&self) -> f64 {
        self.classical_max
            .max(self.obstacle_max)
            .max(self.junction_sub_max)
            .max(self.junction_super_max)
            .max(self.kink_max)
    }
}

/// Verify the FL sub/supersolution properties of `sol` for the
/// Hamiltonian `h` and flux limiter `a`.
///
/// * classical residual on open smooth pieces where rho > 0;
/// * obstacle inequality rho + H(s, 0) >= 0 inside the zero set;
/// * junction condition at each junction of `h` over a 21x21 lattice of
///   admissible one-sided test slopes;
/// * kink inequalities at interior non-differentiable points.
pub fn verify_viscosity(
    sol: &PiecewiseSolution,
    h: &Hamiltonian,
    a: f64,
    samples: usize,
) -> ResidualReport {
    let lattice = 21;
    let eps = 1e-9;
    let far = sol
        .breakpoints
        .last()
        .copied()
        .unwrap_or(1.0)
        .max(h.junctions().last().copied().unwrap_or(1.0));
    let s_max = 2.0 * far + 4.0;

    let near_special = |s: f64| {
        sol.breakpoints.iter().any(|b| (s - b).abs() < eps)
            || h.junctions().iter().any(|c| (s - c).abs() < eps)
    };

    let mut classical_max: f64 = 0.0;
    let mut obstacle_max: f64 = 0.0;
    for i in 0..samples {
        let s = s_max * (i as f64 + 0.5) / samples as f64;
        if near_special(s) {
            continue;
        }
        let rho = sol.evaluate(s);
        if rho > 0.0 {
            let residual = rho + h.eval(s, sol.slope_left(s));
            classical_max = classical_max.max(residual.abs());
        } else {
            // interior of the zero set: any C1 touch from below is flat
            let residual = rho + h.eval(s, 0.0);
            obstacle_max = obstacle_max.max((-residual).max(0.0));
        }
    }

    // slope window wide enough to cover both roots of H(c1 pm, .) = A
    let lambda_like = (a + {
        let c = h.junctions().first().copied().unwrap_or(0.0);
        0.25 * c * c
    })
    .max(0.0);

    let mut junction_sub_max: f64 = 0.0;
    let mut junction_super_max: f64 = 0.0;
    for (j, &c) in h.junctions().iter().enumerate() {
        let rho_c = sol.evaluate(c);
        let sl = sol.slope_left(c);
        let sr = sol.slope_right(c);
        let window = 3.0 * (1.0 + c + lambda_like.sqrt());
        // subsolution: test maxima, psi'(c+) >= rho'(c+), psi'(c-) <= rho'(c-)
        if rho_c > 0.0 {
            for ip in 0..lattice {
                let p_plus = sr + window * ip as f64 / (lattice - 1) as f64;
                for im in 0..lattice {
                    let p_minus = sl - window * im as f64 / (lattice - 1) as f64;
                    let v = rho_c + h.fa_junction_at(j, a, p_plus, p_minus);
                    junction_sub_max = junction_sub_max.max(v.max(0.0));
                }
            }
        }
        // supersolution: test minima, psi'(c+) <= rho'(c+), psi'(c-) >= rho'(c-)
        for ip in 0..lattice {
            let p_plus = sr - window * ip as f64 / (lattice - 1) as f64;
            for im in 0..lattice {
                let p_minus = sl + window * im as f64 / (lattice - 1) as f64;
                let v = rho_c + h.fa_junction_at(j, a, p_plus, p_minus);
                junction_super_max = junction_super_max.max((-v).max(0.0));
            }
        }
    }

    // interior kinks: the constructions are convex, so only the
    // supersolution (touching from below) has admissible test slopes
    let mut kink_max: f64 = 0.0;
    for &b in &sol.breakpoints {
        if h.junctions().iter().any(|c| (b - c).abs() < eps) {
            continue;
        }
        let rho_b = sol.evaluate(b);
        let sl = sol.slope_left(b);
        let sr = sol.slope_right(b);
        if (sr - sl).abs() < 1e-12 {
            if rho_b > 0.0 {
                kink_max = kink_max.max((rho_b + h.eval(b, sl)).abs());
            }
            continue;
        }
        let (lo, hi) = (sl.min(sr), sl.max(sr));
        for k in 0..lattice {
            let p = lo + (hi - lo) * k as f64 / (lattice - 1) as f64;
            if sr > sl {
                // convex kink: supersolution inequality
                let v = rho_b + h.eval(b, p);
                kink_max = kink_max.max((-v).max(0.0));
            } else if rho_b > 0.0 {
                // concave kink: subsolution inequality
                let v = rho_b + h.eval(b, p);
                kink_max = kink_max.max(v.max(0.0));
            }
        }
    }

    let tol = VISCOSITY_TOL;
    let pass = classical_max <= tol
        && obstacle_max <= tol
        && junction_sub_max <= tol
        && junction_super_max <= tol
        && kink_max <= tol;
    ResidualReport {
        classical_max,
        obstacle_max,
        junction_sub_max,
        junction_super_max,
        kink_max,
        samples,
        tol,
        pass,
    }
}

/// At lambda1 = max(r_minus, r_plus) the flux-limited solution must
/// coincide with the Ishii baseline. Returns true when the two
/// constructions agree pointwise (sup over 10^4 samples below 1e-10)
/// and share the free boundary exactly.
pub fn ishii_equivalence_check(inputs: &SpeedInputs) -> Result<bool, SpeedError> {
    let tail_max = inputs.r_minus.max(inputs.r_plus);
    if inputs.lambda1 > tail_max {
        return Err(SpeedError::PreconditionViolated(format!(
            "lambda1 = {} exceeds max tail rate {}; the Ishii baseline only matches at equality",
            inputs.lambda1, tail_max
        )));
    }
    let fl = construct_explicit(inputs)?;
    let base = baseline_solution(inputs.c1, inputs.r_minus, inputs.r_plus)?;
    if fl.free_boundary != base.free_boundary {
        return Ok(false);
    }
    let samples = 10_000;
    let s_max = 2.0 * fl.breakpoints.last().copied().unwrap_or(1.0).max(1.0) + 4.0;
    let mut sup_gap = 0.0f64;
    for i in 0..samples {
        let s = s_max * i as f64 / (samples - 1) as f64;
        sup_gap = sup_gap.max((fl.evaluate(s) - base.evaluate(s)).abs());
    }
    Ok(sup_gap < 1e-10)
}
