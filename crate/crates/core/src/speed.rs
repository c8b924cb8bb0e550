//! Closed-form spreading speeds.
//!
//! The rightward speed is a four-regime function of the shift speed c1,
//! the tail rates r_minus/r_plus and the principal eigenvalue lambda1:
//!
//! ```text
//! c* = 2 sqrt(r_plus)            if c1 <= 2 sqrt(r_plus)
//!      c1                        if 2 sqrt(r_plus) < c1 <= 2 sqrt(lambda1)
//!      mu- + r_minus / mu-       if 2 sqrt(lambda1) < c1 <= 2 (sqrt(r_minus) + sqrt(lambda1 - r_minus))
//!      2 sqrt(r_minus)           otherwise
//! ```
//!
//! with mu- = c1/2 - sqrt(lambda1 - r_minus). Each boundary value belongs
//! to the lower-numbered case; the map is continuous across all three
//! boundaries, so the tie-break only fixes the regime tag.

use serde::{Deserialize, Serialize};

use crate::error::SpeedError;

/// Inputs for the speed formulas: shift speed, tail rates, eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedInputs {
    pub c1: f64,
    pub r_minus: f64,
    pub r_plus: f64,
    pub lambda1: f64,
}

impl SpeedInputs {
    pub fn new(c1: f64, r_minus: f64, r_plus: f64, lambda1: f64) -> Result<Self, SpeedError> {
        let s = Self {
            c1,
            r_minus,
            r_plus,
            lambda1,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), SpeedError> {
        if !(self.r_minus > 0.0) || !(self.r_plus > 0.0) {
            return Err(SpeedError::InvalidInputs(format!(
                "tail rates must be positive, got r_minus = {}, r_plus = {}",
                self.r_minus, self.r_plus
            )));
        }
        if !(self.lambda1 >= self.r_minus.max(self.r_plus)) {
            return Err(SpeedError::InvalidInputs(format!(
                "lambda1 = {} must be >= max(r_minus, r_plus) = {}",
                self.lambda1,
                self.r_minus.max(self.r_plus)
            )));
        }
        if !self.c1.is_finite() {
            return Err(SpeedError::InvalidInputs(format!(
                "c1 must be finite, got {}",
                self.c1
            )));
        }
        Ok(())
    }

    /// Same parameters with lambda1 replaced by max(r_minus, r_plus).
    pub fn baseline(&self) -> SpeedInputs {
        SpeedInputs {
            lambda1: self.r_minus.max(self.r_plus),
            ..*self
        }
    }

    /// Inputs of the reflected problem: shift -c1, tails swapped.
    pub fn reflected(&self) -> SpeedInputs {
        SpeedInputs {
            c1: -self.c1,
            r_minus: self.r_plus,
            r_plus: self.r_minus,
            lambda1: self.lambda1,
        }
    }
}

/// Which of the four cases produced the speed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// c* = 2 sqrt(r_plus): front outruns or ignores the shift.
    KppRight,
    /// c* = c1: front locks onto the moving environment.
    KeepPace,
    /// c* = mu- + r_minus/mu-: slower than the shift but faster than the
    /// local KPP speed, pulled by the favorable region order-t ahead.
    NonlocalPulling,
    /// c* = 2 sqrt(r_minus): the shift escaped, only the wake matters.
    KppLeft,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedResult {
    pub c_star: f64,
    pub regime: Regime,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_minus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_plus: Option<f64>,
}

/// mu+- = c1/2 +- sqrt(lambda1 - r_+-), the one-sided slopes of the
/// flux-limited solution at the junction.
pub fn mu_pair(inputs: &SpeedInputs) -> (f64, f64) {
    let mu_minus = 0.5 * inputs.c1 - (inputs.lambda1 - inputs.r_minus).sqrt();
    let mu_plus = 0.5 * inputs.c1 + (inputs.lambda1 - inputs.r_plus).sqrt();
    (mu_minus, mu_plus)
}

/// Rightward spreading speed with its regime tag.
pub fn rightward_speed(inputs: &SpeedInputs) -> Result<SpeedResult, SpeedError> {
    inputs.validate()?;
    let SpeedInputs {
        c1,
        r_minus,
        r_plus,
        lambda1,
    } = *inputs;
    let b1 = 2.0 * r_plus.sqrt();
    let b2 = 2.0 * lambda1.sqrt();
    let b3 = 2.0 * (r_minus.sqrt() + (lambda1 - r_minus).sqrt());
    let result = if c1 <= b1 {
        SpeedResult {
            c_star: 2.0 * r_plus.sqrt(),
            regime: Regime::KppRight,
            mu_minus: None,
            mu_plus: None,
        }
    } else if c1 <= b2 {
        SpeedResult {
            c_star: c1,
            regime: Regime::KeepPace,
            mu_minus: None,
            mu_plus: None,
        }
    } else if c1 <= b3 {
        let (mu_minus, mu_plus) = mu_pair(inputs);
        SpeedResult {
            c_star: mu_minus + r_minus / mu_minus,
            regime: Regime::NonlocalPulling,
            mu_minus: Some(mu_minus),
            mu_plus: Some(mu_plus),
        }
    } else {
        let (mu_minus, mu_plus) = mu_pair(inputs);
        SpeedResult {
            c_star: 2.0 * r_minus.sqrt(),
            regime: Regime::KppLeft,
            mu_minus: Some(mu_minus),
            mu_plus: Some(mu_plus),
        }
    };
    Ok(result)
}

/// Leftward spreading speed: the rightward speed of the reflected problem.
pub fn leftward_speed(inputs: &SpeedInputs) -> Result<SpeedResult, SpeedError> {
    rightward_speed(&inputs.reflected())
}

/// Speed of the baseline problem that only sees the tail rates
/// (lambda1 clamped to max(r_minus, r_plus)).
pub fn baseline_speed(inputs: &SpeedInputs) -> Result<SpeedResult, SpeedError> {
    rightward_speed(&inputs.baseline())
}

/// The three regime boundaries (b1, b2, b3) in c1.
pub fn regime_boundaries(inputs: &SpeedInputs) -> (f64, f64, f64) {
    let b1 = 2.0 * inputs.r_plus.sqrt();
    let b2 = 2.0 * inputs.lambda1.sqrt();
    let b3 = 2.0 * (inputs.r_minus.sqrt() + (inputs.lambda1 - inputs.r_minus).sqrt());
    (b1, b2, b3)
}

#[cfg(test)]
mod tests {
    use super::*;

    use crate::test_util::{random_inputs, Rng};

    fn inputs(c1: f64, r_minus: f64, r_plus: f64, lambda1: f64) -> SpeedInputs {
        SpeedInputs::new(c1, r_minus, r_plus, lambda1).unwrap()
    }

    #[test]
    fn homogeneous_reduces_to_classical_kpp() {
        for c1 in [-3.0, 0.0, 1.0, 2.0] {
            let r = rightward_speed(&inputs(c1, 1.0, 1.0, 1.0)).unwrap();
            assert_eq!(r.c_star, 2.0);
            assert_eq!(r.regime, Regime::KppRight);
        }
    }

    #[test]
    fn nonlocal_pulling_example() {
        // 2 sqrt(2) < 3 <= 4
        let r = rightward_speed(&inputs(3.0, 1.0, 1.0, 2.0)).unwrap();
        assert_eq!(r.regime, Regime::NonlocalPulling);
        assert_eq!(r.mu_minus.unwrap(), 0.5);
        assert_eq!(r.c_star, 2.5);
    }

    #[test]
    fn fast_shift_leaves_wake_speed() {
        let r = rightward_speed(&inputs(10.0, 1.0, 1.0, 2.0)).unwrap();
        assert_eq!(r.regime, Regime::KppLeft);
        assert_eq!(r.c_star, 2.0);
    }

    #[test]
    fn keep_pace_example() {
        let r = rightward_speed(&inputs(2.5, 1.0, 1.0, 2.0)).unwrap();
        assert_eq!(r.regime, Regime::KeepPace);
        assert_eq!(r.c_star, 2.5);
    }

    #[test]
    fn negative_shift_is_kpp_right() {
        let r = rightward_speed(&inputs(-5.0, 1.0, 2.0, 2.5)).unwrap();
        assert_eq!(r.regime, Regime::KppRight);
        assert_eq!(r.c_star, 2.0 * 2.0f64.sqrt());
    }

    #[test]
    fn leftward_mirror_examples() {
        let r = leftward_speed(&inputs(-3.0, 1.0, 1.0, 2.0)).unwrap();
        assert_eq!(r.c_star, 2.5);
        assert_eq!(r.regime, Regime::NonlocalPulling);

        // c1 >= -2 sqrt(r_minus): leftward speed is 2 sqrt(r_minus)
        for c1 in [-2.0, 0.0, 3.0] {
            let r = leftward_speed(&inputs(c1, 1.0, 1.0, 2.0)).unwrap();
            assert_eq!(r.c_star, 2.0);
        }

        // symmetric profile at rest: both directions agree
        let sym = inputs(0.0, 1.3, 1.3, 2.1);
        assert_eq!(
            leftward_speed(&sym).unwrap().c_star,
            rightward_speed(&sym).unwrap().c_star
        );
    }

    #[test]
    fn leftward_four_case_table() {
        // asymmetric tails, lambda above both: the leftward map in c1
        // mirrors the rightward four cases with r_plus in charge
        let (r_minus, r_plus, lambda1): (f64, f64, f64) = (2.0, 1.0, 2.5);
        let b1 = -2.0 * r_minus.sqrt(); // -2.828
        let b2 = -2.0 * lambda1.sqrt(); // -3.162
        let b3 = -2.0 * (r_plus.sqrt() + (lambda1 - r_plus).sqrt()); // -4.449
        let speed = |c1: f64| {
            leftward_speed(&inputs(c1, r_minus, r_plus, lambda1))
                .unwrap()
                .c_star
        };
        assert_eq!(speed(0.5 * b1), 2.0 * r_minus.sqrt());
        let keep = 0.5 * (b1 + b2);
        assert_eq!(speed(keep), -keep);
        let pulled = 0.5 * (b2 + b3);
        let mu = -0.5 * pulled - (lambda1 - r_plus).sqrt();
        assert!((speed(pulled) - (mu + r_plus / mu)).abs() < 1e-12);
        assert_eq!(speed(b3 - 1.0), 2.0 * r_plus.sqrt());
    }

    #[test]
    fn baseline_examples() {
        // lambda1 = r_plus = 2 > r_minus = 1, c1 = 3 in (2 sqrt2, 4]
        let r = baseline_speed(&inputs(3.0, 1.0, 2.0, 2.0)).unwrap();
        assert_eq!(r.c_star, 2.5);
        // lambda1 = r_minus = 2 > r_plus = 1, c1 = 2.5 in (2, 2 sqrt2]
        let r = baseline_speed(&inputs(2.5, 2.0, 1.0, 2.0)).unwrap();
        assert_eq!(r.c_star, 2.5);
        assert_eq!(r.regime, Regime::KeepPace);
        // lambda1 = r_minus = r_plus
        for c1 in [0.5, 2.0, 7.0] {
            let r = baseline_speed(&inputs(c1, 1.0, 1.0, 1.0)).unwrap();
            assert_eq!(r.c_star, 2.0);
        }
    }

    #[test]
    fn baseline_uses_clamped_lambda() {
        // baseline of an enhanced input must coincide with rightward_speed
        // evaluated at lambda1 = max(r)
        let enhanced = inputs(3.0, 1.0, 2.0, 3.5);
        let b = baseline_speed(&enhanced).unwrap();
        let direct = rightward_speed(&inputs(3.0, 1.0, 2.0, 2.0)).unwrap();
        assert_eq!(b.c_star, direct.c_star);
        assert_eq!(b.regime, direct.regime);
    }

    #[test]
    fn continuity_across_regime_boundaries() {
        let mut rng = Rng::new(0xC0FFEE);
        for _ in 0..100 {
            let inp = random_inputs(&mut rng);
            let (b1, b2, b3) = regime_boundaries(&inp);
            let r_minus = inp.r_minus;
            let r_plus = inp.r_plus;
            let lambda1 = inp.lambda1;
            let case3 = |c1: f64| {
                let mu = 0.5 * c1 - (lambda1 - r_minus).sqrt();
                mu + r_minus / mu
            };
            // boundary 1: case (i) value vs case (ii) value at c1 = b1
            assert!((2.0 * r_plus.sqrt() - b1).abs() < 1e-12);
            // boundary 2: case (ii) vs case (iii) at c1 = b2
            if lambda1 > r_minus {
                assert!(
                    (b2 - case3(b2)).abs() < 1e-12,
                    "case ii/iii mismatch at b2 for {inp:?}"
                );
            }
            // boundary 3: case (iii) vs case (iv) at c1 = b3
            assert!(
                (case3(b3) - 2.0 * r_minus.sqrt()).abs() < 1e-12,
                "case iii/iv mismatch at b3 for {inp:?}"
            );
        }
    }

    #[test]
    fn bounds_and_pulling_properties() {
        let mut rng = Rng::new(42);
        for _ in 0..2000 {
            let inp = random_inputs(&mut rng);
            let r = rightward_speed(&inp).unwrap();
            let lo = (2.0 * inp.r_minus.sqrt()).min(2.0 * inp.r_plus.sqrt());
            let hi = (2.0 * inp.r_plus.sqrt()).max(inp.c1).max(2.0 * inp.r_minus.sqrt());
            assert!(r.c_star > 0.0);
            assert!(r.c_star >= lo - 1e-12 && r.c_star <= hi + 1e-12, "{inp:?}");
            if r.regime == Regime::NonlocalPulling {
                assert!(r.c_star > 2.0 * inp.r_minus.sqrt() - 1e-12);
                assert!(r.c_star < inp.c1 + 1e-12);
            }
        }
    }

    #[test]
    fn enhancement_over_baseline() {
        let mut rng = Rng::new(7);
        for _ in 0..2000 {
            let inp = random_inputs(&mut rng);
            let c = rightward_speed(&inp).unwrap().c_star;
            let b = baseline_speed(&inp).unwrap().c_star;
            assert!(c >= b - 1e-12, "enhancement violated for {inp:?}");
            if inp.lambda1 > inp.r_minus.max(inp.r_plus) + 1e-9 {
                // strict enhancement at c1 = 2 sqrt(lambda1)
                let probe = SpeedInputs {
                    c1: 2.0 * inp.lambda1.sqrt(),
                    ..inp
                };
                let cp = rightward_speed(&probe).unwrap().c_star;
                let bp = baseline_speed(&probe).unwrap().c_star;
                assert!(cp > bp + 1e-12, "no strict enhancement for {probe:?}");
            }
        }
    }

    #[test]
    fn non_monotone_in_shift_speed() {
        // lambda1 > r_plus = r_minus: speed rises to 2 sqrt(lambda1) then
        // falls back to 2 sqrt(r)
        let a = rightward_speed(&inputs(2.0 * 2.0f64.sqrt(), 1.0, 1.0, 2.0)).unwrap();
        let b = rightward_speed(&inputs(4.0, 1.0, 1.0, 2.0)).unwrap();
        assert!(a.c_star > b.c_star);
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(SpeedInputs::new(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(SpeedInputs::new(1.0, 1.0, 0.0, 1.0).is_err());
        // lambda1 below max(r) violates the eigenvalue lower bound
        assert!(SpeedInputs::new(1.0, 1.0, 2.0, 1.5).is_err());
        assert!(SpeedInputs::new(f64::NAN, 1.0, 1.0, 1.0).is_err());
    }
}
