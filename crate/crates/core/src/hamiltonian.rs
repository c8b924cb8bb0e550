//! The effective Hamiltonian H(s, p) = -s p + p^2 + R(s).
//!
//! R is piecewise constant in the ray speed s with jumps at the junction
//! speeds c_1 < ... < c_n; by convention R(s) takes the left value at a
//! junction (s <= c_i belongs to the left segment). For fixed s the map
//! p -> H(s, p) is a convex coercive parabola with vertex at p = s/2; its
//! increasing and decreasing envelopes
//!
//! ```text
//! H+(s, p) = H(s, max(p, s/2)),    H-(s, p) = H(s, min(p, s/2))
//! ```
//!
//! drive both the junction conditions and the Godunov numerical flux.

use serde::{Deserialize, Serialize};

use crate::error::SolveError;

/// One-sided limit selector at a junction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// approach from below (c_i -)
    Left,
    /// approach from above (c_i +)
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian {
    /// strictly ascending junction speeds
    junctions: Vec<f64>,
    /// segment values of R, one more than junctions
    r_values: Vec<f64>,
}

impl Hamiltonian {
    pub fn new(junctions: Vec<f64>, r_values: Vec<f64>) -> Result<Self, SolveError> {
        if r_values.len() != junctions.len() + 1 {
            return Err(SolveError::InvalidProblem(format!(
                "need one more R value than junctions, got {} junctions and {} values",
                junctions.len(),
                r_values.len()
            )));
        }
        if junctions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SolveError::InvalidProblem(
                "junction speeds must be strictly ascending".into(),
            ));
        }
        if r_values.iter().any(|r| !(*r > 0.0)) {
            return Err(SolveError::InvalidProblem(
                "segment rates must be positive".into(),
            ));
        }
        Ok(Self {
            junctions,
            r_values,
        })
    }

    /// Single junction at c1 with R = r_minus below and r_plus above.
    /// A non-positive c1 never enters the ray domain s > 0, so the
    /// Hamiltonian degenerates to the junction-free R = r_plus.
    pub fn single(c1: f64, r_minus: f64, r_plus: f64) -> Result<Self, SolveError> {
        if c1 > 0.0 {
            Self::new(vec![c1], vec![r_minus, r_plus])
        } else {
            Self::new(vec![], vec![r_plus])
        }
    }

    pub fn junctions(&self) -> &[f64] {
        &self.junctions
    }

    pub fn r_values(&self) -> &[f64] {
        &self.r_values
    }

    /// R(s); the left value at a junction point.
    pub fn r_at(&self, s: f64) -> f64 {
        let idx = self.junctions.partition_point(|c| s > *c);
        self.r_values[idx]
    }

    /// One-sided value of R at junction index i.
    pub fn r_side(&self, i: usize, side: Side) -> f64 {
        match side {
            Side::Left => self.r_values[i],
            Side::Right => self.r_values[i + 1],
        }
    }

    /// H(s, p) = -s p + p^2 + R(s).
    pub fn eval(&self, s: f64, p: f64) -> f64 {
        -s * p + p * p + self.r_at(s)
    }

    /// H(c_i +-, p).
    pub fn eval_side(&self, i: usize, side: Side, p: f64) -> f64 {
        let c = self.junctions[i];
        -c * p + p * p + self.r_side(i, side)
    }

    /// Increasing envelope H+(s, p) = H(s, max(p, s/2)).
    pub fn h_plus(&self, s: f64, p: f64) -> f64 {
        self.eval(s, p.max(0.5 * s))
    }

    /// Decreasing envelope H-(s, p) = H(s, min(p, s/2)).
    pub fn h_minus(&self, s: f64, p: f64) -> f64 {
        self.eval(s, p.min(0.5 * s))
    }

    /// Increasing envelope of the one-sided Hamiltonian at junction i.
    pub fn h_plus_side(&self, i: usize, side: Side, p: f64) -> f64 {
        let c = self.junctions[i];
        self.eval_side(i, side, p.max(0.5 * c))
    }

    /// Decreasing envelope of the one-sided Hamiltonian at junction i.
    pub fn h_minus_side(&self, i: usize, side: Side, p: f64) -> f64 {
        let c = self.junctions[i];
        self.eval_side(i, side, p.min(0.5 * c))
    }

    /// Flux-limited junction condition at junction i:
    /// F_A(p_plus, p_minus) = max(A, H-(c_i +, p_plus), H+(c_i -, p_minus)).
    pub fn fa_junction_at(&self, i: usize, a: f64, p_plus: f64, p_minus: f64) -> f64 {
        a.max(self.h_minus_side(i, Side::Right, p_plus))
            .max(self.h_plus_side(i, Side::Left, p_minus))
    }

    /// F_A at the single junction; falls back to plain max(A, H-, H+) with
    /// the ambient rate when the Hamiltonian has no junction (c1 <= 0).
    pub fn fa_junction(&self, a: f64, p_plus: f64, p_minus: f64) -> f64 {
        if self.junctions.is_empty() {
            let r = self.r_values[0];
            let h = |p: f64| p * p + r;
            return a.max(h(p_plus.min(0.0))).max(h(p_minus.max(0.0)));
        }
        self.fa_junction_at(0, a, p_plus, p_minus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(c1: f64, r_minus: f64, r_plus: f64) -> Hamiltonian {
        Hamiltonian::single(c1, r_minus, r_plus).unwrap()
    }

    #[test]
    fn r_takes_left_value_at_junction() {
        let h = single(2.0, 1.0, 3.0);
        assert_eq!(h.r_at(2.0), 1.0);
        assert_eq!(h.r_at(2.0 + 1e-12), 3.0);
        assert_eq!(h.r_at(0.5), 1.0);
    }

    #[test]
    fn envelope_values_match_closed_forms() {
        let c1 = 2.0;
        let (rm, rp) = (1.0, 1.5);
        let h = single(c1, rm, rp);
        // decreasing part above the vertex is flat at the minimum
        assert_eq!(
            h.h_minus_side(0, Side::Right, c1 / 2.0 + 1.0),
            -c1 * c1 / 4.0 + rp
        );
        // both envelopes agree at the vertex
        assert_eq!(
            h.h_plus_side(0, Side::Left, c1 / 2.0),
            -c1 * c1 / 4.0 + rm
        );
        // increasing part beyond the vertex is the raw parabola
        let p = c1;
        assert_eq!(h.h_plus_side(0, Side::Right, p), -c1 * p + p * p + 1.5);
        // spec value: c1 = 2, r_plus = 1 gives -2*2 + 4 + 1 = 1
        let h2 = single(2.0, 1.0, 1.0);
        assert_eq!(h2.h_plus_side(0, Side::Right, 2.0), 1.0);
    }

    #[test]
    fn envelopes_are_monotone_in_p() {
        let h = single(1.7, 0.8, 2.2);
        let mut prev_plus = f64::NEG_INFINITY;
        let mut prev_minus = f64::INFINITY;
        for k in 0..200 {
            let p = -5.0 + 0.05 * k as f64;
            let hp = h.h_plus(1.7, p);
            let hm = h.h_minus(1.7, p);
            assert!(hp >= prev_plus - 1e-12);
            assert!(hm <= prev_minus + 1e-12);
            prev_plus = hp;
            prev_minus = hm;
            // envelopes bracket the parabola
            assert!(hm <= h.eval(1.7, p) + 1e-12);
            assert!(hp <= h.eval(1.7, p) + 1e-12);
        }
    }

    #[test]
    fn fa_junction_max_selection() {
        let h = single(2.0, 1.0, 1.0);
        // A dominating both envelope terms
        assert_eq!(h.fa_junction(100.0, 1.0, 1.0), 100.0);
        // spec example: (A=0, c1=2, r=1, p=1) -> max(0, -2+1+1) = 0
        assert_eq!(h.fa_junction(0.0, 1.0, 1.0), 0.0);
    }

    #[test]
    fn fa_junction_monotone_in_a() {
        let h = single(2.0, 1.0, 2.0);
        for k in 0..50 {
            let a = -3.0 + 0.2 * k as f64;
            let lo = h.fa_junction(a - 0.1, 0.3, 0.9);
            let hi = h.fa_junction(a, 0.3, 0.9);
            assert!(lo <= hi + 1e-15);
        }
    }

    #[test]
    fn multi_junction_segments() {
        let h = Hamiltonian::new(vec![2.5, 6.0], vec![1.0, 1.5, 1.0]).unwrap();
        assert_eq!(h.r_at(1.0), 1.0);
        assert_eq!(h.r_at(3.0), 1.5);
        assert_eq!(h.r_at(6.5), 1.0);
        assert_eq!(h.r_side(1, Side::Left), 1.5);
        assert_eq!(h.r_side(1, Side::Right), 1.0);
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(Hamiltonian::new(vec![2.0, 1.0], vec![1.0, 1.0, 1.0]).is_err());
        assert!(Hamiltonian::new(vec![1.0], vec![1.0]).is_err());
        assert!(Hamiltonian::new(vec![1.0], vec![1.0, -1.0]).is_err());
    }
}
