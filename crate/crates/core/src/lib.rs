//! Spreading speeds of KPP reaction fronts in shifting environments,
//! computed three independent ways and cross-validated:
//!
//! 1. closed-form regime formulas ([`speed`]) fed by the principal
//!    eigenvalue of the environment ([`eigen`]),
//! 2. explicit and numerical flux-limited Hamilton-Jacobi solutions on
//!    the ray-speed axis ([`fl_explicit`], [`hj_solver`]),
//! 3. direct simulation of the parabolic problem with front tracking
//!    ([`simulate`]).

pub mod eigen;
pub mod error;
pub mod fl_explicit;
pub mod hamiltonian;
pub mod hj_solver;
pub mod profile;
pub mod simulate;
pub mod speed;

pub use eigen::{flux_limiter_a, lambda1, EigenOptions, EigenResult};
pub use error::{EigenError, ProfileError, SimError, SolveError, SpeedError};
pub use hamiltonian::{Hamiltonian, Side};
pub use profile::{EnvironmentProfile, ProfileKind};
pub use speed::{
    baseline_speed, leftward_speed, rightward_speed, Regime, SpeedInputs, SpeedResult,
};

#[cfg(test)]
pub(crate) mod test_util {
    use crate::speed::SpeedInputs;

    /// xorshift64* PRNG for deterministic property-style sweeps.
    pub struct Rng(u64);

    impl Rng {
        pub fn new(seed: u64) -> Self {
            Rng(seed.max(1))
        }
        pub fn next_f64(&mut self) -> f64 {
            self.0 ^= self.0 << 13;
            self.0 ^= self.0 >> 7;
            self.0 ^= self.0 << 17;
            (self.0.wrapping_mul(0x2545F4914F6CDD1D) >> 11) as f64 / (1u64 << 53) as f64
        }
        pub fn in_range(&mut self, lo: f64, hi: f64) -> f64 {
            lo + (hi - lo) * self.next_f64()
        }
    }

    /// Random valid speed inputs covering all four regimes; about a third
    /// of the draws sit exactly at lambda1 = max(r).
    pub fn random_inputs(rng: &mut Rng) -> SpeedInputs {
        let r_minus = rng.in_range(0.1, 5.0);
        let r_plus = rng.in_range(0.1, 5.0);
        let bump = if rng.next_f64() < 0.3 {
            0.0
        } else {
            rng.in_range(0.0, 4.0)
        };
        let lambda1 = r_minus.max(r_plus) + bump;
        let c_hi = 2.0 * (r_minus.sqrt() + (lambda1 - r_minus).sqrt()) + 3.0;
        let c1 = rng.in_range(-2.0, c_hi);
        SpeedInputs {
            c1,
            r_minus,
            r_plus,
            lambda1,
        }
    }
}
