//! Two-patch staircase: a band of richer growth (rate 1.5 between ray
//! speeds 2.5 and 6, ambient 1) built from two monotone ramps moving at
//! different speeds. All flux limiters are inactive, so the spreading
//! speed follows the baseline tail-rate formula; the grid solver and the
//! direct simulation must both land on it.

use kpp_front_core::hj_solver::{multi_junction_speed, JunctionProblem};
use kpp_front_core::simulate::{multi_shift_simulate, Scheme, Shift, SimConfig};
use kpp_front_core::speed::{baseline_speed, SpeedInputs};
use kpp_front_core::{EnvironmentProfile, Hamiltonian};

#[test]
fn staircase_speed_agrees_across_all_three_routes() {
    // rising ramp 1 -> 1.5 at speed 2.5, falling ramp 1.5 -> 1 at speed 6
    let up = EnvironmentProfile::tanh_ramp(1.0, 1.5, 2.0).unwrap();
    let down = EnvironmentProfile::tanh_ramp(1.5, 1.0, 2.0).unwrap();

    // route 1: the closed-form baseline across the first junction
    let formula = baseline_speed(&SpeedInputs::new(2.5, 1.0, 1.5, 1.5).unwrap())
        .unwrap()
        .c_star;

    // route 2: the grid solver on the induced staircase R(s)
    let h = 2e-3;
    let problem = JunctionProblem::new(
        Hamiltonian::new(vec![2.5, 6.0], vec![1.0, 1.5, 1.0]).unwrap(),
        vec![1.5 - 0.25 * 2.5 * 2.5, 1.5 - 0.25 * 6.0 * 6.0],
        14.0,
    )
    .unwrap();
    let grid = multi_junction_speed(&problem, h, 1e-10).unwrap();
    assert!(
        (grid - formula).abs() <= 10.0 * h,
        "grid {grid} vs formula {formula}"
    );

    // route 3: the parabolic simulation of the glued coefficient
    let t_end = 240.0;
    let config = SimConfig {
        shifts: vec![
            Shift {
                c: 2.5,
                profile: up,
            },
            Shift {
                c: 6.0,
                profile: down,
            },
        ],
        x_min: -3.2 * t_end,
        x_max: 6.6 * t_end,
        dx: 0.05,
        dt: 0.05,
        t_end,
        scheme: Scheme::ImexCrankNicolson,
        u0: Default::default(),
        front_levels: vec![0.5],
        snapshot_times: vec![],
        sample_interval: 0.25,
    };
    let handle = multi_shift_simulate(&config).unwrap();
    let trace = handle.front_speed(0.5).unwrap();
    let dev = (trace.fitted_speed - grid).abs() / grid;
    assert!(
        dev <= 0.07,
        "PDE {} vs grid {grid} ({:.1}%)",
        trace.fitted_speed,
        100.0 * dev
    );

    // speed sandwich: between the slow-tail and fast-bound speeds
    let lo = 2.0 * 1.0f64.sqrt();
    let hi = (2.0 * 1.5f64.sqrt()).max(6.0);
    assert!(trace.fitted_speed >= lo - 0.1 && trace.fitted_speed <= hi + 0.1);

    println!(
        "staircase: formula {formula:.4}, grid {grid:.4}, PDE {:.4}",
        trace.fitted_speed
    );
}
