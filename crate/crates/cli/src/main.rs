//! Command-line laboratory for KPP front spreading speeds.
//!
//! Subcommands mirror the library modules: `eigen` (principal
//! eigenvalue), `speed`/`sweep`/`figure1` (closed-form formulas),
//! `fl-explicit` (exact flux-limited solutions), `fl-solve` (grid
//! solver), `simulate` (parabolic PDE), `validate` (cross-validation
//! suites). Exit codes: 0 success, 1 validation or run failure, 2 usage.

mod simcfg;
mod util;
mod validate;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use kpp_front_core::eigen::{self, EigenOptions};
use kpp_front_core::fl_explicit::{construct_explicit, verify_viscosity};
use kpp_front_core::hj_solver::{self, JunctionProblem, JunctionProblemSpec};
use kpp_front_core::simulate::simulate;
use kpp_front_core::speed::{baseline_speed, leftward_speed, rightward_speed, SpeedInputs};
use kpp_front_core::{EnvironmentProfile, Hamiltonian, Regime};

use simcfg::SimFileConfig;
use util::{parallel_map, provenance, write_atomic};

#[derive(Parser)]
#[command(name = "kpp-front-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Direction {
    Right,
    Left,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Quick,
    Full,
    Pde,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Panel {
    A,
    B,
    C,
    D,
    E,
    F,
}

#[derive(Subcommand)]
enum Command {
    /// Principal eigenvalue of the environment profile
    Eigen {
        /// JSON profile description
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// write the truncated eigenfunction as CSV (y, phi)
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Closed-form spreading speed for one parameter point
    Speed {
        #[arg(long, allow_negative_numbers = true)]
        c1: f64,
        #[arg(long)]
        r_minus: f64,
        #[arg(long)]
        r_plus: f64,
        #[arg(long)]
        lambda1: f64,
        #[arg(long, value_enum, default_value = "right")]
        direction: Direction,
        /// print a JSON object instead of text
        #[arg(long)]
        json: bool,
    },
    /// Sweep c1 and emit both directions plus the baseline speed
    Sweep {
        /// range a:b:n (n points from a to b inclusive)
        #[arg(long)]
        c1_range: String,
        #[arg(long)]
        r_minus: f64,
        #[arg(long)]
        r_plus: f64,
        #[arg(long)]
        lambda1: f64,
        #[arg(long)]
        emit: PathBuf,
    },
    /// Exact flux-limited solution pieces and viscosity residuals
    FlExplicit {
        #[arg(long, allow_negative_numbers = true)]
        c1: f64,
        #[arg(long)]
        r_minus: f64,
        #[arg(long)]
        r_plus: f64,
        #[arg(long)]
        lambda1: f64,
        /// write the solution as CSV (s, rho, piece_tag)
        #[arg(long)]
        emit: Option<PathBuf>,
        /// run the sub/supersolution checks and print the residual report
        #[arg(long)]
        verify: bool,
    },
    /// Numerical junction solve of the obstacle problem
    FlSolve {
        /// JSON junction problem
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
        #[arg(long)]
        emit: Option<PathBuf>,
        /// compare against the explicit single-junction solution
        #[arg(long)]
        compare_explicit: bool,
    },
    /// Direct parabolic simulation with front tracking
    Simulate {
        /// JSON run config
        #[arg(long)]
        config: PathBuf,
        /// write front positions as CSV (t, x_front, u_max)
        #[arg(long)]
        emit: Option<PathBuf>,
        /// snapshot times, e.g. t=100,200,400
        #[arg(long)]
        emit_snapshots: Option<String>,
        /// rate-function times, e.g. t=400
        #[arg(long)]
        emit_rate_function: Option<String>,
    },
    /// Cross-validation suites (quick / full / pde)
    Validate {
        #[arg(long, value_enum, default_value = "quick")]
        suite: Suite,
        /// seed of the randomized property sweeps
        #[arg(long, default_value_t = 0xF0E1D2C3)]
        seed: u64,
        /// write the cross-validation report (pde suite only)
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Speed-vs-shift sweep for one of the six canonical panels
    Figure1 {
        #[arg(long, value_enum)]
        panel: Panel,
        #[arg(long)]
        emit: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, String> {
    match command {
        Command::Eigen { profile, tol, emit } => cmd_eigen(&profile, tol, emit.as_deref()),
        Command::Speed {
            c1,
            r_minus,
            r_plus,
            lambda1,
            direction,
            json,
        } => cmd_speed(c1, r_minus, r_plus, lambda1, direction, json),
        Command::Sweep {
            c1_range,
            r_minus,
            r_plus,
            lambda1,
            emit,
        } => cmd_sweep(&c1_range, r_minus, r_plus, lambda1, &emit),
        Command::FlExplicit {
            c1,
            r_minus,
            r_plus,
            lambda1,
            emit,
            verify,
        } => cmd_fl_explicit(c1, r_minus, r_plus, lambda1, emit.as_deref(), verify),
        Command::FlSolve {
            problem,
            h,
            emit,
            compare_explicit,
        } => cmd_fl_solve(&problem, h, emit.as_deref(), compare_explicit),
        Command::Simulate {
            config,
            emit,
            emit_snapshots,
            emit_rate_function,
        } => cmd_simulate(
            &config,
            emit.as_deref(),
            emit_snapshots.as_deref(),
            emit_rate_function.as_deref(),
        ),
        Command::Validate { suite, seed, emit } => cmd_validate(suite, seed, emit.as_deref()),
        Command::Figure1 { panel, emit } => cmd_figure1(panel, &emit),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("cannot parse {}: {e}", path.display()))
}

fn emit_file(path: &Path, content: &str) -> Result<(), String> {
    write_atomic(path, content).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn cmd_eigen(profile_path: &Path, tol: f64, emit: Option<&Path>) -> Result<ExitCode, String> {
    let profile: EnvironmentProfile = read_json(profile_path)?;
    let options = EigenOptions {
        tol,
        ..EigenOptions::default()
    };
    let result = eigen::lambda1(&profile, &options).map_err(|e| e.to_string())?;
    println!(
        "{{\"lambda1\": {}, \"converged\": {}, \"decay_rate_minus\": {}, \"decay_rate_plus\": {}, \"domain_half_width\": {}, \"grid_step\": {}}}",
        result.lambda1,
        result.converged,
        result.decay_rate_minus,
        result.decay_rate_plus,
        result.domain_half_width,
        result.grid_step
    );
    if let Some(path) = emit {
        let mut csv = String::new();
        csv.push_str(&provenance(&format!("eigen {profile_path:?} tol={tol}")));
        csv.push_str("\ny,phi\n");
        for (y, phi) in &result.eigenfunction {
            csv.push_str(&format!("{y},{phi}\n"));
        }
        emit_file(path, &csv)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_speed(
    c1: f64,
    r_minus: f64,
    r_plus: f64,
    lambda1: f64,
    direction: Direction,
    json: bool,
) -> Result<ExitCode, String> {
    let inputs = SpeedInputs::new(c1, r_minus, r_plus, lambda1).map_err(|e| e.to_string())?;
    let result = match direction {
        Direction::Right => rightward_speed(&inputs),
        Direction::Left => leftward_speed(&inputs),
    }
    .map_err(|e| e.to_string())?;
    let regime = regime_name(result.regime);
    if json {
        println!("{{\"c_star\": {}, \"regime\": \"{}\"}}", result.c_star, regime);
    } else {
        println!("c_star = {} ({})", result.c_star, regime);
    }
    Ok(ExitCode::SUCCESS)
}

fn regime_name(regime: Regime) -> &'static str {
    match regime {
        Regime::KppRight => "kpp_right",
        Regime::KeepPace => "keep_pace",
        Regime::NonlocalPulling => "nonlocal_pulling",
        Regime::KppLeft => "kpp_left",
    }
}

fn parse_range(range: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("range must be a:b:n, got {range}"));
    }
    let a: f64 = parts[0].parse().map_err(|_| "bad range start".to_string())?;
    let b: f64 = parts[1].parse().map_err(|_| "bad range end".to_string())?;
    let n: usize = parts[2].parse().map_err(|_| "bad range count".to_string())?;
    if n < 2 || !(b > a) {
        return Err("range needs b > a and n >= 2".into());
    }
    Ok((a, b, n))
}

fn cmd_sweep(
    c1_range: &str,
    r_minus: f64,
    r_plus: f64,
    lambda1: f64,
    emit: &Path,
) -> Result<ExitCode, String> {
    let (a, b, n) = parse_range(c1_range)?;
    let rows = parallel_map(n, |i| {
        let c1 = a + (b - a) * i as f64 / (n - 1) as f64;
        let inputs = SpeedInputs::new(c1, r_minus, r_plus, lambda1)?;
        let right = rightward_speed(&inputs)?;
        let left = leftward_speed(&inputs)?;
        let base = baseline_speed(&inputs)?;
        Ok::<String, kpp_front_core::SpeedError>(format!(
            "{},{},{},{},{}\n",
            c1,
            right.c_star,
            left.c_star,
            regime_name(right.regime),
            base.c_star
        ))
    });
    let mut csv = String::new();
    csv.push_str(&provenance(&format!(
        "sweep {c1_range} r=({r_minus},{r_plus}) lambda1={lambda1}"
    )));
    csv.push_str("\nc1,c_star_right,c_star_left,regime,s_base\n");
    for row in rows {
        csv.push_str(&row.map_err(|e| e.to_string())?);
    }
    emit_file(emit, &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_fl_explicit(
    c1: f64,
    r_minus: f64,
    r_plus: f64,
    lambda1: f64,
    emit: Option<&Path>,
    verify: bool,
) -> Result<ExitCode, String> {
    let inputs = SpeedInputs::new(c1, r_minus, r_plus, lambda1).map_err(|e| e.to_string())?;
    let sol = construct_explicit(&inputs).map_err(|e| e.to_string())?;
    println!(
        "{{\"s_hat\": {}, \"flux_limiter\": {}, \"junction_value\": {}}}",
        sol.free_boundary, sol.flux_limiter, sol.junction_value
    );
    if let Some(path) = emit {
        let top = sol.breakpoints().last().copied().unwrap_or(1.0);
        let s_max = 1.5 * top.max(c1.max(1.0)) + 4.0;
        let mut csv = String::new();
        csv.push_str(&provenance(&format!(
            "fl-explicit c1={c1} r=({r_minus},{r_plus}) lambda1={lambda1}"
        )));
        csv.push_str("\ns,rho,piece_tag\n");
        let points = 2001;
        for i in 0..points {
            let s = s_max * i as f64 / (points - 1) as f64;
            csv.push_str(&format!("{s},{},{}\n", sol.evaluate(s), sol.piece_tag(s)));
        }
        emit_file(path, &csv)?;
    }
    let mut ok = true;
    if verify {
        let h = Hamiltonian::single(c1, r_minus, r_plus).map_err(|e| e.to_string())?;
        let report = verify_viscosity(&sol, &h, sol.flux_limiter, 10_000);
        println!(
            "{}",
            serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?
        );
        ok = report.pass;
    }
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_fl_solve(
    problem_path: &Path,
    h: f64,
    emit: Option<&Path>,
    compare_explicit: bool,
) -> Result<ExitCode, String> {
    let spec: JunctionProblemSpec = read_json(problem_path)?;
    let inputs_for_compare = if compare_explicit {
        if spec.junctions.len() != 1 {
            return Err("--compare-explicit needs a single-junction problem".into());
        }
        let lambda1 = match (&spec.lambda1s, &spec.flux_limiters) {
            (Some(l), _) => l[0],
            (None, Some(a)) => a[0] + 0.25 * spec.junctions[0] * spec.junctions[0],
            _ => return Err("problem lacks lambda1s / flux_limiters".into()),
        };
        Some(
            SpeedInputs::new(spec.junctions[0], spec.r_values[0], spec.r_values[1], lambda1)
                .map_err(|e| e.to_string())?,
        )
    } else {
        None
    };
    let problem = JunctionProblem::try_from(spec.clone()).map_err(|e| e.to_string())?;
    let sol = hj_solver::solve(&problem, h, hj_solver::DEFAULT_TOL, hj_solver::DEFAULT_MAX_SWEEPS)
        .map_err(|e| e.to_string())?;
    println!(
        "{{\"s_hat_numeric\": {}, \"iterations\": {}, \"residual\": {}}}",
        sol.s_hat_numeric, sol.iterations, sol.residual
    );
    let explicit = inputs_for_compare
        .map(|inp| construct_explicit(&inp).map_err(|e| e.to_string()))
        .transpose()?;
    if let Some(explicit) = &explicit {
        let mut sup = 0.0f64;
        for i in 0..sol.values.len() - 2 {
            sup = sup.max((sol.values[i] - explicit.evaluate(sol.node(i))).abs());
        }
        println!(
            "{{\"sup_error_vs_explicit\": {sup}, \"s_hat_explicit\": {}}}",
            explicit.free_boundary
        );
    }
    if let Some(path) = emit {
        let mut csv = String::new();
        csv.push_str(&provenance(&format!("fl-solve {problem_path:?} h={h}")));
        if explicit.is_some() {
            csv.push_str("\ns,rho_numeric,rho_explicit\n");
        } else {
            csv.push_str("\ns,rho_numeric\n");
        }
        for (i, v) in sol.values.iter().enumerate() {
            let s = sol.node(i);
            match &explicit {
                Some(e) => csv.push_str(&format!("{s},{v},{}\n", e.evaluate(s))),
                None => csv.push_str(&format!("{s},{v}\n")),
            }
        }
        emit_file(path, &csv)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_times(arg: &str) -> Result<Vec<f64>, String> {
    arg.trim_start_matches("t=")
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad time list: {arg}"))
        })
        .collect()
}

fn sibling(path: Option<&Path>, name: &str) -> PathBuf {
    match path {
        Some(p) => {
            let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
            p.with_file_name(format!("{stem}_{name}"))
        }
        None => PathBuf::from(name),
    }
}

fn cmd_simulate(
    config_path: &Path,
    emit: Option<&Path>,
    emit_snapshots: Option<&str>,
    emit_rate_function: Option<&str>,
) -> Result<ExitCode, String> {
    let file: SimFileConfig = read_json(config_path)?;
    let snapshot_times = emit_snapshots.map(parse_times).transpose()?.unwrap_or_default();
    let rate_times = emit_rate_function
        .map(parse_times)
        .transpose()?
        .unwrap_or_default();
    let mut config = file.into_sim_config()?;
    for &t in snapshot_times.iter().chain(&rate_times) {
        if !config.snapshot_times.iter().any(|&s| (s - t).abs() < 1e-9) {
            config.snapshot_times.push(t);
        }
    }
    let config_repr = format!("simulate {config_path:?}");
    let handle = simulate(&config).map_err(|e| e.to_string())?;
    let level = handle.levels()[0];
    let trace = handle.front_speed(level).map_err(|e| e.to_string())?;
    println!(
        "{{\"level\": {}, \"fitted_speed\": {}, \"fit_residual\": {}, \"sup_u\": {}}}",
        level, trace.fitted_speed, trace.fit_residual, handle.sup_u_observed
    );
    if let Some(path) = emit {
        let mut csv = String::new();
        csv.push_str(&provenance(&config_repr));
        csv.push_str("\nt,x_front,u_max\n");
        let umax = handle.u_max_history();
        let mut by_t: std::collections::BTreeMap<u64, (f64, Option<f64>, f64)> =
            Default::default();
        for (t, m) in &umax {
            by_t.insert(t.to_bits(), (*t, None, *m));
        }
        for (t, x) in &trace.samples {
            if let Some(entry) = by_t.get_mut(&t.to_bits()) {
                entry.1 = Some(*x);
            }
        }
        for (_, (t, x, m)) in by_t {
            match x {
                Some(x) => csv.push_str(&format!("{t},{x},{m}\n")),
                None => csv.push_str(&format!("{t},,{m}\n")),
            }
        }
        emit_file(path, &csv)?;
    }
    for &t in &snapshot_times {
        let (xs, us) = handle.snapshot_values(t).map_err(|e| e.to_string())?;
        let mut csv = String::new();
        csv.push_str(&provenance(&config_repr));
        csv.push_str("\nx,u\n");
        for (x, u) in xs.iter().zip(&us) {
            csv.push_str(&format!("{x},{u}\n"));
        }
        emit_file(&sibling(emit, &format!("snapshot_t{t}.csv")), &csv)?;
    }
    for &t in &rate_times {
        let w = handle.rate_function(t).map_err(|e| e.to_string())?;
        let mut csv = String::new();
        csv.push_str(&provenance(&config_repr));
        csv.push_str("\ns,w\n");
        for (s, wv) in &w {
            csv.push_str(&format!("{s},{wv}\n"));
        }
        emit_file(&sibling(emit, &format!("rate_t{t}.csv")), &csv)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(suite: Suite, seed: u64, emit: Option<&Path>) -> Result<ExitCode, String> {
    let name = match suite {
        Suite::Quick => "quick",
        Suite::Full => "full",
        Suite::Pde => "pde",
    };
    let (outcomes, report) = validate::run_suite(name, seed);
    let mut all_pass = true;
    for outcome in &outcomes {
        println!(
            "{} {}: {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.name,
            outcome.detail
        );
        all_pass &= outcome.pass;
    }
    if let (Some(path), Some(report)) = (emit, report) {
        emit_file(path, &report.to_csv(&format!("validate {name} seed={seed}")))?;
    }
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_figure1(panel: Panel, emit: &Path) -> Result<ExitCode, String> {
    // canonical rate presets per panel shape
    let (r_minus, r_plus, lambda1, tag): (f64, f64, f64, &str) = match panel {
        Panel::A => (1.0, 2.0, 2.0, "a"),
        Panel::B => (1.0, 2.0, 3.0, "b"),
        Panel::C => (2.0, 1.0, 2.0, "c"),
        Panel::D => (2.0, 1.0, 3.0, "d"),
        Panel::E => (1.0, 1.0, 1.0, "e"),
        Panel::F => (1.0, 1.0, 2.0, "f"),
    };
    let c_hi = 2.0 * (r_minus.sqrt() + (lambda1 - r_minus).sqrt()) + 2.0;
    let points = 400;
    let rows = parallel_map(points, |i| {
        let c1 = c_hi * i as f64 / (points - 1) as f64;
        let inputs = SpeedInputs::new(c1, r_minus, r_plus, lambda1).expect("preset rates valid");
        let right = rightward_speed(&inputs).expect("preset rates valid");
        format!("{c1},{}\n", right.c_star)
    });
    let mut csv = String::new();
    csv.push_str(&provenance(&format!("figure1 panel={tag}")));
    csv.push_str("\nc1,c_star\n");
    for row in rows {
        csv.push_str(&row);
    }
    emit_file(emit, &csv)?;
    Ok(ExitCode::SUCCESS)
}
