//! Numerical verification suite. Each check returns a [`CheckOutcome`];
//! sample counts and horizons come from a [`Scale`], tolerances are fixed.

use std::fmt;
use std::time::Instant;

use num_traits::Signed;
use rand::Rng;
use serde::Serialize;

use crate::algebra::{NilpotentGroupElement, Takiff};
use crate::error::{Error, Result};
use crate::invariants::{generator_specs, gradient_invariant};
use crate::kostant::KostantSection;
use crate::ode::{self, Tolerances};
use crate::sampling::{self, Support};
use crate::scalar::{rational, Rational};
use crate::series::{self, bound_check, series_coefficients, series_eval};
use crate::toda::{omega_block, Formulation, Method, Settings, TodaState, TodaSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Pass,
    Fail,
    /// Evaluated and reported, but not counted as a failure.
    Informational,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
    pub seconds: f64,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Informational => "INFO",
        };
        write!(f, "{tag} {} ({:.2}s): {}", self.name, self.seconds, self.detail)
    }
}

/// Sample counts and horizons.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scale {
    pub points: usize,
    pub horizon: f64,
    pub reversal_horizon: f64,
    pub dt: f64,
    pub group_samples: usize,
    pub omega_samples: usize,
    pub series_samples: usize,
    pub series_ode_samples: usize,
    pub solvability_samples: usize,
    pub solvability_horizon: f64,
}

impl Scale {
    /// The sizes the acceptance criteria are stated at.
    pub const FULL: Scale = Scale {
        points: 100,
        horizon: 10.0,
        reversal_horizon: 5.0,
        dt: 1e-3,
        group_samples: 100,
        omega_samples: 100,
        series_samples: 1000,
        series_ode_samples: 20,
        solvability_samples: 20,
        solvability_horizon: 50.0,
    };

    pub const QUICK: Scale = Scale {
        points: 10,
        horizon: 2.0,
        reversal_horizon: 2.0,
        dt: 1e-3,
        group_samples: 10,
        omega_samples: 20,
        series_samples: 100,
        series_ode_samples: 5,
        solvability_samples: 5,
        solvability_horizon: 50.0,
    };
}

/// `(n, l)` pairs covered by the algebraic checks.
pub const SMALL_CASES: [(usize, usize); 6] = [(1, 0), (1, 1), (1, 2), (2, 0), (2, 1), (2, 2)];

/// Lax-flow initial data whose `γ` stay positive for `t ∈ [0, 10]`.
/// Negating `ρ` gives data with the same property for the canonical flow.
pub fn reference_lax_state(n: usize, l: usize) -> Option<TodaState<f64>> {
    let (rho, gamma): (Vec<Vec<f64>>, Vec<Vec<f64>>) = match (n, l) {
        (1, 0) => (vec![vec![0.5]], vec![vec![0.7]]),
        (2, 0) => (vec![vec![0.5], vec![-0.3]], vec![vec![0.7], vec![1.2]]),
        (1, 1) => (vec![vec![1.34, -0.87]], vec![vec![0.4, 1.0]]),
        (1, 2) => (vec![vec![1.34, -1.26, 1.91]], vec![vec![0.44, 1.08, 0.23]]),
        (2, 1) => (
            vec![vec![1.6, -1.79], vec![1.36, -1.72]],
            vec![vec![0.34, 0.33], vec![1.14, 0.2]],
        ),
        (2, 2) => (
            vec![vec![1.83, -1.1, -0.38], vec![1.66, -1.33, -0.91]],
            vec![vec![0.7, 0.27, 1.23], vec![0.83, 0.46, 0.34]],
        ),
        _ => return None,
    };
    TodaState::new(rho, gamma).ok()
}

pub fn reference_canonical_state(n: usize) -> Option<TodaState<f64>> {
    let mut s = reference_lax_state(n, 1)?;
    s.rho.iter_mut().flatten().for_each(|v| *v = -*v);
    Some(s)
}

fn outcome(name: &'static str, start: Instant, ok: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        name,
        status: if ok { Status::Pass } else { Status::Fail },
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn errored(name: &'static str, start: Instant, e: Error) -> CheckOutcome {
    outcome(name, start, false, format!("error: {e}"))
}

macro_rules! attempt {
    ($name:expr, $start:expr, $e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return errored($name, $start, err),
        }
    };
}

/// Pairwise Poisson brackets of the generating invariants vanish.
pub fn poisson_commutation(scale: &Scale) -> CheckOutcome {
    const NAME: &str = "poisson-commutation";
    const TOL: f64 = 1e-9;
    let start = Instant::now();
    let mut rng = sampling::rng(1001);
    let mut worst = 0.0f64;
    let mut pairs = 0usize;
    for (n, l) in SMALL_CASES {
        let alg = attempt!(NAME, start, Takiff::new(n, l));
        let specs = generator_specs(n, l);
        for _ in 0..scale.points {
            let z = sampling::random_float(&mut rng, &alg, Support::All, 1.0);
            let grads = attempt!(
                NAME,
                start,
                specs
                    .iter()
                    .map(|&s| gradient_invariant(&alg, s, &z))
                    .collect::<Result<Vec<_>>>()
            );
            for a in 0..grads.len() {
                for b in a + 1..grads.len() {
                    let br = attempt!(NAME, start, alg.bracket(&grads[a], &grads[b]));
                    let v = attempt!(NAME, start, alg.q_form(&z, &br));
                    worst = worst.max(v.abs());
                    pairs += 1;
                }
            }
        }
    }
    outcome(NAME, start, worst < TOL, format!("{pairs} brackets, max |{{I,J}}| = {worst:.3e} (tol {TOL:e})"))
}

/// Generating invariants are constant along the Lax flow.
pub fn lax_conservation(scale: &Scale) -> CheckOutcome {
    const NAME: &str = "lax-conservation";
    const TOL: f64 = 1e-6;
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut settings = Settings::new(scale.horizon, scale.dt, Method::Rk4);
    settings.stride = 10;
    for (n, l) in SMALL_CASES {
        let sys = attempt!(NAME, start, TodaSystem::type_a(n, l));
        let init = reference_lax_state(n, l).expect("reference data");
        let traj = attempt!(NAME, start, sys.integrate(Formulation::Lax, &init, &settings));
        for d in traj.invariant_drift() {
            worst = worst.max(d);
        }
    }
    outcome(NAME, start, worst < TOL, format!("max relative invariant drift {worst:.3e} (tol {TOL:e})"))
}

/// The Hamiltonian is constant along canonical trajectories.
pub fn energy_conservation(scale: &Scale) -> CheckOutcome {
    const NAME: &str = "energy-conservation";
    const TOL: f64 = 1e-6;
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut settings = Settings::new(scale.horizon, scale.dt, Method::Rk4);
    settings.stride = 10;
    settings.record_invariants = false;
    for n in [1, 2] {
        let sys = attempt!(NAME, start, TodaSystem::type_a(n, 1));
        let init = reference_canonical_state(n).expect("reference data");
        let traj = attempt!(NAME, start, sys.integrate(Formulation::Canonical, &init, &settings));
        worst = worst.max(traj.energy_drift());
    }
    outcome(NAME, start, worst < TOL, format!("max |ΔH|/|H| = {worst:.3e} (tol {TOL:e})"))
}

/// Canonical flow forward and Lax flow backward agree in raw coordinates.
pub fn time_reversal(scale: &Scale) -> CheckOutcome {
    const NAME: &str = "canonical-lax-reversal";
    const TOL: f64 = 1e-6;
    let start = Instant::now();
    let sys = attempt!(NAME, start, TodaSystem::type_a(1, 1));
    let init = reference_canonical_state(1).expect("reference data");
    let mut settings = Settings::new(scale.reversal_horizon, scale.dt, Method::Rk4);
    settings.record_invariants = false;
    let can = attempt!(NAME, start, sys.integrate(Formulation::Canonical, &init, &settings));
    let lax = attempt!(NAME, start, sys.integrate(Formulation::Lax, &init, &settings.clone().backward()));
    let mut worst = 0.0f64;
    for (a, b) in can.points.iter().zip(&lax.points) {
        for (x, y) in a.state.flatten().iter().zip(b.state.flatten()) {
            worst = worst.max((x - y).abs());
        }
    }
    let ok = worst < TOL && can.points.len() == lax.points.len();
    outcome(NAME, start, ok, format!("sup-norm difference {worst:.3e} over {} points (tol {TOL:e})", can.points.len()))
}

/// `T₁` at `γ = (1, 3)` and `det t′ = ±γ_{i,0}^{l+1}` on rational samples.
pub fn omega_blocks(scale: &Scale) -> CheckOutcome {
    const NAME: &str = "omega-block";
    let start = Instant::now();
    let r = |v| rational(v, 1);
    let st = attempt!(NAME, start, TodaState::new(vec![vec![r(0), r(0)]], vec![vec![r(1), r(3)]]));
    let t1 = attempt!(NAME, start, omega_block(&st, 0)).inverse;
    let expected = [[r(-3), r(1)], [r(1), r(0)]];
    let display_ok = (0..2).all(|i| (0..2).all(|j| t1[(i, j)] == expected[i][j]));
    let mut rng = sampling::rng(1005);
    let mut bad = 0;
    for _ in 0..scale.omega_samples {
        let l = rng.gen_range(0..=3);
        let n = rng.gen_range(1..=2);
        let pos = |rng: &mut sampling::SampleRng| rational(rng.gen_range(1..=9), rng.gen_range(1..=5));
        let rho = (0..n).map(|_| (0..=l).map(|_| sampling::random_rational(&mut rng, 5, 4)).collect()).collect();
        let gamma = (0..n).map(|_| (0..=l).map(|_| pos(&mut rng)).collect()).collect();
        let st = attempt!(NAME, start, TodaState::<Rational>::new(rho, gamma));
        for i in 0..n {
            let block = attempt!(NAME, start, omega_block(&st, i));
            let det = block.t_prime.determinant();
            let g0 = st.gamma[i][0].clone();
            let power = (0..=l).fold(r(1), |acc, _| acc * g0.clone());
            let product_ok = (&block.t_prime * &block.inverse) == crate::linalg::Matrix::identity(l + 1);
            if det.abs() != power || !product_ok {
                bad += 1;
            }
        }
    }
    let ok = display_ok && bad == 0;
    outcome(NAME, start, ok, format!("T1(1,3) matches: {display_ok}; determinant mismatches: {bad}/{}", scale.omega_samples))
}

/// Exact round trip `(a, s) → a·(ssf + s) → reduce → (a, s)`, and exact
/// equality of invariants at `y` and at its section point.
pub fn kostant_round_trip(scale: &Scale) -> (CheckOutcome, CheckOutcome) {
    const NAME: &str = "kostant-round-trip";
    const ORBIT: &str = "orbit-invariance";
    let start = Instant::now();
    let mut rng = sampling::rng(1006);
    let mut mismatches = 0;
    let mut nonzero = 0;
    let mut total = 0;
    for (n, l) in SMALL_CASES {
        let alg = match Takiff::new(n, l) {
            Ok(a) => a,
            Err(e) => return (errored(NAME, start, e.clone()), errored(ORBIT, start, e)),
        };
        let ks = match KostantSection::<Rational>::with_default_ssf(&alg) {
            Ok(k) => k,
            Err(e) => return (errored(NAME, start, e.clone()), errored(ORBIT, start, e)),
        };
        for _ in 0..scale.group_samples {
            total += 1;
            let log = sampling::random_exact(&mut rng, &alg, Support::Nilradical);
            let a = NilpotentGroupElement::new(log).expect("nilradical sample");
            let c: Vec<Rational> = (0..ks.dim()).map(|_| sampling::random_rational(&mut rng, 4, 3)).collect();
            let s = ks.section_point(&c).expect("dimension matches");
            let result = alg
                .group_apply(&a, &(ks.ssf() + &s))
                .and_then(|y| ks.orbit_invariance_check(&y));
            match result {
                Ok(report) => {
                    let r = &report.reduction;
                    if r.group.log() != a.log() || r.section_point != s {
                        mismatches += 1;
                    }
                    if !num_traits::Zero::is_zero(&report.discrepancy) {
                        nonzero += 1;
                    }
                }
                Err(_) => {
                    mismatches += 1;
                    nonzero += 1;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    (
        CheckOutcome {
            name: NAME,
            status: if mismatches == 0 { Status::Pass } else { Status::Fail },
            detail: format!("{mismatches}/{total} samples not recovered exactly"),
            seconds: secs,
        },
        CheckOutcome {
            name: ORBIT,
            status: if nonzero == 0 { Status::Pass } else { Status::Fail },
            detail: format!("{nonzero}/{total} samples with nonzero invariant discrepancy"),
            seconds: secs,
        },
    )
}

fn hypothesis_sample(rng: &mut impl Rng) -> [f64; 4] {
    std::array::from_fn(|_| rng.gen_range(-1.0..1.0))
}

/// `|a_{k+2}| < 2/k²` for `k ≤ 200` and the three low-order bounds.
pub fn series_bound(scale: &Scale) -> CheckOutcome {
    const NAME: &str = "series-bound";
    let start = Instant::now();
    let mut rng = sampling::rng(1008);
    let mut failures = 0;
    let mut min_margin = f64::INFINITY;
    let mut max_low_order = [0.0f64; 3];
    for _ in 0..scale.series_samples {
        let [a0, a1, a2, c0] = hypothesis_sample(&mut rng);
        let sol = series_coefficients(a0, a1, a2, c0, series::DEFAULT_ORDER);
        let report = bound_check(&sol);
        if !report.passed() {
            failures += 1;
        }
        min_margin = min_margin.min(report.min_margin);
        for (m, b) in max_low_order.iter_mut().zip(&report.low_order) {
            *m = m.max(b.value);
        }
    }
    outcome(
        NAME,
        start,
        failures == 0,
        format!(
            "{failures}/{} samples violate a bound; min margin {min_margin:.3e}; max |a3|,|a4|,|a5| = {:.4}, {:.4}, {:.4}",
            scale.series_samples, max_low_order[0], max_low_order[1], max_low_order[2]
        ),
    )
}

/// Series evaluation agrees with adaptive integration on `[0, 1]`.
pub fn series_vs_integrator(scale: &Scale) -> CheckOutcome {
    const NAME: &str = "series-vs-integrator";
    const TOL: f64 = 1e-8;
    let start = Instant::now();
    let mut rng = sampling::rng(1009);
    let mut worst = 0.0f64;
    for _ in 0..scale.series_ode_samples {
        let [a0, a1, a2, c0] = hypothesis_sample(&mut rng);
        let sol = series_coefficients(a0, a1, a2, c0, series::DEFAULT_ORDER);
        let rhs = |_t: f64, y: &[f64]| Ok(series::ode_rhs(&[y[0], y[1], y[2]], &c0).to_vec());
        let tol = Tolerances { abs: 1e-13, rel: 1e-13 };
        let r = ode::solve_rk45(rhs, &[a0, a1, 2.0 * a2], 1.0, 0.05, tol, |t, y| {
            worst = worst.max((series_eval(&sol, &t).value - y[0]).abs());
            Ok(())
        });
        attempt!(NAME, start, r);
    }
    outcome(NAME, start, worst < TOL, format!("max |series − rk45| = {worst:.3e} (tol {TOL:e})"))
}

/// Quartic identity residual along canonical rank-one trajectories.
pub fn quartic_identity(scale: &Scale) -> CheckOutcome {
    const NAME: &str = "quartic-identity";
    const TOL: f64 = 1e-8;
    let start = Instant::now();
    let sys = attempt!(NAME, start, TodaSystem::type_a(1, 1));
    let init = reference_canonical_state(1).expect("reference data");
    let mut settings = Settings::new(scale.horizon, scale.dt, Method::Rk4);
    settings.record_invariants = false;
    let traj = attempt!(NAME, start, sys.integrate(Formulation::Canonical, &init, &settings));
    let worst = traj
        .points
        .iter()
        .filter_map(|p| p.quartic_residual)
        .fold(0.0f64, |m, r| m.max(r.abs()));
    outcome(NAME, start, worst < TOL, format!("max residual {worst:.3e} over {} points (tol {TOL:e})", traj.points.len()))
}

/// Draws `(c₀, c₁, c₂, c₃)` satisfying the global-solvability conditions.
pub fn solvability_sample(rng: &mut impl Rng) -> [f64; 4] {
    let c0 = rng.gen_range(0.05..0.95);
    let c1 = rng.gen_range(0.05..0.95);
    let c2 = rng.gen_range(0.1..1.9);
    let u = rng.gen_range(0.05..0.95);
    [c0, c1, c2, c1 * c1 + c1 + u * c2 / 2.0]
}

/// Canonical integration to the solvability horizon from initial data
/// passing the global-solvability conditions; requires `q̄ > 0` throughout.
pub fn global_solvability(scale: &Scale) -> CheckOutcome {
    const NAME: &str = "global-solvability";
    let start = Instant::now();
    let mut rng = sampling::rng(1011);
    let sys = attempt!(NAME, start, TodaSystem::type_a(1, 1));
    let mut settings = Settings::new(scale.solvability_horizon, 1e-2, Method::Rk45);
    settings.record_invariants = false;
    settings.stride = 100;
    let mut survived = 0;
    let mut crossings = Vec::new();
    for _ in 0..scale.solvability_samples {
        let [c0, c1, c2, c3] = solvability_sample(&mut rng);
        assert!(series::global_condition(&c0, &c1, &c2, &c3).holds);
        let init = series::toda_initial_state(c0, c1, c2, c3).expect("c2 > 0");
        let raw = attempt!(NAME, start, init.to_raw());
        match sys.integrate(Formulation::Canonical, &raw, &settings) {
            Ok(traj) => {
                let finite = traj.points.iter().all(|p| p.state.flatten().iter().all(|v| v.is_finite()));
                let positive = traj.points.iter().all(|p| p.state.gamma[0][1] > 0.0);
                if finite && positive {
                    survived += 1;
                }
            }
            Err(Error::PositivityLoss { time, .. }) => crossings.push(time),
            Err(_) => {}
        }
    }
    let first = crossings.iter().copied().fold(f64::INFINITY, f64::min);
    let last = crossings.iter().copied().fold(0.0f64, f64::max);
    let detail = if crossings.is_empty() {
        format!("{survived}/{} trajectories kept q̄ > 0 to t = {}", scale.solvability_samples, scale.solvability_horizon)
    } else {
        format!(
            "{survived}/{} trajectories kept q̄ > 0 to t = {}; q̄ reached 0 at t ∈ [{first:.2}, {last:.2}]",
            scale.solvability_samples, scale.solvability_horizon
        )
    };
    outcome(NAME, start, survived == scale.solvability_samples, detail)
}

/// Every check at the given scale. The global-solvability check is
/// reported as informational.
pub fn run_all(scale: &Scale) -> Vec<CheckOutcome> {
    let (kostant, orbit) = kostant_round_trip(scale);
    let mut solvability = global_solvability(scale);
    solvability.status = Status::Informational;
    vec![
        poisson_commutation(scale),
        lax_conservation(scale),
        energy_conservation(scale),
        time_reversal(scale),
        omega_blocks(scale),
        kostant,
        orbit,
        series_bound(scale),
        series_vs_integrator(scale),
        quartic_identity(scale),
        solvability,
    ]
}
