// Copyright 2026 The chain-transport Authors
// SPDX-License-Identifier: Apache-2.0

//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use chain_transport::integrator::Record;
use chain_transport::oracle::{basis_index, integrate_full, validate_reduction, validation_control, FullLiouvillian, ReferenceSet};
use chain_transport::sweep::{preset_fig2, preset_fig3, preset_fig4, run_sweep, Axis, Scenario, SweepResult, SweptParameter};
use chain_transport::{efficiency, integrate, ChainModel, DephasingSchedule, IntegratorConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn within(elapsed: Duration, limit: Duration) -> (bool, String) {
    (elapsed <= limit, format!("runtime {:.2?} (limit {:?})", elapsed, limit))
}

/// Single site decaying into the sink, no dephasing.
fn cascade() -> Outcome {
    let start = Instant::now();
    let (kappa, ks) = (0.1, 0.6);
    let model = ChainModel::new(vec![1.0], vec![], vec![kappa], ks).unwrap();
    let traj = integrate(&model, &[DephasingSchedule::none()], &IntegratorConfig::default(), &Record::default()).unwrap();
    let eta = efficiency(&traj).unwrap().eta;
    let (ok_t, rt) = within(start.elapsed(), Duration::from_secs(1));

    let closed = |t: f64| ks / (kappa + ks) * (1.0 - (-2.0 * (kappa + ks) * t).exp());
    let pointwise = traj.samples.iter().map(|s| (s.p_sink - closed(s.t)).abs()).fold(0.0, f64::max);
    let eta_err = (eta - 6.0 / 7.0).abs();
    outcome(
        eta_err <= 1e-6 && pointwise <= 1e-7 && ok_t,
        format!("|eta - 6/7| = {eta_err:.2e} (<= 1e-6), max |p_sink - closed form| = {pointwise:.2e} (<= 1e-7), {rt}"),
    )
}

/// Full-space single qubit under the modulated dephasing schedule.
fn coherence_decay() -> Outcome {
    let start = Instant::now();
    let (g, j, theta) = (0.1, 10.0, 0.8);
    let sched = DephasingSchedule::new(g, j, theta).unwrap();
    let model = ChainModel::new(vec![1.0], vec![], vec![0.0], 0.0).unwrap();
    let gen = FullLiouvillian::new(&model, &[sched]).unwrap();
    let (e, gnd) = (basis_index(&[0], 2), basis_index(&[], 2));
    let mut rho = chain_transport::CMatrix::zeros(4, 4);
    for r in [e, gnd] {
        for c in [e, gnd] {
            rho[(r, c)] = Complex64::new(0.5, 0.0);
        }
    }
    let times: Vec<f64> = (1..=400).map(|k| k as f64 / 400.0).collect();
    let states = integrate_full(gen, rho, &times, validation_control(0.01 / j)).unwrap();
    let (ok_t, rt) = within(start.elapsed(), Duration::from_secs(1));

    let big_gamma = |t: f64| g * t - 0.25 * (1.0 - (2.0 * theta).sin().powi(2) * (PI * j * t).sin().powi(2)).ln();
    let worst = states
        .iter()
        .map(|(t, r)| {
            let expected = 0.5 * (-2.0 * big_gamma(*t)).exp();
            (r[(e, gnd)].norm() - expected).abs() / expected
        })
        .fold(0.0, f64::max);
    outcome(worst <= 1e-6 && ok_t, format!("max relative error of |rho_eg| = {worst:.2e} (<= 1e-6) on 400 points in [0, 1], {rt}"))
}

/// Block solver against the full-space oracle.
fn reduction() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for n in [2, 3] {
        for set in ReferenceSet::ALL {
            let (m, s) = set.case(n).unwrap();
            let r = validate_reduction(&m, &s, 50.0, 50).unwrap();
            worst = worst.max(r.max_deviation);
            parts.push(format!("{} N={n}: {:.1e}", set.name(), r.max_deviation));
        }
    }
    let (ok_t, rt) = within(start.elapsed(), Duration::from_secs(300));
    outcome(worst <= 1e-8 && ok_t, format!("max deviation {worst:.2e} (<= 1e-8) [{}], {rt}", parts.join(", ")))
}

fn delta_eta(r: &SweepResult, scenario: &str) -> Option<(f64, f64)> {
    let series = r.series(scenario, None);
    let etas: Option<Vec<(f64, f64)>> = series.iter().map(|row| row.eta.map(|e| (row.sweep_value, e))).collect();
    let etas = etas?;
    let base = etas.iter().find(|(v, _)| *v == 0.0)?.1;
    let (at, best) = etas.iter().copied().max_by(|a, b| a.1.total_cmp(&b.1))?;
    Some((best - base, at))
}

fn fig4_reproduction() -> Outcome {
    let start = Instant::now();
    let r = run_sweep(&preset_fig4(), 4).unwrap();
    let (ok_t, rt) = within(start.elapsed(), Duration::from_secs(600));
    let bounded = r.rows.len() == 82 && r.rows.iter().all(|row| row.eta.is_some_and(|e| (0.0..=1.0).contains(&e)));
    match (delta_eta(&r, "non_markovian"), delta_eta(&r, "markovian")) {
        (Some((nm, at_nm)), Some((m, at_m))) => {
            let pass = (nm - 0.0327).abs() <= 0.003 && (m - 0.0192).abs() <= 0.003 && at_nm > 0.0 && at_m > 0.0;
            outcome(
                pass && bounded && ok_t,
                format!(
                    "delta eta NM = {nm:.5} at gamma2 = {at_nm} (0.0327 +/- 0.003), M = {m:.5} at gamma2 = {at_m} (0.0192 +/- 0.003), 82 rows in [0,1]: {bounded}, {rt}"
                ),
            )
        }
        _ => outcome(false, "sweep cells failed".into()),
    }
}

fn fig2_reproduction() -> Outcome {
    let mut cfg = preset_fig2();
    cfg.trajectories = None;
    let r = run_sweep(&cfg, 4).unwrap();
    let gap = |label: &str, lam: f64| -> Option<f64> { Some(r.eta(label, None, lam)? - r.eta("markovian", None, lam)?) };
    match (gap("nm_a", 0.1), gap("nm_a", 0.7), gap("nm_b", 0.1)) {
        (Some(a01), Some(a07), Some(b01)) => outcome(
            a01 > 0.02 && a07 < a01 && b01 > 0.0 && b01 < a01,
            format!("gap(theta=0.8) at lambda=0.1: {a01:.4} (> 0.02), at 0.7: {a07:.4}; gap(theta=pi/3) at 0.1: {b01:.4}"),
        ),
        _ => outcome(false, "sweep cells failed".into()),
    }
}

fn fig3_reproduction() -> Outcome {
    let mut cfg = preset_fig3();
    cfg.group = Some(Axis { parameter: SweptParameter::LambdaUniform, values: vec![0.1] });
    cfg.sweep.values = (2..=6).map(f64::from).collect();
    let r = run_sweep(&cfg, 4).unwrap();
    let series = |label: &str| -> Option<Vec<f64>> { (2..=6).map(|n| r.eta(label, Some(0.1), f64::from(n))).collect() };
    let (Some(m), Some(nm), Some(nd)) = (series("markovian"), series("non_markovian"), series("no_dephasing")) else {
        return outcome(false, "sweep cells failed".into());
    };
    let ordered = (0..5).all(|i| nm[i] > nd[i] && nd[i] > m[i]);
    let decreasing = [&m, &nm, &nd].iter().all(|s| s.windows(2).all(|w| w[1] < w[0]));
    outcome(
        ordered && decreasing,
        format!(
            "NM > ND > M for N=2..6: {ordered}; strictly decreasing: {decreasing} (N=2: {:.3}/{:.3}/{:.3}, N=6: {:.2e}/{:.2e}/{:.2e})",
            nm[0], nd[0], m[0], nm[4], nd[4], m[4]
        ),
    )
}

struct RandomSet {
    model: ChainModel,
    gamma0: Vec<f64>,
    j: f64,
    theta: f64,
}

impl RandomSet {
    fn draw(rng: &mut impl Rng) -> Self {
        let n = rng.gen_range(1..=4);
        let model = ChainModel::new(
            (0..n).map(|_| rng.gen_range(0.0..2.0)).collect(),
            (0..n - 1).map(|_| rng.gen_range(0.0..1.0)).collect(),
            (0..n).map(|_| rng.gen_range(0.1..1.0)).collect(),
            rng.gen_range(0.1..1.0),
        )
        .unwrap();
        let theta = loop {
            let th = rng.gen_range(0.0..PI / 2.0);
            if (th - PI / 4.0).abs() > 0.05 {
                break th;
            }
        };
        RandomSet { gamma0: (0..n).map(|_| rng.gen_range(0.0..1.0)).collect(), j: rng.gen_range(0.0..20.0), theta, model }
    }

    fn schedules(&self) -> Vec<DephasingSchedule> {
        self.gamma0.iter().map(|&g| DephasingSchedule::new(g, self.j, self.theta).unwrap()).collect()
    }

    /// Whether some site's rate dips below zero, sampled over one period.
    fn has_negative_rate(&self) -> bool {
        if self.j == 0.0 {
            return false;
        }
        self.schedules()
            .iter()
            .any(|s| (0..20_000).any(|k| s.rate(f64::from(k) / (20_000.0 * self.j)).unwrap() < 0.0))
    }
}

/// Trace/p_sink monotonicity, positivity, Hermiticity, determinism across
/// worker counts and stability under halved tolerances.
fn invariants() -> Outcome {
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed_c4a1);
    let mut failures = Vec::new();
    let (mut nonneg_sets, mut nonneg_violations, mut neg_sets, mut neg_violations) = (0, 0, 0, 0);
    let (mut worst_trace, mut worst_sink, mut worst_eig, mut worst_herm, mut worst_halving) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for case in 0..50 {
        let set = RandomSet::draw(&mut rng);
        let scheds = set.schedules();
        let cfg = IntegratorConfig::default();
        let checkpoints: Vec<f64> = (1..=10).map(|k| f64::from(k) * 2.0).collect();
        let record = Record { eigenvalues: true, checkpoints, ..Record::default() };
        let traj = integrate(&set.model, &scheds, &cfg, &record).unwrap();

        let rise = traj.samples.windows(2).map(|w| w[1].trace - w[0].trace).fold(0.0, f64::max);
        let drop = traj.samples.windows(2).map(|w| w[0].p_sink - w[1].p_sink).fold(0.0, f64::max);
        let eig = traj.samples.iter().filter_map(|s| s.min_eigenvalue).fold(f64::INFINITY, f64::min);
        let herm = traj
            .checkpoints
            .iter()
            .map(|(_, s)| s.hermiticity_error())
            .chain(std::iter::once(traj.final_state.hermiticity_error()))
            .fold(0.0, f64::max);
        worst_trace = worst_trace.max(rise);
        worst_sink = worst_sink.max(drop);
        worst_eig = worst_eig.min(eig);
        if set.has_negative_rate() {
            neg_sets += 1;
            neg_violations += usize::from(eig < -1e-9);
        } else {
            nonneg_sets += 1;
            nonneg_violations += usize::from(eig < -1e-9);
        }
        worst_herm = worst_herm.max(herm);

        let fine = IntegratorConfig { rel_tol: cfg.rel_tol / 2.0, abs_tol: cfg.abs_tol / 2.0, ..cfg };
        let a = efficiency(&traj).unwrap();
        let b = efficiency(&integrate(&set.model, &scheds, &fine, &Record::final_only()).unwrap()).unwrap();
        let halving = (a.eta - b.eta).abs() - (a.uncertainty + b.uncertainty);
        worst_halving = worst_halving.max(halving);

        let mut exp = preset_fig2();
        exp.name = format!("random{case}");
        exp.model = set.model.clone();
        exp.schedules = set.gamma0.iter().map(|&g| DephasingSchedule::markovian(g).unwrap()).collect();
        exp.sweep = Axis { parameter: SweptParameter::KappaSink, values: vec![set.model.kappa_sink(), 0.5 * set.model.kappa_sink()] };
        exp.scenarios = vec![Scenario::Markovian, Scenario::non_markovian("nm", set.j, set.theta)];
        exp.trajectories = None;
        exp.integrator.residual_eps = 1e-3;
        let one = run_sweep(&exp, 1).unwrap().to_csv();
        let four = run_sweep(&exp, 4).unwrap().to_csv();
        if one != four {
            failures.push(format!("case {case}: output differs between 1 and 4 workers"));
        }
    }
    let ok = worst_trace <= 1e-9 && worst_sink <= 1e-9 && worst_eig >= -1e-9 && worst_herm <= 1e-14 && worst_halving <= 1e-7;
    outcome(
        ok && failures.is_empty(),
        format!(
            "50 sets: max trace rise {worst_trace:.1e}, max p_sink drop {worst_sink:.1e} (<= 1e-9), min eigenvalue {worst_eig:.1e} (>= -1e-9; violated in {nonneg_violations}/{nonneg_sets} sets with non-negative rates \
             and {neg_violations}/{neg_sets} sets whose rate turns negative), \
             hermiticity {worst_herm:.1e} (<= 1e-14), halving excess {worst_halving:.1e} (<= 1e-7), determinism failures {}",
            failures.len()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 analytic cascade", cascade),
        ("2 dephasing closed form", coherence_decay),
        ("3 reduction exactness", reduction),
        ("4 dephasing-assisted transport delta eta", fig4_reproduction),
        ("5 enhancement vs coupling (N=2)", fig2_reproduction),
        ("6 efficiency ordering vs chain length", fig3_reproduction),
        ("7 invariant suite", invariants),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        if !o.passed {
            failed += 1;
        }
        println!("{} criterion {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
