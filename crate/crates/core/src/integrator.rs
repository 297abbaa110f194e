// Copyright 2026 The chain-transport Authors
// SPDX-License-Identifier: Apache-2.0

//! Adaptive propagation of density matrices.
//!
//! [`Dopri5`] is a Dormand–Prince 5(4) stepper over complex matrices with
//! per-element error control; it is shared by the block integrator and the
//! full-space oracle. [`integrate`] drives the block state from the
//! single-excitation initial condition until the excitation left in the
//! chain falls below `residual_eps`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TransportError};
use crate::liouvillian::BlockLiouvillian;
use crate::model::{hermitize, BlockState, ChainModel, DephasingSchedule};
use crate::CMatrix;

/// Smallest step the controller may take before giving up.
pub const MIN_STEP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Step cap; `None` means `0.01/J_max` for time-dependent schedules, else `0.1`.
    pub max_step: Option<f64>,
    pub t_max: f64,
    pub residual_eps: f64,
    pub hermitize_every_step: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step: None,
            t_max: 1e4,
            residual_eps: 1e-6,
            hermitize_every_step: true,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(TransportError::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("rel_tol", self.rel_tol)?;
        positive("abs_tol", self.abs_tol)?;
        positive("t_max", self.t_max)?;
        positive("residual_eps", self.residual_eps)?;
        if let Some(h) = self.max_step {
            positive("max_step", h)?;
        }
        Ok(())
    }

    pub fn effective_max_step(&self, scheds: &[DephasingSchedule]) -> f64 {
        self.max_step.unwrap_or_else(|| {
            let j_max = scheds.iter().map(|s| s.j()).fold(0.0, f64::max);
            if j_max > 0.0 {
                0.01 / j_max
            } else {
                0.1
            }
        })
    }
}

/// Step-size controls handed to [`Dopri5`].
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub hermitize: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

// Dormand–Prince tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b − b̂ for the embedded 4th-order solution
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

/// Dormand–Prince 5(4) propagator over square complex matrices.
pub struct Dopri5<F> {
    rhs: F,
    ctl: StepControl,
    t: f64,
    h: f64,
    y: CMatrix,
    k: [CMatrix; 7],
    tmp: CMatrix,
    y_new: CMatrix,
    stats: StepStats,
}

impl<F> Dopri5<F>
where
    F: FnMut(f64, &CMatrix, &mut CMatrix) -> Result<()>,
{
    pub fn new(mut rhs: F, t0: f64, y0: CMatrix, ctl: StepControl) -> Result<Self> {
        let (r, c) = y0.shape();
        let zero = || CMatrix::zeros(r, c);
        let mut k = [zero(), zero(), zero(), zero(), zero(), zero(), zero()];
        rhs(t0, &y0, &mut k[0])?;
        Ok(Dopri5 {
            rhs,
            ctl,
            t: t0,
            h: ctl.max_step.min(1e-2),
            y: y0,
            k,
            tmp: zero(),
            y_new: zero(),
            stats: StepStats { evaluations: 1, ..StepStats::default() },
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &CMatrix {
        &self.y
    }

    pub fn into_state(self) -> CMatrix {
        self.y
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    fn stage(&mut self, coeffs: &[(usize, f64)], h: f64, c: f64, into: usize) -> Result<()> {
        let t = self.t;
        {
            let y = self.y.as_slice();
            let tmp = self.tmp.as_mut_slice();
            tmp.copy_from_slice(y);
            for &(idx, a) in coeffs {
                let ha = h * a;
                for (dst, src) in tmp.iter_mut().zip(self.k[idx].as_slice()) {
                    *dst += src * ha;
                }
            }
        }
        (self.rhs)(t + c * h, &self.tmp, &mut self.k[into])?;
        self.stats.evaluations += 1;
        Ok(())
    }

    /// Takes one accepted step of at most `min(max_step, t_stop − t)`.
    /// Returns the new time.
    pub fn step_toward(&mut self, t_stop: f64) -> Result<f64> {
        loop {
            let remaining = t_stop - self.t;
            let mut h = self.h.min(self.ctl.max_step);
            // absorb round-off slivers instead of taking a ~1e-15 step later
            let lands = h >= remaining - 1e-12 * t_stop.abs().max(1.0);
            if lands {
                h = remaining;
            }
            if h < MIN_STEP {
                return Err(TransportError::StepSizeUnderflow { t: self.t, h });
            }

            self.stage(&[(0, A21)], h, C2, 1)?;
            self.stage(&[(0, A31), (1, A32)], h, C3, 2)?;
            self.stage(&[(0, A41), (1, A42), (2, A43)], h, C4, 3)?;
            self.stage(&[(0, A51), (1, A52), (2, A53), (3, A54)], h, C5, 4)?;
            self.stage(&[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)], h, 1.0, 5)?;

            {
                let y = self.y.as_slice();
                let out = self.y_new.as_mut_slice();
                let [k0, _, k2, k3, k4, k5, _] = &self.k;
                for (idx, o) in out.iter_mut().enumerate() {
                    *o = y[idx]
                        + (k0.as_slice()[idx] * B1
                            + k2.as_slice()[idx] * B3
                            + k3.as_slice()[idx] * B4
                            + k4.as_slice()[idx] * B5
                            + k5.as_slice()[idx] * B6)
                            * h;
                }
            }
            let t_new = if lands { t_stop } else { self.t + h };
            (self.rhs)(t_new, &self.y_new, &mut self.k[6])?;
            self.stats.evaluations += 1;

            let err = self.error_norm(h);
            if err <= 1.0 {
                let factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                // a truncated landing step must not shrink the controller's proposal
                self.h = if lands { self.h.max(h * factor) } else { h * factor };
                std::mem::swap(&mut self.y, &mut self.y_new);
                self.t = t_new;
                self.k.swap(0, 6);
                if self.ctl.hermitize {
                    hermitize(&mut self.y);
                }
                self.stats.accepted += 1;
                return Ok(self.t);
            }
            self.stats.rejected += 1;
            self.h = h * (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
        }
    }

    fn error_norm(&self, h: f64) -> f64 {
        let [k0, _, k2, k3, k4, k5, k6] = &self.k;
        let y = self.y.as_slice();
        let yn = self.y_new.as_slice();
        let mut worst = 0.0f64;
        for idx in 0..y.len() {
            let e: Complex64 = (k0.as_slice()[idx] * E1
                + k2.as_slice()[idx] * E3
                + k3.as_slice()[idx] * E4
                + k4.as_slice()[idx] * E5
                + k5.as_slice()[idx] * E6
                + k6.as_slice()[idx] * E7)
                * h;
            let scale = self.ctl.abs_tol + self.ctl.rel_tol * y[idx].norm().max(yn[idx].norm());
            worst = worst.max(e.norm() / scale);
        }
        worst
    }
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Residual chain excitation dropped below `residual_eps`.
    Converged,
    /// Reached `t_max` first.
    TimeLimit,
}

/// Observables at one accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub p_sink: f64,
    pub populations: Vec<f64>,
    pub trace: f64,
    pub min_eigenvalue: Option<f64>,
}

impl Sample {
    fn of(t: f64, state: &BlockState, with_eig: bool) -> Self {
        Sample {
            t,
            p_sink: state.p_sink(),
            populations: state.site_populations(),
            trace: state.trace(),
            min_eigenvalue: with_eig.then(|| state.min_eigenvalue()),
        }
    }
}

/// Which observables to keep while integrating.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    /// Minimum spacing between recorded samples; `0` keeps every accepted step.
    pub every: f64,
    /// Stop recording samples after this time (the final sample is always kept).
    pub until: f64,
    /// Also compute the smallest eigenvalue of every recorded state.
    pub eigenvalues: bool,
    /// Times at which the integrator lands exactly and stores the full block state.
    pub checkpoints: Vec<f64>,
}

impl Default for Record {
    fn default() -> Self {
        Record { every: 0.0, until: f64::INFINITY, eigenvalues: false, checkpoints: Vec::new() }
    }
}

impl Record {
    /// Only the final state.
    pub fn final_only() -> Self {
        Record { until: -1.0, ..Record::default() }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub checkpoints: Vec<(f64, BlockState)>,
    pub final_state: BlockState,
    pub t_end: f64,
    pub termination: Termination,
    pub stats: StepStats,
    pub residual_eps: f64,
}

impl Trajectory {
    pub fn p_sink(&self) -> f64 {
        self.final_state.p_sink()
    }

    pub fn residual(&self) -> f64 {
        self.final_state.residual()
    }
}

/// Propagate from the excitation on site 1.
pub fn integrate(
    model: &ChainModel,
    scheds: &[DephasingSchedule],
    config: &IntegratorConfig,
    record: &Record,
) -> Result<Trajectory> {
    integrate_from(BlockState::initial(model.n_sites()), model, scheds, config, record)
}

pub fn integrate_from(
    initial: BlockState,
    model: &ChainModel,
    scheds: &[DephasingSchedule],
    config: &IntegratorConfig,
    record: &Record,
) -> Result<Trajectory> {
    config.validate()?;
    if initial.n_sites() != model.n_sites() {
        return Err(TransportError::InvalidModel(format!(
            "initial state has {} sites, model has {}",
            initial.n_sites(),
            model.n_sites()
        )));
    }
    for s in scheds {
        if let Some(t) = s.first_pole(config.t_max) {
            return Err(TransportError::SingularSchedule { t, j: s.j(), theta: s.theta() });
        }
    }
    let mut gen = BlockLiouvillian::new(model, scheds)?;
    let ctl = StepControl {
        rel_tol: config.rel_tol,
        abs_tol: config.abs_tol,
        max_step: config.effective_max_step(scheds),
        hermitize: config.hermitize_every_step,
    };

    let mut checkpoints: Vec<f64> = record
        .checkpoints
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t <= config.t_max)
        .collect();
    checkpoints.sort_by(f64::total_cmp);
    checkpoints.dedup();
    let mut next_checkpoint = 0;

    let mut samples = Vec::new();
    let mut stored = Vec::new();
    let mut last_sample = f64::NEG_INFINITY;
    if record.until >= 0.0 {
        samples.push(Sample::of(0.0, &initial, record.eigenvalues));
        last_sample = 0.0;
    }

    let mut residual = initial.residual();
    let mut solver = Dopri5::new(
        move |t, rho: &CMatrix, out: &mut CMatrix| gen.apply_into(t, rho, out),
        0.0,
        initial.into_matrix(),
        ctl,
    )?;

    let termination = loop {
        if residual < config.residual_eps {
            break Termination::Converged;
        }
        if solver.t() >= config.t_max {
            break Termination::TimeLimit;
        }
        let target = checkpoints.get(next_checkpoint).copied().unwrap_or(config.t_max);
        let t = solver.step_toward(target)?;
        let state = BlockState::from_matrix(solver.state().clone())?;
        residual = state.residual();

        if next_checkpoint < checkpoints.len() && t == checkpoints[next_checkpoint] {
            stored.push((t, state.clone()));
            next_checkpoint += 1;
        }
        if t <= record.until && t - last_sample >= record.every {
            samples.push(Sample::of(t, &state, record.eigenvalues));
            last_sample = t;
        }
    };

    let t_end = solver.t();
    let stats = solver.stats();
    let final_state = BlockState::from_matrix(solver.into_state())?;
    if samples.last().is_none_or(|s| s.t < t_end) {
        samples.push(Sample::of(t_end, &final_state, record.eigenvalues));
    }
    Ok(Trajectory {
        samples,
        checkpoints: stored,
        final_state,
        t_end,
        termination,
        stats,
        residual_eps: config.residual_eps,
    })
}

/// Asymptotic sink population with its bracket half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Efficiency {
    pub eta: f64,
    pub uncertainty: f64,
}

/// The limit of `p_sink` lies in `[p_sink, p_sink + R]` where `R` is the
/// excitation left in the chain; report the midpoint.
pub fn efficiency(traj: &Trajectory) -> Result<Efficiency> {
    let residual = traj.residual();
    if traj.termination != Termination::Converged || residual >= traj.residual_eps {
        return Err(TransportError::NotConverged { t: traj.t_end, residual });
    }
    let half = 0.5 * residual.max(0.0);
    Ok(Efficiency { eta: traj.p_sink() + half, uncertainty: half })
}
