// Copyright 2026 The chain-transport Authors
// SPDX-License-Identifier: Apache-2.0

//! Chain description, dephasing control schedules and the reduced
//! single-excitation state.
//!
//! Every rate is a raw number in units of a reference frequency chosen by
//! the caller (ħ = 1).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TransportError};
use crate::CMatrix;

/// Magnitude below which the rate denominator is treated as a pole.
pub const POLE_GUARD: f64 = 1e-12;

/// Static description of an `N`-site chain feeding a sink from its last site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChainModelRepr", into = "ChainModelRepr")]
pub struct ChainModel {
    omega: Vec<f64>,
    lambda: Vec<f64>,
    kappa: Vec<f64>,
    kappa_sink: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainModelRepr {
    omega: Vec<f64>,
    lambda: Vec<f64>,
    kappa: Vec<f64>,
    kappa_sink: f64,
}

impl TryFrom<ChainModelRepr> for ChainModel {
    type Error = TransportError;

    fn try_from(r: ChainModelRepr) -> Result<Self> {
        ChainModel::new(r.omega, r.lambda, r.kappa, r.kappa_sink)
    }
}

impl From<ChainModel> for ChainModelRepr {
    fn from(m: ChainModel) -> Self {
        ChainModelRepr {
            omega: m.omega,
            lambda: m.lambda,
            kappa: m.kappa,
            kappa_sink: m.kappa_sink,
        }
    }
}

impl ChainModel {
    pub fn new(omega: Vec<f64>, lambda: Vec<f64>, kappa: Vec<f64>, kappa_sink: f64) -> Result<Self> {
        let n = omega.len();
        if n == 0 {
            return Err(TransportError::InvalidModel("chain needs at least one site".into()));
        }
        if lambda.len() != n - 1 {
            return Err(TransportError::InvalidModel(format!(
                "{n} sites need {} couplings, got {}",
                n - 1,
                lambda.len()
            )));
        }
        if kappa.len() != n {
            return Err(TransportError::InvalidModel(format!(
                "{n} sites need {n} dissipation rates, got {}",
                kappa.len()
            )));
        }
        let all = omega.iter().chain(&lambda).chain(&kappa).chain(std::iter::once(&kappa_sink));
        if all.clone().any(|x| !x.is_finite()) {
            return Err(TransportError::InvalidModel("non-finite parameter".into()));
        }
        if kappa.iter().any(|&k| k < 0.0) || kappa_sink < 0.0 {
            return Err(TransportError::InvalidModel(
                "dissipation rates must be non-negative".into(),
            ));
        }
        Ok(ChainModel { omega, lambda, kappa, kappa_sink })
    }

    /// Homogeneous chain: every site shares `omega` and `kappa`, every bond `lambda`.
    pub fn uniform(n: usize, omega: f64, lambda: f64, kappa: f64, kappa_sink: f64) -> Result<Self> {
        ChainModel::new(
            vec![omega; n],
            vec![lambda; n.saturating_sub(1)],
            vec![kappa; n],
            kappa_sink,
        )
    }

    pub fn n_sites(&self) -> usize {
        self.omega.len()
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn kappa_sink(&self) -> f64 {
        self.kappa_sink
    }

    pub fn with_lambda_uniform(&self, lambda: f64) -> Result<Self> {
        ChainModel::new(
            self.omega.clone(),
            vec![lambda; self.lambda.len()],
            self.kappa.clone(),
            self.kappa_sink,
        )
    }

    pub fn with_kappa_sink(&self, kappa_sink: f64) -> Result<Self> {
        ChainModel::new(self.omega.clone(), self.lambda.clone(), self.kappa.clone(), kappa_sink)
    }
}

/// Control triple `(γ, J, θ)` of one site.
///
/// The instantaneous dephasing rate is
/// `γ(t) = γ + πJ sin²(2θ) sin(2πJt) / D(t)` and the energy shift is
/// `s(t) = 2πJ cos(2θ) / D(t)`, with
/// `D(t) = 3 + 2cos(4θ) sin²(πJt) + cos(2πJt)`.
/// `J = 0` gives a constant rate and no shift. With `energy_shift` off the
/// site sees only `γ(t)`; this is equivalent to a shift shared by every site,
/// which cancels on the single-excitation block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleRepr", into = "ScheduleRepr")]
pub struct DephasingSchedule {
    gamma0: f64,
    j: f64,
    theta: f64,
    energy_shift: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleRepr {
    gamma0: f64,
    #[serde(rename = "J", default)]
    j: f64,
    #[serde(default, deserialize_with = "crate::config::de_angle")]
    theta: f64,
    #[serde(default = "yes")]
    energy_shift: bool,
}

fn yes() -> bool {
    true
}

impl TryFrom<ScheduleRepr> for DephasingSchedule {
    type Error = TransportError;

    fn try_from(r: ScheduleRepr) -> Result<Self> {
        let s = DephasingSchedule::new(r.gamma0, r.j, r.theta)?;
        Ok(if r.energy_shift { s } else { s.without_energy_shift() })
    }
}

impl From<DephasingSchedule> for ScheduleRepr {
    fn from(s: DephasingSchedule) -> Self {
        ScheduleRepr { gamma0: s.gamma0, j: s.j, theta: s.theta, energy_shift: s.energy_shift }
    }
}

impl DephasingSchedule {
    pub fn new(gamma0: f64, j: f64, theta: f64) -> Result<Self> {
        if !(gamma0.is_finite() && j.is_finite() && theta.is_finite()) {
            return Err(TransportError::InvalidModel("non-finite schedule parameter".into()));
        }
        if gamma0 < 0.0 {
            return Err(TransportError::InvalidModel(format!(
                "baseline dephasing rate must be non-negative, got {gamma0}"
            )));
        }
        if j < 0.0 {
            return Err(TransportError::InvalidModel(format!(
                "control frequency J must be non-negative, got {j}"
            )));
        }
        Ok(DephasingSchedule { gamma0, j, theta, energy_shift: true })
    }

    /// Constant rate `γ`, no shift.
    pub fn markovian(gamma0: f64) -> Result<Self> {
        DephasingSchedule::new(gamma0, 0.0, 0.0)
    }

    /// `γ(t) ≡ 0`, `s(t) ≡ 0`.
    pub fn none() -> Self {
        DephasingSchedule { gamma0: 0.0, j: 0.0, theta: 0.0, energy_shift: true }
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn has_energy_shift(&self) -> bool {
        self.energy_shift
    }

    /// Same rate, `s(t) ≡ 0`.
    pub fn without_energy_shift(self) -> Self {
        DephasingSchedule { energy_shift: false, ..self }
    }

    pub fn with_gamma0(self, gamma0: f64) -> Result<Self> {
        let s = DephasingSchedule::new(gamma0, self.j, self.theta)?;
        Ok(DephasingSchedule { energy_shift: self.energy_shift, ..s })
    }

    pub fn with_control(self, j: f64, theta: f64) -> Result<Self> {
        let s = DephasingSchedule::new(self.gamma0, j, theta)?;
        Ok(DephasingSchedule { energy_shift: self.energy_shift, ..s })
    }

    pub fn is_static(&self) -> bool {
        self.j == 0.0
    }

    fn singular(&self, t: f64) -> TransportError {
        TransportError::SingularSchedule { t, j: self.j, theta: self.theta }
    }

    /// First `t ∈ [0, horizon]` at which the rate denominator vanishes.
    ///
    /// `D(t) = 4(1 − sin²(2θ) sin²(πJt))` bottoms out at `4cos²(2θ)` when
    /// `πJt` is an odd multiple of `π/2`, so poles exist only for `θ` at
    /// `π/4 mod π/2`.
    pub fn first_pole(&self, horizon: f64) -> Option<f64> {
        if self.j == 0.0 || 4.0 * (2.0 * self.theta).cos().powi(2) > POLE_GUARD {
            return None;
        }
        let t = 0.5 / self.j;
        (t <= horizon).then_some(t)
    }

    /// `D(t)`, guarded against poles.
    pub fn denominator(&self, t: f64) -> Result<f64> {
        let x = PI * self.j * t;
        let d = 3.0 + 2.0 * (4.0 * self.theta).cos() * x.sin().powi(2) + (2.0 * x).cos();
        if d.abs() <= POLE_GUARD {
            return Err(self.singular(t));
        }
        Ok(d)
    }

    /// `γ(t)`; negative values signal non-Markovian dephasing.
    pub fn rate(&self, t: f64) -> Result<f64> {
        if self.j == 0.0 {
            return Ok(self.gamma0);
        }
        let d = self.denominator(t)?;
        let num = PI * self.j * (2.0 * self.theta).sin().powi(2) * (2.0 * PI * self.j * t).sin();
        Ok(self.gamma0 + num / d)
    }

    /// `s(t)`.
    pub fn shift(&self, t: f64) -> Result<f64> {
        if self.j == 0.0 {
            return Ok(0.0);
        }
        let d = self.denominator(t)?;
        if !self.energy_shift {
            return Ok(0.0);
        }
        Ok(2.0 * PI * self.j * (2.0 * self.theta).cos() / d)
    }

    /// Both `(γ(t), s(t))` with a single denominator evaluation.
    pub fn rate_and_shift(&self, t: f64) -> Result<(f64, f64)> {
        if self.j == 0.0 {
            return Ok((self.gamma0, 0.0));
        }
        let d = self.denominator(t)?;
        let two_theta = 2.0 * self.theta;
        let rate = self.gamma0
            + PI * self.j * two_theta.sin().powi(2) * (2.0 * PI * self.j * t).sin() / d;
        let shift = if self.energy_shift { 2.0 * PI * self.j * two_theta.cos() / d } else { 0.0 };
        Ok((rate, shift))
    }

    /// `Γ(t) = ∫₀ᵗ γ(s) ds = γt − ¼ ln(1 − sin²(2θ) sin²(πJt))`.
    pub fn accumulated(&self, t: f64) -> Result<f64> {
        if self.j == 0.0 {
            return Ok(self.gamma0 * t);
        }
        let a = (2.0 * self.theta).sin().powi(2);
        let q = a * (PI * self.j * t).sin().powi(2);
        // 4(1 - q) is D(t) written in closed form
        if 4.0 * (1.0 - q) <= POLE_GUARD {
            return Err(self.singular(t));
        }
        Ok(self.gamma0 * t - 0.25 * (-q).ln_1p())
    }

    /// `∫₀ᵗ s(u) du`, continuous in `t`.
    ///
    /// With `x = πJt` and `c = cos(2θ)` this is
    /// `sgn(c)/2 · arg(cos x + i|c| sin x)` taken on the continuous branch.
    pub fn accumulated_shift(&self, t: f64) -> Result<f64> {
        if self.j == 0.0 {
            return Ok(0.0);
        }
        self.denominator(t)?;
        if !self.energy_shift {
            return Ok(0.0);
        }
        let c = (2.0 * self.theta).cos();
        let x = PI * self.j * t;
        let (s, co) = x.sin_cos();
        let ac = c.abs();
        let wrapped = ((ac - 1.0) * s * co).atan2(co * co + ac * s * s);
        Ok(0.5 * c.signum() * (x + wrapped))
    }
}

/// Density matrix on the single-excitation block `{|1⟩, …, |N⟩, |S⟩}`.
///
/// The ground-state population is implicit: `1 − trace`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockState {
    rho: CMatrix,
}

impl BlockState {
    /// Excitation on site 1, everything else in its ground state.
    pub fn initial(n_sites: usize) -> Self {
        let mut rho = CMatrix::zeros(n_sites + 1, n_sites + 1);
        rho[(0, 0)] = Complex64::new(1.0, 0.0);
        BlockState { rho }
    }

    pub fn from_matrix(rho: CMatrix) -> Result<Self> {
        if !rho.is_square() || rho.nrows() < 2 {
            return Err(TransportError::InvalidModel(format!(
                "block state must be square with dimension >= 2, got {}x{}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        Ok(BlockState { rho })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn into_matrix(self) -> CMatrix {
        self.rho
    }

    pub fn n_sites(&self) -> usize {
        self.rho.nrows() - 1
    }

    pub fn trace(&self) -> f64 {
        self.rho.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn p_sink(&self) -> f64 {
        let s = self.n_sites();
        self.rho[(s, s)].re
    }

    pub fn site_populations(&self) -> Vec<f64> {
        (0..self.n_sites()).map(|i| self.rho[(i, i)].re).collect()
    }

    /// Excitation still in the chain, `trace − p_sink`, summed over the
    /// sites directly so it stays accurate once the sink holds most of it.
    pub fn residual(&self) -> f64 {
        (0..self.n_sites()).map(|i| self.rho[(i, i)].re).sum()
    }

    pub fn ground_population(&self) -> f64 {
        1.0 - self.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.rho)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.rho)
    }

    pub fn hermitize(&mut self) {
        hermitize(&mut self.rho);
    }
}

/// `max |ρ − ρ†|`.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Replace `ρ` by `(ρ + ρ†)/2` in place.
pub fn hermitize(m: &mut CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// Largest element magnitude.
pub fn max_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    let mut h = m.clone();
    hermitize(&mut h);
    h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}
