// Copyright 2026 The chain-transport Authors
// SPDX-License-Identifier: Apache-2.0

//! Brute-force simulator on the full `2^(N+1)`-dimensional Hilbert space.
//!
//! Operators are built from 2×2 Pauli-ladder matrices by Kronecker products,
//! with no subspace restriction and no code shared with
//! [`crate::liouvillian`]. Qubit `k < N` is chain site `k + 1`, qubit `N` is
//! the sink; qubit 0 is the most significant factor. Local basis is
//! `{|g⟩, |e⟩}`.

use num_complex::Complex64;

use crate::error::{Result, TransportError};
use crate::integrator::{Dopri5, StepControl};
use crate::model::{max_norm, BlockState, ChainModel, DephasingSchedule};
use crate::CMatrix;

/// Largest chain the oracle accepts (dimension 128).
pub const MAX_ORACLE_SITES: usize = 6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn sigma_plus() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ONE, ZERO])
}

fn sigma_minus() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO])
}

fn sigma_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[-ONE, ZERO, ZERO, ONE])
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` on qubit `k` of `n_qubits`.
pub fn embed(op: &CMatrix, k: usize, n_qubits: usize) -> CMatrix {
    let id = CMatrix::identity(2, 2);
    let mut acc = CMatrix::identity(1, 1);
    for q in 0..n_qubits {
        acc = acc.kronecker(if q == k { op } else { &id });
    }
    acc
}

/// Full-space index of the product state with excited qubits `excited`.
pub fn basis_index(excited: &[usize], n_qubits: usize) -> usize {
    excited.iter().map(|&k| 1usize << (n_qubits - 1 - k)).sum()
}

/// Non-zero entries of a dense operator, for cheap products with `ρ`.
#[derive(Debug, Clone)]
struct SparseOp {
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseOp {
    fn from_dense(m: &CMatrix) -> Self {
        let mut entries = Vec::new();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                let v = m[(r, c)];
                if v != ZERO {
                    entries.push((r, c, v));
                }
            }
        }
        SparseOp { entries }
    }

    /// `out += coeff · A ρ`
    fn left(&self, rho: &CMatrix, coeff: Complex64, out: &mut CMatrix) {
        let d = rho.ncols();
        for &(r, k, v) in &self.entries {
            let cv = coeff * v;
            for c in 0..d {
                out[(r, c)] += cv * rho[(k, c)];
            }
        }
    }

    /// `out += coeff · ρ A`
    fn right(&self, rho: &CMatrix, coeff: Complex64, out: &mut CMatrix) {
        let d = rho.nrows();
        for &(k, c, v) in &self.entries {
            let cv = coeff * v;
            for r in 0..d {
                out[(r, c)] += cv * rho[(r, k)];
            }
        }
    }
}

/// Dissipator pieces `L`, `L†` and `L†L` for one jump operator.
#[derive(Debug, Clone)]
struct Jump {
    op: SparseOp,
    adj: SparseOp,
    number: SparseOp,
}

impl Jump {
    fn new(l: &CMatrix) -> Self {
        Jump {
            op: SparseOp::from_dense(l),
            adj: SparseOp::from_dense(&l.adjoint()),
            number: SparseOp::from_dense(&(l.adjoint() * l)),
        }
    }
}

/// Unrestricted generator of the chain-plus-sink master equation.
#[derive(Debug, Clone)]
pub struct FullLiouvillian {
    n_qubits: usize,
    hamiltonian: SparseOp,
    site_decay: Vec<(f64, Jump)>,
    site_z: Vec<SparseOp>,
    scheds: Vec<DephasingSchedule>,
    sink: (f64, Jump),
    scratch: CMatrix,
    shift_sign: f64,
}

impl FullLiouvillian {
    pub fn new(model: &ChainModel, scheds: &[DephasingSchedule]) -> Result<Self> {
        let n = model.n_sites();
        if n > MAX_ORACLE_SITES {
            return Err(TransportError::DimensionCap { n, max: MAX_ORACLE_SITES });
        }
        if scheds.len() != n {
            return Err(TransportError::InvalidModel(format!(
                "{n} sites need {n} dephasing schedules, got {}",
                scheds.len()
            )));
        }
        let q = n + 1;
        let dim = 1 << q;
        let (sp, sm, sz) = (sigma_plus(), sigma_minus(), sigma_z());

        let mut h = CMatrix::zeros(dim, dim);
        for (i, &w) in model.omega().iter().enumerate() {
            h += embed(&sz, i, q) * Complex64::new(w / 2.0, 0.0);
        }
        for (i, &l) in model.lambda().iter().enumerate() {
            let hop = embed(&sp, i, q) * embed(&sm, i + 1, q) + embed(&sp, i + 1, q) * embed(&sm, i, q);
            h += hop * Complex64::new(l, 0.0);
        }

        let site_decay = (0..n).map(|i| (model.kappa()[i], Jump::new(&embed(&sm, i, q)))).collect();
        let site_z = (0..n).map(|i| SparseOp::from_dense(&embed(&sz, i, q))).collect();
        // σ⁺_sink σ⁻_N
        let transfer = embed(&sp, n, q) * embed(&sm, n - 1, q);

        Ok(FullLiouvillian {
            n_qubits: q,
            hamiltonian: SparseOp::from_dense(&h),
            site_decay,
            site_z,
            scheds: scheds.to_vec(),
            sink: (model.kappa_sink(), Jump::new(&transfer)),
            scratch: CMatrix::zeros(dim, dim),
            shift_sign: 1.0,
        })
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Mutation hook: evolve with `+i s(t)[σᶻ, ρ]` instead of `−i s(t)[σᶻ, ρ]`.
    /// Exists only so tests can show the coherence-phase check catches the flip.
    #[doc(hidden)]
    pub fn with_flipped_shift_sign(mut self) -> Self {
        self.shift_sign = -self.shift_sign;
        self
    }

    fn dissipate(jump: &Jump, rate: f64, rho: &CMatrix, scratch: &mut CMatrix, out: &mut CMatrix) {
        if rate == 0.0 {
            return;
        }
        let r = Complex64::new(rate, 0.0);
        // 2 L ρ L†
        scratch.fill(ZERO);
        jump.adj.right(rho, ONE, scratch);
        jump.op.left(scratch, r * 2.0, out);
        // − L†L ρ − ρ L†L
        jump.number.left(rho, -r, out);
        jump.number.right(rho, -r, out);
    }

    pub fn apply_into(&mut self, t: f64, rho: &CMatrix, out: &mut CMatrix) -> Result<()> {
        out.fill(ZERO);
        self.hamiltonian.left(rho, -I, out);
        self.hamiltonian.right(rho, I, out);

        for i in 0..self.site_z.len() {
            let (kappa, ref jump) = self.site_decay[i];
            Self::dissipate(jump, kappa, rho, &mut self.scratch, out);

            let gamma = self.scheds[i].rate(t)?;
            let shift = self.scheds[i].shift(t)?;
            let z = &self.site_z[i];
            // γ(σᶻρσᶻ − ρ)
            self.scratch.fill(ZERO);
            z.right(rho, ONE, &mut self.scratch);
            z.left(&self.scratch, Complex64::new(gamma, 0.0), out);
            *out -= rho * Complex64::new(gamma, 0.0);
            // −i s[σᶻ, ρ]
            let c = -I * (self.shift_sign * shift);
            z.left(rho, c, out);
            z.right(rho, -c, out);
        }

        let (ks, ref jump) = self.sink;
        Self::dissipate(jump, ks, rho, &mut self.scratch, out);
        Ok(())
    }

    pub fn apply(&mut self, t: f64, rho: &CMatrix) -> Result<CMatrix> {
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        self.apply_into(t, rho, &mut out)?;
        Ok(out)
    }

    /// Single-excitation block of a full-space matrix, ordered `{|1⟩, …, |N⟩, |S⟩}`.
    pub fn block_of(&self, full: &CMatrix) -> CMatrix {
        let q = self.n_qubits;
        let idx: Vec<usize> = (0..q).map(|k| basis_index(&[k], q)).collect();
        CMatrix::from_fn(q, q, |a, b| full[(idx[a], idx[b])])
    }

    /// Embeds a block matrix into the full space, putting `1 − trace` on the
    /// all-ground state.
    pub fn embed_block(&self, block: &BlockState) -> CMatrix {
        let q = self.n_qubits;
        let mut full = CMatrix::zeros(self.dim(), self.dim());
        let idx: Vec<usize> = (0..q).map(|k| basis_index(&[k], q)).collect();
        for a in 0..q {
            for b in 0..q {
                full[(idx[a], idx[b])] = block.matrix()[(a, b)];
            }
        }
        full[(0, 0)] = Complex64::new(block.ground_population(), 0.0);
        full
    }
}

/// Full-space version of the generator, assembled per call.
pub fn full_rhs(rho_full: &CMatrix, t: f64, model: &ChainModel, scheds: &[DephasingSchedule]) -> Result<CMatrix> {
    FullLiouvillian::new(model, scheds)?.apply(t, rho_full)
}

/// Propagates a full-space state and returns it at each checkpoint.
pub fn integrate_full(
    gen: FullLiouvillian,
    initial: CMatrix,
    checkpoints: &[f64],
    ctl: StepControl,
) -> Result<Vec<(f64, CMatrix)>> {
    let mut gen = gen;
    let mut solver = Dopri5::new(move |t, r: &CMatrix, o: &mut CMatrix| gen.apply_into(t, r, o), 0.0, initial, ctl)?;
    let mut out = Vec::with_capacity(checkpoints.len());
    for &tc in checkpoints {
        while solver.t() < tc {
            solver.step_toward(tc)?;
        }
        out.push((tc, solver.state().clone()));
    }
    Ok(out)
}

/// Tolerances used by the oracle comparisons.
pub fn validation_control(max_step: f64) -> StepControl {
    StepControl { rel_tol: 1e-11, abs_tol: 1e-13, max_step, hermitize: true }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionReport {
    /// Max-norm difference between the full state's block and the block state.
    pub max_deviation: f64,
    /// Max `|p_sink^full − p_sink^block|`.
    pub p_sink_deviation: f64,
    /// Max `|tr ρ_full − 1|`.
    pub full_trace_drift: f64,
    /// Largest full-space element outside the block and the ground population.
    pub leakage: f64,
}

/// Integrates both representations from the excitation on site 1 and
/// compares them at `n_checkpoints` equally spaced times up to `t_end`.
pub fn validate_reduction(
    model: &ChainModel,
    scheds: &[DephasingSchedule],
    t_end: f64,
    n_checkpoints: usize,
) -> Result<ReductionReport> {
    if t_end.is_nan() || t_end <= 0.0 || n_checkpoints == 0 {
        return Err(TransportError::Config("need t_end > 0 and at least one checkpoint".into()));
    }
    let gen = FullLiouvillian::new(model, scheds)?;
    let q = gen.n_qubits();
    let times: Vec<f64> = (1..=n_checkpoints).map(|k| t_end * k as f64 / n_checkpoints as f64).collect();
    let max_step = crate::integrator::IntegratorConfig::default().effective_max_step(scheds);
    let ctl = validation_control(max_step);

    let mut initial = CMatrix::zeros(gen.dim(), gen.dim());
    let i0 = basis_index(&[0], q);
    initial[(i0, i0)] = ONE;

    let block_idx: Vec<usize> = (0..q).map(|k| basis_index(&[k], q)).collect();
    let full = integrate_full(gen.clone(), initial, &times, ctl)?;

    let block_cfg = crate::integrator::IntegratorConfig {
        rel_tol: ctl.rel_tol,
        abs_tol: ctl.abs_tol,
        max_step: Some(max_step),
        t_max: t_end,
        residual_eps: f64::MIN_POSITIVE,
        hermitize_every_step: true,
    };
    let record = crate::integrator::Record { checkpoints: times.clone(), ..crate::integrator::Record::final_only() };
    let traj = crate::integrator::integrate(model, scheds, &block_cfg, &record)?;

    let mut report = ReductionReport { max_deviation: 0.0, p_sink_deviation: 0.0, full_trace_drift: 0.0, leakage: 0.0 };
    for ((tf, rho_full), (tb, block)) in full.iter().zip(&traj.checkpoints) {
        debug_assert_eq!(tf, tb);
        let sub = gen.block_of(rho_full);
        report.max_deviation = report.max_deviation.max(max_norm(&(sub - block.matrix())));
        let sink = block_idx[q - 1];
        report.p_sink_deviation = report.p_sink_deviation.max((rho_full[(sink, sink)].re - block.p_sink()).abs());
        report.full_trace_drift = report.full_trace_drift.max((rho_full.trace() - ONE).norm());
        let mut leak = 0.0f64;
        for r in 0..gen.dim() {
            for c in 0..gen.dim() {
                let inside = block_idx.contains(&r) && block_idx.contains(&c);
                if !inside && !(r == 0 && c == 0) {
                    leak = leak.max(rho_full[(r, c)].norm());
                }
            }
        }
        report.leakage = report.leakage.max(leak);
    }
    if full.len() != traj.checkpoints.len() {
        return Err(TransportError::Config(format!("block integration hit {} of {} checkpoints", traj.checkpoints.len(), full.len())));
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceReport {
    /// Max relative error of `|ρ_eg|` against `½ e^{−2Γ(t)}`.
    pub magnitude_error: f64,
    /// Max relative error of the complex coherence, phase included.
    pub complex_error: f64,
}

/// Single site, no loss, prepared in `(|e⟩ + |g⟩)/√2` with the sink in
/// `|g⟩`. The coherence must follow
/// `ρ_eg(t) = ½ exp(−iωt − 2Γ(t) − 2i∫s)`.
pub fn coherence_check(gen: FullLiouvillian, omega: f64, sched: &DephasingSchedule, t_end: f64, n_checkpoints: usize) -> Result<CoherenceReport> {
    if gen.n_qubits() != 2 {
        return Err(TransportError::Config("coherence check needs a single-site chain".into()));
    }
    let e = basis_index(&[0], 2);
    let g = basis_index(&[], 2);
    let mut initial = CMatrix::zeros(4, 4);
    for &r in &[e, g] {
        for &c in &[e, g] {
            initial[(r, c)] = Complex64::new(0.5, 0.0);
        }
    }
    let times: Vec<f64> = (1..=n_checkpoints).map(|k| t_end * k as f64 / n_checkpoints as f64).collect();
    let max_step = crate::integrator::IntegratorConfig::default().effective_max_step(std::slice::from_ref(sched));
    let states = integrate_full(gen, initial, &times, validation_control(max_step))?;

    let mut report = CoherenceReport { magnitude_error: 0.0, complex_error: 0.0 };
    for (t, rho) in states {
        let decay = (-2.0 * sched.accumulated(t)?).exp();
        let phase = -omega * t - 2.0 * sched.accumulated_shift(t)?;
        let expected = Complex64::from_polar(0.5 * decay, phase);
        let got = rho[(e, g)];
        report.magnitude_error = report.magnitude_error.max((got.norm() - expected.norm()).abs() / expected.norm());
        report.complex_error = report.complex_error.max((got - expected).norm() / expected.norm());
    }
    Ok(report)
}

/// Parameter families used for routine reduction checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceSet {
    /// `ω = 1`, `κ = 0.1`, `γ = 0.1`, `λ = 0.3`, `κ_sink = 0.6`, control `(10, 0.8)` on every site.
    Fig2,
    /// `ω = 2`, `κ = 0.1`, `γ = 0.2`, `λ = 0.1`, `κ_sink = 0.6`, control `(10, 0.8)` on every site.
    Fig3,
    /// `ω = (0.5, 2, 0.5)`, `κ = 0.05`, `λ = 0.2`, `κ_sink = 0.6`; only site 2
    /// dephases (`γ₂ = 0.5`, control `(10, 0.8)`, no energy shift).
    Fig4,
}

impl ReferenceSet {
    pub const ALL: [ReferenceSet; 3] = [ReferenceSet::Fig2, ReferenceSet::Fig3, ReferenceSet::Fig4];

    pub fn name(&self) -> &'static str {
        match self {
            ReferenceSet::Fig2 => "fig2",
            ReferenceSet::Fig3 => "fig3",
            ReferenceSet::Fig4 => "fig4",
        }
    }

    /// Model and schedules for an `n`-site chain (`1 ≤ n ≤ 3`).
    pub fn case(&self, n: usize) -> Result<(ChainModel, Vec<DephasingSchedule>)> {
        if !(1..=3).contains(&n) {
            return Err(TransportError::InvalidModel(format!("reference sets are defined for 1..=3 sites, not {n}")));
        }
        let nm = DephasingSchedule::new(0.1, 10.0, 0.8)?;
        match self {
            ReferenceSet::Fig2 => Ok((ChainModel::uniform(n, 1.0, 0.3, 0.1, 0.6)?, vec![nm; n])),
            ReferenceSet::Fig3 => Ok((ChainModel::uniform(n, 2.0, 0.1, 0.1, 0.6)?, vec![nm.with_gamma0(0.2)?; n])),
            ReferenceSet::Fig4 => {
                let omega = [0.5, 2.0, 0.5][..n].to_vec();
                let model = ChainModel::new(omega, vec![0.2; n - 1], vec![0.05; n], 0.6)?;
                let mut scheds = vec![DephasingSchedule::none(); n];
                if n >= 2 {
                    scheds[1] = nm.with_gamma0(0.5)?.without_energy_shift();
                }
                Ok((model, scheds))
            }
        }
    }
}
