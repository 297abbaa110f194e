// Copyright 2026 The chain-transport Authors
// SPDX-License-Identifier: Apache-2.0

//! Right-hand side of the master equation on the single-excitation block.
//!
//! Basis ordering is `{|1⟩, …, |N⟩, |S⟩}`. On this block
//! `σᶻᵢ = Zᵢ = 2Pᵢ − I`, the site lowering operators map out of the block
//! (their gain term only drains the trace), and the sink jump is
//! `A = |S⟩⟨N|`.

use num_complex::Complex64;

use crate::error::{Result, TransportError};
use crate::model::{ChainModel, DephasingSchedule};
use crate::CMatrix;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone)]
pub struct BlockOperators {
    /// Hamiltonian restricted to the block.
    pub h_block: CMatrix,
    /// `Pᵢ = |i⟩⟨i|` for each site.
    pub site_projectors: Vec<CMatrix>,
    /// `A = |S⟩⟨N|`.
    pub sink_jump: CMatrix,
}

impl BlockOperators {
    pub fn dim(&self) -> usize {
        self.h_block.nrows()
    }

    /// `Zᵢ = 2Pᵢ − I` on the block.
    pub fn site_z(&self, site: usize) -> CMatrix {
        &self.site_projectors[site] * Complex64::new(2.0, 0.0) - CMatrix::identity(self.dim(), self.dim())
    }
}

/// Single-excitation matrix elements of `H = Σ (ωᵢ/2)σᶻᵢ + Σ λᵢ(σ⁺ᵢσ⁻ᵢ₊₁ + h.c.)`.
///
/// The sink carries no coherent energy, so its diagonal is `−Σ ωᵢ/2`.
pub fn build_block_operators(model: &ChainModel) -> BlockOperators {
    let n = model.n_sites();
    let d = n + 1;
    let half_total: f64 = model.omega().iter().sum::<f64>() / 2.0;

    let mut h = CMatrix::zeros(d, d);
    for (j, &w) in model.omega().iter().enumerate() {
        // +ω_j/2 for the excited site, −ω_i/2 for every other site
        h[(j, j)] = Complex64::new(w - half_total, 0.0);
    }
    h[(n, n)] = Complex64::new(-half_total, 0.0);
    for (i, &l) in model.lambda().iter().enumerate() {
        h[(i, i + 1)] = Complex64::new(l, 0.0);
        h[(i + 1, i)] = Complex64::new(l, 0.0);
    }

    let site_projectors = (0..n)
        .map(|i| {
            let mut p = CMatrix::zeros(d, d);
            p[(i, i)] = Complex64::new(1.0, 0.0);
            p
        })
        .collect();
    let mut sink_jump = CMatrix::zeros(d, d);
    sink_jump[(n, n - 1)] = Complex64::new(1.0, 0.0);

    BlockOperators { h_block: h, site_projectors, sink_jump }
}

/// Block generator for a fixed model and schedule set, reusable across
/// many right-hand-side evaluations.
#[derive(Debug, Clone)]
pub struct BlockLiouvillian {
    ops: BlockOperators,
    kappa: Vec<f64>,
    kappa_sink: f64,
    scheds: Vec<DephasingSchedule>,
    rates: Vec<(f64, f64)>,
}

impl BlockLiouvillian {
    pub fn new(model: &ChainModel, scheds: &[DephasingSchedule]) -> Result<Self> {
        if scheds.len() != model.n_sites() {
            return Err(TransportError::InvalidModel(format!(
                "{} sites need {} dephasing schedules, got {}",
                model.n_sites(),
                model.n_sites(),
                scheds.len()
            )));
        }
        Ok(BlockLiouvillian {
            ops: build_block_operators(model),
            kappa: model.kappa().to_vec(),
            kappa_sink: model.kappa_sink(),
            scheds: scheds.to_vec(),
            rates: vec![(0.0, 0.0); scheds.len()],
        })
    }

    pub fn operators(&self) -> &BlockOperators {
        &self.ops
    }

    pub fn dim(&self) -> usize {
        self.ops.dim()
    }

    /// Writes `dρ/dt` at time `t` into `out`.
    pub fn apply_into(&mut self, t: f64, rho: &CMatrix, out: &mut CMatrix) -> Result<()> {
        let d = self.dim();
        let n = d - 1;
        debug_assert_eq!(rho.shape(), (d, d));
        for (slot, s) in self.rates.iter_mut().zip(&self.scheds) {
            *slot = s.rate_and_shift(t)?;
        }

        // −i[H, ρ]
        let h = &self.ops.h_block;
        for b in 0..d {
            for a in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    acc += h[(a, k)] * rho[(k, b)] - rho[(a, k)] * h[(k, b)];
                }
                out[(a, b)] = -I * acc;
            }
        }

        for i in 0..n {
            let kappa = self.kappa[i];
            let (gamma, shift) = self.rates[i];
            // −κ{Pᵢ, ρ}: the 2σ⁻ρσ⁺ gain leaves the block
            // γ(ZρZ − ρ): −2γρ_ab when exactly one index is i
            // −is[Z, ρ]: (z_a − z_b) = ±2 on the same elements
            for k in 0..d {
                if k == i {
                    out[(i, i)] -= 2.0 * kappa * rho[(i, i)];
                    continue;
                }
                let row = rho[(i, k)];
                let col = rho[(k, i)];
                out[(i, k)] += -kappa * row - 2.0 * gamma * row - 2.0 * I * shift * row;
                out[(k, i)] += -kappa * col - 2.0 * gamma * col + 2.0 * I * shift * col;
            }
        }

        // κ_sink(2AρA† − {A†A, ρ}), A = |S⟩⟨N|
        let last = n - 1;
        let ks = self.kappa_sink;
        for k in 0..d {
            out[(last, k)] -= ks * rho[(last, k)];
            out[(k, last)] -= ks * rho[(k, last)];
        }
        out[(n, n)] += 2.0 * ks * rho[(last, last)];
        Ok(())
    }

    pub fn apply(&mut self, t: f64, rho: &CMatrix) -> Result<CMatrix> {
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        self.apply_into(t, rho, &mut out)?;
        Ok(out)
    }
}

/// One-shot evaluation of `dρ/dt` on the block.
pub fn apply_rhs(
    rho: &CMatrix,
    t: f64,
    model: &ChainModel,
    scheds: &[DephasingSchedule],
) -> Result<CMatrix> {
    BlockLiouvillian::new(model, scheds)?.apply(t, rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{hermiticity_error, max_norm, min_eigenvalue};
    use rand::{Rng, SeedableRng};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_psd(rng: &mut impl Rng, d: usize) -> CMatrix {
        let g = CMatrix::from_fn(d, d, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let m = &g * g.adjoint();
        let tr = m.trace().re;
        m / c(tr * rng.gen_range(1.0..2.0))
    }

    /// Straight matrix transcription of the block generator.
    fn matrix_rhs(rho: &CMatrix, t: f64, model: &ChainModel, scheds: &[DephasingSchedule]) -> CMatrix {
        let ops = build_block_operators(model);
        let h = &ops.h_block;
        let mut out = (h * rho - rho * h) * (-I);
        for i in 0..model.n_sites() {
            let p = &ops.site_projectors[i];
            let z = ops.site_z(i);
            let k = model.kappa()[i];
            let (g, s) = scheds[i].rate_and_shift(t).unwrap();
            out -= (p * rho + rho * p) * c(k);
            out += (&z * rho * &z - rho) * c(g);
            out -= (&z * rho - rho * &z) * (I * s);
        }
        let a = &ops.sink_jump;
        let ata = a.adjoint() * a;
        out += (a * rho * a.adjoint() * c(2.0) - &ata * rho - rho * &ata) * c(model.kappa_sink());
        out
    }

    fn sample_model(rng: &mut impl Rng, n: usize) -> (ChainModel, Vec<DephasingSchedule>) {
        let model = ChainModel::new(
            (0..n).map(|_| rng.gen_range(0.0..2.0)).collect(),
            (0..n - 1).map(|_| rng.gen_range(0.0..1.0)).collect(),
            (0..n).map(|_| rng.gen_range(0.0..1.0)).collect(),
            rng.gen_range(0.0..1.0),
        )
        .unwrap();
        let scheds = (0..n)
            .map(|_| DephasingSchedule::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..20.0), rng.gen_range(0.0..0.7)).unwrap())
            .collect();
        (model, scheds)
    }

    #[test]
    fn single_site_hamiltonian() {
        let m = ChainModel::new(vec![1.0], vec![], vec![0.0], 0.0).unwrap();
        let ops = build_block_operators(&m);
        let expected = CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(-0.5)]);
        assert_eq!(ops.h_block, expected);
    }

    #[test]
    fn two_site_hamiltonian() {
        let m = ChainModel::new(vec![1.0, 1.0], vec![0.3], vec![0.0, 0.0], 0.0).unwrap();
        let h = build_block_operators(&m).h_block;
        assert_eq!(h[(0, 0)], c(0.0));
        assert_eq!(h[(1, 1)], c(0.0));
        assert_eq!(h[(0, 1)], c(0.3));
        assert_eq!(h[(1, 0)], c(0.3));
        assert_eq!(h[(2, 2)], c(-1.0));
        assert_eq!(h[(1, 2)], c(0.0));
        assert_eq!(hermiticity_error(&h), 0.0);
    }

    #[test]
    fn zero_state_has_zero_derivative() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        let (m, s) = sample_model(&mut rng, 3);
        let out = apply_rhs(&CMatrix::zeros(4, 4), 0.3, &m, &s).unwrap();
        assert!(out.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn single_site_cascade_rates() {
        let m = ChainModel::new(vec![1.0], vec![], vec![0.1], 0.6).unwrap();
        let s = [DephasingSchedule::none()];
        let mut rho = CMatrix::zeros(2, 2);
        rho[(0, 0)] = c(1.0);
        let out = apply_rhs(&rho, 0.0, &m, &s).unwrap();
        assert!((out[(0, 0)].re + 2.0 * 0.7).abs() < 1e-15);
        assert!((out[(1, 1)].re - 2.0 * 0.6).abs() < 1e-15);
    }

    #[test]
    fn index_form_matches_matrix_form() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(2);
        for n in 1..=5 {
            let (m, s) = sample_model(&mut rng, n);
            let rho = random_psd(&mut rng, n + 1);
            let t = rng.gen_range(0.0..1.0);
            let fast = apply_rhs(&rho, t, &m, &s).unwrap();
            let slow = matrix_rhs(&rho, t, &m, &s);
            assert!(max_norm(&(fast - slow)) < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn trace_derivative_identity() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..100 {
            let n = rng.gen_range(1..6);
            let (m, s) = sample_model(&mut rng, n);
            let rho = random_psd(&mut rng, n + 1);
            let out = apply_rhs(&rho, rng.gen_range(0.0..2.0), &m, &s).unwrap();
            let dtr = out.trace();
            let expected: f64 = -2.0 * (0..n).map(|i| m.kappa()[i] * rho[(i, i)].re).sum::<f64>();
            assert!((dtr.re - expected).abs() < 1e-12);
            assert!(dtr.im.abs() < 1e-12);
        }
    }

    #[test]
    fn lossless_generator_preserves_trace() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(4);
        for _ in 0..20 {
            let n = rng.gen_range(1..5);
            let (m, s) = sample_model(&mut rng, n);
            let m = ChainModel::new(m.omega().to_vec(), m.lambda().to_vec(), vec![0.0; n], 0.0).unwrap();
            let rho = random_psd(&mut rng, n + 1);
            assert!(apply_rhs(&rho, 0.7, &m, &s).unwrap().trace().norm() < 1e-12);
        }
    }

    #[test]
    fn sink_population_never_decreases() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for _ in 0..100 {
            let n = rng.gen_range(1..5);
            let (m, s) = sample_model(&mut rng, n);
            let rho = random_psd(&mut rng, n + 1);
            assert!(min_eigenvalue(&rho) > -1e-12);
            let out = apply_rhs(&rho, rng.gen_range(0.0..2.0), &m, &s).unwrap();
            assert!(out[(n, n)].re >= 0.0);
        }
    }

    #[test]
    fn schedule_count_mismatch() {
        let m = ChainModel::uniform(2, 1.0, 0.1, 0.1, 0.6).unwrap();
        assert!(BlockLiouvillian::new(&m, &[DephasingSchedule::none()]).is_err());
    }

    #[test]
    fn uniform_energy_shift_leaves_site_dynamics_unchanged() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(6);
        let rho = random_psd(&mut rng, 4);
        let s = vec![DephasingSchedule::markovian(0.2).unwrap(); 3];
        let a = ChainModel::new(vec![1.0; 3], vec![0.3, 0.4], vec![0.1; 3], 0.6).unwrap();
        let b = ChainModel::new(vec![2.5; 3], vec![0.3, 0.4], vec![0.1; 3], 0.6).unwrap();
        let da = apply_rhs(&rho, 0.0, &a, &s).unwrap();
        let db = apply_rhs(&rho, 0.0, &b, &s).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((da[(i, j)] - db[(i, j)]).norm() < 1e-14);
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn output_is_hermitian(seed in 0u64..10_000, n in 1usize..6) {
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let (m, s) = sample_model(&mut rng, n);
            let mut rho = random_psd(&mut rng, n + 1);
            crate::model::hermitize(&mut rho);
            let out = apply_rhs(&rho, rng.gen_range(0.0..3.0), &m, &s).unwrap();
            proptest::prop_assert!(hermiticity_error(&out) <= 1e-14);
        }
    }
}
