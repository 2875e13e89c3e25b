//! Ground truth by dense diagonalization of `a†a + Δσz + gσx(a† + a)` in the
//! photon-number basis truncated at `n_max`.
//!
//! Basis index `2n` is `|n⟩|↑⟩`, `2n + 1` is `|n⟩|↓⟩`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rabi::{FockState, ModelParams};

pub const DEFAULT_N_MAX: usize = 80;
pub const DEFAULT_TOL: f64 = 1e-8;
/// Minimum number of converged eigenvalues for a usable spectrum.
pub const MIN_CONVERGED: usize = 5;
const DEGENERACY_TOL: f64 = 1e-8;

pub fn build_hamiltonian(m: &ModelParams, n_max: usize) -> Result<DMatrix<f64>> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be ≥ 1".into()));
    }
    let dim = 2 * (n_max + 1);
    let (delta, g) = (m.delta(), m.g());
    let mut h = DMatrix::zeros(dim, dim);
    for n in 0..=n_max {
        h[(2 * n, 2 * n)] = n as f64 + delta;
        h[(2 * n + 1, 2 * n + 1)] = n as f64 - delta;
        if n < n_max {
            // σx flips the spin, a† + a moves one photon
            let c = g * ((n + 1) as f64).sqrt();
            for (i, j) in [(2 * n, 2 * n + 3), (2 * n + 1, 2 * n + 2)] {
                h[(i, j)] = c;
                h[(j, i)] = c;
            }
        }
    }
    Ok(h)
}

/// Diagonal of the parity operator `σz (-1)^N`.
pub fn parity_diagonal(n_max: usize) -> Vec<f64> {
    (0..=n_max)
        .flat_map(|n| {
            let s = if n % 2 == 0 { 1.0 } else { -1.0 };
            [s, -s]
        })
        .collect()
}

fn vector_to_state(v: &[f64]) -> FockState {
    let up = v.iter().step_by(2).copied().collect();
    let down = v.iter().skip(1).step_by(2).copied().collect();
    FockState::new(up, down).expect("even-length basis vector")
}

/// Eigenpairs of one truncation, ascending, with degenerate clusters rotated
/// onto parity eigenvectors.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub energies: Vec<f64>,
    pub states: Vec<FockState>,
    pub parity_expectations: Vec<f64>,
}

pub fn eigensystem(m: &ModelParams, n_max: usize) -> Result<Eigensystem> {
    let h = build_hamiltonian(m, n_max)?;
    let dim = h.nrows();
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();

    let parity = parity_diagonal(n_max);
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim
            && energies[end] - energies[end - 1] < DEGENERACY_TOL * energies[end].abs().max(1.0)
        {
            end += 1;
        }
        if end - start > 1 {
            rotate_to_parity(&mut vectors[start..end], &parity);
        }
        start = end;
    }

    let states: Vec<FockState> = vectors.iter().map(|v| vector_to_state(v)).collect();
    let parity_expectations = states.iter().map(FockState::parity_expectation).collect();
    Ok(Eigensystem { energies, states, parity_expectations })
}

/// Diagonalizes the parity operator inside a degenerate subspace.
fn rotate_to_parity(vectors: &mut [Vec<f64>], parity: &[f64]) {
    let k = vectors.len();
    let p = DMatrix::<f64>::from_fn(k, k, |i, j| {
        vectors[i].iter().zip(&vectors[j]).zip(parity).map(|((a, b), s)| a * b * s).sum::<f64>()
    });
    let eig = SymmetricEigen::new(p);
    let dim = vectors[0].len();
    let rotated: Vec<Vec<f64>> = (0..k)
        .map(|c| {
            (0..dim)
                .map(|r| (0..k).map(|i| eig.eigenvectors[(i, c)] * vectors[i][r]).sum::<f64>())
                .collect()
        })
        .collect();
    vectors.clone_from_slice(&rotated);
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleSpectrum {
    pub energies: Vec<f64>,
    /// Sign of the parity expectation, ±1.
    pub parities: Vec<i8>,
    pub parity_expectations: Vec<f64>,
    #[serde(skip)]
    pub states: Vec<FockState>,
    pub n_max: usize,
    /// Leading eigenvalues whose shift under `n_max → 2 n_max` is below `tol`.
    pub converged_count: usize,
}

impl OracleSpectrum {
    /// Converged eigenvalues inside `[lo, hi]` with their indices.
    pub fn converged_in(&self, lo: f64, hi: f64) -> Vec<(usize, f64)> {
        self.energies
            .iter()
            .copied()
            .enumerate()
            .take(self.converged_count)
            .filter(|&(_, e)| e >= lo && e <= hi)
            .collect()
    }

    /// Index of the eigenvalue closest to `energy`.
    pub fn nearest(&self, energy: f64) -> Option<usize> {
        self.energies
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - energy).abs().total_cmp(&(b.1 - energy).abs()))
            .map(|(i, _)| i)
    }

    /// Indices of all eigenvalues within `tol` of `energy`.
    pub fn cluster(&self, energy: f64, tol: f64) -> Vec<usize> {
        (0..self.energies.len()).filter(|&i| (self.energies[i] - energy).abs() <= tol).collect()
    }
}

/// Eigenvalues and parity-labelled eigenvectors at `n_max`, with
/// convergence judged against a run at `2 n_max`.
pub fn diagonalize(m: &ModelParams, n_max: usize, tol: f64) -> Result<OracleSpectrum> {
    let coarse = eigensystem(m, n_max)?;
    let fine = eigensystem(m, 2 * n_max)?;
    let converged_count = coarse
        .energies
        .iter()
        .zip(&fine.energies)
        .take_while(|(a, b)| (*a - *b).abs() < tol)
        .count();
    if converged_count < MIN_CONVERGED {
        return Err(Error::NonConvergence { converged: converged_count, required: MIN_CONVERGED });
    }
    let parities = coarse
        .parity_expectations
        .iter()
        .map(|&p| if p >= 0.0 { 1 } else { -1 })
        .collect();
    Ok(OracleSpectrum {
        energies: coarse.energies,
        parities,
        parity_expectations: coarse.parity_expectations,
        states: coarse.states,
        n_max,
        converged_count,
    })
}

/// `|⟨a|b⟩|` for normalized copies of `a` and `b`.
pub fn overlap(a: &FockState, b: &FockState) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (a.dot(b) / (na * nb)).abs()
}

/// Norm of the projection of normalized `a` onto the span of the
/// orthonormal `basis`.
pub fn subspace_overlap(a: &FockState, basis: &[&FockState]) -> f64 {
    basis.iter().map(|b| overlap(a, b).powi(2)).sum::<f64>().sqrt()
}
