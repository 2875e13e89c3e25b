//! Fock-space amplitudes of analytic eigenstates.
//!
//! A state `ψ₁(a†)|0⟩|↑⟩ + ψ₂(a†)|0⟩|↓⟩` with `ψ(z) = Σ cₙ zⁿ` has amplitude
//! `cₙ √(n!)` on `|n⟩`, so the work is in getting the Taylor coefficients of
//! the branches about `z = 0`. The Heun series is centred at `x = 0`
//! (`z = ±g`) and is re-expanded about `x = 1/2`.

use serde::{Deserialize, Serialize};

use super::{heun_params, HeunSet, ModelParams, SolutionKind};
use crate::error::{Error, Result};
use crate::heun::{hc_minimal_coefficients, hc_polynomial};

/// Relative size of the last amplitudes that counts as a converged expansion.
pub const FOCK_TAIL_TOL: f64 = 1e-10;
const VANISHING_TOL: f64 = 1e-6;
/// Largest polynomial degree checked for series termination.
const MAX_POLY_DEGREE: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockState {
    up: Vec<f64>,
    down: Vec<f64>,
}

impl FockState {
    pub fn new(up: Vec<f64>, down: Vec<f64>) -> Result<Self> {
        if up.is_empty() || up.len() != down.len() {
            return Err(Error::InvalidArgument(
                "spin components must be non-empty and of equal length".into(),
            ));
        }
        Ok(FockState { up, down })
    }

    /// Amplitudes on `|n⟩|↑⟩`.
    pub fn up(&self) -> &[f64] {
        &self.up
    }

    /// Amplitudes on `|n⟩|↓⟩`.
    pub fn down(&self) -> &[f64] {
        &self.down
    }

    pub fn n_max(&self) -> usize {
        self.up.len() - 1
    }

    pub fn norm(&self) -> f64 {
        self.up.iter().chain(&self.down).map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NonFinite("state norm"));
        }
        self.up.iter_mut().chain(self.down.iter_mut()).for_each(|a| *a /= norm);
        Ok(self)
    }

    /// `⟨self|other⟩`, zero-padding the shorter state.
    pub fn dot(&self, other: &FockState) -> f64 {
        let up: f64 = self.up.iter().zip(&other.up).map(|(a, b)| a * b).sum();
        let down: f64 = self.down.iter().zip(&other.down).map(|(a, b)| a * b).sum();
        up + down
    }

    /// `⟨σz (-1)^N⟩ / ⟨ψ|ψ⟩`
    pub fn parity_expectation(&self) -> f64 {
        let mut acc = 0.0;
        for (n, (u, d)) in self.up.iter().zip(&self.down).enumerate() {
            let s = if n % 2 == 0 { 1.0 } else { -1.0 };
            acc += s * (u * u - d * d);
        }
        acc / (self.norm() * self.norm())
    }

    /// Largest amplitude among the last two photon numbers.
    fn tail(&self) -> f64 {
        let k = self.up.len().saturating_sub(2);
        self.up[k..].iter().chain(&self.down[k..]).fold(0.0, |a, b| a.max(b.abs()))
    }
}

/// Applies `ψ₁(a†)`, `ψ₂(a†)` given by Taylor coefficients to the vacuum;
/// the result is not normalized.
pub fn fock_from_power_series(psi1: &[f64], psi2: &[f64]) -> Result<FockState> {
    let mut weight = 1.0;
    let (mut up, mut down) = (Vec::with_capacity(psi1.len()), Vec::with_capacity(psi1.len()));
    for (n, (a, b)) in psi1.iter().zip(psi2).enumerate() {
        if n > 0 {
            weight *= (n as f64).sqrt();
        }
        up.push(a * weight);
        down.push(b * weight);
    }
    FockState::new(up, down)
}

/// Heun coefficients suitable for re-expansion: the terminating polynomial
/// when there is one, otherwise the minimal solution of the recurrence.
fn expansion_coefficients(set: HeunSet, energy: f64, m: &ModelParams, n_terms: usize) -> Result<Vec<f64>> {
    let params = heun_params(set, energy, m);
    match hc_polynomial(&params, MAX_POLY_DEGREE)? {
        Some(poly) => Ok(poly),
        None => hc_minimal_coefficients(&params, n_terms, n_terms + 100),
    }
}

/// Taylor coefficients in `z` about 0 of `coeff · e^{σgz} HC((g + σz)/2g)`,
/// up to `zⁿ` with `n = n_max`.
fn branch_series(h: &[f64], sigma: f64, coeff: f64, g: f64, n_max: usize) -> Vec<f64> {
    // Taylor shift p(x) → p(1/2 + t)
    let mut d = h.to_vec();
    let len = d.len();
    for i in 0..len {
        for j in (i..len - 1).rev() {
            d[j] += 0.5 * d[j + 1];
        }
    }
    // t = σ z / 2g
    let step = sigma / (2.0 * g);
    let mut scale = 1.0;
    let mut hc_z = vec![0.0; n_max + 1];
    for (k, slot) in hc_z.iter_mut().enumerate() {
        if k > 0 {
            scale *= step;
        }
        *slot = d.get(k).copied().unwrap_or(0.0) * scale;
    }
    let mut expo = vec![1.0; n_max + 1];
    for k in 1..=n_max {
        expo[k] = expo[k - 1] * sigma * g / k as f64;
    }
    (0..=n_max)
        .map(|k| coeff * (0..=k).map(|j| expo[j] * hc_z[k - j]).sum::<f64>())
        .collect()
}

/// Normalized Fock state of the chosen solution pair at energy `E`.
///
/// Meaningful at eigenvalues; away from them the Type-I and Type-II
/// branches are built from the minimal Heun solution and the result is
/// only an approximation. Errors with [`Error::VanishingCombination`] when
/// the symmetric (antisymmetric) combination is requested at an eigenvalue
/// of the other parity, and with [`Error::Truncation`] when the amplitudes
/// at `n_max` exceed `1e-10` of the norm.
pub fn state_coefficients(kind: SolutionKind, energy: f64, m: &ModelParams, n_max: usize) -> Result<FockState> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be ≥ 1".into()));
    }
    if !(m.delta() > 0.0 && m.g() > 0.0) {
        return Err(Error::InvalidArgument("analytic states need Δ > 0 and g > 0".into()));
    }
    let ratio = m.ratio(energy)?;
    let g = m.g();
    let n_terms = (n_max + 100).max(250);
    let ha = expansion_coefficients(HeunSet::A, energy, m, n_terms)?;
    let hb = expansion_coefficients(HeunSet::B, energy, m, n_terms)?;

    let u1 = branch_series(&ha, -1.0, 1.0, g, n_max);
    let u2 = branch_series(&hb, -1.0, ratio, g, n_max);
    let v1 = branch_series(&hb, 1.0, ratio, g, n_max);
    let v2 = branch_series(&ha, 1.0, 1.0, g, n_max);

    let combine = |a: &[f64], b: &[f64], s: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + s * y).collect()
    };
    let (f1, f2) = match kind {
        SolutionKind::Asym1 => (u1.clone(), u2.clone()),
        SolutionKind::Asym2 => (v1, v2),
        SolutionKind::Symmetric => (combine(&u1, &v1, 1.0), combine(&u2, &v2, 1.0)),
        SolutionKind::Antisymmetric => (combine(&u1, &v1, -1.0), combine(&u2, &v2, -1.0)),
    };
    let state = pair_to_fock(&f1, &f2)?;
    if !state.norm().is_finite() {
        return Err(Error::NonFinite("Fock amplitudes"));
    }

    if matches!(kind, SolutionKind::Symmetric | SolutionKind::Antisymmetric) {
        let reference = pair_to_fock(&u1, &u2)?.norm();
        if state.norm() < VANISHING_TOL * reference {
            return Err(Error::VanishingCombination(energy));
        }
    }
    let tail = state.tail() / state.norm();
    if tail >= FOCK_TAIL_TOL {
        return Err(Error::Truncation { n_max, tail });
    }
    state.normalized()
}

/// `ψ₁ = (f₁ + f₂)/2`, `ψ₂ = (f₁ - f₂)/2`
fn pair_to_fock(f1: &[f64], f2: &[f64]) -> Result<FockState> {
    let psi1: Vec<f64> = f1.iter().zip(f2).map(|(a, b)| (a + b) / 2.0).collect();
    let psi2: Vec<f64> = f1.iter().zip(f2).map(|(a, b)| (a - b) / 2.0).collect();
    fock_from_power_series(&psi1, &psi2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_maps_to_single_photon() {
        let s = fock_from_power_series(&[0.0, 1.0, 0.0], &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(s.up(), &[0.0, 1.0, 0.0]);
        assert_eq!(s.down(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn square_root_factorial_weights() {
        let s = fock_from_power_series(&[1.0, 1.0, 1.0, 1.0], &[0.0; 4]).unwrap();
        let expected = [1.0, 1.0, 2f64.sqrt(), 6f64.sqrt()];
        for (a, b) in s.up().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn normalization_and_mismatched_lengths() {
        let s = FockState::new(vec![3.0, 0.0], vec![0.0, 4.0]).unwrap().normalized().unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
        assert!(FockState::new(vec![1.0], vec![]).is_err());
        assert!(FockState::new(vec![0.0], vec![0.0]).unwrap().normalized().is_err());
    }

    #[test]
    fn branch_series_of_judd_polynomial() {
        // e^{-gz}(1 - 2g² + 2gz) from HC = 1 - 4g² x₁
        let g = 0.4;
        let h = [1.0, -4.0 * g * g];
        let c = branch_series(&h, -1.0, 1.0, g, 3);
        assert!((c[0] - (1.0 - 2.0 * g * g)).abs() < 1e-15);
        assert!((c[1] - g * (1.0 + 2.0 * g * g)).abs() < 1e-15);
        // z² coefficient: g²/2 (1 - 2g²) - 2g²
        assert!((c[2] - (g * g / 2.0 * (1.0 - 2.0 * g * g) - 2.0 * g * g)).abs() < 1e-15);
    }

    #[test]
    fn judd_asym1_leading_coefficients() {
        let (g, d) = (0.4, 0.6);
        let m = ModelParams::new(d, g).unwrap();
        let e = 1.0 - g * g;
        let ha = expansion_coefficients(HeunSet::A, e, &m, 50).unwrap();
        let hb = expansion_coefficients(HeunSet::B, e, &m, 50).unwrap();
        let f1 = branch_series(&ha, -1.0, 1.0, g, 4);
        let f2 = branch_series(&hb, -1.0, m.ratio(e).unwrap(), g, 4);
        let c0 = (f1[0] + f2[0]) / 2.0;
        let c1 = (f1[1] + f2[1]) / 2.0;
        assert!((c0 - (1.0 - 2.0 * g * g + d) / 2.0).abs() < 1e-14);
        assert!((c1 - (g * (1.0 + 2.0 * g * g) - g * d) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn judd_states_are_normalized() {
        let m = ModelParams::new(0.6, 0.4).unwrap();
        for kind in [SolutionKind::Asym1, SolutionKind::Asym2, SolutionKind::Symmetric, SolutionKind::Antisymmetric] {
            let s = state_coefficients(kind, 0.84, &m, 40).unwrap();
            assert!((s.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn short_expansion_is_rejected() {
        let m = ModelParams::new(0.6, 0.4).unwrap();
        assert!(matches!(
            state_coefficients(SolutionKind::Asym1, 0.84, &m, 3),
            Err(Error::Truncation { .. })
        ));
    }
}
