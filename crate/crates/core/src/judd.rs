//! Exceptional (Judd) spectrum: energies `E = N₁ - g²` at which both Heun
//! series terminate, the `(Δ, g)` curves on which that happens, and the
//! doubly degenerate polynomial eigenstates living there.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heun::{hc_truncation_residual, truncated_coefficients, truncation_normalizer};
use crate::rabi::{heun_params, state_coefficients, wronskian, FockState, HeunSet, ModelParams, SolutionKind};

/// Largest `|constraint_value|` accepted as on-curve.
pub const ON_CURVE_TOL: f64 = 1e-9;
pub const DEFAULT_DELTA_SQ_MAX: f64 = 16.0;
const DELTA_SQ_STEP: f64 = 1e-3;
const DELTA_SQ_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JuddPoint {
    pub n1: usize,
    pub g: f64,
    pub delta: f64,
    pub energy: f64,
    pub constraint_residual: f64,
}

/// Energy at which the series of `set` terminates at degree `order`:
/// `order - g²` for Set A, `order + 1 - g²` for Set B.
pub fn truncation_energy(set: HeunSet, order: usize, g: f64) -> f64 {
    let shift = match set {
        HeunSet::A => 0.0,
        HeunSet::B => 1.0,
    };
    order as f64 + shift - g * g
}

fn check_n1(n1: usize) -> Result<()> {
    if n1 == 0 {
        return Err(Error::InvalidArgument("N1 must be ≥ 1".into()));
    }
    Ok(())
}

fn normalized_residual(set: HeunSet, order: usize, energy: f64, m: &ModelParams) -> Result<f64> {
    let params = heun_params(set, energy, m);
    Ok(hc_truncation_residual(&params, order)? / truncation_normalizer(&params, order))
}

/// Normalized closing residual of the Set-B series at order `N₁ - 1` and
/// `E = N₁ - g²`; zero exactly on the `N₁`-th Judd curve.
pub fn constraint_value(n1: usize, m: &ModelParams) -> Result<f64> {
    check_n1(n1)?;
    normalized_residual(HeunSet::B, n1 - 1, truncation_energy(HeunSet::A, n1, m.g()), m)
}

/// `(Set A at order N₁, Set B at order N₁ - 1)` normalized residuals at
/// `E = N₁ - g²`. Both vanish on the same curve.
pub fn constraint_pair(n1: usize, m: &ModelParams) -> Result<(f64, f64)> {
    check_n1(n1)?;
    let energy = truncation_energy(HeunSet::A, n1, m.g());
    Ok((
        normalized_residual(HeunSet::A, n1, energy, m)?,
        normalized_residual(HeunSet::B, n1 - 1, energy, m)?,
    ))
}

fn constraint_at_delta_sq(n1: usize, g: f64, delta_sq: f64) -> Result<f64> {
    constraint_value(n1, &ModelParams::new(delta_sq.sqrt(), g)?)
}

/// All `Δ > 0` on the `N₁`-th Judd curve at coupling `g` with
/// `Δ² ≤ delta_sq_max`, ascending.
pub fn solve_judd_delta_up_to(n1: usize, g: f64, delta_sq_max: f64) -> Result<Vec<f64>> {
    check_n1(n1)?;
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::InvalidArgument(format!("g must be positive, got {g}")));
    }
    if !(delta_sq_max.is_finite() && delta_sq_max > 0.0) {
        return Err(Error::InvalidArgument(format!("Δ²_max must be positive, got {delta_sq_max}")));
    }
    let f = |d2: f64| constraint_at_delta_sq(n1, g, d2);
    let steps = (delta_sq_max / DELTA_SQ_STEP).ceil() as usize;
    let mut roots = Vec::new();
    let mut lo = DELTA_SQ_STEP.min(delta_sq_max) * 1e-3;
    let mut f_lo = f(lo)?;
    for i in 1..=steps {
        let hi = (i as f64 * DELTA_SQ_STEP).min(delta_sq_max);
        if hi <= lo {
            continue;
        }
        let f_hi = f(hi)?;
        if f_hi == 0.0 {
            roots.push(hi);
        } else if f_lo != 0.0 && f_lo.signum() != f_hi.signum() {
            roots.push(bisect(&f, lo, hi, f_lo)?);
        }
        lo = hi;
        f_lo = f_hi;
    }
    Ok(roots.into_iter().map(f64::sqrt).collect())
}

/// [`solve_judd_delta_up_to`] with `Δ²_max = 16`.
pub fn solve_judd_delta(n1: usize, g: f64) -> Result<Vec<f64>> {
    solve_judd_delta_up_to(n1, g, DEFAULT_DELTA_SQ_MAX)
}

fn bisect(f: &impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, mut f_lo: f64) -> Result<f64> {
    while hi - lo > DELTA_SQ_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Judd points of `m` with energy in `[e_min, e_max]`.
pub fn judd_points_in_window(m: &ModelParams, e_min: f64, e_max: f64) -> Result<Vec<JuddPoint>> {
    let g2 = m.g() * m.g();
    let mut out = Vec::new();
    let mut n1 = 1;
    while n1 as f64 - g2 <= e_max {
        let energy = truncation_energy(HeunSet::A, n1, m.g());
        if energy >= e_min {
            let residual = constraint_value(n1, m)?;
            if residual.abs() < ON_CURVE_TOL {
                out.push(JuddPoint { n1, g: m.g(), delta: m.delta(), energy, constraint_residual: residual });
            }
        }
        n1 += 1;
    }
    Ok(out)
}

/// The doubly degenerate eigenspace at a Judd point.
#[derive(Debug, Clone, Serialize)]
pub struct JuddReport {
    pub point: JuddPoint,
    /// Type-I pair, then Type-II pair, each normalized.
    pub states: [FockState; 2],
    /// `W₁` of the two branches at `z = 0`; nonzero for a genuine degeneracy.
    pub wronskian_at_origin: f64,
    pub multiplicity: usize,
    /// Terminating Set-A coefficients `h_0 ..= h_{N₁}`.
    pub set_a_coefficients: Vec<f64>,
    /// Terminating Set-B coefficients `h_0 ..= h_{N₁-1}`.
    pub set_b_coefficients: Vec<f64>,
}

pub fn judd_state(n1: usize, m: &ModelParams, n_max: usize) -> Result<JuddReport> {
    let residual = constraint_value(n1, m)?;
    if residual.abs() >= ON_CURVE_TOL {
        return Err(Error::OffCurve(residual));
    }
    let energy = truncation_energy(HeunSet::A, n1, m.g());
    let states = [
        state_coefficients(SolutionKind::Asym1, energy, m, n_max)?,
        state_coefficients(SolutionKind::Asym2, energy, m, n_max)?,
    ];
    Ok(JuddReport {
        point: JuddPoint { n1, g: m.g(), delta: m.delta(), energy, constraint_residual: residual },
        states,
        wronskian_at_origin: wronskian(1, energy, 0.0, m)?,
        multiplicity: 2,
        set_a_coefficients: truncated_coefficients(&heun_params(HeunSet::A, energy, m), n1)?,
        set_b_coefficients: truncated_coefficients(&heun_params(HeunSet::B, energy, m), n1 - 1)?,
    })
}
