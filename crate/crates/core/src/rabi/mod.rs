//! Analytic solution branches of the Rabi eigenproblem and the condition
//! functions built from them.
//!
//! With `f₁ = ψ₁ + ψ₂`, `f₂ = ψ₁ - ψ₂` (ω = ħ = 1) the eigenproblem becomes
//!
//! ```text
//! f₁' = (E - gz)/(z + g) f₁ - Δ/(z + g) f₂
//! f₂' = (E + gz)/(z - g) f₂ - Δ/(z - g) f₁
//! ```
//!
//! Type-I solutions are regular at `z = g` (`x₁ = (g - z)/2g`), Type-II
//! solutions at `z = -g` (`x₂ = (g + z)/2g`). All evaluations are on the
//! real interval `(-g, g)`, where both arguments lie in `(0, 1)`.

mod state;

pub use state::{fock_from_power_series, state_coefficients, FockState};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heun::{self, HeunEval, HeunParams};

/// Below this `|E + g²|` the ratio `Δ/(E + g²)` is treated as a pole.
pub const RATIO_POLE_TOL: f64 = 1e-12;
/// Relative agreement required between the two forms of `K±`.
pub const K_FORM_TOL: f64 = 1e-10;
const MIRROR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    delta: f64,
    g: f64,
}

impl ModelParams {
    /// Half level splitting `Δ` and coupling `g`, both in units of ω and
    /// strictly positive.
    pub fn new(delta: f64, g: f64) -> Result<Self> {
        if !(delta.is_finite() && g.is_finite() && delta > 0.0 && g > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "model parameters must be finite and positive (Δ = {delta}, g = {g})"
            )));
        }
        Ok(ModelParams { delta, g })
    }

    /// Allows `Δ = 0` or `g = 0`. Only the Fock-space oracle accepts such
    /// parameters; the analytic layer rejects them.
    pub fn limiting(delta: f64, g: f64) -> Result<Self> {
        if !(delta.is_finite() && g.is_finite() && delta >= 0.0 && g >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "model parameters must be finite and non-negative (Δ = {delta}, g = {g})"
            )));
        }
        Ok(ModelParams { delta, g })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    fn require_analytic(&self) -> Result<()> {
        if self.delta > 0.0 && self.g > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidArgument(
                "analytic solutions need Δ > 0 and g > 0".into(),
            ))
        }
    }

    fn check_z(&self, z: f64) -> Result<()> {
        self.require_analytic()?;
        if z.is_finite() && z.abs() < self.g {
            Ok(())
        } else {
            Err(Error::OutsideDomain { z, g: self.g })
        }
    }

    /// `Δ/(E + g²)`, the fixed ratio between the two components of a branch.
    pub fn ratio(&self, energy: f64) -> Result<f64> {
        let denom = energy + self.g * self.g;
        if denom.abs() < RATIO_POLE_TOL {
            return Err(Error::RatioPole(denom));
        }
        Ok(self.delta / denom)
    }

    /// `(x₁, x₂) = ((g - z)/2g, (g + z)/2g)`
    pub fn heun_arguments(&self, z: f64) -> (f64, f64) {
        let two_g = 2.0 * self.g;
        ((self.g - z) / two_g, (self.g + z) / two_g)
    }

    /// Default second validation point `0.375 g` (0.3 at g = 0.8).
    pub fn default_z_values(&self) -> Vec<f64> {
        vec![0.0, 0.375 * self.g]
    }
}

/// The two distinct confluent Heun parameter sets. Set A serves the Type-I
/// `f₁` and Type-II `f₂` components, Set B the other two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HeunSet {
    A,
    B,
}

pub fn heun_params(set: HeunSet, energy: f64, m: &ModelParams) -> HeunParams {
    let g2 = m.g * m.g;
    let e = energy;
    let common = (e * e + e - 2.0 * m.delta * m.delta + 1.0) / 2.0;
    match set {
        HeunSet::A => HeunParams::from_raw(
            4.0 * g2,
            -(e + g2 + 1.0),
            -(e + g2),
            -2.0 * g2,
            -1.5 * g2 * g2 + (1.0 - 2.0 * e) * g2 / 2.0 + common,
        ),
        HeunSet::B => HeunParams::from_raw(
            4.0 * g2,
            -(e + g2),
            -(e + g2 + 1.0),
            2.0 * g2,
            -1.5 * g2 * g2 - (3.0 + 2.0 * e) * g2 / 2.0 + common,
        ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    TypeI,
    TypeII,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    F1,
    F2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BranchId {
    pub branch: Branch,
    pub component: Component,
}

impl BranchId {
    pub const TYPE_I_F1: BranchId = BranchId { branch: Branch::TypeI, component: Component::F1 };
    pub const TYPE_I_F2: BranchId = BranchId { branch: Branch::TypeI, component: Component::F2 };
    pub const TYPE_II_F1: BranchId = BranchId { branch: Branch::TypeII, component: Component::F1 };
    pub const TYPE_II_F2: BranchId = BranchId { branch: Branch::TypeII, component: Component::F2 };

    pub const ALL: [BranchId; 4] =
        [Self::TYPE_I_F1, Self::TYPE_I_F2, Self::TYPE_II_F1, Self::TYPE_II_F2];

    /// `(parameter set, carries the Δ/(E+g²) prefactor, exponent sign)`
    fn layout(self) -> (HeunSet, bool, f64) {
        match (self.branch, self.component) {
            (Branch::TypeI, Component::F1) => (HeunSet::A, false, -1.0),
            (Branch::TypeI, Component::F2) => (HeunSet::B, true, -1.0),
            (Branch::TypeII, Component::F1) => (HeunSet::B, true, 1.0),
            (Branch::TypeII, Component::F2) => (HeunSet::A, false, 1.0),
        }
    }
}

/// Value and first two `z`-derivatives of a function at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl std::ops::Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet { value: self.value + o.value, d1: self.d1 + o.d1, d2: self.d2 + o.d2 }
    }
}

impl std::ops::Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet { value: self.value - o.value, d1: self.d1 - o.d1, d2: self.d2 - o.d2 }
    }
}

/// Term budget growing like `1/|ln x|` as `x → 1`, never below the default.
fn term_budget(x: f64) -> usize {
    let decay = -x.abs().ln();
    if decay > 0.0 {
        ((60.0 / decay) as usize).clamp(heun::DEFAULT_N_MAX, 100_000)
    } else {
        heun::DEFAULT_N_MAX
    }
}

/// HC evaluated with the default tolerance; non-convergence is an error here.
pub(crate) fn hc(set: HeunSet, energy: f64, x: f64, m: &ModelParams) -> Result<HeunEval> {
    let params = heun_params(set, energy, m);
    let ev = heun::hc_eval(&params, x, heun::DEFAULT_TOL, term_budget(x))?;
    if !ev.converged {
        return Err(Error::NotConverged { n_terms: ev.n_terms, tail_bound: ev.tail_bound });
    }
    Ok(ev)
}

/// Value and derivatives of `f = c e^{σgz} HC((g + σz)/2g)`, with σ = -1 for
/// Type-I and σ = +1 for Type-II, and `c` either 1 or `Δ/(E + g²)`.
pub fn branch_jet(id: BranchId, energy: f64, z: f64, m: &ModelParams) -> Result<Jet> {
    m.check_z(z)?;
    let (set, scaled, sigma) = id.layout();
    let coeff = if scaled { m.ratio(energy)? } else { 1.0 };
    let (x1, x2) = m.heun_arguments(z);
    let x = if sigma < 0.0 { x1 } else { x2 };
    let ev = hc(set, energy, x, m)?;
    let g = m.g;
    let pre = coeff * (sigma * g * z).exp();
    // dx/dz = σ/2g
    Ok(Jet {
        value: pre * ev.value,
        d1: pre * (sigma * g * ev.value + sigma * ev.derivative / (2.0 * g)),
        d2: pre * (g * g * ev.value + ev.derivative + ev.second_derivative / (4.0 * g * g)),
    })
}

pub fn eval_f(id: BranchId, energy: f64, z: f64, m: &ModelParams) -> Result<f64> {
    Ok(branch_jet(id, energy, z, m)?.value)
}

/// `F₁ ..= F₄` at one `(E, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FValues {
    pub f: [f64; 4],
}

impl FValues {
    /// `max(1, |F₁| + |F₄|)`, the scale for relative tolerances.
    pub fn scale(&self) -> f64 {
        (self.f[0].abs() + self.f[3].abs()).max(1.0)
    }
}

pub fn f_values(energy: f64, z: f64, m: &ModelParams) -> Result<FValues> {
    m.check_z(z)?;
    let g = m.g;
    let (x1, x2) = m.heun_arguments(z);
    let a1 = hc(HeunSet::A, energy, x1, m)?;
    let b1 = hc(HeunSet::B, energy, x1, m)?;
    let a2 = hc(HeunSet::A, energy, x2, m)?;
    let b2 = hc(HeunSet::B, energy, x2, m)?;
    let f1 = (energy + g * g) * a1.value + x2 * a1.derivative;
    let f2 = b1.value;
    let f3 = a2.value;
    let f4 = (energy - g * g - 2.0 * g * z) * b2.value - x2 * b2.derivative;
    Ok(FValues { f: [f1, f2, f3, f4] })
}

#[allow(non_snake_case)]
pub fn eval_F(k: usize, energy: f64, z: f64, m: &ModelParams) -> Result<f64> {
    if !(1..=4).contains(&k) {
        return Err(Error::InvalidArgument(format!("F index {k} not in 1..=4")));
    }
    Ok(f_values(energy, z, m)?.f[k - 1])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Plus,
    Minus,
}

impl Family {
    fn sign(self) -> f64 {
        match self {
            Family::Plus => 1.0,
            Family::Minus => -1.0,
        }
    }
}

/// All condition functions at one `(E, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionValues {
    pub f: FValues,
    pub g_plus: [f64; 4],
    pub g_minus: [f64; 4],
    pub k_plus: f64,
    pub k_minus: f64,
}

fn g_family(fv: &FValues, family: Family, ratio: f64, delta: f64, g: f64, z: f64) -> [f64; 4] {
    let [f1, f2, f3, f4] = fv.f;
    let s = family.sign();
    let e2 = (2.0 * g * z).exp();
    [
        f1 + s * ratio * e2 * f4,
        f3 + s * ratio / e2 * f2,
        f1 - s * delta * e2 * f3,
        f4 - s * delta / e2 * f2,
    ]
}

/// `K±` from both of its defining forms; returns the first after checking
/// they agree.
fn k_value(gs: &[f64; 4], family: Family, ratio: f64, delta: f64, g: f64, z: f64, scale: f64) -> Result<f64> {
    let s = family.sign();
    let (em, ep) = ((-g * z).exp(), (g * z).exp());
    let first = em * gs[0] - s * delta * ep * gs[1];
    let second = em * gs[2] + s * ratio * ep * gs[3];
    if (first - second).abs() > K_FORM_TOL * scale {
        return Err(Error::KFormMismatch { first, second });
    }
    Ok(first)
}

pub fn condition_values(energy: f64, z: f64, m: &ModelParams) -> Result<ConditionValues> {
    let ratio = m.ratio(energy)?;
    let fv = f_values(energy, z, m)?;
    let (delta, g) = (m.delta, m.g);
    let g_plus = g_family(&fv, Family::Plus, ratio, delta, g, z);
    let g_minus = g_family(&fv, Family::Minus, ratio, delta, g, z);
    let scale = fv.scale();
    let k_plus = k_value(&g_plus, Family::Plus, ratio, delta, g, z, scale)?;
    let k_minus = k_value(&g_minus, Family::Minus, ratio, delta, g, z, scale)?;
    Ok(ConditionValues { f: fv, g_plus, g_minus, k_plus, k_minus })
}

#[allow(non_snake_case)]
pub fn eval_G(family: Family, index: usize, energy: f64, z: f64, m: &ModelParams) -> Result<f64> {
    if !(1..=4).contains(&index) {
        return Err(Error::InvalidArgument(format!("G index {index} not in 1..=4")));
    }
    let ratio = m.ratio(energy)?;
    let fv = f_values(energy, z, m)?;
    Ok(g_family(&fv, family, ratio, m.delta, m.g, z)[index - 1])
}

/// `K±(E, z)`. Both internal forms are evaluated and must agree to
/// [`K_FORM_TOL`] relative to `max(1, |F₁| + |F₄|)`.
///
/// `K±` vanishes identically in `E` in exact arithmetic, so its size is a
/// measure of rounding, not of distance to an eigenvalue.
#[allow(non_snake_case)]
pub fn eval_K(family: Family, energy: f64, z: f64, m: &ModelParams) -> Result<f64> {
    let ratio = m.ratio(energy)?;
    let fv = f_values(energy, z, m)?;
    let gs = g_family(&fv, family, ratio, m.delta, m.g, z);
    k_value(&gs, family, ratio, m.delta, m.g, z, fv.scale())
}

/// Wronskian value and the magnitude `|u' v| + |u v'|` of its two terms.
fn wronskian_raw(index: u8, energy: f64, z: f64, m: &ModelParams) -> Result<(f64, f64)> {
    let (a, b) = match index {
        1 => (BranchId::TYPE_I_F1, BranchId::TYPE_II_F1),
        _ => (BranchId::TYPE_I_F2, BranchId::TYPE_II_F2),
    };
    let u = branch_jet(a, energy, z, m)?;
    let v = branch_jet(b, energy, z, m)?;
    let (left, right) = (u.d1 * v.value, u.value * v.d1);
    Ok((left - right, left.abs() + right.abs()))
}

/// `W₁ = f₁¹' f₁² - f₁¹ f₁²'` (index 1) or the same for the `f₂`
/// components (index 2). The mirror identity `W₁(E, -z) = W₂(E, z)` is
/// checked on every call, relative to `max(1, |u'v| + |uv'|)`.
pub fn wronskian(index: u8, energy: f64, z: f64, m: &ModelParams) -> Result<f64> {
    if index != 1 && index != 2 {
        return Err(Error::InvalidArgument(format!("Wronskian index {index} not in {{1, 2}}")));
    }
    let (value, scale) = wronskian_raw(index, energy, z, m)?;
    let (mirror, mirror_scale) = wronskian_raw(3 - index, energy, -z, m)?;
    if (value - mirror).abs() > MIRROR_TOL * scale.max(mirror_scale).max(1.0) {
        return Err(Error::MirrorMismatch { value, mirror });
    }
    Ok(value)
}

/// `p(z)` and `q(z)` of the second-order equation for `f₁`.
pub fn ode_coefficients(energy: f64, z: f64, m: &ModelParams) -> (f64, f64) {
    let g = m.g;
    let denom = z * z - g * g;
    let p = ((1.0 - 2.0 * energy - 2.0 * g * g) * z - g) / denom;
    let q = (-g * g * z * z + g * z + energy * energy - g * g - m.delta * m.delta) / denom;
    (p, q)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeResidual {
    pub residual: f64,
    /// Sum of the absolute values of the three terms.
    pub scale: f64,
}

impl OdeResidual {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.residual.abs()
        } else {
            self.residual.abs() / self.scale
        }
    }
}

fn ode_residual_of(jet: Jet, component: Component, energy: f64, z: f64, m: &ModelParams) -> OdeResidual {
    // f₂ components obey the reflected equation f'' - p(-z) f' + q(-z) f = 0.
    let (p, q) = match component {
        Component::F1 => ode_coefficients(energy, z, m),
        Component::F2 => {
            let (p, q) = ode_coefficients(energy, -z, m);
            (-p, q)
        }
    };
    let terms = [jet.d2, p * jet.d1, q * jet.value];
    OdeResidual {
        residual: terms.iter().sum(),
        scale: terms.iter().map(|t| t.abs()).sum(),
    }
}

pub fn ode_residual(energy: f64, z: f64, id: BranchId, m: &ModelParams) -> Result<OdeResidual> {
    let jet = branch_jet(id, energy, z, m)?;
    Ok(ode_residual_of(jet, id.component, energy, z, m))
}

/// Which pair `(f₁, f₂)` to assemble from the branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolutionKind {
    /// `f₁⁺ = f₁¹ + f₁²`, `f₂⁺ = f₂¹ + f₂²`
    Symmetric,
    /// `f₁⁻ = f₁¹ - f₁²`, `f₂⁻ = f₂¹ - f₂²`
    Antisymmetric,
    /// Type-I pair `(f₁¹, f₂¹)`
    Asym1,
    /// Type-II pair `(f₁², f₂²)`
    Asym2,
}

pub fn solution_jets(kind: SolutionKind, energy: f64, z: f64, m: &ModelParams) -> Result<(Jet, Jet)> {
    let type_i = || -> Result<(Jet, Jet)> {
        Ok((
            branch_jet(BranchId::TYPE_I_F1, energy, z, m)?,
            branch_jet(BranchId::TYPE_I_F2, energy, z, m)?,
        ))
    };
    let type_ii = || -> Result<(Jet, Jet)> {
        Ok((
            branch_jet(BranchId::TYPE_II_F1, energy, z, m)?,
            branch_jet(BranchId::TYPE_II_F2, energy, z, m)?,
        ))
    };
    Ok(match kind {
        SolutionKind::Asym1 => type_i()?,
        SolutionKind::Asym2 => type_ii()?,
        SolutionKind::Symmetric => {
            let (u, v) = (type_i()?, type_ii()?);
            (u.0 + v.0, u.1 + v.1)
        }
        SolutionKind::Antisymmetric => {
            let (u, v) = (type_i()?, type_ii()?);
            (u.0 - v.0, u.1 - v.1)
        }
    })
}

/// Second-order residuals of both components of an assembled pair.
pub fn pair_ode_residuals(kind: SolutionKind, energy: f64, z: f64, m: &ModelParams) -> Result<(OdeResidual, OdeResidual)> {
    let (f1, f2) = solution_jets(kind, energy, z, m)?;
    Ok((
        ode_residual_of(f1, Component::F1, energy, z, m),
        ode_residual_of(f2, Component::F2, energy, z, m),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledResidual {
    pub first: f64,
    pub second: f64,
    pub scale: f64,
}

impl CoupledResidual {
    pub fn relative(&self) -> f64 {
        self.first.abs().max(self.second.abs()) / self.scale.max(f64::MIN_POSITIVE)
    }
}

/// Residuals of the two coupled first-order equations for an assembled
/// pair.
pub fn coupled_residual(kind: SolutionKind, energy: f64, z: f64, m: &ModelParams) -> Result<CoupledResidual> {
    let (f1, f2) = solution_jets(kind, energy, z, m)?;
    let (g, delta) = (m.g, m.delta);
    let rhs1 = ((energy - g * z) * f1.value - delta * f2.value) / (z + g);
    let rhs2 = ((energy + g * z) * f2.value - delta * f1.value) / (z - g);
    let scale = [f1.d1, f2.d1, rhs1, rhs2].iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(CoupledResidual { first: f1.d1 - rhs1, second: f2.d1 - rhs2, scale })
}
