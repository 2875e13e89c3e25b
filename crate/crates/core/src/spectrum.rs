//! Eigenvalues as common roots of the condition functions: grid scan for
//! sign changes away from the series poles, bisection, cross-validation over
//! several `z`, merging across condition families, Judd points, and parity
//! labels from the oracle.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::judd::{judd_points_in_window, ON_CURVE_TOL};
use crate::oracle::{self, OracleSpectrum};
use crate::rabi::{eval_G, eval_K, wronskian, Family, ModelParams};

/// Which condition produced (or confirmed) a root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConditionSource {
    #[serde(rename = "G12plus")]
    G12Plus,
    #[serde(rename = "G34plus")]
    G34Plus,
    #[serde(rename = "G12minus")]
    G12Minus,
    #[serde(rename = "G34minus")]
    G34Minus,
    W1,
    #[serde(rename = "Kplus")]
    KPlus,
    #[serde(rename = "Kminus")]
    KMinus,
    Judd,
}

impl ConditionSource {
    pub fn name(self) -> &'static str {
        match self {
            ConditionSource::G12Plus => "G12plus",
            ConditionSource::G34Plus => "G34plus",
            ConditionSource::G12Minus => "G12minus",
            ConditionSource::G34Minus => "G34minus",
            ConditionSource::W1 => "W1",
            ConditionSource::KPlus => "Kplus",
            ConditionSource::KMinus => "Kminus",
            ConditionSource::Judd => "Judd",
        }
    }

    /// The function scanned for this source; `None` for Judd points.
    pub fn condition(self) -> Option<Condition> {
        Some(match self {
            ConditionSource::G12Plus => Condition::G(Family::Plus, 1),
            ConditionSource::G34Plus => Condition::G(Family::Plus, 3),
            ConditionSource::G12Minus => Condition::G(Family::Minus, 1),
            ConditionSource::G34Minus => Condition::G(Family::Minus, 3),
            ConditionSource::W1 => Condition::Wronskian(1),
            ConditionSource::KPlus => Condition::K(Family::Plus),
            ConditionSource::KMinus => Condition::K(Family::Minus),
            ConditionSource::Judd => return None,
        })
    }
}

/// A single scalar condition function of `E` at fixed `z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    /// `G^±_k`, `k ∈ 1..=4`
    G(Family, usize),
    K(Family),
    /// `W₁` or `W₂`
    Wronskian(u8),
}

impl Condition {
    pub fn eval(&self, energy: f64, z: f64, m: &ModelParams) -> Result<f64> {
        match *self {
            Condition::G(family, k) => eval_G(family, k, energy, z, m),
            Condition::K(family) => eval_K(family, energy, z, m),
            Condition::Wronskian(i) => wronskian(i, energy, z, m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Plus,
    Minus,
    None,
}

impl Parity {
    pub fn from_sign(sign: i8) -> Self {
        if sign > 0 {
            Parity::Plus
        } else {
            Parity::Minus
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Regular,
    Exceptional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootRecord {
    pub energy: f64,
    pub source: ConditionSource,
    /// Every condition whose root merged into this record.
    pub confirmed_by: Vec<ConditionSource>,
    pub z_values: Vec<f64>,
    pub parity: Parity,
    pub classification: Classification,
    pub multiplicity: usize,
    /// Judd constraint residual; present for exceptional records only.
    pub constraint_residual: Option<f64>,
}

/// Energies `m - g²` (`m ≥ 0`) and `-g²` inside `[lo, hi]`, ascending.
pub fn pole_baselines(g: f64, lo: f64, hi: f64) -> Vec<f64> {
    let g2 = g * g;
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let e = k as f64 - g2;
        if e > hi {
            break;
        }
        if e >= lo {
            out.push(e);
        }
        k += 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    /// Sign-change brackets `(lo, hi)`, ascending.
    pub brackets: Vec<(f64, f64)>,
    /// Intervals left unscanned: exclusion windows and pole hits.
    pub skipped: Vec<(f64, f64)>,
}

/// Sign changes of `f` on `[lo, hi]` sampled every `step`, never bracketing
/// across an exclusion window `[c - eps, c + eps]`. A grid point where `f`
/// reports a pole opens a gap between its neighbours.
pub fn scan_brackets<F>(f: F, window: (f64, f64), step: f64, exclusions: &[f64], eps: f64) -> Result<ScanResult>
where
    F: Fn(f64) -> Result<f64>,
{
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidArgument(format!("invalid scan window [{lo}, {hi}]")));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidArgument(format!("scan step must be positive, got {step}")));
    }
    let mut windows: Vec<(f64, f64)> = exclusions
        .iter()
        .map(|&c| (c - eps, c + eps))
        .filter(|&(a, b)| b >= lo && a <= hi)
        .collect();
    windows.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Sample points tagged with whether the segment ending at them may hold a bracket.
    let n = ((hi - lo) / step).round() as usize;
    let mut points: Vec<(f64, bool)> = Vec::with_capacity(n + 1 + 2 * windows.len());
    let inside = |e: f64| windows.iter().any(|&(a, b)| e > a && e < b);
    for i in 0..=n {
        let e = if i == n { hi } else { lo + i as f64 * step };
        if !inside(e) {
            points.push((e, true));
        }
    }
    for &(a, b) in &windows {
        if a >= lo {
            points.push((a, true));
        }
        if b <= hi {
            points.push((b, false));
        }
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    points.dedup_by(|a, b| a.0 == b.0 && {
        b.1 &= a.1;
        true
    });

    let mut skipped: Vec<(f64, f64)> = windows.iter().map(|&(a, b)| (a.max(lo), b.min(hi))).collect();
    let mut brackets = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &(e, open) in &points {
        let value = match f(e) {
            Ok(v) => Some(v),
            Err(Error::Pole { .. }) | Err(Error::RatioPole(_)) => None,
            Err(err) => return Err(err),
        };
        match (prev, value) {
            // segments ending on a right window edge lie inside the window
            (Some((p, fp)), Some(v)) if open => {
                if v == 0.0 {
                    brackets.push((e, e));
                } else if fp != 0.0 && fp.signum() != v.signum() {
                    brackets.push((p, e));
                }
            }
            (Some((p, _)), None) => skipped.push((p, e)),
            _ => {}
        }
        prev = value.map(|v| (e, v));
    }
    skipped.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(ScanResult { brackets, skipped })
}

/// Bisection on a sign-change bracket down to width `tol`.
///
/// Errors with [`Error::LostBracket`] when the bracket holds no sign change
/// or the function grows instead of vanishing (a pole inside).
pub fn refine_root<F>(f: F, bracket: (f64, f64), tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = bracket;
    if lo == hi {
        return Ok(lo);
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let (f_lo0, f_hi0) = (f(lo)?, f(hi)?);
    if f_lo0 == 0.0 {
        return Ok(lo);
    }
    if f_hi0 == 0.0 {
        return Ok(hi);
    }
    if f_lo0.signum() == f_hi0.signum() {
        return Err(Error::LostBracket { lo, hi });
    }
    let bound = f_lo0.abs().max(f_hi0.abs());
    let mut f_lo = f_lo0;
    let mut f_mid = f_lo0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        f_mid = f(mid)?;
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
    if f_mid.abs() > bound {
        return Err(Error::LostBracket { lo: bracket.0, hi: bracket.1 });
    }
    Ok(0.5 * (lo + hi))
}

/// Raw roots of one condition at one `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRoots {
    pub z: f64,
    pub roots: Vec<f64>,
    pub skipped: Vec<(f64, f64)>,
}

/// Scan and refine `cond` at one `z` with the pole baselines of `m`
/// excluded.
pub fn scan_condition(cond: Condition, z: f64, m: &ModelParams, opts: &SpectrumOptions) -> Result<ConditionRoots> {
    let f = |e: f64| cond.eval(e, z, m);
    let (lo, hi) = opts.window;
    let poles = pole_baselines(m.g(), lo - opts.eps_pole, hi + opts.eps_pole);
    let scan = scan_brackets(f, opts.window, opts.step, &poles, opts.eps_pole)?;
    let roots = scan
        .brackets
        .iter()
        .map(|&b| refine_root(f, b, opts.refine_tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConditionRoots { z, roots, skipped: scan.skipped })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedRoot {
    pub z: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    /// Roots of the first `z` list present within `tol` at every other `z`.
    pub accepted: Vec<f64>,
    pub rejected: Vec<RejectedRoot>,
}

/// Keeps the roots found at every `z`, reporting the rest.
pub fn cross_validate(roots_by_z: &[(f64, Vec<f64>)], tol: f64) -> Result<CrossValidation> {
    if roots_by_z.len() < 2 {
        return Err(Error::InvalidArgument("cross-validation needs at least two z values".into()));
    }
    let near = |list: &[f64], e: f64| list.iter().any(|&x| (x - e).abs() <= tol);
    let everywhere = |e: f64| roots_by_z.iter().all(|(_, list)| near(list, e));
    let accepted = roots_by_z[0].1.iter().copied().filter(|&e| everywhere(e)).collect();
    let rejected = roots_by_z
        .iter()
        .flat_map(|(z, list)| {
            list.iter().filter(|&&e| !everywhere(e)).map(move |&e| RejectedRoot { z: *z, energy: e })
        })
        .collect();
    Ok(CrossValidation { accepted, rejected })
}

/// Cross-validated roots of `cond` over all `opts.z_values`.
pub fn validated_roots(cond: Condition, m: &ModelParams, opts: &SpectrumOptions) -> Result<CrossValidation> {
    let per_z = opts
        .z_values(m)
        .into_par_iter()
        .map(|z| scan_condition(cond, z, m, opts).map(|r| (z, r.roots)))
        .collect::<Result<Vec<_>>>()?;
    cross_validate(&per_z, opts.cross_tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub window: (f64, f64),
    pub step: f64,
    /// Validation points; `None` means `{0, 0.375 g}`.
    pub z: Option<Vec<f64>>,
    pub refine_tol: f64,
    pub cross_tol: f64,
    pub merge_tol: f64,
    pub eps_pole: f64,
    pub sources: Vec<ConditionSource>,
    pub oracle: bool,
    pub oracle_n_max: usize,
    pub oracle_tol: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            window: (-1.0, 6.0),
            step: 0.01,
            z: None,
            refine_tol: 1e-10,
            cross_tol: 1e-8,
            merge_tol: 1e-7,
            eps_pole: 1e-4,
            sources: vec![
                ConditionSource::G12Plus,
                ConditionSource::G34Plus,
                ConditionSource::G12Minus,
                ConditionSource::G34Minus,
                ConditionSource::W1,
                ConditionSource::Judd,
            ],
            oracle: true,
            oracle_n_max: oracle::DEFAULT_N_MAX,
            oracle_tol: oracle::DEFAULT_TOL,
        }
    }
}

impl SpectrumOptions {
    pub fn z_values(&self, m: &ModelParams) -> Vec<f64> {
        self.z.clone().unwrap_or_else(|| m.default_z_values())
    }

    fn validate(&self, m: &ModelParams) -> Result<()> {
        let (lo, hi) = self.window;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument(format!("invalid energy window [{lo}, {hi}]")));
        }
        for (name, v) in [
            ("step", self.step),
            ("refine_tol", self.refine_tol),
            ("cross_tol", self.cross_tol),
            ("merge_tol", self.merge_tol),
            ("eps_pole", self.eps_pole),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        let zs = self.z_values(m);
        if zs.len() < 2 {
            return Err(Error::InvalidArgument("at least two z values are required".into()));
        }
        if let Some(&z) = zs.iter().find(|z| !(z.abs() < m.g())) {
            return Err(Error::OutsideDomain { z, g: m.g() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub records: Vec<RootRecord>,
    pub params: ModelParams,
    pub e_window: (f64, f64),
    pub settings: SpectrumOptions,
    /// Roots seen at some but not all `z` values, per condition.
    pub rejected: Vec<(ConditionSource, RejectedRoot)>,
    /// Why parity labels are missing, if the oracle was requested and failed.
    pub oracle_error: Option<String>,
}

impl SpectrumResult {
    pub fn energies(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.energy).collect()
    }
}

/// The spectrum of `m` inside `opts.window`.
pub fn compute_spectrum(m: &ModelParams, opts: &SpectrumOptions) -> Result<SpectrumResult> {
    opts.validate(m)?;
    let z_values = opts.z_values(m);
    let scanned: Vec<ConditionSource> =
        opts.sources.iter().copied().filter(|s| s.condition().is_some()).collect();

    let tasks: Vec<(usize, f64)> =
        (0..scanned.len()).flat_map(|i| z_values.iter().map(move |&z| (i, z))).collect();
    let raw = tasks
        .into_par_iter()
        .map(|(i, z)| scan_condition(scanned[i].condition().expect("scanned source"), z, m, opts))
        .collect::<Result<Vec<_>>>()?;

    let mut candidates: Vec<(f64, ConditionSource)> = Vec::new();
    let mut rejected = Vec::new();
    for (i, &source) in scanned.iter().enumerate() {
        let per_z: Vec<(f64, Vec<f64>)> = raw[i * z_values.len()..(i + 1) * z_values.len()]
            .iter()
            .map(|r| (r.z, r.roots.clone()))
            .collect();
        let cv = cross_validate(&per_z, opts.cross_tol)?;
        candidates.extend(cv.accepted.into_iter().map(|e| (e, source)));
        rejected.extend(cv.rejected.into_iter().map(|r| (source, r)));
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut records: Vec<RootRecord> = Vec::new();
    for (energy, source) in candidates {
        match records.last_mut() {
            Some(last) if energy - last.energy <= opts.merge_tol => {
                if !last.confirmed_by.contains(&source) {
                    last.confirmed_by.push(source);
                    last.confirmed_by.sort();
                    last.source = last.confirmed_by[0];
                }
            }
            _ => records.push(RootRecord {
                energy,
                source,
                confirmed_by: vec![source],
                z_values: z_values.clone(),
                parity: Parity::None,
                classification: Classification::Regular,
                multiplicity: 1,
                constraint_residual: None,
            }),
        }
    }

    if opts.sources.contains(&ConditionSource::Judd) {
        for point in judd_points_in_window(m, opts.window.0, opts.window.1)? {
            let k_vanishes = z_values.iter().try_fold(true, |ok, &z| -> Result<bool> {
                let kp = eval_K(Family::Plus, point.energy, z, m)?;
                let km = eval_K(Family::Minus, point.energy, z, m)?;
                Ok(ok && kp.abs() < ON_CURVE_TOL && km.abs() < ON_CURVE_TOL)
            })?;
            if !k_vanishes {
                continue;
            }
            let mut confirmed_by = vec![ConditionSource::Judd, ConditionSource::KPlus, ConditionSource::KMinus];
            records.retain(|r| {
                let same = (r.energy - point.energy).abs() <= opts.merge_tol;
                if same {
                    confirmed_by.extend(r.confirmed_by.iter().copied());
                }
                !same
            });
            confirmed_by.sort();
            confirmed_by.dedup();
            records.push(RootRecord {
                energy: point.energy,
                source: ConditionSource::Judd,
                confirmed_by,
                z_values: z_values.clone(),
                parity: Parity::None,
                classification: Classification::Exceptional,
                multiplicity: 2,
                constraint_residual: Some(point.constraint_residual),
            });
        }
        records.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    }

    let mut oracle_error = None;
    if opts.oracle {
        match oracle::diagonalize(m, opts.oracle_n_max, opts.oracle_tol) {
            Ok(spec) => assign_parities(&mut records, &spec),
            Err(err) => oracle_error = Some(err.to_string()),
        }
    }

    Ok(SpectrumResult {
        records,
        params: *m,
        e_window: opts.window,
        settings: opts.clone(),
        rejected,
        oracle_error,
    })
}

/// Regular records take the parity of the nearest oracle eigenvalue;
/// degenerate records keep `none`.
fn assign_parities(records: &mut [RootRecord], spec: &OracleSpectrum) {
    for r in records.iter_mut().filter(|r| r.multiplicity == 1) {
        if let Some(i) = spec.nearest(r.energy) {
            r.parity = Parity::from_sign(spec.parities[i]);
        }
    }
}
