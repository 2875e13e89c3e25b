use qrabi::heun::{self, hc_eval, HeunParams};
use qrabi::judd::{judd_state, solve_judd_delta, truncation_energy};
use qrabi::oracle::{self, diagonalize, subspace_overlap, OracleSpectrum};
use qrabi::rabi::{condition_values, heun_params, state_coefficients, wronskian as wronskian_value, HeunSet, ModelParams, SolutionKind};
use qrabi::spectrum::{compute_spectrum, pole_baselines, Classification, Parity, SpectrumOptions};
use qrabi::{Error, FockState};

use crate::table::{Cell, Table};
use crate::{CliError, Common, SetArg};

const DEFAULT_WINDOW: (f64, f64) = (-1.0, 6.0);
const DEFAULT_STEP: f64 = 0.01;
const EPS_POLE: f64 = 1e-4;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// `lo, lo + step, …, hi` with the last point clamped to `hi`.
pub fn grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(usage(format!("invalid range [{lo}, {hi}]")));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(usage(format!("step must be positive, got {step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    let mut out: Vec<f64> = (0..=n).map(|i| lo + i as f64 * step).collect();
    if let Some(last) = out.last_mut() {
        if (*last - hi).abs() < 1e-9 * step {
            *last = hi;
        }
    }
    Ok(out)
}

fn analytic_model(c: &Common) -> Result<ModelParams, CliError> {
    Ok(ModelParams::new(c.delta, c.g)?)
}

fn window(c: &Common, default: (f64, f64)) -> Result<(f64, f64), CliError> {
    let (lo, hi) = (c.emin.unwrap_or(default.0), c.emax.unwrap_or(default.1));
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(usage(format!("need emin < emax, got [{lo}, {hi}]")));
    }
    Ok((lo, hi))
}

fn energy_grid(c: &Common) -> Result<Vec<f64>, CliError> {
    let (lo, hi) = window(c, DEFAULT_WINDOW)?;
    grid(lo, hi, c.estep.unwrap_or(DEFAULT_STEP))
}

fn z_values(c: &Common, m: &ModelParams) -> Result<Vec<f64>, CliError> {
    let zs = c.z.clone().unwrap_or_else(|| m.default_z_values());
    if zs.is_empty() {
        return Err(usage("--z needs at least one value"));
    }
    if let Some(z) = zs.iter().find(|z| !(z.abs() < m.g())) {
        return Err(usage(format!("z = {z} outside (-{g}, {g})", g = m.g())));
    }
    Ok(zs)
}

fn tolerance(c: &Common, default: f64) -> Result<f64, CliError> {
    let tol = c.tol.unwrap_or(default);
    if !(tol.is_finite() && tol > 0.0) {
        return Err(usage(format!("tol must be positive, got {tol}")));
    }
    Ok(tol)
}

fn near_pole(e: f64, g: f64) -> bool {
    pole_baselines(g, e - EPS_POLE, e + EPS_POLE).iter().any(|p| (e - p).abs() < EPS_POLE)
}

/// A pole baseline lies strictly between two grid energies.
fn pole_between(a: f64, b: f64, g: f64) -> bool {
    pole_baselines(g, a, b).iter().any(|&p| p > a && p < b)
}

fn is_pole(e: &Error) -> bool {
    matches!(e, Error::Pole { .. } | Error::RatioPole(_))
}

pub enum HcSource {
    Explicit(Vec<f64>),
    Model(SetArg, f64),
}

pub fn hc(c: &Common, source: HcSource, xs: &[f64]) -> Result<Table, CliError> {
    let params = match source {
        HcSource::Explicit(p) => {
            let [a, b, g, d, e] = p[..] else {
                return Err(usage(format!("--params needs 5 values, got {}", p.len())));
            };
            HeunParams::new(a, b, g, d, e)?
        }
        HcSource::Model(set, energy) => {
            let m = analytic_model(c)?;
            let set = match set {
                SetArg::A => HeunSet::A,
                SetArg::B => HeunSet::B,
            };
            heun_params(set, energy, &m)
        }
    };
    let tol = tolerance(c, heun::DEFAULT_TOL)?;
    let n_max = c.nmax.unwrap_or(heun::DEFAULT_N_MAX);
    let mut t = Table::new(vec!["x", "value", "derivative", "n_terms", "converged", "tail_bound"]);
    for &x in xs {
        let ev = hc_eval(&params, x, tol, n_max)?;
        t.push(vec![
            x.into(),
            ev.value.into(),
            ev.derivative.into(),
            ev.n_terms.into(),
            ev.converged.into(),
            ev.tail_bound.into(),
        ]);
    }
    Ok(t)
}

const G_COLUMNS: [&str; 8] = ["G1p", "G2p", "G3p", "G4p", "G1m", "G2m", "G3m", "G4m"];

pub fn conditions(c: &Common) -> Result<Table, CliError> {
    let m = analytic_model(c)?;
    let zs = z_values(c, &m)?;
    let energies = energy_grid(c)?;
    let mut columns = vec!["z", "E"];
    columns.extend(G_COLUMNS);
    columns.extend(["Kp", "Km", "status", "sign_changes"]);
    let mut t = Table::new(columns);
    for &z in &zs {
        let mut previous: Option<(f64, [f64; 8])> = None;
        for &e in &energies {
            let windowed = near_pole(e, m.g());
            let mut row: Vec<Cell> = vec![z.into(), e.into()];
            match condition_values(e, z, &m) {
                Ok(cv) => {
                    let gs: [f64; 8] = std::array::from_fn(|i| if i < 4 { cv.g_plus[i] } else { cv.g_minus[i - 4] });
                    row.extend(gs.iter().map(|&v| Cell::from(v)));
                    row.extend([cv.k_plus.into(), cv.k_minus.into()]);
                    row.push(if windowed { "pole_window" } else { "ok" }.into());
                    let changes: Vec<&str> = match previous {
                        Some((pe, prev)) if !windowed && !pole_between(pe, e, m.g()) => G_COLUMNS
                            .iter()
                            .zip(prev.iter().zip(&gs))
                            .filter(|(_, (a, b))| a.signum() != b.signum())
                            .map(|(name, _)| *name)
                            .collect(),
                        _ => Vec::new(),
                    };
                    row.push(changes.join(";").into());
                    previous = (!windowed).then_some((e, gs));
                }
                Err(err) if is_pole(&err) => {
                    row.extend(std::iter::repeat_n(Cell::Empty, 10));
                    row.push(if windowed { "pole_window" } else { "pole" }.into());
                    row.push(Cell::Empty);
                    previous = None;
                }
                Err(err) => return Err(err.into()),
            }
            t.push(row);
        }
    }
    Ok(t)
}

pub fn wronskian(c: &Common) -> Result<Table, CliError> {
    let m = analytic_model(c)?;
    let zs = z_values(c, &m)?;
    let energies = energy_grid(c)?;
    let mut t = Table::new(vec!["z", "E", "W1", "W2_at_minus_z", "status", "sign_change"]);
    for &z in &zs {
        let mut previous: Option<(f64, f64)> = None;
        for &e in &energies {
            let windowed = near_pole(e, m.g());
            let status = if windowed { "pole_window" } else { "ok" };
            match (wronskian_value(1, e, z, &m), wronskian_value(2, e, -z, &m)) {
                (Ok(w1), Ok(w2)) => {
                    let changed = !windowed
                        && previous.is_some_and(|(pe, p)| p.signum() != w1.signum() && !pole_between(pe, e, m.g()));
                    t.push(vec![z.into(), e.into(), w1.into(), w2.into(), status.into(), changed.into()]);
                    previous = (!windowed).then_some((e, w1));
                }
                (Err(err), _) | (_, Err(err)) if is_pole(&err) => {
                    let status = if windowed { "pole_window" } else { "pole" };
                    t.push(vec![z.into(), e.into(), Cell::Empty, Cell::Empty, status.into(), false.into()]);
                    previous = None;
                }
                (Err(err), _) | (_, Err(err)) => return Err(err.into()),
            }
        }
    }
    Ok(t)
}

fn spectrum_options(c: &Common, m: &ModelParams, oracle: bool) -> Result<SpectrumOptions, CliError> {
    let defaults = SpectrumOptions::default();
    Ok(SpectrumOptions {
        window: window(c, defaults.window)?,
        step: c.estep.unwrap_or(defaults.step),
        z: Some(z_values(c, m)?),
        refine_tol: tolerance(c, defaults.refine_tol)?,
        oracle,
        oracle_n_max: c.nmax.unwrap_or(defaults.oracle_n_max),
        ..defaults
    })
}

fn parity_name(p: Parity) -> &'static str {
    match p {
        Parity::Plus => "plus",
        Parity::Minus => "minus",
        Parity::None => "none",
    }
}

fn classification_name(c: Classification) -> &'static str {
    match c {
        Classification::Regular => "regular",
        Classification::Exceptional => "exceptional",
    }
}

fn join_numbers(v: &[f64]) -> String {
    v.iter().map(|x| crate::table::format_g(*x)).collect::<Vec<_>>().join(";")
}

pub fn spectrum(c: &Common, oracle: bool) -> Result<Table, CliError> {
    let m = analytic_model(c)?;
    let opts = spectrum_options(c, &m, oracle)?;
    let result = compute_spectrum(&m, &opts)?;
    if let Some(err) = &result.oracle_error {
        eprintln!("qrabi: oracle unavailable, parities left as none: {err}");
    }
    let mut t = Table::new(vec![
        "energy",
        "source",
        "confirmed_by",
        "z_values",
        "parity",
        "classification",
        "multiplicity",
        "constraint_residual",
    ]);
    for r in &result.records {
        let confirmed: Vec<&str> = r.confirmed_by.iter().map(|s| s.name()).collect();
        t.push(vec![
            r.energy.into(),
            r.source.name().into(),
            confirmed.join(";").into(),
            join_numbers(&r.z_values).into(),
            parity_name(r.parity).into(),
            classification_name(r.classification).into(),
            r.multiplicity.into(),
            r.constraint_residual.into(),
        ]);
    }
    Ok(t)
}

pub fn judd(c: &Common, n1: usize, gmin: Option<f64>, gmax: Option<f64>, gstep: f64) -> Result<Table, CliError> {
    if n1 == 0 {
        return Err(usage("--n1 must be ≥ 1"));
    }
    let gs = match (gmin, gmax) {
        (None, None) => vec![c.g],
        (Some(lo), Some(hi)) => grid(lo, hi, gstep)?,
        _ => return Err(usage("--gmin and --gmax go together")),
    };
    let mut t = Table::new(vec!["g", "delta", "energy", "constraint_residual", "status"]);
    for g in gs {
        if !(g > 0.0) {
            return Err(usage(format!("g must be positive, got {g}")));
        }
        let energy = truncation_energy(HeunSet::A, n1, g);
        let roots = solve_judd_delta(n1, g)?;
        if roots.is_empty() {
            t.push(vec![g.into(), Cell::Empty, energy.into(), Cell::Empty, "no_root".into()]);
        }
        for delta in roots {
            let residual = qrabi::judd::constraint_value(n1, &ModelParams::new(delta, g)?)?;
            t.push(vec![g.into(), delta.into(), energy.into(), residual.into(), "ok".into()]);
        }
    }
    Ok(t)
}

pub fn oracle(c: &Common) -> Result<Table, CliError> {
    let m = ModelParams::limiting(c.delta, c.g)?;
    let spec = diagonalize(&m, c.nmax.unwrap_or(oracle::DEFAULT_N_MAX), tolerance(c, oracle::DEFAULT_TOL)?)?;
    let (lo, hi) = (c.emin.unwrap_or(f64::NEG_INFINITY), c.emax.unwrap_or(f64::INFINITY));
    let mut t = Table::new(vec!["index", "energy", "parity", "parity_expectation"]);
    for (i, e) in spec.converged_in(lo, hi) {
        t.push(vec![
            i.into(),
            e.into(),
            (spec.parities[i] as i64).into(),
            spec.parity_expectations[i].into(),
        ]);
    }
    Ok(t)
}

/// Fidelity-style overlap of `states` with the oracle eigenvectors in the
/// cluster around `energy`; the smallest over `states`.
fn cluster_overlap(spec: &OracleSpectrum, energy: f64, states: &[FockState]) -> f64 {
    let basis: Vec<&FockState> = spec.cluster(energy, 1e-6).into_iter().map(|i| &spec.states[i]).collect();
    states.iter().map(|s| subspace_overlap(s, &basis)).fold(f64::INFINITY, f64::min)
}

pub fn compare(c: &Common) -> Result<Table, CliError> {
    let m = analytic_model(c)?;
    let opts = SpectrumOptions { oracle: false, ..spectrum_options(c, &m, false)? };
    let result = compute_spectrum(&m, &opts)?;
    let n_max = opts.oracle_n_max;
    let spec = diagonalize(&m, n_max, oracle::DEFAULT_TOL)?;
    let mut t = Table::new(vec![
        "energy",
        "oracle_energy",
        "abs_diff",
        "parity",
        "classification",
        "multiplicity",
        "overlap",
    ]);
    for r in &result.records {
        let i = spec.nearest(r.energy).expect("non-empty oracle spectrum");
        let states = match r.classification {
            Classification::Exceptional => {
                let n1 = (r.energy + m.g() * m.g()).round() as usize;
                judd_state(n1, &m, n_max)?.states.to_vec()
            }
            Classification::Regular => {
                let kind = if spec.parities[i] > 0 { SolutionKind::Symmetric } else { SolutionKind::Antisymmetric };
                vec![state_coefficients(kind, r.energy, &m, n_max)?]
            }
        };
        let parity = if r.multiplicity == 1 { Parity::from_sign(spec.parities[i]) } else { Parity::None };
        t.push(vec![
            r.energy.into(),
            spec.energies[i].into(),
            (r.energy - spec.energies[i]).abs().into(),
            parity_name(parity).into(),
            classification_name(r.classification).into(),
            r.multiplicity.into(),
            cluster_overlap(&spec, r.energy, &states).into(),
        ]);
    }
    Ok(t)
}
