//! Confluent Heun function `HC(α, β, γ, δ, η, x)` as the Frobenius series
//! about `x = 0`, normalized to `HC(0) = 1`.
//!
//! The coefficients follow the three-term recurrence
//!
//! ```text
//! A_n h_n = B_n h_{n-1} + C_n h_{n-2},   h_0 = 1, h_{-1} = 0
//! A_n = 1 + β/n
//! B_n = 1 + (β + γ - α - 1)/n + [η - β/2 + (γ - α)(β - 1)/2]/n²
//! C_n = [δ + α(β + γ)/2 + α(n - 1)]/n²
//! ```
//!
//! When `A_n` vanishes together with the right-hand side the series
//! terminates and `HC` is a polynomial; when only `A_n` vanishes the energy
//! sits on a pole of the series and [`Error::Pole`] is returned.

use crate::error::{Error, Result};

/// `|A_n|` below this is treated as zero.
pub const POLE_TOL: f64 = 1e-12;
/// Relative size below which the recurrence numerator counts as zero at a pole.
pub const TRUNCATION_TOL: f64 = 1e-9;
pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_N_MAX: usize = 500;

/// Number of consecutive small terms required before the geometric tail
/// estimate is trusted.
const SMALL_RUN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeunParams {
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
    eta: f64,
    mu: f64,
    nu: f64,
}

impl HeunParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64, eta: f64) -> Result<Self> {
        let p = Self::from_raw(alpha, beta, gamma, delta, eta);
        if [p.alpha, p.beta, p.gamma, p.delta, p.eta, p.mu, p.nu]
            .iter()
            .all(|v| v.is_finite())
        {
            Ok(p)
        } else {
            Err(Error::NonFinite("Heun parameters"))
        }
    }

    pub(crate) fn from_raw(alpha: f64, beta: f64, gamma: f64, delta: f64, eta: f64) -> Self {
        let mu = delta + alpha * (beta + gamma + 2.0) / 2.0;
        let nu = eta + beta / 2.0 + (gamma - alpha) * (beta + 1.0) / 2.0;
        HeunParams { alpha, beta, gamma, delta, eta, mu, nu }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `μ = δ + α(β + γ + 2)/2`; informational only.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `ν = η + β/2 + (γ - α)(β + 1)/2`; informational only.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.alpha, self.beta, self.gamma, self.delta, self.eta]
    }

    /// Recurrence coefficients `(A_n, B_n, C_n)` for `n ≥ 1`.
    pub fn recurrence(&self, n: usize) -> (f64, f64, f64) {
        let nf = n as f64;
        let (a, b, c) = (self.alpha, self.beta, self.gamma);
        let a_n = 1.0 + b / nf;
        let b_n = 1.0
            + (b + c - a - 1.0) / nf
            + (self.eta - b / 2.0 + (c - a) * (b - 1.0) / 2.0) / (nf * nf);
        let c_n = self.c_numerator(n) / (nf * nf);
        (a_n, b_n, c_n)
    }

    fn c_numerator(&self, n: usize) -> f64 {
        self.delta + self.alpha * (self.beta + self.gamma) / 2.0 + self.alpha * (n as f64 - 1.0)
    }

    fn c_numerator_scale(&self, n: usize) -> f64 {
        self.delta.abs()
            + (self.alpha * (self.beta + self.gamma) / 2.0).abs()
            + (self.alpha * (n as f64 - 1.0)).abs()
    }

    /// Mismatch of the truncation δ-condition `δ = -(N + (γ + β + 2)/2)α`.
    pub fn truncation_mismatch(&self, order: usize) -> (f64, f64) {
        let expected = -(order as f64 + (self.gamma + self.beta + 2.0) / 2.0) * self.alpha;
        (expected, self.delta - expected)
    }
}

/// Forward evaluation of the recurrence, one coefficient at a time.
#[derive(Debug, Clone)]
struct Recurrence<'a> {
    params: &'a HeunParams,
    n: usize,
    prev: f64,
    prev2: f64,
    terminated: bool,
}

impl<'a> Recurrence<'a> {
    fn new(params: &'a HeunParams) -> Self {
        Recurrence { params, n: 0, prev: 1.0, prev2: 0.0, terminated: false }
    }

    /// Returns `h_n` for the next `n ≥ 1`.
    fn step(&mut self) -> Result<f64> {
        self.n += 1;
        if self.terminated {
            return Ok(0.0);
        }
        let n = self.n;
        let (a_n, b_n, c_n) = self.params.recurrence(n);
        let lhs = b_n * self.prev;
        let rhs = c_n * self.prev2;
        let numerator = lhs + rhs;
        let h = if a_n.abs() < POLE_TOL {
            let scale = (lhs.abs() + rhs.abs()).max(1.0);
            if numerator.abs() > TRUNCATION_TOL * scale {
                return Err(Error::Pole { n, a_n, numerator });
            }
            // h_n = 0; the series terminates when C_{n+1} vanishes as well,
            // otherwise the recurrence carries on from h_n = 0.
            let c_next = self.params.c_numerator(n + 1);
            if c_next.abs() <= POLE_TOL * self.params.c_numerator_scale(n + 1).max(1.0) {
                self.terminated = true;
            }
            0.0
        } else {
            numerator / a_n
        };
        if !h.is_finite() {
            return Err(Error::NonFinite("Heun coefficient"));
        }
        self.prev2 = self.prev;
        self.prev = h;
        Ok(h)
    }
}

/// Coefficients `h_0 ..= h_{n_max}` of the series.
pub fn hc_coefficients(params: &HeunParams, n_max: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    let mut rec = Recurrence::new(params);
    for _ in 0..n_max {
        out.push(rec.step()?);
    }
    Ok(out)
}

/// If the series terminates at degree `≤ max_degree`, returns the polynomial
/// coefficients `h_0 ..= h_N` with trailing exact zeros removed.
pub fn hc_polynomial(params: &HeunParams, max_degree: usize) -> Result<Option<Vec<f64>>> {
    let mut out = vec![1.0];
    let mut rec = Recurrence::new(params);
    for _ in 0..=max_degree {
        out.push(rec.step()?);
        if rec.terminated {
            while out.len() > 1 && *out.last().unwrap() == 0.0 {
                out.pop();
            }
            return Ok(Some(out));
        }
    }
    Ok(None)
}

/// Minimal (recessive) solution of the recurrence for `n ≥ 2`, normalized
/// to `h_0 = 1`, computed from backward ratios `h_n / h_{n-1}` started at
/// `depth`.
///
/// At parameters where the series is entire (eigenvalues of the model) this
/// coincides with [`hc_coefficients`], but unlike the forward recurrence it
/// carries no exponentially amplified dominant component.
pub fn hc_minimal_coefficients(params: &HeunParams, n_terms: usize, depth: usize) -> Result<Vec<f64>> {
    let depth = depth.max(n_terms + 1);
    // ratio[n] = h_n / h_{n-1}
    let mut ratio = vec![0.0; depth + 2];
    for n in (2..=depth + 1).rev() {
        let (a_n, b_n, c_n) = params.recurrence(n);
        let r_next = if n == depth + 1 { 0.0 } else { ratio[n] };
        let denom = a_n * r_next - b_n;
        ratio[n - 1] = if c_n == 0.0 { 0.0 } else { c_n / denom };
        if !ratio[n - 1].is_finite() {
            return Err(Error::NonFinite("backward recurrence ratio"));
        }
    }
    let mut out = Vec::with_capacity(n_terms + 1);
    out.push(1.0);
    let mut h = 1.0;
    for r in ratio.iter().take(n_terms + 1).skip(1) {
        h *= r;
        out.push(h);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeunEval {
    pub value: f64,
    /// `d HC / dx`
    pub derivative: f64,
    /// `d² HC / dx²`
    pub second_derivative: f64,
    pub n_terms: usize,
    pub converged: bool,
    /// Estimated absolute truncation error of `value`.
    pub tail_bound: f64,
}

#[derive(Debug, Clone, Copy)]
struct TailTracker {
    last: f64,
    ratios: [f64; SMALL_RUN],
    idx: usize,
}

impl TailTracker {
    fn new() -> Self {
        TailTracker { last: f64::NAN, ratios: [f64::INFINITY; SMALL_RUN], idx: 0 }
    }

    fn push(&mut self, term: f64) {
        let t = term.abs();
        let r = if self.last.is_nan() {
            f64::INFINITY
        } else if self.last == 0.0 {
            if t == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            t / self.last
        };
        self.ratios[self.idx % SMALL_RUN] = r;
        self.idx += 1;
        self.last = t;
    }

    /// Geometric bound `|t| r / (1 - r)` with `r` the largest recent ratio.
    fn bound(&self) -> f64 {
        let r = self.ratios.iter().cloned().fold(0.0, f64::max);
        if self.last == 0.0 && r == 0.0 {
            0.0
        } else if r < 1.0 {
            self.last * r / (1.0 - r)
        } else {
            f64::INFINITY
        }
    }
}

/// Sums `Σ h_n xⁿ` together with its first two derivatives.
///
/// Summation stops once three consecutive terms of both the value and
/// derivative series are below `tol · max(1, |partial sum|)` and the
/// geometric tail estimates are below the same threshold, or when
/// `n_max` terms have been added (`converged = false`).
pub fn hc_eval(params: &HeunParams, x: f64, tol: f64, n_max: usize) -> Result<HeunEval> {
    if !(x.abs() < 1.0) {
        return Err(Error::InvalidArgument(format!("|x| = {} must be < 1", x.abs())));
    }
    if !(tol > 0.0) || n_max == 0 {
        return Err(Error::InvalidArgument("tol must be > 0 and n_max ≥ 1".into()));
    }
    let mut rec = Recurrence::new(params);
    if x == 0.0 {
        let h1 = rec.step()?;
        let h2 = if n_max >= 2 { rec.step()? } else { 0.0 };
        return Ok(HeunEval {
            value: 1.0,
            derivative: h1,
            second_derivative: 2.0 * h2,
            n_terms: 1,
            converged: true,
            tail_bound: 0.0,
        });
    }

    let (mut sum, mut dsum, mut d2sum) = (1.0, 0.0, 0.0);
    // x^{n-2}, x^{n-1}, x^n for the current n
    let (mut xm2, mut xm1) = (1.0 / x, 1.0);
    let mut value_tail = TailTracker::new();
    let mut deriv_tail = TailTracker::new();
    let mut small = 0usize;
    let mut tail_bound = f64::INFINITY;

    for n in 1..=n_max {
        let h = rec.step()?;
        let nf = n as f64;
        let xn = xm1 * x;
        let t = h * xn;
        let td = nf * h * xm1;
        let td2 = nf * (nf - 1.0) * h * xm2;
        sum += t;
        dsum += td;
        d2sum += td2;
        xm2 = xm1;
        xm1 = xn;

        if rec.terminated {
            return Ok(HeunEval {
                value: sum,
                derivative: dsum,
                second_derivative: d2sum,
                n_terms: n + 1,
                converged: true,
                tail_bound: 0.0,
            });
        }

        value_tail.push(t);
        deriv_tail.push(td);
        let vscale = tol * sum.abs().max(1.0);
        let dscale = tol * dsum.abs().max(1.0);
        if t.abs() < vscale && td.abs() < dscale {
            small += 1;
        } else {
            small = 0;
        }
        tail_bound = value_tail.bound();
        if small >= SMALL_RUN && tail_bound <= vscale && deriv_tail.bound() <= dscale {
            return Ok(HeunEval {
                value: sum,
                derivative: dsum,
                second_derivative: d2sum,
                n_terms: n + 1,
                converged: true,
                tail_bound,
            });
        }
    }
    if !sum.is_finite() || !dsum.is_finite() {
        return Err(Error::NonFinite("Heun series sum"));
    }
    Ok(HeunEval {
        value: sum,
        derivative: dsum,
        second_derivative: d2sum,
        n_terms: n_max + 1,
        converged: false,
        tail_bound,
    })
}

/// Closing residual `B_{N+1} h_N + C_{N+1} h_{N-1}` of a series truncated at
/// degree `order`, with `h_1 ..= h_N` solved from the recurrence.
///
/// Its zero set in `(Δ, g)` is the curve on which the series terminates.
pub fn hc_truncation_residual(params: &HeunParams, order: usize) -> Result<f64> {
    let (expected, mismatch) = params.truncation_mismatch(order);
    let scale = params.delta.abs().max(expected.abs()).max(1.0);
    if mismatch.abs() > 1e-9 * scale {
        return Err(Error::InconsistentTruncation { expected, actual: params.delta });
    }
    let (h_prev, h_last) = leading_coefficients(params, order)?;
    let (_, b, c) = params.recurrence(order + 1);
    Ok(b * h_last + c * h_prev)
}

/// `Π_{n=1}^{N} (1 + |A_n|)`, used to keep truncation residuals of
/// different orders comparable.
pub fn truncation_normalizer(params: &HeunParams, order: usize) -> f64 {
    (1..=order).map(|n| 1.0 + params.recurrence(n).0.abs()).product()
}

/// `(h_{N-1}, h_N)` from the plain recurrence; `A_n` must not vanish for
/// `n ≤ N`.
fn leading_coefficients(params: &HeunParams, order: usize) -> Result<(f64, f64)> {
    let (mut prev2, mut prev) = (0.0, 1.0);
    for n in 1..=order {
        let (a_n, b_n, c_n) = params.recurrence(n);
        let numerator = b_n * prev + c_n * prev2;
        if a_n.abs() < POLE_TOL {
            return Err(Error::Pole { n, a_n, numerator });
        }
        let h = numerator / a_n;
        prev2 = prev;
        prev = h;
    }
    Ok((prev2, prev))
}

/// Coefficients `h_0 ..= h_N` solved from the plain recurrence without the
/// closing condition.
pub fn truncated_coefficients(params: &HeunParams, order: usize) -> Result<Vec<f64>> {
    let mut out = vec![1.0];
    let (mut prev2, mut prev) = (0.0, 1.0);
    for n in 1..=order {
        let (a_n, b_n, c_n) = params.recurrence(n);
        let numerator = b_n * prev + c_n * prev2;
        if a_n.abs() < POLE_TOL {
            return Err(Error::Pole { n, a_n, numerator });
        }
        let h = numerator / a_n;
        out.push(h);
        prev2 = prev;
        prev = h;
    }
    Ok(out)
}
