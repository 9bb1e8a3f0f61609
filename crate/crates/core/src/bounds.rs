//! Closed-form bounds evaluated in log space.
//!
//! The regime of interest has `log x = (σ − ½)^{−1/θ}`, so `x` itself is
//! usually far beyond `f64`. Every evaluator returns a [`BoundReport`] whose
//! `log_value` is always finite or `−∞`, with `value` and explicit
//! underflow/overflow flags derived from it. Where a direct floating
//! evaluation also exists it is stored in `extra["direct_value"]`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, Zero};

use crate::error::{Error, Result};
use crate::stats::csv_float;
use crate::nt::{default_tail_cutoff, tail_series};
use crate::oracle::ExactCoeffs;
use crate::sieve::arith_signature;
use crate::summation::compensated_sum;
use crate::zeta::prime_zeta;

/// Largest `log x` for which `x` is a finite `f64`.
pub const MAX_FINITE_LOG_X: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeParams {
    pub sigma: f64,
    pub theta: f64,
    pub delta: f64,
    pub log_x: f64,
    pub x_is_finite_representable: bool,
}

impl RegimeParams {
    /// `x` when representable.
    pub fn x(&self) -> Option<f64> {
        self.x_is_finite_representable.then(|| self.log_x.exp())
    }

    pub fn log_log_x(&self) -> f64 {
        self.log_x.ln()
    }
}

fn check_theta_delta(op: &'static str, theta: f64, delta: f64) -> Result<()> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::domain(op, format!("need theta in (0, 1], got {theta}")));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::domain(op, format!("need delta > 0, got {delta}")));
    }
    Ok(())
}

/// The regime `log x = (σ − ½)^{−1/θ}`.
pub fn regime_from_sigma(sigma: f64, theta: f64, delta: f64) -> Result<RegimeParams> {
    if !(sigma > 0.5 && sigma <= 1.0) {
        return Err(Error::domain("regime_from_sigma", format!("need sigma in (1/2, 1], got {sigma}")));
    }
    check_theta_delta("regime_from_sigma", theta, delta)?;
    let log_x = (-(sigma - 0.5).ln() / theta).exp();
    Ok(RegimeParams {
        sigma,
        theta,
        delta,
        log_x,
        x_is_finite_representable: log_x <= MAX_FINITE_LOG_X,
    })
}

/// The regime with `log x` given directly and `σ = ½ + (log x)^{−θ}`.
pub fn regime_from_log_x(log_x: f64, theta: f64, delta: f64) -> Result<RegimeParams> {
    if !(log_x > 0.0) || !log_x.is_finite() {
        return Err(Error::domain("regime_from_log_x", format!("need log_x > 0, got {log_x}")));
    }
    check_theta_delta("regime_from_log_x", theta, delta)?;
    Ok(RegimeParams {
        sigma: 0.5 + (-theta * log_x.ln()).exp(),
        theta,
        delta,
        log_x,
        x_is_finite_representable: log_x <= MAX_FINITE_LOG_X,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub name: String,
    pub inputs: BTreeMap<String, f64>,
    pub value: f64,
    pub log_value: f64,
    pub underflow: bool,
    pub overflow: bool,
    pub extra: BTreeMap<String, f64>,
}

impl BoundReport {
    pub fn from_log(name: &str, inputs: &[(&str, f64)], log_value: f64) -> BoundReport {
        let value = log_value.exp();
        BoundReport {
            name: name.to_string(),
            inputs: inputs.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            value,
            log_value,
            underflow: log_value > f64::NEG_INFINITY && value < f64::MIN_POSITIVE,
            overflow: value.is_infinite(),
            extra: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, v: f64) -> BoundReport {
        self.extra.insert(key.to_string(), v);
        self
    }

    fn with_regime(self, r: &RegimeParams) -> BoundReport {
        let mut s = self;
        for (k, v) in [("sigma", r.sigma), ("theta", r.theta), ("delta", r.delta), ("log_x", r.log_x)] {
            s.inputs.insert(k.to_string(), v);
        }
        s
    }

    pub fn input(&self, key: &str) -> Option<f64> {
        self.inputs.get(key).copied()
    }
}

fn require_log_log(op: &'static str, log_x: f64) -> Result<f64> {
    if !(log_x > 1.0) {
        return Err(Error::LogDomain { op, value: log_x });
    }
    Ok(log_x.ln())
}

/// `log E` for the exponent `E = (1/(2θ))(log x)^{2−2θ}/(log log x)^{1+2δ}`.
fn theorem1_log_exponent(r: &RegimeParams) -> Result<f64> {
    let ll = require_log_log("theorem1_lower_bound", r.log_x)?;
    Ok(-(2.0 * r.theta).ln() + (2.0 - 2.0 * r.theta) * r.log_x.ln() - (1.0 + 2.0 * r.delta) * ll.ln())
}

/// `1 − exp(−(1/(2θ))(log x)^{2−2θ}/(log log x)^{1+2δ})`.
pub fn theorem1_lower_bound(r: &RegimeParams) -> Result<BoundReport> {
    let exponent = theorem1_log_exponent(r)?.exp();
    let tail = (-exponent).exp();
    let direct = 1.0 / (2.0 * r.theta) * r.log_x.powf(2.0 - 2.0 * r.theta) / r.log_x.ln().powf(1.0 + 2.0 * r.delta);
    let mut rep = BoundReport::from_log("theorem1", &[], (-tail).ln_1p()).with_regime(r);
    // 1 − e^{-E} with the complement stored exactly as the corollary value
    rep.value = 1.0 - tail;
    Ok(rep
        .with("exponent", exponent)
        .with("direct_exponent", direct)
        .with("direct_value", 1.0 - (-direct).exp()))
}

/// `exp(−E)`, the complement of [`theorem1_lower_bound`].
pub fn corollary_upper_bound(r: &RegimeParams) -> Result<BoundReport> {
    let exponent = theorem1_log_exponent(r)?.exp();
    Ok(BoundReport::from_log("corollary", &[], -exponent)
        .with_regime(r)
        .with("exponent", exponent))
}

fn squarefree_weight(n: u64, m: f64) -> Option<f64> {
    let sig = arith_signature(n).ok()?;
    sig.is_squarefree.then(|| (m - 1.0).powi(sig.omega as i32))
}

/// `(Σ μ²(n) a(n)² (m−1)^{ω(n)})^{m/2}`.
pub fn bh_rhs(coeffs: &[(u64, f64)], m: f64) -> Result<f64> {
    if !(m >= 2.0) || !m.is_finite() {
        return Err(Error::domain("bh_rhs", format!("need m ≥ 2, got {m}")));
    }
    if coeffs.iter().any(|&(n, a)| n == 0 || !a.is_finite()) {
        return Err(Error::domain("bh_rhs", "coefficients must be finite and indexed from 1"));
    }
    let inner = compensated_sum(coeffs.iter().filter_map(|&(n, a)| squarefree_weight(n, m).map(|w| a * a * w)));
    Ok(inner.powf(m / 2.0))
}

/// [`bh_rhs`] in exact rationals for even `m`.
pub fn bh_rhs_exact(coeffs: &ExactCoeffs, m: u32) -> Result<BigRational> {
    if m < 2 || m % 2 == 1 {
        return Err(Error::domain("bh_rhs_exact", format!("need even m ≥ 2, got {m}")));
    }
    let k = BigRational::from_integer(BigInt::from(m - 1));
    let mut inner = BigRational::zero();
    for (&n, a) in coeffs {
        let sig = arith_signature(n)?;
        if sig.is_squarefree {
            inner += a * a * Pow::pow(&k, sig.omega);
        }
    }
    Ok(Pow::pow(&inner, m / 2))
}

/// `κ^{2m} λ^{−m} (Σ_{n>x} μ²(n)(m−1)^{ω(n)} n^{−2σ})^{m/2}` with the tail
/// taken at its certified upper edge.
pub fn maximal_bound(lambda: f64, m: f64, x: u64, sigma: f64, kappa: f64) -> Result<BoundReport> {
    maximal_bound_with_cutoff(lambda, m, x, sigma, kappa, default_tail_cutoff(x))
}

pub fn maximal_bound_with_cutoff(lambda: f64, m: f64, x: u64, sigma: f64, kappa: f64, cutoff: u64) -> Result<BoundReport> {
    if !(lambda > 0.0) || !(kappa > 0.0) {
        return Err(Error::domain("maximal_bound", "need lambda > 0 and kappa > 0"));
    }
    if !(m > 2.0) || !m.is_finite() {
        return Err(Error::domain("maximal_bound", format!("need m > 2, got {m}")));
    }
    if x < 2 {
        return Err(Error::domain("maximal_bound", format!("need x ≥ 2, got {x}")));
    }
    let tail = tail_series(x, m, sigma, cutoff)?;
    let t = tail.upper();
    let log_value = 2.0 * m * kappa.ln() - m * lambda.ln() + 0.5 * m * t.ln();
    let direct = kappa.powf(2.0 * m) * lambda.powf(-m) * t.powf(m / 2.0);
    Ok(BoundReport::from_log(
        "maximal",
        &[("lambda", lambda), ("m", m), ("x", x as f64), ("sigma", sigma), ("kappa", kappa), ("cutoff", cutoff as f64)],
        log_value,
    )
    .with("tail_upper", t)
    .with("tail_partial", tail.partial)
    .with("tail_remainder", tail.remainder)
    .with("informative_threshold", lambda * lambda / kappa.powi(4))
    .with("direct_value", direct))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceMode {
    /// `Q = Σ_p p^{−2σ}`.
    Exact,
    /// `Q = log(1/(σ − ½))`.
    Asymptotic,
}

impl VarianceMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            VarianceMode::Exact => "exact",
            VarianceMode::Asymptotic => "asymptotic",
        }
    }
}

impl FromStr for VarianceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(VarianceMode::Exact),
            "asymptotic" => Ok(VarianceMode::Asymptotic),
            _ => Err(Error::domain("variance mode", format!("expected exact or asymptotic, got {s:?}"))),
        }
    }
}

impl fmt::Display for VarianceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Variance proxy of `Σ_p f(p) p^{−σ}`.
pub fn variance_proxy(sigma: f64, mode: VarianceMode) -> Result<f64> {
    if !(sigma > 0.5) || !sigma.is_finite() {
        return Err(Error::domain("hoeffding_bound", format!("need sigma > 1/2, got {sigma}")));
    }
    match mode {
        VarianceMode::Exact => prime_zeta(2.0 * sigma),
        VarianceMode::Asymptotic => Ok(-(sigma - 0.5).ln()),
    }
}

/// `exp(−λ²/(2Q))`.
pub fn hoeffding_bound(lambda: f64, sigma: f64, mode: VarianceMode) -> Result<BoundReport> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::domain("hoeffding_bound", format!("need lambda ≥ 0, got {lambda}")));
    }
    let q = variance_proxy(sigma, mode)?;
    if !(q > 0.0) {
        return Err(Error::domain("hoeffding_bound", format!("variance proxy {q} is not positive")));
    }
    let log_value = -lambda * lambda / (2.0 * q);
    Ok(BoundReport::from_log("hoeffding", &[("lambda", lambda), ("sigma", sigma)], log_value)
        .with("q", q)
        .with("variance_exact", (mode == VarianceMode::Exact) as u8 as f64)
        .with("direct_value", (-(lambda * lambda) / (2.0 * q)).exp()))
}

/// `log K_{α,β}` for `K = 2^{2α+4β}(1−θ)^{−4β}/(1 − θ^{−4β}2^{1−2α})`.
pub fn billingsley_log_constant(alpha: f64, beta: f64, theta: f64) -> Result<f64> {
    if !(alpha > 0.5) || !(beta >= 0.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::domain("billingsley_constant", format!("need alpha > 1/2, beta ≥ 0, got ({alpha}, {beta})")));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::domain("billingsley_constant", format!("need theta in (0, 1), got {theta}")));
    }
    let log_ratio = 4.0 * beta * theta.ln() + (2.0 * alpha - 1.0) * std::f64::consts::LN_2;
    if log_ratio <= 0.0 {
        return Err(Error::Divergent(format!(
            "θ^(4β)·2^(2α−1) = {} ≤ 1 at alpha = {alpha}, beta = {beta}, theta = {theta}",
            log_ratio.exp()
        )));
    }
    // 1 − θ^{−4β}2^{1−2α} = −expm1(−log_ratio)
    Ok((2.0 * alpha + 4.0 * beta) * std::f64::consts::LN_2 - 4.0 * beta * (-theta).ln_1p() - (-(-log_ratio).exp_m1()).ln())
}

pub fn billingsley_constant(alpha: f64, beta: f64, theta: f64) -> Result<f64> {
    Ok(billingsley_log_constant(alpha, beta, theta)?.exp())
}

/// Smallest admissible `θ` for `α = β = m/4`.
pub fn kappa_theta_min(m: f64) -> f64 {
    2f64.powf(-0.5 + 1.0 / m)
}

/// `κ = K_{m/4,m/4}(θ)^{1/(2m)}`.
pub fn kappa_at(m: f64, theta: f64) -> Result<f64> {
    if !(m > 2.0) || !m.is_finite() {
        return Err(Error::domain("optimize_kappa", format!("need m > 2, got {m}")));
    }
    Ok((billingsley_log_constant(m / 4.0, m / 4.0, theta)? / (2.0 * m)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaOpt {
    pub m: f64,
    pub theta_star: f64,
    pub kappa: f64,
    pub log_k: f64,
}

/// Minimizes `K_{m/4,m/4}(θ)` over admissible `θ` by golden-section search.
pub fn optimize_kappa(m: f64) -> Result<KappaOpt> {
    if !(m > 2.0) || !m.is_finite() {
        return Err(Error::domain("optimize_kappa", format!("need m > 2, got {m}")));
    }
    let f = |t: f64| billingsley_log_constant(m / 4.0, m / 4.0, t).unwrap_or(f64::INFINITY);
    let lo0 = kappa_theta_min(m);
    let (mut a, mut b) = (lo0, 1.0);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if b - a < 1e-15 {
            break;
        }
    }
    let theta_star = if fc < fd { c } else { d };
    let log_k = f(theta_star);
    assert!(log_k.is_finite() && theta_star > lo0, "no admissible theta for m = {m}");
    Ok(KappaOpt { m, theta_star, kappa: (log_k / (2.0 * m)).exp(), log_k })
}

/// `log λ = −log 2 − ½(log x)^{1−θ}/(log log x)^δ`.
pub fn lambda_threshold(r: &RegimeParams) -> Result<BoundReport> {
    let ll = require_log_log("lambda_threshold", r.log_x)?;
    let shift = 0.5 * ((1.0 - r.theta) * r.log_x.ln() - r.delta * ll.ln()).exp();
    let log_lambda = -std::f64::consts::LN_2 - shift;
    let direct = 0.5 * (-0.5 * r.log_x.powf(1.0 - r.theta) / ll.powf(r.delta)).exp();
    Ok(BoundReport::from_log("lambda_threshold", &[], log_lambda)
        .with_regime(r)
        .with("direct_value", direct))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonOpt {
    pub c12: f64,
    pub epsilon0: f64,
    pub beta: f64,
}

/// `c12 = c9(1−θ) + c9 + c10·θ`.
pub fn c12_of(c9: f64, c10: f64, theta: f64) -> f64 {
    c9 * (1.0 - theta) + c9 + c10 * theta
}

/// `w(ε) = ε²c12 − εc11`.
pub fn w_epsilon(eps: f64, c11: f64, c12: f64) -> f64 {
    eps * eps * c12 - eps * c11
}

/// Vertex of `w`: `ε0 = c11/(2c12)` and `β = −w(ε0) = c11²/(4c12)`.
pub fn optimize_epsilon(c9: f64, c10: f64, c11: f64, theta: f64) -> Result<EpsilonOpt> {
    if !(c9 > 0.0 && c10 > 0.0 && c11 > 0.0) {
        return Err(Error::domain("optimize_epsilon", "constants must be positive"));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::domain("optimize_epsilon", format!("need theta in (0, 1), got {theta}")));
    }
    let c12 = c12_of(c9, c10, theta);
    Ok(EpsilonOpt { c12, epsilon0: c11 / (2.0 * c12), beta: c11 * c11 / (4.0 * c12) })
}

/// `−β(log x)^{2−2θ}/log log x + ε log(1/λ)(log x)^{1−θ}/log log x`, with the
/// induced moment `m = ε(log x)^{1−θ}/log log x` in `extra`.
pub fn lemma41_bound(r: &RegimeParams, log_lambda: f64, beta: f64, epsilon: f64) -> Result<BoundReport> {
    let ll = require_log_log("lemma41_bound", r.log_x)?;
    if !(log_lambda.is_finite()) {
        return Err(Error::domain("lemma41_bound", "log lambda must be finite"));
    }
    if !(beta > 0.0 && epsilon > 0.0) {
        return Err(Error::domain("lemma41_bound", "need beta > 0 and epsilon > 0"));
    }
    let lx = r.log_x.ln();
    let lll = ll.ln();
    let first = -(beta.ln() + (2.0 - 2.0 * r.theta) * lx - lll).exp();
    let second = if log_lambda == 0.0 {
        0.0
    } else {
        (-log_lambda).signum() * (epsilon.ln() + (-log_lambda).abs().ln() + (1.0 - r.theta) * lx - lll).exp()
    };
    let m_real = (epsilon.ln() + (1.0 - r.theta) * lx - lll).exp();
    let direct_first = -beta * r.log_x.powf(2.0 - 2.0 * r.theta) / ll;
    let direct_second = epsilon * -log_lambda * r.log_x.powf(1.0 - r.theta) / ll;
    Ok(BoundReport::from_log("lemma41", &[("log_lambda", log_lambda), ("beta", beta), ("epsilon", epsilon)], first + second)
        .with_regime(r)
        .with("beta_term", first)
        .with("lambda_term", second)
        .with("direct_beta_term", direct_first)
        .with("direct_lambda_term", direct_second)
        .with("m_real", m_real)
        .with("m_rounded", m_real.round().max(2.0)))
}

/// `exp(−exp(β′ log x / log log x))`, kept as `log_value = −e^{inner}`.
pub fn angelo_xu_bound(log_x: f64, beta_prime: f64) -> Result<BoundReport> {
    let ll = require_log_log("angelo_xu_bound", log_x)?;
    if !(beta_prime > 0.0) {
        return Err(Error::domain("angelo_xu_bound", format!("need beta' > 0, got {beta_prime}")));
    }
    let inner = beta_prime * log_x / ll;
    Ok(BoundReport::from_log("angelo_xu", &[("log_x", log_x), ("beta_prime", beta_prime)], -inner.exp())
        .with("inner_exponent", inner))
}

/// Corollary and comparison bound side by side on a `log x` grid.
///
/// Each pair is followed by a `log_log_ratio` row holding
/// `log(−log angelo_xu) − log(−log corollary)`.
pub fn compare_bounds(log_x_grid: &[f64], theta: f64, delta: f64, beta_prime: f64) -> Result<Vec<BoundReport>> {
    let mut out = Vec::new();
    for &lx in log_x_grid {
        let r = regime_from_log_x(lx, theta, delta)?;
        let cor = corollary_upper_bound(&r)?;
        let ax = angelo_xu_bound(lx, beta_prime)?.with_regime(&r);
        let gap = ax.extra["inner_exponent"] - cor.extra["exponent"].ln();
        out.push(cor);
        out.push(ax);
        let mut row = BoundReport::from_log("log_log_ratio", &[], gap).with_regime(&r);
        row.value = gap;
        row.log_value = gap;
        row.overflow = false;
        row.underflow = false;
        out.push(row);
    }
    Ok(out)
}

/// Writes `name,sigma,theta,delta,log_x,log_value,value`.
pub fn write_bounds_csv<W: Write>(rows: &[BoundReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["name", "sigma", "theta", "delta", "log_x", "log_value", "value"])?;
    let cell = |r: &BoundReport, k: &str| r.input(k).map(csv_float).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.name.clone(),
            cell(r, "sigma"),
            cell(r, "theta"),
            cell(r, "delta"),
            cell(r, "log_x"),
            csv_float(r.log_value),
            csv_float(r.value),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Fitted,
    Default,
    User,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Fitted => "FITTED",
            Provenance::Default => "DEFAULT",
            Provenance::User => "USER",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerEntry {
    pub value: f64,
    pub provenance: Provenance,
    /// Description of the grid or search a fitted value came from.
    pub grid: Option<String>,
}

/// Named auxiliary constants with their provenance.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstantsLedger {
    entries: BTreeMap<String, LedgerEntry>,
}

impl ConstantsLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Defaults at working moment `m` and parameter `θ`: κ and θ* from
    /// [`optimize_kappa`], `c9 = c10 = c11 = 1`, ε and β from
    /// [`optimize_epsilon`], and `c2_chebyshev = 1.04`.
    pub fn defaults(m: f64, theta: f64) -> Result<Self> {
        let mut l = Self::new();
        let k = optimize_kappa(m)?;
        let grid = format!("golden-section over theta in ({}, 1), m = {m}", kappa_theta_min(m));
        l.set("kappa", k.kappa, Provenance::Fitted, Some(grid.clone()))?;
        l.set("theta_star", k.theta_star, Provenance::Fitted, Some(grid))?;
        for c in ["c9", "c10", "c11"] {
            l.set(c, 1.0, Provenance::Default, None)?;
        }
        let e = optimize_epsilon(1.0, 1.0, 1.0, theta)?;
        l.set("c12", e.c12, Provenance::Default, None)?;
        l.set("epsilon", e.epsilon0, Provenance::Default, None)?;
        l.set("beta", e.beta, Provenance::Default, None)?;
        l.set("c2_chebyshev", crate::nt::DEFAULT_CHEBYSHEV_C2, Provenance::Default, None)?;
        Ok(l)
    }

    pub fn set(&mut self, name: &str, value: f64, provenance: Provenance, grid: Option<String>) -> Result<()> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::domain("constants ledger", format!("{name} = {value} must be positive and finite")));
        }
        self.entries.insert(name.to_string(), LedgerEntry { value, provenance, grid });
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.get(name).map(|e| e.value)
    }

    pub fn entry(&self, name: &str) -> Option<&LedgerEntry> {
        self.entries.get(name)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &LedgerEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Records the witnesses `c3`, `c5` of a t-sum grid fit.
    pub fn record_lemma31_fit(&mut self, fit: &crate::nt::Lemma31Fit, grid: &str) -> Result<()> {
        self.set("c3", fit.c3, Provenance::Fitted, Some(grid.to_string()))?;
        self.set("c5", fit.c5, Provenance::Fitted, Some(grid.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{exact_moment, reciprocal_coeffs};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn regime_examples() {
        let r = regime_from_sigma(0.51, 0.5, 0.5).unwrap();
        assert!(rel(r.log_x, 1e4) < 1e-12);
        assert!(!r.x_is_finite_representable);
        assert!(r.x().is_none());
        let r = regime_from_sigma(0.6, 1.0, 0.5).unwrap();
        assert!(rel(r.log_x, 10.0) < 1e-12);
        assert!(r.x_is_finite_representable);
        assert!(regime_from_sigma(0.5, 0.5, 0.5).is_err());
        let back = regime_from_log_x(1e4, 0.5, 0.5).unwrap();
        assert!((back.sigma - 0.51).abs() < 1e-15);
    }

    #[test]
    fn theorem1_example() {
        let r = regime_from_sigma(0.51, 0.5, 0.5).unwrap();
        let t = theorem1_lower_bound(&r).unwrap();
        let e = t.extra["exponent"];
        assert!(rel(e, 1e4 / (1e4f64).ln().powi(2)) < 1e-12);
        assert!((e - 117.88).abs() < 0.01);
        assert!(rel(e, t.extra["direct_exponent"]) < 1e-10);
        let c = corollary_upper_bound(&r).unwrap();
        assert_eq!(t.value + c.value, 1.0);
        assert!(rel(c.value, (-e).exp()) < 1e-12);
        let wide = regime_from_sigma(0.51, 0.5, 20.0).unwrap();
        assert!(theorem1_lower_bound(&wide).unwrap().value < 1e-10);
        let low = regime_from_log_x(1.0, 0.5, 0.5).unwrap();
        assert!(theorem1_lower_bound(&low).is_err());
    }

    #[test]
    fn bh_rhs_examples() {
        let coeffs = [(1, 1.0), (2, 0.5), (3, 1.0 / 3.0)];
        assert!(rel(bh_rhs(&coeffs, 4.0).unwrap(), 625.0 / 144.0) < 1e-14);
        assert!(rel(bh_rhs(&coeffs, 2.0).unwrap(), 49.0 / 36.0) < 1e-14);
        assert_eq!(bh_rhs(&[(4, 1.0), (12, 3.0)], 4.0).unwrap(), 0.0);
        let exact = bh_rhs_exact(&reciprocal_coeffs(3), 4).unwrap();
        assert_eq!(exact, BigRational::new(625.into(), 144.into()));
        assert!(exact_moment(3, &reciprocal_coeffs(3), 4).unwrap() <= exact);
        assert!(bh_rhs_exact(&reciprocal_coeffs(3), 3).is_err());
    }

    #[test]
    fn maximal_example() {
        let b = maximal_bound_with_cutoff(0.1, 4.0, 10_000, 0.75, 6.4, 1 << 18).unwrap();
        assert!(b.log_value.is_finite());
        assert!(rel(b.value, b.extra["direct_value"]) < 1e-10);
        let d = maximal_bound_with_cutoff(0.2, 4.0, 10_000, 0.75, 6.4, 1 << 18).unwrap();
        assert!((b.log_value - d.log_value - 4.0 * std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn hoeffding_examples() {
        let h = hoeffding_bound(1.0, 0.51, VarianceMode::Asymptotic).unwrap();
        assert!((h.value - 0.89711).abs() < 1e-5, "{}", h.value);
        assert_eq!(hoeffding_bound(0.0, 0.7, VarianceMode::Exact).unwrap().value, 1.0);
        assert!(hoeffding_bound(1.0, 0.5, VarianceMode::Exact).is_err());
        let e = hoeffding_bound(1.0, 0.51, VarianceMode::Exact).unwrap();
        let q_gap = e.extra["q"] - h.extra["q"];
        assert_eq!(e.value > h.value, q_gap > 0.0);
    }

    #[test]
    fn billingsley_examples() {
        let k = billingsley_constant(1.0, 1.0, 0.9).unwrap();
        let direct = 64.0 * 1e4 / (1.0 - 1.0 / (0.6561 * 2.0));
        assert!(rel(k, direct) < 1e-12);
        assert!(rel(k, 2.690e6) < 1e-3);
        assert!(matches!(billingsley_constant(1.0, 1.0, 0.8), Err(Error::Divergent(_))));
        assert!(billingsley_constant(1.0, 1.0, 0.999).unwrap() > billingsley_constant(1.0, 1.0, 0.99).unwrap());
    }

    #[test]
    fn kappa_examples() {
        let at = kappa_at(4.0, 0.9).unwrap();
        assert!((at - 6.36).abs() < 0.01, "{at}");
        let opt = optimize_kappa(4.0).unwrap();
        assert!(opt.kappa <= at);
        for m in [4.0, 8.0, 16.0, 32.0, 64.0, 2.5] {
            let o = optimize_kappa(m).unwrap();
            assert!(o.theta_star > kappa_theta_min(m) && o.theta_star < 1.0);
            if m >= 4.0 {
                assert!(o.kappa <= 8.0, "m = {m}: {}", o.kappa);
            }
        }
    }

    #[test]
    fn lambda_and_epsilon() {
        let r = regime_from_sigma(0.51, 0.5, 0.5).unwrap();
        let l = lambda_threshold(&r).unwrap();
        let independent = -std::f64::consts::LN_2 - 0.5 * 100.0 / (1e4f64).ln().sqrt();
        assert!((l.log_value - independent).abs() < 1e-10);
        assert!(l.value < 0.5);
        assert!(rel(l.value, l.extra["direct_value"]) < 1e-10);
        let e = optimize_epsilon(1.0, 1.0, 1.0, 0.5).unwrap();
        assert_eq!((e.c12, e.epsilon0, e.beta), (2.0, 0.25, 0.125));
        assert!(w_epsilon(e.epsilon0, 1.0, e.c12) < 0.0);
        let e2 = optimize_epsilon(1.0, 1.0, 2.0, 0.5).unwrap();
        assert_eq!(e2.beta, 4.0 * e.beta);
    }

    #[test]
    fn lemma41_examples() {
        let r = regime_from_sigma(0.51, 0.5, 0.5).unwrap();
        let lam = lambda_threshold(&r).unwrap();
        let b = lemma41_bound(&r, lam.log_value, 0.125, 0.25).unwrap();
        assert!(rel(b.extra["beta_term"], b.extra["direct_beta_term"]) < 1e-10);
        assert!(rel(b.extra["lambda_term"], b.extra["direct_lambda_term"]) < 1e-10);
        // substituting the threshold λ reproduces the two-term display
        let (lx, ll) = (r.log_x, r.log_x.ln());
        let expected = 0.25 / 2.0 * lx.powf(2.0 - 2.0 * r.theta) / ll.powf(1.0 + r.delta)
            + 0.25 * std::f64::consts::LN_2 * lx.powf(1.0 - r.theta) / ll;
        assert!(rel(b.extra["lambda_term"], expected) < 1e-10);
        assert!(rel(b.extra["m_real"], 0.25 * 100.0 / ll) < 1e-12);
        let fixed = lemma41_bound(&r, -17.167, 0.125, 0.25).unwrap();
        assert!(rel(fixed.extra["lambda_term"], fixed.extra["direct_lambda_term"]) < 1e-10);
    }

    #[test]
    fn angelo_xu_examples() {
        let a = angelo_xu_bound(1e4, 1.0).unwrap();
        assert!((a.extra["inner_exponent"] - 1085.7).abs() < 0.1);
        assert!(a.log_value == f64::NEG_INFINITY && a.value == 0.0);
        let tiny = angelo_xu_bound(1e4, 1e-12).unwrap();
        assert!((tiny.value - (-1f64).exp()).abs() < 1e-9);
        let rows = compare_bounds(&[10.0, 100.0, 1000.0], 0.5, 0.5, 1.0).unwrap();
        assert_eq!(rows.len(), 9);
        let mut buf = Vec::new();
        write_bounds_csv(&rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("name,sigma,theta,delta,log_x,log_value,value\ncorollary,"));
    }

    #[test]
    fn ledger_defaults() {
        let l = ConstantsLedger::defaults(4.0, 0.5).unwrap();
        assert_eq!(l.get("epsilon"), Some(0.25));
        assert_eq!(l.entry("kappa").unwrap().provenance, Provenance::Fitted);
        assert!(l.entries().all(|(_, e)| e.value > 0.0));
        let mut l = l;
        assert!(l.set("c9", 0.0, Provenance::User, None).is_err());
    }
}
