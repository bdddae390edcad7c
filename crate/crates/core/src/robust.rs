//! Robustness diagnostics: per-observation score functions, their tail
//! limits, the redescending point of the location score, Huber-type
//! ρ conditions and a heavy-tail probe.
//!
//! Everything here works in the standardized coordinate (`μ = 0`, `σ = 1`)
//! and only uses the shape parameters of the supplied [`Params`]. Scores are
//! `∂ ln f / ∂θ`, the sign for which `ψ_σ → c` and `ψ_k → 1/k`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::esbiii::{Coordinate, Params};
use crate::scalar::Real;

/// Per-parameter container that serializes as `{mu, sigma, c, k, eps}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerParam<T> {
    pub mu: T,
    pub sigma: T,
    pub c: T,
    pub k: T,
    pub eps: T,
}

impl<T: Copy> PerParam<T> {
    pub fn from_fn(mut f: impl FnMut(Coordinate) -> T) -> Self {
        Self {
            mu: f(Coordinate::Mu),
            sigma: f(Coordinate::Sigma),
            c: f(Coordinate::C),
            k: f(Coordinate::K),
            eps: f(Coordinate::Eps),
        }
    }

    pub fn get(&self, which: Coordinate) -> T {
        match which {
            Coordinate::Mu => self.mu,
            Coordinate::Sigma => self.sigma,
            Coordinate::C => self.c,
            Coordinate::K => self.k,
            Coordinate::Eps => self.eps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Limit<F> {
    Finite(F),
    PosInfinity,
    NegInfinity,
}

impl<F: Real> Limit<F> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Limit::Finite(_))
    }
}

/// Large-|x| probe abscissae.
pub const PROBE_X: [f64; 3] = [1e6, 1e7, 1e8];

/// A decade-to-decade increment ratio below this counts as converging.
const CONVERGING_RATIO: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiLimit<F> {
    /// Analytic limit as `x → +∞`.
    pub plus: Limit<F>,
    /// Analytic limit as `x → -∞`.
    pub minus: Limit<F>,
    /// `ψ` at `+PROBE_X`.
    pub probe_plus: [F; 3],
    /// `ψ` at `-PROBE_X`.
    pub probe_minus: [F; 3],
    /// Numeric verdict: on both sides the last decade's increment is
    /// clearly smaller than the one before.
    pub numerically_bounded: bool,
    /// Finite limits only: both `|ψ(±10⁸) - limit| ≤ 1e-6·max(1, |limit|)`
    /// and the error does not grow from `10⁶` to `10⁸`.
    pub limit_confirmed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RedescendPoint<F> {
    pub x0: Option<F>,
    /// Why `x0` is absent.
    pub reason: Option<&'static str>,
    pub discriminant: F,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoConditions {
    /// `ρ(0) = 0`; never holds since `-ln f(0)` is not zero.
    pub rho_zero_at_origin: bool,
    /// `ρ(x) → ∞` as `|x| → ∞`.
    pub rho_unbounded: bool,
    /// `ρ(x)/|x| → 0`.
    pub rho_sublinear: bool,
    /// `ψ_μ` redescends (a finite `x0` exists).
    pub psi_mu_redescends: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailProbe<F> {
    pub x: F,
    /// `λx + ln F̄(x)`.
    pub log_value: F,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeavyTail<F> {
    pub lambda: F,
    pub heavy: bool,
    pub probes: Vec<TailProbe<F>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport<F> {
    pub limits: PerParam<PsiLimit<F>>,
    pub bounded: PerParam<bool>,
    pub x0: Option<F>,
    pub x0_reason: Option<&'static str>,
    pub rho_conditions: RhoConditions,
    pub tail_heavy: bool,
    pub tail_probe: HeavyTail<F>,
    /// `-d ln F̄ / d ln x` between `x = 10³` and `10⁵`.
    pub tail_index_estimate: F,
}

fn standard<F: Real>(p: &Params<F>) -> Params<F> {
    Params { mu: F::zero(), sigma: F::one(), ..*p }
}

/// Score `ψ_θ(x) = ∂ ln f(x) / ∂θ` of the standardized density.
pub fn psi<F: Real>(p: &Params<F>, which: Coordinate, x: F) -> Result<F> {
    if x == F::zero() {
        return Err(domain("psi", "x = 0"));
    }
    Ok(standard(p).ln_pdf_gradient(x)?[which.index()])
}

/// `ρ(x) = -ln f(x)` of the standardized density.
pub fn rho<F: Real>(p: &Params<F>, x: F) -> F {
    -standard(p).ln_pdf(x)
}

fn analytic_limit<F: Real>(p: &Params<F>, which: Coordinate) -> (Limit<F>, Limit<F>) {
    let one = F::one();
    match which {
        Coordinate::Mu => (Limit::Finite(F::zero()), Limit::Finite(F::zero())),
        Coordinate::Sigma => (Limit::Finite(p.c), Limit::Finite(p.c)),
        Coordinate::C => (Limit::NegInfinity, Limit::NegInfinity),
        Coordinate::K => (Limit::Finite(one / p.k), Limit::Finite(one / p.k)),
        Coordinate::Eps => (
            Limit::Finite((p.c + one) / (one + p.eps)),
            Limit::Finite(-(p.c + one) / (one - p.eps)),
        ),
    }
}

fn converging<F: Real>(v: &[F; 3]) -> bool {
    let d1 = (v[1] - v[0]).abs();
    let d2 = (v[2] - v[1]).abs();
    d2 <= F::lit(CONVERGING_RATIO) * d1 || d1 + d2 == F::zero()
}

fn confirmed<F: Real>(limit: Limit<F>, v: &[F; 3]) -> bool {
    match limit {
        Limit::Finite(l) => {
            let err_far = (v[2] - l).abs();
            let err_near = (v[0] - l).abs();
            err_far <= F::lit(1e-6) * l.abs().max(F::one()) && err_far <= err_near + F::epsilon()
        }
        _ => false,
    }
}

/// Analytic limits of each `ψ` at `x → ±∞` with a numeric probe.
pub fn psi_limits<F: Real>(p: &Params<F>) -> Result<PerParam<PsiLimit<F>>> {
    let sp = standard(p);
    let mut probes = Vec::with_capacity(2 * PROBE_X.len());
    for sign in [1.0, -1.0] {
        for &x in &PROBE_X {
            probes.push(sp.ln_pdf_gradient(F::lit(sign * x))?);
        }
    }
    Ok(PerParam::from_fn(|which| {
        let i = which.index();
        let probe_plus = [probes[0][i], probes[1][i], probes[2][i]];
        let probe_minus = [probes[3][i], probes[4][i], probes[5][i]];
        let (plus, minus) = analytic_limit(p, which);
        PsiLimit {
            plus,
            minus,
            probe_plus,
            probe_minus,
            numerically_bounded: converging(&probe_plus) && converging(&probe_minus),
            limit_confirmed: confirmed(plus, &probe_plus) && confirmed(minus, &probe_minus),
        }
    }))
}

/// Critical point `x0 > 0` of `ψ_μ`, where its increase turns into decrease.
///
/// `u = z0^{-c}` is the positive root of `(ck - 1)u² - Bu - (c + 1) = 0`
/// with `B = -c²k - c² - ck + c + 2`, taken in the rationalized form
/// `u = -2(c + 1)/(B - √D)` so that `ck = 1` is not a special case.
/// Then `x0 = (1 + ε) u^{-1/c}`.
pub fn redescend_point<F: Real>(p: &Params<F>) -> RedescendPoint<F> {
    let (c, k) = (p.c, p.k);
    let one = F::one();
    let b = -c * c * k - c * c - c * k + c + F::lit(2.0);
    let disc = b * b + F::lit(4.0) * (c * k - one) * (c + one);
    let absent = |reason| RedescendPoint { x0: None, reason: Some(reason), discriminant: disc };
    if disc < F::zero() {
        return absent("negative discriminant");
    }
    let denom = b - disc.sqrt();
    if denom == F::zero() {
        return absent(if c * k == one { "ck=1" } else { "vanishing denominator" });
    }
    let u = -F::lit(2.0) * (c + one) / denom;
    if !(u > F::zero()) || !u.is_finite() {
        return absent("no positive root");
    }
    let x0 = (one + p.eps) * (-u.ln() / c).exp();
    RedescendPoint { x0: Some(x0), reason: None, discriminant: disc }
}

pub fn rho_conditions<F: Real>(p: &Params<F>) -> RhoConditions {
    let (near, far) = (F::lit(1e3), F::lit(1e6));
    let mut unbounded = true;
    let mut sublinear = true;
    for s in [F::one(), -F::one()] {
        let (rn, rf) = (rho(p, s * near), rho(p, s * far));
        unbounded &= rf > rn;
        sublinear &= rf / far < rn / near && rf / far < F::lit(1e-2);
    }
    let rho0 = rho(p, F::zero());
    RhoConditions {
        rho_zero_at_origin: rho0 == F::zero(),
        rho_unbounded: unbounded,
        rho_sublinear: sublinear,
        psi_mu_redescends: redescend_point(p).x0.is_some(),
    }
}

/// First probe abscissa: `10`, or the first power of ten at or beyond `c/λ`
/// where `λx - c ln x` has stopped decreasing.
pub fn heavy_tail_grid_start<F: Real>(c: F, lambda: F) -> F {
    let ratio = (c / lambda).as_f64();
    let e = ratio.log10().ceil().max(1.0);
    F::lit(10f64.powf(e))
}

/// Probes `λx + ln F̄(x)` on four consecutive decades; heavy when the
/// sequence is strictly increasing.
pub fn heavy_tail_check<F: Real>(p: &Params<F>, lambda: F) -> Result<HeavyTail<F>> {
    if !(lambda > F::zero()) || !lambda.is_finite() {
        return Err(domain("heavy_tail_check", format!("lambda = {} (need lambda > 0)", lambda)));
    }
    let sp = standard(p);
    let start = heavy_tail_grid_start(p.c, lambda);
    let probes: Vec<TailProbe<F>> = (0..4)
        .map(|j| {
            let x = start * F::lit(10f64.powi(j));
            TailProbe { x, log_value: lambda * x + sp.ln_sf(x) }
        })
        .collect();
    let heavy = probes.windows(2).all(|w| w[1].log_value > w[0].log_value);
    Ok(HeavyTail { lambda, heavy, probes })
}

/// `-(ln F̄(hi) - ln F̄(lo)) / (ln hi - ln lo)`; tends to `c`.
pub fn tail_index_estimate<F: Real>(p: &Params<F>, lo: F, hi: F) -> F {
    let sp = standard(p);
    -(sp.ln_sf(hi) - sp.ln_sf(lo)) / (hi.ln() - lo.ln())
}

/// Full diagnostic. Fails if an analytic boundedness claim disagrees with
/// the numeric probe.
pub fn score_report<F: Real>(p: &Params<F>, lambda: F) -> Result<ScoreReport<F>> {
    let limits = psi_limits(p)?;
    let bounded = PerParam::from_fn(|w| {
        let l = limits.get(w);
        l.plus.is_finite() && l.minus.is_finite()
    });
    for which in Coordinate::ALL {
        if bounded.get(which) != limits.get(which).numerically_bounded {
            return Err(Error::NonFinite(format!(
                "boundedness probe for psi_{} disagrees with its analytic limit",
                which.name()
            )));
        }
    }
    let r = redescend_point(p);
    let tail_probe = heavy_tail_check(p, lambda)?;
    Ok(ScoreReport {
        limits,
        bounded,
        x0: r.x0,
        x0_reason: r.reason,
        rho_conditions: rho_conditions(p),
        tail_heavy: tail_probe.heavy,
        tail_probe,
        tail_index_estimate: tail_index_estimate(p, F::lit(1e3), F::lit(1e5)),
    })
}
