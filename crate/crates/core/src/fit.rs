//! Maximum-likelihood estimation of `(μ, σ, c, k, ε)`.
//!
//! The fitter cycles through the coordinates in the order `μ, σ, c, k, ε`,
//! solving each score equation with the others held fixed, and accepts an
//! update only if the log-likelihood does not decrease. The `k` equation has
//! a closed form. A damped Newton step on all smooth coordinates closes each
//! cycle.
//!
//! The log-likelihood is not smooth in `μ`: every observation is a zero
//! (`ck > 1`) or a pole (`ck < 1`) of the density. For `ck > 1` the `μ` score
//! runs from `+∞` to `-∞` between adjacent order statistics and the update
//! brackets its root there. For `ck ≤ 1` the likelihood is unbounded as `μ`
//! approaches any observation; `μ` is then restricted to midpoints between
//! adjacent order statistics and left out of the score norm.
//!
//! Fits run on data standardized by median and interquartile range, so the
//! estimates transform exactly under `x → a x + b` and `x → -x` up to
//! rounding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::esbiii::{Coordinate, Params};
use crate::gof::{aic, quantile_sorted, Dataset};
use crate::scalar::{softplus, Real};
use crate::special::{brent, golden_max, RootOptions};

/// Smallest sample [`fit_ml`] and [`moment_init`] accept.
pub const MIN_SAMPLE: usize = 20;

/// `ε` is kept inside `(-1 + δ, 1 - δ)`.
pub const EPS_MARGIN: f64 = 1e-6;

/// `|ln θ|` bound for σ, c and k in standardized units.
const LOG_BOUND: f64 = 25.0;

const INIT_SHAPES: [(f64, f64); 4] = [(2.0, 1.0), (5.0, 0.2), (1.5, 3.0), (20.0, 0.2)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Init<F> {
    MomentInit,
    UserInit(Params<F>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig<F> {
    pub max_cycles: u32,
    /// Relative change per cycle below which parameters count as settled
    /// (`|Δμ|/σ`, `|Δσ|/σ`, `|Δc|/c`, `|Δk|/k`, `|Δε|`).
    pub param_tol: F,
    /// Per observation; the score norm must fall below `score_tol · n`.
    pub score_tol: F,
    pub init: Init<F>,
    pub fixed_c: Option<F>,
}

impl<F: Real> Default for FitConfig<F> {
    fn default() -> Self {
        Self {
            max_cycles: 500,
            param_tol: F::lit(1e-6),
            score_tol: F::lit(1e-5),
            init: Init::MomentInit,
            fixed_c: None,
        }
    }
}

impl<F: Real> FitConfig<F> {
    pub fn validate(&self) -> Result<()> {
        if !(self.param_tol > F::zero()) || !(self.score_tol > F::zero()) {
            return Err(Error::InvalidParams("tolerances must be positive".into()));
        }
        if self.max_cycles == 0 {
            return Err(Error::InvalidParams("max_cycles must be at least 1".into()));
        }
        if let Some(c) = self.fixed_c {
            if !(c > F::zero()) || !c.is_finite() {
                return Err(Error::InvalidParams(format!("fixed_c = {} (need c > 0)", c)));
            }
        }
        Ok(())
    }

    pub fn free_params(&self) -> u32 {
        if self.fixed_c.is_some() {
            4
        } else {
            5
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint<F> {
    pub cycle: u32,
    pub loglik: F,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult<F> {
    pub params: Params<F>,
    pub loglik: F,
    pub aic: F,
    pub free_params: u32,
    pub converged: bool,
    pub cycles: u32,
    /// Euclidean norm of `(σ ∂l/∂μ, σ ∂l/∂σ, ∂l/∂c, ∂l/∂k, ∂l/∂ε)` over the
    /// free smooth coordinates.
    pub score_norm: F,
    /// Threshold `score_norm` was held to.
    pub score_threshold: F,
    pub trace: Vec<TracePoint<F>>,
    pub diagnostics: Vec<String>,
}

/// Signs `sᵢ` and scaled magnitudes `zᵢ = sᵢ(xᵢ - μ)/(σ(1 + sᵢε))`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedSample<F> {
    pub s: Vec<F>,
    pub z: Vec<F>,
}

impl<F: Real> StandardizedSample<F> {
    pub fn new(p: &Params<F>, data: &Dataset<F>) -> Self {
        let (s, z) = data
            .values()
            .iter()
            .map(|&y| {
                let x = (y - p.mu) / p.sigma;
                let side = p.side_scale(x);
                let s = if x >= F::zero() { F::one() } else { -F::one() };
                (s, s * x / side)
            })
            .unzip();
        Self { s, z }
    }
}

/// `n ln(ck/2σ) - (c+1) Σ ln zᵢ - (k+1) Σ ln(1 + zᵢ^{-c})`, evaluated in
/// log-space. Observations at `μ` contribute the density limit there.
fn loglik_slice<F: Real>(p: &Params<F>, ys: &[F]) -> Result<F> {
    let (ln_plus, ln_minus) = ((F::one() + p.eps).ln(), (F::one() - p.eps).ln());
    let mut regular = 0usize;
    let mut sum_ln_z = F::zero();
    let mut sum_sp = F::zero();
    let mut at_mu = F::zero();
    for &y in ys {
        let x = (y - p.mu) / p.sigma;
        if x == F::zero() {
            let v = p.ln_pdf(y);
            if v == F::infinity() {
                return Err(Error::SingularLikelihood);
            }
            at_mu = at_mu + v;
            continue;
        }
        let ln_z = x.abs().ln() - if x > F::zero() { ln_plus } else { ln_minus };
        regular += 1;
        sum_ln_z = sum_ln_z + ln_z;
        sum_sp = sum_sp + softplus(-p.c * ln_z);
    }
    let n = F::lit(regular as f64);
    let head = if regular == 0 { F::zero() } else { n * (p.ck() / (F::lit(2.0) * p.sigma)).ln() };
    Ok(head - (p.c + F::one()) * sum_ln_z - (p.k + F::one()) * sum_sp + at_mu)
}

pub fn loglik<F: Real>(p: &Params<F>, data: &Dataset<F>) -> Result<F> {
    loglik_slice(p, data.values())
}

/// Summed gradient of `ln f`; the per-observation terms are those of
/// [`Params::ln_pdf_gradient`] with the shared logarithms hoisted.
fn score_slice<F: Real>(p: &Params<F>, ys: &[F]) -> Result<[F; 5]> {
    let one = F::one();
    let (side_p, side_m) = (one + p.eps, one - p.eps);
    let (ln_p, ln_m) = (side_p.ln(), side_m.ln());
    let (c, k1) = (p.c, p.k + one);
    let (mut s_mu, mut s_a, mut s_c, mut s_k, mut s_e) = (F::zero(), F::zero(), F::zero(), F::zero(), F::zero());
    for &y in ys {
        let x = (y - p.mu) / p.sigma;
        if x == F::zero() {
            return Err(Error::Domain { func: "score", detail: "observation at the location parameter".into() });
        }
        let pos = x > F::zero();
        let ln_z = x.abs().ln() - if pos { ln_p } else { ln_m };
        let ln_w = -c * ln_z;
        // q = w/(1+w) and ln(1+w) from one exponential
        let (q, sp) = if ln_w > F::zero() {
            let e = (-ln_w).exp();
            (one / (one + e), ln_w + e.ln_1p())
        } else {
            let e = ln_w.exp();
            (e / (one + e), e.ln_1p())
        };
        let a = c * k1 * q - (c + one);
        s_mu = s_mu + a / x;
        s_a = s_a + a;
        s_c = s_c + ln_z * (one - k1 * q);
        s_k = s_k + sp;
        s_e = s_e + if pos { a / side_p } else { -a / side_m };
    }
    let n = F::lit(ys.len() as f64);
    Ok([
        -s_mu / p.sigma,
        -(n + s_a) / p.sigma,
        n / c - s_c,
        n / p.k - s_k,
        -s_e,
    ])
}

/// `∂l/∂(μ, σ, c, k, ε)`. Fails when an observation sits exactly at `μ`.
pub fn score<F: Real>(p: &Params<F>, data: &Dataset<F>) -> Result<[F; 5]> {
    score_slice(p, data.values())
}

/// `k̂ = n / Σ ln(1 + zᵢ^{-c})`, the exact maximizer in `k`.
fn k_closed_form<F: Real>(p: &Params<F>, ys: &[F]) -> F {
    let (ln_plus, ln_minus) = ((F::one() + p.eps).ln(), (F::one() - p.eps).ln());
    let mut sum = F::zero();
    for &y in ys {
        let x = (y - p.mu) / p.sigma;
        if x == F::zero() {
            continue;
        }
        let ln_z = x.abs().ln() - if x > F::zero() { ln_plus } else { ln_minus };
        sum = sum + softplus(-p.c * ln_z);
    }
    F::lit(ys.len() as f64) / sum
}

fn root_opts<F: Real>(x_tol: F) -> RootOptions<F> {
    RootOptions { f_tol: F::zero(), x_tol, max_iterations: 200 }
}

/// Walks from `u0` in the uphill direction of `g` with doubling steps until
/// `g` turns from positive to negative, then solves on that bracket.
fn expand_and_solve<F: Real>(
    mut g: impl FnMut(F) -> F,
    u0: F,
    lo: F,
    hi: F,
    step: F,
    coordinate: &'static str,
) -> Result<F> {
    let g0 = g(u0);
    if g0 == F::zero() {
        return Ok(u0);
    }
    if !g0.is_finite() {
        return Err(Error::NoBracket { coordinate });
    }
    let up = g0 > F::zero();
    let mut prev = u0;
    let mut h = step;
    for _ in 0..80 {
        let next = if up { (prev + h).min(hi) } else { (prev - h).max(lo) };
        let gn = g(next);
        if gn.is_nan() {
            return Err(Error::NoBracket { coordinate });
        }
        if (gn > F::zero()) != up || gn == F::zero() {
            let (a, b) = if up { (prev, next) } else { (next, prev) };
            let tol = F::epsilon() * F::lit(4.0) * (a.abs() + b.abs()).max(F::one());
            return brent(&mut g, a, b, root_opts(tol)).map(|r| r.root);
        }
        if next == hi || next == lo {
            break;
        }
        prev = next;
        h = h + h;
    }
    Err(Error::NoBracket { coordinate })
}

/// Position-preserving map between a coordinate and the variable its root
/// search runs in.
fn to_search<F: Real>(which: Coordinate, v: F) -> F {
    match which {
        Coordinate::Sigma | Coordinate::C | Coordinate::K => v.ln(),
        _ => v,
    }
}

fn from_search<F: Real>(which: Coordinate, u: F) -> F {
    match which {
        Coordinate::Sigma | Coordinate::C | Coordinate::K => u.exp(),
        _ => u,
    }
}

fn search_bounds<F: Real>(which: Coordinate) -> (F, F) {
    match which {
        Coordinate::Eps => (F::lit(-1.0 + EPS_MARGIN), F::lit(1.0 - EPS_MARGIN)),
        _ => (F::lit(-LOG_BOUND), F::lit(LOG_BOUND)),
    }
}

fn search_step<F: Real>(which: Coordinate) -> F {
    match which {
        Coordinate::Eps => F::lit(0.02),
        _ => F::lit(0.05),
    }
}

/// Adjacent order statistics around `mu` as `(lower, upper)`; clamped to
/// the first or last gap when `mu` lies outside the data.
fn gap_around<F: Real>(sorted: &[F], mu: F) -> (usize, usize) {
    let n = sorted.len();
    let upper = sorted.partition_point(|&v| v <= mu).clamp(1, n - 1);
    (upper - 1, upper)
}

/// Root of one score equation with the other four parameters fixed.
///
/// `μ` is solved between the order statistics adjacent to the current
/// value and needs `ck > 1`; `σ`, `c` and `k` are bracketed in `ln θ`;
/// `ε` within `(-1 + δ, 1 - δ)`. `k` uses its closed form.
pub fn solve_coordinate<F: Real>(
    p: &Params<F>,
    which: Coordinate,
    data: &Dataset<F>,
    cfg: &FitConfig<F>,
) -> Result<F> {
    let ys = data.values();
    match which {
        Coordinate::K => Ok(k_closed_form(p, ys)),
        Coordinate::C if cfg.fixed_c.is_some() => Ok(cfg.fixed_c.unwrap()),
        Coordinate::Mu => solve_mu_in_gap(p, ys, data.sorted()).ok_or(Error::NoBracket { coordinate: "mu" }),
        _ => solve_smooth(p, which, ys),
    }
}

fn solve_smooth<F: Real>(p: &Params<F>, which: Coordinate, ys: &[F]) -> Result<F> {
    let i = which.index();
    let (lo, hi) = search_bounds(which);
    let g = |u: F| match score_slice(&p.with(which, from_search(which, u)), ys) {
        Ok(s) => s[i],
        Err(_) => F::nan(),
    };
    let u = expand_and_solve(g, to_search(which, p.get(which)), lo, hi, search_step(which), which.name())?;
    Ok(from_search(which, u))
}

fn solve_mu_in_gap<F: Real>(p: &Params<F>, ys: &[F], sorted: &[F]) -> Option<F> {
    if !(p.ck() > F::one()) {
        return None;
    }
    let (i, j) = gap_around(sorted, p.mu);
    mu_root_between(p, ys, sorted[i], sorted[j])
}

fn mu_root_between<F: Real>(p: &Params<F>, ys: &[F], a: F, b: F) -> Option<F> {
    if !(b > a) {
        return None;
    }
    let w = b - a;
    let (lo, hi) = (a + w * F::lit(1e-9), b - w * F::lit(1e-9));
    let g = |mu: F| score_slice(&p.with(Coordinate::Mu, mu), ys).map(|s| s[0]).unwrap_or(F::nan());
    let tol = F::epsilon() * F::lit(4.0) * (a.abs() + b.abs()).max(F::min_positive_value());
    brent(g, lo, hi, root_opts(tol)).ok().map(|r| r.root)
}

/// Quantile-matching start: for each `(c, k)` in a small grid and
/// `ε ∈ {-0.8, -0.6, …, 0.8}`, scale and location are matched to the sample
/// interquartile range and median; the combination with the highest
/// log-likelihood wins.
pub fn moment_init<F: Real>(data: &Dataset<F>) -> Result<Params<F>> {
    if data.len() < MIN_SAMPLE {
        return Err(Error::SmallSample { n: data.len(), min: MIN_SAMPLE });
    }
    moment_init_sorted(data.sorted())
}

fn moment_init_sorted<F: Real>(sorted: &[F]) -> Result<Params<F>> {
    init_candidates(sorted)?
        .into_iter()
        .next()
        .map(|(_, p)| p)
        .ok_or_else(|| Error::DegenerateData("no starting value has a finite likelihood".into()))
}

/// All quantile-matched starting points with finite likelihood, best first.
fn init_candidates<F: Real>(sorted: &[F]) -> Result<Vec<(F, Params<F>)>> {
    let q = |p: f64| quantile_sorted(sorted, F::lit(p));
    let (q25, q50, q75) = (q(0.25), q(0.5), q(0.75));
    let iqr = spread(sorted)?;
    let mut out: Vec<(F, Params<F>)> = Vec::new();
    for &(c, k) in &INIT_SHAPES {
        for j in -4..=4 {
            let eps = F::lit(j as f64 * 0.2);
            let shape = Params::standard(F::lit(c), F::lit(k), eps)?;
            let (m25, m50, m75) = (shape.quantile(F::lit(0.25))?, shape.quantile(F::lit(0.5))?, shape.quantile(F::lit(0.75))?);
            let sigma = if q75 > q25 { (q75 - q25) / (m75 - m25) } else { iqr / (m75 - m25) };
            let mu = q50 - sigma * m50;
            let cand = shape.with_location_scale(mu, sigma)?;
            if let Ok(ll) = loglik_slice(&cand, sorted) {
                if ll.is_finite() {
                    out.push((ll, cand));
                }
            }
        }
    }
    // stable: equal likelihoods keep grid order
    out.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    Ok(out)
}

/// Interquartile range, or the full range when more than half the sample is
/// tied.
fn spread<F: Real>(sorted: &[F]) -> Result<F> {
    let iqr = quantile_sorted(sorted, F::lit(0.75)) - quantile_sorted(sorted, F::lit(0.25));
    if iqr > F::zero() {
        return Ok(iqr);
    }
    let range = sorted[sorted.len() - 1] - sorted[0];
    if range > F::zero() {
        Ok(range)
    } else {
        Err(Error::DegenerateData("all observations are identical".into()))
    }
}

struct Fitter<'a, F> {
    t: &'a [F],
    free: Vec<Coordinate>,
    p: Params<F>,
    ll: F,
}

impl<'a, F: Real> Fitter<'a, F> {
    /// Log-likelihood on the standardized data; singular or invalid
    /// parameter points count as `-∞` so they are never accepted.
    fn ll_at(&self, p: &Params<F>) -> F {
        if !(p.sigma > F::zero() && p.c > F::zero() && p.k > F::zero() && p.eps.abs() < F::one()) {
            return F::neg_infinity();
        }
        match loglik_slice(p, self.t) {
            Ok(v) if !v.is_nan() => v,
            _ => F::neg_infinity(),
        }
    }

    fn offer(&mut self, cand: Params<F>) -> bool {
        let ll = self.ll_at(&cand);
        if ll >= self.ll && ll.is_finite() {
            self.p = cand;
            self.ll = ll;
            true
        } else {
            false
        }
    }

    fn update_mu(&mut self, window: usize) {
        let t = self.t;
        let n = t.len();
        let (_, upper) = gap_around(t, self.p.mu);
        let mut gaps: Vec<usize> = Vec::new();
        let lo = upper.saturating_sub(window).max(1);
        let hi = (upper + window).min(n - 1);
        gaps.extend(lo..=hi);
        let mut jump = 2 * window.max(1);
        while jump < n {
            if upper > jump {
                gaps.push(upper - jump);
            }
            if upper + jump < n {
                gaps.push(upper + jump);
            }
            jump *= 2;
        }
        let mut best: Option<(F, usize, F)> = None;
        for &g in &gaps {
            let (a, b) = (t[g - 1], t[g]);
            let mid = (a + b) / F::lit(2.0);
            if !(mid > a && mid < b) {
                continue;
            }
            let ll = self.ll_at(&self.p.with(Coordinate::Mu, mid));
            if best.map_or(true, |(bl, _, _)| ll > bl) {
                best = Some((ll, g, mid));
            }
        }
        let Some((_, g, mid)) = best else { return };
        let cand_mu = if self.p.ck() > F::one() {
            let p_mid = self.p.with(Coordinate::Mu, mid);
            mu_root_between(&p_mid, t, t[g - 1], t[g]).unwrap_or_else(|| {
                let (a, b) = (t[g - 1], t[g]);
                let w = b - a;
                golden_max(
                    |m| self.ll_at(&self.p.with(Coordinate::Mu, m)),
                    a + w * F::lit(1e-9),
                    b - w * F::lit(1e-9),
                    w * F::lit(1e-12),
                    200,
                )
                .0
            })
        } else {
            mid
        };
        self.offer(self.p.with(Coordinate::Mu, cand_mu));
    }

    /// Roots of the score where it crosses from positive to negative on a
    /// grid of the search variable.
    fn scan_roots(&self, which: Coordinate, grid: &[F]) -> Vec<F> {
        let i = which.index();
        let p = self.p;
        let t = self.t;
        let g = |u: F| score_slice(&p.with(which, from_search(which, u)), t).map(|s| s[i]).unwrap_or(F::nan());
        let vals: Vec<F> = grid.iter().map(|&u| g(u)).collect();
        let mut roots = Vec::new();
        for w in 0..grid.len().saturating_sub(1) {
            let (ga, gb) = (vals[w], vals[w + 1]);
            if ga > F::zero() && gb <= F::zero() {
                let tol = F::epsilon() * F::lit(4.0) * (grid[w].abs() + grid[w + 1].abs()).max(F::one());
                if let Ok(r) = brent(g, grid[w], grid[w + 1], root_opts(tol)) {
                    roots.push(from_search(which, r.root));
                }
            }
        }
        roots
    }

    fn update_smooth(&mut self, which: Coordinate, global: bool) {
        let mut cands = Vec::new();
        if global {
            let grid: Vec<F> = match which {
                Coordinate::Eps => {
                    let mut g: Vec<F> = (-19..=19).map(|j| F::lit(j as f64 * 0.05)).collect();
                    g.insert(0, F::lit(-1.0 + EPS_MARGIN));
                    g.push(F::lit(1.0 - EPS_MARGIN));
                    g
                }
                // c from 0.05 to 200
                _ => (0..=48).map(|j| F::lit(0.05f64.ln() + j as f64 * (4000f64.ln() / 48.0))).collect(),
            };
            cands.extend(self.scan_roots(which, &grid));
        }
        match solve_smooth(&self.p, which, self.t) {
            Ok(v) => cands.push(v),
            Err(_) => {
                // likelihood line search in the search variable
                let (lo, hi) = search_bounds::<F>(which);
                let u0 = to_search(which, self.p.get(which));
                let span = F::lit(if which == Coordinate::Eps { 0.1 } else { 0.5 });
                let (a, b) = ((u0 - span).max(lo), (u0 + span).min(hi));
                let p = self.p;
                let (u, _) = golden_max(|u| self.ll_at(&p.with(which, from_search(which, u))), a, b, F::lit(1e-10), 200);
                cands.push(from_search(which, u));
            }
        }
        let mut best: Option<(F, F)> = None;
        for v in cands {
            let ll = self.ll_at(&self.p.with(which, v));
            if best.map_or(true, |(bl, _)| ll > bl) {
                best = Some((ll, v));
            }
        }
        if let Some((_, v)) = best {
            self.offer(self.p.with(which, v));
        }
    }

    fn update_k(&mut self) {
        let k = k_closed_form(&self.p, self.t);
        if k.is_finite() && k > F::zero() {
            self.offer(self.p.with(Coordinate::K, k));
        }
    }

    /// Whether `μ` is treated as a smooth coordinate at the current point.
    fn mu_smooth(&self) -> bool {
        self.p.ck() > F::one()
    }

    fn smooth_coords(&self) -> Vec<Coordinate> {
        self.free.iter().copied().filter(|&c| c != Coordinate::Mu || self.mu_smooth()).collect()
    }

    fn scaled_score_norm(&self) -> F {
        let Ok(g) = score_slice(&self.p, self.t) else { return F::infinity() };
        self.smooth_coords()
            .iter()
            .map(|&c| {
                let v = g[c.index()];
                let v = if matches!(c, Coordinate::Mu | Coordinate::Sigma) { v * self.p.sigma } else { v };
                v * v
            })
            .sum::<F>()
            .sqrt()
    }

    /// Damped Newton step on the smooth coordinates, with a Hessian from
    /// central differences of the analytic score.
    fn newton(&mut self) -> bool {
        let coords = self.smooth_coords();
        let m = coords.len();
        let Ok(g_full) = score_slice(&self.p, self.t) else { return false };
        let gap = gap_around(self.t, self.p.mu);
        let (a, b) = (self.t[gap.0], self.t[gap.1]);
        let steps: Vec<F> = coords
            .iter()
            .map(|&c| match c {
                Coordinate::Mu => (self.p.sigma * F::lit(1e-6)).min((self.p.mu - a).min(b - self.p.mu) * F::lit(0.25)),
                Coordinate::Eps => F::lit(1e-6),
                _ => self.p.get(c) * F::lit(1e-6),
            })
            .collect();
        let mut h = vec![vec![F::zero(); m]; m];
        for (j, &cj) in coords.iter().enumerate() {
            let v = self.p.get(cj);
            let up = score_slice(&self.p.with(cj, v + steps[j]), self.t);
            let dn = score_slice(&self.p.with(cj, v - steps[j]), self.t);
            let (Ok(up), Ok(dn)) = (up, dn) else { return false };
            for (i, &ci) in coords.iter().enumerate() {
                h[i][j] = (up[ci.index()] - dn[ci.index()]) / (steps[j] + steps[j]);
            }
        }
        // solve (-H) δ = g through a Cholesky factor of the symmetrized -H
        let mut neg = vec![vec![F::zero(); m]; m];
        for i in 0..m {
            for j in 0..m {
                neg[i][j] = -(h[i][j] + h[j][i]) / F::lit(2.0);
            }
        }
        let Some(l) = cholesky(&neg) else { return false };
        let rhs: Vec<F> = coords.iter().map(|c| g_full[c.index()]).collect();
        let delta = cholesky_solve(&l, &rhs);
        let mut alpha = F::one();
        for _ in 0..40 {
            let mut cand = self.p;
            for (i, &c) in coords.iter().enumerate() {
                cand = cand.with(c, cand.get(c) + alpha * delta[i]);
            }
            let inside = cand.mu > a && cand.mu < b || !coords.contains(&Coordinate::Mu);
            let valid = cand.eps.abs() < F::lit(1.0 - EPS_MARGIN);
            if inside && valid && self.ll_at(&cand) > self.ll {
                return self.offer(cand);
            }
            alpha = alpha / F::lit(2.0);
        }
        false
    }
}

fn cholesky<F: Real>(a: &[Vec<F>]) -> Option<Vec<Vec<F>>> {
    let m = a.len();
    let mut l = vec![vec![F::zero(); m]; m];
    for i in 0..m {
        for j in 0..=i {
            let mut s = a[i][j];
            for q in 0..j {
                s = s - l[i][q] * l[j][q];
            }
            if i == j {
                if !(s > F::zero()) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

fn cholesky_solve<F: Real>(l: &[Vec<F>], b: &[F]) -> Vec<F> {
    let m = b.len();
    let mut y = vec![F::zero(); m];
    for i in 0..m {
        let mut s = b[i];
        for q in 0..i {
            s = s - l[i][q] * y[q];
        }
        y[i] = s / l[i][i];
    }
    let mut x = vec![F::zero(); m];
    for i in (0..m).rev() {
        let mut s = y[i];
        for q in i + 1..m {
            s = s - l[q][i] * x[q];
        }
        x[i] = s / l[i][i];
    }
    x
}

fn relative_change<F: Real>(a: &Params<F>, b: &Params<F>) -> F {
    let rel = |x: F, y: F| (x - y).abs() / y.abs();
    [
        (a.mu - b.mu).abs() / b.sigma,
        rel(a.sigma, b.sigma),
        rel(a.c, b.c),
        rel(a.k, b.k),
        (a.eps - b.eps).abs(),
    ]
    .into_iter()
    .fold(F::zero(), F::max)
}

/// One coordinate-ascent run in standardized units.
struct Run<F> {
    p: Params<F>,
    ll: F,
    trace: Vec<F>,
    converged: bool,
    cycles: u32,
    score_norm: F,
}

fn ascend<F: Real>(t: &[F], start: Params<F>, free: &[Coordinate], cfg: &FitConfig<F>, max_cycles: u32, scan_first: bool) -> Option<Run<F>> {
    let mut f = Fitter { t, free: free.to_vec(), p: start, ll: F::neg_infinity() };
    f.ll = f.ll_at(&start);
    if !f.ll.is_finite() {
        // starting point sits on an observation; move μ to a gap midpoint
        let (i, j) = gap_around(t, start.mu);
        f.p = start.with(Coordinate::Mu, (t[i] + t[j]) / F::lit(2.0));
        f.ll = f.ll_at(&f.p);
        if !f.ll.is_finite() {
            return None;
        }
    }
    let threshold = cfg.score_tol * F::lit(t.len() as f64);
    let mut run = Run { p: f.p, ll: f.ll, trace: vec![f.ll], converged: false, cycles: 0, score_norm: F::infinity() };
    for cycle in 1..=max_cycles {
        let before = f.p;
        let first = scan_first && cycle == 1;
        f.update_mu(if first { 40 } else { 16 });
        f.update_smooth(Coordinate::Sigma, false);
        if cfg.fixed_c.is_none() {
            f.update_smooth(Coordinate::C, first);
        }
        f.update_k();
        f.update_smooth(Coordinate::Eps, first);
        for _ in 0..3 {
            if !f.newton() {
                break;
            }
        }
        run.trace.push(f.ll);
        run.cycles = cycle;
        run.score_norm = f.scaled_score_norm();
        if relative_change(&f.p, &before) < cfg.param_tol && run.score_norm < threshold {
            run.converged = true;
            break;
        }
    }
    run.p = f.p;
    run.ll = f.ll;
    Some(run)
}

/// Probabilities at which [`split_candidates`] places the location.
const SPLIT_PROBS: [f64; 21] = [
    0.02, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 0.98,
];

/// Starts built around a trial location: `ε` from the fraction of data
/// below it, `σ` from the median of the pooled magnitudes `|x - μ|/(1 ± ε)`.
fn split_candidates<F: Real>(t: &[F]) -> Vec<(F, Params<F>)> {
    let n = t.len();
    let mut out = Vec::new();
    for &prob in &SPLIT_PROBS {
        let i = ((prob * (n - 1) as f64).round() as usize).min(n - 2);
        let (a, b) = (t[i], t[i + 1]);
        let mu = (a + b) / F::lit(2.0);
        if !(mu > a && mu < b) {
            continue;
        }
        let below = F::lit((i + 1) as f64) / F::lit(n as f64);
        let eps = (F::one() - F::lit(2.0) * below).max(F::lit(-0.95)).min(F::lit(0.95));
        let mut u: Vec<F> = t
            .iter()
            .map(|&y| if y > mu { (y - mu) / (F::one() + eps) } else { (mu - y) / (F::one() - eps) })
            .collect();
        u.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
        let med = quantile_sorted(&u, F::lit(0.5));
        for &(c, k) in &INIT_SHAPES {
            let burr = crate::burr3::Burr3Params { c: F::lit(c), k: F::lit(k) };
            let Ok(zm) = burr.quantile(F::lit(0.5)) else { continue };
            let Ok(cand) = Params::new(mu, med / zm, F::lit(c), F::lit(k), eps) else { continue };
            if let Ok(ll) = loglik_slice(&cand, t) {
                if ll.is_finite() {
                    out.push((ll, cand));
                }
            }
        }
    }
    out
}

/// Starting points: the best quantile-matched candidate for each shape and
/// the best split candidate for each trial location.
fn starts<F: Real>(t: &[F]) -> Result<Vec<Params<F>>> {
    let mut out: Vec<Params<F>> = Vec::new();
    let grid = init_candidates(t)?;
    for &(c, k) in &INIT_SHAPES {
        if let Some((_, p)) = grid.iter().find(|(_, p)| p.c == F::lit(c) && p.k == F::lit(k)) {
            out.push(*p);
        }
    }
    let split = split_candidates(t);
    for chunk in split.chunk_by(|a, b| a.1.mu == b.1.mu) {
        let best = chunk.iter().fold(None, |acc: Option<&(F, Params<F>)>, c| match acc {
            Some(b) if b.0 >= c.0 => Some(b),
            _ => Some(c),
        });
        if let Some((_, p)) = best {
            if !out.contains(p) {
                out.push(*p);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::DegenerateData("no starting value has a finite likelihood".into()));
    }
    Ok(out)
}

/// Starts kept after the profile refinement.
const SCREEN_STARTS: usize = 4;

/// Cycles each start gets before all but the best are dropped.
const SCREEN_CYCLES: u32 = 25;

/// Start selection runs on at most this many order statistics.
const SCREEN_POINTS: usize = 2000;

/// `m` (even) order statistics spread evenly over the sample, chosen in
/// mirrored pairs so that negated data yields the negated subset.
fn thinned<F: Real>(t: &[F], m: usize) -> Vec<F> {
    let n = t.len();
    if n <= m {
        return t.to_vec();
    }
    let step = (n - 1) as f64 / (m - 1) as f64;
    let lower: Vec<usize> = (0..m / 2).map(|j| (j as f64 * step).floor() as usize).collect();
    let upper = lower.iter().rev().map(|&i| n - 1 - i);
    lower.iter().copied().chain(upper).map(|i| t[i]).collect()
}

/// Two rounds of `σ, c, k, ε` updates with `μ` held at each start's trial
/// location; returns the starts ordered by the refined likelihood.
fn profile_rank<F: Real>(t: &[F], starts: Vec<Params<F>>, free: &[Coordinate], free_c: bool) -> Vec<Params<F>> {
    let mut ranked: Vec<(F, Params<F>)> = starts
        .into_iter()
        .map(|p| {
            let mut f = Fitter { t, free: free.to_vec(), p, ll: F::neg_infinity() };
            f.ll = f.ll_at(&p);
            for round in 0..2 {
                if round > 0 {
                    f.update_mu(16);
                }
                f.update_smooth(Coordinate::Sigma, false);
                if free_c {
                    f.update_smooth(Coordinate::C, round == 0);
                }
                f.update_k();
                f.update_smooth(Coordinate::Eps, round == 0);
            }
            (f.ll, f.p)
        })
        .collect();
    ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    ranked.into_iter().map(|(_, p)| p).collect()
}

/// Gaps around the current location, each visited with `μ` at the gap
/// midpoint and the other coordinates re-profiled. Adjacent gaps are
/// separate local maxima once the density vanishes at `μ`.
const SWEEP_WINDOW: usize = 24;

fn gap_sweep<F: Real>(t: &[F], from: &Run<F>, free: &[Coordinate], free_c: bool) -> Option<(F, Params<F>)> {
    let n = t.len();
    let (_, upper) = gap_around(t, from.p.mu);
    let lo = upper.saturating_sub(SWEEP_WINDOW).max(1);
    let hi = (upper + SWEEP_WINDOW).min(n - 1);
    let mut best: Option<(F, Params<F>)> = None;
    for g in lo..=hi {
        let (a, b) = (t[g - 1], t[g]);
        let mid = (a + b) / F::lit(2.0);
        if !(mid > a && mid < b) {
            continue;
        }
        let p = from.p.with(Coordinate::Mu, mid);
        let mut f = Fitter { t, free: free.to_vec(), p, ll: F::neg_infinity() };
        f.ll = f.ll_at(&p);
        if !f.ll.is_finite() {
            continue;
        }
        for _ in 0..2 {
            f.update_smooth(Coordinate::Sigma, false);
            if free_c {
                f.update_smooth(Coordinate::C, false);
            }
            f.update_k();
            f.update_smooth(Coordinate::Eps, false);
            if f.mu_smooth() {
                if let Some(m) = mu_root_between(&f.p, t, a, b) {
                    f.offer(f.p.with(Coordinate::Mu, m));
                }
            }
        }
        if best.map_or(true, |(bl, _)| f.ll > bl) {
            best = Some((f.ll, f.p));
        }
    }
    best.filter(|&(ll, _)| ll > from.ll + F::lit(1e-9) * F::lit(n as f64))
}

fn extend_run<F: Real>(run: &mut Run<F>, more: Run<F>) {
    run.trace.extend_from_slice(&more.trace[1..]);
    run.cycles += more.cycles;
    run.p = more.p;
    run.ll = more.ll;
    run.converged = more.converged;
    run.score_norm = more.score_norm;
}

/// Maximum-likelihood fit.
///
/// With [`Init::MomentInit`] the ascent is started from several
/// quantile-matched points and the run ending at the highest likelihood is
/// kept. Returns the best point found even when the cycle limit is reached;
/// check [`FitResult::converged`].
pub fn fit_ml<F: Real>(data: &Dataset<F>, cfg: &FitConfig<F>) -> Result<FitResult<F>> {
    cfg.validate()?;
    let n = data.len();
    if n < MIN_SAMPLE {
        return Err(Error::SmallSample { n, min: MIN_SAMPLE });
    }
    let sorted = data.sorted();
    let center = quantile_sorted(sorted, F::lit(0.5));
    let scale = spread(sorted)?;
    let t: Vec<F> = sorted.iter().map(|&y| (y - center) / scale).collect();

    let thin = thinned(&t, SCREEN_POINTS);
    let mut starts = match cfg.init {
        Init::MomentInit => starts(&thin)?,
        Init::UserInit(p) => vec![Params::new((p.mu - center) / scale, p.sigma / scale, p.c, p.k, p.eps)?],
    };
    if let Some(c) = cfg.fixed_c {
        for s in &mut starts {
            s.c = c;
        }
    }
    let free: Vec<Coordinate> =
        Coordinate::ALL.into_iter().filter(|&c| c != Coordinate::C || cfg.fixed_c.is_none()).collect();

    if starts.len() > SCREEN_STARTS {
        starts = profile_rank(&thin, starts, &free, cfg.fixed_c.is_none());
        starts.truncate(SCREEN_STARTS);
    }
    let screen = cfg.max_cycles.min(SCREEN_CYCLES);
    let mut best: Option<Run<F>> = None;
    for s in starts {
        if let Some(run) = ascend(&thin, s, &free, cfg, screen, true) {
            if best.as_ref().map_or(true, |b| run.ll > b.ll) {
                best = Some(run);
            }
        }
    }
    let mut run = best.ok_or_else(|| Error::DegenerateData("log-likelihood is not finite at any starting value".into()))?;
    if thin.len() < t.len() {
        // screening likelihoods are on the subset; start over on the full data
        run = ascend(&t, run.p, &free, cfg, cfg.max_cycles, false)
            .ok_or_else(|| Error::DegenerateData("log-likelihood is not finite at the screened start".into()))?;
    } else if !run.converged && cfg.max_cycles > screen {
        if let Some(more) = ascend(&t, run.p, &free, cfg, cfg.max_cycles - screen, false) {
            extend_run(&mut run, more);
        }
    }
    // gap-to-gap jumps only matter while the gaps are wide
    let sweeps = if thin.len() < t.len() { 0 } else { 3 };
    for _ in 0..sweeps {
        if run.cycles >= cfg.max_cycles {
            break;
        }
        let Some((_, p)) = gap_sweep(&t, &run, &free, cfg.fixed_c.is_none()) else { break };
        let Some(more) = ascend(&t, p, &free, cfg, cfg.max_cycles - run.cycles, false) else { break };
        if more.ll <= run.ll {
            break;
        }
        extend_run(&mut run, more);
    }

    if run.p.eps.abs() >= F::lit(1.0 - 2.0 * EPS_MARGIN) {
        return Err(Error::DegenerateData(format!(
            "skewness estimate reached the boundary (eps = {}); the data sit almost entirely on one side",
            run.p.eps
        )));
    }
    let mut diagnostics = Vec::new();
    if !(run.p.ck() > F::one()) {
        diagnostics.push(
            "ck <= 1 at the estimate: the likelihood is unbounded at every observation, so mu was restricted to \
             midpoints between adjacent order statistics and left out of the score norm"
                .to_string(),
        );
    }
    if !run.converged {
        diagnostics.push(format!("stopped after {} cycles without meeting the tolerances", run.cycles));
    }

    let n_f = F::lit(n as f64);
    let shift = n_f * scale.ln();
    let trace = run
        .trace
        .iter()
        .enumerate()
        .map(|(i, &ll)| TracePoint { cycle: i as u32, loglik: ll - shift })
        .collect();
    let params = Params::new(center + scale * run.p.mu, scale * run.p.sigma, run.p.c, run.p.k, run.p.eps)?;
    let ll = loglik(&params, data).unwrap_or(F::neg_infinity());
    let free_params = cfg.free_params();
    Ok(FitResult {
        params,
        loglik: ll,
        aic: aic(ll, free_params),
        free_params,
        converged: run.converged,
        cycles: run.cycles,
        score_norm: run.score_norm,
        score_threshold: cfg.score_tol * n_f,
        trace,
        diagnostics,
    })
}
