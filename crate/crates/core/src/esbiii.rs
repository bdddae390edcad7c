//! The epsilon-skew Burr III distribution on the real line.
//!
//! A standard variate is `X = Z U` with `Z ~ BurrIII(c, k)` and an
//! independent two-point `U` taking `1 + ε` with probability `(1 + ε)/2` and
//! `-(1 - ε)` otherwise. The location-scale member is `Y = μ + σ X`.
//!
//! Writing `s = sign(x)` (with `sign(0) = +1`) and `z = s x / (1 + s ε)`,
//! the standard density is `f(x) = g(z) / 2` where `g` is the Burr III
//! density, and
//!
//! ```text
//! F(x) = (1-ε)/2 + (1+ε)/2 · G(x/(1+ε))          x ≥ 0
//! F(x) = (1-ε)/2 · (1 - G(-x/(1-ε)))             x < 0
//! ```

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::burr3::Burr3Params;
use crate::error::{domain, Error, Result};
use crate::rng::{open01, seeded};
use crate::scalar::{logistic, softplus, Real};
use crate::special::{ln_beta, ln_gamma};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params<F> {
    pub mu: F,
    pub sigma: F,
    pub c: F,
    pub k: F,
    pub eps: F,
}

/// Value of the density at `y = μ`, where the formula itself is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LocationDensity<F> {
    /// `ck > 1`: the density vanishes at the location.
    Zero,
    /// `ck = 1`: finite two-sided limit `ck / (2σ)`.
    Finite(F),
    /// `ck < 1`: the density diverges; [`Params::pdf`] returns `F::max_value()`.
    Divergent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeStructure {
    SkewUnimodal,
    SkewBimodal,
}

/// Which moment ratios are reported as skewness and kurtosis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentConvention {
    /// `E[X³]/E[X²]^{3/2}` and `E[X⁴]/E[X²]²` of the standardized variate.
    /// This is the convention of the published skewness/kurtosis table.
    NonCentralStandardized,
    /// Standardized central third and fourth moments.
    Central,
    /// Central, with 3 subtracted from the kurtosis.
    CentralExcess,
}

/// One of the five parameters, in the order `(μ, σ, c, k, ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coordinate {
    Mu,
    Sigma,
    C,
    K,
    Eps,
}

impl Coordinate {
    pub const ALL: [Coordinate; 5] = [Coordinate::Mu, Coordinate::Sigma, Coordinate::C, Coordinate::K, Coordinate::Eps];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Coordinate::Mu => "mu",
            Coordinate::Sigma => "sigma",
            Coordinate::C => "c",
            Coordinate::K => "k",
            Coordinate::Eps => "eps",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeStats<F> {
    pub mean: F,
    pub variance: F,
    pub skewness: F,
    pub kurtosis: F,
    pub convention: MomentConvention,
}

impl<F: Real> Params<F> {
    pub fn new(mu: F, sigma: F, c: F, k: F, eps: F) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidParams(format!("mu = {} (must be finite)", mu)));
        }
        if !(sigma > F::zero()) || !sigma.is_finite() {
            return Err(Error::InvalidParams(format!("sigma = {} (need sigma > 0)", sigma)));
        }
        Burr3Params::new(c, k)?;
        if !(eps > -F::one() && eps < F::one()) {
            return Err(Error::InvalidParams(format!("eps = {} (need -1 < eps < 1)", eps)));
        }
        Ok(Self { mu, sigma, c, k, eps })
    }

    /// Standard member (`μ = 0`, `σ = 1`).
    pub fn standard(c: F, k: F, eps: F) -> Result<Self> {
        Self::new(F::zero(), F::one(), c, k, eps)
    }

    pub fn burr(&self) -> Burr3Params<F> {
        Burr3Params { c: self.c, k: self.k }
    }

    pub fn ck(&self) -> F {
        self.c * self.k
    }

    pub fn with_location_scale(&self, mu: F, sigma: F) -> Result<Self> {
        Self::new(mu, sigma, self.c, self.k, self.eps)
    }

    /// `(1 + s ε)` for the half-line containing `x`.
    #[inline]
    pub(crate) fn side_scale(&self, x: F) -> F {
        if x >= F::zero() {
            F::one() + self.eps
        } else {
            F::one() - self.eps
        }
    }

    pub fn density_at_location(&self) -> LocationDensity<F> {
        let ck = self.ck();
        if ck > F::one() {
            LocationDensity::Zero
        } else if ck < F::one() {
            LocationDensity::Divergent
        } else {
            LocationDensity::Finite(ck / (F::lit(2.0) * self.sigma))
        }
    }

    /// `ln f(y)`. At `y = μ` this is the regime limit: `-∞`, `ln(ck/2σ)`
    /// or `+∞`.
    pub fn ln_pdf(&self, y: F) -> F {
        let x = (y - self.mu) / self.sigma;
        if x == F::zero() {
            return match self.density_at_location() {
                LocationDensity::Zero => F::neg_infinity(),
                LocationDensity::Finite(v) => v.ln(),
                LocationDensity::Divergent => F::infinity(),
            };
        }
        let ln_z = x.abs().ln() - self.side_scale(x).ln();
        self.burr().ln_pdf_log(ln_z) - F::LN_2() - self.sigma.ln()
    }

    /// Gradient of `ln f(y)` with respect to `(μ, σ, c, k, ε)`.
    ///
    /// With `w = z^{-c}`, `q = w/(1+w)` and `A = c(k+1)q - (c+1)`:
    /// `(-A/(σx), -(1+A)/σ, 1/c - ln z (1 - (k+1)q), 1/k - ln(1+w), -A s/(1+sε))`.
    pub fn ln_pdf_gradient(&self, y: F) -> Result<[F; 5]> {
        let x = (y - self.mu) / self.sigma;
        if x == F::zero() {
            return Err(domain("ln_pdf_gradient", "observation at the location parameter"));
        }
        let (c, k) = (self.c, self.k);
        let side = self.side_scale(x);
        let ln_z = x.abs().ln() - side.ln();
        let ln_w = -c * ln_z;
        let q = logistic(ln_w);
        let a = c * (k + F::one()) * q - (c + F::one());
        let s = if x >= F::zero() { F::one() } else { -F::one() };
        Ok([
            -a / (self.sigma * x),
            -(F::one() + a) / self.sigma,
            F::one() / c - ln_z * (F::one() - (k + F::one()) * q),
            F::one() / k - softplus(ln_w),
            -a * s / side,
        ])
    }

    pub fn get(&self, which: Coordinate) -> F {
        match which {
            Coordinate::Mu => self.mu,
            Coordinate::Sigma => self.sigma,
            Coordinate::C => self.c,
            Coordinate::K => self.k,
            Coordinate::Eps => self.eps,
        }
    }

    /// Copy with one coordinate replaced; not re-validated.
    pub fn with(&self, which: Coordinate, v: F) -> Self {
        let mut out = *self;
        match which {
            Coordinate::Mu => out.mu = v,
            Coordinate::Sigma => out.sigma = v,
            Coordinate::C => out.c = v,
            Coordinate::K => out.k = v,
            Coordinate::Eps => out.eps = v,
        }
        out
    }

    pub fn to_array(&self) -> [F; 5] {
        [self.mu, self.sigma, self.c, self.k, self.eps]
    }

    pub fn from_array(v: [F; 5]) -> Result<Self> {
        Self::new(v[0], v[1], v[2], v[3], v[4])
    }

    /// Density at `y`. At `y = μ` returns the limit from
    /// [`Params::density_at_location`], saturating to `F::max_value()` when
    /// it diverges.
    pub fn pdf(&self, y: F) -> F {
        let v = self.ln_pdf(y).exp();
        if v.is_infinite() {
            F::max_value()
        } else {
            v
        }
    }

    pub fn cdf(&self, y: F) -> F {
        if y == F::infinity() {
            return F::one();
        }
        if y == F::neg_infinity() {
            return F::zero();
        }
        let x = (y - self.mu) / self.sigma;
        let two = F::lit(2.0);
        let lower = (F::one() - self.eps) / two;
        if x == F::zero() {
            return lower;
        }
        let b = self.burr();
        let ln_z = x.abs().ln() - self.side_scale(x).ln();
        if x > F::zero() {
            lower + (F::one() + self.eps) / two * b.ln_cdf_log(ln_z).exp()
        } else {
            lower * b.ln_sf_log(ln_z).exp()
        }
    }

    /// `ln(1 - F(y))`, accurate far into the right tail.
    pub fn ln_sf(&self, y: F) -> F {
        let x = (y - self.mu) / self.sigma;
        let two = F::lit(2.0);
        if x > F::zero() {
            let ln_z = x.ln() - (F::one() + self.eps).ln();
            ((F::one() + self.eps) / two).ln() + self.burr().ln_sf_log(ln_z)
        } else {
            (-self.cdf(y)).ln_1p()
        }
    }

    pub fn sf(&self, y: F) -> F {
        self.ln_sf(y).exp()
    }

    /// Inverse CDF.
    pub fn quantile(&self, prob: F) -> Result<F> {
        if !(prob > F::zero() && prob < F::one()) {
            return Err(domain("quantile", format!("prob = {} (need 0 < prob < 1)", prob)));
        }
        let two = F::lit(2.0);
        let (one_m, one_p) = (F::one() - self.eps, F::one() + self.eps);
        let b = self.burr();
        let x = if prob >= one_m / two {
            // G = 1 - 2(1 - prob)/(1 + ε)
            let ln_g = (-two * (F::one() - prob) / one_p).ln_1p();
            one_p * b.quantile_from_ln_cdf(ln_g)
        } else {
            // G = 1 - 2 prob/(1 - ε)
            let ln_g = (-two * prob / one_m).ln_1p();
            -one_m * b.quantile_from_ln_cdf(ln_g)
        };
        Ok(self.mu + self.sigma * x)
    }

    /// `n` draws of `μ + σ Z U`, reproducible for a fixed seed.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<F> {
        let mut rng = seeded(seed);
        self.sample_with(&mut rng, n)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<F> {
        let b = self.burr();
        let two = F::lit(2.0);
        let p_pos = (F::one() + self.eps) / two;
        (0..n)
            .map(|_| {
                let u: F = open01(rng);
                let z = b.quantile_from_ln_cdf(u.ln());
                let v: F = open01(rng);
                let scale = if v < p_pos { F::one() + self.eps } else { -(F::one() - self.eps) };
                self.mu + self.sigma * z * scale
            })
            .collect()
    }

    /// `E[X^r]` of the standardized variate `X = (Y - μ)/σ`:
    /// `(k/2) B(1 - r/c, r/c + k) {(1+ε)^{r+1} + (-1)^r (1-ε)^{r+1}}`.
    pub fn raw_moment(&self, r: u32) -> Result<F> {
        if r == 0 {
            return Ok(F::one());
        }
        let rf = F::lit(r as f64);
        if !(self.c > rf) {
            return Err(Error::MomentDoesNotExist { order: r, c: self.c.as_f64() });
        }
        let b = ln_beta(F::one() - rf / self.c, rf / self.c + self.k)?.exp();
        let sign = if r % 2 == 0 { F::one() } else { -F::one() };
        let bracket = (F::one() + self.eps).powi(r as i32 + 1) + sign * (F::one() - self.eps).powi(r as i32 + 1);
        Ok(self.k / F::lit(2.0) * b * bracket)
    }

    /// `μ + σ (k/2) B(1 - 1/c, 1/c + k) 4ε`.
    pub fn mean(&self) -> Result<F> {
        Ok(self.mu + self.sigma * self.raw_moment(1)?)
    }

    /// `σ² [(k/2) B(1-2/c, 2/c+k)(2 + 6ε²) - k² B(1-1/c, 1/c+k)² 4ε²]`.
    pub fn variance(&self) -> Result<F> {
        let m2 = self.raw_moment(2)?;
        let m1 = self.raw_moment(1)?;
        Ok(self.sigma * self.sigma * (m2 - m1 * m1))
    }

    /// Skewness and kurtosis in the convention of the published table.
    pub fn shape_stats(&self) -> Result<ShapeStats<F>> {
        self.shape_stats_with(MomentConvention::NonCentralStandardized)
    }

    pub fn shape_stats_with(&self, convention: MomentConvention) -> Result<ShapeStats<F>> {
        let m = [
            self.raw_moment(1)?,
            self.raw_moment(2)?,
            self.raw_moment(3)?,
            self.raw_moment(4)?,
        ];
        let (m1, m2, m3, m4) = (m[0], m[1], m[2], m[3]);
        let var_x = m2 - m1 * m1;
        let (three, four, six) = (F::lit(3.0), F::lit(4.0), F::lit(6.0));
        let (skewness, kurtosis) = match convention {
            MomentConvention::NonCentralStandardized => (m3 / m2.powf(F::lit(1.5)), m4 / (m2 * m2)),
            MomentConvention::Central | MomentConvention::CentralExcess => {
                let c3 = m3 - three * m1 * m2 + F::lit(2.0) * m1.powi(3);
                let c4 = m4 - four * m1 * m3 + six * m1 * m1 * m2 - three * m1.powi(4);
                let kurt = c4 / (var_x * var_x);
                let kurt = if convention == MomentConvention::CentralExcess { kurt - three } else { kurt };
                (c3 / var_x.powf(F::lit(1.5)), kurt)
            }
        };
        Ok(ShapeStats {
            mean: self.mu + self.sigma * m1,
            variance: self.sigma * self.sigma * var_x,
            skewness,
            kurtosis,
            convention,
        })
    }

    /// Largest admissible truncation for [`Params::cf_partial_sum`].
    pub fn max_cf_terms(&self) -> u32 {
        let fl = self.c.floor().as_f64();
        if fl < 1.0 {
            0
        } else {
            (fl as u32).saturating_sub(1)
        }
    }

    /// Characteristic function truncated after the `terms`-th power of `t`:
    /// `e^{itμ} Σ_{r=0}^{terms} (itσ)^r / r! · E[X^r]`.
    pub fn cf_partial_sum(&self, t: F, terms: u32) -> Result<Complex<F>> {
        let max = self.max_cf_terms();
        if terms > max {
            return Err(domain(
                "cf_partial_sum",
                format!("terms = {} exceeds floor(c) - 1 = {} for c = {}", terms, max, self.c),
            ));
        }
        let mut re = F::zero();
        let mut im = F::zero();
        let ts = t * self.sigma;
        let mut coef = F::one(); // (tσ)^r / r!
        for r in 0..=terms {
            if r > 0 {
                coef = coef * ts / F::lit(r as f64);
            }
            let term = coef * self.raw_moment(r)?;
            // i^r cycles through 1, i, -1, -i
            match r % 4 {
                0 => re = re + term,
                1 => im = im + term,
                2 => re = re - term,
                _ => im = im - term,
            }
        }
        let phase = Complex::new(F::zero(), t * self.mu).exp();
        Ok(phase * Complex::new(re, im))
    }

    /// The two halves of `∫ f^α` for the standard variate: `(I₁, I₂)` from
    /// the negative and positive half-lines.
    ///
    /// Each half is `(1 ∓ ε)(ck/2)^α Γ(a)Γ(b) / (c Γ(α(k+1)))` with
    /// `a = α(1 + 1/c) - 1/c` and `b = αk - (α - 1)/c`.
    pub fn renyi_components(&self, alpha: F) -> Result<(F, F)> {
        if !(alpha > F::zero()) || alpha == F::one() {
            return Err(domain("renyi_entropy", format!("alpha = {} (need alpha > 0, alpha != 1)", alpha)));
        }
        let (c, k) = (self.c, self.k);
        let a = alpha * (F::one() + F::one() / c) - F::one() / c;
        let b = alpha * k - (alpha - F::one()) / c;
        if !(a > F::zero()) || !(b > F::zero()) {
            return Err(domain(
                "renyi_entropy",
                format!("integral of f^alpha diverges for alpha = {} (gamma arguments {}, {})", alpha, a, b),
            ));
        }
        let ln_j = ln_gamma(a)? + ln_gamma(b)? - c.ln() - ln_gamma(alpha * (k + F::one()))?;
        let ln_common = alpha * (c * k / F::lit(2.0)).ln() + ln_j;
        let common = ln_common.exp();
        Ok(((F::one() - self.eps) * common, (F::one() + self.eps) * common))
    }

    /// Rényi entropy `ln(∫ f^α) / (1 - α)` of `Y`; equals the standard
    /// variate's entropy plus `ln σ`.
    pub fn renyi_entropy(&self, alpha: F) -> Result<F> {
        let (i1, i2) = self.renyi_components(alpha)?;
        Ok((i1 + i2).ln() / (F::one() - alpha) + self.sigma.ln())
    }

    /// Bimodal with equal-height peaks when `ck > 1`, unimodal otherwise.
    /// The threshold is sharp at `ck = 1`.
    pub fn mode_structure(&self) -> ModeStructure {
        if self.ck() > F::one() {
            ModeStructure::SkewBimodal
        } else {
            ModeStructure::SkewUnimodal
        }
    }

    /// Locations of the density maxima (`[μ]` in the unimodal case).
    pub fn modes(&self) -> Vec<F> {
        match self.burr().mode() {
            None => vec![self.mu],
            Some(zm) => vec![
                self.mu - self.sigma * (F::one() - self.eps) * zm,
                self.mu + self.sigma * (F::one() + self.eps) * zm,
            ],
        }
    }
}
