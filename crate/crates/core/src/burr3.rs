//! Burr III distribution on the positive half-line.
//!
//! `G(z) = (1 + z^{-c})^{-k}`, `g(z) = c k z^{-(c+1)} (1 + z^{-c})^{-(k+1)}`.
//! Powers of `z` are handled as `exp(-c ln z)` so large `c` does not overflow.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng::{open01, seeded};
use crate::scalar::{softplus, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShapeClass {
    LShaped,
    Unimodal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Burr3Params<F> {
    pub c: F,
    pub k: F,
}

impl<F: Real> Burr3Params<F> {
    pub fn new(c: F, k: F) -> Result<Self> {
        if !(c > F::zero()) || !c.is_finite() {
            return Err(Error::InvalidParams(format!("c = {} (need c > 0)", c)));
        }
        if !(k > F::zero()) || !k.is_finite() {
            return Err(Error::InvalidParams(format!("k = {} (need k > 0)", k)));
        }
        Ok(Self { c, k })
    }

    /// `ln g(z)` for `z > 0`.
    pub fn ln_pdf(&self, z: F) -> Result<F> {
        if !(z > F::zero()) {
            return Err(domain("burr3_pdf", format!("z = {} (need z > 0)", z)));
        }
        if z.is_infinite() {
            return Ok(F::neg_infinity());
        }
        Ok(self.ln_pdf_log(z.ln()))
    }

    /// `ln g` as a function of `ln z`.
    pub(crate) fn ln_pdf_log(&self, ln_z: F) -> F {
        let (c, k) = (self.c, self.k);
        (c * k).ln() - (c + F::one()) * ln_z - (k + F::one()) * softplus(-c * ln_z)
    }

    pub fn pdf(&self, z: F) -> Result<F> {
        self.ln_pdf(z).map(F::exp)
    }

    pub fn cdf(&self, z: F) -> Result<F> {
        if !(z > F::zero()) {
            return Err(domain("burr3_cdf", format!("z = {} (need z > 0)", z)));
        }
        if z.is_infinite() {
            return Ok(F::one());
        }
        Ok(self.ln_cdf_log(z.ln()).exp())
    }

    /// `ln G` as a function of `ln z`.
    pub(crate) fn ln_cdf_log(&self, ln_z: F) -> F {
        -self.k * softplus(-self.c * ln_z)
    }

    /// `ln(1 - G)` as a function of `ln z`, accurate deep in the right tail.
    pub(crate) fn ln_sf_log(&self, ln_z: F) -> F {
        let t = -self.c * ln_z;
        if t < F::lit(-30.0) {
            // 1 - G = k e^t (1 - (k+1) e^t / 2 + ...)
            let e = t.exp();
            self.k.ln() + t + (-(self.k + F::one()) * F::lit(0.5) * e).ln_1p()
        } else {
            (-(-self.k * softplus(t)).exp_m1()).ln()
        }
    }

    /// Survival function `1 - G(z)`.
    pub fn sf(&self, z: F) -> Result<F> {
        if !(z > F::zero()) {
            return Err(domain("burr3_sf", format!("z = {} (need z > 0)", z)));
        }
        if z.is_infinite() {
            return Ok(F::zero());
        }
        Ok(self.ln_sf_log(z.ln()).exp())
    }

    /// `G^{-1}(u) = (u^{-1/k} - 1)^{-1/c}`.
    pub fn quantile(&self, u: F) -> Result<F> {
        if !(u > F::zero() && u < F::one()) {
            return Err(domain("burr3_quantile", format!("u = {} (need 0 < u < 1)", u)));
        }
        Ok(self.quantile_from_ln_cdf(u.ln()))
    }

    /// Quantile given `ln u`, so callers holding `ln(1 - q)` via `ln_1p`
    /// keep full precision near `u = 1`.
    pub(crate) fn quantile_from_ln_cdf(&self, ln_u: F) -> F {
        let w = (-ln_u / self.k).exp_m1();
        (-w.ln() / self.c).exp()
    }

    pub fn sample(&self, n: usize, seed: u64) -> Vec<F> {
        let mut rng = seeded(seed);
        self.sample_with(&mut rng, n)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<F> {
        (0..n)
            .map(|_| {
                let u: F = open01(rng);
                self.quantile_from_ln_cdf(u.ln())
            })
            .collect()
    }

    /// L-shaped when `ck <= 1`, unimodal otherwise.
    pub fn shape_class(&self) -> ShapeClass {
        if self.c * self.k <= F::one() {
            ShapeClass::LShaped
        } else {
            ShapeClass::Unimodal
        }
    }

    /// Interior mode `((ck - 1)/(c + 1))^{1/c}` when unimodal.
    pub fn mode(&self) -> Option<F> {
        match self.shape_class() {
            ShapeClass::LShaped => None,
            ShapeClass::Unimodal => {
                let (c, k) = (self.c, self.k);
                Some(((c * k - F::one()) / (c + F::one())).powf(F::one() / c))
            }
        }
    }
}
