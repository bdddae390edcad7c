//! Goodness of fit: empirical CDF, Kolmogorov–Smirnov distance with its
//! asymptotic p-value, AIC and a ranked model comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Method tag recorded in reports.
pub const KS_PVALUE_METHOD: &str =
    "asymptotic Kolmogorov series Q(lambda), lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) * D";

/// Printed with every p-value computed against fitted parameters.
pub const KS_CAVEAT: &str =
    "KS p-values use parameters estimated from the same data and are therefore optimistic (too large)";

pub const AIC_FORMULA: &str = "AIC = 2p - 2 loglik";

/// Observed sample with a sorted copy for ECDF queries.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<F> {
    values: Vec<F>,
    sorted: Vec<F>,
    pub label: String,
    /// File path or `synthetic:<seed>`.
    pub source: String,
}

impl<F: Real> Dataset<F> {
    pub fn new(values: Vec<F>, label: impl Into<String>, source: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyData);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("value #{} is {}", i + 1, values[i])));
        }
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        Ok(Self { values, sorted, label: label.into(), source: source.into() })
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn sorted(&self) -> &[F] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same label and source, new values.
    pub fn map(&self, f: impl Fn(F) -> F) -> Result<Self> {
        Self::new(self.values.iter().map(|&v| f(v)).collect(), self.label.clone(), self.source.clone())
    }

    pub fn median(&self) -> F {
        quantile_sorted(&self.sorted, F::lit(0.5))
    }
}

/// Linear-interpolation sample quantile (type 7) of sorted data.
pub fn quantile_sorted<F: Real>(sorted: &[F], prob: F) -> F {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = prob * F::lit((n - 1) as f64);
    let lo = h.floor().to_usize().unwrap_or(0).min(n - 1);
    let hi = (lo + 1).min(n - 1);
    let frac = h - F::lit(lo as f64);
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Fraction of observations `≤ y`.
pub fn ecdf<F: Real>(data: &Dataset<F>, y: F) -> F {
    let count = data.sorted.partition_point(|&v| v <= y);
    F::lit(count as f64) / F::lit(data.len() as f64)
}

/// `D = max_i max(i/n - F(x_(i)), F(x_(i)) - (i-1)/n)`.
pub fn ks_statistic<F: Real>(data: &Dataset<F>, model_cdf: impl Fn(F) -> F) -> F {
    let n = F::lit(data.len() as f64);
    data.sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let fx = model_cdf(x);
            let i = F::lit(i as f64);
            ((i + F::one()) / n - fx).max(fx - i / n)
        })
        .fold(F::zero(), F::max)
}

/// Kolmogorov survival function `Q(λ) = 2 Σ_{j≥1} (-1)^{j-1} e^{-2j²λ²}`.
pub fn kolmogorov_q<F: Real>(lambda: F) -> F {
    let term_tol = F::lit(1e-12);
    if lambda <= F::zero() {
        return F::one();
    }
    let mut sum = F::zero();
    if lambda < F::one() {
        // Jacobi-transformed series, fast for small λ:
        // 1 - Q = (√(2π)/λ) Σ_{j≥1} e^{-(2j-1)²π²/(8λ²)}
        let a = F::PI() * F::PI() / (F::lit(8.0) * lambda * lambda);
        for j in 1..=100 {
            let m = F::lit((2 * j - 1) as f64);
            let t = (-m * m * a).exp();
            sum = sum + t;
            if t < term_tol {
                break;
            }
        }
        let q = F::one() - (F::lit(2.0) * F::PI()).sqrt() / lambda * sum;
        return q.max(F::zero()).min(F::one());
    }
    for j in 1..=100 {
        let jf = F::lit(j as f64);
        let t = (F::lit(-2.0) * jf * jf * lambda * lambda).exp();
        sum = if j % 2 == 1 { sum + t } else { sum - t };
        if t < term_tol {
            break;
        }
    }
    (F::lit(2.0) * sum).max(F::zero()).min(F::one())
}

pub fn ks_pvalue<F: Real>(d: F, n: usize) -> F {
    let sn = F::lit(n as f64).sqrt();
    let lambda = (sn + F::lit(0.12) + F::lit(0.11) / sn) * d;
    kolmogorov_q(lambda)
}

pub fn aic<F: Real>(loglik: F, free_params: u32) -> F {
    F::lit(2.0 * free_params as f64) - F::lit(2.0) * loglik
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport<F> {
    pub ks_stat: F,
    pub ks_pvalue: F,
    pub aic: F,
    pub n: usize,
    pub model_label: String,
}

impl<F: Real> GofReport<F> {
    pub fn new(data: &Dataset<F>, label: &str, cdf: impl Fn(F) -> F, loglik: F, free_params: u32) -> Self {
        let d = ks_statistic(data, cdf);
        Self {
            ks_stat: d,
            ks_pvalue: ks_pvalue(d, data.len()),
            aic: aic(loglik, free_params),
            n: data.len(),
            model_label: label.to_string(),
        }
    }
}

/// A fitted competitor as seen by [`compare_models`].
pub struct ModelFit<'a, F> {
    pub label: String,
    pub cdf: Box<dyn Fn(F) -> F + 'a>,
    pub loglik: F,
    pub free_params: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedModel<F> {
    pub rank: usize,
    pub report: GofReport<F>,
}

/// Reports ranked by descending p-value, ties by ascending AIC; otherwise
/// the input order is kept.
pub fn compare_models<F: Real>(data: &Dataset<F>, fits: &[ModelFit<'_, F>]) -> Result<Vec<RankedModel<F>>> {
    if fits.is_empty() {
        return Err(Error::InvalidParams("compare_models needs at least one fit".into()));
    }
    let mut reports: Vec<GofReport<F>> = fits
        .iter()
        .map(|m| GofReport::new(data, &m.label, &m.cdf, m.loglik, m.free_params))
        .collect();
    reports.sort_by(|a, b| {
        b.ks_pvalue
            .partial_cmp(&a.ks_pvalue)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.aic.partial_cmp(&b.aic).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(reports.into_iter().enumerate().map(|(i, report)| RankedModel { rank: i + 1, report }).collect())
}
