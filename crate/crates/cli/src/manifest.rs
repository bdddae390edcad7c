//! Run metadata embedded in every output.

use std::time::{SystemTime, UNIX_EPOCH};

use esb3::gof::{AIC_FORMULA, KS_CAVEAT, KS_PVALUE_METHOD};
use esb3::rng::RNG_ALGORITHM;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: &str = "1.0.0";
pub const TOOL_VERSION: &str = concat!("esb3 ", env!("CARGO_PKG_VERSION"));

/// Conventions that affect the meaning of reported numbers.
pub const CONVENTIONS: [&str; 6] = [
    "skewness and kurtosis: E[X^3]/E[X^2]^1.5 and E[X^4]/E[X^2]^2 about the location, X standardized",
    "psi_theta = d ln f / d theta, i.e. minus the derivative of rho = -ln f",
    "Renyi entropy integrals use Gamma(alpha(1+1/c) - 1/c) * Gamma(alpha k - (alpha-1)/c)",
    "score tolerance is per observation: convergence needs score_norm < score_tol * n",
    KS_PVALUE_METHOD,
    AIC_FORMULA,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timestamps {
    pub started_unix: f64,
    pub finished_unix: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: String,
    pub command: String,
    /// Parameters or configuration echo.
    pub params: serde_json::Value,
    pub seed: Option<u64>,
    pub rng_algorithm: Option<String>,
    pub tool_version: String,
    /// Only recorded on request, so that outputs are byte-identical by default.
    pub timestamps: Option<Timestamps>,
    pub decisions: Vec<String>,
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

impl RunManifest {
    pub fn new(command: &str, params: serde_json::Value, seed: Option<u64>, record_time: bool) -> Self {
        let mut decisions: Vec<String> = CONVENTIONS.iter().map(|s| s.to_string()).collect();
        if command == "fit" || command == "gof" {
            decisions.push(KS_CAVEAT.to_string());
        }
        Self {
            schema_version: SCHEMA_VERSION.into(),
            command: command.into(),
            params,
            seed,
            rng_algorithm: seed.map(|_| RNG_ALGORITHM.to_string()),
            tool_version: TOOL_VERSION.into(),
            timestamps: record_time.then(|| Timestamps { started_unix: now(), finished_unix: f64::NAN }),
            decisions,
        }
    }

    pub fn finish(&mut self) {
        if let Some(t) = &mut self.timestamps {
            t.finished_unix = now();
        }
    }
}
