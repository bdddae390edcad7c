//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if
//! any criterion fails.

use std::fs;
use std::process::Command;
use std::time::Instant;

use esb3::esbiii::{Coordinate, MomentConvention, Params};
use esb3::fit::{fit_ml, loglik, score, FitConfig};
use esb3::gof::{ks_pvalue, ks_statistic, Dataset};
use esb3::rng::{open01, seeded, SeededRng};
use esb3::robust::{heavy_tail_grid_start, psi, psi_limits, redescend_point, tail_index_estimate, Limit, PROBE_X};
use esb3::special::{finite_diff5, integrate};
use esb3::Params64;
use serde_json::Value;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn p(mu: f64, sigma: f64, c: f64, k: f64, eps: f64) -> Params64 {
    Params::new(mu, sigma, c, k, eps).unwrap()
}

/// `∫ h(x) dx` over the real line for a standardized member, split at 0 and
/// integrated in `t = ln|x|` on each side. `ln_h(x)` is the log integrand
/// and `sign(x)` its sign.
fn line_integral(ln_h: impl Fn(f64) -> f64, sign: impl Fn(f64) -> f64) -> f64 {
    let cuts = [-700.0, -100.0, -30.0, -10.0, 0.0, 10.0, 30.0, 100.0, 700.0];
    [1.0, -1.0]
        .into_iter()
        .map(|side: f64| {
            let g = |t: f64| {
                let x = side * t.exp();
                sign(x) * (ln_h(x) + t).exp()
            };
            cuts.windows(2).map(|w| integrate(g, w[0], w[1], 1e-12).unwrap().value).sum::<f64>()
        })
        .sum()
}

/// Points drawn uniformly from boxes, seeded.
fn uniform(rng: &mut SeededRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * open01::<f64, _>(rng)
}

const TABLE: [(f64, f64, [f64; 5], [f64; 5]); 5] = [
    (20.0, 0.20, [0.0000, 0.7453, 1.0945, 1.1553, 1.1167], [1.1600, 1.3021, 1.4448, 1.4071, 1.2854]),
    (14.0, 0.07, [0.0000, 0.9398, 1.3801, 1.4568, 1.4082], [1.9481, 2.1866, 2.4262, 2.3631, 2.1587]),
    (10.0, 0.10, [0.0000, 0.9591, 1.4084, 1.4866, 1.4370], [2.0701, 2.3236, 2.5782, 2.5111, 2.2939]),
    (7.0, 1.0 / 9.0, [0.0000, 1.0904, 1.6013, 1.6902, 1.6338], [2.8707, 3.2222, 3.5752, 3.4822, 3.1809]),
    (5.0, 0.20, [0.0000, 1.1760, 1.7271, 1.8230, 1.7622], [4.2853, 4.8100, 5.3371, 5.1982, 4.7485]),
];

fn table_reproduction() -> Outcome {
    let mut worst: f64 = 0.0;
    for (c, k, skew, kurt) in TABLE {
        for (j, eps) in [0.0, 0.2, 0.4, 0.6, 0.8].into_iter().enumerate() {
            let s = p(0.0, 1.0, c, k, eps).shape_stats().map_err(|e| e.to_string())?;
            worst = worst.max((s.skewness - skew[j]).abs()).max((s.kurtosis - kurt[j]).abs());
        }
    }
    // the convention itself, from moments computed by quadrature
    let d = p(0.0, 1.0, 20.0, 0.2, 0.4);
    let m = |r: i32| {
        line_integral(|x| r as f64 * x.abs().ln() + d.ln_pdf(x), |x| if r % 2 == 1 && x < 0.0 { -1.0 } else { 1.0 })
    };
    let (m2, m3, m4) = (m(2), m(3), m(4));
    let quad_skew = m3 / m2.powf(1.5);
    let quad_kurt = m4 / (m2 * m2);
    let conv = (quad_skew - 1.0945).abs().max((quad_kurt - 1.4448).abs());
    let central = d.shape_stats_with(MomentConvention::Central).map_err(|e| e.to_string())?;
    let central_off = (central.kurtosis - 1.4448).abs();
    check(
        worst < 2e-3 && conv < 2e-3 && central_off > 2e-3,
        format!(
            "25 cells, max abs deviation {worst:.2e}; quadrature fixes the convention \
             (non-central standardized off by {conv:.1e}, central kurtosis off by {central_off:.2})"
        ),
    )
}

fn normalization() -> Outcome {
    let mut worst: f64 = 0.0;
    for c in [0.8, 2.0, 5.0, 20.0] {
        for k in [0.07, 0.2, 1.0, 3.0] {
            for eps in [-0.8, 0.0, 0.5] {
                let d = p(0.0, 1.0, c, k, eps);
                let total = line_integral(|x| d.ln_pdf(x), |_| 1.0);
                worst = worst.max((total - 1.0).abs());
            }
        }
    }
    check(worst < 1e-8, format!("48 grid points, max |integral - 1| = {worst:.2e}"))
}

const MOMENT_POINTS: [(f64, f64, f64); 10] = [
    (4.5, 0.2, 0.0),
    (5.0, 0.2, 0.4),
    (6.0, 1.0, -0.3),
    (7.0, 1.0 / 9.0, 0.8),
    (8.0, 3.0, 0.5),
    (10.0, 0.1, -0.6),
    (12.0, 0.5, 0.2),
    (14.0, 0.07, 0.6),
    (20.0, 0.2, -0.8),
    (30.0, 2.0, 0.1),
];

fn moments() -> Outcome {
    let mut worst: f64 = 0.0;
    for (c, k, eps) in MOMENT_POINTS {
        let d = p(0.0, 1.0, c, k, eps);
        for r in 1..=4u32 {
            let closed = d.raw_moment(r).map_err(|e| e.to_string())?;
            let quad = line_integral(
                |x| r as f64 * x.abs().ln() + d.ln_pdf(x),
                |x| if r % 2 == 1 && x < 0.0 { -1.0 } else { 1.0 },
            );
            worst = worst.max((closed - quad).abs() / closed.abs().max(1.0));
        }
    }
    check(worst < 1e-8, format!("10 points x r = 1..4, max relative gap {worst:.2e}"))
}

fn round_trips() -> Outcome {
    let points = [
        p(0.0, 1.0, 5.0, 0.2, 0.4),
        p(-2.0, 0.5, 20.0, 0.2, 0.5),
        p(3.0, 2.0, 0.8, 3.0, -0.5),
        p(0.0, 1.0, 2.0, 1.0, 0.0),
        p(1.0, 0.1, 10.0, 0.1, 0.8),
        p(-0.0061, 0.077, 2.3826, 0.7786, 0.0533),
        p(0.0, 3.0, 1.0, 0.3, 0.2),
        p(5.0, 1.0, 14.0, 0.07, -0.9),
        p(0.0, 1.0, 0.5, 0.07, 0.0),
        p(0.0, 1.0, 40.0, 5.0, 0.95),
    ];
    let mut worst: f64 = 0.0;
    for d in &points {
        for i in 1..=999 {
            let u = i as f64 / 1000.0;
            let y = d.quantile(u).map_err(|e| e.to_string())?;
            worst = worst.max((d.cdf(y) - u).abs());
        }
    }
    check(worst < 1e-9, format!("10 points x 999 probabilities, max |cdf(quantile(u)) - u| = {worst:.2e}"))
}

fn sampling_law() -> Outcome {
    let d = p(0.0, 1.0, 5.0, 0.2, 0.4);
    let n = 100_000;
    let data = Dataset::new(d.sample(n, 20_240_601), "draws", "synthetic:20240601").unwrap();
    let pv = ks_pvalue(ks_statistic(&data, |y| d.cdf(y)), n);
    let nf = n as f64;
    let xs = data.values();
    let mean = xs.iter().sum::<f64>() / nf;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let m: Vec<f64> = (1..=4).map(|r| d.raw_moment(r).unwrap()).collect();
    let (m1, v) = (d.mean().unwrap(), d.variance().unwrap());
    let mu4 = m[3] - 4.0 * m1 * m[2] + 6.0 * m1 * m1 * m[1] - 3.0 * m1.powi(4);
    let z_mean = (mean - m1) / (v / nf).sqrt();
    let z_var = (var - v) / ((mu4 - v * v) / nf).sqrt();
    check(
        pv > 0.01 && z_mean.abs() < 4.0 && z_var.abs() < 4.0,
        format!("KS p = {pv:.3}, mean off by {z_mean:+.2} SE, variance off by {z_var:+.2} SE"),
    )
}

fn gradients() -> Outcome {
    let mut rng = seeded(6);
    let mut worst_score: f64 = 0.0;
    let truth = p(0.4, 1.3, 4.0, 0.5, 0.25);
    let data = Dataset::new(truth.sample(300, 61), "", "").unwrap();
    for _ in 0..20 {
        let q = p(
            uniform(&mut rng, 0.2, 0.6),
            uniform(&mut rng, 0.8, 2.0),
            uniform(&mut rng, 1.5, 8.0),
            uniform(&mut rng, 0.2, 2.0),
            uniform(&mut rng, -0.6, 0.6),
        );
        let g = score(&q, &data).map_err(|e| e.to_string())?;
        for (j, which) in Coordinate::ALL.into_iter().enumerate() {
            let v = q.get(which);
            let fd = finite_diff5(|x| loglik(&q.with(which, x), &data).unwrap(), v, 1e-5 * v.abs().max(0.1)).unwrap();
            worst_score = worst_score.max((g[j] - fd).abs() / g[j].abs().max(1.0));
        }
    }
    let mut worst_psi: f64 = 0.0;
    for _ in 0..20 {
        let q = Params::standard(uniform(&mut rng, 0.5, 20.0), uniform(&mut rng, 0.05, 4.0), uniform(&mut rng, -0.9, 0.9))
            .unwrap();
        let mag = uniform(&mut rng, -2.0, 1.5).exp();
        let x = if open01::<f64, _>(&mut rng) < 0.5 { -mag } else { mag };
        for which in Coordinate::ALL {
            let v = q.get(which);
            let h = 1e-4 * v.abs().max(0.1);
            let h = if which == Coordinate::Eps { h.min((1.0 - v.abs()) / 4.0) } else { h };
            // psi is d ln f, the negative of the derivative of -ln f
            let fd = -finite_diff5(|t| -q.with(which, t).ln_pdf(x), v, h).unwrap();
            let got = psi(&q, which, x).map_err(|e| e.to_string())?;
            worst_psi = worst_psi.max((got - fd).abs() / got.abs().max(1e-3));
        }
    }
    check(
        worst_score < 1e-6 && worst_psi < 1e-6,
        format!(
            "20 points each, max relative error: score {worst_score:.2e}, psi {worst_psi:.2e} \
             (psi carries the sign of d ln f)"
        ),
    )
}

fn psi_limit_probes() -> Outcome {
    // psi approaches its limits like |x|^-1 (mu) and |x|^-c (others), so
    // the far probe carries the tolerance and the near one must be no closer
    let sets: [(f64, f64, f64); 5] = [(2.0, 1.0, 0.0), (5.0, 0.2, 0.4), (20.0, 0.2, 0.5), (1.5, 3.0, -0.5), (10.0, 0.1, 0.8)];
    let mut far: f64 = 0.0;
    let mut near: f64 = 0.0;
    let mut shrinking = true;
    let mut diverges = true;
    for (c, k, eps) in sets {
        let q = Params::standard(c, k, eps).unwrap();
        let expected = [
            (Coordinate::Mu, 0.0, 0.0),
            (Coordinate::Sigma, c, c),
            (Coordinate::K, 1.0 / k, 1.0 / k),
            (Coordinate::Eps, (c + 1.0) / (1.0 + eps), -(c + 1.0) / (1.0 - eps)),
        ];
        for (which, plus, minus) in expected {
            for (side, want) in [(1.0, plus), (-1.0, minus)] {
                let gap = |x: f64| (psi(&q, which, side * x).unwrap() - want).abs() / want.abs().max(1.0);
                let (g6, g8) = (gap(1e6), gap(1e8));
                far = far.max(g8);
                near = near.max(g6);
                shrinking &= g8 <= g6;
            }
        }
        let cl = psi_limits(&q).unwrap().c;
        let steady = |v: [f64; 3]| {
            let (d1, d2) = (v[1] - v[0], v[2] - v[1]);
            d1 < 0.0 && d2 < 0.0 && d2 / d1 > 0.9
        };
        diverges &= cl.plus == Limit::NegInfinity
            && cl.minus == Limit::NegInfinity
            && !cl.numerically_bounded
            && steady(cl.probe_plus)
            && steady(cl.probe_minus);
    }
    check(
        far < 1e-6 && shrinking && diverges,
        format!(
            "5 sets, max relative gap to the mu, sigma, k, eps limits: {near:.1e} at |x| = 1e6, {far:.1e} at 1e8 \
             (shrinking: {shrinking}); psi_c falls by a non-shrinking amount per decade over {PROBE_X:?} on both \
             sides: {diverges}"
        ),
    )
}

fn redescending_point() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut found = Vec::new();
    for (c, k) in [(2.0, 1.0), (5.0, 0.2), (20.0, 0.2)] {
        let q = Params::standard(c, k, 0.0).unwrap();
        let Some(x0) = redescend_point(&q).x0 else { return Err(format!("no x0 for c={c}, k={k}")) };
        let f = |x: f64| psi(&q, Coordinate::Mu, x).unwrap();
        let slope = finite_diff5(f, x0, 1e-4 * x0).unwrap();
        worst = worst.max((slope * x0 / f(x0)).abs());
        found.push(format!("{x0:.6}"));
    }
    check(worst < 1e-6, format!("x0 = [{}], max relative slope {worst:.2e}", found.join(", ")))
}

fn heavy_tail() -> Outcome {
    let xs = [10.0, 100.0, 1e3, 1e4];
    let cases = [(0.1, [0.5, 0.8, 1.0]), (1.0, [2.0, 5.0, 10.0])];
    let mut ok = true;
    let mut checked = 0;
    for (lambda, cs) in cases {
        for c in cs {
            if heavy_tail_grid_start(c, lambda) != 10.0 {
                return Err(format!("c={c}, lambda={lambda} does not start at 10"));
            }
            for (k, eps) in [(0.2, 0.4), (1.0, 0.0), (3.0, -0.5)] {
                let q = Params::standard(c, k, eps).unwrap();
                let g: Vec<f64> = xs.iter().map(|&x| lambda * x + q.ln_sf(x)).collect();
                ok &= g.windows(2).all(|w| w[1] > w[0]);
                checked += 1;
            }
        }
    }
    let mut slope_err: f64 = 0.0;
    for c in [2.0f64, 5.0] {
        for (k, eps) in [(0.2, 0.4), (1.0, 0.0), (3.0, -0.5)] {
            let est = tail_index_estimate(&Params::standard(c, k, eps).unwrap(), 1e3, 1e5);
            slope_err = slope_err.max((est - c).abs() / c);
        }
    }
    check(
        ok && slope_err < 0.05,
        format!(
            "{checked} cases on x = 10..1e4 strictly increasing: {ok}; tail slope within {:.3}% of -c",
            100.0 * slope_err
        ),
    )
}

fn recovery() -> Outcome {
    let truth = p(0.0, 1.0, 5.0, 0.2, 0.4);
    let start = Instant::now();
    let mut errs: [Vec<f64>; 5] = Default::default();
    let mut above = 0;
    let mut monotone = 0;
    let mut converged = 0;
    for seed in 0..20 {
        let data = Dataset::new(truth.sample(2000, seed), "draws", format!("synthetic:{seed}")).unwrap();
        let r = fit_ml(&data, &FitConfig::default()).map_err(|e| e.to_string())?;
        for (j, (a, b)) in r.params.to_array().iter().zip(truth.to_array()).enumerate() {
            errs[j].push((a - b).abs());
        }
        above += (r.loglik >= loglik(&truth, &data).unwrap()) as usize;
        monotone += r.trace.windows(2).all(|w| w[1].loglik >= w[0].loglik) as usize;
        converged += r.converged as usize;
    }
    let median = |v: &mut Vec<f64>| {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        (v[9] + v[10]) / 2.0
    };
    let med: Vec<f64> = errs.iter_mut().map(median).collect();
    let tol = [0.1, 0.15, 1.0, 0.08, 0.1];
    let within = med.iter().zip(tol).all(|(m, t)| *m < t);
    let secs = start.elapsed().as_secs_f64();
    check(
        within && above == 20 && monotone == 20 && secs < 300.0,
        format!(
            "median |error| (mu, sigma, c, k, eps) = ({:.3}, {:.3}, {:.3}, {:.4}, {:.3}); loglik >= truth {above}/20; \
             monotone trace {monotone}/20; converged {converged}/20; {secs:.0} s",
            med[0], med[1], med[2], med[3], med[4]
        ),
    )
}

fn equivariance() -> Outcome {
    let truth = p(0.0, 1.0, 5.0, 0.2, 0.4);
    let cfg = FitConfig::default();
    let mut worst: f64 = 0.0;
    for seed in [100, 101, 102] {
        let data = Dataset::new(truth.sample(2000, seed), "", "").unwrap();
        let base = fit_ml(&data, &cfg).map_err(|e| e.to_string())?.params;
        for (a, b) in [(3.7, -11.2), (0.01, 250.0)] {
            let m = fit_ml(&data.map(|y| a * y + b).unwrap(), &cfg).map_err(|e| e.to_string())?.params;
            let gaps = [
                (m.mu - (a * base.mu + b)) / (a * base.sigma),
                m.sigma / (a * base.sigma) - 1.0,
                (m.c - base.c) / base.c,
                (m.k - base.k) / base.k,
                m.eps - base.eps,
            ];
            worst = gaps.iter().fold(worst, |w, g| w.max(g.abs()));
        }
        let r = fit_ml(&data.map(|y| -y).unwrap(), &cfg).map_err(|e| e.to_string())?.params;
        let gaps = [
            (r.mu + base.mu) / base.sigma,
            r.sigma / base.sigma - 1.0,
            (r.c - base.c) / base.c,
            (r.k - base.k) / base.k,
            r.eps + base.eps,
        ];
        worst = gaps.iter().fold(worst, |w, g| w.max(g.abs()));
    }
    check(
        worst < 1e-6,
        format!("3 samples x (2 affine maps + negation), max relative discrepancy {worst:.2e}"),
    )
}

fn renyi() -> Outcome {
    let points = [
        (p(0.0, 1.0, 2.0, 1.0, 0.0), 0.5),
        (p(1.0, 2.0, 5.0, 0.2, 0.4), 2.0),
        (p(0.0, 0.5, 20.0, 0.2, 0.5), 3.0),
        (p(-1.0, 1.0, 3.0, 2.0, -0.7), 0.5),
        (p(0.0, 1.0, 0.8, 3.0, 0.3), 2.0),
        (p(2.0, 3.0, 10.0, 0.5, 0.9), 3.0),
    ];
    let mut worst: f64 = 0.0;
    for (d, alpha) in points {
        let closed = d.renyi_entropy(alpha).map_err(|e| e.to_string())?;
        let std = d.with_location_scale(0.0, 1.0).unwrap();
        let integral = line_integral(|x| alpha * std.ln_pdf(x), |_| 1.0);
        let quad = integral.ln() / (1.0 - alpha) + d.sigma.ln();
        worst = worst.max((closed - quad).abs());
    }
    check(
        worst < 1e-8,
        format!("6 (params, alpha) points, max |closed form - quadrature| = {worst:.2e} (gamma argument sign corrected)"),
    )
}

fn pipeline() -> Outcome {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let data = dir.path().join("measurements.csv");
    let draws = p(-0.0061, 0.077, 2.3826, 0.7786, 0.0533).sample(250, 77);
    let mut text = String::from("# probe,value\n");
    for (i, v) in draws.iter().enumerate() {
        text.push_str(&format!("p{i},{v}\n"));
    }
    fs::write(&data, text).map_err(|e| e.to_string())?;
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_esb3"))
            .args(["fit", "--input", data.to_str().unwrap(), "--column", "2"])
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    if a.status.code() != Some(0) {
        return Err(format!("exit {:?}: {}", a.status.code(), String::from_utf8_lossy(&a.stderr)));
    }
    let doc: Value = serde_json::from_slice(&a.stdout).map_err(|e| e.to_string())?;
    let schema: Value = serde_json::from_str(include_str!("../../../schema/esb3-output.schema.json")).unwrap();
    let valid = jsonschema::is_valid(&schema, &doc);
    let row: Vec<f64> = ["mu", "sigma", "c", "k", "eps", "p_ks", "aic"]
        .iter()
        .filter_map(|k| doc["summary"][k].as_f64())
        .collect();
    check(
        a.stdout == b.stdout && valid && row.len() == 7 && row.iter().all(|v| v.is_finite()),
        format!(
            "row (mu, sigma, c, k, eps, P(KS), AIC) = ({}); identical bytes on rerun: {}; schema-valid: {valid}",
            row.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(", "),
            a.stdout == b.stdout
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("skewness/kurtosis table", table_reproduction),
        ("normalization", normalization),
        ("closed-form moments vs quadrature", moments),
        ("quantile/cdf round trips", round_trips),
        ("sampling law", sampling_law),
        ("score and psi gradients", gradients),
        ("psi limits", psi_limit_probes),
        ("redescending point", redescending_point),
        ("heavy tail", heavy_tail),
        ("parameter recovery", recovery),
        ("equivariance", equivariance),
        ("Renyi entropy", renyi),
        ("fit pipeline record", pipeline),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (tag, detail) = match std::panic::catch_unwind(f) {
            Ok(Ok(d)) => ("PASS", d),
            Ok(Err(d)) => ("FAIL", d),
            Err(_) => ("FAIL", "panicked".to_string()),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("criterion {:>2} [{tag}] {name}: {detail} ({:.1} s)", i + 1, t.elapsed().as_secs_f64());
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
