//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use curemix::cox::{cox_partial_loglik, cox_score};
use curemix::logistic::fit_fractional_logistic;
use curemix::survival_core::{beran_survival, kaplan_meier};
use curemix::two_step::fit_two_step_from_gamma;
use curemix::{fit_em, phi, Dataset, EmConfig, Kernel, StepFunction, Subject, TwoStepConfig};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Logistic-Cox mixture data with `p` normal covariates shared by both parts,
/// exponential latency and uniform censoring. Times are continuous, so ties
/// have probability zero. Retries until there is at least one event and one
/// censored subject.
pub fn mixture_dataset(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Dataset {
    loop {
        let gamma: Vec<f64> = (0..=p).map(|k| if k == 0 { 0.8 } else { 1.0 }).collect();
        let subjects: Vec<Subject> = (0..n)
            .map(|_| {
                let x: Vec<f64> = (0..p).map(|_| normal(rng)).collect();
                let eta = gamma[0] + x.iter().zip(&gamma[1..]).map(|(a, b)| a * b).sum::<f64>();
                let uncured = rng.random::<f64>() < phi(eta);
                let lp = 0.5 * x.first().copied().unwrap_or(0.0);
                let t = if uncured {
                    -(1.0 - rng.random::<f64>()).ln() / lp.exp()
                } else {
                    f64::INFINITY
                };
                let c = 0.05 + 4.0 * rng.random::<f64>();
                let event = t <= c;
                Subject::new(if event { t } else { c }, event, x.clone(), x)
            })
            .collect();
        let d = Dataset::new(subjects);
        if let Ok(d) = d {
            if d.n_events() < d.len() && d.n_events() >= 2 {
                return d;
            }
        }
    }
}

pub fn random_index(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| normal(rng)).collect()
}

/// Independent observed log-likelihood of the logistic-Cox mixture with a
/// step baseline: events contribute `phi * dL * exp(b'z) * S`, censored
/// subjects `1 - phi + phi * S`, and `S = 0` after the last jump.
pub fn oracle_observed_loglik(gamma: &[f64], beta: &[f64], base: &StepFunction, d: &Dataset) -> f64 {
    let last = base.jump_times().last().copied().unwrap_or(f64::INFINITY);
    let mut total = 0.0;
    for s in d.subjects() {
        let eta = gamma[0] + s.x.iter().zip(&gamma[1..]).map(|(a, b)| a * b).sum::<f64>();
        let p = 1.0 / (1.0 + (-eta).exp());
        let lp: f64 = s.z.iter().zip(beta).map(|(a, b)| a * b).sum();
        let cum = base.eval(s.time);
        let surv = if s.time > last { 0.0 } else { (-cum * lp.exp()).exp() };
        if s.event {
            let k = base.jump_times().iter().position(|&t| t == s.time).unwrap();
            let before = if k == 0 { base.initial_value() } else { base.values()[k - 1] };
            let jump = base.values()[k] - before;
            total += (p * jump * lp.exp() * surv).ln();
        } else {
            total += (1.0 - p + p * surv).ln();
        }
    }
    total
}

/// Binary logistic regression by textbook IRLS with Gaussian elimination.
pub fn irls_oracle(design: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let d = design[0].len();
    let mut beta = vec![0.0; d];
    for _ in 0..100 {
        let mut xtwx = vec![vec![0.0; d]; d];
        let mut xtwz = vec![0.0; d];
        for (x, &yi) in design.iter().zip(y) {
            let eta: f64 = x.iter().zip(&beta).map(|(a, b)| a * b).sum();
            let mu = 1.0 / (1.0 + (-eta).exp());
            let w = mu * (1.0 - mu);
            let z = eta + (yi - mu) / w;
            for a in 0..d {
                xtwz[a] += w * x[a] * z;
                for b in 0..d {
                    xtwx[a][b] += w * x[a] * x[b];
                }
            }
        }
        let new = gauss_solve(xtwx, xtwz);
        let change = new.iter().zip(&beta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        beta = new;
        if change < 1e-13 {
            break;
        }
    }
    beta
}

fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

// Property checks shared by the per-module tests and the acceptance suite.
// Each returns the worst observed discrepancy.

/// Beran with a constant index against Kaplan–Meier on 50 random datasets.
pub fn check_beran_constant_index(seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst = 0.0_f64;
    for k in 0..50 {
        let n = 10 + 5 * k;
        let d = mixture_dataset(&mut r, n, 1);
        let km = kaplan_meier(&d);
        let idx = vec![0.3; n];
        let b = beran_survival(&idx, &d.times(), &d.events(), 0.3, 0.5, Kernel::Epanechnikov).unwrap();
        worst = worst.max(km.max_abs_diff(&b));
    }
    worst
}

/// Largest decrease of the observed log-likelihood along the EM trace over
/// `count` random datasets of size `n`.
pub fn check_em_monotone(seed: u64, count: usize, n: usize) -> f64 {
    let mut r = rng(seed);
    let mut worst = 0.0_f64;
    for _ in 0..count {
        let d = mixture_dataset(&mut r, n, 2);
        let fit = fit_em(&d, &EmConfig::default()).unwrap();
        for w in fit.observed_loglik_trace.windows(2) {
            worst = worst.max(w[0] - w[1]);
        }
    }
    worst
}

/// Largest relative error between the analytic score and central finite
/// differences (step 1e-6) at 20 random points, n = 50.
pub fn check_cox_gradient(seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let d = mixture_dataset(&mut r, 50, 3);
        let w: Vec<f64> = (0..50).map(|_| 0.2 + r.random::<f64>()).collect();
        let o: Vec<f64> = (0..50).map(|_| 0.3 * normal(&mut r)).collect();
        let beta: Vec<f64> = (0..3).map(|_| normal(&mut r)).collect();
        let g = cox_score(&d, &w, &o, &beta).unwrap();
        for j in 0..3 {
            let h = 1e-6;
            let mut bp = beta.clone();
            let mut bm = beta.clone();
            bp[j] += h;
            bm[j] -= h;
            let fd = (cox_partial_loglik(&d, &w, &o, &bp).unwrap() - cox_partial_loglik(&d, &w, &o, &bm).unwrap())
                / (2.0 * h);
            worst = worst.max((g[j] - fd).abs() / g[j].abs().max(1.0));
        }
    }
    worst
}

/// Largest coefficient difference between the fractional-logistic solver and
/// the IRLS oracle over 50 binary-response instances.
pub fn check_logistic_vs_irls(seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst = 0.0_f64;
    for k in 0..50 {
        let n = 40 + 3 * k;
        let p = 1 + k % 4;
        let truth: Vec<f64> = (0..=p).map(|_| 0.7 * normal(&mut r)).collect();
        let design: Vec<Vec<f64>> = (0..n)
            .map(|_| std::iter::once(1.0).chain((0..p).map(|_| normal(&mut r))).collect())
            .collect();
        let y: Vec<f64> = design
            .iter()
            .map(|x| {
                let eta: f64 = x.iter().zip(&truth).map(|(a, b)| a * b).sum();
                if r.random::<f64>() < phi(eta) { 1.0 } else { 0.0 }
            })
            .collect();
        let fit = fit_fractional_logistic(&design, &y, &vec![1.0; n]).unwrap();
        assert!(fit.converged && !fit.separation, "instance {k} not regular");
        worst = worst.max(max_abs_diff(&fit.gamma, &irls_oracle(&design, &y)));
    }
    worst
}

/// Index-rescaling invariance of the 2-step incidence estimate: scale the
/// preliminary coefficients and the bandwidth by the same factor.
pub fn check_two_step_rescaling(seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let d = mixture_dataset(&mut r, 120, 2);
        let g: Vec<f64> = vec![0.5, 1.0 + 0.3 * normal(&mut r), 1.0 + 0.3 * normal(&mut r)];
        let b = 0.6;
        let base = fit_two_step_from_gamma(
            &d,
            &g,
            &TwoStepConfig { bandwidth_override: Some(b), ..TwoStepConfig::default() },
        )
        .unwrap();
        for a in [0.25, 3.0, 17.0] {
            let ga: Vec<f64> = g.iter().map(|v| a * v).collect();
            let fit = fit_two_step_from_gamma(
                &d,
                &ga,
                &TwoStepConfig { bandwidth_override: Some(a * b), ..TwoStepConfig::default() },
            )
            .unwrap();
            worst = worst.max(max_abs_diff(&base.gamma, &fit.gamma));
        }
    }
    worst
}
