use rand::Rng;
use rand_distr::{Bernoulli, Binomial, Distribution, StandardNormal};

use super::scenario::ScenarioConfig;
use crate::error::Result;
use crate::linalg::dot;
use crate::logistic::phi;
use crate::model::incidence_predictor;
use crate::survival_core::{Dataset, Subject};

/// Weibull PH constants shared by the latency of Models 1-4.
pub const WEIBULL_SHAPE: f64 = 0.75;
pub const WEIBULL_SCALE: f64 = 1.5;

const M5_CENSOR_RATE: f64 = 1.0 / 22.0;
const M5_CENSOR_SHAPE: f64 = 2.5;
const M5_TAIL_PROB: f64 = 0.03;

/// Latent quantities the estimators never see.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenTruth {
    pub cured: Vec<bool>,
    /// truncated latent event time; infinite for cured subjects
    pub event_time: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedData {
    pub dataset: Dataset,
    pub truth: HiddenTruth,
}

impl SimulatedData {
    pub fn cure_rate(&self) -> f64 {
        let c = self.truth.cured.iter().filter(|&&b| b).count();
        c as f64 / self.truth.cured.len() as f64
    }

    pub fn censoring_rate(&self) -> f64 {
        1.0 - self.dataset.n_events() as f64 / self.dataset.len() as f64
    }
}

/// Uniform on (0, 1].
fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Draw from `S(t) = exp(-mu t^rho e^lp)`.
pub fn weibull_ph_time<R: Rng + ?Sized>(rng: &mut R, mu: f64, rho: f64, lp: f64) -> f64 {
    (-open_uniform(rng).ln() / (mu * lp.exp())).powf(1.0 / rho)
}

fn exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    -open_uniform(rng).ln() / rate
}

fn unif_pm1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(-1.0..1.0)
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn bern<R: Rng + ?Sized>(rng: &mut R, p: f64) -> f64 {
    if Bernoulli::new(p).expect("probability in [0,1]").sample(rng) {
        1.0
    } else {
        0.0
    }
}

/// Model 5 shape `0.75 + exp(beta'z)`.
pub fn model5_shape(beta: &[f64], z: &[f64]) -> f64 {
    0.75 + dot(beta, z).exp()
}

/// Model 5 truncation: the 97% quantile of `S(t) = exp(-mu t^rho)`.
pub fn model5_truncation(rho: f64) -> f64 {
    (-M5_TAIL_PROB.ln() / WEIBULL_SCALE).powf(1.0 / rho)
}

/// Censoring bound of Model 5: largest `tau_0(z)` over the covariate support plus 2.
///
/// `tau_0` decreases in the shape because the base `-ln(0.03)/mu` exceeds 1, so
/// the maximum sits at the smallest `beta'z` over `[-1,1] x {0,1}^2`.
pub fn model5_censor_bound(beta: &[f64]) -> f64 {
    let mut min_lp = f64::INFINITY;
    for u in [-1.0, 1.0] {
        for b1 in [0.0, 1.0] {
            for b2 in [0.0, 1.0] {
                min_lp = min_lp.min(dot(beta, &[u, b1, b2]));
            }
        }
    }
    model5_truncation(0.75 + min_lp.exp()) + 2.0
}

/// Upper bound on every observed time of the scenario.
pub fn censoring_bound(config: &ScenarioConfig) -> f64 {
    match config.model {
        1 => 17.0,
        2 | 4 => 9.0,
        3 => 12.0,
        _ => model5_censor_bound(&config.true_beta()),
    }
}

struct Draw {
    x: Vec<f64>,
    z: Vec<f64>,
    cured: bool,
    event_time: f64,
    censor_time: f64,
}

fn draw_subject<R: Rng + ?Sized>(config: &ScenarioConfig, gamma: &[f64], beta: &[f64], tau: f64, rng: &mut R) -> Draw {
    let (mu, rho) = (WEIBULL_SCALE, WEIBULL_SHAPE);
    // covariates, then the cure indicator, then the latent times
    let (x, z): (Vec<f64>, Vec<f64>) = match config.model {
        1 => {
            let x = vec![normal(rng), unif_pm1(rng)];
            (x.clone(), x)
        }
        2 => {
            let x = vec![normal(rng), bern(rng, 0.3), bern(rng, 0.7)];
            (x.clone(), x)
        }
        3 => {
            let x = vec![normal(rng), unif_pm1(rng), bern(rng, 0.4), bern(rng, 0.6)];
            let z1 = normal(rng);
            let z1 = if config.tie_z1_to_x1 { x[0] } else { z1 };
            let z = vec![z1, x[1], x[3]];
            (x, z)
        }
        4 => {
            let binom = Binomial::new(2, 0.5).expect("valid binomial");
            let x = vec![
                normal(rng),
                unif_pm1(rng),
                binom.sample(rng) as f64,
                bern(rng, 0.4),
                bern(rng, 0.6),
            ];
            let z1 = normal(rng);
            let z1 = if config.tie_z1_to_x1 { x[0] } else { z1 };
            let z = vec![z1, x[2], x[3]];
            (x, z)
        }
        _ => {
            let x = vec![unif_pm1(rng), bern(rng, 0.4), bern(rng, 0.6)];
            (x.clone(), x)
        }
    };
    let eta = incidence_predictor(gamma, &x);
    let cured = rng.random::<f64>() >= phi(eta);

    // the uncured latency is drawn for every subject to keep streams aligned
    let lp = dot(beta, &z);
    let event_time = match config.model {
        1 => weibull_ph_time(rng, mu, rho, lp).min(15.0),
        2 | 4 => weibull_ph_time(rng, mu, rho, lp).min(7.0),
        3 => weibull_ph_time(rng, mu, rho, lp).min(10.0),
        _ => {
            let shape = model5_shape(beta, &z);
            weibull_ph_time(rng, mu, shape, lp).min(model5_truncation(shape))
        }
    };
    let censor_time = match config.model {
        1 | 4 => exponential(rng, config.lambda_c),
        2 => weibull_ph_time(rng, config.lambda_c * mu, rho, eta),
        3 => weibull_ph_time(rng, config.lambda_c * mu, rho, 0.4 * eta + 0.5 * lp),
        _ => weibull_ph_time(rng, M5_CENSOR_RATE * mu, M5_CENSOR_SHAPE, eta),
    }
    .min(tau);
    Draw {
        x,
        z,
        cured,
        event_time: if cured { f64::INFINITY } else { event_time },
        censor_time,
    }
}

/// Draws one dataset of the configured scenario.
///
/// Under latency misspecification the latency design is `x_1..x_5`; the
/// data-generating process is unchanged.
pub fn generate_dataset<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<SimulatedData> {
    config.validate()?;
    let truth_cfg = ScenarioConfig {
        misspecify_latency_covariates: false,
        ..config.clone()
    };
    let gamma = truth_cfg.true_gamma();
    let beta = truth_cfg.true_beta();
    let tau = censoring_bound(config);
    let mut subjects = Vec::with_capacity(config.n);
    let mut cured = Vec::with_capacity(config.n);
    let mut event_time = Vec::with_capacity(config.n);
    for _ in 0..config.n {
        let d = draw_subject(config, &gamma, &beta, tau, rng);
        let event = d.event_time <= d.censor_time;
        let y = if event { d.event_time } else { d.censor_time };
        let z = if config.misspecify_latency_covariates { d.x.clone() } else { d.z };
        subjects.push(Subject::new(y, event, d.x, z));
        cured.push(d.cured);
        event_time.push(d.event_time);
    }
    Ok(SimulatedData {
        dataset: Dataset::new(subjects)?,
        truth: HiddenTruth { cured, event_time },
    })
}
