mod common;

use common::*;
use curemix::logistic::fit_fractional_logistic;
use curemix::survival_core::{kaplan_meier, nadaraya_watson_weights};
use curemix::two_step::{fit_two_step_from_gamma, presmooth, project_incidence};
use curemix::{fit_em, fit_two_step, phi, two_step_with_em_preliminary, Dataset, Kernel, Subject, TwoStepConfig};
use rand::Rng;

fn with_bandwidth(b: f64) -> TwoStepConfig {
    TwoStepConfig {
        bandwidth_override: Some(b),
        ..TwoStepConfig::default()
    }
}

#[test]
fn index_rescaling_invariance() {
    let worst = check_two_step_rescaling(3);
    assert!(worst < 1e-8, "{worst}");
    let mut r = rng(4);
    let d = mixture_dataset(&mut r, 100, 2);
    let g = [0.2, 1.1, -0.7];
    let a = presmooth(&d, &g, &with_bandwidth(0.8)).unwrap();
    let g5: Vec<f64> = g.iter().map(|v| 5.0 * v).collect();
    let b = presmooth(&d, &g5, &with_bandwidth(4.0)).unwrap();
    assert!(max_abs_diff(&a.pi_hat, &b.pi_hat) < 1e-12);
}

#[test]
fn deterministic_with_fixed_bandwidth() {
    let mut r = rng(5);
    let d = mixture_dataset(&mut r, 90, 2);
    let em = fit_em(&d, &Default::default()).unwrap();
    let a = fit_two_step(&d, &em, &with_bandwidth(0.7)).unwrap();
    let b = fit_two_step(&d, &em, &with_bandwidth(0.7)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn composition_matches_manual_calls() {
    let mut r = rng(6);
    let d = mixture_dataset(&mut r, 90, 2);
    let cfg = TwoStepConfig::default();
    let em = fit_em(&d, &cfg.em).unwrap();
    let manual = fit_two_step(&d, &em, &cfg).unwrap();
    let composed = two_step_with_em_preliminary(&d, &cfg).unwrap();
    assert_eq!(manual, composed);
    assert_eq!(composed.diagnostics.preliminary_converged, Some(em.converged));
}

#[test]
fn projection_recovers_injected_truth() {
    let mut r = rng(7);
    let d = mixture_dataset(&mut r, 200, 3);
    let truth = [0.4, -1.2, 0.8, 0.3];
    let pi: Vec<f64> = d
        .subjects()
        .iter()
        .map(|s| 1.0 - phi(truth[0] + s.x.iter().zip(&truth[1..]).map(|(a, b)| a * b).sum::<f64>()))
        .collect();
    let fit = project_incidence(&d, &pi, &vec![1.0; 200]).unwrap();
    assert!(max_abs_diff(&fit.gamma, &truth) < 1e-6);
}

#[test]
fn pi_hat_in_unit_interval() {
    let mut r = rng(8);
    for _ in 0..10 {
        let d = mixture_dataset(&mut r, 80, 2);
        let fit = curemix::two_step_with_em_preliminary(&d, &TwoStepConfig::default()).unwrap();
        assert!(fit.pi_hat.iter().all(|p| (0.0..=1.0).contains(p)));
        assert!(fit.bandwidth > 0.0);
    }
}

fn plateau(d: &Dataset) -> f64 {
    let km = kaplan_meier(d);
    km.eval(d.last_event_time())
}

#[test]
fn huge_bandwidth_is_unconditional() {
    let mut r = rng(9);
    let d = mixture_dataset(&mut r, 120, 2);
    let g = [0.3, 1.0, 0.5];
    let idx: Vec<f64> = d.subjects().iter().map(|s| g[0] + g[1] * s.x[0] + g[2] * s.x[1]).collect();
    let range = idx.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - idx.iter().cloned().fold(f64::INFINITY, f64::min);
    let km = plateau(&d);

    let fit = fit_two_step_from_gamma(&d, &g, &with_bandwidth(1e8 * range)).unwrap();
    assert!(fit.pi_hat.iter().all(|p| (p - km).abs() < 1e-12));
    assert!(fit.gamma[1].abs() < 1e-8 && fit.gamma[2].abs() < 1e-8);
    assert!((fit.gamma[0] - ((1.0 - km) / km).ln()).abs() < 1e-8);

    // ten times the range: kernel weights differ by at most 1% across subjects
    let fit = fit_two_step_from_gamma(&d, &g, &with_bandwidth(10.0 * range)).unwrap();
    assert!(fit.pi_hat.iter().all(|p| (p - km).abs() < 0.02));
    assert!(fit.gamma[1].abs() < 0.1 && fit.gamma[2].abs() < 0.1);
}

#[test]
fn plateau_censoring_gives_kernel_cure_fraction() {
    // every censored subject lies past the last event time
    let mut r = rng(10);
    let subjects: Vec<Subject> = (0..400)
        .map(|_| {
            let x = vec![normal(&mut r)];
            let event = r.random::<f64>() < phi(0.2 + 1.2 * x[0]);
            let t = if event { r.random_range(0.01..1.0) } else { r.random_range(2.0..3.0) };
            Subject::new(t, event, x.clone(), x)
        })
        .collect();
    let d = Dataset::new(subjects).unwrap();
    let g = [0.0, 1.0];
    let pre = presmooth(&d, &g, &with_bandwidth(0.4)).unwrap();
    let idx: Vec<f64> = d.subjects().iter().map(|s| s.x[0]).collect();
    for (i, &u) in idx.iter().enumerate() {
        let w = nadaraya_watson_weights(&idx, u, 0.4, Kernel::Epanechnikov).unwrap();
        let cured: f64 = w.iter().zip(d.subjects()).filter(|(_, s)| !s.event).map(|(w, _)| w).sum();
        assert!((pre.pi_hat[i] - cured).abs() < 1e-12);
    }
    let fit = fit_two_step_from_gamma(&d, &g, &with_bandwidth(0.4)).unwrap();
    let delta: Vec<f64> = d.subjects().iter().map(|s| s.delta()).collect();
    let glm = fit_fractional_logistic(&d.incidence_design(), &delta, &vec![1.0; 400]).unwrap();
    assert!(max_abs_diff(&fit.gamma, &glm.gamma) < 0.3, "{:?} vs {:?}", fit.gamma, glm.gamma);
}
