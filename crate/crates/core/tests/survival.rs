mod common;

use common::*;
use curemix::survival_core::{
    beran_survival, cv_bandwidth, kaplan_meier, nonparametric_cure_prob, Kernel,
};
use curemix::Dataset;
use proptest::prelude::*;
use rand::Rng;

fn censored_sample() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (2usize..40).prop_flat_map(|n| {
        (
            prop::collection::vec(0.01f64..10.0, n),
            prop::collection::vec(any::<bool>(), n),
        )
    })
}

fn to_dataset(times: &[f64], events: &[bool]) -> Option<Dataset> {
    let x = vec![vec![]; times.len()];
    Dataset::from_columns(times, events, &x, &x).ok()
}

proptest! {
    #[test]
    fn km_is_a_survival_curve((times, events) in censored_sample()) {
        let Some(d) = to_dataset(&times, &events) else { return Ok(()) };
        let km = kaplan_meier(&d);
        prop_assert_eq!(km.initial_value(), 1.0);
        prop_assert!(km.is_non_increasing());
        for (k, &t) in km.jump_times().iter().enumerate() {
            prop_assert!(times.iter().zip(&events).any(|(&y, &e)| e && y == t));
            prop_assert!(km.values()[k] >= 0.0);
        }
    }

    #[test]
    fn beran_in_unit_interval(
        (times, events) in censored_sample(),
        u in -2.0f64..2.0,
        b in 0.3f64..5.0,
        seed in any::<u64>(),
    ) {
        let Some(d) = to_dataset(&times, &events) else { return Ok(()) };
        let mut r = rng(seed);
        let idx: Vec<f64> = (0..d.len()).map(|_| r.random_range(-1.0..1.0)).collect();
        if let Ok(s) = beran_survival(&idx, &d.times(), &d.events(), u, b, Kernel::Epanechnikov) {
            prop_assert!(s.is_non_increasing());
            prop_assert!(s.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn cure_prob_affine_invariant(
        (times, events) in censored_sample(),
        a in 0.1f64..20.0,
        c in -10.0f64..10.0,
        b in 0.2f64..3.0,
        seed in any::<u64>(),
    ) {
        let Some(d) = to_dataset(&times, &events) else { return Ok(()) };
        let mut r = rng(seed);
        let idx: Vec<f64> = (0..d.len()).map(|_| normal(&mut r)).collect();
        let moved: Vec<f64> = idx.iter().map(|v| a * v + c).collect();
        let (t, e) = (d.times(), d.events());
        let u = idx[0];
        let p0 = nonparametric_cure_prob(&idx, &t, &e, u, b, Kernel::Epanechnikov);
        let p1 = nonparametric_cure_prob(&moved, &t, &e, a * u + c, a * b, Kernel::Epanechnikov);
        if let (Ok(p0), Ok(p1)) = (p0, p1) {
            prop_assert!((p0 - p1).abs() < 1e-10, "{p0} vs {p1}");
        }
    }
}

#[test]
fn constant_index_reduces_to_km() {
    assert!(check_beran_constant_index(17) < 1e-12);
}

#[test]
fn independent_index_prefers_heavy_smoothing() {
    let mut r = rng(99);
    let mut upper = 0;
    for _ in 0..100 {
        let d = mixture_dataset(&mut r, 60, 1);
        let idx = random_index(&mut r, 60);
        let (lo, hi) = idx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let range = hi - lo;
        let grid: Vec<f64> = (1..=20).map(|k| 0.1 * k as f64 * range).collect();
        let b = cv_bandwidth(&idx, &d.times(), &d.events(), &grid, Kernel::Epanechnikov).unwrap();
        if b > range {
            upper += 1;
        }
    }
    assert!(upper >= 80, "{upper} of 100 in the upper half");
}

#[test]
fn cv_score_matches_direct_sum() {
    let mut r = rng(3);
    let d = mixture_dataset(&mut r, 40, 1);
    let idx = random_index(&mut r, 40);
    let (t, e) = (d.times(), d.events());
    let mut ev: Vec<f64> = t.iter().zip(&e).filter(|(_, &e)| e).map(|(&t, _)| t).collect();
    ev.sort_by(f64::total_cmp);
    ev.dedup();
    for b in [0.8, 1.5, 4.0] {
        let mut direct = 0.0;
        for i in 0..40 {
            let k: Vec<f64> = (0..40)
                .map(|j| {
                    let u = (idx[j] - idx[i]) / b;
                    if j == i || u.abs() > 1.0 { 0.0 } else { 0.75 * (1.0 - u * u) }
                })
                .collect();
            let tot: f64 = k.iter().sum();
            for &s in &ev {
                let h: f64 = (0..40).filter(|&j| t[j] <= s).map(|j| k[j]).sum::<f64>() / tot;
                let ind = if t[i] <= s { 1.0 } else { 0.0 };
                direct += (ind - h).powi(2);
            }
        }
        let fast = curemix::survival_core::cv_score(&idx, &t, &e, b, Kernel::Epanechnikov).unwrap();
        assert!((fast - direct).abs() < 1e-9 * direct, "{b}: {fast} vs {direct}");
    }
}
