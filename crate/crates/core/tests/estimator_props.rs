use loopsoup::estimators::*;
use loopsoup::rng::stream;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::Binomial;

fn small_spec(k: usize) -> CampaignSpec {
    let mut s = CampaignSpec::new(0.0, k, vec![1.0, 2.0, 3.0], 120);
    s.width = 64;
    s.step = 0.08;
    s.min_successes = 1;
    s
}

#[test]
fn fit_recovers_a_known_slope_under_binomial_noise() {
    let slope = 2.0 / 3.0;
    let n = 10_000u64;
    let mut rng = stream(77, &[], 0);
    let mut covered = 0;
    for _ in 0..200 {
        let pts: Vec<RadiusEstimate> = (1..=5)
            .map(|r| {
                let p = 0.9 * (-slope * r as f64).exp();
                let x = rng.sample(Binomial::new(n, p).unwrap());
                let est = x as f64 / n as f64;
                RadiusEstimate::point(r as f64, est, est * (1.0 - est) / n as f64)
            })
            .collect();
        let f = fit_exponent(&pts).unwrap();
        if (f.slope - slope).abs() <= 3.0 * f.stderr {
            covered += 1;
        }
    }
    assert!(covered >= 190, "covered {covered}/200");
}

#[test]
fn shards_merge_to_the_single_run() {
    let spec = small_spec(2);
    let whole = p0_tallies(&spec, 0..120).unwrap();
    let a = p0_tallies(&spec, 0..50).unwrap();
    let b = p0_tallies(&spec, 50..90).unwrap();
    let c = p0_tallies(&spec, 90..120).unwrap();
    for i in 0..whole.len() {
        assert_eq!(a[i].merge(&b[i]).merge(&c[i]), whole[i]);
        assert_eq!(c[i].merge(&a[i].merge(&b[i])), whole[i]);
    }
    let one = fit_tallies(&spec, &whole, |_| 1.0).unwrap();
    let merged: Vec<Tally> = (0..whole.len()).map(|i| c[i].merge(&b[i]).merge(&a[i])).collect();
    assert_eq!(fit_tallies(&spec, &merged, |_| 1.0).unwrap(), one);
    assert_eq!(estimate_p0(&spec).unwrap(), one);
}

#[test]
fn identical_specs_replay_bit_for_bit() {
    let spec = small_spec(1);
    let a = estimate_p0(&spec).unwrap();
    let b = estimate_p0(&spec).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.slope.to_bits(), b.slope.to_bits());
    let other = CampaignSpec { seed: 2, ..spec };
    assert_ne!(estimate_p0(&other).unwrap().per_radius, a.per_radius);
}

#[test]
fn nondisconnection_decreases_in_k_and_r() {
    let mut s1 = small_spec(1);
    s1.trials_per_radius = 300;
    let s2 = CampaignSpec { k: 2, ..s1.clone() };
    let f1 = estimate_p0(&s1).unwrap();
    let f2 = estimate_p0(&s2).unwrap();
    for (a, b) in f1.per_radius.iter().zip(&f2.per_radius) {
        assert!((0.0..=1.0).contains(&a.estimate) && (0.0..=1.0).contains(&b.estimate));
        let se = (a.variance + b.variance).sqrt();
        assert!(b.estimate <= a.estimate + 2.0 * se, "r = {}: k=1 {} k=2 {}", a.r, a.estimate, b.estimate);
    }
    for f in [&f1, &f2] {
        for w in f.per_radius.windows(2) {
            let se = (w[0].variance + w[1].variance).sqrt();
            assert!(w[1].estimate <= w[0].estimate + 2.0 * se);
        }
    }
}

#[test]
fn tilted_moments_decrease_in_lambda() {
    let mut spec = small_spec(2);
    spec.trials_per_radius = 100;
    let lambdas = [0.0, 0.05, 0.5, 1.0];
    let fits = estimate_zr_moments(&spec, &lambdas).unwrap();
    for i in 0..spec.radii.len() {
        let m: Vec<f64> = fits.iter().map(|f| f.per_radius[i].estimate).collect();
        assert!(m.iter().all(|v| (0.0..=1.0).contains(v)));
        // common random numbers: the moments are ordered exactly
        assert!(m.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{m:?}");
    }
    // lambda = 0 reproduces the non-disconnection frequency of the same configurations
    let p0 = &fits[0].per_radius;
    assert!(p0.iter().all(|e| e.estimate * e.trials as f64 == e.successes as f64));
}

#[test]
fn insufficient_successes_are_reported() {
    let mut spec = small_spec(2);
    spec.c = 1.0;
    spec.radii = vec![1.0, 4.0, 6.0];
    spec.min_successes = 60;
    assert!(matches!(estimate_p0(&spec), Err(loopsoup::Error::InsufficientSuccesses { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn merging_is_associative_and_commutative(vals in prop::collection::vec(0.0f64..=1.0, 1..60), cut1 in 0usize..60, cut2 in 0usize..60) {
        let n = vals.len();
        let (i, j) = (cut1.min(cut2).min(n), cut1.max(cut2).min(n));
        let tally = |xs: &[f64]| {
            let mut t = Tally::default();
            for &x in xs {
                t.record(x);
            }
            t
        };
        let (a, b, c) = (tally(&vals[..i]), tally(&vals[i..j]), tally(&vals[j..]));
        let all = tally(&vals);
        prop_assert_eq!(a.merge(&b).merge(&c), all);
        prop_assert_eq!(a.merge(&b.merge(&c)), all);
        prop_assert_eq!(c.merge(&a).merge(&b), all);
        prop_assert!(all.mean() >= 0.0 && all.mean() <= 1.0);
    }

    #[test]
    fn fit_is_exact_on_noiseless_exponentials(slope in 0.05f64..3.0, amp in 0.1f64..1.0, start in 1.0f64..3.0) {
        let pts: Vec<RadiusEstimate> = (0..5)
            .map(|i| {
                let r = start + i as f64;
                RadiusEstimate::point(r, amp * (-slope * r).exp(), 0.0)
            })
            .collect();
        let f = fit_exponent(&pts).unwrap();
        prop_assert!((f.slope - slope).abs() < 1e-9);
        prop_assert!(f.stderr >= 0.0);
    }
}
