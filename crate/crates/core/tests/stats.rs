use meander_sojourn::laws::{free_sojourn_law_mu0, meander_limit_law};
use meander_sojourn::stats::*;
use meander_sojourn::MixedSojournLaw;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn draw(law: &MixedSojournLaw, n: usize, rng: &mut ChaCha8Rng) -> EmpiricalLaw {
    let atom_at = law.atoms().first().map(|a| a.location);
    let mut cont = Vec::with_capacity(n);
    let mut atoms = 0;
    for _ in 0..n {
        let x = law.sample(rng).unwrap();
        if Some(x) == atom_at {
            atoms += 1;
        } else {
            cont.push(x);
        }
    }
    EmpiricalLaw::new(cont, atoms)
}

#[test]
fn calibrated_under_the_null() {
    let law = meander_limit_law(1.0, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let passes = (0..50)
        .filter(|_| ks_test_continuous(&draw(&law, 10_000, &mut rng), &law, 0.01).unwrap().pass)
        .count();
    assert!(passes >= 49, "{passes}/50");
}

#[test]
fn two_sample_calibrated_under_the_null() {
    let law = meander_limit_law(1.0, 3.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let passes = (0..50)
        .filter(|_| {
            let a = draw(&law, 10_000, &mut rng);
            let b = draw(&law, 10_000, &mut rng);
            two_sample_ks(&a, &b, 0.01).unwrap().pass
        })
        .count();
    assert!(passes >= 49, "{passes}/50");
}

#[test]
fn uniform_samples_are_not_arcsine() {
    let arcsine = free_sojourn_law_mu0(0.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let emp = EmpiricalLaw::new((0..10_000).map(|_| rng.random::<f64>()).collect(), 0);
    let report = ks_test_continuous(&emp, &arcsine, 0.01).unwrap();
    assert!(!report.pass);
    // Brute-force sup |z − (2/π) asin √z| on a fine grid.
    let sup = (0..=100_000)
        .map(|i| {
            let z = i as f64 / 100_000.0;
            (z - 2.0 / std::f64::consts::PI * z.sqrt().asin()).abs()
        })
        .fold(0.0, f64::max);
    assert!((report.ks_stat - sup).abs() < 0.02, "{} vs {sup}", report.ks_stat);
}

#[test]
fn two_sample_detects_different_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let a = draw(&meander_limit_law(1.0, 2.0).unwrap(), 10_000, &mut rng);
    let b = draw(&meander_limit_law(0.5, 2.0).unwrap(), 10_000, &mut rng);
    assert!(!two_sample_ks(&a, &b, 0.01).unwrap().pass);
}

#[test]
fn empty_sample_is_an_error() {
    let law = meander_limit_law(1.0, 2.0).unwrap();
    let emp = EmpiricalLaw::new(vec![], 10);
    assert_eq!(ks_test_continuous(&emp, &law, 0.01), Err(StatsError::EmptySample));
    assert_eq!(two_sample_ks(&emp, &emp, 0.01), Err(StatsError::EmptySample));
}

#[test]
fn wrong_atom_fails_even_with_matching_shape() {
    let law = meander_limit_law(1.0, 4.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let emp = draw(&law, 10_000, &mut rng);
    let shifted = EmpiricalLaw::new(emp.continuous_samples().to_vec(), emp.atom_count() / 2);
    let report = ks_test_continuous(&shifted, &law, 0.01).unwrap();
    assert!(report.ks_stat < report.ks_critical);
    assert!(!report.pass);
}

#[test]
fn report_serializes_with_declared_fields() {
    let report = GofReport { ks_stat: 0.01, ks_critical: 0.02, atom_freq: 0.5, atom_ci: (0.45, 0.55), pass: true };
    let json = serde_json::to_value(report).unwrap();
    let mut keys: Vec<_> = json.as_object().unwrap().keys().cloned().collect();
    keys.sort();
    assert_eq!(keys, ["atom_ci", "atom_freq", "ks_critical", "ks_stat", "pass"]);
}

#[test]
fn p_value_matches_critical_value() {
    let m = 10_000;
    let d = ks_critical(0.01, m);
    let p = ks_p_value(d, m as f64);
    assert!((p - 0.01).abs() < 2e-3, "{p}");
}

proptest! {
    #[test]
    fn ks_statistic_invariant_under_monotone_maps(mut xs in prop::collection::vec(0.001f64..0.999, 1..200)) {
        xs.sort_by(f64::total_cmp);
        let law = meander_limit_law(0.0, 1.0).unwrap();
        let base = ks_statistic(&xs, |x| law.conditional_continuous_cdf(x).unwrap());
        // Map the support through y = x³ and the CDF through the inverse.
        let ys: Vec<f64> = xs.iter().map(|x| x * x * x).collect();
        let mapped = ks_statistic(&ys, |y| law.conditional_continuous_cdf(y.cbrt()).unwrap());
        prop_assert!((base - mapped).abs() < 1e-12);
    }

    #[test]
    fn wilson_interval_contains_point_estimate(k in 0usize..1000, extra in 0usize..1000, alpha in 0.001f64..0.2) {
        let n = k + extra + 1;
        let (lo, hi) = atom_ci(k, n, alpha);
        let p = k as f64 / n as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-12 && p <= hi + 1e-12 && hi <= 1.0);
    }
}
