use std::f64::consts::PI;

use meander_sojourn::laws::*;
use meander_sojourn::quad::Quadrature;
use meander_sojourn::special::{norm_cdf, norm_sf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn quad() -> Quadrature {
    Quadrature::default()
}

/// `∫_x^∞ e^{−νw} w e^{−w²/2s} / √(2πs³) dw` in closed form.
fn tilted_fp_tail(nu: f64, x: f64, s: f64) -> f64 {
    let c = x + nu * s;
    (0.5 * nu * nu * s).exp() * ((-c * c / (2.0 * s)).exp() / (2.0 * PI * s).sqrt() - nu * norm_sf(c / s.sqrt()))
}

fn free_density_oracle(mu: f64, x: f64, t: f64, s: f64) -> f64 {
    2.0 * (-0.5 * mu * mu * t - 2.0 * mu * x).exp() * tilted_fp_tail(-mu, x, s) * tilted_fp_tail(mu, 0.0, t - s)
}

#[test]
fn free_density_matches_closed_form_tails() {
    for &(mu, x, t) in &[(0.0, 0.0, 1.0), (0.5, 0.3, 1.0), (-0.7, 1.2, 2.0), (1.3, 0.0, 0.5)] {
        for i in 1..20 {
            let s = t * i as f64 / 20.0;
            let got = free_sojourn_density(mu, x, t, s).unwrap();
            let want = free_density_oracle(mu, x, t, s);
            assert!((got - want).abs() <= 1e-9 * want.max(1.0), "mu={mu} x={x} s={s}: {got} vs {want}");
        }
    }
}

#[test]
fn free_law_normalization_random_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let mu = rng.random_range(-1.0..1.0);
        let x = rng.random_range(0.0..1.5);
        let t = rng.random_range(0.2..3.0);
        let law = free_sojourn_law(mu, x, t).unwrap();
        let total = law.total_mass().unwrap();
        assert!((total - 1.0).abs() < 1e-6, "mu={mu} x={x} t={t}: {total}");
    }
    let total = free_sojourn_law(0.5, 0.3, 1.0).unwrap().total_mass().unwrap();
    assert!((total - 1.0).abs() < 1e-6);
}

#[test]
fn free_law_atom_is_no_crossing_probability() {
    let (mu, x, t) = (0.5, 0.3, 1.0);
    let law = free_sojourn_law(mu, x, t).unwrap();
    let expect = norm_cdf((x + mu * t) / t.sqrt()) - (-2.0 * mu * x).exp() * norm_cdf((-x + mu * t) / t.sqrt());
    assert!((law.atom_mass() - expect).abs() < 1e-14);
    assert!(free_sojourn_law(0.0, 0.0, 1.0).unwrap().atoms().is_empty());
}

#[test]
fn driftless_reduction() {
    for x in [0.0, 0.5, 1.3] {
        let general = free_sojourn_law(0.0, x, 1.0).unwrap();
        let closed = free_sojourn_law_mu0(x, 1.0).unwrap();
        for i in 1..50 {
            let s = i as f64 / 50.0;
            assert!((general.density(s) - closed.density(s)).abs() < 1e-8, "x={x} s={s}");
        }
        assert!((general.atom_mass() - closed.atom_mass()).abs() < 1e-12);
        assert!((closed.total_mass().unwrap() - 1.0).abs() < 1e-9);
    }
    let arcsine = free_sojourn_law_mu0(0.0, 1.0).unwrap();
    assert!((arcsine.density(0.5) - 0.636_619_772_367_581_3).abs() < 1e-12);
}

#[test]
fn given_position_is_shifted_free_law() {
    let law = free_sojourn_law(0.3, 0.7, 1.5).unwrap();
    for i in 1..100 {
        let s = 1.5 * i as f64 / 100.0;
        let d = sojourn_density_given_position(0.7, 0.3, 0.5, 2.0, s).unwrap();
        assert!(d >= 0.0);
        assert!((d - law.density(s)).abs() < 1e-12);
    }
    assert!(sojourn_density_given_position(0.7, 0.3, 0.5, 2.0, 1.6).is_err());
}

#[test]
fn joint_forms_agree() {
    for mu in [-0.5, 0.0, 0.7] {
        for i in 1..=10 {
            let s = i as f64 / 11.0;
            for j in 0..10 {
                let x = -2.0 + 4.0 * (j as f64 + 0.5) / 10.0;
                let a = joint_density_v1(mu, 1.0, s, x).unwrap();
                let b = joint_density_v2(mu, 1.0, s, x).unwrap();
                assert!((a - b).abs() <= 1e-8, "mu={mu} s={s} x={x}: {a} vs {b}");
            }
        }
    }
    let a = joint_density_v1(0.5, 1.0, 0.3, 0.2).unwrap();
    let b = joint_density_v2(0.5, 1.0, 0.3, 0.2).unwrap();
    assert!((a - b).abs() < 1e-8);
    assert!(joint_density_v1(0.0, 1.0, 0.5, 0.0).is_err());
}

#[test]
fn joint_density_symmetry_and_edge() {
    for c in [0.2, 1.0, 1.7] {
        let a = joint_density_v1(0.0, 1.0, 0.3, c).unwrap();
        let b = joint_density_v1(0.0, 1.0, 0.7, -c).unwrap();
        assert!((a - b).abs() < 1e-12);
    }
    let small = joint_density_v2(0.0, 1.0, 1e-6, 0.5).unwrap();
    assert!(small < 1e-12, "{small}");
}

#[test]
fn joint_marginal_is_free_density() {
    let (mu, t) = (0.4, 1.0);
    for s in [0.2, 0.5, 0.9] {
        let q = quad();
        let pos = q.gaussian_tail(|x| joint_density_v1(mu, t, s, x).unwrap_or(0.0), 0.0, mu * t, t.sqrt()).unwrap();
        let neg = q.gaussian_tail(|x| joint_density_v1(mu, t, s, -x).unwrap_or(0.0), 0.0, -mu * t, t.sqrt()).unwrap();
        let marginal = pos.value + neg.value;
        let direct = free_sojourn_density(mu, 0.0, t, s).unwrap();
        assert!((marginal - direct).abs() < 1e-6, "s={s}: {marginal} vs {direct}");
    }
}

#[test]
fn elastic_forms_agree() {
    let a = elastic_transition_density(0.5, 0.3, 0.7, 1.0).unwrap();
    let b = elastic_transition_density_integral_form(0.5, 0.3, 0.7, 1.0).unwrap();
    assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    for &(mu, y, x, t) in &[(0.0, 0.0, 0.4, 1.0), (1.2, 0.8, 0.1, 0.3), (0.3, 0.0, 2.0, 2.5)] {
        let a = elastic_transition_density(mu, y, x, t).unwrap();
        let b = elastic_transition_density_integral_form(mu, y, x, t).unwrap();
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn elastic_density_is_subprobability() {
    for mu in [0.0, 0.5, 2.0] {
        let mass = quad()
            .gaussian_tail(|x| elastic_transition_density(mu, 0.3, x, 1.0).unwrap(), 0.0, 0.3, 1.0)
            .unwrap()
            .value;
        assert!(mass <= 1.0 + 1e-10, "mu={mu}: {mass}");
        if mu == 0.0 {
            assert!((mass - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn elastic_product_matches_free_density() {
    let d = sojourn_law_as_elastic_product(0.0, 0.0, 1.0, 0.5).unwrap();
    assert!((d - 2.0 / PI).abs() < 1e-12);
    for mu in [0.0, 0.3, 0.7, -0.4] {
        for x in [0.0, 0.2, 0.9] {
            for i in 1..10 {
                let s = i as f64 / 10.0;
                let a = sojourn_law_as_elastic_product(mu, x, 1.0, s).unwrap();
                let b = free_sojourn_density(mu, x, 1.0, s).unwrap();
                assert!(a >= 0.0);
                assert!((a - b).abs() < 1e-8, "mu={mu} x={x} s={s}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn meander_endpoint_normalization_and_limits() {
    let ep = MeanderEndpoint::finite_u(0.5, 0.3, 1.0).unwrap();
    let (c, s) = ep.envelope();
    let mass = quad().gaussian_tail(|y| ep.density(y), 0.0, c, s).unwrap().value;
    assert!((mass - 1.0).abs() < 1e-8);
    // The kernel integrates to the survival probability of the start.
    let surv = meander_sojourn::special::no_crossing_probability(0.3, 0.5, 1.0);
    assert!((ep.normalizer() - surv).abs() < 1e-10);

    for y in [0.2, 1.0, 2.5] {
        let d = meander_endpoint_density(1e-5, 0.0, 1.0, y).unwrap();
        assert!((d - y * (-y * y / 2.0).exp()).abs() < 1e-6, "y={y}");
    }
    assert!(meander_endpoint_density(0.0, 0.0, 1.0, 1.0).is_err());
}

#[test]
fn limit_endpoint_density() {
    let d = meander_limit_endpoint_density(0.0, 1.0, 1.0).unwrap();
    assert!((d - (-0.5f64).exp()).abs() < 1e-12);
    for &(mu, l) in &[(0.8, 1.0), (-0.6, 2.0)] {
        let ep = MeanderEndpoint::limit(mu, l).unwrap();
        // Closed-form normalizer of y e^{−(y−μl)²/2l}.
        let c = mu * l;
        let z = l * (-c * c / (2.0 * l)).exp() + c * (2.0 * PI * l).sqrt() * norm_cdf(c / l.sqrt());
        assert!((ep.normalizer() - z).abs() < 1e-10 * z, "{} vs {z}", ep.normalizer());
        // Mode solves 1/y − y/l + μ = 0.
        let mode = 0.5 * l * (mu + (mu * mu + 4.0 / l).sqrt());
        let h = 1e-4;
        assert!(ep.density(mode) > ep.density(mode - h) && ep.density(mode) > ep.density(mode + h));
    }
}

#[test]
fn finite_u_meander_law() {
    let law = meander_sojourn_law_finite_u(0.3, 0.2, 1.0, 2.0).unwrap();
    let total = law.total_mass().unwrap();
    assert!((total - 1.0).abs() < 1e-6, "{total}");

    // Independent route: mix the free law from y over the endpoint law directly.
    let ep = MeanderEndpoint::finite_u(0.3, 0.2, 1.0).unwrap();
    let (c, sg) = ep.envelope();
    for s in [0.1, 0.5, 0.9] {
        let nested = quad()
            .gaussian_tail(|y| ep.density(y) * free_sojourn_density(0.2, y, 1.0, s).unwrap_or(0.0), 0.0, c, sg)
            .unwrap()
            .value;
        assert!((law.density(s) - nested).abs() < 1e-8, "s={s}: {} vs {nested}", law.density(s));
    }
}

#[test]
fn finite_u_approaches_limit() {
    let limit = meander_limit_law(1.0, 2.0).unwrap();
    let mut prev = f64::INFINITY;
    for u in [0.4, 0.1, 0.01, 0.001] {
        let law = meander_sojourn_law_finite_u(u, 0.0, 1.0, 2.0).unwrap();
        let gap = (1..10)
            .map(|i| {
                let s = i as f64 / 10.0;
                (law.density(s) - limit.density(s)).abs()
            })
            .fold(0.0, f64::max);
        assert!(gap < prev, "u={u}: {gap}");
        prev = gap;
    }
    assert!(prev < 1e-5, "{prev}");
}

#[test]
fn drifted_limit_mixture_reduces_to_closed_form() {
    let mixture = meander_limit_law_with_drift(0.0, 1.0, 2.0).unwrap();
    let closed = meander_limit_law(1.0, 2.0).unwrap();
    for i in 1..20 {
        let s = i as f64 / 20.0;
        assert!((mixture.density(s) - closed.density(s)).abs() < 1e-8);
    }
    assert!((mixture.atom_mass() - 0.5f64.sqrt()).abs() < 1e-8);
    let drifted = meander_limit_law_with_drift(0.6, 1.0, 2.0).unwrap();
    assert!((drifted.total_mass().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn limit_law_against_rayleigh_mixture() {
    let (l, t, s) = (1.0, 2.0, 0.5);
    let oracle = quad()
        .gaussian_tail(
            |y| y / l * (-y * y / (2.0 * l)).exp() * (-y * y / (2.0 * s)).exp() / (PI * (s * (t - l - s)).sqrt()),
            0.0,
            0.0,
            1.0,
        )
        .unwrap()
        .value;
    let law = meander_limit_law(l, t).unwrap();
    assert!((law.density(s) - oracle).abs() < 1e-10);
    assert!((oracle - 2.0 / (3.0 * PI)).abs() < 1e-10);
}

#[test]
fn limit_law_cdf_matches_quadrature() {
    for &(l, t) in &[(1.0, 2.0), (1.0, 4.0), (0.3, 1.0)] {
        let law = meander_limit_law(l, t).unwrap();
        let w = t - l;
        let mass = law.continuous_mass().unwrap();
        assert!((mass - (1.0 - (l / t).sqrt())).abs() < 1e-8);
        for i in 0..=50 {
            let z = w * i as f64 / 50.0;
            let by_quad = quad().sqrt_singular_range(|s| law.density(s), w, 0.0, z).unwrap().value;
            let closed = meander_limit_cdf(l, t, z).unwrap();
            assert!((by_quad - closed).abs() <= 1e-8, "l={l} t={t} z={z}");
        }
    }
}

#[test]
fn excursion_law_identities() {
    for &(l, t) in &[(1.0, 2.0), (0.2, 3.0), (2.5, 3.0)] {
        let law = excursion_sojourn_law(l, t).unwrap();
        let w = t - l;
        assert!((law.continuous_mass().unwrap() - 1.0).abs() < 1e-8);
        let mean = law.integrate_density(&quad(), |s| s).unwrap();
        assert!((mean - excursion_sojourn_mean(l, t).unwrap()).abs() < 1e-8);
        for i in 1..50 {
            let z = w * i as f64 / 50.0;
            let by_quad = quad().sqrt_singular_range(|s| law.density(s), w, 0.0, z).unwrap().value;
            assert!((by_quad - excursion_sojourn_cdf(l, t, z).unwrap()).abs() < 1e-8);
        }
    }
}

#[test]
fn excursion_half_window_specialization() {
    let t = 2.0;
    for i in 1..=50 {
        let s = (t / 2.0) * i as f64 / 51.0;
        let d = excursion_sojourn_density(t / 2.0, t, s).unwrap();
        assert!((d - 4.0 * s / (t * (t * t - 4.0 * s * s).sqrt())).abs() < 1e-12);
        let f = excursion_sojourn_cdf(t / 2.0, t, s).unwrap();
        assert!((f - (1.0 - (t * t - 4.0 * s * s).sqrt() / t)).abs() < 1e-12);
    }
}

#[test]
fn excursion_endpoint_is_rayleigh() {
    let sigma = excursion_endpoint_scale(1.0, 2.0).unwrap();
    let mass = quad()
        .gaussian_tail(|y| excursion_endpoint_density(1.0, 2.0, y).unwrap_or(0.0), 0.0, 0.0, sigma)
        .unwrap()
        .value;
    assert!((mass - 1.0).abs() < 1e-10);
}

#[test]
fn bridge_from_u_is_normalized() {
    for u in [0.05, 0.5, 1.5] {
        let law = bridge_sojourn_law_from_u(u, 1.0).unwrap();
        let mass = law.continuous_mass().unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "u={u}: {mass}");
    }
}

#[test]
fn law_kind_dispatch() {
    let p = ProcessParams { mu: 0.0, t: 2.0, l: 1.0, u: 0.3, x: 0.2 };
    for kind in LawKind::ALL {
        let law = kind.build(&p).unwrap();
        let mass = law.total_mass().unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "{kind}: {mass}");
    }
}
