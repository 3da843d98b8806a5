use meander_sojourn::fkpde::*;
use meander_sojourn::laws::{free_sojourn_law, free_sojourn_law_mu0, meander_limit_law};
use meander_sojourn::sim::{simulate, CampaignLaw};
use meander_sojourn::{ProcessParams, SimConfig};

/// `e^{−β/2} I₀(β/2)` by its power series.
fn arcsine_laplace(beta: f64) -> f64 {
    let z = 0.25 * beta * beta / 4.0;
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 1..60 {
        term *= z / (k * k) as f64;
        sum += term;
    }
    (-0.5 * beta).exp() * sum
}

#[test]
fn free_motion_sweep_within_tolerance() {
    let t = 1.0;
    for mu in [-0.5, 0.0, 0.5] {
        for beta in [0.5, 1.0, 2.0] {
            let sol = solve_fk(&FkGrid::standard(mu, beta, t), t).unwrap();
            for x in [0.0, 0.5, 1.0] {
                let exact = laplace_of_law(&free_sojourn_law(mu, x, t).unwrap(), beta).unwrap();
                let got = sol.value_at(x);
                assert!((got - exact).abs() <= 1e-3, "mu {mu} beta {beta} x {x}: {got} vs {exact}");
            }
        }
    }
}

#[test]
fn arcsine_laplace_transform() {
    let sol = solve_fk(&FkGrid::standard(0.0, 1.0, 1.0), 1.0).unwrap();
    let series = arcsine_laplace(1.0);
    let quad = laplace_of_law(&free_sojourn_law_mu0(0.0, 1.0).unwrap(), 1.0).unwrap();
    assert!((series - quad).abs() < 1e-10, "{series} vs {quad}");
    assert!((sol.value_at(0.0) - series).abs() < 1e-3);
}

#[test]
fn zero_potential_and_far_left_limit() {
    let sol = solve_fk(&FkGrid::standard(0.4, 0.0, 2.0), 2.0).unwrap();
    assert!(sol.values.iter().flatten().all(|w| (w - 1.0).abs() < 1e-12));
    let sol = solve_fk(&FkGrid::standard(0.0, 1.0, 1.0), 1.0).unwrap();
    assert!((sol.value_at(-6.0) - 1.0).abs() < 1e-6);
}

#[test]
fn bounded_and_monotone() {
    let t = 1.0;
    let betas = [0.5, 1.0, 2.0, 4.0];
    let sols: Vec<FkSolution> = betas.iter().map(|&b| solve_fk(&FkGrid::standard(0.0, b, t), t).unwrap()).collect();
    for sol in &sols {
        assert!(sol.values.iter().flatten().all(|&w| 0.0 < w && w <= 1.0 + 1e-12));
        let last = sol.final_slice();
        assert!(last.windows(2).all(|p| p[1] <= p[0] + 1e-12));
    }
    for pair in sols.windows(2) {
        for (i, (a, b)) in pair[0].final_slice().iter().zip(pair[1].final_slice()).enumerate() {
            assert!(*b <= a + 1e-12, "node {i}: {b} > {a}");
        }
    }
}

#[test]
fn transformation_agrees_and_improves_with_refinement() {
    let same = check_transformation(&FkGrid::standard(0.0, 1.0, 1.0), 1.0).unwrap();
    assert!(same < 1e-12, "{same}");
    let fine = check_transformation(&FkGrid::standard(0.5, 1.0, 1.0), 1.0).unwrap();
    assert!(fine <= 1e-3, "{fine}");
    let coarse_grid = FkGrid { nx: 501, dt: 1.0 / 500.0, ..FkGrid::standard(0.5, 1.0, 1.0) };
    let coarse = check_transformation(&coarse_grid, 1.0).unwrap();
    assert!(fine < coarse, "{fine} vs {coarse}");
}

#[test]
fn central_differencing_is_sharper() {
    let (mu, beta, x) = (0.5, 1.0, 0.5);
    let exact = laplace_of_law(&free_sojourn_law(mu, x, 1.0).unwrap(), beta).unwrap();
    let upwind = solve_fk(&FkGrid::standard(mu, beta, 1.0), 1.0).unwrap().value_at(x);
    let grid = FkGrid { drift: DriftScheme::Central, ..FkGrid::standard(mu, beta, 1.0) };
    let central = solve_fk(&grid, 1.0).unwrap().value_at(x);
    assert!((central - exact).abs() < (upwind - exact).abs());
    assert!((central - exact).abs() < 1e-4);
}

#[test]
fn laplace_limits() {
    let law = meander_limit_law(1.0, 2.0).unwrap();
    assert!((laplace_of_law(&law, 0.0).unwrap() - 1.0).abs() < 1e-8);
    let arcsine = free_sojourn_law_mu0(0.0, 1.0).unwrap();
    assert!(laplace_of_law(&arcsine, 1e6).unwrap() < 1e-3);
}

#[test]
fn laplace_matches_monte_carlo() {
    let p = ProcessParams { l: 1.0, t: 2.0, ..Default::default() };
    let cfg = SimConfig { n_paths: 20_000, n_steps: 1024, seed: 21, streams: 8 };
    let records = simulate(CampaignLaw::MeanderLimit, &p, &cfg).unwrap();
    let v: Vec<f64> = records.iter().map(|r| (-r.gamma).exp()).collect();
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let se = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    let exact = laplace_of_law(&meander_limit_law(1.0, 2.0).unwrap(), 1.0).unwrap();
    assert!((m - exact).abs() < 3.0 * se, "{m} ± {se} vs {exact}");
}

#[test]
fn slice_csv_layout() {
    let grid = FkGrid { x_min: -1.0, x_max: 1.0, nx: 3, dt: 0.5, beta: 1.0, mu: 0.0, drift: DriftScheme::Upwind };
    let sol = solve_fk(&grid, 1.0).unwrap();
    let mut buf = Vec::new();
    sol.write_slice_csv(sol.times.len() - 1, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "x,w");
    let right: f64 = lines[3].split(',').nth(1).unwrap().parse().unwrap();
    // Two steps of (1 − βdt/2)/(1 + βdt/2).
    assert!((right - 0.36).abs() < 1e-15, "{right}");
}
