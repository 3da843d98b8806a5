//! Gaussian tail functions and Brownian first-passage quantities.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::erfc;

/// Standard normal density.
pub fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Standard normal distribution function `Φ(z)`.
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Upper tail `1 − Φ(z)`, accurate far into the right tail.
pub fn norm_sf(z: f64) -> f64 {
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

/// `ln(1 − Φ(z))`, finite for every finite `z`.
pub fn ln_norm_sf(z: f64) -> f64 {
    if z < 30.0 {
        return norm_sf(z).ln();
    }
    // Mills ratio asymptotics.
    let z2 = z * z;
    let series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
    -0.5 * z2 - z.ln() - 0.5 * (2.0 * PI).ln() + series.ln()
}

/// `e^a · (1 − Φ(z))` without intermediate overflow.
pub fn exp_times_sf(a: f64, z: f64) -> f64 {
    (a + ln_norm_sf(z)).exp()
}

/// First-passage density of Brownian motion to a level at distance `w`:
/// `w e^{−w²/2s} / √(2π s³)`.
pub fn first_passage_density(w: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    w * (-w * w / (2.0 * s)).exp() / (2.0 * PI * s * s * s).sqrt()
}

/// Probability that `x + B(r) + μr` stays positive for `r ∈ [0, t]`.
pub fn no_crossing_probability(mu: f64, x: f64, t: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let sq = t.sqrt();
    let p = norm_cdf((x + mu * t) / sq) - exp_times_sf(-2.0 * mu * x, (x - mu * t) / sq);
    p.clamp(0.0, 1.0)
}

/// Probability that a Brownian bridge of duration `dt` between two
/// nonnegative values touches zero.
pub fn bridge_crossing_probability(a: f64, b: f64, dt: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 {
        return 1.0;
    }
    (-2.0 * a * b / dt).exp()
}
