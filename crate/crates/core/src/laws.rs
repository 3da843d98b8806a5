//! Sojourn-time laws of bridges, free drifted Brownian motion, meanders
//! and excursions.
//!
//! Throughout, `B^μ(r) = B(r) + μr` and `Γ^μ_{l,t}` is the time spent in
//! `[0, ∞)` during `[l, t]`. Laws are returned as [`MixedSojournLaw`]s;
//! where an atom exists it sits at the right end of the support and
//! carries the probability that the path never goes negative.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mixed::{Atom, MixedSojournLaw, RealFn};
use crate::quad::{gaussian_cutoff_sigmas, PanelIntegral, QuadError, QuadResult, Quadrature};
use crate::special::{exp_times_sf, first_passage_density, no_crossing_probability};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum LawError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

pub type LawResult<T> = Result<T, LawError>;

fn require(cond: bool, msg: impl FnOnce() -> String) -> LawResult<()> {
    if cond {
        Ok(())
    } else {
        Err(LawError::Domain(msg()))
    }
}

fn finite(name: &str, v: f64) -> LawResult<()> {
    require(v.is_finite(), || format!("{name} = {v} is not finite"))
}

/// Parameters shared by all laws. Not every law uses every field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessParams {
    /// Drift.
    pub mu: f64,
    /// Horizon.
    pub t: f64,
    /// Length of the meander window `[0, l]`.
    pub l: f64,
    /// Meander start level.
    pub u: f64,
    /// Start level of free motion.
    pub x: f64,
}

impl Default for ProcessParams {
    fn default() -> Self {
        Self { mu: 0.0, t: 1.0, l: 0.0, u: 0.0, x: 0.0 }
    }
}

impl ProcessParams {
    pub fn validate(&self) -> LawResult<()> {
        for (name, v) in [("mu", self.mu), ("t", self.t), ("l", self.l), ("u", self.u), ("x", self.x)] {
            finite(name, v)?;
        }
        require(self.t > 0.0, || format!("t = {} must be positive", self.t))?;
        require(0.0 <= self.l && self.l < self.t, || format!("l = {} must lie in [0, t)", self.l))?;
        require(self.u >= 0.0, || format!("u = {} must be nonnegative", self.u))
    }

    /// Length `t − l` of the observation window.
    pub fn window(&self) -> f64 {
        self.t - self.l
    }
}

fn value_or_nan(r: Result<QuadResult, QuadError>) -> f64 {
    match r {
        Ok(r) => r.value,
        Err(QuadError::MaxSubdivisions { best, .. }) => best.value,
        Err(_) => f64::NAN,
    }
}

fn open_interval(s: f64, hi: f64) -> LawResult<()> {
    require(s > 0.0 && s < hi, || format!("s = {s} outside (0, {hi})"))
}

// ---------------------------------------------------------------- bridges

/// Density of `Γ_t` for the Brownian bridge from 0 to 0: uniform on `(0, t)`.
pub fn bridge_sojourn_density(t: f64, s: f64) -> LawResult<f64> {
    require(t > 0.0, || format!("t = {t} must be positive"))?;
    open_interval(s, t)?;
    Ok(1.0 / t)
}

/// Uniform law of `Γ_t` for the zero-to-zero bridge.
pub fn bridge_sojourn_law(t: f64) -> LawResult<MixedSojournLaw> {
    require(t > 0.0 && t.is_finite(), || format!("t = {t} must be positive"))?;
    Ok(MixedSojournLaw::new(0.0, t, Arc::new(move |_| 1.0 / t), vec![]).with_continuous_cdf(Arc::new(move |z| z / t)))
}

/// Density of `Γ_t` for the bridge from `u > 0` at time 0 to 0 at time `t`.
///
/// The integrand's `(t − w)^{−3/2}` factor is removed by `v = (t − w)^{−1/2}`.
/// The density grows like `(t − s)^{−1/2}` at the right end and is infinite at `s = t`.
pub fn bridge_sojourn_density_from_u(u: f64, t: f64, s: f64) -> LawResult<f64> {
    finite("u", u)?;
    require(u > 0.0, || format!("u = {u} must be positive; use bridge_sojourn_density for u = 0"))?;
    require(t > 0.0 && t.is_finite(), || format!("t = {t} must be positive"))?;
    require((0.0..=t).contains(&s), || format!("s = {s} outside [0, {t}]"))?;
    if s == 0.0 {
        return Ok(0.0);
    }
    if s == t {
        return Ok(f64::INFINITY);
    }
    let g = |v: f64| {
        let w = t - 1.0 / (v * v);
        if w <= 0.0 {
            return 0.0;
        }
        2.0 * u * (-u * u / (2.0 * w)).exp() / (w * w.sqrt())
    };
    let r = Quadrature::default().finite(g, 1.0 / t.sqrt(), 1.0 / (t - s).sqrt())?;
    Ok((t / (2.0 * PI)).sqrt() * (u * u / (2.0 * t)).exp() * r.value)
}

/// Law of `Γ_t` for the bridge from `u` to 0. At `u = 0` this is uniform.
pub fn bridge_sojourn_law_from_u(u: f64, t: f64) -> LawResult<MixedSojournLaw> {
    if u == 0.0 {
        return bridge_sojourn_law(t);
    }
    bridge_sojourn_density_from_u(u, t, 0.5 * t)?;
    let density: RealFn = Arc::new(move |s| bridge_sojourn_density_from_u(u, t, s).unwrap_or(f64::NAN));
    Ok(MixedSojournLaw::new(0.0, t, density, vec![]))
}

// ---------------------------------------------------- free drifted motion

fn check_free(mu: f64, x: f64, t: f64) -> LawResult<()> {
    finite("mu", mu)?;
    finite("x", x)?;
    require(x >= 0.0, || format!("x = {x} must be nonnegative"))?;
    require(t > 0.0 && t.is_finite(), || format!("t = {t} must be positive"))
}

/// `e^{−μ²r/2} ∫_0^∞ e^{−μw} f(w, r) dw` with `f` the first-passage density.
fn tilted_return_integral(quad: &Quadrature, mu: f64, r: f64) -> Result<f64, QuadError> {
    let c = -0.5 * mu * mu * r;
    let f = |w: f64| (c - mu * w).exp() * first_passage_density(w, r);
    Ok(quad.gaussian_tail(f, 0.0, -mu * r, r.sqrt())?.value)
}

/// Density at `s` of the time spent positive during `[0, t]` by `x + B^μ`.
///
/// Computed as the product of two semi-infinite first-passage integrals.
pub fn free_sojourn_density(mu: f64, x: f64, t: f64, s: f64) -> LawResult<f64> {
    check_free(mu, x, t)?;
    open_interval(s, t)?;
    let quad = Quadrature::default();
    let c = -0.5 * mu * mu * s;
    let f = |w: f64| (c + mu * (w - 2.0 * x)).exp() * first_passage_density(w, s);
    let first = quad.gaussian_tail(f, x, mu * s, s.sqrt())?.value;
    let second = tilted_return_integral(&quad, mu, t - s)?;
    Ok(2.0 * first * second)
}

/// Law of the time spent positive during `[0, t]` by `x + B^μ`, `x ≥ 0`.
/// The atom at `t` is the probability of never hitting zero.
pub fn free_sojourn_law(mu: f64, x: f64, t: f64) -> LawResult<MixedSojournLaw> {
    check_free(mu, x, t)?;
    let density: RealFn = Arc::new(move |s| free_sojourn_density(mu, x, t, s).unwrap_or(f64::NAN));
    Ok(MixedSojournLaw::new(0.0, t, density, terminal_atom(t, no_crossing_probability(mu, x, t))))
}

fn terminal_atom(at: f64, mass: f64) -> Vec<Atom> {
    if mass > 0.0 {
        vec![Atom { location: at, mass }]
    } else {
        vec![]
    }
}

/// Driftless special case of [`free_sojourn_law`] in closed form.
pub fn free_sojourn_law_mu0(x: f64, t: f64) -> LawResult<MixedSojournLaw> {
    check_free(0.0, x, t)?;
    let density: RealFn = Arc::new(move |s: f64| (-x * x / (2.0 * s)).exp() / (PI * (s * (t - s)).sqrt()));
    let atoms = terminal_atom(t, no_crossing_probability(0.0, x, t));
    let law = MixedSojournLaw::new(0.0, t, density, atoms);
    Ok(if x == 0.0 { law.with_continuous_cdf(Arc::new(move |z| arcsine_cdf(t, z))) } else { law })
}

fn arcsine_cdf(t: f64, z: f64) -> f64 {
    2.0 / PI * (z / t).clamp(0.0, 1.0).sqrt().asin()
}

/// Density of `Γ^μ_{l,t}` given `B^μ(l) = y`: the free law from `y` over
/// the window of length `t − l`.
pub fn sojourn_density_given_position(y: f64, mu: f64, l: f64, t: f64, s: f64) -> LawResult<f64> {
    require(y > 0.0, || format!("y = {y} must be positive"))?;
    require(l >= 0.0 && l < t, || format!("l = {l} must lie in [0, t)"))?;
    free_sojourn_density(mu, y, t - l, s)
}

// ------------------------------------------------------------- joint law

fn check_joint(mu: f64, t: f64, s: f64, x: f64) -> LawResult<()> {
    finite("mu", mu)?;
    finite("x", x)?;
    require(t > 0.0 && t.is_finite(), || format!("t = {t} must be positive"))?;
    open_interval(s, t)?;
    require(x != 0.0, || "the joint density is not defined at x = 0".to_string())
}

/// Joint density of `(Γ^μ_t, B^μ(t))` from 0, as a single integral over
/// the last zero before `t`.
pub fn joint_density_v1(mu: f64, t: f64, s: f64, x: f64) -> LawResult<f64> {
    check_joint(mu, t, s, x)?;
    let ax = x.abs();
    let g = |r: f64| {
        if r <= 0.0 {
            return 0.0;
        }
        ax * (-ax * ax / (2.0 * r)).exp() / (r * (t - r)).powf(1.5)
    };
    let upper = if x > 0.0 { s } else { t - s };
    let r = Quadrature::default().finite(g, 0.0, upper)?;
    Ok((-0.5 * mu * mu * t + mu * x).exp() / (2.0 * PI) * r.value)
}

/// Same joint density as [`joint_density_v1`], as a Gaussian integral over `(0, ∞)`.
pub fn joint_density_v2(mu: f64, t: f64, s: f64, x: f64) -> LawResult<f64> {
    check_joint(mu, t, s, x)?;
    let r = t - s;
    let sigma = (s * r / t).sqrt();
    let res = if x > 0.0 {
        let g = |z: f64| z * (z + x) * (-(z + x).powi(2) / (2.0 * s) - z * z / (2.0 * r)).exp();
        Quadrature::default().gaussian_tail(g, 0.0, -x * r / t, sigma)?
    } else {
        let g = |z: f64| z * (z - x) * (-z * z / (2.0 * s) - (z - x).powi(2) / (2.0 * r)).exp();
        Quadrature::default().gaussian_tail(g, 0.0, x * s / t, sigma)?
    };
    Ok((-0.5 * mu * mu * t + mu * x).exp() / (PI * (s * r).powf(1.5)) * res.value)
}

// ------------------------------------------------------ meander endpoint

/// Law of the meander's position `B^μ(l)`, either started at `u > 0` or in
/// the `u ↓ 0` limit. The normalizing constant is computed once.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanderEndpoint {
    u: f64,
    mu: f64,
    l: f64,
    norm: f64,
}

impl MeanderEndpoint {
    /// Endpoint of the drifted meander started at `u > 0`.
    pub fn finite_u(u: f64, mu: f64, l: f64) -> LawResult<Self> {
        finite("u", u)?;
        finite("mu", mu)?;
        require(u > 0.0, || format!("u = {u} must be positive; use MeanderEndpoint::limit"))?;
        require(l > 0.0 && l.is_finite(), || format!("l = {l} must be positive"))?;
        let mut ep = Self { u, mu, l, norm: 1.0 };
        let (c, s) = ep.envelope();
        ep.norm = Quadrature::default().gaussian_tail(|y| ep.kernel(y), 0.0, c, s)?.value;
        require(ep.norm > 0.0, || format!("meander from u = {u} has vanishing survival probability"))?;
        Ok(ep)
    }

    /// Endpoint of the meander started at 0 (the `u ↓ 0` limit).
    pub fn limit(mu: f64, l: f64) -> LawResult<Self> {
        finite("mu", mu)?;
        require(l > 0.0 && l.is_finite(), || format!("l = {l} must be positive"))?;
        let mut ep = Self { u: 0.0, mu, l, norm: 1.0 };
        let (c, s) = ep.envelope();
        ep.norm = Quadrature::default().gaussian_tail(|y| ep.kernel(y), 0.0, c, s)?.value;
        Ok(ep)
    }

    pub fn start(&self) -> f64 {
        self.u
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// Centre and width of a Gaussian envelope of the density.
    pub fn envelope(&self) -> (f64, f64) {
        (self.u + self.mu * self.l, self.l.sqrt())
    }

    /// Unnormalized density.
    fn kernel(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let (c, _) = self.envelope();
        let gauss = (-(y - c).powi(2) / (2.0 * self.l)).exp();
        if self.u > 0.0 {
            // Reflection kernel times the Girsanov weight.
            gauss * -(-2.0 * y * self.u / self.l).exp_m1() / (2.0 * PI * self.l).sqrt()
        } else {
            y * gauss
        }
    }

    /// Normalizing constant of the kernel. For `u > 0` this is the
    /// probability that the meander survives to time `l`.
    pub fn normalizer(&self) -> f64 {
        self.norm
    }

    pub fn density(&self, y: f64) -> f64 {
        self.kernel(y) / self.norm
    }

    /// `P(B^μ(l) ≤ y)` by quadrature.
    pub fn cdf(&self, y: f64) -> LawResult<f64> {
        if y <= 0.0 {
            return Ok(0.0);
        }
        let (c, s) = self.envelope();
        let hi = c.max(0.0) + gaussian_cutoff_sigmas() * s;
        if y >= hi {
            return Ok(1.0);
        }
        Ok(Quadrature::default().finite(|v| self.density(v), 0.0, y)?.value.min(1.0))
    }
}

/// Normalized density of the meander position at time `l` started at `u > 0`.
pub fn meander_endpoint_density(u: f64, mu: f64, l: f64, y: f64) -> LawResult<f64> {
    let ep = MeanderEndpoint::finite_u(u, mu, l)?;
    require(y > 0.0, || format!("y = {y} must be positive"))?;
    Ok(ep.density(y))
}

/// Normalized density `∝ y e^{−y²/2l + μy}` of the limit meander position.
pub fn meander_limit_endpoint_density(mu: f64, l: f64, y: f64) -> LawResult<f64> {
    let ep = MeanderEndpoint::limit(mu, l)?;
    require(y > 0.0, || format!("y = {y} must be positive"))?;
    Ok(ep.density(y))
}

// -------------------------------------------------------- meander laws

/// Mixes the free law from `y` over the window `[l, t]` against the meander
/// endpoint law.
///
/// The `y`-integral is exchanged with the inner first-passage integral, so
/// each density evaluation needs one semi-infinite quadrature against the
/// tabulated `M(w) = ∫_0^w m(y) e^{−2μy} dy`.
fn endpoint_mixture_law(ep: MeanderEndpoint, t: f64) -> LawResult<MixedSojournLaw> {
    let (mu, l) = (ep.mu, ep.l);
    require(l < t, || format!("l = {l} must be less than t = {t}"))?;
    let window = t - l;
    let (c, sigma) = ep.envelope();
    let cut = gaussian_cutoff_sigmas();
    let w_max = c.max(c - 2.0 * mu * l).max(0.0) + cut * sigma;
    let table = PanelIntegral::build(|y| ep.density(y) * (-2.0 * mu * y).exp(), w_max, 512)?;
    let table = Arc::new(table);

    let quad = Quadrature::default();
    let atom = quad
        .gaussian_tail(|y| ep.density(y) * no_crossing_probability(mu, y, window), 0.0, c, sigma)?
        .value;

    let density: RealFn = Arc::new(move |s: f64| {
        let quad = Quadrature::default();
        let m = |w: f64| if w >= w_max { table.total() } else { table.eval(w) };
        let cs = -0.5 * mu * mu * s;
        let f = |w: f64| (cs + mu * w).exp() * first_passage_density(w, s) * m(w);
        let first = value_or_nan(quad.gaussian_tail(f, 0.0, mu * s, s.sqrt()));
        let second = tilted_return_integral(&quad, mu, window - s).unwrap_or(f64::NAN);
        2.0 * first * second
    });
    Ok(MixedSojournLaw::new(0.0, window, density, terminal_atom(window, atom)))
}

/// Law of `Γ^μ_{l,t}` for the meander on `[0, l]` started at `u > 0`,
/// continued as free drifted motion on `[l, t]`.
pub fn meander_sojourn_law_finite_u(u: f64, mu: f64, l: f64, t: f64) -> LawResult<MixedSojournLaw> {
    require(t > 0.0 && t.is_finite(), || format!("t = {t} must be positive"))?;
    require(l > 0.0 && l < t, || format!("l = {l} must lie in (0, t)"))?;
    endpoint_mixture_law(MeanderEndpoint::finite_u(u, mu, l)?, t)
}

/// Law of `Γ^μ_{l,t}` for the meander started at 0, for any drift. The
/// driftless case agrees with [`meander_limit_law`].
pub fn meander_limit_law_with_drift(mu: f64, l: f64, t: f64) -> LawResult<MixedSojournLaw> {
    require(t > 0.0 && t.is_finite(), || format!("t = {t} must be positive"))?;
    require(l > 0.0 && l < t, || format!("l = {l} must lie in (0, t)"))?;
    endpoint_mixture_law(MeanderEndpoint::limit(mu, l)?, t)
}

fn check_lt(l: f64, t: f64) -> LawResult<()> {
    finite("l", l)?;
    require(t > 0.0 && t.is_finite(), || format!("t = {t} must be positive"))?;
    require(l >= 0.0 && l < t, || format!("l = {l} must lie in [0, t)"))
}

/// Driftless limit meander law on `(0, t − l)` with atom `√(l/t)` at `t − l`.
/// At `l = 0` this is the arcsine law.
pub fn meander_limit_law(l: f64, t: f64) -> LawResult<MixedSojournLaw> {
    check_lt(l, t)?;
    let w = t - l;
    let density: RealFn = Arc::new(move |s: f64| s / (PI * (s * (w - s)).sqrt() * (s + l)));
    let cdf: RealFn = Arc::new(move |z| meander_limit_cdf(l, t, z.clamp(0.0, w)).unwrap_or(f64::NAN));
    let atoms = terminal_atom(w, (l / t).sqrt());
    Ok(MixedSojournLaw::new(0.0, w, density, atoms).with_continuous_cdf(cdf))
}

/// `P(Γ_{l,t} ≤ z)` for `0 ≤ z < t − l` under the driftless limit meander.
/// At `z = t − l` the atom is excluded, giving `1 − √(l/t)`.
pub fn meander_limit_cdf(l: f64, t: f64, z: f64) -> LawResult<f64> {
    check_lt(l, t)?;
    let w = t - l;
    require((0.0..=w).contains(&z), || format!("z = {z} outside [0, {w}]"))?;
    let a = (z / w).sqrt().min(1.0).asin();
    let b = if l == 0.0 { 0.0 } else { (z * t / ((l + z) * w)).sqrt().min(1.0).asin() };
    Ok(2.0 / PI * (a - (l / t).sqrt() * b))
}

// ------------------------------------------------------------- excursion

/// Density of `Γ_{l,t}` for the generalized excursion. It does not depend on the drift.
pub fn excursion_sojourn_density(l: f64, t: f64, s: f64) -> LawResult<f64> {
    check_lt(l, t)?;
    let w = t - l;
    open_interval(s, w)?;
    if l == 0.0 {
        return Ok(1.0 / t);
    }
    let ratio = (l / w).sqrt();
    let first = (t - 2.0 * l) / (l * w).sqrt();
    let second = (t - 2.0 * (l + s)) / ((l + s) * (w - s)).sqrt();
    Ok(ratio * (first - second) / t)
}

/// Distribution function of the excursion sojourn time on `[0, t − l]`.
pub fn excursion_sojourn_cdf(l: f64, t: f64, sbar: f64) -> LawResult<f64> {
    check_lt(l, t)?;
    let w = t - l;
    require((0.0..=w).contains(&sbar), || format!("sbar = {sbar} outside [0, {w}]"))?;
    if l == 0.0 {
        return Ok(sbar / t);
    }
    let v = (sbar + l) * (t - 2.0 * l) / (t * w) + l / w - 2.0 / t * (l / w).sqrt() * ((l + sbar) * (w - sbar)).sqrt();
    Ok(v.clamp(0.0, 1.0))
}

/// Mean of the excursion sojourn time.
pub fn excursion_sojourn_mean(l: f64, t: f64) -> LawResult<f64> {
    check_lt(l, t)?;
    let w = t - l;
    Ok(0.5 * t * (l / w).sqrt() * (l / t).sqrt().acos() + 0.5 * (t - 2.0 * l))
}

/// Excursion sojourn law; absolutely continuous, no atom.
pub fn excursion_sojourn_law(l: f64, t: f64) -> LawResult<MixedSojournLaw> {
    check_lt(l, t)?;
    let w = t - l;
    let density: RealFn = Arc::new(move |s| excursion_sojourn_density(l, t, s).unwrap_or(0.0));
    let cdf: RealFn = Arc::new(move |z| excursion_sojourn_cdf(l, t, z.clamp(0.0, w)).unwrap_or(f64::NAN));
    Ok(MixedSojournLaw::new(0.0, w, density, vec![]).with_continuous_cdf(cdf))
}

/// Rayleigh scale `σ` of the excursion position at time `l`: `σ² = l(t − l)/t`.
pub fn excursion_endpoint_scale(l: f64, t: f64) -> LawResult<f64> {
    check_lt(l, t)?;
    require(l > 0.0, || "the excursion endpoint is degenerate at l = 0".to_string())?;
    Ok((l * (t - l) / t).sqrt())
}

/// Density of the excursion position at time `l`.
pub fn excursion_endpoint_density(l: f64, t: f64, y: f64) -> LawResult<f64> {
    let sigma = excursion_endpoint_scale(l, t)?;
    require(y > 0.0, || format!("y = {y} must be positive"))?;
    let s2 = sigma * sigma;
    Ok(y / s2 * (-y * y / (2.0 * s2)).exp())
}

// ------------------------------------------------------------- elastic

fn gauss_kernel(z: f64, t: f64) -> f64 {
    (-z * z / (2.0 * t)).exp() / (2.0 * PI * t).sqrt()
}

/// Elastic kernel for any sign of `mu`; negative rates are the analytic
/// continuation of the erfc form.
pub(crate) fn elastic_kernel_signed(mu: f64, y: f64, x: f64, t: f64) -> f64 {
    let a = x + y;
    let tail = exp_times_sf(mu * a + 0.5 * mu * mu * t, (a + mu * t) / t.sqrt());
    gauss_kernel(x - y, t) + gauss_kernel(a, t) - 2.0 * mu * tail
}

fn check_elastic(mu: f64, y: f64, x: f64, t: f64) -> LawResult<()> {
    for (n, v) in [("mu", mu), ("y", y), ("x", x)] {
        finite(n, v)?;
    }
    require(mu >= 0.0, || format!("mu = {mu}: negative killing rates are not supported"))?;
    require(x >= 0.0 && y >= 0.0, || format!("x = {x}, y = {y} must be nonnegative"))?;
    require(t > 0.0 && t.is_finite(), || format!("t = {t} must be positive"))
}

/// Transition density from `y` to `x` in time `t` of reflecting Brownian
/// motion killed at rate `μ` per unit local time at 0.
pub fn elastic_transition_density(mu: f64, y: f64, x: f64, t: f64) -> LawResult<f64> {
    check_elastic(mu, y, x, t)?;
    Ok(elastic_kernel_signed(mu, y, x, t))
}

/// Same density written with the exponentially tilted first-passage tail,
/// evaluated by quadrature.
pub fn elastic_transition_density_integral_form(mu: f64, y: f64, x: f64, t: f64) -> LawResult<f64> {
    check_elastic(mu, y, x, t)?;
    let a = x + y;
    let f = |w: f64| (mu * (a - w)).exp() * first_passage_density(w, t);
    let tail = Quadrature::default().gaussian_tail(f, a, -mu * t, t.sqrt())?.value;
    Ok(gauss_kernel(x - y, t) - gauss_kernel(a, t) + 2.0 * tail)
}

/// Sojourn density of [`free_sojourn_law`] rebuilt from two independent
/// elastic motions.
pub fn sojourn_law_as_elastic_product(mu: f64, x: f64, t: f64, s: f64) -> LawResult<f64> {
    check_free(mu, x, t)?;
    open_interval(s, t)?;
    let left = elastic_kernel_signed(-mu, 0.0, x, s);
    let right = elastic_kernel_signed(mu, 0.0, 0.0, t - s);
    Ok(0.5 * (-0.5 * mu * mu * t - mu * x).exp() * left * right)
}

/// [`free_sojourn_law`] with its density taken from the elastic product.
pub fn elastic_product_law(mu: f64, x: f64, t: f64) -> LawResult<MixedSojournLaw> {
    check_free(mu, x, t)?;
    let density: RealFn = Arc::new(move |s| sojourn_law_as_elastic_product(mu, x, t, s).unwrap_or(f64::NAN));
    Ok(MixedSojournLaw::new(0.0, t, density, terminal_atom(t, no_crossing_probability(mu, x, t))))
}

// ------------------------------------------------------------ dispatch

/// Named laws for front ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawKind {
    Bridge,
    BridgeU,
    Free,
    MeanderU,
    MeanderLimit,
    Excursion,
    Elastic,
}

impl LawKind {
    pub const ALL: [LawKind; 7] = [
        LawKind::Bridge,
        LawKind::BridgeU,
        LawKind::Free,
        LawKind::MeanderU,
        LawKind::MeanderLimit,
        LawKind::Excursion,
        LawKind::Elastic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LawKind::Bridge => "bridge",
            LawKind::BridgeU => "bridge-u",
            LawKind::Free => "free",
            LawKind::MeanderU => "meander-u",
            LawKind::MeanderLimit => "meander-limit",
            LawKind::Excursion => "excursion",
            LawKind::Elastic => "elastic",
        }
    }

    /// Builds the law from the relevant fields of `p`.
    ///
    /// `meander-limit` with nonzero drift uses the mixture representation.
    pub fn build(self, p: &ProcessParams) -> LawResult<MixedSojournLaw> {
        p.validate()?;
        match self {
            LawKind::Bridge => bridge_sojourn_law(p.t),
            LawKind::BridgeU => bridge_sojourn_law_from_u(p.u, p.t),
            LawKind::Free if p.mu == 0.0 => free_sojourn_law_mu0(p.x, p.t),
            LawKind::Free => free_sojourn_law(p.mu, p.x, p.t),
            LawKind::MeanderU => meander_sojourn_law_finite_u(p.u, p.mu, p.l, p.t),
            LawKind::MeanderLimit if p.mu == 0.0 || p.l == 0.0 => meander_limit_law(p.l, p.t),
            LawKind::MeanderLimit => meander_limit_law_with_drift(p.mu, p.l, p.t),
            LawKind::Excursion => excursion_sojourn_law(p.l, p.t),
            LawKind::Elastic => elastic_product_law(p.mu, p.x, p.t),
        }
    }
}

impl fmt::Display for LawKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LawKind {
    type Err = LawError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LawKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| LawError::Domain(format!("unknown law '{s}'")))
    }
}
