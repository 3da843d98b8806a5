//! Adaptive Gauss–Kronrod quadrature.
//!
//! Every integral in this crate goes through one engine: a 7/15-point
//! Gauss–Kronrod pair applied with global adaptive bisection (the interval
//! with the largest error estimate is always split next). Two front-ends
//! reshape the integrand before it reaches the engine:
//!
//! * [`integrate_gaussian_tail`] cuts a semi-infinite range at the point
//!   where a Gaussian envelope has fallen below `1e-18` of its peak.
//! * [`integrate_sqrt_singular`] removes `1/sqrt(s (T - s))` endpoint
//!   singularities with the substitution `s = T sin²θ`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default relative tolerance used throughout the crate.
pub const DEFAULT_REL_TOL: f64 = 1e-10;
/// Absolute error floor; integrals smaller than this are not refined further.
pub const DEFAULT_ABS_TOL: f64 = 1e-14;
/// Maximum number of subintervals before giving up.
pub const MAX_INTERVALS: usize = 10_000;

/// Number of standard deviations at which `exp(-z²/2)` drops below `1e-18`.
pub fn gaussian_cutoff_sigmas() -> f64 {
    (2.0 * 18.0 * std::f64::consts::LN_10).sqrt()
}

/// Integral value together with its error estimate and cost.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub err_est: f64,
    pub n_evals: usize,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum QuadError {
    #[error("subdivision limit of {limit} intervals reached (best estimate {best:?})")]
    MaxSubdivisions { limit: usize, best: QuadResult },
    #[error("integrand returned a non-finite value at x = {at}")]
    NonFinite { at: f64 },
    #[error("invalid integration range [{a}, {b}]")]
    InvalidRange { a: f64, b: f64 },
}

// Kronrod abscissae (positive half, descending) and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// The 15 Kronrod nodes on `[-1, 1]` in ascending order.
pub(crate) fn kronrod_nodes() -> [f64; 15] {
    let mut out = [0.0; 15];
    for i in 0..7 {
        out[i] = -XGK[i];
        out[14 - i] = XGK[i];
    }
    out
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One application of the 15-point Kronrod rule with the QUADPACK error heuristic.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel, QuadError> {
    let centr = 0.5 * (a + b);
    let hlgth = 0.5 * (b - a);
    let check = |x: f64, v: f64| if v.is_finite() { Ok(v) } else { Err(QuadError::NonFinite { at: x }) };

    let fc = check(centr, f(centr))?;
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = hlgth * XGK[j];
        let (x1, x2) = (centr - dx, centr + dx);
        let f1 = check(x1, f(x1))?;
        let f2 = check(x2, f(x2))?;
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = resk * 0.5;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let value = resk * hlgth;
    resabs *= hlgth.abs();
    resasc *= hlgth.abs();
    let mut error = ((resk - resg) * hlgth).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Ok(Panel { a, b, value, error })
}

/// Tolerances and limits for the adaptive engine.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { rel_tol: DEFAULT_REL_TOL, abs_tol: DEFAULT_ABS_TOL, max_intervals: MAX_INTERVALS }
    }
}

impl Quadrature {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }

    /// Integrates `f` over the finite interval `[a, b]`.
    pub fn finite<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<QuadResult, QuadError> {
        if !(a.is_finite() && b.is_finite()) || a > b {
            return Err(QuadError::InvalidRange { a, b });
        }
        if a == b {
            return Ok(QuadResult { value: 0.0, err_est: 0.0, n_evals: 0 });
        }
        let first = gk15(&f, a, b)?;
        let mut n_evals = 15;
        let mut heap = BinaryHeap::with_capacity(64);
        let mut total = first.value;
        let mut total_err = first.error;
        heap.push(first);

        loop {
            let tol = self.abs_tol.max(self.rel_tol * total.abs());
            if total_err <= tol {
                break;
            }
            if heap.len() >= self.max_intervals {
                let best = QuadResult { value: total, err_est: total_err, n_evals };
                return Err(QuadError::MaxSubdivisions { limit: self.max_intervals, best });
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            // Interval collapsed to machine resolution: accept what we have.
            if mid <= worst.a || mid >= worst.b {
                heap.push(Panel { error: 0.0, ..worst });
                total_err -= worst.error;
                continue;
            }
            let left = gk15(&f, worst.a, mid)?;
            let right = gk15(&f, mid, worst.b)?;
            n_evals += 30;
            total += left.value + right.value - worst.value;
            total_err += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
        }

        // Re-sum to shed accumulated rounding from the running updates.
        let value = heap.iter().map(|p| p.value).sum();
        let err_est = heap.iter().map(|p| p.error).sum::<f64>().max(0.0);
        Ok(QuadResult { value, err_est, n_evals })
    }

    /// Integrates `f` over `[a, ∞)` where `|f|` is dominated by a Gaussian
    /// envelope centred at `center` with standard deviation `sigma` (times
    /// at most a low-order polynomial).
    pub fn gaussian_tail<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        center: f64,
        sigma: f64,
    ) -> Result<QuadResult, QuadError> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(QuadError::InvalidRange { a, b: f64::INFINITY });
        }
        let b = a.max(center) + gaussian_cutoff_sigmas() * sigma;
        self.finite(f, a, b)
    }

    /// Integrates `f` over `(0, len)` after substituting `s = len·sin²θ`.
    pub fn sqrt_singular<F: Fn(f64) -> f64>(&self, f: F, len: f64) -> Result<QuadResult, QuadError> {
        self.sqrt_singular_range(f, len, 0.0, len)
    }

    /// Same substitution as [`Quadrature::sqrt_singular`], restricted to `[lo, hi] ⊆ [0, len]`.
    pub fn sqrt_singular_range<F: Fn(f64) -> f64>(
        &self,
        f: F,
        len: f64,
        lo: f64,
        hi: f64,
    ) -> Result<QuadResult, QuadError> {
        if !(len > 0.0) || lo < 0.0 || hi > len || lo > hi {
            return Err(QuadError::InvalidRange { a: lo, b: hi });
        }
        let th_lo = (lo / len).sqrt().asin();
        let th_hi = (hi / len).sqrt().min(1.0).asin();
        self.finite(|th| transformed(&f, len, th), th_lo, th_hi)
    }
}

/// The sin² substitution: `f(s) ds = f(len sin²θ) · 2 len sinθ cosθ dθ`.
#[inline]
pub(crate) fn transformed<F: Fn(f64) -> f64>(f: &F, len: f64, theta: f64) -> f64 {
    let (sin, cos) = theta.sin_cos();
    let jac = 2.0 * len * sin * cos;
    if jac == 0.0 {
        return 0.0;
    }
    f(len * sin * sin) * jac
}

/// Largest θ used by the sin² substitution.
pub(crate) const HALF_PI: f64 = FRAC_PI_2;

/// Running integral `G(θ) = ∫_0^θ g` on uniform panels of `[0, θ_max]`.
///
/// Each panel keeps `g` at its 15 Kronrod nodes. Partial panels are
/// integrated exactly against the degree-14 interpolant through those
/// nodes, so after construction no further calls to `g` are needed.
#[derive(Clone, Debug)]
pub(crate) struct PanelIntegral {
    h: f64,
    nodes: [f64; 15],
    bary: [f64; 15],
    cumulative: Vec<f64>,
    node_values: Vec<[f64; 15]>,
}

const GL8_X: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL8_W: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

fn kronrod_weights() -> [f64; 15] {
    let mut out = [0.0; 15];
    for i in 0..7 {
        out[i] = WGK[i];
        out[14 - i] = WGK[i];
    }
    out[7] = WGK[7];
    out
}

fn barycentric_weights(nodes: &[f64; 15]) -> [f64; 15] {
    let mut w = [0.0; 15];
    for j in 0..15 {
        let prod: f64 = (0..15).filter(|&k| k != j).map(|k| nodes[j] - nodes[k]).product();
        w[j] = 1.0 / prod;
    }
    w
}

impl PanelIntegral {
    pub(crate) fn build<G: Fn(f64) -> f64>(g: G, theta_max: f64, panels: usize) -> Result<Self, QuadError> {
        let h = theta_max / panels as f64;
        let nodes = kronrod_nodes();
        let weights = kronrod_weights();
        let mut cumulative = Vec::with_capacity(panels + 1);
        let mut node_values = Vec::with_capacity(panels);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for p in 0..panels {
            let a = p as f64 * h;
            let mut vals = [0.0; 15];
            let mut sum = 0.0;
            for (j, x) in nodes.iter().enumerate() {
                let th = a + 0.5 * h * (x + 1.0);
                let v = g(th);
                if !v.is_finite() {
                    return Err(QuadError::NonFinite { at: th });
                }
                vals[j] = v;
                sum += weights[j] * v;
            }
            acc += 0.5 * h * sum;
            cumulative.push(acc);
            node_values.push(vals);
        }
        Ok(Self { h, nodes, bary: barycentric_weights(&nodes), cumulative, node_values })
    }

    pub(crate) fn total(&self) -> f64 {
        *self.cumulative.last().expect("at least one panel")
    }

    pub(crate) fn eval(&self, theta: f64) -> f64 {
        if theta <= 0.0 {
            return 0.0;
        }
        let last = self.node_values.len() - 1;
        let k = ((theta / self.h) as usize).min(last);
        let a = k as f64 * self.h;
        let xi = (2.0 * (theta - a) / self.h - 1.0).min(1.0);
        if xi <= -1.0 {
            return self.cumulative[k];
        }
        let (nodes, bw) = (&self.nodes, &self.bary);
        let vals = &self.node_values[k];
        let interp = |x: f64| {
            let (mut num, mut den) = (0.0, 0.0);
            for j in 0..15 {
                let d = x - nodes[j];
                if d == 0.0 {
                    return vals[j];
                }
                let c = bw[j] / d;
                num += c * vals[j];
                den += c;
            }
            num / den
        };
        // 8-point Gauss–Legendre on [-1, xi] is exact for the interpolant.
        let half = 0.5 * (xi + 1.0);
        let mid = 0.5 * (xi - 1.0);
        let part: f64 = (0..4)
            .map(|i| GL8_W[i] * (interp(mid + half * GL8_X[i]) + interp(mid - half * GL8_X[i])))
            .sum();
        self.cumulative[k] + part * half * 0.5 * self.h
    }
}

/// Adaptive integral of `f` over `[a, b]` at relative tolerance `rel_tol`.
pub fn integrate_finite<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<QuadResult, QuadError> {
    Quadrature::with_rel_tol(rel_tol).finite(f, a, b)
}

/// Adaptive integral of `f` over `[a, ∞)`, truncated where the Gaussian
/// envelope `exp(-(w - center)² / 2σ²)` falls below `1e-18` of its peak.
pub fn integrate_gaussian_tail<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    center: f64,
    sigma: f64,
    rel_tol: f64,
) -> Result<QuadResult, QuadError> {
    Quadrature::with_rel_tol(rel_tol).gaussian_tail(f, a, center, sigma)
}

/// Adaptive integral of `f` over `(0, len)` for integrands with at most
/// inverse-square-root singularities at either end.
pub fn integrate_sqrt_singular<F: Fn(f64) -> f64>(f: F, len: f64, rel_tol: f64) -> Result<QuadResult, QuadError> {
    Quadrature::with_rel_tol(rel_tol).sqrt_singular(f, len)
}

/// How an [`IntegrandSpec`] should be integrated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    /// Plain finite interval `[a, b]`.
    Finite { a: f64, b: f64 },
    /// `[a, ∞)` under a Gaussian envelope with the given centre and width.
    GaussianTailRight { a: f64, center: f64, sigma: f64 },
    /// `(0, len)` with `1/sqrt` singularities at both ends.
    SqrtSingularBothEnds { len: f64 },
}

/// An integrand bundled with the domain transformation it needs.
pub struct IntegrandSpec<F> {
    pub f: F,
    pub domain: Domain,
}

impl<F: Fn(f64) -> f64> IntegrandSpec<F> {
    pub fn new(f: F, domain: Domain) -> Self {
        Self { f, domain }
    }

    pub fn integrate(&self, quad: &Quadrature) -> Result<QuadResult, QuadError> {
        match self.domain {
            Domain::Finite { a, b } => quad.finite(&self.f, a, b),
            Domain::GaussianTailRight { a, center, sigma } => quad.gaussian_tail(&self.f, a, center, sigma),
            Domain::SqrtSingularBothEnds { len } => quad.sqrt_singular(&self.f, len),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_integrand() {
        let r = integrate_finite(|_| 1.0, 0.0, 1.0, 1e-10).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
        assert_eq!(r.n_evals, 15);
    }

    #[test]
    fn arcsine_normalization_via_substitution() {
        let r = integrate_sqrt_singular(|x| 1.0 / (PI * (x * (1.0 - x)).sqrt()), 1.0, 1e-10).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn rayleigh_second_moment_identity() {
        let r = integrate_gaussian_tail(|x| x * (-x * x / 2.0).exp(), 0.0, 0.0, 1.0, 1e-10).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn empty_range_is_zero() {
        let r = integrate_finite(|x| x, 2.0, 2.0, 1e-10).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn reversed_range_rejected() {
        assert!(matches!(
            integrate_finite(|x| x, 1.0, 0.0, 1e-10),
            Err(QuadError::InvalidRange { .. })
        ));
    }

    #[test]
    fn nan_integrand_reported() {
        assert!(matches!(
            integrate_finite(|_| f64::NAN, 0.0, 1.0, 1e-10),
            Err(QuadError::NonFinite { .. })
        ));
    }

    #[test]
    fn subdivision_cap_returns_best_estimate() {
        let quad = Quadrature { rel_tol: 1e-15, abs_tol: 0.0, max_intervals: 8 };
        let err = quad.finite(|x: f64| (1.0 / x).sin(), 1e-4, 1.0).unwrap_err();
        match err {
            QuadError::MaxSubdivisions { limit, best } => {
                assert_eq!(limit, 8);
                assert!(best.err_est > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn partial_sqrt_singular_range() {
        // ∫_0^z arcsine density = (2/π) asin(sqrt z)
        let z = 0.3;
        let r = Quadrature::default()
            .sqrt_singular_range(|x| 1.0 / (PI * (x * (1.0 - x)).sqrt()), 1.0, 0.0, z)
            .unwrap();
        assert!((r.value - 2.0 / PI * z.sqrt().asin()).abs() < 1e-12);
    }

    #[test]
    fn integrand_dispatch() {
        let spec = IntegrandSpec::new(|w: f64| w * (-w * w / 0.8).exp(), Domain::GaussianTailRight {
            a: 0.0,
            center: 0.0,
            sigma: 0.4f64.sqrt(),
        });
        let r = spec.integrate(&Quadrature::default()).unwrap();
        assert!((r.value - 0.4).abs() < 1e-12);
    }
}
