//! Monte Carlo simulation of conditioned Brownian paths and their
//! occupation times.
//!
//! Paths are simulated on a uniform grid. Between grid points the path is
//! a Brownian bridge, and [`occupation_time`] resolves the bridge near zero
//! by random midpoint refinement so that sojourn times close to the ends of
//! the window are not lumped onto them.
//!
//! Campaigns split paths over independent ChaCha streams keyed by
//! `(seed, stream index)` and concatenate results in stream order, so
//! output depends only on the configuration, never on thread scheduling.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::laws::{excursion_endpoint_scale, LawError, LawKind, ProcessParams};
use crate::special::bridge_crossing_probability;
use crate::stats::EmpiricalLaw;

/// Default cap on simulated steps, summed over rejected attempts, per accepted path.
pub const DEFAULT_BUDGET: u64 = 10_000_000;
/// Number of midpoint halvings applied to a grid step near zero.
pub const MAX_REFINE_DEPTH: u32 = 6;
/// Steps with `ab > NEGLIGIBLE_PRODUCT·h` have bridge crossing probability
/// below `1e-9` and are neither refined nor checked.
const NEGLIGIBLE_PRODUCT: f64 = 10.361_632_918_473_205;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SimError {
    #[error("rejection budget of {budget} steps exhausted for {what}; try a larger start level u")]
    BudgetExhausted { what: &'static str, budget: u64 },
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error(transparent)]
    Law(#[from] LawError),
}

/// One simulated trajectory on the uniform grid `t0, t0 + dt, …, t_end`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
    /// Nominal end time; equals `t0 + dt·(len − 1)` up to rounding.
    pub t_end: f64,
}

impl SamplePath {
    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("paths are never empty")
    }

    pub fn n_steps(&self) -> usize {
        self.values.len() - 1
    }

    /// Every `factor`-th grid value.
    pub fn subsample(&self, factor: usize) -> SamplePath {
        assert!(factor >= 1 && self.n_steps() % factor == 0, "factor must divide the step count");
        let values = self.values.iter().step_by(factor).copied().collect();
        SamplePath { t0: self.t0, dt: self.dt * factor as f64, values, t_end: self.t_end }
    }
}

/// Occupation time of `[0, ∞)` and whether the path stayed nonnegative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OccupationResult {
    pub gamma: f64,
    pub atom_event: bool,
}

/// Campaign size and random stream layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub streams: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { n_paths: 100_000, n_steps: 4096, seed: 0, streams: 8 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_paths == 0 || self.n_steps == 0 || self.streams == 0 {
            return Err(SimError::Config(format!(
                "n_paths = {}, n_steps = {} and streams = {} must all be at least 1",
                self.n_paths, self.n_steps, self.streams
            )));
        }
        Ok(())
    }

    /// Random generator for stream `index`.
    pub fn stream_rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }

    /// Number of paths assigned to stream `index`.
    pub fn paths_in_stream(&self, index: usize) -> usize {
        self.n_paths / self.streams + usize::from(index < self.n_paths % self.streams)
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn rayleigh<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    sigma * (-2.0 * (1.0 - u).ln()).sqrt()
}

fn free_values<R: Rng + ?Sized>(mu: f64, x0: f64, dt: f64, n_steps: usize, rng: &mut R) -> Vec<f64> {
    let sq = dt.sqrt();
    let mut values = Vec::with_capacity(n_steps + 1);
    let mut x = x0;
    values.push(x);
    for _ in 0..n_steps {
        x += mu * dt + sq * normal(rng);
        values.push(x);
    }
    values
}

fn bridge_values<R: Rng + ?Sized>(x0: f64, x1: f64, span: f64, n_steps: usize, rng: &mut R) -> Vec<f64> {
    let dt = span / n_steps as f64;
    let mut values = Vec::with_capacity(n_steps + 1);
    let mut x = x0;
    values.push(x);
    for k in 0..n_steps - 1 {
        let remaining = span - k as f64 * dt;
        x += (x1 - x) * dt / remaining + (dt * (remaining - dt) / remaining).sqrt() * normal(rng);
        values.push(x);
    }
    values.push(x1);
    values
}

/// Free drifted Brownian motion `x0 + B(r) + μr` on `[0, horizon]`.
pub fn sample_free_path<R: Rng + ?Sized>(mu: f64, x0: f64, horizon: f64, n_steps: usize, rng: &mut R) -> SamplePath {
    assert!(horizon > 0.0 && n_steps >= 1);
    let dt = horizon / n_steps as f64;
    SamplePath { t0: 0.0, dt, values: free_values(mu, x0, dt, n_steps, rng), t_end: horizon }
}

/// Brownian bridge from `u` at time 0 to 0 at time `t`.
pub fn sample_bridge_path<R: Rng + ?Sized>(u: f64, t: f64, n_steps: usize, rng: &mut R) -> SamplePath {
    assert!(t > 0.0 && n_steps >= 1);
    SamplePath { t0: 0.0, dt: t / n_steps as f64, values: bridge_values(u, 0.0, t, n_steps, rng), t_end: t }
}

/// Runs the drifted motion from `u` over `[0, l]` in `k` steps, killing it
/// at the first grid value below zero or the first bridge crossing.
/// Returns the value at `l` on survival.
fn try_meander<R: Rng + ?Sized>(u: f64, mu: f64, l: f64, k: usize, used: &mut u64, rng: &mut R) -> Option<f64> {
    let dt = l / k as f64;
    let sq = dt.sqrt();
    let mut x = u;
    for _ in 0..k {
        *used += 1;
        let next = x + mu * dt + sq * normal(rng);
        if next <= 0.0 {
            return None;
        }
        if x * next < NEGLIGIBLE_PRODUCT * dt && rng.random::<f64>() < bridge_crossing_probability(x, next, dt) {
            return None;
        }
        x = next;
    }
    Some(x)
}

/// One rejection attempt: the position at `l` of the motion from `u` if it
/// survives `k` steps, `None` if it is killed.
pub fn meander_attempt<R: Rng + ?Sized>(u: f64, mu: f64, l: f64, k: usize, rng: &mut R) -> Option<f64> {
    let mut used = 0;
    try_meander(u, mu, l, k, &mut used, rng)
}

fn window_grid(l: f64, t: f64, n_steps: usize) -> (f64, usize) {
    let dt = (t - l) / n_steps as f64;
    let k = if l > 0.0 { (l / dt).ceil().max(1.0) as usize } else { 0 };
    (dt, k)
}

fn meander_position<R: Rng + ?Sized>(
    u: f64,
    mu: f64,
    l: f64,
    k: usize,
    budget: u64,
    used: &mut u64,
    rng: &mut R,
) -> Result<f64, SimError> {
    if k == 0 {
        return Ok(u);
    }
    loop {
        if let Some(y) = try_meander(u, mu, l, k, used, rng) {
            return Ok(y);
        }
        if *used >= budget {
            return Err(SimError::BudgetExhausted { what: "meander rejection", budget });
        }
    }
}

/// Meander started at `u > 0` by rejection, then free motion on `[l, t]`.
///
/// Only the part on `[l, t]` is returned. The window uses `n_steps` steps
/// and `[0, l]` is simulated with a step no longer than the window step.
pub fn sample_meander_rejection<R: Rng + ?Sized>(
    u: f64,
    mu: f64,
    l: f64,
    t: f64,
    n_steps: usize,
    rng: &mut R,
) -> Result<SamplePath, SimError> {
    sample_meander_rejection_with_budget(u, mu, l, t, n_steps, DEFAULT_BUDGET, rng)
}

pub fn sample_meander_rejection_with_budget<R: Rng + ?Sized>(
    u: f64,
    mu: f64,
    l: f64,
    t: f64,
    n_steps: usize,
    budget: u64,
    rng: &mut R,
) -> Result<SamplePath, SimError> {
    if !(u > 0.0) {
        return Err(SimError::Config(format!("meander start u = {u} must be positive")));
    }
    let (dt, k) = window_grid(l, t, n_steps);
    let mut used = 0;
    let y = meander_position(u, mu, l, k, budget, &mut used, rng)?;
    Ok(SamplePath { t0: l, dt, values: free_values(mu, y, dt, n_steps, rng), t_end: t })
}

/// Position at time `l` of the meander started at 0, drawn from the
/// density `∝ y e^{−y²/2l + μy}` by Rayleigh envelope rejection.
pub fn sample_limit_meander_position<R: Rng + ?Sized>(mu: f64, l: f64, rng: &mut R) -> Result<f64, SimError> {
    if l == 0.0 {
        return Ok(0.0);
    }
    const TRIES: usize = 1_000_000;
    for _ in 0..TRIES {
        let (y, accept) = if mu <= 0.0 {
            let y = rayleigh(l.sqrt(), rng);
            (y, (mu * y).exp())
        } else {
            let y = rayleigh((2.0 * l).sqrt(), rng);
            (y, (-(y - 2.0 * mu * l).powi(2) / (4.0 * l)).exp())
        };
        if mu == 0.0 || rng.random::<f64>() < accept {
            return Ok(y);
        }
    }
    Err(SimError::BudgetExhausted { what: "limit meander position", budget: TRIES as u64 })
}

/// Limit meander: exact position at `l`, then free motion on `[l, t]`.
pub fn sample_limit_meander<R: Rng + ?Sized>(
    mu: f64,
    l: f64,
    t: f64,
    n_steps: usize,
    rng: &mut R,
) -> Result<SamplePath, SimError> {
    let y = sample_limit_meander_position(mu, l, rng)?;
    let dt = (t - l) / n_steps as f64;
    Ok(SamplePath { t0: l, dt, values: free_values(mu, y, dt, n_steps, rng), t_end: t })
}

/// Limit excursion: Rayleigh position at `l`, then a bridge to 0 at `t`.
pub fn sample_limit_excursion<R: Rng + ?Sized>(l: f64, t: f64, n_steps: usize, rng: &mut R) -> Result<SamplePath, SimError> {
    let y = if l == 0.0 { 0.0 } else { rayleigh(excursion_endpoint_scale(l, t)?, rng) };
    let dt = (t - l) / n_steps as f64;
    Ok(SamplePath { t0: l, dt, values: bridge_values(y, 0.0, t - l, n_steps, rng), t_end: t })
}

/// Excursion from `u > 0` with drift `μ` by rejection: a meander on
/// `[0, l]`, accepted with the probability of the drifted motion being
/// pinned at 0 at time `t`, then a bridge to 0.
pub fn sample_excursion_rejection<R: Rng + ?Sized>(
    u: f64,
    mu: f64,
    l: f64,
    t: f64,
    n_steps: usize,
    rng: &mut R,
) -> Result<SamplePath, SimError> {
    if !(u > 0.0) {
        return Err(SimError::Config(format!("excursion start u = {u} must be positive")));
    }
    let (dt, k) = window_grid(l, t, n_steps);
    let w = t - l;
    // ln of the supremum over y > 0 of e^{−(y+μw)²/2w}.
    let ln_sup = if mu < 0.0 { 0.0 } else { -0.5 * mu * mu * w };
    let mut used = 0;
    loop {
        let y = meander_position(u, mu, l, k, DEFAULT_BUDGET, &mut used, rng)?;
        let accept = (-(y + mu * w).powi(2) / (2.0 * w) - ln_sup).exp();
        if rng.random::<f64>() < accept {
            return Ok(SamplePath { t0: l, dt, values: bridge_values(y, 0.0, w, n_steps, rng), t_end: t });
        }
        if used >= DEFAULT_BUDGET {
            return Err(SimError::BudgetExhausted { what: "excursion rejection", budget: DEFAULT_BUDGET });
        }
    }
}

struct Tally {
    gamma: f64,
    clean: bool,
}

/// Adds the positive time of the bridge from `a` to `b` over a step of length `h`.
fn refine_step<R: Rng + ?Sized>(a: f64, b: f64, h: f64, depth: u32, rng: &mut R, tally: &mut Tally) {
    let (pa, pb) = (a >= 0.0, b >= 0.0);
    if pa == pb {
        let prod = a * b;
        if prod > NEGLIGIBLE_PRODUCT * h {
            if pa {
                tally.gamma += h;
            } else {
                tally.clean = false;
            }
            return;
        }
        if depth == MAX_REFINE_DEPTH {
            if pa {
                tally.gamma += h;
                if rng.random::<f64>() < bridge_crossing_probability(a, b, h) {
                    tally.clean = false;
                }
            } else {
                tally.clean = false;
            }
            return;
        }
    } else if depth == MAX_REFINE_DEPTH {
        let pos = if pa { a } else { b };
        tally.gamma += h * pos / (a - b).abs();
        tally.clean = false;
        return;
    }
    let m = 0.5 * (a + b) + (0.25 * h).sqrt() * normal(rng);
    refine_step(a, m, 0.5 * h, depth + 1, rng, tally);
    refine_step(m, b, 0.5 * h, depth + 1, rng, tally);
}

/// Time spent in `[0, ∞)` by `path` from time `from` to its end.
///
/// Steps whose bridge could touch zero are refined by sampling bridge
/// midpoints down to [`MAX_REFINE_DEPTH`] halvings. At the finest level a
/// step with both ends nonnegative counts fully and survives with
/// probability `1 − e^{−2ab/h}`, a step with both ends negative counts
/// nothing, and a sign change is split by linear interpolation. The atom
/// event is the survival of every step, and then `gamma` equals the window
/// length exactly.
pub fn occupation_time<R: Rng + ?Sized>(path: &SamplePath, from: f64, rng: &mut R) -> OccupationResult {
    let start = (((from - path.t0) / path.dt).round().max(0.0) as usize).min(path.n_steps());
    let window = path.t_end - (path.t0 + start as f64 * path.dt).max(from);
    let mut tally = Tally { gamma: 0.0, clean: true };
    for pair in path.values[start..].windows(2) {
        refine_step(pair[0], pair[1], path.dt, 0, rng, &mut tally);
    }
    if tally.clean {
        OccupationResult { gamma: window, atom_event: true }
    } else {
        OccupationResult { gamma: tally.gamma.clamp(0.0, window), atom_event: false }
    }
}

/// Processes that campaigns can simulate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CampaignLaw {
    /// Bridge from `u` to 0 over `[0, t]`.
    Bridge,
    /// Free motion from `x` over `[0, t]`.
    Free,
    /// Meander from `u` on `[0, l]` by rejection, free on `[l, t]`.
    MeanderU,
    /// Limit meander, free on `[l, t]`.
    MeanderLimit,
    /// Limit excursion.
    Excursion,
    /// Excursion from `u` with drift `μ` by rejection.
    ExcursionU,
}

impl CampaignLaw {
    pub const ALL: [CampaignLaw; 6] = [
        CampaignLaw::Bridge,
        CampaignLaw::Free,
        CampaignLaw::MeanderU,
        CampaignLaw::MeanderLimit,
        CampaignLaw::Excursion,
        CampaignLaw::ExcursionU,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CampaignLaw::Bridge => "bridge",
            CampaignLaw::Free => "free",
            CampaignLaw::MeanderU => "meander-u",
            CampaignLaw::MeanderLimit => "meander-limit",
            CampaignLaw::Excursion => "excursion",
            CampaignLaw::ExcursionU => "excursion-u",
        }
    }

    /// The closed-form law the campaign should reproduce.
    pub fn reference(self) -> LawKind {
        match self {
            CampaignLaw::Bridge => LawKind::BridgeU,
            CampaignLaw::Free => LawKind::Free,
            CampaignLaw::MeanderU => LawKind::MeanderU,
            CampaignLaw::MeanderLimit => LawKind::MeanderLimit,
            CampaignLaw::Excursion | CampaignLaw::ExcursionU => LawKind::Excursion,
        }
    }

    /// Start of the observation window.
    pub fn window_start(self, p: &ProcessParams) -> f64 {
        match self {
            CampaignLaw::Bridge | CampaignLaw::Free => 0.0,
            _ => p.l,
        }
    }

    /// Location of the atom, the right end of the observation window.
    pub fn atom_location(self, p: &ProcessParams) -> f64 {
        p.t - self.window_start(p)
    }

    /// Draws the part of one path that the occupation time depends on.
    pub fn sample_path<R: Rng + ?Sized>(self, p: &ProcessParams, n_steps: usize, rng: &mut R) -> Result<SamplePath, SimError> {
        match self {
            CampaignLaw::Bridge => Ok(sample_bridge_path(p.u, p.t, n_steps, rng)),
            CampaignLaw::Free => Ok(sample_free_path(p.mu, p.x, p.t, n_steps, rng)),
            CampaignLaw::MeanderU => sample_meander_rejection(p.u, p.mu, p.l, p.t, n_steps, rng),
            CampaignLaw::MeanderLimit => sample_limit_meander(p.mu, p.l, p.t, n_steps, rng),
            CampaignLaw::Excursion => sample_limit_excursion(p.l, p.t, n_steps, rng),
            CampaignLaw::ExcursionU => sample_excursion_rejection(p.u, p.mu, p.l, p.t, n_steps, rng),
        }
    }

    fn check(self, p: &ProcessParams) -> Result<(), SimError> {
        p.validate()?;
        let needs_u = matches!(self, CampaignLaw::MeanderU | CampaignLaw::ExcursionU);
        if needs_u && p.u <= 0.0 {
            return Err(SimError::Config(format!("{} needs u > 0", self.name())));
        }
        if self == CampaignLaw::Free && p.x < 0.0 {
            return Err(SimError::Config(format!("free motion needs x >= 0, got {}", p.x)));
        }
        Ok(())
    }
}

impl fmt::Display for CampaignLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CampaignLaw {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CampaignLaw::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| SimError::Config(format!("unknown campaign law '{s}'")))
    }
}

/// Per-path output of a campaign.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub gamma: f64,
    pub atom_event: bool,
    /// Path value at the start of the observation window.
    pub start: f64,
    /// Path value at `t`.
    pub end: f64,
}

/// Simulates every path of a campaign, in stream order.
pub fn simulate(law: CampaignLaw, params: &ProcessParams, cfg: &SimConfig) -> Result<Vec<PathRecord>, SimError> {
    law.check(params)?;
    simulate_with(cfg, |rng| {
        let path = law.sample_path(params, cfg.n_steps, rng)?;
        let occ = occupation_time(&path, law.window_start(params), rng);
        Ok(PathRecord { gamma: occ.gamma, atom_event: occ.atom_event, start: path.first(), end: path.last() })
    })
}

/// Runs `draw` `cfg.n_paths` times, spread over `cfg.streams` seeded
/// streams in parallel, and concatenates the results in stream order.
pub fn simulate_with<T, F>(cfg: &SimConfig, draw: F) -> Result<Vec<T>, SimError>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T, SimError> + Sync,
{
    cfg.validate()?;
    let chunks: Vec<Vec<T>> = (0..cfg.streams)
        .into_par_iter()
        .map(|i| {
            let mut rng = cfg.stream_rng(i);
            (0..cfg.paths_in_stream(i)).map(|_| draw(&mut rng)).collect::<Result<Vec<T>, SimError>>()
        })
        .collect::<Result<_, _>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Runs a campaign and summarizes the occupation times.
pub fn run_campaign(law: CampaignLaw, params: &ProcessParams, cfg: &SimConfig) -> Result<EmpiricalLaw, SimError> {
    Ok(empirical_law(&simulate(law, params, cfg)?))
}

pub fn empirical_law(records: &[PathRecord]) -> EmpiricalLaw {
    let continuous = records.iter().filter(|r| !r.atom_event).map(|r| r.gamma).collect();
    let atoms = records.iter().filter(|r| r.atom_event).count();
    EmpiricalLaw::new(continuous, atoms)
}

/// Writes `gamma,atom_event` rows with 17 significant digits.
pub fn write_samples_csv<W: Write>(records: &[PathRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "gamma,atom_event")?;
    for r in records {
        writeln!(out, "{:.16e},{}", r.gamma, u8::from(r.atom_event))?;
    }
    out.flush()
}
