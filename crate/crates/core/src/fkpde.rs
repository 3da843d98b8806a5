//! Finite-difference solution of the Feynman–Kac equation for
//! `w(x, t) = E_x[e^{−β Γ_t}]`, where `Γ_t` is the time `x + B^μ` spends
//! positive before `t`:
//!
//! ```text
//! w_t = ½ w_xx + μ w_x − β 1{x > 0} w,    w(x, 0) = 1.
//! ```
//!
//! Time stepping is Crank–Nicolson with a tridiagonal solve per step.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mixed::MixedSojournLaw;
use crate::quad::QuadError;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum FkError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("solution became non-finite at time step {step}")]
    Diverged { step: usize },
}

/// How the drift term is differenced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriftScheme {
    /// One-sided difference taken from the side the characteristics come from.
    #[default]
    Upwind,
    /// Second-order central difference.
    Central,
}

/// Space-time grid and coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FkGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub dt: f64,
    pub beta: f64,
    pub mu: f64,
    #[serde(default)]
    pub drift: DriftScheme,
}

impl FkGrid {
    /// `nx = 2001` nodes on `±10√t` and `dt = t/2000`.
    pub fn standard(mu: f64, beta: f64, horizon: f64) -> Self {
        let half = 10.0 * horizon.sqrt();
        Self { x_min: -half, x_max: half, nx: 2001, dt: horizon / 2000.0, beta, mu, drift: DriftScheme::default() }
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn validate(&self) -> Result<(), FkError> {
        let ok = self.x_min < 0.0
            && 0.0 < self.x_max
            && self.nx >= 3
            && self.dt > 0.0
            && self.beta >= 0.0
            && [self.x_min, self.x_max, self.dt, self.beta, self.mu].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(FkError::InvalidGrid(format!("{self:?}")))
        }
    }

    /// Potential `β 1{x > 0}`, with `β/2` at the node nearest 0.
    fn potential(&self) -> Vec<f64> {
        let dx = self.dx();
        let zero = ((-self.x_min / dx).round() as usize).min(self.nx - 1);
        (0..self.nx)
            .map(|i| {
                if i == zero {
                    0.5 * self.beta
                } else if self.x(i) > 0.0 {
                    self.beta
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// Solution values on the grid at every time level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FkSolution {
    pub grid: FkGrid,
    pub times: Vec<f64>,
    /// `values[n][i]` is `w(x_i, times[n])`.
    pub values: Vec<Vec<f64>>,
}

impl FkSolution {
    pub fn xs(&self) -> Vec<f64> {
        (0..self.grid.nx).map(|i| self.grid.x(i)).collect()
    }

    pub fn final_slice(&self) -> &[f64] {
        self.values.last().expect("at least the initial level")
    }

    /// Linear interpolation of level `n` at `x`.
    pub fn value_at_level(&self, n: usize, x: f64) -> f64 {
        let g = &self.grid;
        let pos = ((x - g.x_min) / g.dx()).clamp(0.0, (g.nx - 1) as f64);
        let i = (pos.floor() as usize).min(g.nx - 2);
        let frac = pos - i as f64;
        let v = &self.values[n];
        v[i] * (1.0 - frac) + v[i + 1] * frac
    }

    /// `w(x, horizon)`.
    pub fn value_at(&self, x: f64) -> f64 {
        self.value_at_level(self.values.len() - 1, x)
    }

    /// Writes `x,w` rows of level `n` with 17 significant digits.
    pub fn write_slice_csv<W: Write>(&self, n: usize, mut out: W) -> io::Result<()> {
        writeln!(out, "x,w")?;
        for (i, w) in self.values[n].iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e}", self.grid.x(i), w)?;
        }
        out.flush()
    }
}

/// Solves `a_i y_{i−1} + b_i y_i + c_i y_{i+1} = d_i` in place of `d`.
fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &mut [f64], scratch: &mut [f64]) {
    let n = d.len();
    scratch[0] = c[0] / b[0];
    d[0] /= b[0];
    for i in 1..n {
        let m = b[i] - a[i] * scratch[i - 1];
        scratch[i] = c[i] / m;
        d[i] = (d[i] - a[i] * d[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        d[i] -= scratch[i] * d[i + 1];
    }
}

/// Number of steps and the step actually taken to reach `horizon`.
fn time_steps(grid: &FkGrid, horizon: f64) -> (usize, f64) {
    let steps = (horizon / grid.dt).round().max(1.0) as usize;
    (steps, horizon / steps as f64)
}

/// Decay of `v_t = −β v` after `n` Crank–Nicolson steps of length `dt`.
fn discrete_decay(beta: f64, dt: f64, n: usize) -> f64 {
    let z = 0.5 * beta * dt;
    ((1.0 - z) / (1.0 + z)).powi(n as i32)
}

/// Crank–Nicolson for `v_t = ½ v_xx + m v_x − k v` with Dirichlet values
/// supplied by `boundary(n, t) -> (left, right)` at level `n`.
fn crank_nicolson<B: Fn(usize, f64) -> (f64, f64)>(
    grid: &FkGrid,
    m: f64,
    k: &[f64],
    initial: Vec<f64>,
    horizon: f64,
    boundary: B,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), FkError> {
    let nx = grid.nx;
    let (steps, dt) = time_steps(grid, horizon);
    let dx = grid.dx();
    let diff = 0.5 / (dx * dx);
    // Stencil coefficients of the spatial operator at interior nodes.
    let (lo, mid, hi) = match (grid.drift, m >= 0.0) {
        (DriftScheme::Central, _) => (diff - 0.5 * m / dx, -2.0 * diff, diff + 0.5 * m / dx),
        (DriftScheme::Upwind, true) => (diff, -2.0 * diff - m / dx, diff + m / dx),
        (DriftScheme::Upwind, false) => (diff - m / dx, -2.0 * diff + m / dx, diff),
    };
    let n_in = nx - 2;
    let a: Vec<f64> = vec![-0.5 * dt * lo; n_in];
    let c: Vec<f64> = vec![-0.5 * dt * hi; n_in];
    let b: Vec<f64> = (1..nx - 1).map(|i| 1.0 - 0.5 * dt * (mid - k[i])).collect();
    let mut rhs = vec![0.0; n_in];
    let mut scratch = vec![0.0; n_in];

    let mut times = Vec::with_capacity(steps + 1);
    let mut levels = Vec::with_capacity(steps + 1);
    times.push(0.0);
    levels.push(initial);
    for n in 0..steps {
        let prev = &levels[n];
        let t1 = (n + 1) as f64 * dt;
        let (left, right) = boundary(n + 1, t1);
        for j in 0..n_in {
            let i = j + 1;
            let lv = lo * prev[i - 1] + (mid - k[i]) * prev[i] + hi * prev[i + 1];
            rhs[j] = prev[i] + 0.5 * dt * lv;
        }
        rhs[0] -= a[0] * left;
        rhs[n_in - 1] -= c[n_in - 1] * right;
        thomas(&a, &b, &c, &mut rhs, &mut scratch);
        let mut next = Vec::with_capacity(nx);
        next.push(left);
        next.extend_from_slice(&rhs);
        next.push(right);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(FkError::Diverged { step: n + 1 });
        }
        times.push(t1);
        levels.push(next);
    }
    Ok((times, levels))
}

/// Solves the Feynman–Kac problem up to `horizon`. The far-field values are
/// `1` on the left and `e^{−βt}` on the right, the latter in the form the
/// time stepping itself produces so that the boundary matches the interior.
pub fn solve_fk(grid: &FkGrid, horizon: f64) -> Result<FkSolution, FkError> {
    grid.validate()?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(FkError::InvalidGrid(format!("horizon {horizon} must be positive")));
    }
    let (beta, (_, dt)) = (grid.beta, time_steps(grid, horizon));
    let (times, values) =
        crank_nicolson(grid, grid.mu, &grid.potential(), vec![1.0; grid.nx], horizon, |n, _| (1.0, discrete_decay(beta, dt, n)))?;
    Ok(FkSolution { grid: *grid, times, values })
}

/// `E[e^{−βΓ}]` under `law`.
pub fn laplace_of_law(law: &MixedSojournLaw, beta: f64) -> Result<f64, QuadError> {
    law.laplace(beta)
}

/// Solves the drift-free problem for `z = e^{μ²t/2 + μx} w`,
/// `z_t = ½ z_xx − k z`, `z(x, 0) = e^{μx}`, maps it back and returns the
/// largest gap to the direct solution over interior nodes at all time levels.
pub fn check_transformation(grid: &FkGrid, horizon: f64) -> Result<f64, FkError> {
    let direct = solve_fk(grid, horizon)?;
    let (mu, beta) = (grid.mu, grid.beta);
    let (x0, x1) = (grid.x_min, grid.x_max);
    let initial: Vec<f64> = (0..grid.nx).map(|i| (mu * grid.x(i)).exp()).collect();
    let (_, dt) = time_steps(grid, horizon);
    let boundary = |n: usize, t: f64| {
        let lift = |x: f64| (0.5 * mu * mu * t + mu * x).exp();
        (lift(x0), lift(x1) * discrete_decay(beta, dt, n))
    };
    let (times, z) = crank_nicolson(grid, 0.0, &grid.potential(), initial, horizon, boundary)?;
    let mut worst: f64 = 0.0;
    for (n, t) in times.iter().enumerate() {
        for i in 1..grid.nx - 1 {
            let back = (-0.5 * mu * mu * t - mu * grid.x(i)).exp() * z[n][i];
            worst = worst.max((back - direct.values[n][i]).abs());
        }
    }
    Ok(worst)
}
