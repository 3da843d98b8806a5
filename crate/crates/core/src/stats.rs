//! Goodness-of-fit tests for empirical sojourn-time samples.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};
use thiserror::Error;

use crate::mixed::MixedSojournLaw;
use crate::quad::QuadError;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("no continuous samples to test")]
    EmptySample,
    #[error("contingency table needs at least two non-empty rows and columns")]
    DegenerateTable,
    #[error(transparent)]
    Quad(#[from] QuadError),
}

/// Continuous-part samples and atom events of a simulation campaign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalLaw {
    continuous_samples: Vec<f64>,
    atom_count: usize,
    n_total: usize,
}

impl EmpiricalLaw {
    /// Sorts `continuous` and records `atom_count` further atom events.
    pub fn new(mut continuous: Vec<f64>, atom_count: usize) -> Self {
        continuous.sort_by(f64::total_cmp);
        let n_total = continuous.len() + atom_count;
        Self { continuous_samples: continuous, atom_count, n_total }
    }

    pub fn continuous_samples(&self) -> &[f64] {
        &self.continuous_samples
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn atom_freq(&self) -> f64 {
        if self.n_total == 0 {
            0.0
        } else {
            self.atom_count as f64 / self.n_total as f64
        }
    }

    /// Sample mean and its standard error, counting atom events as `atom_location`.
    pub fn mean_and_std_error(&self, atom_location: f64) -> (f64, f64) {
        let n = self.n_total as f64;
        let atoms = self.atom_count as f64;
        let sum: f64 = self.continuous_samples.iter().sum::<f64>() + atoms * atom_location;
        let mean = sum / n;
        let ss: f64 = self.continuous_samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
            + atoms * (atom_location - mean).powi(2);
        let var = ss / (n - 1.0).max(1.0);
        (mean, (var / n).sqrt())
    }

    /// `P(Γ ≤ z | Γ not an atom)` under the empirical law.
    pub fn conditional_cdf(&self, z: f64) -> f64 {
        let m = self.continuous_samples.len();
        if m == 0 {
            return 0.0;
        }
        self.continuous_samples.partition_point(|&x| x <= z) as f64 / m as f64
    }
}

/// Result of a goodness-of-fit comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub ks_stat: f64,
    pub ks_critical: f64,
    pub atom_freq: f64,
    pub atom_ci: (f64, f64),
    pub pass: bool,
}

/// Asymptotic Kolmogorov constant `c(α) = √(−ln(α/2)/2)`.
pub fn ks_coefficient(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// One-sample critical value `c(α)/√m`.
pub fn ks_critical(alpha: f64, m: usize) -> f64 {
    ks_coefficient(alpha) / (m as f64).sqrt()
}

/// Two-sample critical value `c(α)√((n + m)/(nm))`.
pub fn ks_critical_two_sample(alpha: f64, n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    ks_coefficient(alpha) * ((n + m) / (n * m)).sqrt()
}

/// Kolmogorov distribution tail `P(K > λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as i64 % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Asymptotic p-value of a KS statistic with effective sample size `n_eff`.
pub fn ks_p_value(d: f64, n_eff: f64) -> f64 {
    let sq = n_eff.sqrt();
    kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d)
}

/// `sup |F_m − F|` for sorted samples.
pub fn ks_statistic<F: FnMut(f64) -> f64>(sorted: &[f64], mut cdf: F) -> f64 {
    let m = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / m - f).max(f - i as f64 / m);
    }
    d
}

fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Wilson score interval for a binomial proportion at level `1 − α`.
pub fn atom_ci(atom_count: usize, n_total: usize, alpha: f64) -> (f64, f64) {
    if n_total == 0 {
        return (0.0, 1.0);
    }
    let n = n_total as f64;
    let p = atom_count as f64 / n;
    let z = normal_quantile(1.0 - alpha / 2.0);
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// One-sample KS test of the continuous samples against the law's continuous
/// part, plus a check that the law's atom mass lies in the Wilson interval
/// of the atom frequency.
pub fn ks_test_continuous(emp: &EmpiricalLaw, law: &MixedSojournLaw, alpha: f64) -> Result<GofReport, StatsError> {
    let samples = emp.continuous_samples();
    if samples.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let total = law.continuous_cdf(law.support().1)?;
    let mut failure = None;
    let ks_stat = ks_statistic(samples, |x| match law.continuous_cdf(x) {
        Ok(v) => (v / total).clamp(0.0, 1.0),
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    });
    if let Some(e) = failure {
        return Err(e.into());
    }
    let ks_critical = ks_critical(alpha, samples.len());
    let atom_ci = atom_ci(emp.atom_count(), emp.n_total(), alpha);
    let mass = law.atom_mass();
    let pass = ks_stat < ks_critical && atom_ci.0 <= mass && mass <= atom_ci.1;
    Ok(GofReport { ks_stat, ks_critical, atom_freq: emp.atom_freq(), atom_ci, pass })
}

/// Two-sample KS test on the continuous parts. The atom fields report the
/// difference of atom frequencies and its two-proportion interval; the test
/// passes only if that interval contains zero.
pub fn two_sample_ks(a: &EmpiricalLaw, b: &EmpiricalLaw, alpha: f64) -> Result<GofReport, StatsError> {
    let (xs, ys) = (a.continuous_samples(), b.continuous_samples());
    if xs.is_empty() || ys.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let ks_stat = two_sample_statistic(xs, ys);
    let ks_critical = ks_critical_two_sample(alpha, xs.len(), ys.len());
    let (p1, p2) = (a.atom_freq(), b.atom_freq());
    let (n1, n2) = (a.n_total() as f64, b.n_total() as f64);
    let z = normal_quantile(1.0 - alpha / 2.0);
    let half = z * (p1 * (1.0 - p1) / n1 + p2 * (1.0 - p2) / n2).sqrt();
    let diff = p1 - p2;
    let atom_ci = (diff - half, diff + half);
    let pass = ks_stat < ks_critical && atom_ci.0 <= 0.0 && 0.0 <= atom_ci.1;
    Ok(GofReport { ks_stat, ks_critical, atom_freq: diff, atom_ci, pass })
}

/// `sup |F_n − G_m|` for two sorted samples.
pub fn two_sample_statistic(xs: &[f64], ys: &[f64]) -> f64 {
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Pearson chi-square test of homogeneity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub stat: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Tests whether the rows of a contingency table share one distribution.
/// Empty rows and columns are dropped.
pub fn chi_square_homogeneity(table: &[Vec<u64>]) -> Result<ChiSquareResult, StatsError> {
    let cols = table.iter().map(Vec::len).max().unwrap_or(0);
    let col_tot: Vec<u64> = (0..cols).map(|c| table.iter().map(|r| r.get(c).copied().unwrap_or(0)).sum()).collect();
    let rows: Vec<&Vec<u64>> = table.iter().filter(|r| r.iter().sum::<u64>() > 0).collect();
    let live: Vec<usize> = (0..cols).filter(|&c| col_tot[c] > 0).collect();
    if rows.len() < 2 || live.len() < 2 {
        return Err(StatsError::DegenerateTable);
    }
    let grand: f64 = live.iter().map(|&c| col_tot[c] as f64).sum();
    let mut stat = 0.0;
    for r in &rows {
        let row_tot: f64 = r.iter().sum::<u64>() as f64;
        for &c in &live {
            let expected = row_tot * col_tot[c] as f64 / grand;
            let obs = r.get(c).copied().unwrap_or(0) as f64;
            stat += (obs - expected).powi(2) / expected;
        }
    }
    let dof = (rows.len() - 1) * (live.len() - 1);
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    Ok(ChiSquareResult { stat, dof, p_value: 1.0 - dist.cdf(stat) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_interval_arithmetic() {
        let (lo, hi) = atom_ci(500, 1000, 0.01);
        assert!((lo - 0.4594).abs() < 5e-4 && (hi - 0.5406).abs() < 5e-4, "({lo}, {hi})");
        assert_eq!(atom_ci(0, 100, 0.01).0, 0.0);
        assert_eq!(atom_ci(100, 100, 0.01).1, 1.0);
    }

    #[test]
    fn ks_statistic_of_perfect_grid() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let d = ks_statistic(&xs, |x| x);
        assert!((d - 0.005).abs() < 1e-12);
    }

    #[test]
    fn two_sample_identical_is_zero() {
        let xs = [0.1, 0.2, 0.3];
        assert_eq!(two_sample_statistic(&xs, &xs), 0.0);
        assert_eq!(two_sample_statistic(&[0.0, 1.0], &[2.0, 3.0]), 1.0);
    }

    #[test]
    fn kolmogorov_tail_reference_values() {
        // Classical critical value for α = 0.05 is 1.358.
        assert!((kolmogorov_sf(1.358_098_8) - 0.05).abs() < 1e-4);
        assert!((ks_coefficient(0.05) - 1.358_102).abs() < 1e-3);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn chi_square_detects_difference() {
        let same = chi_square_homogeneity(&[vec![100, 200, 300], vec![101, 199, 300]]).unwrap();
        assert!(same.p_value > 0.9);
        assert_eq!(same.dof, 2);
        let diff = chi_square_homogeneity(&[vec![300, 200, 100], vec![100, 200, 300]]).unwrap();
        assert!(diff.p_value < 1e-10);
        assert!(chi_square_homogeneity(&[vec![1, 2]]).is_err());
    }

    #[test]
    fn empirical_mean_counts_atoms() {
        let emp = EmpiricalLaw::new(vec![0.5, 0.0], 2);
        let (mean, se) = emp.mean_and_std_error(1.0);
        assert!((mean - 0.625).abs() < 1e-15);
        assert!(se > 0.0);
        assert_eq!(emp.conditional_cdf(0.2), 0.5);
    }
}
