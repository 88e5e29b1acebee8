//! Sample comparison: ECDFs, the Kantorovich–Rubinstein distance, the
//! sorted-sample MSE, Kolmogorov–Smirnov tests and tail diagnostics.

mod tail;

pub use tail::{tail_constant, tail_index_estimate, TailCase, TailInputs, TailPrediction};

use crate::error::{invalid, Error, Result};

/// A sorted batch of finite samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    values: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("samples must be finite"));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.values
    }

    /// `F(x) = #{v ≤ x} / m`.
    pub fn ecdf(&self, x: f64) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.partition_point(|&v| v <= x) as f64 / self.values.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Sample mean and its standard error.
    pub fn mean_and_se(&self) -> (f64, f64) {
        mean_and_se(&self.values)
    }

    /// Empirical `q`-quantile (lower order statistic).
    pub fn quantile(&self, q: f64) -> f64 {
        let m = self.values.len();
        let idx = ((q * m as f64).ceil() as usize).clamp(1, m) - 1;
        self.values[idx]
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

fn nonempty(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData("empty sample batch".into()));
    }
    Ok(())
}

/// One-dimensional Kantorovich–Rubinstein (Wasserstein-1) distance.
pub fn kr_distance(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> Result<f64> {
    nonempty(a, b)?;
    let (x, y) = (a.sorted_values(), b.sorted_values());
    if x.len() == y.len() {
        return Ok(x.iter().zip(y).map(|(p, q)| (p - q).abs()).sum::<f64>() / x.len() as f64);
    }
    // ∫ |F_a - F_b| over the merged support.
    let (m, n) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut prev = x[0].min(y[0]);
    let mut total = 0.0;
    while i < x.len() || j < y.len() {
        let next = match (x.get(i), y.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        total += (i as f64 / m - j as f64 / n).abs() * (next - prev);
        while i < x.len() && x[i] == next {
            i += 1;
        }
        while j < y.len() && y[j] == next {
            j += 1;
        }
        prev = next;
    }
    Ok(total)
}

/// `(1/m) Σ_{i<m} (a_(i) - b_(i))²` over rank-paired samples, the top pair
/// discarded. `squared = false` drops the square (signed differences).
pub fn sorted_mse_with(a: &EmpiricalDistribution, b: &EmpiricalDistribution, squared: bool) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    let m = a.len();
    if m < 2 {
        return Err(Error::InsufficientData("sorted MSE needs at least two samples".into()));
    }
    let x = &a.sorted_values()[..m - 1];
    let y = &b.sorted_values()[..m - 1];
    let sum: f64 = x.iter().zip(y).map(|(p, q)| if squared { (p - q).powi(2) } else { p - q }).sum();
    Ok(sum / m as f64)
}

pub fn sorted_mse(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> Result<f64> {
    sorted_mse_with(a, b, true)
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_two_sample(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> Result<f64> {
    nonempty(a, b)?;
    let (x, y) = (a.sorted_values(), b.sorted_values());
    let (m, n) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] == t {
            i += 1;
        }
        while j < y.len() && y[j] == t {
            j += 1;
        }
        d = d.max((i as f64 / m - j as f64 / n).abs());
    }
    Ok(d)
}

/// Asymptotic two-sample critical value at level 0.01.
pub fn ks_critical_01(m: usize, n: usize) -> f64 {
    let (m, n) = (m as f64, n as f64);
    1.628 * ((m + n) / (m * n)).sqrt()
}

/// One-sample KS distance between integer samples and a law given by its
/// CDF table `cdf[k] = P(X ≤ k)`; beyond the table the CDF is taken as 1.
pub fn ks_discrete(samples: &[u64], cdf: &[f64]) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_unstable();
    let m = sorted.len() as f64;
    let kmax = sorted.last().copied().unwrap_or(0) as usize;
    let mut d: f64 = 0.0;
    let mut idx = 0usize;
    for k in 0..=kmax.max(cdf.len().saturating_sub(1)) {
        while idx < sorted.len() && sorted[idx] as usize <= k {
            idx += 1;
        }
        let f = cdf.get(k).copied().unwrap_or(1.0);
        d = d.max((idx as f64 / m - f).abs());
    }
    d
}

/// `(x, F(x))` for each grid point; the grid must be sorted.
pub fn ecdf_table(samples: &EmpiricalDistribution, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(invalid("ECDF grid must be sorted"));
    }
    Ok(grid.iter().map(|&x| (x, samples.ecdf(x))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ed(v: &[f64]) -> EmpiricalDistribution {
        EmpiricalDistribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn kr_examples() {
        assert_eq!(kr_distance(&ed(&[1.0, 4.0]), &ed(&[4.0, 1.0])).unwrap(), 0.0);
        assert_eq!(kr_distance(&ed(&[2.0]), &ed(&[5.0])).unwrap(), 3.0);
        assert_eq!(kr_distance(&ed(&[0.0, 1.0]), &ed(&[0.0, 3.0])).unwrap(), 1.0);
        assert!(kr_distance(&ed(&[]), &ed(&[1.0])).is_err());
    }

    #[test]
    fn kr_unequal_counts() {
        // Point mass at 2 against {1, 3}: |F_a - F_b| = 1/2 on [1, 3).
        assert!((kr_distance(&ed(&[2.0]), &ed(&[1.0, 3.0])).unwrap() - 1.0).abs() < 1e-15);
        // Duplicated batch has the same law.
        assert_eq!(kr_distance(&ed(&[1.0, 2.0]), &ed(&[1.0, 1.0, 2.0, 2.0])).unwrap(), 0.0);
    }

    #[test]
    fn mse_examples() {
        assert_eq!(sorted_mse(&ed(&[1.0, 2.0, 3.0]), &ed(&[1.0, 2.0, 3.0])).unwrap(), 0.0);
        assert_eq!(sorted_mse(&ed(&[0.0, 10.0]), &ed(&[1.0, 999.0])).unwrap(), 0.5);
        assert_eq!(sorted_mse_with(&ed(&[0.0, 10.0]), &ed(&[1.0, 999.0]), false).unwrap(), -0.5);
        assert!(sorted_mse(&ed(&[1.0]), &ed(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn ecdf_examples() {
        let s = ed(&[1.0, 2.0, 3.0]);
        let t = ecdf_table(&s, &[0.0, 2.0, 10.0]).unwrap();
        assert_eq!(t, vec![(0.0, 0.0), (2.0, 2.0 / 3.0), (10.0, 1.0)]);
        assert!(ecdf_table(&s, &[2.0, 1.0]).is_err());
    }

    #[test]
    fn ks_statistics() {
        assert_eq!(ks_two_sample(&ed(&[1.0, 2.0]), &ed(&[1.0, 2.0])).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&ed(&[1.0, 2.0]), &ed(&[3.0, 4.0])).unwrap(), 1.0);
        assert_eq!(ks_discrete(&[0, 1, 1, 2], &[0.25, 0.75, 1.0]), 0.0);
        assert!((ks_critical_01(100, 100) - 1.628 * 0.02f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_nan() {
        assert!(EmpiricalDistribution::new(vec![1.0, f64::NAN]).is_err());
    }
}
