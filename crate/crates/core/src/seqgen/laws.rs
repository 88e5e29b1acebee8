//! Distribution descriptors for degrees, weights and personalization values.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::zeta::ZetaSampler;
use crate::error::{invalid, Error, Result};

/// A real-valued law used for `ζ` (damping) and `Q` (personalization).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarLaw {
    Constant { value: f64 },
    Uniform { low: f64, high: f64 },
}

impl ScalarLaw {
    pub fn constant(value: f64) -> Self {
        ScalarLaw::Constant { value }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ScalarLaw::Constant { value } if value.is_finite() => Ok(()),
            ScalarLaw::Uniform { low, high } if low.is_finite() && high.is_finite() && low < high => Ok(()),
            _ => Err(invalid(format!("malformed scalar law {self:?}"))),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ScalarLaw::Constant { value } => value,
            ScalarLaw::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ScalarLaw::Constant { value } => value,
            ScalarLaw::Uniform { low, high } => 0.5 * (low + high),
        }
    }

    pub fn mean_abs(&self) -> f64 {
        match *self {
            ScalarLaw::Constant { value } => value.abs(),
            ScalarLaw::Uniform { low, high } => {
                if low >= 0.0 || high <= 0.0 {
                    0.5 * (low + high).abs()
                } else {
                    (low * low + high * high) / (2.0 * (high - low))
                }
            }
        }
    }

    /// Essential supremum of `|X|`.
    pub fn abs_bound(&self) -> f64 {
        match *self {
            ScalarLaw::Constant { value } => value.abs(),
            ScalarLaw::Uniform { low, high } => low.abs().max(high.abs()),
        }
    }

    /// `E[X^p]` for a nonnegative law.
    pub fn moment(&self, p: f64) -> Result<f64> {
        match *self {
            ScalarLaw::Constant { value } if value >= 0.0 => Ok(value.powf(p)),
            ScalarLaw::Uniform { low, high } if low >= 0.0 => {
                Ok((high.powf(p + 1.0) - low.powf(p + 1.0)) / ((p + 1.0) * (high - low)))
            }
            _ => Err(invalid("fractional moments require a nonnegative law")),
        }
    }

    /// `P(X > x)`.
    pub fn survival(&self, x: f64) -> f64 {
        match *self {
            ScalarLaw::Constant { value } => f64::from(u8::from(value > x)),
            ScalarLaw::Uniform { low, high } => ((high - x) / (high - low)).clamp(0.0, 1.0),
        }
    }
}

/// A law on the nonnegative integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CountLaw {
    PointMass {
        value: u64,
    },
    Finite {
        support: Vec<u64>,
        probs: Vec<f64>,
    },
    /// `X + Y` with `X ~ Zeta(exponent)` and `Y ~ Poisson(rate)` independent.
    ZetaPoisson {
        exponent: f64,
        rate: f64,
    },
    /// Zero with probability `zero_prob`, otherwise `⌊scale · U^(-1/alpha)⌋`,
    /// so that `P(K ≥ k | K > 0) = min(1, (scale / k)^alpha)`.
    DiscretePareto {
        alpha: f64,
        scale: f64,
        zero_prob: f64,
    },
}

#[derive(Debug, Clone)]
enum Inner {
    Point(u64),
    Finite {
        support: Vec<u64>,
        cdf: Vec<f64>,
        biased_cdf: Option<Vec<f64>>,
        mean: f64,
    },
    ZetaPoisson {
        zeta: Arc<ZetaSampler>,
        // Size-biased zeta(s) is zeta(s - 1); absent when that has no mean.
        zeta_biased: Option<Arc<ZetaSampler>>,
        rate: f64,
        poisson: Option<Poisson<f64>>,
        zeta_mean: f64,
    },
    Pareto {
        alpha: f64,
        scale: f64,
        zero_prob: f64,
        mean: f64,
    },
}

/// Sampler for a [`CountLaw`], including its size-biased version
/// `P(K̃ = k) = k P(K = k) / E[K]`.
#[derive(Debug, Clone)]
pub struct CountSampler {
    law: CountLaw,
    inner: Inner,
}

fn poisson_draw<R: Rng + ?Sized>(poisson: &Option<Poisson<f64>>, rng: &mut R) -> u64 {
    poisson.as_ref().map_or(0, |p| p.sample(rng) as u64)
}

fn cumulative(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    let mut out: Vec<f64> = weights
        .iter()
        .map(|w| {
            acc += w;
            acc / total
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    out
}

fn pick<R: Rng + ?Sized>(cdf: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

impl CountSampler {
    pub fn new(law: CountLaw) -> Result<Self> {
        let inner = match &law {
            CountLaw::PointMass { value } => Inner::Point(*value),
            CountLaw::Finite { support, probs } => {
                if support.is_empty() || support.len() != probs.len() {
                    return Err(invalid("finite law needs matching non-empty support and probs"));
                }
                if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) || probs.iter().sum::<f64>() <= 0.0 {
                    return Err(invalid("finite law probabilities must be nonnegative with positive total"));
                }
                let total: f64 = probs.iter().sum();
                let mean = support.iter().zip(probs).map(|(&k, p)| k as f64 * p).sum::<f64>() / total;
                let biased: Vec<f64> = support.iter().zip(probs).map(|(&k, p)| k as f64 * p).collect();
                let biased_cdf = (mean > 0.0).then(|| cumulative(&biased));
                Inner::Finite { support: support.clone(), cdf: cumulative(probs), biased_cdf, mean }
            }
            CountLaw::ZetaPoisson { exponent, rate } => {
                if !(*rate >= 0.0) || !rate.is_finite() {
                    return Err(invalid(format!("poisson rate must be finite and >= 0, got {rate}")));
                }
                let zeta = Arc::new(ZetaSampler::new(*exponent)?);
                let zeta_biased =
                    if *exponent > 2.0 { Some(Arc::new(ZetaSampler::new(exponent - 1.0)?)) } else { None };
                let zeta_mean = zeta.mean();
                let poisson = if *rate > 0.0 {
                    Some(Poisson::new(*rate).map_err(|e| invalid(format!("poisson rate {rate}: {e}")))?)
                } else {
                    None
                };
                Inner::ZetaPoisson { zeta, zeta_biased, rate: *rate, poisson, zeta_mean }
            }
            CountLaw::DiscretePareto { alpha, scale, zero_prob } => {
                if !(*alpha > 1.0) || !alpha.is_finite() {
                    return Err(invalid(format!("pareto index must be finite and > 1, got {alpha}")));
                }
                if !(*scale >= 1.0) || !scale.is_finite() || *scale > 1e6 {
                    return Err(invalid(format!("pareto scale must lie in [1, 1e6], got {scale}")));
                }
                if !(0.0..1.0).contains(zero_prob) {
                    return Err(invalid(format!("zero_prob must lie in [0, 1), got {zero_prob}")));
                }
                let mean = (1.0 - zero_prob) * pareto_power_sum(*alpha, *scale, 1.0);
                Inner::Pareto { alpha: *alpha, scale: *scale, zero_prob: *zero_prob, mean }
            }
        };
        Ok(Self { law, inner })
    }

    pub fn law(&self) -> &CountLaw {
        &self.law
    }

    pub fn mean(&self) -> f64 {
        match &self.inner {
            Inner::Point(v) => *v as f64,
            Inner::Finite { mean, .. } => *mean,
            Inner::ZetaPoisson { rate, zeta_mean, .. } => zeta_mean + rate,
            Inner::Pareto { mean, .. } => *mean,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match &self.inner {
            Inner::Point(v) => *v,
            Inner::Finite { support, cdf, .. } => support[pick(cdf, rng)],
            Inner::ZetaPoisson { zeta, poisson, .. } => zeta.sample(rng) + poisson_draw(poisson, rng),
            Inner::Pareto { alpha, scale, zero_prob, .. } => {
                if rng.random::<f64>() < *zero_prob {
                    return 0;
                }
                let v: f64 = rng.random();
                let x = scale * (1.0 - v).powf(-1.0 / alpha);
                if x < u64::MAX as f64 {
                    x.floor() as u64
                } else {
                    u64::MAX
                }
            }
        }
    }

    /// Draw from the size-biased law. Errors when the mean is zero or infinite.
    pub fn sample_size_biased<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<u64> {
        match &self.inner {
            Inner::Point(0) => Err(Error::NoStubs),
            Inner::Point(v) => Ok(*v),
            Inner::Finite { support, biased_cdf, .. } => match biased_cdf {
                Some(cdf) => Ok(support[pick(cdf, rng)]),
                None => Err(Error::NoStubs),
            },
            Inner::ZetaPoisson { zeta, zeta_biased, rate, poisson, zeta_mean } => {
                let biased =
                    zeta_biased.as_ref().ok_or_else(|| invalid("size-biasing a zeta law with infinite mean"))?;
                // k P(X+Y=k) = E[X 1{X+Y=k}] + E[Y 1{X+Y=k}]: a two-component mixture.
                let total = zeta_mean + rate;
                let u: f64 = rng.random();
                if u * total < *zeta_mean {
                    Ok(biased.sample(rng) + poisson_draw(poisson, rng))
                } else {
                    Ok(zeta.sample(rng) + poisson_draw(poisson, rng) + 1)
                }
            }
            Inner::Pareto { .. } => Err(invalid("size-biased draws are not available for the discrete pareto law")),
        }
    }

    /// `P(K = k)`; for the zeta–Poisson law evaluated by direct convolution.
    pub fn pmf(&self, k: u64) -> f64 {
        match &self.inner {
            Inner::Point(v) => f64::from(u8::from(*v == k)),
            Inner::Finite { support, cdf, .. } => {
                let mut prev = 0.0;
                let mut total = 0.0;
                for (s, c) in support.iter().zip(cdf) {
                    if *s == k {
                        total += c - prev;
                    }
                    prev = *c;
                }
                total
            }
            Inner::ZetaPoisson { zeta, rate, .. } => (1..=k).map(|x| zeta.pmf(x) * poisson_pmf(*rate, k - x)).sum(),
            Inner::Pareto { alpha, scale, zero_prob, .. } => {
                if k == 0 {
                    *zero_prob
                } else {
                    let at_least = |j: u64| (scale / j as f64).powf(*alpha).min(1.0);
                    (1.0 - zero_prob) * (at_least(k) - at_least(k + 1))
                }
            }
        }
    }

    /// `P(K ≤ k)` for `k = 0..=kmax`.
    pub fn cdf_table(&self, kmax: u64) -> Vec<f64> {
        let pmf: Vec<f64> = match &self.inner {
            Inner::ZetaPoisson { zeta, rate, .. } => {
                let z: Vec<f64> = (0..=kmax).map(|k| zeta.pmf(k)).collect();
                let p = poisson_pmf_table(*rate, kmax);
                let p_last = p.iter().rposition(|&x| x > 1e-300).unwrap_or(0);
                (0..=kmax as usize).map(|k| (0..=k.min(p_last)).map(|y| p[y] * z[k - y]).sum()).collect()
            }
            _ => (0..=kmax).map(|k| self.pmf(k)).collect(),
        };
        let mut acc = 0.0;
        pmf.iter()
            .map(|p| {
                acc += p;
                acc.min(1.0)
            })
            .collect()
    }

    /// `P(K ≥ 1)`.
    pub fn prob_positive(&self) -> f64 {
        match &self.inner {
            Inner::ZetaPoisson { .. } => 1.0,
            Inner::Pareto { zero_prob, .. } => 1.0 - zero_prob,
            _ => 1.0 - self.pmf(0),
        }
    }

    /// `E[K^p]` for `p ≥ 0`; infinite when the moment diverges.
    pub fn moment(&self, p: f64) -> f64 {
        match &self.inner {
            Inner::Point(v) => (*v as f64).powf(p),
            Inner::Finite { support, cdf, .. } => {
                let mut prev = 0.0;
                support
                    .iter()
                    .zip(cdf)
                    .map(|(&k, &c)| {
                        let w = c - prev;
                        prev = c;
                        w * (k as f64).powf(p)
                    })
                    .sum()
            }
            Inner::ZetaPoisson { zeta, rate, .. } => zeta_poisson_moment(zeta.exponent(), zeta.normalizer(), *rate, p),
            Inner::Pareto { alpha, scale, zero_prob, .. } => {
                let positive = (1.0 - zero_prob) * pareto_power_sum(*alpha, *scale, p);
                if p == 0.0 {
                    positive + zero_prob
                } else {
                    positive
                }
            }
        }
    }

    /// `E[K̃^(-p)]` under the size-biased law, i.e. `E[K^(1-p) 1{K≥1}] / E[K]`.
    pub fn size_biased_inverse_moment(&self, p: f64) -> f64 {
        let mean = self.mean();
        match &self.inner {
            Inner::Point(v) => (*v as f64).powf(-p),
            Inner::Finite { support, cdf, .. } => {
                let mut prev = 0.0;
                support
                    .iter()
                    .zip(cdf)
                    .map(|(&k, &c)| {
                        let w = c - prev;
                        prev = c;
                        if k == 0 {
                            0.0
                        } else {
                            w * (k as f64).powf(1.0 - p)
                        }
                    })
                    .sum::<f64>()
                    / mean
            }
            Inner::ZetaPoisson { .. } => self.moment(1.0 - p) / mean,
            Inner::Pareto { alpha, scale, zero_prob, .. } => {
                (1.0 - zero_prob) * pareto_power_sum(*alpha, *scale, 1.0 - p) / mean
            }
        }
    }
}

/// `E[K^p]` for `K = ⌊scale · U^(-1/alpha)⌋ ≥ 1`, by summation by parts:
/// `Σ_k (k^p - (k-1)^p) P(K ≥ k)`, summed to `M` with an integral remainder.
fn pareto_power_sum(alpha: f64, scale: f64, p: f64) -> f64 {
    if p >= alpha {
        return f64::INFINITY;
    }
    if p == 0.0 {
        return 1.0;
    }
    const M: u64 = 200_000;
    let at_least = |k: f64| (scale / k).powf(alpha).min(1.0);
    let mut total = 0.0;
    for k in (1..=M).rev() {
        let kf = k as f64;
        total += (kf.powf(p) - (kf - 1.0).powf(p)) * at_least(kf);
    }
    // Σ_{k>M} p k^(p-1) (scale/k)^alpha ≈ ∫_{M+1/2}^∞ p scale^alpha x^(p-1-alpha) dx.
    let a = M as f64 + 0.5;
    total + p * scale.powf(alpha) * a.powf(p - alpha) / (alpha - p)
}

pub fn poisson_pmf(rate: f64, k: u64) -> f64 {
    if rate <= 0.0 {
        return f64::from(u8::from(k == 0));
    }
    let kf = k as f64;
    (kf * rate.ln() - rate - ln_factorial(k)).exp()
}

/// `P(Y = k)` for `k = 0..=kmax`, truncated once the terms underflow past the mode.
fn poisson_pmf_table(rate: f64, kmax: u64) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 0..=kmax {
        let p = poisson_pmf(rate, k);
        if p < 1e-300 && k as f64 > rate {
            break;
        }
        out.push(p);
    }
    out
}

fn ln_factorial(k: u64) -> f64 {
    (1..=k).map(|i| (i as f64).ln()).sum()
}

/// `E[(X + Y)^p]` for `X ~ Zeta(s)`, `Y ~ Poisson(rate)`.
///
/// The inner sum over `x` is summed directly up to `x = M` and the remainder
/// is integrated term-by-term from the binomial expansion of `(x + y)^p`.
fn zeta_poisson_moment(s: f64, zeta_s: f64, rate: f64, p: f64) -> f64 {
    if p >= s - 1.0 {
        return f64::INFINITY;
    }
    const M: u64 = 20_000;
    let ymax = if rate > 0.0 { (rate + 12.0 * rate.sqrt() + 30.0).ceil() as u64 } else { 0 };
    let mut total = 0.0;
    for y in 0..=ymax {
        let w = poisson_pmf(rate, y);
        if w < 1e-300 {
            continue;
        }
        let yf = y as f64;
        let mut inner = 0.0;
        for x in (1..=M).rev() {
            let xf = x as f64;
            inner += (xf + yf).powf(p) * xf.powf(-s);
        }
        // Remainder Σ_{x>M} (x+y)^p x^(-s) ≈ ∫_{M+1/2}^∞ via Σ_m C(p,m) y^m x^(p-m-s).
        let a = M as f64 + 0.5;
        let mut binom = 1.0;
        let mut rem = 0.0;
        for m in 0..8 {
            let e = p - m as f64 - s;
            rem += binom * yf.powi(m) * a.powf(e + 1.0) / (-(e + 1.0));
            binom *= (p - m as f64) / (m as f64 + 1.0);
        }
        total += w * (inner + rem);
    }
    total / zeta_s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn finite_size_biased_pmf() {
        // D ∈ {1,2} equiprobable: size-biased weights 1·½ and 2·½ over μ = 1.5.
        let s = CountSampler::new(CountLaw::Finite { support: vec![1, 2], probs: vec![0.5, 0.5] }).unwrap();
        let mut rng = stream(5, 1, 0);
        let m = 300_000;
        let ones = (0..m).filter(|_| s.sample_size_biased(&mut rng).unwrap() == 1).count();
        let f = ones as f64 / m as f64;
        let se = ((1.0 / 3.0) * (2.0 / 3.0) / m as f64).sqrt();
        assert!((f - 1.0 / 3.0).abs() < 3.0 * se);
    }

    #[test]
    fn size_biasing_zero_fails() {
        let s = CountSampler::new(CountLaw::PointMass { value: 0 }).unwrap();
        let mut rng = stream(5, 1, 1);
        assert!(matches!(s.sample_size_biased(&mut rng), Err(Error::NoStubs)));
    }

    #[test]
    fn zeta_poisson_size_biased_mean() {
        // E[K̃] = E[K^2]/E[K].
        let law = CountSampler::new(CountLaw::ZetaPoisson { exponent: 4.5, rate: 0.5 }).unwrap();
        let expected = law.moment(2.0) / law.mean();
        let mut rng = stream(5, 1, 2);
        let m = 400_000;
        let xs: Vec<f64> = (0..m).map(|_| law.sample_size_biased(&mut rng).unwrap() as f64).collect();
        let mean = xs.iter().sum::<f64>() / m as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m as f64;
        let se = (var / m as f64).sqrt();
        assert!((mean - expected).abs() < 4.0 * se, "{mean} vs {expected}");
    }

    #[test]
    fn zeta_poisson_moment_matches_brute_force() {
        // Brute force over a long direct convolution.
        let law = CountSampler::new(CountLaw::ZetaPoisson { exponent: 4.0, rate: 0.8 }).unwrap();
        let cdf = law.cdf_table(200_000);
        let mut prev = 0.0;
        let mut brute = 0.0;
        for (k, c) in cdf.iter().enumerate() {
            brute += (c - prev) * (k as f64).powf(1.5);
            prev = *c;
        }
        let m = law.moment(1.5);
        assert!(((m - brute) / m).abs() < 1e-6, "{m} vs {brute}");
        assert!((law.moment(1.0) - law.mean()).abs() < 1e-9);
    }

    #[test]
    fn discrete_pareto_tail_and_moments() {
        let law = CountSampler::new(CountLaw::DiscretePareto { alpha: 2.5, scale: 2.0, zero_prob: 0.4 }).unwrap();
        // Brute-force moments from the pmf over a long support.
        let kmax = 2_000_000u64;
        let (mut total, mut first, mut half) = (0.0, 0.0, 0.0);
        for k in (0..=kmax).rev() {
            let p = law.pmf(k);
            total += p;
            first += p * k as f64;
            half += p * (k as f64).sqrt();
        }
        assert!((total - 1.0).abs() < 1e-12);
        assert!(((law.mean() - first) / first).abs() < 1e-6, "{} vs {first}", law.mean());
        assert!(((law.moment(0.5) - half) / half).abs() < 1e-9);
        assert_eq!(law.moment(2.5), f64::INFINITY);
        assert_eq!(law.pmf(0), 0.4);
        assert_eq!(law.pmf(1), 0.0);
        let mut rng = stream(5, 1, 3);
        let m = 400_000;
        let above = (0..m).filter(|_| law.sample(&mut rng) >= 7).count();
        let p = 0.6 * (2.0f64 / 7.0).powf(2.5);
        let f = above as f64 / m as f64;
        assert!((f - p).abs() < 4.0 * (p * (1.0 - p) / m as f64).sqrt(), "{f} vs {p}");
        assert!(law.sample_size_biased(&mut rng).is_err());
    }

    #[test]
    fn discrete_pareto_rejects_bad_parameters() {
        for (alpha, scale, zero_prob) in [(1.0, 2.0, 0.0), (2.5, 0.5, 0.0), (2.5, 2.0, 1.0), (f64::NAN, 2.0, 0.0)] {
            assert!(CountSampler::new(CountLaw::DiscretePareto { alpha, scale, zero_prob }).is_err());
        }
    }

    #[test]
    fn uniform_moments() {
        let u = ScalarLaw::Uniform { low: -0.3, high: 0.3 };
        assert!((u.mean_abs() - 0.15).abs() < 1e-15);
        assert_eq!(u.abs_bound(), 0.3);
        assert!(u.moment(2.0).is_err());
        let v = ScalarLaw::Uniform { low: 0.0, high: 1.0 };
        assert!((v.moment(2.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }
}
