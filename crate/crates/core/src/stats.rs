//! Sample statistics for optimizer replicates and pooled chains.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Moments and percentiles of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleSummary<T> {
    pub n: usize,
    pub mean: T,
    /// Sample standard deviation (n - 1 denominator).
    pub std: T,
    pub pct05: T,
    pub median: T,
    pub pct95: T,
    pub min: T,
    pub max: T,
    /// Adjusted Fisher-Pearson skewness G1; `None` for constant samples or n < 3.
    pub skewness: Option<T>,
    /// Fourth standardized moment `m4 / m2^2`; `None` for constant samples.
    pub kurtosis_pearson: Option<T>,
    /// `kurtosis_pearson - 3`.
    pub excess_kurtosis: Option<T>,
}

/// The five error metrics of a set of final fitness values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorSummary<T> {
    pub n: usize,
    pub sum: T,
    pub expected_value: T,
    /// Sample standard deviation; 0 for a single value.
    pub std: T,
    pub max: T,
    pub min: T,
}

/// Equal-width histogram. `edges.len() == counts.len() + 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram<T> {
    pub edges: Vec<T>,
    pub counts: Vec<usize>,
}

fn check_finite<T: Scalar>(samples: &[T], what: &'static str) -> Result<()> {
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(what));
    }
    Ok(())
}

fn mean<T: Scalar>(samples: &[T]) -> T {
    samples.iter().copied().sum::<T>() / T::from_usize_lossy(samples.len())
}

/// Central moments m2, m3, m4 (population normalisation).
fn central_moments<T: Scalar>(samples: &[T], mean: T) -> (T, T, T) {
    let n = T::from_usize_lossy(samples.len());
    let (mut m2, mut m3, mut m4) = (T::zero(), T::zero(), T::zero());
    for &v in samples {
        let d = v - mean;
        let d2 = d * d;
        m2 = m2 + d2;
        m3 = m3 + d2 * d;
        m4 = m4 + d2 * d2;
    }
    (m2 / n, m3 / n, m4 / n)
}

/// Percentile of an ascending-sorted sample by linear interpolation
/// between closest ranks (`q` in [0, 1]).
pub fn percentile_sorted<T: Scalar>(sorted: &[T], q: f64) -> T {
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = T::lit(h - lo as f64);
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub fn summarize<T: Scalar>(samples: &[T]) -> Result<SampleSummary<T>> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::invalid(
            "summary",
            format!("need at least 2 samples, got {n}"),
        ));
    }
    check_finite(samples, "summary samples")?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let m = mean(&sorted);
    let (m2, m3, m4) = central_moments(&sorted, m);
    let nf = T::from_usize_lossy(n);
    let std = (m2 * nf / (nf - T::one())).sqrt();
    let (skewness, kurtosis_pearson) = if m2 > T::zero() {
        let g1 = m3 / m2.powf(T::lit(1.5));
        let skew = (n >= 3).then(|| g1 * (nf * (nf - T::one())).sqrt() / (nf - T::lit(2.0)));
        (skew, Some(m4 / (m2 * m2)))
    } else {
        (None, None)
    };
    Ok(SampleSummary {
        n,
        mean: m,
        std,
        pct05: percentile_sorted(&sorted, 0.05),
        median: percentile_sorted(&sorted, 0.5),
        pct95: percentile_sorted(&sorted, 0.95),
        min: sorted[0],
        max: sorted[n - 1],
        skewness,
        kurtosis_pearson,
        excess_kurtosis: kurtosis_pearson.map(|k| k - T::lit(3.0)),
    })
}

/// Doane bin count for `n` samples with population skewness `g1`:
/// `round(1 + log2 n + log2(1 + |g1| / sigma_g1))`, at least 1.
pub fn doane_formula(n: usize, g1: f64) -> usize {
    let nf = n as f64;
    let sigma = (6.0 * (nf - 2.0) / ((nf + 1.0) * (nf + 3.0))).sqrt();
    let g = if g1.is_finite() { g1.abs() } else { 0.0 };
    let k = 1.0 + nf.log2() + (1.0 + g / sigma).log2();
    (k.round() as usize).max(1)
}

pub fn doane_bin_count<T: Scalar>(samples: &[T]) -> Result<usize> {
    let n = samples.len();
    if n < 3 {
        return Err(Error::invalid(
            "doane",
            format!("need at least 3 samples, got {n}"),
        ));
    }
    check_finite(samples, "doane samples")?;
    let m = mean(samples);
    let (m2, m3, _) = central_moments(samples, m);
    let g1 = if m2 > T::zero() {
        (m3 / m2.powf(T::lit(1.5))).as_f64()
    } else {
        0.0
    };
    Ok(doane_formula(n, g1))
}

pub fn error_metrics<T: Scalar>(values: &[T]) -> Result<ErrorSummary<T>> {
    if values.is_empty() {
        return Err(Error::Empty("error metrics"));
    }
    check_finite(values, "error metrics")?;
    let n = values.len();
    let sum: T = values.iter().copied().sum();
    let expected_value = sum / T::from_usize_lossy(n);
    let std = if n > 1 {
        let ss: T = values
            .iter()
            .map(|&v| (v - expected_value) * (v - expected_value))
            .sum();
        (ss / T::from_usize_lossy(n - 1)).sqrt()
    } else {
        T::zero()
    };
    let min = values.iter().copied().fold(T::infinity(), T::min);
    let max = values.iter().copied().fold(T::neg_infinity(), T::max);
    Ok(ErrorSummary {
        n,
        sum,
        expected_value: expected_value.max(min).min(max),
        std,
        max,
        min,
    })
}

/// Equal-width bins over [min, max]; bins are right-open except the last.
/// A constant sample yields one bin holding everything.
pub fn histogram<T: Scalar>(samples: &[T], bins: usize) -> Result<Histogram<T>> {
    if bins == 0 {
        return Err(Error::invalid("histogram", "bins must be >= 1"));
    }
    if samples.is_empty() {
        return Err(Error::Empty("histogram"));
    }
    check_finite(samples, "histogram samples")?;
    let lo = samples.iter().copied().fold(T::infinity(), T::min);
    let hi = samples.iter().copied().fold(T::neg_infinity(), T::max);
    if lo == hi {
        return Ok(Histogram {
            edges: vec![lo, hi],
            counts: vec![samples.len()],
        });
    }
    let width = (hi - lo) / T::from_usize_lossy(bins);
    let edges = (0..=bins)
        .map(|k| {
            if k == bins {
                hi
            } else {
                lo + width * T::from_usize_lossy(k)
            }
        })
        .collect();
    let mut counts = vec![0; bins];
    for &v in samples {
        let k = ((v - lo) / width)
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(bins - 1);
        counts[k] += 1;
    }
    Ok(Histogram { edges, counts })
}

/// Monte-Carlo standard errors of the mean and of the standard deviation of
/// a correlated series, from `n_batches` contiguous batches.
pub fn batch_means_se<T: Scalar>(series: &[T], n_batches: usize) -> Result<(T, T)> {
    if n_batches < 2 || series.len() < 2 * n_batches {
        return Err(Error::invalid(
            "batch means",
            format!(
                "{} samples cannot form {n_batches} batches of size >= 2",
                series.len()
            ),
        ));
    }
    let size = series.len() / n_batches;
    let mut means = Vec::with_capacity(n_batches);
    let mut stds = Vec::with_capacity(n_batches);
    for b in series.chunks_exact(size).take(n_batches) {
        let s = summarize(b)?;
        means.push(s.mean);
        stds.push(s.std);
    }
    let k = T::from_usize_lossy(n_batches).sqrt();
    Ok((summarize(&means)?.std / k, summarize(&stds)?.std / k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn one_to_five() {
        let s = summarize(&[1.0f64, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(s.mean, 3.0);
        assert!((s.pct05 - 1.2).abs() < 1e-12);
        assert!((s.pct95 - 4.8).abs() < 1e-12);
        assert_eq!(s.median, 3.0);
        assert!((s.std - 2.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(s.skewness, Some(0.0));
        // m4/m2^2 = 6.8 / 4 = 1.7
        assert!((s.kurtosis_pearson.unwrap() - 1.7).abs() < 1e-12);
        assert!((s.excess_kurtosis.unwrap() + 1.3).abs() < 1e-12);
    }

    #[test]
    fn constant_sample() {
        let s = summarize(&[4.0f64; 6]).unwrap();
        assert_eq!((s.std, s.pct05, s.pct95), (0.0, 4.0, 4.0));
        assert!(s.kurtosis_pearson.is_none() && s.skewness.is_none());
        assert!(summarize(&[1.0]).is_err());
        assert!(summarize(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn skewed_sample_matches_reference() {
        // {1, 2, 3, 10}: deviations -3, -2, -1, 6 give m2 = 12.5, m3 = 45.
        let s = summarize(&[1.0f64, 2.0, 3.0, 10.0]).unwrap();
        let g1 = 45.0 / 12.5f64.powf(1.5);
        assert!((s.skewness.unwrap() - g1 * 12f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn normal_kurtosis() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v: Vec<f64> = (0..100_000).map(|_| rng.sample(StandardNormal)).collect();
        let s = summarize(&v).unwrap();
        assert!((s.kurtosis_pearson.unwrap() - 3.0).abs() < 0.1);
        assert!(s.excess_kurtosis.unwrap().abs() < 0.1);
    }

    #[test]
    fn doane_cases() {
        assert_eq!(doane_formula(8, 0.0), 4);
        assert_eq!(doane_formula(267_000, 0.03), 22);
        for n in [10, 37, 100, 1000, 5000] {
            assert_eq!(doane_formula(2 * n, 0.0), doane_formula(n, 0.0) + 1);
        }
        let symmetric = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        assert_eq!(doane_bin_count(&symmetric).unwrap(), 4);
        assert!(doane_bin_count(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn error_metric_cases() {
        let e = error_metrics(&[7.5]).unwrap();
        assert_eq!(
            (e.sum, e.expected_value, e.std, e.max, e.min),
            (7.5, 7.5, 0.0, 7.5, 7.5)
        );
        let e = error_metrics(&[10.0, 12.0]).unwrap();
        assert_eq!(
            (e.sum, e.expected_value, e.max, e.min),
            (22.0, 11.0, 12.0, 10.0)
        );
        assert!(error_metrics::<f64>(&[]).is_err());
    }

    #[test]
    fn histogram_cases() {
        let h = histogram(&[0.0, 1.0, 2.0, 3.0], 2).unwrap();
        assert_eq!(h.counts, vec![2, 2]);
        assert_eq!(h.edges, vec![0.0, 1.5, 3.0]);
        let h = histogram(&[2.0; 5], 4).unwrap();
        assert_eq!(h.counts, vec![5]);
        assert!(histogram(&[1.0], 0).is_err());
    }

    #[test]
    fn uniform_histogram() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
        let h = histogram(&v, 10).unwrap();
        for c in h.counts {
            assert!((c as i64 - 10_000).abs() <= 500, "{c}");
        }
    }

    #[test]
    fn batch_means_iid() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let v: Vec<f64> = (0..40_000).map(|_| rng.sample(StandardNormal)).collect();
        let (se_mean, se_std): (f64, f64) = batch_means_se(&v, 40).unwrap();
        // i.i.d.: 1/sqrt(n) and roughly 1/sqrt(2n).
        assert!((se_mean / (1.0 / 200.0) - 1.0).abs() < 0.35, "{se_mean}");
        assert!((se_std / (1.0 / 282.8) - 1.0).abs() < 0.35, "{se_std}");
        assert!(batch_means_se(&v[..10], 8).is_err());
    }

    proptest! {
        #[test]
        fn permutation_invariant(mut v in prop::collection::vec(-1e3..1e3f64, 2..60), seed in 0u64..1000) {
            let a = summarize(&v).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in (1..v.len()).rev() {
                v.swap(i, rng.random_range(0..=i));
            }
            let b = summarize(&v).unwrap();
            prop_assert_eq!((a.pct05, a.median, a.pct95, a.min, a.max), (b.pct05, b.median, b.pct95, b.min, b.max));
            prop_assert!((a.mean - b.mean).abs() <= 1e-9 * a.mean.abs().max(1.0));
            prop_assert!(a.pct05 <= a.median && a.median <= a.pct95);
        }

        #[test]
        fn error_identities(v in prop::collection::vec(0.0..1e3f64, 1..80)) {
            let e = error_metrics(&v).unwrap();
            prop_assert_eq!(e.sum, v.iter().sum::<f64>());
            prop_assert!(e.min <= e.expected_value && e.expected_value <= e.max);
            prop_assert!((e.sum - e.expected_value * v.len() as f64).abs() <= 1e-9 * e.sum.max(1.0));
        }

        #[test]
        fn histogram_conserves(v in prop::collection::vec(-50.0..50.0f64, 1..200), bins in 1usize..30) {
            let h = histogram(&v, bins).unwrap();
            prop_assert_eq!(h.counts.iter().sum::<usize>(), v.len());
            prop_assert_eq!(h.edges.len(), h.counts.len() + 1);
        }
    }
}
