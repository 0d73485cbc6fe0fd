//! Nonparametric tests used by the tuning pipeline.
//!
//! All tests work on mid-ranks, so they are invariant under strictly
//! increasing transformations of the data.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Combined sample size up to which the rank-sum test is exact.
pub const EXACT_RANK_SUM_LIMIT: usize = 12;
/// Number of non-zero pairs up to which the signed-rank test is exact.
pub const EXACT_SIGNED_RANK_LIMIT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct TestResult<F = f64> {
    pub statistic: F,
    pub p_value: F,
}

fn cmp<F: Scalar>(a: &F, b: &F) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

fn check_finite<F: Scalar>(values: &[F]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite value in sample".into()));
    }
    Ok(())
}

pub fn median<F: Scalar>(sample: &[F]) -> Result<F> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut v = sample.to_vec();
    v.sort_by(cmp);
    let n = v.len();
    Ok(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / F::of(2.0) })
}

/// Mid-ranks (1-based) and the tie term `sum(t^3 - t)` over tie groups.
pub fn midranks<F: Scalar>(values: &[F]) -> (Vec<F>, F) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| cmp(&values[i], &values[j]));
    let mut ranks = vec![F::zero(); n];
    let mut ties = F::zero();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j (0-based) share rank mean of (i+1)..=j
        let r = F::of((i + 1 + j) as f64 / 2.0);
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        let t = F::of_usize(j - i);
        ties = ties + t * t * t - t;
        i = j;
    }
    (ranks, ties)
}

fn normal_sf(z: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").sf(z)
}

fn chi2_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(df).expect("positive degrees of freedom").sf(x)
}

/// Two-sided Wilcoxon rank-sum (Mann-Whitney) test. The statistic is the
/// rank sum of `a`.
pub fn wilcoxon_rank_sum<F: Scalar>(a: &[F], b: &[F]) -> Result<TestResult<F>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    check_finite(a)?;
    check_finite(b)?;
    let (na, nb) = (a.len(), b.len());
    let n = na + nb;
    let pooled: Vec<F> = a.iter().chain(b.iter()).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let w: f64 = ranks[..na].iter().map(|r| r.as_f64()).sum();
    let expected = na as f64 * (n as f64 + 1.0) / 2.0;

    let p = if n <= EXACT_RANK_SUM_LIMIT {
        // Mid-ranks are multiples of 1/2: count subsets of size `na` by
        // doubled rank sum.
        let doubled: Vec<usize> = ranks.iter().map(|r| (r.as_f64() * 2.0).round() as usize).collect();
        let max_sum: usize = doubled.iter().sum();
        let mut ways = vec![vec![0f64; max_sum + 1]; na + 1];
        ways[0][0] = 1.0;
        for &r in &doubled {
            for k in (1..=na).rev() {
                for s in (r..=max_sum).rev() {
                    ways[k][s] += ways[k - 1][s - r];
                }
            }
        }
        let total: f64 = ways[na].iter().sum();
        let observed = (2.0 * w - 2.0 * expected).abs();
        let extreme: f64 = ways[na]
            .iter()
            .enumerate()
            .filter(|(s, _)| (*s as f64 - 2.0 * expected).abs() >= observed - 1e-9)
            .map(|(_, c)| c)
            .sum();
        extreme / total
    } else {
        let (naf, nbf, nf) = (na as f64, nb as f64, n as f64);
        let var = naf * nbf / 12.0 * ((nf + 1.0) - ties.as_f64() / (nf * (nf - 1.0)));
        if var <= 0.0 {
            1.0
        } else {
            let z = ((w - expected).abs() - 0.5).max(0.0) / var.sqrt();
            (2.0 * normal_sf(z)).min(1.0)
        }
    };
    Ok(TestResult { statistic: F::of(w), p_value: F::of(p.min(1.0)) })
}

/// Two-sided Wilcoxon signed-rank test on paired samples; zero differences
/// are dropped. The statistic is the sum of ranks of positive differences.
pub fn wilcoxon_signed_rank<F: Scalar>(x: &[F], y: &[F]) -> Result<TestResult<F>> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    if x.is_empty() {
        return Err(Error::EmptySample);
    }
    check_finite(x)?;
    check_finite(y)?;
    let diffs: Vec<F> = x.iter().zip(y).map(|(&a, &b)| a - b).filter(|d| !d.is_zero()).collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(TestResult { statistic: F::zero(), p_value: F::one() });
    }
    let abs: Vec<F> = diffs.iter().map(|d| d.abs()).collect();
    let (ranks, ties) = midranks(&abs);
    let v: f64 = ranks.iter().zip(&diffs).filter(|(_, d)| **d > F::zero()).map(|(r, _)| r.as_f64()).sum();
    let nf = n as f64;
    let expected = nf * (nf + 1.0) / 4.0;

    let p = if n <= EXACT_SIGNED_RANK_LIMIT {
        let doubled: Vec<usize> = ranks.iter().map(|r| (r.as_f64() * 2.0).round() as usize).collect();
        let max_sum: usize = doubled.iter().sum();
        let mut prob = vec![0f64; max_sum + 1];
        prob[0] = 1.0;
        for &r in &doubled {
            for s in (0..=max_sum).rev() {
                let with = if s >= r { prob[s - r] } else { 0.0 };
                prob[s] = 0.5 * (prob[s] + with);
            }
        }
        let observed = (2.0 * v - 2.0 * expected).abs();
        prob.iter()
            .enumerate()
            .filter(|(s, _)| (*s as f64 - 2.0 * expected).abs() >= observed - 1e-9)
            .map(|(_, p)| p)
            .sum::<f64>()
    } else {
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - ties.as_f64() / 48.0;
        if var <= 0.0 {
            1.0
        } else {
            let z = ((v - expected).abs() - 0.5).max(0.0) / var.sqrt();
            2.0 * normal_sf(z)
        }
    };
    Ok(TestResult { statistic: F::of(v), p_value: F::of(p.min(1.0)) })
}

/// Kruskal-Wallis H test with tie correction; p from chi-square(k - 1).
pub fn kruskal_wallis<F: Scalar>(groups: &[Vec<F>]) -> Result<TestResult<F>> {
    if groups.len() < 2 {
        return Err(Error::InvalidArgument("Kruskal-Wallis needs at least two groups".into()));
    }
    if groups.iter().any(|g| g.is_empty()) {
        return Err(Error::EmptySample);
    }
    let pooled: Vec<F> = groups.iter().flatten().copied().collect();
    check_finite(&pooled)?;
    let n = pooled.len() as f64;
    let (ranks, ties) = midranks(&pooled);
    let mut offset = 0;
    let mut sum = 0.0;
    for g in groups {
        let r: f64 = ranks[offset..offset + g.len()].iter().map(|r| r.as_f64()).sum();
        sum += r * r / g.len() as f64;
        offset += g.len();
    }
    let h = 12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0);
    let correction = 1.0 - ties.as_f64() / (n * n * n - n);
    if correction <= 0.0 {
        return Ok(TestResult { statistic: F::zero(), p_value: F::one() });
    }
    let h = (h / correction).max(0.0);
    let p = chi2_sf(h, (groups.len() - 1) as f64);
    Ok(TestResult { statistic: F::of(h), p_value: F::of(p) })
}

/// Friedman test over blocks (rows) and treatments (columns), mid-ranks
/// within rows, tie-corrected; p from chi-square(k - 1).
pub fn friedman<F: Scalar>(blocked: &[Vec<F>]) -> Result<TestResult<F>> {
    let n = blocked.len();
    if n < 2 {
        return Err(Error::InvalidArgument("Friedman test needs at least two rows".into()));
    }
    let k = blocked[0].len();
    if k < 2 {
        return Err(Error::InvalidArgument("Friedman test needs at least two columns".into()));
    }
    let mut rank_sums = vec![0f64; k];
    let mut ties = 0f64;
    for row in blocked {
        if row.len() != k {
            return Err(Error::DimensionMismatch { expected: k, found: row.len() });
        }
        check_finite(row)?;
        let (r, t) = midranks(row);
        for (s, v) in rank_sums.iter_mut().zip(&r) {
            *s += v.as_f64();
        }
        ties += t.as_f64();
    }
    let (nf, kf) = (n as f64, k as f64);
    let q = 12.0 / (nf * kf * (kf + 1.0)) * rank_sums.iter().map(|r| r * r).sum::<f64>() - 3.0 * nf * (kf + 1.0);
    let correction = 1.0 - ties / (nf * (kf * kf * kf - kf));
    if correction <= 0.0 {
        return Ok(TestResult { statistic: F::zero(), p_value: F::one() });
    }
    let q = (q / correction).max(0.0);
    Ok(TestResult { statistic: F::of(q), p_value: F::of(chi2_sf(q, kf - 1.0)) })
}

/// Benjamini-Hochberg step-up procedure; rejection flags in input order.
pub fn benjamini_hochberg<F: Scalar>(pvals: &[F], q: F) -> Result<Vec<bool>> {
    if !(q > F::zero() && q < F::one()) {
        return Err(Error::InvalidArgument("FDR level must lie in (0, 1)".into()));
    }
    if pvals.iter().any(|p| !(*p >= F::zero() && *p <= F::one())) {
        return Err(Error::InvalidArgument("p-values must lie in [0, 1]".into()));
    }
    let m = pvals.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| cmp(&pvals[i], &pvals[j]));
    let cutoff = (1..=m)
        .rev()
        .find(|&i| pvals[order[i - 1]] <= F::of_usize(i) / F::of_usize(m) * q);
    let mut reject = vec![false; m];
    if let Some(k) = cutoff {
        for &i in &order[..k] {
            reject[i] = true;
        }
    }
    Ok(reject)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two-sided exact rank-sum p by listing every labeling as a bitmask.
    fn labeling_oracle(a: &[f64], b: &[f64]) -> f64 {
        let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
        let (ranks, _) = midranks(&pooled);
        let n = pooled.len();
        let na = a.len();
        let e = na as f64 * (n as f64 + 1.0) / 2.0;
        let w: f64 = ranks[..na].iter().sum();
        let (mut hit, mut all) = (0, 0);
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != na {
                continue;
            }
            all += 1;
            let s: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
            if (s - e).abs() >= (w - e).abs() - 1e-9 {
                hit += 1;
            }
        }
        hit as f64 / all as f64
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[1.0, 2.0, 3.0]).unwrap(), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]).unwrap(), 2.5);
        assert_eq!(median(&[7.0f32; 5]).unwrap(), 7.0);
        assert_eq!(median::<f64>(&[]), Err(Error::EmptySample));
    }

    #[test]
    fn rank_sum_exact_reference() {
        let r = wilcoxon_rank_sum::<f64>(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.statistic, 6.0);
        assert!((r.p_value - 0.1).abs() < 1e-12);
        assert!((labeling_oracle(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn rank_sum_exact_matches_labeling_oracle_with_ties() {
        let cases: [(&[f64], &[f64]); 4] = [
            (&[1.0, 2.0, 2.0, 5.0], &[2.0, 3.0, 7.0, 7.0, 8.0]),
            (&[3.0, 3.0, 3.0], &[3.0, 4.0, 1.0, 1.0]),
            (&[10.0, 11.0, 12.0, 13.0, 14.0, 15.0], &[1.0, 12.0, 13.0, 2.0, 3.0, 4.0]),
            (&[0.5], &[0.1, 0.7, 0.9]),
        ];
        for (a, b) in cases {
            let p = wilcoxon_rank_sum(a, b).unwrap().p_value;
            assert!((p - labeling_oracle(a, b)).abs() < 1e-12, "{a:?} {b:?}");
        }
    }

    #[test]
    fn rank_sum_identical_and_shifted() {
        let a = [3.0, 1.0, 2.0, 2.0];
        assert_eq!(wilcoxon_rank_sum(&a, &[2.0, 2.0, 1.0, 3.0]).unwrap().p_value, 1.0);
        let big: Vec<f64> = (0..20).map(|i| i as f64).collect();
        assert_eq!(wilcoxon_rank_sum(&big, &big).unwrap().p_value, 1.0);

        let lo: Vec<f64> = (0..30).map(|i| i as f64 / 30.0).collect();
        let hi: Vec<f64> = lo.iter().map(|x| x + 10.0).collect();
        let r = wilcoxon_rank_sum(&lo, &hi).unwrap();
        assert!(r.p_value < 1e-6);
        // closed form: U = 0, z = (450 - 0.5) / sqrt(30*30*61/12)
        let z: f64 = (450.0 - 0.5) / (900.0 * 61.0 / 12.0f64).sqrt();
        assert!((r.p_value - 2.0 * normal_sf(z)).abs() < 1e-15);
        assert_eq!(wilcoxon_rank_sum::<f64>(&[], &[1.0]), Err(Error::EmptySample));
    }

    #[test]
    fn signed_rank() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let y: Vec<f64> = x.iter().map(|v| v + 10.0).collect();
        let r = wilcoxon_signed_rank(&x, &y).unwrap();
        assert!((r.p_value - 2.0 / 64.0).abs() < 1e-12);
        assert_eq!(wilcoxon_signed_rank(&x, &x).unwrap().p_value, 1.0);
        // brute force over all 2^n sign flips of ranks 1..=5 with observed V = 3
        let d = [1.0, -2.0, -3.0, 4.0, -5.0];
        let zeros = [0.0; 5];
        let p = wilcoxon_signed_rank(&d, &zeros).unwrap().p_value;
        let mut hit = 0;
        for mask in 0u32..32 {
            let v: u32 = (0..5).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).sum();
            if (v as f64 - 7.5).abs() >= (5.0f64 - 7.5).abs() - 1e-9 {
                hit += 1;
            }
        }
        assert!((p - hit as f64 / 32.0).abs() < 1e-12);
    }

    #[test]
    fn kruskal_wallis_cases() {
        let same = vec![vec![4.0; 5], vec![4.0; 5], vec![4.0; 3]];
        let r = kruskal_wallis(&same).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));

        let groups: Vec<Vec<f64>> = (0..3).map(|g| (0..10).map(|i| (g * 10 + i) as f64).collect()).collect();
        let r = kruskal_wallis(&groups).unwrap();
        // rank sums 55, 155, 255: H = 12/(30*31) * (55^2+155^2+255^2)/10 - 93
        let h = 12.0 / 930.0 * (55.0f64.powi(2) + 155.0f64.powi(2) + 255.0f64.powi(2)) / 10.0 - 93.0;
        assert!((r.statistic - h).abs() < 1e-9);
        assert!(r.p_value < 1e-3);
        assert!(kruskal_wallis(&groups[..1]).is_err());
    }

    #[test]
    fn kruskal_wallis_two_groups_agrees_with_rank_sum() {
        let a: Vec<f64> = (0..25).map(|i| ((i * 37) % 50) as f64).collect();
        let b: Vec<f64> = (0..25).map(|i| ((i * 23) % 50) as f64 + 9.0).collect();
        let kw = kruskal_wallis(&[a.clone(), b.clone()]).unwrap().p_value;
        let rs = wilcoxon_rank_sum(&a, &b).unwrap().p_value;
        assert!((kw - rs).abs() < 0.02, "{kw} vs {rs}");
    }

    #[test]
    fn friedman_cases() {
        let identical: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64; 4]).collect();
        let r = friedman(&identical).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));

        let rows: Vec<Vec<f64>> = (0..15).map(|i| vec![i as f64, i as f64 + 0.5 * (i % 3) as f64 - 0.1, i as f64 + 5.0]).collect();
        let r = friedman(&rows).unwrap();
        assert!(r.p_value < 0.05);

        let permuted: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[2], r[0], r[1]]).collect();
        assert_eq!(friedman(&permuted).unwrap(), r);
        assert!(friedman(&rows[..1]).is_err());
    }

    #[test]
    fn bh_cases() {
        assert_eq!(
            benjamini_hochberg(&[0.01, 0.02, 0.04, 0.20], 0.10).unwrap(),
            vec![true, true, true, false]
        );
        assert_eq!(benjamini_hochberg(&[1.0; 4], 0.1).unwrap(), vec![false; 4]);
        assert_eq!(benjamini_hochberg(&[0.0; 3], 0.1).unwrap(), vec![true; 3]);
        // step-up: 0.03 misses its own line (0.025) but sits below rank 3's
        assert_eq!(
            benjamini_hochberg(&[0.2, 0.04, 0.03, 0.07], 0.1).unwrap(),
            vec![false, true, true, true]
        );
        assert!(benjamini_hochberg(&[0.5], 1.0).is_err());
        assert!(benjamini_hochberg(&[1.5], 0.1).is_err());
    }

    #[test]
    fn midranks_ties() {
        let (r, t) = midranks(&[1.0, 2.0, 2.0, 4.0]);
        assert_eq!(r, vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(t, 6.0);
    }
}
