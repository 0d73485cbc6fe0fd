use serde::{Deserialize, Serialize};

use crate::annealer::SaParams;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Base-`base` digit reversal of `i` into `[0, 1)`.
pub fn radical_inverse<F: Scalar>(base: u64, mut i: u64) -> F {
    let b = F::of(base as f64);
    let mut inv = F::one() / b;
    let mut scale = inv;
    let mut x = F::zero();
    while i > 0 {
        x = x + F::of((i % base) as f64) * scale;
        i /= base;
        scale = scale * inv;
    }
    inv = x;
    inv
}

fn primes(k: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(k);
    let mut c = 2u64;
    while out.len() < k {
        if out.iter().take_while(|&&p| p * p <= c).all(|&p| !c.is_multiple_of(p)) {
            out.push(c);
        }
        c += 1;
    }
    out
}

/// `n` Hammersley points in `[0, 1)^d`: point `i` is
/// `(i/n, phi_2(i), phi_3(i), phi_5(i), ...)`.
pub fn hammersley_points<F: Scalar>(n: usize, d: usize) -> Result<Vec<Vec<F>>> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument("Hammersley set needs n >= 1 and d >= 1".into()));
    }
    let bases = primes(d - 1);
    Ok((0..n)
        .map(|i| {
            let mut p = Vec::with_capacity(d);
            p.push(F::of_usize(i) / F::of_usize(n));
            p.extend(bases.iter().map(|&b| radical_inverse::<F>(b, i as u64)));
            p
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct ParamRange<F = f64> {
    pub name: String,
    pub lo: F,
    pub hi: F,
}

impl<F: Scalar> ParamRange<F> {
    pub fn new(name: &str, lo: f64, hi: f64) -> Self {
        Self { name: name.to_string(), lo: F::of(lo), hi: F::of(hi) }
    }

    pub fn contains(&self, v: F) -> bool {
        v >= self.lo && v <= self.hi
    }
}

/// Every tunable parameter with its initial range, in sampling order.
pub fn full_space<F: Scalar>() -> Vec<ParamRange<F>> {
    vec![
        ParamRange::new("T0", 1.0, 100.0),
        ParamRange::new("T_min", 0.01, 1.0),
        ParamRange::new("rho", 0.01, 1.0),
        ParamRange::new("cr", 0.99, 0.999),
        ParamRange::new("w_hard", 10.0, 1000.0),
        ParamRange::new("sr", 0.1, 0.9),
    ]
}

/// The three parameters left free after fixing cr = 0.99, w_hard = 100 and
/// sr = 0.43, with their narrowed ranges.
pub fn refined_space<F: Scalar>() -> Vec<ParamRange<F>> {
    vec![
        ParamRange::new("T0", 1.0, 40.0),
        ParamRange::new("T_min", 0.015, 0.21),
        ParamRange::new("rho", 0.034, 0.05),
    ]
}

/// A named assignment of values to a subset of the search parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct ConfigPoint<F = f64> {
    pub id: String,
    pub values: Vec<(String, F)>,
}

impl<F: Scalar> ConfigPoint<F> {
    pub fn get(&self, name: &str) -> Option<F> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn within(&self, ranges: &[ParamRange<F>]) -> bool {
        ranges.iter().all(|r| self.get(&r.name).is_some_and(|v| r.contains(v)))
    }

    /// Overrides the matching fields of `base`.
    pub fn apply_to(&self, base: &SaParams<F>) -> Result<SaParams<F>> {
        let mut p = *base;
        for (name, v) in &self.values {
            match name.as_str() {
                "T0" => p.t0 = *v,
                "T_min" => p.t_min = *v,
                "rho" => p.accept_ratio = *v,
                "cr" => p.cooling_rate = *v,
                "sr" => p.swap_rate = *v,
                "w_hard" => {
                    p.w_hard = v
                        .round()
                        .to_u64()
                        .ok_or_else(|| Error::InvalidParams(format!("w_hard {v} is not a positive integer")))?
                }
                other => return Err(Error::InvalidParams(format!("unknown parameter `{other}`"))),
            }
        }
        p.validate()?;
        Ok(p)
    }
}

/// Affinely maps each coordinate onto its parameter range. Configuration
/// ids are 1-based.
pub fn scale_to_ranges<F: Scalar>(points: &[Vec<F>], ranges: &[ParamRange<F>]) -> Result<Vec<ConfigPoint<F>>> {
    if let Some(r) = ranges.iter().find(|r| !(r.lo <= r.hi)) {
        return Err(Error::InvalidArgument(format!("inverted range for `{}`", r.name)));
    }
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if p.len() != ranges.len() {
                return Err(Error::DimensionMismatch { expected: ranges.len(), found: p.len() });
            }
            let values = p
                .iter()
                .zip(ranges)
                .map(|(&u, r)| (r.name.clone(), r.lo + u * (r.hi - r.lo)))
                .collect();
            Ok(ConfigPoint { id: (i + 1).to_string(), values })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_base_two_and_three() {
        let got: Vec<f64> = (0..8).map(|i| radical_inverse(2, i)).collect();
        assert_eq!(got, vec![0.0, 0.5, 0.25, 0.75, 0.125, 0.625, 0.375, 0.875]);
        assert!((radical_inverse::<f64>(3, 5) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn four_points_in_two_dims() {
        let pts = hammersley_points::<f64>(4, 2).unwrap();
        assert_eq!(pts, vec![vec![0.0, 0.0], vec![0.25, 0.5], vec![0.5, 0.25], vec![0.75, 0.75]]);
    }

    #[test]
    fn one_dimension_is_a_grid() {
        let pts = hammersley_points::<f32>(5, 1).unwrap();
        assert_eq!(pts, (0..5).map(|i| vec![i as f32 / 5.0]).collect::<Vec<_>>());
    }

    #[test]
    fn distinct_points() {
        let pts = hammersley_points::<f64>(16, 3).unwrap();
        for i in 0..16 {
            for j in 0..i {
                assert_ne!(pts[i], pts[j]);
            }
            assert!(pts[i].iter().all(|&c| (0.0..1.0).contains(&c)));
        }
        assert!(hammersley_points::<f64>(0, 2).is_err());
    }

    #[test]
    fn trailing_coordinates_ignore_n() {
        let a = hammersley_points::<f64>(10, 4).unwrap();
        let b = hammersley_points::<f64>(30, 4).unwrap();
        for i in 0..10 {
            assert_eq!(a[i][1..], b[i][1..]);
            assert_eq!(a[i][0], i as f64 / 10.0);
        }
    }

    #[test]
    fn scaling() {
        let r = [ParamRange::<f64>::new("T0", 1.0, 40.0)];
        let c = scale_to_ranges(&[vec![0.0], vec![1.0], vec![0.5]], &r).unwrap();
        assert_eq!(c[0].get("T0"), Some(1.0));
        assert_eq!(c[1].get("T0"), Some(40.0));
        assert_eq!(c[2].get("T0"), Some(20.5));
        let inverted = [ParamRange::<f64>::new("x", 2.0, 1.0)];
        assert!(scale_to_ranges(&[vec![0.5]], &inverted).is_err());
        assert!(matches!(scale_to_ranges(&[vec![0.5, 0.5]], &r), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn refined_configs_stay_in_range() {
        let space = refined_space::<f64>();
        let configs = scale_to_ranges(&hammersley_points(20, 3).unwrap(), &space).unwrap();
        assert_eq!(configs.len(), 20);
        for c in &configs {
            assert!(c.within(&space));
            let p = c.apply_to(&SaParams::default()).unwrap();
            assert_eq!(p.w_hard, 100);
            assert_eq!(p.swap_rate, 0.43);
        }
    }

    #[test]
    fn full_space_configs_apply() {
        let space = full_space::<f64>();
        let configs = scale_to_ranges(&hammersley_points(12, space.len()).unwrap(), &space).unwrap();
        for c in configs.iter().skip(1) {
            assert!(c.within(&space));
            let p = c.apply_to(&SaParams::default()).unwrap();
            assert!((10..=1000).contains(&p.w_hard));
        }
        let bogus = ConfigPoint { id: "x".into(), values: vec![("alpha".to_string(), 1.0)] };
        assert!(bogus.apply_to(&SaParams::default()).is_err());
    }
}
