use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::forest::{train_forest, Forest, ForestParams};
use super::matrix::PerformanceMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MODEL_FORMAT: &str = "cbctt-forest";
pub const MODEL_VERSION: u32 = 1;

/// Index of the config to run on an instance with features `x`.
///
/// Each config scores its forest's probability of good performance, or its
/// success rate when the forest carries no signal (single-class or
/// out-of-bag accuracy no better than the majority class). Ties go to the
/// higher success rate, then to the lower index.
pub fn select_config<F: Scalar>(forests: &[Forest<F>], x: &[F], success_rates: &[f64]) -> Result<usize> {
    if forests.len() != success_rates.len() {
        return Err(Error::DimensionMismatch { expected: forests.len(), found: success_rates.len() });
    }
    if forests.is_empty() {
        return Err(Error::InvalidArgument("no configurations to choose from".into()));
    }
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (c, f) in forests.iter().enumerate() {
        let score = if f.is_informative() { f.predict_proba(x)? } else { success_rates[c] };
        let better = score > best_score + 1e-12
            || ((score - best_score).abs() <= 1e-12 && success_rates[c] > success_rates[best]);
        if better {
            best = c;
            best_score = score;
        }
    }
    Ok(best)
}

fn check_matrix<F>(x: &[Vec<F>], y: &[Vec<bool>]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    let k = y.first().map_or(0, Vec::len);
    if k == 0 {
        return Err(Error::InvalidArgument("label matrix has no configurations".into()));
    }
    if let Some(r) = y.iter().find(|r| r.len() != k) {
        return Err(Error::DimensionMismatch { expected: k, found: r.len() });
    }
    Ok(k)
}

fn column_rates(y: &[Vec<bool>], k: usize) -> Vec<f64> {
    (0..k).map(|c| y.iter().filter(|r| r[c]).count() as f64 / y.len().max(1) as f64).collect()
}

/// One forest per label column; tree seeds differ per column.
pub fn train_forests<F: Scalar>(x: &[Vec<F>], y: &[Vec<bool>], params: &ForestParams) -> Result<Vec<Forest<F>>> {
    let k = check_matrix(x, y)?;
    (0..k)
        .map(|c| {
            let labels: Vec<bool> = y.iter().map(|r| r[c]).collect();
            let p = ForestParams { seed: params.seed.wrapping_add(c as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15), ..*params };
            train_forest(x, &labels, &p)
        })
        .collect()
}

/// Fraction of held-out instances whose selected config is flagged good.
/// Folds come from a seeded shuffle, row `order[i]` going to fold `i % folds`.
pub fn cross_validate_accuracy<F: Scalar>(
    x: &[Vec<F>],
    y: &[Vec<bool>],
    folds: usize,
    params: &ForestParams,
    seed: u64,
) -> Result<f64> {
    let k = check_matrix(x, y)?;
    if folds < 2 || x.len() < folds {
        return Err(Error::InvalidArgument(format!("{} rows cannot form {folds} folds", x.len())));
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut correct = 0usize;
    for fold in 0..folds {
        let (mut tx, mut ty, mut test) = (Vec::new(), Vec::new(), Vec::new());
        for (i, &row) in order.iter().enumerate() {
            if i % folds == fold {
                test.push(row);
            } else {
                tx.push(x[row].clone());
                ty.push(y[row].clone());
            }
        }
        let p = ForestParams { seed: params.seed.wrapping_add(fold as u64 * 1_000_003), ..*params };
        let forests = train_forests(&tx, &ty, &p)?;
        let rates = column_rates(&ty, k);
        for row in test {
            let c = select_config(&forests, &x[row], &rates)?;
            correct += y[row][c] as usize;
        }
    }
    Ok(correct as f64 / x.len() as f64)
}

/// Repeats of each column shuffle in `permutation_importance`.
const PERMUTATION_REPEATS: usize = 5;

fn forest_accuracy<F: Scalar>(f: &Forest<F>, x: &[Vec<F>], y: &[Vec<bool>], c: usize) -> Result<f64> {
    let mut hits = 0;
    for (row, labels) in x.iter().zip(y) {
        hits += ((f.predict_proba(row)? >= 0.5) == labels[c]) as usize;
    }
    Ok(hits as f64 / x.len() as f64)
}

/// Drop in per-forest classification accuracy after shuffling one feature
/// column, averaged over forests and repeats. One score per feature.
pub fn permutation_importance<F: Scalar>(
    forests: &[Forest<F>],
    x: &[Vec<F>],
    y: &[Vec<bool>],
    seed: u64,
) -> Result<Vec<f64>> {
    let k = check_matrix(x, y)?;
    if forests.len() != k {
        return Err(Error::DimensionMismatch { expected: k, found: forests.len() });
    }
    let d = forests[0].n_features;
    let base = forests
        .iter()
        .enumerate()
        .map(|(c, f)| forest_accuracy(f, x, y, c))
        .collect::<Result<Vec<f64>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scores = vec![0.0; d];
    for (j, score) in scores.iter_mut().enumerate() {
        let mut drop = 0.0;
        for _ in 0..PERMUTATION_REPEATS {
            let mut column: Vec<F> = x.iter().map(|r| r[j]).collect();
            column.shuffle(&mut rng);
            let permuted: Vec<Vec<F>> = x
                .iter()
                .zip(&column)
                .map(|(r, &v)| {
                    let mut r = r.clone();
                    r[j] = v;
                    r
                })
                .collect();
            for (c, f) in forests.iter().enumerate() {
                drop += base[c] - forest_accuracy(f, &permuted, y, c)?;
            }
        }
        *score = drop / (PERMUTATION_REPEATS * k) as f64;
    }
    Ok(scores)
}

/// Trained selector persisted by `train` and loaded by `predict`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct ConfigModel<F = f64> {
    pub format: String,
    pub version: u32,
    pub feature_names: Vec<String>,
    pub configs: Vec<String>,
    pub success_rates: Vec<f64>,
    pub forests: Vec<Forest<F>>,
}

impl<F: Scalar> ConfigModel<F> {
    pub fn train(
        feature_names: Vec<String>,
        x: &[Vec<F>],
        matrix: &PerformanceMatrix,
        params: &ForestParams,
    ) -> Result<Self> {
        let forests = train_forests(x, &matrix.flags, params)?;
        if let Some(f) = forests.first().filter(|f| f.n_features != feature_names.len()) {
            return Err(Error::DimensionMismatch { expected: feature_names.len(), found: f.n_features });
        }
        Ok(Self {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            feature_names,
            configs: matrix.configs.clone(),
            success_rates: matrix.success_rates(),
            forests,
        })
    }

    pub fn select(&self, x: &[F]) -> Result<usize> {
        select_config(&self.forests, x, &self.success_rates)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::InvalidArgument(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s).map_err(|e| Error::InvalidArgument(format!("bad model file: {e}")))?;
        if m.format != MODEL_FORMAT || m.version != MODEL_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported model {} v{} (expected {MODEL_FORMAT} v{MODEL_VERSION})",
                m.format, m.version
            )));
        }
        if m.forests.len() != m.configs.len() || m.success_rates.len() != m.configs.len() {
            return Err(Error::DimensionMismatch { expected: m.configs.len(), found: m.forests.len() });
        }
        Ok(m)
    }
}
