use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::stats::{friedman, midranks, wilcoxon_signed_rank};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RaceOptions {
    /// Solver runs per (instance, config) cell; a block holds their mean.
    pub runs_per_step: usize,
    pub confidence: f64,
    /// Maximum number of solver evaluations.
    pub budget: usize,
    /// Blocks collected before the first test.
    pub first_test: usize,
}

impl Default for RaceOptions {
    fn default() -> Self {
        Self { runs_per_step: 1, confidence: 0.95, budget: 10_000, first_test: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Elimination {
    pub config: usize,
    /// Number of blocks seen when the config was dropped.
    pub block: usize,
    pub mean_rank: f64,
    /// Mean rank of the rank-best config at the same moment.
    pub best_mean_rank: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaceResult {
    /// Survivors ordered by mean rank, best first.
    pub survivors: Vec<usize>,
    /// Mean rank of each survivor among the survivors, aligned with `survivors`.
    pub mean_ranks: Vec<f64>,
    pub eliminations: Vec<Elimination>,
    pub blocks: usize,
    pub evaluations: usize,
}

/// Mean within-block mid-rank of each column.
fn mean_ranks<F: Scalar>(blocks: &[Vec<F>]) -> Vec<f64> {
    let k = blocks.first().map_or(0, Vec::len);
    let mut sums = vec![0f64; k];
    for row in blocks {
        let (r, _) = midranks(row);
        for (s, v) in sums.iter_mut().zip(r) {
            *s += v.as_f64();
        }
    }
    sums.iter().map(|s| s / blocks.len().max(1) as f64).collect()
}

/// Races `n_configs` configurations over instances `0..n_instances`
/// (cycled while budget remains). `eval(instance, config, run)` returns the
/// cost of one solver run; lower is better.
///
/// After each block from `first_test` on, a Friedman test over the
/// surviving columns runs at level `1 - confidence`. When it rejects, every
/// config whose paired Wilcoxon signed-rank test against the rank-best
/// config rejects at the same level is eliminated.
pub fn f_race<F, E>(n_instances: usize, n_configs: usize, opts: &RaceOptions, eval: E) -> Result<RaceResult>
where
    F: Scalar,
    E: Fn(usize, usize, usize) -> F + Sync,
{
    if n_instances == 0 {
        return Err(Error::InvalidArgument("race needs at least one instance".into()));
    }
    if n_configs == 0 {
        return Err(Error::InvalidArgument("race needs at least one configuration".into()));
    }
    if !(opts.confidence > 0.0 && opts.confidence < 1.0) || opts.runs_per_step == 0 {
        return Err(Error::InvalidArgument("confidence must lie in (0, 1) and runs_per_step >= 1".into()));
    }
    let alpha = 1.0 - opts.confidence;
    let mut alive: Vec<usize> = (0..n_configs).collect();
    // full[b][c] for every config, only meaningful while c is alive
    let mut full: Vec<Vec<F>> = Vec::new();
    let mut eliminations = Vec::new();
    let mut evaluations = 0usize;

    while alive.len() > 1 && evaluations + alive.len() * opts.runs_per_step <= opts.budget {
        let block = full.len();
        let instance = block % n_instances;
        let cells: Vec<(usize, usize)> =
            alive.iter().flat_map(|&c| (0..opts.runs_per_step).map(move |r| (c, r))).collect();
        let costs: Vec<F> = cells.par_iter().map(|&(c, r)| eval(instance, c, block / n_instances * opts.runs_per_step + r)).collect();
        evaluations += cells.len();
        let mut row = vec![F::nan(); n_configs];
        for (i, &c) in alive.iter().enumerate() {
            let runs = &costs[i * opts.runs_per_step..(i + 1) * opts.runs_per_step];
            row[c] = runs.iter().copied().sum::<F>() / F::of_usize(runs.len());
        }
        full.push(row);

        let blocks = full.len();
        if blocks < opts.first_test.max(2) {
            continue;
        }
        let sub: Vec<Vec<F>> = full.iter().map(|r| alive.iter().map(|&c| r[c]).collect()).collect();
        if friedman(&sub)?.p_value.as_f64() >= alpha {
            continue;
        }
        let ranks = mean_ranks(&sub);
        let best = (0..alive.len()).min_by(|&a, &b| ranks[a].total_cmp(&ranks[b])).unwrap_or(0);
        let best_col: Vec<F> = sub.iter().map(|r| r[best]).collect();
        let mut keep = Vec::with_capacity(alive.len());
        for (j, &c) in alive.iter().enumerate() {
            if j != best {
                let col: Vec<F> = sub.iter().map(|r| r[j]).collect();
                if wilcoxon_signed_rank(&col, &best_col)?.p_value.as_f64() < alpha && ranks[j] > ranks[best] {
                    eliminations.push(Elimination {
                        config: c,
                        block: blocks,
                        mean_rank: ranks[j],
                        best_mean_rank: ranks[best],
                    });
                    continue;
                }
            }
            keep.push(c);
        }
        alive = keep;
    }

    let sub: Vec<Vec<F>> = full.iter().map(|r| alive.iter().map(|&c| r[c]).collect()).collect();
    let ranks = if sub.is_empty() { vec![1.0; alive.len()] } else { mean_ranks(&sub) };
    let mut ranked: Vec<(usize, f64)> = alive.into_iter().zip(ranks).collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    Ok(RaceResult {
        survivors: ranked.iter().map(|r| r.0).collect(),
        mean_ranks: ranked.iter().map(|r| r.1).collect(),
        eliminations,
        blocks: full.len(),
        evaluations,
    })
}
