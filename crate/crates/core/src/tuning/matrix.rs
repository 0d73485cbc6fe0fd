use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::stats::{benjamini_hochberg, kruskal_wallis, median, wilcoxon_rank_sum};

/// Per-instance, per-config cost samples: `samples[row][col]` holds the
/// totals of independent runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct ResultTable<F = f64> {
    pub instances: Vec<String>,
    pub configs: Vec<String>,
    pub samples: Vec<Vec<Vec<F>>>,
}

impl<F: Scalar> ResultTable<F> {
    fn check(&self, min_runs: usize) -> Result<()> {
        if self.samples.len() != self.instances.len() {
            return Err(Error::DimensionMismatch { expected: self.instances.len(), found: self.samples.len() });
        }
        for (i, row) in self.samples.iter().enumerate() {
            if row.len() != self.configs.len() {
                return Err(Error::DimensionMismatch { expected: self.configs.len(), found: row.len() });
            }
            if let Some(c) = row.iter().position(|cell| cell.len() < min_runs) {
                return Err(Error::InvalidArgument(format!(
                    "cell ({}, {}) has fewer than {min_runs} runs",
                    self.instances[i], self.configs[c]
                )));
            }
        }
        Ok(())
    }

    /// Keeps only the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            instances: rows.iter().map(|&r| self.instances[r].clone()).collect(),
            configs: self.configs.clone(),
            samples: rows.iter().map(|&r| self.samples[r].clone()).collect(),
        }
    }
}

/// Binary good-configuration flags, rows = instances, cols = configs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerformanceMatrix {
    pub instances: Vec<String>,
    pub configs: Vec<String>,
    pub flags: Vec<Vec<bool>>,
}

impl PerformanceMatrix {
    pub fn new(instances: Vec<String>, configs: Vec<String>, flags: Vec<Vec<bool>>) -> Result<Self> {
        if flags.len() != instances.len() {
            return Err(Error::DimensionMismatch { expected: instances.len(), found: flags.len() });
        }
        if let Some(r) = flags.iter().find(|r| r.len() != configs.len()) {
            return Err(Error::DimensionMismatch { expected: configs.len(), found: r.len() });
        }
        Ok(Self { instances, configs, flags })
    }

    pub fn n_instances(&self) -> usize {
        self.instances.len()
    }

    pub fn n_configs(&self) -> usize {
        self.configs.len()
    }

    /// Column means of the flags.
    pub fn success_rates(&self) -> Vec<f64> {
        let n = self.flags.len().max(1) as f64;
        (0..self.configs.len()).map(|c| self.flags.iter().filter(|r| r[c]).count() as f64 / n).collect()
    }

    /// Column with the highest success rate (ties to the lower index).
    pub fn majority_config(&self) -> usize {
        argmax_first(&self.success_rates())
    }

    /// Label vector of one column.
    pub fn column(&self, c: usize) -> Vec<bool> {
        self.flags.iter().map(|r| r[c]).collect()
    }
}

pub(crate) fn argmax_first(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Flags each config whose samples are not significantly different from
/// the row's best (smallest median) under a two-sided rank-sum test with
/// Benjamini-Hochberg control at `q` per row.
pub fn build_performance_matrix<F: Scalar>(table: &ResultTable<F>, q: F) -> Result<PerformanceMatrix> {
    table.check(2)?;
    let k = table.configs.len();
    let mut flags = Vec::with_capacity(table.instances.len());
    for row in &table.samples {
        let medians = row.iter().map(|s| median(s)).collect::<Result<Vec<F>>>()?;
        let mut best = 0;
        for (c, m) in medians.iter().enumerate() {
            if *m < medians[best] {
                best = c;
            }
        }
        let others: Vec<usize> = (0..k).filter(|&c| c != best).collect();
        let pvals = others
            .iter()
            .map(|&c| wilcoxon_rank_sum(&row[c], &row[best]).map(|t| t.p_value))
            .collect::<Result<Vec<F>>>()?;
        let mut flag_row = vec![true; k];
        if !pvals.is_empty() {
            for (&c, rejected) in others.iter().zip(benjamini_hochberg(&pvals, q)?) {
                flag_row[c] = !rejected;
            }
        }
        flags.push(flag_row);
    }
    PerformanceMatrix::new(table.instances.clone(), table.configs.clone(), flags)
}

/// Rows where a Kruskal-Wallis test across configs rejects at `alpha`,
/// i.e. instances on which the configuration has a detectable effect.
pub fn screen_instances<F: Scalar>(table: &ResultTable<F>, alpha: F) -> Result<Vec<usize>> {
    table.check(1)?;
    let mut keep = Vec::new();
    for (i, row) in table.samples.iter().enumerate() {
        if kruskal_wallis(row)?.p_value < alpha {
            keep.push(i);
        }
    }
    Ok(keep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: Vec<Vec<Vec<f64>>>) -> ResultTable<f64> {
        ResultTable {
            instances: (0..rows.len()).map(|i| format!("i{i}")).collect(),
            configs: (0..rows[0].len()).map(|c| format!("c{c}")).collect(),
            samples: rows,
        }
    }

    fn base(shift: f64) -> Vec<f64> {
        (0..10).map(|r| r as f64 + shift).collect()
    }

    #[test]
    fn identical_samples_give_all_true_row() {
        let t = table(vec![vec![base(0.0); 20]]);
        let m = build_performance_matrix(&t, 0.05).unwrap();
        assert!(m.flags[0].iter().all(|&f| f));
        assert_eq!(m.success_rates(), vec![1.0; 20]);
    }

    #[test]
    fn shifted_config_is_flagged_bad() {
        let mut row = vec![base(0.0); 5];
        row[3] = base(100.0);
        let m = build_performance_matrix(&table(vec![row]), 0.05).unwrap();
        assert_eq!(m.flags[0], vec![true, true, true, false, true]);
    }

    #[test]
    fn best_is_smallest_median_with_low_index_ties() {
        let row = vec![base(100.0), base(0.0), base(0.0)];
        let m = build_performance_matrix(&table(vec![row]), 0.05).unwrap();
        assert_eq!(m.flags[0], vec![false, true, true]);
    }

    #[test]
    fn best_always_flagged() {
        for shift in [0.5, 2.0, 50.0] {
            let row = vec![base(shift), base(0.0), base(2.0 * shift)];
            let m = build_performance_matrix(&table(vec![row]), 0.1).unwrap();
            assert!(m.flags[0][1]);
        }
    }

    #[test]
    fn cells_need_two_runs() {
        let t = table(vec![vec![vec![1.0], vec![1.0, 2.0]]]);
        assert!(build_performance_matrix(&t, 0.05).is_err());
        let ragged = table(vec![vec![base(0.0), base(1.0)], vec![base(0.0)]]);
        assert!(build_performance_matrix(&ragged, 0.05).is_err());
    }

    #[test]
    fn majority_and_rates() {
        let m = PerformanceMatrix::new(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            vec!["x".into(), "y".into()],
            vec![vec![true, true], vec![false, true], vec![true, true], vec![false, true]],
        )
        .unwrap();
        assert_eq!(m.success_rates(), vec![0.5, 1.0]);
        assert_eq!(m.majority_config(), 1);
        assert_eq!(m.column(0), vec![true, false, true, false]);
    }

    #[test]
    fn screening_drops_flat_rows() {
        let t = table(vec![vec![base(0.0), base(0.0), base(0.0)], vec![base(0.0), base(30.0), base(0.0)]]);
        assert_eq!(screen_instances(&t, 0.10).unwrap(), vec![1]);
        assert_eq!(t.select_rows(&[1]).instances, vec!["i1".to_string()]);
    }
}
