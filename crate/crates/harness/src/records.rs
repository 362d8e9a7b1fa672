//! `runs.csv` rows and the aggregate results table.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::config::ExperimentConfig;
use crate::error::{io_err, HarnessError, Result};

pub const RUNS_HEADER: [&str; 9] = [
    "algorithm",
    "env",
    "size",
    "phase",
    "seed",
    "return",
    "success",
    "expansions_to_goal",
    "ms",
];

/// One seeded episode as written to `runs.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub algorithm: String,
    pub env: String,
    pub size: usize,
    pub phase: String,
    pub seed: u64,
    #[serde(rename = "return")]
    pub ret: f64,
    pub success: bool,
    pub expansions_to_goal: Option<u64>,
    pub ms: u64,
}

impl RunRow {
    /// Same row with the wall-clock column cleared.
    pub fn without_timing(&self) -> RunRow {
        RunRow {
            ms: 0,
            ..self.clone()
        }
    }
}

pub fn read_runs(path: &Path) -> Result<Vec<RunRow>> {
    let mut rd = csv::Reader::from_path(path)?;
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != RUNS_HEADER {
        return Err(HarnessError::Config(format!(
            "{}: unexpected header {header:?}",
            path.display()
        )));
    }
    rd.deserialize()
        .map(|r| r.map_err(HarnessError::from))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub algorithm: String,
    pub env: String,
    pub size: usize,
    pub phase: String,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`; zero for a single run.
    pub stderr: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub config: ExperimentConfig,
    pub rows: Vec<TableRow>,
}

impl ResultsTable {
    pub fn from_runs(config: ExperimentConfig, runs: &[RunRow]) -> Self {
        let mut groups: BTreeMap<(&str, &str, usize, &str), Vec<f64>> = BTreeMap::new();
        for r in runs {
            groups
                .entry((&r.algorithm, &r.env, r.size, &r.phase))
                .or_default()
                .push(r.ret);
        }
        let rows = groups
            .into_iter()
            .map(|((algorithm, env, size, phase), xs)| {
                let (mean, stderr) = mean_stderr(&xs);
                TableRow {
                    algorithm: algorithm.into(),
                    env: env.into(),
                    size,
                    phase: phase.into(),
                    mean,
                    stderr,
                    n: xs.len(),
                }
            })
            .collect();
        ResultsTable { config, rows }
    }

    pub fn get(&self, algorithm: &str, size: usize) -> Option<&TableRow> {
        self.rows
            .iter()
            .find(|r| r.algorithm == algorithm && r.size == size)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("table serializes");
        std::fs::write(path, text + "\n").map_err(io_err(path))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|source| HarnessError::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// One-sided paired t-test of `mean(a - b) > 0`; returns the p-value.
///
/// Identical samples give 1; a constant positive difference gives 0.
pub fn paired_t_test_greater(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    if d.len() < 2 {
        return 1.0;
    }
    let (mean, se) = mean_stderr(&d);
    if se == 0.0 {
        return if mean > 0.0 { 0.0 } else { 1.0 };
    }
    let t = mean / se;
    let dist = StudentsT::new(0.0, 1.0, (d.len() - 1) as f64).expect("positive degrees of freedom");
    1.0 - dist.cdf(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stderr_uses_sample_deviation() {
        let (m, se) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        // var = 5/3, se = sqrt(5/12)
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_stderr(&[7.0]), (7.0, 0.0));
    }

    #[test]
    fn t_test_reference_value() {
        // d = [1, 2, 3]: t = 2 sqrt 3 with 2 degrees of freedom, whose
        // upper tail is 1/2 - t / (2 sqrt(2 + t^2))
        let t = 2.0 * 3f64.sqrt();
        let exact = 0.5 - t / (2.0 * (2.0 + t * t).sqrt());
        let p = paired_t_test_greater(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]);
        assert!((p - exact).abs() < 1e-10, "{p} vs {exact}");
        assert_eq!(paired_t_test_greater(&[1.0, 1.0], &[1.0, 1.0]), 1.0);
        assert_eq!(paired_t_test_greater(&[2.0, 2.0], &[1.0, 1.0]), 0.0);
    }
}
