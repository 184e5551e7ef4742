//! Gap statistics of an exact annealed table.

use serde::Serialize;

use super::logseries::{ComparisonDistributions, LogSeries, LogSeriesModel};
use super::AnnealedTable;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapDiagnostics {
    pub y: u64,
    /// `P(R_1 = r)` for `r = 1..=y` (index `r - 1`).
    pub first_gap_pmf: Vec<f64>,
    /// Law of the gap `R_k` with `k = ceil(N / 2)`.
    pub middle_gap_pmf: Vec<f64>,
    pub mean_first_gap: f64,
    /// `y / E[N]`.
    pub mean_gap: f64,
    /// Log-series pmf with parameter `1 - e^{-K}` on `1..=y`.
    pub log_series_pmf: Vec<f64>,
    /// `(e^K - 1) / K`.
    pub mean_gap_heuristic: f64,
    /// Total variation between the first-gap law and the log-series pmf.
    pub first_gap_tv: f64,
    /// `P(R_1 >= x)` for `x = 1..=y`.
    pub first_gap_tail: Vec<f64>,
    pub y_tail: Vec<f64>,
    pub z_tail: Vec<f64>,
    /// `P(R_1 >= x) <= y_tail(x)` for every `x`.
    pub below_y_tail: bool,
    /// `P(R_1 >= x) >= z_tail(x)` for every `x`.
    pub above_z_tail: bool,
}

pub fn gap_statistics(table: &AnnealedTable, model: &LogSeriesModel) -> GapDiagnostics {
    let y = table.y;
    let n = y as usize;
    let mut first = vec![0.0; n];
    let mut middle = vec![0.0; n];
    let mut mean_count = 0.0;
    for row in &table.rows {
        let g = row.gaps(y);
        let gaps = g.gaps();
        first[gaps[0] as usize - 1] += row.weight;
        middle[gaps[gaps.len().div_ceil(2) - 1] as usize - 1] += row.weight;
        mean_count += row.weight * gaps.len() as f64;
    }
    let mean_first_gap = first.iter().enumerate().map(|(i, w)| (i + 1) as f64 * w).sum();

    let k = model.k;
    let log_series_pmf: Vec<f64> = match LogSeries::from_log_q(-k) {
        Ok(law) => (1..=y).map(|r| law.pmf(r)).collect(),
        Err(_) => vec![f64::NAN; n],
    };
    let first_gap_tv = 0.5 * first.iter().zip(&log_series_pmf).map(|(a, b)| (a - b).abs()).sum::<f64>();

    let mut first_gap_tail = vec![0.0; n];
    let mut acc = 0.0;
    for i in (0..n).rev() {
        acc += first[i];
        first_gap_tail[i] = acc.min(1.0);
    }
    let comparison = ComparisonDistributions::new(model);
    let y_tail: Vec<f64> = (1..=y).map(|x| comparison.y_tail(x)).collect();
    let z_tail: Vec<f64> = (1..=y).map(|x| comparison.z_tail(x)).collect();
    let below_y_tail = first_gap_tail.iter().zip(&y_tail).all(|(t, b)| t <= b);
    let above_z_tail = first_gap_tail.iter().zip(&z_tail).all(|(t, b)| t >= b);

    GapDiagnostics {
        y,
        first_gap_pmf: first,
        middle_gap_pmf: middle,
        mean_first_gap,
        mean_gap: y as f64 / mean_count,
        log_series_pmf,
        mean_gap_heuristic: model.mean_gap_heuristic,
        first_gap_tv,
        first_gap_tail,
        y_tail,
        z_tail,
        below_y_tail,
        above_z_tail,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annealed::{enumerate_annealed, solve_q, SolveOptions};
    use crate::environment::WalkParams;

    #[test]
    fn distributions_are_normalized() {
        let params = WalkParams::new(0.4, 1.0).unwrap();
        let table = enumerate_annealed(&params, 12).unwrap();
        let model = solve_q(&params, &SolveOptions { budget: 5000, ..Default::default() }).unwrap();
        let d = gap_statistics(&table, &model);
        assert!((d.first_gap_pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((d.middle_gap_pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((d.first_gap_tail[0] - 1.0).abs() < 1e-12);
        assert!(d.mean_gap >= 1.0 && d.mean_gap <= 12.0);
        assert!(d.first_gap_tail.windows(2).all(|w| w[1] <= w[0]));
    }
}
