//! Social versus non-social comparison across pairs, with density and
//! quantile tables for the per-run metric distributions.

use std::fmt::Write as _;

use crate::error::Result;
use crate::experiment::RunMetrics;
use crate::io::NA;
use crate::stats::{self, TestReport};

pub const REPORT_HEADER: &str = "metric,social_mean,nonsocial_mean,diff_mean,t_stat,t_p,w_stat,w_p,n_pairs";
pub const INSUFFICIENT: &str = "insufficient-n";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Units,
    Utility,
    UtilityPerUnit,
    Coverage,
    PathLength,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Units,
        Metric::Utility,
        Metric::UtilityPerUnit,
        Metric::Coverage,
        Metric::PathLength,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Units => "mean_units",
            Metric::Utility => "mean_utility",
            Metric::UtilityPerUnit => "utility_per_unit",
            Metric::Coverage => "mean_coverage",
            Metric::PathLength => "mean_path_length",
        }
    }

    pub fn of(self, m: &RunMetrics) -> Option<f64> {
        match self {
            Metric::Units => Some(m.mean_units),
            Metric::Utility => Some(m.mean_utility),
            Metric::UtilityPerUnit => m.utility_per_unit,
            Metric::Coverage => Some(m.mean_coverage),
            Metric::PathLength => Some(m.mean_path_length),
        }
    }
}

/// Paired values of one metric; pairs where either side is undefined are dropped.
pub fn paired_values(metric: Metric, pairs: &[(RunMetrics, RunMetrics)]) -> (Vec<f64>, Vec<f64>) {
    pairs
        .iter()
        .filter_map(|(s, n)| Some((metric.of(s)?, metric.of(n)?)))
        .unzip()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub metric: Metric,
    pub social_mean: Option<f64>,
    pub nonsocial_mean: Option<f64>,
    pub diff_mean: Option<f64>,
    /// `None` below two pairs.
    pub t: Option<TestReport>,
    pub w: Option<TestReport>,
    pub n_pairs: usize,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Paired t and signed-rank tests of social against non-social for every metric.
pub fn compare(pairs: &[(RunMetrics, RunMetrics)]) -> Result<Vec<Comparison>> {
    Metric::ALL
        .iter()
        .map(|&metric| {
            let (s, n) = paired_values(metric, pairs);
            let diffs: Vec<f64> = s.iter().zip(&n).map(|(a, b)| a - b).collect();
            let enough = s.len() >= 2;
            Ok(Comparison {
                metric,
                social_mean: mean(&s),
                nonsocial_mean: mean(&n),
                diff_mean: mean(&diffs),
                t: if enough { Some(stats::paired_t(&s, &n)?) } else { None },
                w: if enough { Some(stats::signed_rank(&s, &n)?) } else { None },
                n_pairs: s.len(),
            })
        })
        .collect()
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| NA.to_string(), |v| v.to_string())
}

fn test_cols(t: &Option<TestReport>) -> (String, String) {
    match t {
        None => (INSUFFICIENT.to_string(), INSUFFICIENT.to_string()),
        Some(r) => (opt(r.statistic), r.p_value.to_string()),
    }
}

pub fn report_csv(rows: &[Comparison]) -> String {
    let mut out = format!("{REPORT_HEADER}\n");
    for r in rows {
        let (t_stat, t_p) = test_cols(&r.t);
        let (w_stat, w_p) = test_cols(&r.w);
        let _ = writeln!(
            out,
            "{},{},{},{},{t_stat},{t_p},{w_stat},{w_p},{}",
            r.metric.name(),
            opt(r.social_mean),
            opt(r.nonsocial_mean),
            opt(r.diff_mean),
            r.n_pairs
        );
    }
    out
}

/// `x,density` table over the standard KDE grid with a Silverman bandwidth.
/// `None` when the bandwidth is undefined (fewer than two distinct values).
pub fn kde_csv(samples: &[f64]) -> Result<Option<String>> {
    let Some(h) = stats::silverman_bandwidth(samples) else {
        return Ok(None);
    };
    let mut out = String::from("x,density\n");
    for (x, d) in stats::gaussian_kde(samples, h)? {
        let _ = writeln!(out, "{x},{d}");
    }
    Ok(Some(out))
}

/// `position,sample,normal` table; `None` below two samples.
pub fn quantile_csv(samples: &[f64]) -> Result<Option<String>> {
    if samples.len() < 2 {
        return Ok(None);
    }
    let mut out = String::from("position,sample,normal\n");
    for r in stats::quantile_table(samples)? {
        let _ = writeln!(out, "{},{},{}", r.position, r.sample, r.normal);
    }
    Ok(Some(out))
}

/// Named analysis tables: densities of aggregate consumption, coverage and
/// path length for each condition, and quantiles of every paired difference.
pub fn tables(pairs: &[(RunMetrics, RunMetrics)]) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for metric in [Metric::Units, Metric::Coverage, Metric::PathLength] {
        let (s, n) = paired_values(metric, pairs);
        for (label, xs) in [("social", &s), ("nonsocial", &n)] {
            if let Some(t) = kde_csv(xs)? {
                out.push((format!("kde_{}_{label}.csv", metric.name()), t));
            }
        }
    }
    for metric in Metric::ALL {
        let (s, n) = paired_values(metric, pairs);
        let diffs: Vec<f64> = s.iter().zip(&n).map(|(a, b)| a - b).collect();
        if let Some(t) = quantile_csv(&diffs)? {
            out.push((format!("quantile_{}_diff.csv", metric.name()), t));
        }
    }
    Ok(out)
}

/// Significance level of the replication checks.
pub const ALPHA: f64 = 0.05;
/// Fraction of pairs in which social utility per unit must be the lower one.
pub const LOWER_UTILITY_FRACTION: f64 = 20.0 / 30.0;
/// Fraction of social runs whose post-transient trend must be flat.
pub const FLAT_TREND_FRACTION: f64 = 25.0 / 30.0;

/// Outcome of one replication check over a batch of pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub id: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn required(fraction: f64, n: usize) -> usize {
    // the small epsilon keeps 20/30 * 30 from rounding up to 21
    (fraction * n as f64 - 1e-9).ceil() as usize
}

/// Checks the four behavioural claims against `(social, nonsocial)` metrics:
/// higher social consumption (B1), lower social utility per unit (B2),
/// longer social value paths with wider coverage (B3) and flat social
/// post-transient trends (B4).
pub fn replication_criteria(pairs: &[(RunMetrics, RunMetrics)]) -> Result<Vec<Criterion>> {
    let rows = compare(pairs)?;
    let row = |m: Metric| rows.iter().find(|r| r.metric == m).expect("every metric is compared");
    let w_p = |m: Metric| row(m).w.as_ref().map(|w| w.p_value);
    let higher = |m: Metric| row(m).diff_mean.is_some_and(|d| d > 0.0);

    let units = row(Metric::Units);
    let b1 = higher(Metric::Units) && w_p(Metric::Units).is_some_and(|p| p < ALPHA);

    let n = pairs.len();
    let lower = pairs
        .iter()
        .filter(|(s, ns)| matches!((s.utility_per_unit, ns.utility_per_unit), (Some(a), Some(b)) if a < b))
        .count();
    let need_lower = required(LOWER_UTILITY_FRACTION, n);

    let path_p = w_p(Metric::PathLength);
    let b3 = higher(Metric::PathLength) && path_p.is_some_and(|p| p < ALPHA) && higher(Metric::Coverage);

    let flat = pairs.iter().filter(|(s, _)| s.trend_p.is_some_and(|p| p >= ALPHA)).count();
    let need_flat = required(FLAT_TREND_FRACTION, n);

    let fmt = |x: Option<f64>| x.map_or_else(|| NA.to_string(), |v| format!("{v:.4}"));
    Ok(vec![
        Criterion {
            id: "B1",
            pass: b1,
            detail: format!(
                "units social {} nonsocial {} signed-rank p {}",
                fmt(units.social_mean),
                fmt(units.nonsocial_mean),
                fmt(w_p(Metric::Units))
            ),
        },
        Criterion {
            id: "B2",
            pass: n > 0 && lower >= need_lower,
            detail: format!("social utility per unit lower in {lower}/{n} pairs (need {need_lower})"),
        },
        Criterion {
            id: "B3",
            pass: b3,
            detail: format!(
                "path diff {} signed-rank p {}, coverage diff {}",
                fmt(row(Metric::PathLength).diff_mean),
                fmt(path_p),
                fmt(row(Metric::Coverage).diff_mean)
            ),
        },
        Criterion {
            id: "B4",
            pass: n > 0 && flat >= need_flat,
            detail: format!("flat social trend in {flat}/{n} runs (need {need_flat})"),
        },
    ])
}
