//! Trial records, the results CSV, and aggregation.
//!
//! The CSV is the experiment artifact: one row per (solver, sigma, r_hat,
//! trial) cell, sorted by that key, floats printed in shortest
//! round-trip form so reruns are byte-identical. Missing values (chord's
//! r_hat, timings when disabled, undefined correlations) are empty fields.

use std::path::Path;

use chordv::{Error, Result};

/// Outcome of one solver run on one noisy draw.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub solver: String,
    pub sigma: f64,
    /// Prior peak count; `None` for solvers that take none (chord).
    pub r_hat: Option<usize>,
    pub trial: u64,
    pub nrmse: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Monotonic wall time; `None` unless timings were requested.
    pub wall_time_s: Option<f64>,
    /// Per-window spectral correlations; inner `None` marks a window
    /// where the statistic is undefined (zero variance).
    pub peak_correlations: Option<Vec<Option<f64>>>,
}

impl TrialRecord {
    fn validate(&self) -> Result<()> {
        if !self.nrmse.is_finite() || self.nrmse < 0.0 {
            return Err(Error::InvalidInput(format!(
                "nrmse must be finite and >= 0, got {}",
                self.nrmse
            )));
        }
        if let Some(corrs) = &self.peak_correlations {
            for c in corrs.iter().flatten() {
                if !(-1.0..=1.0).contains(c) {
                    return Err(Error::InvalidInput(format!(
                        "correlation {c} outside [-1, 1]"
                    )));
                }
            }
        }
        Ok(())
    }

    fn sort_key(&self) -> (&str, f64, Option<usize>, u64) {
        (&self.solver, self.sigma, self.r_hat, self.trial)
    }
}

fn key_cmp(
    a: &(&str, f64, Option<usize>, u64),
    b: &(&str, f64, Option<usize>, u64),
) -> std::cmp::Ordering {
    a.0.cmp(b.0)
        .then(a.1.total_cmp(&b.1))
        .then(a.2.cmp(&b.2))
        .then(a.3.cmp(&b.3))
}

const FIXED_COLUMNS: [&str; 8] =
    ["solver", "sigma", "r_hat", "trial", "nrmse", "iterations", "converged", "wall_time_s"];

/// Render records as the results CSV (sorted; caller order irrelevant).
pub fn format_csv(records: &[TrialRecord]) -> Result<String> {
    for r in records {
        r.validate()?;
    }
    let mut sorted: Vec<&TrialRecord> = records.iter().collect();
    sorted.sort_by(|a, b| key_cmp(&a.sort_key(), &b.sort_key()));

    let n_corr =
        records.iter().filter_map(|r| r.peak_correlations.as_ref().map(Vec::len)).max().unwrap_or(0);

    let mut out = String::new();
    out.push_str(&FIXED_COLUMNS.join(","));
    for i in 1..=n_corr {
        out.push_str(&format!(",peak_corr_{i}"));
    }
    out.push('\n');

    for r in sorted {
        out.push_str(&r.solver);
        out.push_str(&format!(",{}", r.sigma));
        match r.r_hat {
            Some(v) => out.push_str(&format!(",{v}")),
            None => out.push(','),
        }
        out.push_str(&format!(",{},{},{},{}", r.trial, r.nrmse, r.iterations, r.converged));
        match r.wall_time_s {
            Some(v) => out.push_str(&format!(",{v}")),
            None => out.push(','),
        }
        let corrs = r.peak_correlations.as_deref().unwrap_or(&[]);
        for i in 0..n_corr {
            match corrs.get(i).copied().flatten() {
                Some(v) => out.push_str(&format!(",{v}")),
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// Write the results CSV to a file.
pub fn emit_csv(records: &[TrialRecord], path: &Path) -> Result<()> {
    let text = format_csv(records)?;
    std::fs::write(path, text).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

/// Parse a results CSV back into records (the inverse of [`format_csv`]).
pub fn parse_csv(text: &str) -> Result<Vec<TrialRecord>> {
    let bad = |msg: String| Error::InvalidInput(format!("results csv: {msg}"));
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty input".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < FIXED_COLUMNS.len() || cols[..FIXED_COLUMNS.len()] != FIXED_COLUMNS {
        return Err(bad(format!("unexpected header '{header}'")));
    }
    let n_corr = cols.len() - FIXED_COLUMNS.len();

    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = i + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(bad(format!("row {row}: expected {} fields, got {}", cols.len(), fields.len())));
        }
        let parse_f64 = |s: &str, what: &str| -> Result<f64> {
            s.parse().map_err(|_| bad(format!("row {row}: bad {what} '{s}'")))
        };
        let corrs: Vec<Option<f64>> = fields[8..]
            .iter()
            .map(|s| if s.is_empty() { Ok(None) } else { parse_f64(s, "correlation").map(Some) })
            .collect::<Result<_>>()?;
        records.push(TrialRecord {
            solver: fields[0].to_string(),
            sigma: parse_f64(fields[1], "sigma")?,
            r_hat: if fields[2].is_empty() {
                None
            } else {
                Some(fields[2].parse().map_err(|_| bad(format!("row {row}: bad r_hat")))?)
            },
            trial: fields[3].parse().map_err(|_| bad(format!("row {row}: bad trial")))?,
            nrmse: parse_f64(fields[4], "nrmse")?,
            iterations: fields[5].parse().map_err(|_| bad(format!("row {row}: bad iterations")))?,
            converged: match fields[6] {
                "true" => true,
                "false" => false,
                other => return Err(bad(format!("row {row}: bad converged '{other}'"))),
            },
            wall_time_s: if fields[7].is_empty() { None } else { Some(parse_f64(fields[7], "wall_time_s")?) },
            peak_correlations: if n_corr == 0 { None } else { Some(corrs) },
        });
    }
    Ok(records)
}

/// Summary statistics for one (solver, sigma, r_hat) group.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub solver: String,
    pub sigma: f64,
    pub r_hat: Option<usize>,
    /// Number of successful trials in the group.
    pub n: usize,
    pub mean_nrmse: f64,
    /// Sample standard deviation (n - 1 denominator); 0 when n < 2.
    pub std_nrmse: f64,
    /// Per-window mean correlation over the trials where it was defined;
    /// `None` for windows undefined in every trial.
    pub mean_peak_correlations: Vec<Option<f64>>,
}

/// Group records by (solver, sigma, r_hat) and average, in sort-key order.
pub fn aggregate(records: &[TrialRecord]) -> Vec<Aggregate> {
    let mut sorted: Vec<&TrialRecord> = records.iter().collect();
    sorted.sort_by(|a, b| key_cmp(&a.sort_key(), &b.sort_key()));

    let mut out: Vec<Aggregate> = Vec::new();
    for group in sorted.chunk_by(|a, b| {
        a.solver == b.solver && a.sigma.total_cmp(&b.sigma).is_eq() && a.r_hat == b.r_hat
    }) {
        let n = group.len();
        let mean = group.iter().map(|r| r.nrmse).sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (group.iter().map(|r| (r.nrmse - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        let n_corr =
            group.iter().filter_map(|r| r.peak_correlations.as_ref().map(Vec::len)).max().unwrap_or(0);
        let mean_corrs = (0..n_corr)
            .map(|i| {
                let vals: Vec<f64> = group
                    .iter()
                    .filter_map(|r| r.peak_correlations.as_ref())
                    .filter_map(|c| c.get(i).copied().flatten())
                    .collect();
                if vals.is_empty() {
                    None
                } else {
                    Some(vals.iter().sum::<f64>() / vals.len() as f64)
                }
            })
            .collect();
        out.push(Aggregate {
            solver: group[0].solver.clone(),
            sigma: group[0].sigma,
            r_hat: group[0].r_hat,
            n,
            mean_nrmse: mean,
            std_nrmse: std,
            mean_peak_correlations: mean_corrs,
        });
    }
    out
}
