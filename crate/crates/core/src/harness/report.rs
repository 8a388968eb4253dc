use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::Serialize;

use super::config::InstanceSource;
use super::replicate::RunRecord;
use crate::ape::Trigger;
use crate::error::{PsiError, Result};
use crate::model::BanditInstance;
use crate::pareto::verify_recommendation;

/// Summary of all runs sharing a configuration key.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub config: String,
    pub reps: usize,
    pub mean_tau: f64,
    pub median_tau: f64,
    pub std_tau: f64,
    /// `(incorrect + capped) / R`
    pub err_rate: f64,
    /// Binomial standard error of `err_rate`.
    pub err_se: f64,
    pub mean_rec_size: f64,
    pub capped: usize,
    pub mean_pulls: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateReport {
    pub rows: Vec<AggregateRow>,
}

impl AggregateReport {
    pub fn row(&self, config: &str) -> Option<&AggregateRow> {
        self.rows.iter().find(|r| r.config == config)
    }
}

/// Mean, median and sample standard deviation. Sums run over the sorted
/// values so the result does not depend on input order.
pub fn summarize(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let std = if n > 1 {
        (sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    (mean, median, std)
}

/// Groups records by configuration key, in order of first appearance. The
/// result does not depend on the order of records within a key.
pub fn aggregate(records: &[RunRecord]) -> AggregateReport {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: HashMap<&str, Vec<&RunRecord>> = HashMap::new();
    for r in records {
        groups
            .entry(r.config.as_str())
            .or_insert_with(|| {
                order.push(r.config.as_str());
                Vec::new()
            })
            .push(r);
    }
    let rows = order
        .into_iter()
        .map(|key| {
            let runs = &groups[key];
            let n = runs.len();
            let taus: Vec<f64> = runs.iter().map(|r| r.tau as f64).collect();
            let (mean_tau, median_tau, std_tau) = summarize(&taus);
            let capped = runs
                .iter()
                .filter(|r| r.trigger == Trigger::RoundCap)
                .count();
            let wrong = runs
                .iter()
                .filter(|r| !r.correct || r.trigger == Trigger::RoundCap)
                .count();
            let err_rate = wrong as f64 / n as f64;
            let arms = runs[0].pulls.len();
            let mut total_pulls = vec![0u128; arms];
            for r in runs.iter().filter(|r| r.pulls.len() == arms) {
                for (m, &p) in total_pulls.iter_mut().zip(&r.pulls) {
                    *m += p as u128;
                }
            }
            let mean_pulls = total_pulls.iter().map(|&p| p as f64 / n as f64).collect();
            AggregateRow {
                config: key.to_string(),
                reps: n,
                mean_tau,
                median_tau,
                std_tau,
                err_rate,
                err_se: (err_rate * (1.0 - err_rate) / n as f64).sqrt(),
                mean_rec_size: runs
                    .iter()
                    .map(|r| r.recommendation.len() as f64)
                    .sum::<f64>()
                    / n as f64,
                capped,
                mean_pulls,
            }
        })
        .collect();
    AggregateReport { rows }
}

pub fn write_jsonl<W: Write>(records: &[RunRecord], mut w: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<RunRecord>> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| PsiError::Parse {
            row: n + 1,
            column: "record".into(),
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn write_aggregate_csv<W: Write>(report: &AggregateReport, w: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record([
        "config",
        "R",
        "mean_tau",
        "median_tau",
        "std_tau",
        "err_rate",
        "err_se",
        "mean_rec_size",
        "capped",
        "mean_pulls",
    ])?;
    for r in &report.rows {
        let pulls: Vec<String> = r.mean_pulls.iter().map(|p| format!("{p:.3}")).collect();
        w.write_record([
            r.config.clone(),
            r.reps.to_string(),
            format!("{:.3}", r.mean_tau),
            format!("{:.3}", r.median_tau),
            format!("{:.3}", r.std_tau),
            format!("{:.6}", r.err_rate),
            format!("{:.6}", r.err_se),
            format!("{:.3}", r.mean_rec_size),
            r.capped.to_string(),
            pulls.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Outcome of re-checking stored results against regenerated instances.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checked: usize,
    /// Indices of records whose stored correctness flag disagrees.
    pub disagreements: Vec<usize>,
    /// Indices of records whose instance could not be regenerated identically.
    pub instance_mismatches: Vec<usize>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.disagreements.is_empty() && self.instance_mismatches.is_empty()
    }
}

/// Rebuilds each record's instance from its source and seed and recomputes
/// the correctness flag from the true means.
pub fn validate_records(records: &[RunRecord]) -> Result<ValidationReport> {
    let mut cache: HashMap<(String, Option<u64>), BanditInstance> = HashMap::new();
    let mut report = ValidationReport::default();
    for (n, r) in records.iter().enumerate() {
        let key = (r.instance.clone(), r.instance_seed);
        if !cache.contains_key(&key) {
            let src: InstanceSource = r.instance.parse()?;
            cache.insert(key.clone(), src.materialize(r.instance_seed.unwrap_or(0))?);
        }
        let inst = &cache[&key];
        report.checked += 1;
        if inst.fingerprint() != r.instance_id {
            report.instance_mismatches.push(n);
            continue;
        }
        let correct = r.trigger != Trigger::RoundCap
            && verify_recommendation(&inst.effective_means(), &r.recommendation, &r.rule)?;
        if correct != r.correct {
            report.disagreements.push(n);
        }
    }
    Ok(report)
}
