use std::io::Write;

use serde::Serialize;

use super::eval::RunRecord;
use crate::error::{Error, Result};

/// Aggregate of one (problem, method) cell of the results table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub problem: String,
    pub method: String,
    pub mean: f64,
    pub std: f64,
    /// 1 = best mean on this problem; ties share the average rank.
    pub rank: f64,
}

fn first_seen<'a>(items: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in items {
        if !out.iter().any(|o| o == s) {
            out.push(s.to_string());
        }
    }
    out
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Mean and sample standard deviation of the final best value per
/// (problem, method), ranked by mean within each problem. Rows follow the
/// order in which problems and methods first appear.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let problems = first_seen(records.iter().map(|r| r.problem.as_str()));
    let methods = first_seen(records.iter().map(|r| r.method.as_str()));
    let mut out = Vec::new();
    for p in &problems {
        let mut rows: Vec<SummaryRow> = methods
            .iter()
            .filter_map(|m| {
                let v: Vec<f64> =
                    records.iter().filter(|r| &r.problem == p && &r.method == m).map(|r| r.final_best_y).collect();
                (!v.is_empty()).then(|| {
                    let (mean, std) = mean_std(&v);
                    SummaryRow { problem: p.clone(), method: m.clone(), mean, std, rank: 0.0 }
                })
            })
            .collect();
        let means: Vec<f64> = rows.iter().map(|r| r.mean).collect();
        for r in rows.iter_mut() {
            let below = means.iter().filter(|&&m| m < r.mean).count() as f64;
            let equal = means.iter().filter(|&&m| m == r.mean).count() as f64;
            r.rank = below + (equal + 1.0) / 2.0;
        }
        out.extend(rows);
    }
    out
}

/// Average per-problem rank of each method.
pub fn average_ranks(rows: &[SummaryRow]) -> Vec<(String, f64)> {
    first_seen(rows.iter().map(|r| r.method.as_str()))
        .into_iter()
        .map(|m| {
            let ranks: Vec<f64> = rows.iter().filter(|r| r.method == m).map(|r| r.rank).collect();
            let avg = ranks.iter().sum::<f64>() / ranks.len() as f64;
            (m, avg)
        })
        .collect()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Dataset(e.to_string())
}

/// Columns: `problem,method,mean,std,rank`.
pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Columns: `method,average_rank`.
pub fn write_ranks_csv<W: Write>(ranks: &[(String, f64)], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["method", "average_rank"]).map_err(csv_err)?;
    for (m, r) in ranks {
        out.write_record([m.clone(), r.to_string()]).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// One JSON object per line.
pub fn write_jsonl<T: Serialize, W: Write>(items: &[T], mut w: W) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub method: String,
    pub problem: String,
    pub run: usize,
    pub fes: u64,
    pub best_y: f64,
}

pub fn convergence_rows(records: &[RunRecord]) -> Vec<ConvergenceRow> {
    records
        .iter()
        .flat_map(|r| {
            r.trace.iter().map(move |t| ConvergenceRow {
                method: r.method.clone(),
                problem: r.problem.clone(),
                run: r.run,
                fes: t.fes,
                best_y: t.best_y,
            })
        })
        .collect()
}

/// Columns: `method,problem,run,fes,best_y`.
pub fn write_convergence_csv<W: Write>(records: &[RunRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in convergence_rows(records) {
        out.serialize(row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Sidecar with the wall time of every run: `method,problem,run,seconds`.
pub fn write_timings_csv<W: Write>(records: &[RunRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["method", "problem", "run", "seconds"]).map_err(csv_err)?;
    for r in records {
        out.write_record([r.method.clone(), r.problem.clone(), r.run.to_string(), format!("{:.6}", r.wall_time)])
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}
