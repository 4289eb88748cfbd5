//! Output files: JSON-lines mission records and CSV tables.
//!
//! Every file opens with the run's metadata. JSON-lines files carry it as a
//! `{"meta": ...}` first line; CSV files carry it as `#`-prefixed lines
//! before the header row.

use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;
use crate::sim::{CampaignResult, MissionReport, TaskOutcome};

/// One campaign's results tagged with the seed that produced them.
#[derive(Clone, Copy)]
pub struct SeededRun<'a> {
    pub seed: u64,
    pub result: &'a CampaignResult,
}

#[derive(Serialize)]
struct TaskRecord<'a> {
    seed: u64,
    mission: usize,
    #[serde(flatten)]
    outcome: &'a TaskOutcome,
}

/// One line per task per mission per run.
pub fn write_reports_jsonl<W: Write>(mut w: W, meta: &Value, runs: &[SeededRun<'_>]) -> Result<()> {
    writeln!(w, "{}", json!({ "meta": meta }))?;
    for run in runs {
        for r in &run.result.reports {
            append_mission_jsonl(&mut w, run.seed, r)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn append_mission_jsonl<W: Write>(mut w: W, seed: u64, report: &MissionReport) -> Result<()> {
    for t in &report.tasks {
        let rec = TaskRecord {
            seed,
            mission: report.mission,
            outcome: t,
        };
        serde_json::to_writer(&mut w, &rec)?;
        writeln!(w)?;
    }
    Ok(())
}

/// `# key: value` per top-level key of `meta`, values as compact JSON.
pub fn write_meta_comment<W: Write>(mut w: W, meta: &Value) -> Result<()> {
    match meta {
        Value::Object(map) => {
            for (k, v) in map {
                writeln!(w, "# {k}: {v}")?;
            }
        }
        other => writeln!(w, "# {other}")?,
    }
    Ok(())
}

/// Metadata comment lines, then a header row and one row per item.
pub fn write_csv<W: Write, T: Serialize>(mut w: W, meta: &Value, rows: impl IntoIterator<Item = T>) -> Result<()> {
    write_meta_comment(&mut w, meta)?;
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct ReputationRow {
    pub seed: u64,
    pub mission: usize,
    pub uav_id: usize,
    pub rho: f64,
}

pub fn write_reputation_csv<W: Write>(w: W, meta: &Value, runs: &[SeededRun<'_>]) -> Result<()> {
    write_csv(
        w,
        meta,
        runs.iter().flat_map(|run| {
            run.result.reputation.iter().map(|r| ReputationRow {
                seed: run.seed,
                mission: r.mission,
                uav_id: r.uav_id,
                rho: r.rho,
            })
        }),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct ScatterRow {
    pub seed: u64,
    pub mission: usize,
    pub task_id: usize,
    pub cost: f64,
    pub neg_log_reliability: f64,
    pub reputation: f64,
    pub feasible: bool,
}

pub fn write_scatter_csv<W: Write>(w: W, meta: &Value, runs: &[SeededRun<'_>]) -> Result<()> {
    write_csv(
        w,
        meta,
        runs.iter().flat_map(|run| {
            run.result.scatter.iter().map(|p| ScatterRow {
                seed: run.seed,
                mission: p.mission,
                task_id: p.point.task_id,
                cost: p.point.cost,
                neg_log_reliability: p.point.neg_log_reliability,
                reputation: p.point.reputation,
                feasible: p.point.feasible,
            })
        }),
    )
}

/// Read a CSV written by this module, skipping the metadata lines.
pub fn read_csv<R: Read, T: DeserializeOwned>(r: R) -> Result<Vec<T>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{CampaignSummary, ReputationRecord};

    #[test]
    fn summary_round_trips_through_csv() {
        let rows = vec![CampaignSummary {
            solver: "moqga".into(),
            n_uavs: 8,
            n_tasks: 2,
            missions: 30,
            completed_pct: 90.0,
            mean_violations: 0.3,
        }];
        let mut buf = Vec::new();
        write_csv(&mut buf, &json!({"seed": 1, "preset": "x"}), &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# preset: \"x\"\n# seed: 1\n"));
        assert!(text.contains("solver,n_uavs,n_tasks,missions,completed_pct,mean_violations"));
        let back: Vec<CampaignSummary> = read_csv(&buf[..]).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn reputation_rows_have_plot_columns() {
        let result = CampaignResult {
            reports: Vec::new(),
            summary: CampaignSummary::from_reports("distance", 1, 1, &[]),
            reputation: vec![ReputationRecord { mission: 3, uav_id: 1, rho: 2.5 }],
            scatter: Vec::new(),
        };
        let mut buf = Vec::new();
        write_reputation_csv(&mut buf, &json!({}), &[SeededRun { seed: 9, result: &result }]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "seed,mission,uav_id,rho\n9,3,1,2.5\n");
    }
}
