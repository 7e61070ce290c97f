//! CSV result tables: per-repetition raw rows, mean/std summaries matching
//! the evaluation table schema (setting, policy, six indicators), and a
//! separate timing table.

use std::path::Path;

use crate::error::Result;

use super::ResultTable;

pub const RAW_HEADER: &str = "setting,policy,task,repetition,c,gd,ed,pfs,gs,igd,hv";
pub const SUMMARY_HEADER: &str = "setting,policy,c,gd,ed,pfs,gs,igd";
pub const TIMING_HEADER: &str = "setting,policy,task,repetition,seconds";

fn fmt(value: f64) -> String {
    if value.is_nan() {
        String::new()
    } else {
        format!("{value}")
    }
}

/// Write raw.csv, summary_mean.csv, summary_std.csv and timing.csv into
/// `dir`. Raw and summary files are byte-reproducible for a fixed plan;
/// timing is wall-clock and varies between runs.
pub fn write_results(table: &ResultTable, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;

    let mut raw = String::from(RAW_HEADER);
    raw.push('\n');
    let mut timing = String::from(TIMING_HEADER);
    timing.push('\n');
    for row in &table.rows {
        let cells = match &row.report {
            Some(r) => vec![
                fmt(r.c),
                fmt(r.gd),
                fmt(r.ed),
                format!("{}", r.pfs),
                r.gs.map(fmt).unwrap_or_default(),
                fmt(r.igd),
                fmt(r.hv),
            ],
            None => vec![String::new(); 7],
        };
        raw.push_str(&format!(
            "{},{},{},{},{}\n",
            row.setting,
            row.policy,
            row.task,
            row.repetition,
            cells.join(",")
        ));
        timing.push_str(&format!(
            "{},{},{},{},{}\n",
            row.setting,
            row.policy,
            row.task,
            row.repetition,
            fmt(row.seconds)
        ));
    }
    std::fs::write(dir.join("raw.csv"), raw)?;
    std::fs::write(dir.join("timing.csv"), timing)?;

    let summaries = table.aggregate();
    let mut mean = String::from(SUMMARY_HEADER);
    mean.push('\n');
    let mut std = String::from(SUMMARY_HEADER);
    std.push('\n');
    for s in &summaries {
        let fmt_row = |values: &[f64; 6]| -> String {
            values.iter().map(|&v| fmt(v)).collect::<Vec<_>>().join(",")
        };
        mean.push_str(&format!(
            "{},{},{}\n",
            s.setting,
            s.policy,
            fmt_row(&s.mean)
        ));
        std.push_str(&format!("{},{},{}\n", s.setting, s.policy, fmt_row(&s.std)));
    }
    std::fs::write(dir.join("summary_mean.csv"), mean)?;
    std::fs::write(dir.join("summary_std.csv"), std)?;
    Ok(())
}
