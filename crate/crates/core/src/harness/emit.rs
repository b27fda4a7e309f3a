//! CSV and JSON result files.
//!
//! Files are written to a temporary sibling and renamed into place, so a failed
//! write never leaves a partial file at the target path. Floats use Rust's shortest
//! round-trip formatting in both formats.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::Result;
use crate::harness::runner::{ExperimentResult, SweepPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    /// `.json` selects JSON, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => OutputFormat::Json,
            _ => OutputFormat::Csv,
        }
    }
}

pub const SERIES_HEADER: [&str; 8] = [
    "cycle",
    "state",
    "action",
    "reward",
    "cumulative_reward",
    "average_reward",
    "plan",
    "inconsistent",
];

pub const SWEEP_HEADER: [&str; 9] = [
    "index",
    "axis",
    "value",
    "repeat",
    "seed",
    "total_reward",
    "final_average",
    "inconsistency_count",
    "evaluated_cycles",
];

/// One row per cycle. Cycles that could not be evaluated for inconsistency are `na`.
pub fn write_series_csv<W: Write>(result: &ExperimentResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SERIES_HEADER)?;
    for r in &result.series {
        let flag = match r.inconsistent {
            Some(true) => "true",
            Some(false) => "false",
            None => "na",
        };
        w.write_record([
            r.cycle.to_string(),
            r.state.to_string(),
            r.action.to_string(),
            r.reward.to_string(),
            r.cumulative_reward.to_string(),
            r.average_reward.to_string(),
            r.plan.to_string(),
            flag.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One summary row per sweep point.
pub fn write_sweep_csv<W: Write>(points: &[SweepPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for p in points {
        let s = &p.result.summary;
        w.write_record([
            p.index.to_string(),
            p.axis.to_string(),
            p.value.to_string(),
            p.repeat.to_string(),
            p.seed.to_string(),
            s.total_reward.to_string(),
            p.result.final_average().to_string(),
            s.inconsistency_count.to_string(),
            s.evaluated_cycles.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write, S: Serialize + ?Sized>(value: &S, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Writes through `write` into a temporary file next to `path`, then renames it.
pub fn write_atomically<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&mut NamedTempFile) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    write(&mut tmp)?;
    tmp.as_file_mut().flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn emit_result(result: &ExperimentResult, format: OutputFormat, path: &Path) -> Result<()> {
    write_atomically(path, |f| match format {
        OutputFormat::Csv => write_series_csv(result, f),
        OutputFormat::Json => write_json(result, f),
    })
}

pub fn emit_sweep(points: &[SweepPoint], format: OutputFormat, path: &Path) -> Result<()> {
    write_atomically(path, |f| match format {
        OutputFormat::Csv => write_sweep_csv(points, f),
        OutputFormat::Json => write_json(points, f),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discount::DiscountFamily;
    use crate::harness::config::{AgentKind, ExperimentConfig};
    use crate::harness::runner::run_experiment;

    fn farsighted() -> ExperimentResult {
        let cfg = ExperimentConfig::new(DiscountFamily::geometric(0.9).unwrap(), AgentKind::FixedFarsighted);
        run_experiment(&cfg).unwrap()
    }

    #[test]
    fn csv_has_header_and_one_row_per_cycle() {
        let mut buf = Vec::new();
        write_series_csv(&farsighted(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 201);
        assert_eq!(
            lines[0],
            "cycle,state,action,reward,cumulative_reward,average_reward,plan,inconsistent"
        );
        assert_eq!(lines[1], "1,0,1,0,0,0,1111111111,na");
        assert_eq!(lines[6], "6,5,1,1000,1000,166.66666666666666,1111111111,false");
        assert!(lines[200].starts_with("200,"));
        assert_eq!(lines[200].split(',').nth(5), Some("165"));
    }

    #[test]
    fn json_round_trips() {
        let result = farsighted();
        let mut buf = Vec::new();
        write_json(&result, &mut buf).unwrap();
        let back: ExperimentResult = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back, result);
    }

    #[test]
    fn unwritable_path_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("missing").join("out.csv");
        assert!(emit_result(&farsighted(), OutputFormat::Csv, &target).is_err());
        assert!(!target.exists());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(OutputFormat::from_path(Path::new("a/b.JSON")), OutputFormat::Json);
        assert_eq!(OutputFormat::from_path(Path::new("a/b.csv")), OutputFormat::Csv);
        assert_eq!(OutputFormat::from_path(Path::new("out")), OutputFormat::Csv);
    }
}
