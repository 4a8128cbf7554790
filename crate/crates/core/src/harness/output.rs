//! Result files. Everything is written into a staging directory first and
//! moved into place only once all files are complete.

use std::fs;
use std::path::{Path, PathBuf};

use csv::{Terminator, Writer, WriterBuilder};

use crate::agent::QTable;
use crate::env::AgentResult;
use crate::error::{Error, Result};

use super::config::Manifest;
use super::dyad::DyadSeries;
use super::sweep::SweepResult;

pub const CURVES_FILE: &str = "curves.csv";
pub const HEATMAP_FILE: &str = "heatmap.csv";
pub const SESSIONS_FILE: &str = "sessions.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const DYADS_DIR: &str = "dyads";
pub const QTABLES_DIR: &str = "qtables";

fn writer(path: &Path) -> Result<Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(WriterBuilder::new()
        .terminator(Terminator::Any(b'\n'))
        .from_writer(file))
}

fn finish(mut w: Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn result_name(r: AgentResult) -> &'static str {
    match r {
        AgentResult::GotHigh => "high",
        AgentResult::GotLow => "low",
        AgentResult::Tie => "tie",
    }
}

fn dyad_stem(d: &DyadSeries) -> String {
    format!("alpha{}_beta{}_dyad{}", d.alpha, d.beta, d.dyad_index)
}

fn write_curves(result: &SweepResult, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["alpha", "beta", "episode", "fairness_mean", "fairness_std"])?;
    for r in result.curves() {
        w.write_record([
            r.alpha.to_string(),
            r.beta.to_string(),
            r.episode.to_string(),
            r.fairness_mean.to_string(),
            r.fairness_std.to_string(),
        ])?;
    }
    finish(w, path)
}

fn write_heatmap(result: &SweepResult, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["alpha", "beta", "final_fairness_mean", "late_window_fairness_mean"])?;
    for r in result.heatmap() {
        w.write_record([
            r.alpha.to_string(),
            r.beta.to_string(),
            r.final_fairness_mean.to_string(),
            r.late_window_fairness_mean.to_string(),
        ])?;
    }
    finish(w, path)
}

fn write_sessions(result: &SweepResult, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "alpha",
        "beta",
        "dyad",
        "session",
        "final_fairness",
        "late_window_fairness",
        "high_a",
        "high_b",
        "ties",
        "timeouts",
    ])?;
    for d in result.cells.iter().flat_map(|c| &c.dyads) {
        let f = &d.final_counts;
        w.write_record([
            d.alpha.to_string(),
            d.beta.to_string(),
            d.dyad_index.to_string(),
            d.session.as_str().to_string(),
            f.fairness().to_string(),
            d.late_counts.fairness().to_string(),
            f.h_count_a.to_string(),
            f.h_count_b.to_string(),
            f.ties().to_string(),
            d.timeouts.to_string(),
        ])?;
    }
    finish(w, path)
}

fn write_dyad_log(d: &DyadSeries, path: &Path) -> Result<()> {
    let Some(log) = &d.log else { return Ok(()) };
    let mut w = writer(path)?;
    w.write_record([
        "episode",
        "result_a",
        "result_b",
        "reward_a",
        "reward_b",
        "ticks",
        "timed_out",
    ])?;
    for (i, o) in log.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            result_name(o.result_a).to_string(),
            result_name(o.result_b).to_string(),
            o.reward_a.to_string(),
            o.reward_b.to_string(),
            o.ticks.to_string(),
            o.timed_out.to_string(),
        ])?;
    }
    finish(w, path)
}

/// One row per state: index, Q(s, High), Q(s, Low).
pub fn write_qtable(q: &QTable, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["state", "q_high", "q_low"])?;
    for (s, [h, l]) in q.rows() {
        w.write_record([s.to_string(), h.to_string(), l.to_string()])?;
    }
    finish(w, path)
}

fn write_all(result: &SweepResult, dir: &Path, out_dir: &Path) -> Result<()> {
    write_curves(result, &dir.join(CURVES_FILE))?;
    write_heatmap(result, &dir.join(HEATMAP_FILE))?;
    write_sessions(result, &dir.join(SESSIONS_FILE))?;

    let cfg = &result.config;
    let dyads = result.cells.iter().flat_map(|c| &c.dyads);
    if cfg.dyad_logs {
        let sub = dir.join(DYADS_DIR);
        fs::create_dir(&sub).map_err(|e| Error::io(&sub, e))?;
        for d in dyads.clone() {
            write_dyad_log(d, &sub.join(format!("{}.csv", dyad_stem(d))))?;
        }
    }
    if cfg.dump_q {
        let sub = dir.join(QTABLES_DIR);
        fs::create_dir(&sub).map_err(|e| Error::io(&sub, e))?;
        for d in dyads {
            write_qtable(&d.q_a, &sub.join(format!("{}_a.csv", dyad_stem(d))))?;
            write_qtable(&d.q_b, &sub.join(format!("{}_b.csv", dyad_stem(d))))?;
        }
    }

    let mut config = cfg.clone();
    config.output_dir = out_dir.to_path_buf();
    let path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&Manifest::new(config))? + "\n";
    fs::write(&path, json).map_err(|e| Error::io(&path, e))
}

fn remove_existing(path: &Path) -> Result<()> {
    let res = match fs::symlink_metadata(path) {
        Err(_) => return Ok(()),
        Ok(m) if m.is_dir() => fs::remove_dir_all(path),
        Ok(_) => fs::remove_file(path),
    };
    res.map_err(|e| Error::io(path, e))
}

/// Writes all result files into `dir`, replacing same-named files from an
/// earlier run. Nothing is left behind if any write fails.
pub fn emit_outputs(result: &SweepResult, dir: &Path) -> Result<()> {
    if result.cells.is_empty() || result.cells.iter().any(|c| c.dyads.is_empty()) {
        return Err(Error::InvalidConfig("nothing to write: sweep has no cells".into()));
    }
    let parent: PathBuf = match dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).map_err(|e| Error::io(&parent, e))?;
    let staging = tempfile::Builder::new()
        .prefix(".boe-staging-")
        .tempdir_in(&parent)
        .map_err(|e| Error::io(&parent, e))?;
    write_all(result, staging.path(), dir)?;

    if !dir.exists() {
        let staged = staging.keep();
        return fs::rename(&staged, dir).map_err(|e| {
            let _ = fs::remove_dir_all(&staged);
            Error::io(dir, e)
        });
    }
    for entry in fs::read_dir(staging.path()).map_err(|e| Error::io(staging.path(), e))? {
        let entry = entry.map_err(|e| Error::io(staging.path(), e))?;
        let target = dir.join(entry.file_name());
        remove_existing(&target)?;
        fs::rename(entry.path(), &target).map_err(|e| Error::io(&target, e))?;
    }
    Ok(())
}
