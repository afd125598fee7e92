//! Offline subcommands: replay, metrics and simulation.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use anyhow::Context;

use gazelink_core::layout::{LayoutMode, RenderConfig};
use gazelink_core::recorder::{attention_matrix, mutual_gaze_episodes, read_log, replay};
use gazelink_core::sim::{run_scenario_full, Scenario, SimReport};
use gazelink_core::ClientId;

/// Writes one JSON RenderFrame per line for `viewer`. Returns the frame
/// count.
pub fn replay_to(log: &Path, viewer: &str, mode: LayoutMode, mut out: impl Write) -> anyhow::Result<usize> {
    let file = File::open(log).with_context(|| format!("opening {}", log.display()))?;
    let frames = replay(BufReader::new(file), ClientId::from(viewer), RenderConfig::with_mode(mode))?;
    let mut n = 0;
    for frame in frames {
        serde_json::to_writer(&mut out, &frame?)?;
        out.write_all(b"\n")?;
        n += 1;
    }
    Ok(n)
}

/// CSV output for the requested metrics; both when neither is requested.
pub fn metrics_csv(log: &Path, attention: bool, mutual: bool) -> anyhow::Result<String> {
    let file = File::open(log).with_context(|| format!("opening {}", log.display()))?;
    let log = read_log(BufReader::new(file))?;
    let (attention, mutual) = if attention || mutual { (attention, mutual) } else { (true, true) };
    let mut out = String::new();
    if attention {
        out.push_str(&attention_matrix(&log).to_csv());
    }
    if mutual {
        if attention {
            out.push('\n');
        }
        out.push_str("a,b,start_ms,end_ms\n");
        for e in mutual_gaze_episodes(&log) {
            out.push_str(&format!("{},{},{},{}\n", e.a, e.b, e.start, e.end));
        }
    }
    Ok(out)
}

/// Runs a scenario file, optionally writing the JSON report and the session
/// log.
pub fn sim_run(scenario: &Path, report: Option<&Path>, log: Option<&Path>) -> anyhow::Result<SimReport> {
    let text = std::fs::read_to_string(scenario).with_context(|| format!("reading {}", scenario.display()))?;
    let scenario: Scenario = serde_json::from_str(&text).context("parsing scenario")?;
    let run = run_scenario_full(&scenario)?;
    if let Some(path) = report {
        std::fs::write(path, serde_json::to_string_pretty(&run.report)?)?;
    }
    if let Some(path) = log {
        run.log.write_to(File::create(path)?)?;
    }
    Ok(run.report)
}
