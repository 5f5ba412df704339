//! Scenario runner for radiation-aware surface-code experiments.
//!
//! Each scenario simulates seeded shot sequences with the `radqec-core`
//! simulator, aggregates them into per-shot time series and writes a metrics
//! CSV, a timings CSV, a static SVG chart and a JSON manifest holding the
//! resolved config and the SHA-256 of every artifact.

pub mod config;
pub mod engine;
pub mod formats;
pub mod report;
pub mod scenarios;
pub mod setup;
pub mod stats;

use std::path::PathBuf;

use anyhow::Result;
use serde_json::json;

use config::{Scenario, ScenarioConfig};
use report::{line_chart_svg, OutputDir};

/// Runs a scenario and writes its artifacts into `cfg.out`. Returns the
/// manifest path.
pub fn execute(scenario: Scenario, cfg: &ScenarioConfig) -> Result<PathBuf> {
    cfg.validate()?;
    let mut out = OutputDir::create(&cfg.out)?;
    let name = scenario.name();
    let summary = if scenario == Scenario::Overhead {
        let rows = scenarios::run_overhead(cfg)?;
        let table = scenarios::overhead_table(&rows);
        out.write(&format!("{name}.csv"), &table.to_csv()?)?;
        let series = vec![report::Series {
            label: "REI / MWPM".into(),
            points: rows.iter().map(|r| (r.distance as f64, r.ratio())).collect(),
        }];
        out.write(&format!("{name}.svg"), line_chart_svg("identification overhead", "code distance", "median time ratio", &series).as_bytes())?;
        json!({ "max_ratio": rows.iter().map(|r| r.ratio()).fold(0.0, f64::max) })
    } else {
        let run = match scenario {
            Scenario::DistanceSweep => scenarios::run_distance_sweep(cfg)?,
            Scenario::PositionStudy => scenarios::run_position_study(cfg)?,
            Scenario::MultiCode => scenarios::run_multi_code(cfg)?,
            Scenario::DecoderCompare => scenarios::run_decoder_comparison(cfg)?,
            Scenario::Overhead => unreachable!(),
        };
        out.write(&format!("{name}.csv"), &run.metrics_table().to_csv()?)?;
        out.write(&format!("{name}_timings.csv"), &run.timings_table().to_csv()?)?;
        if let Some(t) = run.detections_table() {
            out.write(&format!("{name}_detections.csv"), &t.to_csv()?)?;
        }
        let (title, y, series) = run.chart();
        out.write(&format!("{name}.svg"), line_chart_svg(&title, "time (s)", y, &series).as_bytes())?;
        run.summary
    };
    out.write_manifest(name, cfg.seed, cfg, summary)
}
