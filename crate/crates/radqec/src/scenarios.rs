//! The five experiment scenarios.
//!
//! Distance sweep and decoder comparison apply every configured radiation
//! event to each run; position study and multi-code treat each configured
//! event as a separate study.

use std::time::Instant;

use anyhow::{bail, Result};
use radqec_core::decoders::MwpmDecoder;
use radqec_core::rei::SyndromeWindow;
use radqec_core::{Basis, Coord, RadiationEvent};
use rand_core::RngCore;
use serde_json::json;

use crate::config::{DecoderKind, Scenario, ScenarioConfig};
use crate::engine::{run_sequences, sequence_rng, shots_for, SequencePlan, SequenceRecord};
use crate::report::{num, Series, Table};
use crate::setup::{multi_code, radiation_event, resolve_multi, resolve_single, CodeSetup, QUADRANTS};
use crate::stats::{mean, median, smoothed_peak, std_dev};

/// Per-shot and per-bin aggregates of one code over all sequences.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CodeSeries {
    pub samples: usize,
    pub shot_duration: f64,
    /// Sequences reporting a detection, per shot (identification runs only).
    pub detections: Vec<usize>,
    /// Mean affected-stabiliser ratio per shot, undetected shots counting 0.
    pub affected: Vec<f64>,
    pub mean_defects: Vec<f64>,
    pub rei_seconds: Vec<f64>,
    /// Last shot with a detection, per sequence.
    pub last_detected: Vec<Option<usize>>,
    /// Decoded shot indices.
    pub bin_shots: Vec<usize>,
    /// Logical-error counts per decoder per bin.
    pub errors: Vec<Vec<usize>>,
    pub decode_seconds: Vec<Vec<f64>>,
    /// Per sequence, per shot: detection centre and radius.
    pub detection_log: Vec<Vec<Option<(Coord, f64)>>>,
}

impl CodeSeries {
    fn from_records(records: &[SequenceRecord], code: usize, decoders: usize, shot_duration: f64) -> Self {
        let samples = records.len();
        let tracks: Vec<_> = records.iter().map(|r| &r.codes[code]).collect();
        let shots = tracks.first().map_or(0, |t| t.shots.len());
        let bins = tracks.first().map_or(0, |t| t.bins.len());
        let n = samples.max(1) as f64;
        let mut s = CodeSeries {
            samples,
            shot_duration,
            detections: vec![0; shots],
            affected: vec![0.0; shots],
            mean_defects: vec![0.0; shots],
            rei_seconds: vec![0.0; shots],
            bin_shots: tracks.first().map(|t| t.bins.iter().map(|b| b.shot).collect()).unwrap_or_default(),
            errors: vec![vec![0; bins]; decoders],
            decode_seconds: vec![vec![0.0; bins]; decoders],
            ..Self::default()
        };
        // sums run in sequence order so the floats never depend on threads
        for t in &tracks {
            for (k, info) in t.shots.iter().enumerate() {
                s.detections[k] += usize::from(info.detection.is_some());
                s.affected[k] += info.affected_ratio;
                s.mean_defects[k] += info.defects as f64;
                s.rei_seconds[k] += info.rei_seconds;
            }
            for (b, bin) in t.bins.iter().enumerate() {
                for d in 0..decoders {
                    s.errors[d][b] += usize::from(bin.logical_error[d]);
                    s.decode_seconds[d][b] += bin.decode_seconds[d];
                }
            }
            s.last_detected.push(t.shots.iter().rposition(|i| i.detection.is_some()));
            s.detection_log
                .push(t.shots.iter().map(|i| i.detection.map(|d| (d.center, d.radius))).collect());
        }
        for v in [&mut s.affected, &mut s.mean_defects, &mut s.rei_seconds] {
            v.iter_mut().for_each(|x| *x /= n);
        }
        s.decode_seconds.iter_mut().flatten().for_each(|x| *x /= n);
        s
    }

    pub fn detection_rate(&self) -> Vec<f64> {
        self.detections.iter().map(|&k| k as f64 / self.samples as f64).collect()
    }

    pub fn logical_error_rate(&self, decoder: usize) -> Vec<f64> {
        self.errors[decoder].iter().map(|&k| k as f64 / self.samples as f64).collect()
    }

    pub fn shot_time(&self, shot: usize) -> f64 {
        shot as f64 * self.shot_duration
    }

    /// Wall-clock time of the last detection in each sequence.
    pub fn last_detection_times(&self) -> Vec<f64> {
        self.last_detected
            .iter()
            .map(|s| s.map_or(-1.0, |k| self.shot_time(k)))
            .collect()
    }
}

/// One study inside a scenario run, labelled by key/value pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub keys: Vec<(&'static str, String)>,
    pub series: CodeSeries,
}

impl Group {
    pub fn key(&self, name: &str) -> Option<&str> {
        self.keys.iter().find(|(k, _)| *k == name).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub scenario: Scenario,
    pub decoders: Vec<DecoderKind>,
    pub identification: bool,
    pub groups: Vec<Group>,
    pub summary: serde_json::Value,
}

fn plan_events(cfg: &ScenarioConfig, chip: &radqec_core::Chip) -> Result<Vec<RadiationEvent>> {
    cfg.radiation
        .iter()
        .map(|r| radiation_event(r, resolve_single(&r.locus, chip)?))
        .collect()
}

struct SingleRun<'a> {
    cfg: &'a ScenarioConfig,
    distance: usize,
    basis: Basis,
    identification: bool,
    decoders: &'a [DecoderKind],
    stride: usize,
}

fn run_single(run: SingleRun<'_>, events: impl FnOnce(&radqec_core::Chip) -> Result<Vec<RadiationEvent>>) -> Result<CodeSeries> {
    let cfg = run.cfg;
    let rounds = cfg.rounds_for(run.distance);
    let chip_dims = cfg.chip.map(|c| (c.rows, c.cols));
    let (chip, setup) = CodeSetup::single(run.distance, rounds, run.basis, cfg.code.p, chip_dims)?;
    let events = events(&chip)?;
    let codes = [setup];
    let window = (run.identification || run.decoders.contains(&DecoderKind::Radmatching)).then_some(cfg.time.window);
    let plan = SequencePlan {
        codes: &codes,
        events: &events,
        shots: shots_for(cfg.time.horizon, codes[0].shot_duration()),
        stride: run.stride,
        decoders: run.decoders,
        window,
    };
    let records = run_sequences(&plan, cfg.seed()?, cfg.samples, cfg.threads);
    Ok(CodeSeries::from_records(&records, 0, run.decoders.len(), plan.shot_duration()))
}

/// Identification rate and affected ratio over time for every distance and
/// basis.
pub fn run_distance_sweep(cfg: &ScenarioConfig) -> Result<ScenarioRun> {
    cfg.validate()?;
    let mut groups = Vec::new();
    for &d in &cfg.code.distances {
        for b in &cfg.code.bases {
            let series = run_single(
                SingleRun {
                    cfg,
                    distance: d,
                    basis: b.basis(),
                    identification: true,
                    decoders: &[],
                    stride: 1,
                },
                |chip| plan_events(cfg, chip),
            )?;
            groups.push(Group {
                keys: vec![("distance", d.to_string()), ("basis", b.label().to_string())],
                series,
            });
        }
    }
    let summary = identification_summary(&groups);
    Ok(ScenarioRun {
        scenario: Scenario::DistanceSweep,
        decoders: Vec::new(),
        identification: true,
        groups,
        summary,
    })
}

/// Identification for each configured locus on the first distance and basis.
pub fn run_position_study(cfg: &ScenarioConfig) -> Result<ScenarioRun> {
    cfg.validate()?;
    if cfg.radiation.is_empty() {
        bail!("position study needs at least one radiation locus");
    }
    let d = cfg.code.distances[0];
    let b = cfg.code.bases[0];
    let mut groups = Vec::new();
    for r in &cfg.radiation {
        let series = run_single(
            SingleRun {
                cfg,
                distance: d,
                basis: b.basis(),
                identification: true,
                decoders: &[],
                stride: 1,
            },
            |chip| Ok(vec![radiation_event(r, resolve_single(&r.locus, chip)?)?]),
        )?;
        groups.push(Group {
            keys: vec![
                ("distance", d.to_string()),
                ("basis", b.label().to_string()),
                ("locus", r.locus.label()),
            ],
            series,
        });
    }
    let summary = identification_summary(&groups);
    Ok(ScenarioRun {
        scenario: Scenario::PositionStudy,
        decoders: Vec::new(),
        identification: true,
        groups,
        summary,
    })
}

/// Paired-seed logical error of every listed decoder.
pub fn run_decoder_comparison(cfg: &ScenarioConfig) -> Result<ScenarioRun> {
    cfg.validate()?;
    if cfg.decoders.is_empty() {
        bail!("decoder comparison needs at least one decoder");
    }
    let d = cfg.code.distances[0];
    let b = cfg.code.bases[0];
    let identification = cfg.decoders.contains(&DecoderKind::Radmatching);
    let series = run_single(
        SingleRun {
            cfg,
            distance: d,
            basis: b.basis(),
            identification,
            decoders: &cfg.decoders,
            stride: cfg.time.stride,
        },
        |chip| plan_events(cfg, chip),
    )?;
    let groups = vec![Group {
        keys: vec![("distance", d.to_string()), ("basis", b.label().to_string())],
        series,
    }];
    let summary = decoding_summary(&groups, &cfg.decoders, &cfg.radiation_window());
    Ok(ScenarioRun {
        scenario: Scenario::DecoderCompare,
        decoders: cfg.decoders.clone(),
        identification,
        groups,
        summary,
    })
}

/// Four codes on one chip, one study per configured locus.
pub fn run_multi_code(cfg: &ScenarioConfig) -> Result<ScenarioRun> {
    cfg.validate()?;
    let d = cfg.code.distances[0];
    let b = cfg.code.bases[0];
    let (chip, codes) = multi_code(d, cfg.rounds_for(d), b.basis(), cfg.code.p)?;
    let identification = cfg.decoders.contains(&DecoderKind::Radmatching);
    let mut groups = Vec::new();
    let studies: Vec<Option<&crate::config::RadiationConfig>> = if cfg.radiation.is_empty() {
        vec![None]
    } else {
        cfg.radiation.iter().map(Some).collect()
    };
    for r in studies {
        let events = match r {
            Some(r) => vec![radiation_event(r, resolve_multi(&r.locus, &chip, &codes)?)?],
            None => Vec::new(),
        };
        let plan = SequencePlan {
            codes: &codes,
            events: &events,
            shots: shots_for(cfg.time.horizon, codes[0].shot_duration()),
            stride: cfg.time.stride,
            decoders: &cfg.decoders,
            window: identification.then_some(cfg.time.window),
        };
        let records = run_sequences(&plan, cfg.seed()?, cfg.samples, cfg.threads);
        let locus = r.map_or("none".to_string(), |r| r.locus.label());
        for (i, name) in QUADRANTS.iter().enumerate() {
            groups.push(Group {
                keys: vec![("locus", locus.clone()), ("code", name.to_string())],
                series: CodeSeries::from_records(&records, i, cfg.decoders.len(), plan.shot_duration()),
            });
        }
    }
    let summary = decoding_summary(&groups, &cfg.decoders, &cfg.radiation_window());
    Ok(ScenarioRun {
        scenario: Scenario::MultiCode,
        decoders: cfg.decoders.clone(),
        identification,
        groups,
        summary,
    })
}

impl ScenarioConfig {
    /// Span of the first configured event, or the whole horizon.
    pub fn radiation_window(&self) -> (f64, f64) {
        self.radiation
            .first()
            .map_or((0.0, self.time.horizon), |r| (r.t_rad, r.t_rad + r.duration))
    }
}

fn identification_summary(groups: &[Group]) -> serde_json::Value {
    let items: Vec<_> = groups
        .iter()
        .map(|g| {
            let keys: serde_json::Map<_, _> = g.keys.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
            let last = g.series.last_detection_times();
            json!({
                "group": keys,
                "mean_detection_rate": mean(&g.series.detection_rate()),
                "median_last_detection_s": median(&last),
                "peak_affected_ratio": g.series.affected.iter().copied().fold(0.0, f64::max),
            })
        })
        .collect();
    json!({ "groups": items })
}

/// Mean of `rate` over the bins whose time falls in `[from, to)`.
pub fn mean_in_span(series: &CodeSeries, rate: &[f64], from: f64, to: f64) -> f64 {
    let v: Vec<f64> = series
        .bin_shots
        .iter()
        .zip(rate)
        .filter(|(s, _)| {
            let t = series.shot_time(**s);
            t >= from && t < to
        })
        .map(|(_, r)| *r)
        .collect();
    mean(&v)
}

fn decoding_summary(groups: &[Group], decoders: &[DecoderKind], event: &(f64, f64)) -> serde_json::Value {
    let (t0, t1) = *event;
    let items: Vec<_> = groups
        .iter()
        .map(|g| {
            let keys: serde_json::Map<_, _> = g.keys.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
            let per: serde_json::Map<_, _> = decoders
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    let rate = g.series.logical_error_rate(i);
                    (
                        d.label().to_string(),
                        json!({
                            "smoothed_peak": smoothed_peak(&rate),
                            "mean_first_third": mean_in_span(&g.series, &rate, t0, t0 + (t1 - t0) / 3.0),
                            "mean": mean(&rate),
                        }),
                    )
                })
                .collect();
            json!({ "group": keys, "decoders": per })
        })
        .collect();
    json!({ "groups": items })
}

impl ScenarioRun {
    fn key_names(&self) -> Vec<&'static str> {
        self.groups.first().map(|g| g.keys.iter().map(|(k, _)| *k).collect()).unwrap_or_default()
    }

    /// Main metrics: one row per decoded shot when decoders ran, otherwise
    /// one row per shot. Deterministic for a given config and seed.
    pub fn metrics_table(&self) -> Table {
        let keys = self.key_names();
        let mut header: Vec<String> = keys.iter().map(|k| k.to_string()).collect();
        header.extend(["shot", "time_s"].map(String::from));
        if self.identification {
            header.extend(["detection_rate", "affected_ratio", "mean_defects"].map(String::from));
        }
        header.extend(self.decoders.iter().map(|d| format!("logical_error_{}", d.label())));
        let mut t = Table::new(header);
        for g in &self.groups {
            let s = &g.series;
            let shots: Vec<usize> = if self.decoders.is_empty() {
                (0..s.detections.len()).collect()
            } else {
                s.bin_shots.clone()
            };
            let rates: Vec<Vec<f64>> = (0..self.decoders.len()).map(|i| s.logical_error_rate(i)).collect();
            for (b, &shot) in shots.iter().enumerate() {
                let mut row: Vec<String> = g.keys.iter().map(|(_, v)| v.clone()).collect();
                row.push(shot.to_string());
                row.push(num(s.shot_time(shot)));
                if self.identification {
                    row.push(num(s.detections[shot] as f64 / s.samples as f64));
                    row.push(num(s.affected[shot]));
                    row.push(num(s.mean_defects[shot]));
                }
                row.extend(rates.iter().map(|r| num(r[b])));
                t.push(row);
            }
        }
        t
    }

    /// Mean identification and decoding times per row of the metrics table.
    pub fn timings_table(&self) -> Table {
        let keys = self.key_names();
        let mut header: Vec<String> = keys.iter().map(|k| k.to_string()).collect();
        header.extend(["shot", "time_s"].map(String::from));
        if self.identification {
            header.push("rei_seconds".into());
        }
        header.extend(self.decoders.iter().map(|d| format!("decode_seconds_{}", d.label())));
        let mut t = Table::new(header);
        for g in &self.groups {
            let s = &g.series;
            let shots: Vec<usize> = if self.decoders.is_empty() {
                (0..s.detections.len()).collect()
            } else {
                s.bin_shots.clone()
            };
            for (b, &shot) in shots.iter().enumerate() {
                let mut row: Vec<String> = g.keys.iter().map(|(_, v)| v.clone()).collect();
                row.push(shot.to_string());
                row.push(num(s.shot_time(shot)));
                if self.identification {
                    row.push(num(s.rei_seconds[shot]));
                }
                row.extend((0..self.decoders.len()).map(|i| num(s.decode_seconds[i][b])));
                t.push(row);
            }
        }
        t
    }

    /// Per-sequence, per-shot identification output.
    pub fn detections_table(&self) -> Option<Table> {
        if !self.identification {
            return None;
        }
        let mut header: Vec<String> = self.key_names().iter().map(|k| k.to_string()).collect();
        header.extend(["sequence", "shot", "time_s", "detected", "x", "y", "radius"].map(String::from));
        let mut t = Table::new(header);
        for g in &self.groups {
            for (seq, log) in g.series.detection_log.iter().enumerate() {
                for (shot, det) in log.iter().enumerate() {
                    let mut row: Vec<String> = g.keys.iter().map(|(_, v)| v.clone()).collect();
                    row.push(seq.to_string());
                    row.push(shot.to_string());
                    row.push(num(g.series.shot_time(shot)));
                    match det {
                        Some((c, r)) => row.extend(["1".into(), num(c.x), num(c.y), num(*r)]),
                        None => row.extend(["0", "", "", ""].map(String::from)),
                    }
                    t.push(row);
                }
            }
        }
        Some(t)
    }

    /// Curves for the static chart.
    pub fn chart(&self) -> (String, &'static str, Vec<Series>) {
        let metrics = self.metrics_table();
        let groups = self.key_names();
        if self.decoders.is_empty() {
            let series = crate::report::series_by(&metrics, &groups, "time_s", "detection_rate");
            (format!("{}: detection rate", self.scenario.name()), "detection rate", series)
        } else {
            let mut out = Vec::new();
            for d in &self.decoders {
                let col = format!("logical_error_{}", d.label());
                for mut s in crate::report::series_by(&metrics, &groups, "time_s", &col) {
                    s.label = format!("{} {}", s.label, d.label());
                    out.push(s);
                }
            }
            (format!("{}: logical error", self.scenario.name()), "logical error rate", out)
        }
    }
}

/// Timing statistics of one distance in the overhead benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct OverheadRow {
    pub distance: usize,
    pub detectors: usize,
    pub rei_calls: usize,
    pub mwpm_calls: usize,
    pub rei_median: f64,
    pub rei_std: f64,
    pub mwpm_median: f64,
    pub mwpm_std: f64,
    /// Identification on an all-quiet window (early exit).
    pub rei_quiet_median: f64,
    /// Identification on a window with a clustered burst (full path).
    pub rei_burst_median: f64,
    pub burst_detected: bool,
}

impl OverheadRow {
    pub fn ratio(&self) -> f64 {
        self.rei_median / self.mwpm_median
    }
}

/// Wall-clock spent on matching per distance before the benchmark stops
/// issuing further matching calls (at least three are always made).
const MWPM_BUDGET_SECONDS: f64 = 8.0;

/// Times identification and matching on random syndromes of the configured
/// density, plus identification on quiet and clustered windows.
pub fn run_overhead(cfg: &ScenarioConfig) -> Result<Vec<OverheadRow>> {
    cfg.validate()?;
    let seed = cfg.seed()?;
    let mut rows = Vec::new();
    for (i, &d) in cfg.overhead.distances.iter().enumerate() {
        let (_, setup) = CodeSetup::single(d, cfg.rounds_for(d), Basis::Z, cfg.code.p.max(1e-12), None)?;
        let c = &setup.circuit;
        let n = c.detector_count();
        let k = cfg.time.window;
        let window = || SyndromeWindow::for_circuit(k, setup.rounds, c, setup.avg_min_dist).expect("window fits");
        let mut rng = sequence_rng(seed, i);
        let threshold = (cfg.overhead.density * u32::MAX as f64) as u32;
        let random = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<bool> { (0..n).map(|_| rng.next_u32() < threshold).collect() };
        let burst_centre = setup.centre;
        let burst = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<bool> {
            (0..n)
                .map(|j| c.detector_coord(j).dist(burst_centre) <= 6.0 && rng.next_u32() < u32::MAX / 2)
                .collect()
        };
        let (mut w_random, mut w_quiet, mut w_burst) = (window(), window(), window());
        let zero = vec![false; n];
        for _ in 0..k {
            w_random.push(&random(&mut rng))?;
            w_quiet.push(&zero)?;
            w_burst.push(&burst(&mut rng))?;
        }
        let mut mwpm = MwpmDecoder::prediction_only();
        let (mut rei_t, mut mwpm_t, mut quiet_t, mut burst_t) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let mut burst_detected = true;
        let mut spent = 0.0;
        for call in 0..cfg.overhead.calls {
            let random_syn = random(&mut rng);
            let t = Instant::now();
            let det = w_random.push_and_detect(&random_syn)?;
            rei_t.push(t.elapsed().as_secs_f64());
            std::hint::black_box(det);
            let t = Instant::now();
            let det = w_quiet.push_and_detect(&zero)?;
            quiet_t.push(t.elapsed().as_secs_f64());
            std::hint::black_box(det);
            let syn = burst(&mut rng);
            let t = Instant::now();
            let det = w_burst.push_and_detect(&syn)?;
            burst_t.push(t.elapsed().as_secs_f64());
            burst_detected &= det.is_some();
            if call < 3 || spent < MWPM_BUDGET_SECONDS {
                let t = Instant::now();
                let r = mwpm.decode(&setup.graph, &random_syn);
                let e = t.elapsed().as_secs_f64();
                std::hint::black_box(r);
                spent += e;
                mwpm_t.push(e);
            }
        }
        rows.push(OverheadRow {
            distance: d,
            detectors: n,
            rei_calls: rei_t.len(),
            mwpm_calls: mwpm_t.len(),
            rei_median: median(&rei_t),
            rei_std: std_dev(&rei_t),
            mwpm_median: median(&mwpm_t),
            mwpm_std: std_dev(&mwpm_t),
            rei_quiet_median: median(&quiet_t),
            rei_burst_median: median(&burst_t),
            burst_detected,
        });
    }
    Ok(rows)
}

pub fn overhead_table(rows: &[OverheadRow]) -> Table {
    let mut t = Table::new([
        "distance",
        "detectors",
        "rei_calls",
        "mwpm_calls",
        "rei_median_s",
        "rei_std_s",
        "mwpm_median_s",
        "mwpm_std_s",
        "ratio",
        "rei_quiet_median_s",
        "rei_burst_median_s",
        "burst_detected",
    ]);
    for r in rows {
        t.push(vec![
            r.distance.to_string(),
            r.detectors.to_string(),
            r.rei_calls.to_string(),
            r.mwpm_calls.to_string(),
            num(r.rei_median),
            num(r.rei_std),
            num(r.mwpm_median),
            num(r.mwpm_std),
            num(r.ratio()),
            num(r.rei_quiet_median),
            num(r.rei_burst_median),
            u8::from(r.burst_detected).to_string(),
        ]);
    }
    t
}
