//! Seeded, multi-threaded simulation of shot sequences.
//!
//! A sequence is a run of back-to-back shots starting at t = 0. Every
//! sequence owns a ChaCha8 generator seeded from the run seed with the
//! sequence index as its stream, so results do not depend on the thread
//! count or on completion order.

use std::time::Instant;

use radqec_core::frame_sim::FrameSimulator;
use radqec_core::radmatching::{InversionPolicy, RadMatcher};
use radqec_core::rei::SyndromeWindow;
use radqec_core::{decoders::MwpmDecoder, union_find_decode, Detection, QubitTimeline, RadiationEvent};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::config::DecoderKind;
use crate::setup::CodeSetup;

/// What to simulate for every sequence.
#[derive(Debug, Clone)]
pub struct SequencePlan<'a> {
    /// Codes sharing the chip and the clock.
    pub codes: &'a [CodeSetup],
    pub events: &'a [RadiationEvent],
    pub shots: usize,
    /// Decoders run on shots `0, stride, 2 * stride, ...`.
    pub stride: usize,
    pub decoders: &'a [DecoderKind],
    /// Identification window length; `None` disables identification.
    pub window: Option<usize>,
}

impl SequencePlan<'_> {
    pub fn shot_duration(&self) -> f64 {
        self.codes[0].shot_duration()
    }

    /// Indices of the decoded shots.
    pub fn bins(&self) -> impl Iterator<Item = usize> {
        (0..self.shots).step_by(self.stride)
    }

    pub fn bin_count(&self) -> usize {
        self.shots.div_ceil(self.stride)
    }

    fn needs_every_shot(&self) -> bool {
        self.window.is_some()
    }
}

/// Identification outcome of one shot.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ShotInfo {
    pub detection: Option<Detection>,
    pub affected_ratio: f64,
    pub defects: u32,
    pub rei_seconds: f64,
}

/// Decoding outcome of one binned shot.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BinInfo {
    pub shot: usize,
    /// Per decoder: prediction disagreed with the simulated flip.
    pub logical_error: Vec<bool>,
    pub decode_seconds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CodeTrack {
    /// Every shot when identification is enabled, otherwise empty.
    pub shots: Vec<ShotInfo>,
    pub bins: Vec<BinInfo>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SequenceRecord {
    pub codes: Vec<CodeTrack>,
}

/// Generator of sequence `index` under run seed `seed`.
pub fn sequence_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

struct CodeState<'a> {
    setup: &'a CodeSetup,
    sim: FrameSimulator<'a>,
    timeline: QubitTimeline,
    matcher: Option<RadMatcher>,
    mwpm: MwpmDecoder,
    track: CodeTrack,
}

pub fn run_sequence(plan: &SequencePlan<'_>, seed: u64, index: usize) -> SequenceRecord {
    let mut rng = sequence_rng(seed, index);
    let mut states: Vec<CodeState<'_>> = plan
        .codes
        .iter()
        .map(|setup| {
            let matcher = plan.window.map(|k| {
                let w = SyndromeWindow::for_circuit(k, setup.rounds, &setup.circuit, setup.avg_min_dist)
                    .expect("window fits the circuit");
                RadMatcher::with_window(w, InversionPolicy::Invert, &setup.circuit)
            });
            CodeState {
                setup,
                sim: FrameSimulator::new(&setup.circuit, setup.noise).expect("memory circuits are Clifford"),
                timeline: QubitTimeline::new(setup.circuit.qubit_count, 0.0),
                matcher,
                mwpm: MwpmDecoder::prediction_only(),
                track: CodeTrack::default(),
            }
        })
        .collect();
    let period = plan.shot_duration();
    let every = plan.needs_every_shot();
    let shots: Vec<usize> = if every { (0..plan.shots).collect() } else { plan.bins().collect() };
    for shot in shots {
        let start = shot as f64 * period;
        let decoded = shot % plan.stride == 0;
        for st in &mut states {
            if !every {
                st.timeline = QubitTimeline::before_shot(&st.setup.circuit, shot);
            }
            let result = st.sim.sample_shot(plan.events, &mut rng, start, &mut st.timeline);
            let events = &result.detection_events;
            let mut detection = None;
            if let Some(m) = st.matcher.as_mut() {
                let t = Instant::now();
                detection = m.observe(events).expect("syndrome length matches the window");
                let rei_seconds = t.elapsed().as_secs_f64();
                let affected_ratio = detection.map_or(0.0, |d| m.window().affected_ratio(&d));
                st.track.shots.push(ShotInfo {
                    detection,
                    affected_ratio,
                    defects: result.defect_count() as u32,
                    rei_seconds,
                });
            }
            if !decoded || plan.decoders.is_empty() {
                continue;
            }
            let mut bin = BinInfo {
                shot,
                ..BinInfo::default()
            };
            for &kind in plan.decoders {
                let t = Instant::now();
                let predicted = match kind {
                    DecoderKind::Mwpm => st.mwpm.decode(&st.setup.graph, events).predicted_observable_flip,
                    DecoderKind::UnionFind => union_find_decode(&st.setup.graph, events).predicted_observable_flip,
                    DecoderKind::Radmatching => {
                        let m = st.matcher.as_mut().expect("radmatching needs an identification window");
                        m.decode_with(&st.setup.graph, events, detection).result.predicted_observable_flip
                    }
                };
                bin.decode_seconds.push(t.elapsed().as_secs_f64());
                bin.logical_error.push(predicted != result.observable_flip);
            }
            st.track.bins.push(bin);
        }
    }
    SequenceRecord {
        codes: states.into_iter().map(|s| s.track).collect(),
    }
}

/// Runs `samples` sequences on `threads` workers. The output is ordered by
/// sequence index.
pub fn run_sequences(plan: &SequencePlan<'_>, seed: u64, samples: usize, threads: usize) -> Vec<SequenceRecord> {
    run_indexed(samples, threads, |i| run_sequence(plan, seed, i))
}

/// Evaluates `f(0..n)` on up to `threads` scoped workers, returning results
/// in index order.
pub fn run_indexed<T: Send, F: Fn(usize) -> T + Sync>(n: usize, threads: usize, f: F) -> Vec<T> {
    let threads = threads.clamp(1, n.max(1));
    if threads == 1 {
        return (0..n).map(&f).collect();
    }
    let mut parts: Vec<Vec<(usize, T)>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let f = &f;
                s.spawn(move || (t..n).step_by(threads).map(|i| (i, f(i))).collect::<Vec<_>>())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut all: Vec<(usize, T)> = parts.iter_mut().flat_map(std::mem::take).collect();
    all.sort_by_key(|(i, _)| *i);
    all.into_iter().map(|(_, v)| v).collect()
}

/// Number of back-to-back shots needed to cover `horizon` seconds.
pub fn shots_for(horizon: f64, shot_duration: f64) -> usize {
    // a ratio a rounding step above an integer does not add a shot
    ((horizon / shot_duration - 1e-9).ceil() as usize).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use radqec_core::{Basis, Coord};

    #[test]
    fn thread_count_does_not_change_results() {
        let (_, setup) = CodeSetup::single(3, 3, Basis::Z, 1e-3, None).unwrap();
        let ev = [RadiationEvent::new(Coord::new(3.0, 3.0), 0.0, 20e-6, 85e-6).unwrap()];
        let codes = [setup];
        let plan = SequencePlan {
            codes: &codes,
            events: &ev,
            shots: 30,
            stride: 3,
            decoders: &[DecoderKind::Mwpm, DecoderKind::Radmatching, DecoderKind::UnionFind],
            window: Some(5),
        };
        let strip = |v: Vec<SequenceRecord>| -> Vec<(Vec<Option<Detection>>, Vec<Vec<bool>>)> {
            v.into_iter()
                .map(|r| {
                    let c = &r.codes[0];
                    (c.shots.iter().map(|s| s.detection).collect(), c.bins.iter().map(|b| b.logical_error.clone()).collect())
                })
                .collect()
        };
        let a = strip(run_sequences(&plan, 9, 6, 1));
        let b = strip(run_sequences(&plan, 9, 6, 4));
        assert_eq!(a, b);
        assert_eq!(a[0].1.len(), plan.bin_count());
        assert_eq!(a[0].0.len(), 30);
        assert_ne!(a[0], a[1], "sequences use distinct streams");
    }

    #[test]
    fn sparse_runs_are_deterministic() {
        let (_, setup) = CodeSetup::single(3, 2, Basis::X, 1e-3, None).unwrap();
        let codes = [setup];
        let ev = [RadiationEvent::new(Coord::new(0.0, 0.0), 0.0, 1e-5, 85e-6).unwrap()];
        let plan = SequencePlan {
            codes: &codes,
            events: &ev,
            shots: 12,
            stride: 4,
            decoders: &[DecoderKind::Mwpm],
            window: None,
        };
        let a = run_sequence(&plan, 1, 0);
        let b = run_sequence(&plan, 1, 0);
        assert_eq!(a.codes[0].bins.len(), 3);
        assert_eq!(
            a.codes[0].bins.iter().map(|b| &b.logical_error).collect::<Vec<_>>(),
            b.codes[0].bins.iter().map(|b| &b.logical_error).collect::<Vec<_>>()
        );
    }

    #[test]
    fn shot_count_covers_horizon() {
        assert_eq!(shots_for(1.0, 0.25), 4);
        assert_eq!(shots_for(0.9, 0.25), 4);
        assert_eq!(shots_for(0.75, 0.25), 3);
        assert_eq!(shots_for(1e-9, 0.3), 1);
    }

    #[test]
    fn indexed_runner_keeps_order() {
        assert_eq!(run_indexed(7, 3, |i| i * i), vec![0, 1, 4, 9, 16, 25, 36]);
        assert_eq!(run_indexed(0, 3, |i| i), Vec::<usize>::new());
    }
}
