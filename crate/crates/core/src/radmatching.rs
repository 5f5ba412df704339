//! Radiation-aware matching: the identification window watches the defect
//! stream and, while it reports an impact, the defects inside the impact
//! radius are inverted before matching.

use alloc::vec::Vec;

use crate::circuit::ScheduledCircuit;
use crate::decoders::{DecodeResult, MwpmDecoder};
use crate::detector_graph::DetectorGraph;
use crate::geometry::Coord;
use crate::rei::{Detection, ReiError, SyndromeWindow, DEFAULT_WINDOW};

/// What to do with detectors inside a reported impact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InversionPolicy {
    /// Flip every affected detection event.
    #[default]
    Invert,
    /// Leave the syndrome untouched; identification still runs.
    Passthrough,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RadMatchConfig {
    pub window: usize,
    pub policy: InversionPolicy,
}

impl Default for RadMatchConfig {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            policy: InversionPolicy::Invert,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadMatchOutcome {
    pub result: DecodeResult,
    pub detection: Option<Detection>,
    /// Number of detection events flipped before matching.
    pub inverted: usize,
}

/// Flips `events[d]` for every detector whose position lies inside the
/// detection. Returns the number of flipped bits.
pub fn invert_affected(events: &mut [bool], detector_coords: &[Coord], detection: &Detection) -> usize {
    let mut n = 0;
    for (e, c) in events.iter_mut().zip(detector_coords) {
        if detection.contains(*c) {
            *e = !*e;
            n += 1;
        }
    }
    n
}

/// Stateful decoder for one syndrome stream.
#[derive(Debug, Clone)]
pub struct RadMatcher {
    window: SyndromeWindow,
    policy: InversionPolicy,
    decoder: MwpmDecoder,
    detector_coords: Vec<Coord>,
    scratch: Vec<bool>,
}

impl RadMatcher {
    pub fn new(config: RadMatchConfig, rounds: usize, circuit: &ScheduledCircuit, avg_min_dist: f64) -> Result<Self, ReiError> {
        let window = SyndromeWindow::for_circuit(config.window, rounds, circuit, avg_min_dist)?;
        Ok(Self::with_window(window, config.policy, circuit))
    }

    pub fn with_window(window: SyndromeWindow, policy: InversionPolicy, circuit: &ScheduledCircuit) -> Self {
        Self {
            window,
            policy,
            decoder: MwpmDecoder::prediction_only(),
            detector_coords: (0..circuit.detector_count()).map(|d| circuit.detector_coord(d)).collect(),
            scratch: Vec::new(),
        }
    }

    /// Also expand matched paths into graph-edge corrections.
    pub fn with_corrections(mut self) -> Self {
        self.decoder = MwpmDecoder::new();
        self
    }

    pub fn window(&self) -> &SyndromeWindow {
        &self.window
    }

    /// Feeds one shot's detection events into the window and decodes them.
    /// The window stores the events as measured, never the inverted copy.
    pub fn decode(&mut self, graph: &DetectorGraph, events: &[bool]) -> Result<RadMatchOutcome, ReiError> {
        let detection = self.window.push_and_detect(events)?;
        Ok(self.decode_with(graph, events, detection))
    }

    /// Decodes with a detection already computed by the caller.
    pub fn decode_with(&mut self, graph: &DetectorGraph, events: &[bool], detection: Option<Detection>) -> RadMatchOutcome {
        let mut inverted = 0;
        let result = match (detection, self.policy) {
            (Some(det), InversionPolicy::Invert) => {
                self.scratch.clear();
                self.scratch.extend_from_slice(events);
                inverted = invert_affected(&mut self.scratch, &self.detector_coords, &det);
                self.decoder.decode(graph, &self.scratch)
            }
            _ => self.decoder.decode(graph, events),
        };
        RadMatchOutcome {
            result,
            detection,
            inverted,
        }
    }

    /// Pushes into the window without decoding (used to warm up a stream).
    pub fn observe(&mut self, events: &[bool]) -> Result<Option<Detection>, ReiError> {
        self.window.push_and_detect(events)
    }
}

/// One radiation-aware decode against an external window.
pub fn radmatch_decode(
    graph: &DetectorGraph,
    window: &mut SyndromeWindow,
    circuit: &ScheduledCircuit,
    events: &[bool],
) -> Result<DecodeResult, ReiError> {
    let detection = window.push_and_detect(events)?;
    let mut decoder = MwpmDecoder::new();
    Ok(match detection {
        Some(det) => {
            let coords: Vec<Coord> = (0..circuit.detector_count()).map(|d| circuit.detector_coord(d)).collect();
            let mut flipped = events.to_vec();
            invert_affected(&mut flipped, &coords, &det);
            decoder.decode(graph, &flipped)
        }
        None => decoder.decode(graph, events),
    })
}
