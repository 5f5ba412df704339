//! Pauli-frame sampling of scheduled circuits under intrinsic and radiation
//! noise.
//!
//! A shot is produced in two passes: [`ErrorSampler`] draws an [`ErrorTape`]
//! (which Pauli hits which qubit around which op), then [`FrameSimulator`]
//! propagates the tape through the circuit. Splitting the passes lets the
//! tableau oracle replay exactly the same errors.
//!
//! Measurements whose noiseless outcome is random carry no information in a
//! frame. At each such measurement the frame is multiplied by the stabiliser
//! generator that anticommutes with it (taken from a noiseless tableau run)
//! whenever the frame would flip it, so reported record flips agree with a
//! tableau simulation that shares random-outcome coins.

use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;
use thiserror::Error;

use crate::circuit::{GateKind, ScheduledCircuit};
use crate::noise::{
    channels_for, fault_probability, outcome_paulis, GateClass, NoiseParams, Placement,
    RadiationEvent,
};
use crate::pauli::Pauli;
use crate::tableau::Tableau;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("op {op} is not a Clifford gate")]
    NonClifford { op: usize },
    #[error("tape entry references op {op} outside the circuit")]
    BadTape { op: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShotResult {
    pub detection_events: Vec<bool>,
    /// Per record: outcome XOR noiseless reference outcome.
    pub raw_measurements: Vec<bool>,
    pub observable_flip: bool,
    pub shot_start: f64,
}

impl ShotResult {
    pub fn defect_count(&self) -> usize {
        self.detection_events.iter().filter(|b| **b).count()
    }
}

/// Wall-clock end of each qubit's most recent op. Persists across the shots
/// of one time series.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitTimeline {
    last_end: Vec<f64>,
}

impl QubitTimeline {
    pub fn new(qubits: usize, start: f64) -> Self {
        Self {
            last_end: vec![start; qubits],
        }
    }

    /// Timeline as it stands when shot `shot` (0-based) of a back-to-back
    /// series begins: shot `k` starts at `k * total_duration`.
    pub fn before_shot(circuit: &ScheduledCircuit, shot: usize) -> Self {
        if shot == 0 {
            return Self::new(circuit.qubit_count, 0.0);
        }
        // same arithmetic as the sampler so the values agree bit for bit
        let base = (shot - 1) as f64 * circuit.total_duration;
        let mut last_end = vec![base; circuit.qubit_count];
        for op in &circuit.ops {
            for &q in op.targets() {
                last_end[q] = base + op.start + op.duration;
            }
        }
        Self { last_end }
    }

    pub fn last_end(&self, qubit: usize) -> f64 {
        self.last_end[qubit]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.last_end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TapeEntry {
    pub op: u32,
    pub placement: Placement,
    pub qubit: u32,
    pub pauli: Pauli,
}

/// Errors of one shot, ordered by op then placement.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ErrorTape {
    entries: Vec<TapeEntry>,
}

impl ErrorTape {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a tape from arbitrary entries; they are sorted stably.
    pub fn from_entries(mut entries: Vec<TapeEntry>) -> Self {
        entries.sort_by_key(|e| (e.op, e.placement));
        Self { entries }
    }

    pub fn entries(&self) -> &[TapeEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn push(&mut self, op: usize, placement: Placement, qubit: usize, pauli: Pauli) {
        if !pauli.is_identity() {
            self.entries.push(TapeEntry {
                op: op as u32,
                placement,
                qubit: qubit as u32,
                pauli,
            });
        }
    }
}

#[inline]
pub(crate) fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Draws error tapes for one circuit.
#[derive(Debug, Clone)]
pub struct ErrorSampler<'c> {
    circuit: &'c ScheduledCircuit,
    noise: NoiseParams,
}

impl<'c> ErrorSampler<'c> {
    pub fn new(circuit: &'c ScheduledCircuit, noise: NoiseParams) -> Self {
        Self { circuit, noise }
    }

    /// Samples one shot's errors starting at wall-clock `shot_start`.
    /// Radiation: before each op, each operand qubit suffers a Y with the
    /// fault probability of every active event, with the idle gap measured
    /// from the qubit's previous op (possibly in the previous shot).
    pub fn sample_tape<R: RngCore>(
        &self,
        events: &[RadiationEvent],
        rng: &mut R,
        shot_start: f64,
        timeline: &mut QubitTimeline,
    ) -> ErrorTape {
        let c = self.circuit;
        let p = self.noise.p();
        let distances: Vec<Vec<f64>> = events
            .iter()
            .map(|e| c.qubit_coords.iter().map(|q| q.dist(e.center)).collect())
            .collect();
        let shot_end = shot_start + c.total_duration;
        let any_event = events
            .iter()
            .any(|e| e.t_rad <= shot_end && e.end() >= shot_start);
        let mut tape = ErrorTape::new();
        for (i, op) in c.ops.iter().enumerate() {
            let now = shot_start + op.start;
            let targets = op.targets();
            if any_event {
                for &q in targets {
                    let idle = (now - timeline.last_end[q]).max(0.0);
                    for (e, event) in events.iter().enumerate() {
                        if !event.is_active(now) {
                            continue;
                        }
                        let prob = fault_probability(distances[e][q], idle, now, event)
                            .expect("distances and idle gaps are non-negative");
                        if prob > 0.0 && unit_f64(rng) < prob {
                            tape.push(i, Placement::Before, q, Pauli::Y);
                        }
                    }
                }
            }
            for &q in targets {
                timeline.last_end[q] = now + op.duration;
            }
            if p == 0.0 {
                continue;
            }
            for &(class, placement) in channels_for(op.kind) {
                sample_intrinsic(&mut tape, rng, i, placement, class, p, targets);
            }
        }
        // Radiation entries were pushed ahead of intrinsic ones per op; keep
        // the (op, placement) order required by the replayers.
        tape.entries.sort_by_key(|e| (e.op, e.placement));
        tape
    }
}

fn sample_intrinsic(
    tape: &mut ErrorTape,
    rng: &mut impl RngCore,
    op: usize,
    placement: Placement,
    class: GateClass,
    p: f64,
    targets: &[usize],
) {
    let mass = class.error_mass(p);
    let k = class.outcomes();
    let mut draw = |tape: &mut ErrorTape, qs: &[usize]| {
        let u = unit_f64(rng);
        if u < mass {
            let idx = ((u / mass * k as f64) as usize).min(k - 1);
            let ps = outcome_paulis(class, idx);
            for (j, &q) in qs.iter().enumerate() {
                tape.push(op, placement, q, ps[j]);
            }
        }
    };
    if class.arity() == 2 {
        draw(tape, targets);
    } else {
        for q in targets {
            draw(tape, core::slice::from_ref(q));
        }
    }
}

/// Detector and observable parities of a record-flip vector.
pub fn detectors_from_flips(circuit: &ScheduledCircuit, flips: &[bool]) -> (Vec<bool>, bool) {
    let dets = circuit
        .detectors
        .iter()
        .map(|d| d.records.iter().fold(false, |acc, &r| acc ^ flips[r]))
        .collect();
    let obs = circuit.observable.iter().fold(false, |acc, &r| acc ^ flips[r]);
    (dets, obs)
}

/// Sparse Pauli applied to the frame at a random measurement.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Canonicaliser {
    support: Vec<(usize, Pauli)>,
}

/// Frame propagation engine for one circuit.
#[derive(Debug, Clone)]
pub struct FrameSimulator<'c> {
    circuit: &'c ScheduledCircuit,
    noise: NoiseParams,
    /// Per op: canonicalising Pauli for a random measurement (or the
    /// measurement inside a reset).
    canon: Vec<Option<Canonicaliser>>,
}

impl<'c> FrameSimulator<'c> {
    pub fn new(circuit: &'c ScheduledCircuit, noise: NoiseParams) -> Result<Self, SimError> {
        if let Some(i) = circuit.ops.iter().position(|o| !o.kind.is_clifford()) {
            return Err(SimError::NonClifford { op: i });
        }
        let mut tab = Tableau::new(circuit.qubit_count);
        let mut canon = vec![None; circuit.ops.len()];
        for (i, op) in circuit.ops.iter().enumerate() {
            let t = op.targets();
            match op.kind {
                GateKind::Hadamard => tab.hadamard(t[0]),
                GateKind::Cnot => tab.cnot(t[0], t[1]),
                GateKind::Measure | GateKind::MeasureReset | GateKind::Reset => {
                    let out = if op.kind == GateKind::Reset {
                        tab.reset(t[0], || false)
                    } else {
                        tab.measure(t[0], || false)
                    };
                    canon[i] = out.anticommuting.map(|p| Canonicaliser { support: p.support() });
                    if op.kind == GateKind::MeasureReset {
                        tab.reset(t[0], || false);
                    }
                }
                GateKind::T => unreachable!(),
            }
        }
        Ok(Self {
            circuit,
            noise,
            canon,
        })
    }

    pub fn circuit(&self) -> &ScheduledCircuit {
        self.circuit
    }

    pub fn noise(&self) -> NoiseParams {
        self.noise
    }

    pub fn sampler(&self) -> ErrorSampler<'c> {
        ErrorSampler::new(self.circuit, self.noise)
    }

    /// Samples and simulates one shot of a time series.
    pub fn sample_shot<R: RngCore>(
        &self,
        events: &[RadiationEvent],
        rng: &mut R,
        shot_start: f64,
        timeline: &mut QubitTimeline,
    ) -> ShotResult {
        let tape = self.sampler().sample_tape(events, rng, shot_start, timeline);
        self.run_tape(&tape, shot_start)
    }

    pub fn run_tape(&self, tape: &ErrorTape, shot_start: f64) -> ShotResult {
        let c = self.circuit;
        let n = c.qubit_count;
        let mut fx = vec![false; n];
        let mut fz = vec![false; n];
        let mut flips = Vec::with_capacity(c.measurement_count());
        let entries = tape.entries();
        let mut cursor = 0usize;
        let apply = |fx: &mut [bool], fz: &mut [bool], q: usize, p: Pauli| {
            fx[q] ^= p.x_bit();
            fz[q] ^= p.z_bit();
        };
        for (i, op) in c.ops.iter().enumerate() {
            while cursor < entries.len()
                && entries[cursor].op as usize == i
                && entries[cursor].placement == Placement::Before
            {
                let e = entries[cursor];
                apply(&mut fx, &mut fz, e.qubit as usize, e.pauli);
                cursor += 1;
            }
            let t = op.targets();
            match op.kind {
                GateKind::Hadamard => core::mem::swap(&mut fx[t[0]], &mut fz[t[0]]),
                GateKind::Cnot => {
                    let (a, b) = (t[0], t[1]);
                    fx[b] ^= fx[a];
                    fz[a] ^= fz[b];
                }
                GateKind::Measure | GateKind::MeasureReset | GateKind::Reset => {
                    let q = t[0];
                    let mut flip = fx[q];
                    if let Some(canon) = &self.canon[i] {
                        if flip {
                            for &(r, p) in &canon.support {
                                apply(&mut fx, &mut fz, r, p);
                            }
                            flip = false;
                        }
                    }
                    if op.kind.produces_record() {
                        flips.push(flip);
                    }
                    if op.kind != GateKind::Measure {
                        fx[q] = false;
                        fz[q] = false;
                    }
                }
                GateKind::T => unreachable!(),
            }
            while cursor < entries.len() && entries[cursor].op as usize == i {
                let e = entries[cursor];
                apply(&mut fx, &mut fz, e.qubit as usize, e.pauli);
                cursor += 1;
            }
        }
        let (detection_events, observable_flip) = detectors_from_flips(c, &flips);
        ShotResult {
            detection_events,
            raw_measurements: flips,
            observable_flip,
            shot_start,
        }
    }
}

/// One standalone shot: fresh timeline anchored at `shot_start`, RNG seeded
/// from `seed`.
pub fn sample_shot<R: RngCore>(
    circuit: &ScheduledCircuit,
    noise: &NoiseParams,
    events: &[RadiationEvent],
    rng: &mut R,
    shot_start: f64,
) -> Result<ShotResult, SimError> {
    let sim = FrameSimulator::new(circuit, *noise)?;
    let mut timeline = QubitTimeline::new(circuit.qubit_count, shot_start);
    Ok(sim.sample_shot(events, rng, shot_start, &mut timeline))
}
