//! Time-annotated Clifford circuits with measurement records, detectors and
//! one logical observable.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::chip::{Chip, Mapping};
use crate::geometry::Coord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    X,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    Reset,
    Hadamard,
    Cnot,
    Measure,
    MeasureReset,
    /// Non-Clifford; accepted by the text format, rejected by both simulators.
    T,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot => 2,
            _ => 1,
        }
    }

    pub fn is_clifford(self) -> bool {
        !matches!(self, GateKind::T)
    }

    pub fn produces_record(self) -> bool {
        matches!(self, GateKind::Measure | GateKind::MeasureReset)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Reset => "R",
            GateKind::Hadamard => "H",
            GateKind::Cnot => "CX",
            GateKind::Measure => "M",
            GateKind::MeasureReset => "MR",
            GateKind::T => "T",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "R" => GateKind::Reset,
            "H" => GateKind::Hadamard,
            "CX" => GateKind::Cnot,
            "M" => GateKind::Measure,
            "MR" => GateKind::MeasureReset,
            "T" => GateKind::T,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Op {
    pub kind: GateKind,
    qubits: [usize; 2],
    pub start: f64,
    pub duration: f64,
}

impl Op {
    pub fn single(kind: GateKind, qubit: usize, start: f64, duration: f64) -> Self {
        debug_assert_eq!(kind.arity(), 1);
        Self {
            kind,
            qubits: [qubit, usize::MAX],
            start,
            duration,
        }
    }

    pub fn cnot(control: usize, target: usize, start: f64, duration: f64) -> Self {
        Self {
            kind: GateKind::Cnot,
            qubits: [control, target],
            start,
            duration,
        }
    }

    pub fn targets(&self) -> &[usize] {
        &self.qubits[..self.kind.arity()]
    }

    pub fn end(&self) -> f64 {
        self.start + self.duration
    }
}

/// A parity of measurement records that is deterministic without noise.
#[derive(Debug, Clone, PartialEq)]
pub struct Detector {
    pub records: Vec<usize>,
    /// Circuit qubit whose measurements this detector compares.
    pub host: usize,
    pub round: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error("op {op} references qubit {qubit} outside the circuit")]
    QubitOutOfRange { op: usize, qubit: usize },
    #[error("op {op} overlaps an earlier op on qubit {qubit}")]
    Overlap { op: usize, qubit: usize },
    #[error("op {op} starts before op {prev}")]
    Unordered { op: usize, prev: usize },
    #[error("record index {record} out of range")]
    RecordOutOfRange { record: usize },
    #[error("op {op} has non-positive duration or negative start")]
    BadTiming { op: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledCircuit {
    pub qubit_count: usize,
    /// Planar position of each circuit qubit; chip coordinates once placed.
    pub qubit_coords: Vec<Coord>,
    pub ops: Vec<Op>,
    pub detectors: Vec<Detector>,
    pub observable: Vec<usize>,
    pub total_duration: f64,
}

const TIME_EPS: f64 = 1e-15;

impl ScheduledCircuit {
    pub fn measurement_count(&self) -> usize {
        self.ops.iter().filter(|o| o.kind.produces_record()).count()
    }

    /// Qubit measured by each record, in record order.
    pub fn record_qubits(&self) -> Vec<usize> {
        self.ops
            .iter()
            .filter(|o| o.kind.produces_record())
            .map(|o| o.targets()[0])
            .collect()
    }

    pub fn detector_count(&self) -> usize {
        self.detectors.len()
    }

    /// Structural checks: ops sorted by start, no qubit in two overlapping
    /// ops, records in range.
    pub fn validate(&self) -> Result<(), CircuitError> {
        let mut busy_until = vec![f64::NEG_INFINITY; self.qubit_count];
        for (i, op) in self.ops.iter().enumerate() {
            if !(op.duration > 0.0) || op.start < 0.0 {
                return Err(CircuitError::BadTiming { op: i });
            }
            if i > 0 && op.start + TIME_EPS < self.ops[i - 1].start {
                return Err(CircuitError::Unordered { op: i, prev: i - 1 });
            }
            for &q in op.targets() {
                if q >= self.qubit_count {
                    return Err(CircuitError::QubitOutOfRange { op: i, qubit: q });
                }
                if op.start + TIME_EPS < busy_until[q] {
                    return Err(CircuitError::Overlap { op: i, qubit: q });
                }
                busy_until[q] = op.end();
            }
        }
        let records = self.measurement_count();
        let all_records = self
            .detectors
            .iter()
            .flat_map(|d| d.records.iter())
            .chain(self.observable.iter());
        for &r in all_records {
            if r >= records {
                return Err(CircuitError::RecordOutOfRange { record: r });
            }
        }
        Ok(())
    }

    /// Copy with qubit coordinates taken from the chip positions the mapping
    /// assigns.
    pub fn placed(&self, chip: &Chip, mapping: &Mapping) -> ScheduledCircuit {
        let mut out = self.clone();
        out.qubit_coords = (0..self.qubit_count)
            .map(|q| chip.coord(mapping.get(q)))
            .collect();
        out
    }

    /// Copy with coordinates shifted by a constant offset.
    pub fn translated(&self, offset: Coord) -> ScheduledCircuit {
        let mut out = self.clone();
        for c in &mut out.qubit_coords {
            *c = *c + offset;
        }
        out
    }

    /// End time of each qubit's last op within one shot (0 when idle).
    pub fn last_op_end(&self) -> Vec<f64> {
        let mut last = vec![0.0; self.qubit_count];
        for op in &self.ops {
            for &q in op.targets() {
                last[q] = op.end();
            }
        }
        last
    }

    pub fn detector_coord(&self, detector: usize) -> Coord {
        self.qubit_coords[self.detectors[detector].host]
    }
}
