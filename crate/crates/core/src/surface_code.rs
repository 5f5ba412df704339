//! Rotated surface code layout and its scheduled memory-experiment circuit.
//!
//! Local coordinates: data qubit `(row i, col j)` sits at `(2j + 1, 2i + 1)`,
//! plaquette `(a, b)` at `(2a, 2b)` with `a, b in 0..=d`. Interior plaquettes
//! alternate X/Z in a checkerboard (`a + b` even is X). Weight-2 X plaquettes
//! live on the top and bottom edges, weight-2 Z plaquettes on the left and
//! right edges. The logical Z is a row of data qubits, the logical X a column.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::chip::{map_circuit, Chip, ChipError, GateTimings, InteractionGraph, Mapping};
use crate::circuit::{Basis, Detector, GateKind, Op, ScheduledCircuit};
use crate::geometry::Coord;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodeError {
    #[error("distance must be odd and at least 3, got {0}")]
    BadDistance(usize),
    #[error("at least one round is required")]
    NoRounds,
    #[error("code {code} qubit {node} has no chip qubit or coupler at its placement")]
    OutOfBounds { code: usize, node: usize },
    #[error("codes {a} and {b} overlap on chip qubit {qubit}")]
    Overlap { a: usize, b: usize, qubit: usize },
    #[error(transparent)]
    Chip(#[from] ChipError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stabiliser {
    /// Code qubit index of the measuring ancilla.
    pub ancilla: usize,
    pub kind: Basis,
    pub coord: Coord,
    /// Data qubits in CNOT order; `None` where the plaquette is cut by the
    /// boundary.
    pub schedule: [Option<usize>; 4],
}

impl Stabiliser {
    pub fn data(&self) -> impl Iterator<Item = usize> + '_ {
        self.schedule.iter().flatten().copied()
    }

    pub fn weight(&self) -> usize {
        self.schedule.iter().flatten().count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodeLayout {
    pub distance: usize,
    pub basis: Basis,
    /// Local coordinate of every code qubit; data qubits come first.
    pub coords: Vec<Coord>,
    pub x_stabs: Vec<Stabiliser>,
    pub z_stabs: Vec<Stabiliser>,
    pub observable_support: Vec<usize>,
}

// Hook-safe CNOT orders: the last two data qubits of an X check form a
// horizontal pair, of a Z check a vertical pair, i.e. perpendicular to the
// logical operator of the same type.
const X_ORDER: [(i64, i64); 4] = [(-1, -1), (1, -1), (-1, 1), (1, 1)];
const Z_ORDER: [(i64, i64); 4] = [(-1, -1), (-1, 1), (1, -1), (1, 1)];

impl CodeLayout {
    pub fn new(distance: usize, basis: Basis) -> Result<Self, CodeError> {
        if distance < 3 || distance.is_multiple_of(2) {
            return Err(CodeError::BadDistance(distance));
        }
        let d = distance as i64;
        let mut coords: Vec<Coord> = Vec::with_capacity(2 * distance * distance - 1);
        for i in 0..d {
            for j in 0..d {
                coords.push(Coord::new((2 * j + 1) as f64, (2 * i + 1) as f64));
            }
        }
        let data_at = |x: i64, y: i64| -> Option<usize> {
            if x <= 0 || y <= 0 || x >= 2 * d || y >= 2 * d || x % 2 == 0 || y % 2 == 0 {
                return None;
            }
            Some(((y - 1) / 2 * d + (x - 1) / 2) as usize)
        };
        let mut x_stabs = Vec::new();
        let mut z_stabs = Vec::new();
        for b in 0..=d {
            for a in 0..=d {
                let kind = if (a + b) % 2 == 0 { Basis::X } else { Basis::Z };
                let on_tb = b == 0 || b == d;
                let on_lr = a == 0 || a == d;
                let keep = match (on_tb, on_lr) {
                    (false, false) => true,
                    (true, false) => kind == Basis::X,
                    (false, true) => kind == Basis::Z,
                    (true, true) => false,
                };
                if !keep {
                    continue;
                }
                let (cx, cy) = (2 * a, 2 * b);
                let order = if kind == Basis::X { X_ORDER } else { Z_ORDER };
                let schedule = order.map(|(dx, dy)| data_at(cx + dx, cy + dy));
                let stab = Stabiliser {
                    ancilla: coords.len(),
                    kind,
                    coord: Coord::new(cx as f64, cy as f64),
                    schedule,
                };
                coords.push(stab.coord);
                match kind {
                    Basis::X => x_stabs.push(stab),
                    Basis::Z => z_stabs.push(stab),
                }
            }
        }
        let observable_support = match basis {
            Basis::Z => (0..distance).collect(),
            Basis::X => (0..distance).map(|i| i * distance).collect(),
        };
        Ok(Self {
            distance,
            basis,
            coords,
            x_stabs,
            z_stabs,
            observable_support,
        })
    }

    pub fn data_count(&self) -> usize {
        self.distance * self.distance
    }

    pub fn qubit_count(&self) -> usize {
        self.coords.len()
    }

    pub fn data(&self) -> core::ops::Range<usize> {
        0..self.data_count()
    }

    /// Stabilisers whose outcomes are deterministic in this memory basis.
    pub fn basis_stabs(&self) -> &[Stabiliser] {
        match self.basis {
            Basis::X => &self.x_stabs,
            Basis::Z => &self.z_stabs,
        }
    }

    /// All stabilisers sorted by ancilla index.
    pub fn stabilisers(&self) -> Vec<&Stabiliser> {
        let mut all: Vec<&Stabiliser> = self.x_stabs.iter().chain(self.z_stabs.iter()).collect();
        all.sort_by_key(|s| s.ancilla);
        all
    }

    /// Every data-ancilla coupling the circuit requires.
    pub fn interaction_graph(&self) -> InteractionGraph {
        let edges = self
            .x_stabs
            .iter()
            .chain(self.z_stabs.iter())
            .flat_map(|s| s.data().map(move |q| (s.ancilla, q)));
        InteractionGraph::new(self.qubit_count(), edges)
    }

    /// Geometric centre of the patch in local coordinates.
    pub fn centre(&self) -> Coord {
        let d = self.distance as f64;
        Coord::new(d, d)
    }
}

/// Builds the layout and scheduled memory experiment with default timings.
pub fn build_rotated_surface_code(
    distance: usize,
    rounds: usize,
    basis: Basis,
) -> Result<(CodeLayout, ScheduledCircuit), CodeError> {
    build_rotated_surface_code_with_timings(distance, rounds, basis, &GateTimings::default())
}

/// Resets, `rounds` stabiliser cycles (R, H, 4 x CX, H, M on the ancillas),
/// then a transversal data readout in the memory basis. Every layer starts
/// when the previous one finishes.
pub fn build_rotated_surface_code_with_timings(
    distance: usize,
    rounds: usize,
    basis: Basis,
    timing: &GateTimings,
) -> Result<(CodeLayout, ScheduledCircuit), CodeError> {
    let layout = CodeLayout::new(distance, basis)?;
    if rounds == 0 {
        return Err(CodeError::NoRounds);
    }
    let stabs = layout.stabilisers();
    let data: Vec<usize> = layout.data().collect();
    let mut ops = Vec::new();
    let mut t = 0.0f64;
    let mut records = 0usize;
    // measurement record of each ancilla per round
    let mut anc_records = vec![vec![0usize; rounds]; layout.qubit_count()];

    for round in 0..rounds {
        // resets
        if round == 0 {
            for &q in &data {
                ops.push(Op::single(GateKind::Reset, q, t, timing.reset));
            }
        }
        for s in &stabs {
            ops.push(Op::single(GateKind::Reset, s.ancilla, t, timing.reset));
        }
        t += timing.reset;
        // basis change
        if round == 0 && basis == Basis::X {
            for &q in &data {
                ops.push(Op::single(GateKind::Hadamard, q, t, timing.single_qubit));
            }
        }
        for s in stabs.iter().filter(|s| s.kind == Basis::X) {
            ops.push(Op::single(GateKind::Hadamard, s.ancilla, t, timing.single_qubit));
        }
        t += timing.single_qubit;
        for step in 0..4 {
            for s in &stabs {
                if let Some(q) = s.schedule[step] {
                    let op = match s.kind {
                        Basis::X => Op::cnot(s.ancilla, q, t, timing.two_qubit),
                        Basis::Z => Op::cnot(q, s.ancilla, t, timing.two_qubit),
                    };
                    ops.push(op);
                }
            }
            t += timing.two_qubit;
        }
        for s in stabs.iter().filter(|s| s.kind == Basis::X) {
            ops.push(Op::single(GateKind::Hadamard, s.ancilla, t, timing.single_qubit));
        }
        t += timing.single_qubit;
        for s in &stabs {
            ops.push(Op::single(GateKind::Measure, s.ancilla, t, timing.measure));
            anc_records[s.ancilla][round] = records;
            records += 1;
        }
        t += timing.measure;
    }
    if basis == Basis::X {
        for &q in &data {
            ops.push(Op::single(GateKind::Hadamard, q, t, timing.single_qubit));
        }
        t += timing.single_qubit;
    }
    let mut data_records = vec![0usize; data.len()];
    for &q in &data {
        ops.push(Op::single(GateKind::Measure, q, t, timing.measure));
        data_records[q] = records;
        records += 1;
    }
    t += timing.measure;

    let mut detectors = Vec::new();
    for round in 0..=rounds {
        for s in layout.basis_stabs() {
            let recs = &anc_records[s.ancilla];
            let records = if round == 0 {
                vec![recs[0]]
            } else if round < rounds {
                vec![recs[round], recs[round - 1]]
            } else {
                let mut r = vec![recs[rounds - 1]];
                r.extend(s.data().map(|q| data_records[q]));
                r
            };
            detectors.push(Detector {
                records,
                host: s.ancilla,
                round,
            });
        }
    }
    let observable = layout
        .observable_support
        .iter()
        .map(|&q| data_records[q])
        .collect();
    let circuit = ScheduledCircuit {
        qubit_count: layout.qubit_count(),
        qubit_coords: layout.coords.clone(),
        ops,
        detectors,
        observable,
        total_duration: t,
    };
    debug_assert!(circuit.validate().is_ok());
    Ok((layout, circuit))
}

/// Detector indices hosted by each circuit qubit.
pub fn qubit_to_stabilisers(layout: &CodeLayout, circuit: &ScheduledCircuit) -> Vec<Vec<usize>> {
    let mut map = vec![Vec::new(); layout.qubit_count().max(circuit.qubit_count)];
    for (i, det) in circuit.detectors.iter().enumerate() {
        map[det.host].push(i);
    }
    map
}

/// Places the code by translating its local coordinates by `offset`. Fails if
/// any qubit or required coupler is missing on the chip.
pub fn place_code_at(
    chip: &Chip,
    layout: &CodeLayout,
    offset: Coord,
) -> Result<Mapping, CodeError> {
    place_indexed(chip, layout, offset, 0)
}

fn place_indexed(
    chip: &Chip,
    layout: &CodeLayout,
    offset: Coord,
    code: usize,
) -> Result<Mapping, CodeError> {
    let images = layout
        .coords
        .iter()
        .enumerate()
        .map(|(node, c)| {
            chip.qubit_at(*c + offset)
                .ok_or(CodeError::OutOfBounds { code, node })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mapping = Mapping::from_images(images);
    let graph = layout.interaction_graph();
    for &(a, b) in graph.edges() {
        if !chip.has_coupler(mapping.get(a), mapping.get(b)) {
            return Err(CodeError::OutOfBounds { code, node: a });
        }
    }
    Ok(mapping)
}

/// Maps a code onto the chip: the affine placement at the origin first, then
/// the general subgraph search.
pub fn map_code(chip: &Chip, layout: &CodeLayout) -> Result<Mapping, CodeError> {
    match place_code_at(chip, layout, Coord::default()) {
        Ok(m) => Ok(m),
        Err(_) => Ok(map_circuit(chip, &layout.interaction_graph())?),
    }
}

/// Places `offsets.len()` independent copies of a distance-`d` code.
pub fn multi_code_embed(
    chip: &Chip,
    distance: usize,
    basis: Basis,
    offsets: &[Coord],
) -> Result<Vec<(CodeLayout, Mapping)>, CodeError> {
    let mut owner = vec![usize::MAX; chip.qubit_count()];
    let mut out = Vec::with_capacity(offsets.len());
    for (code, &offset) in offsets.iter().enumerate() {
        let layout = CodeLayout::new(distance, basis)?;
        let mapping = place_indexed(chip, &layout, offset, code)?;
        for &q in mapping.images() {
            if owner[q] != usize::MAX {
                return Err(CodeError::Overlap {
                    a: owner[q],
                    b: code,
                    qubit: q,
                });
            }
            owner[q] = code;
        }
        out.push((layout, mapping));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chip::build_grid_chip;

    #[test]
    fn qubit_counts() {
        for d in [3, 5, 7, 9] {
            let layout = CodeLayout::new(d, Basis::Z).unwrap();
            assert_eq!(layout.data_count(), d * d);
            assert_eq!(layout.x_stabs.len() + layout.z_stabs.len(), d * d - 1);
            assert_eq!(layout.x_stabs.len(), layout.z_stabs.len());
            assert_eq!(layout.qubit_count(), 2 * d * d - 1);
        }
    }

    #[test]
    fn bad_distances_rejected() {
        for d in [0, 1, 2, 4, 6] {
            assert_eq!(CodeLayout::new(d, Basis::Z), Err(CodeError::BadDistance(d)));
        }
        assert_eq!(
            build_rotated_surface_code(3, 0, Basis::Z).unwrap_err(),
            CodeError::NoRounds
        );
    }

    #[test]
    fn weight_two_only_on_boundary() {
        let layout = CodeLayout::new(5, Basis::Z).unwrap();
        for s in layout.x_stabs.iter().chain(&layout.z_stabs) {
            let on_edge = s.coord.x == 0.0 || s.coord.y == 0.0 || s.coord.x == 10.0 || s.coord.y == 10.0;
            assert_eq!(s.weight() == 2, on_edge);
            assert!(s.weight() == 2 || s.weight() == 4);
        }
    }

    #[test]
    fn stabilisers_commute() {
        let layout = CodeLayout::new(7, Basis::Z).unwrap();
        for x in &layout.x_stabs {
            for z in &layout.z_stabs {
                let shared = x.data().filter(|q| z.data().any(|p| p == *q)).count();
                assert_eq!(shared % 2, 0);
            }
        }
    }

    #[test]
    fn detector_count_and_hosts() {
        for (d, r) in [(3, 1), (3, 3), (5, 5)] {
            let (layout, circuit) = build_rotated_surface_code(d, r, Basis::Z).unwrap();
            assert_eq!(circuit.detector_count(), (d * d - 1) / 2 * (r + 1));
            let map = qubit_to_stabilisers(&layout, &circuit);
            for s in &layout.z_stabs {
                assert_eq!(map[s.ancilla].len(), r + 1);
            }
            for q in layout.data() {
                assert!(map[q].is_empty());
            }
            for s in &layout.x_stabs {
                assert!(map[s.ancilla].is_empty());
            }
            let mut all: Vec<usize> = map.iter().flatten().copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..circuit.detector_count()).collect::<Vec<_>>());
        }
    }

    /// Replays the ops on a per-qubit clock, checking no qubit starts an op
    /// before its previous one ended, and returns the last end time.
    fn timeline_duration(circuit: &ScheduledCircuit) -> f64 {
        let mut ready = vec![0.0f64; circuit.qubit_count];
        for op in &circuit.ops {
            for &q in op.targets() {
                assert!(op.start + 1e-15 >= ready[q]);
                ready[q] = op.start + op.duration;
            }
        }
        ready.into_iter().fold(0.0, f64::max)
    }

    #[test]
    fn duration_matches_critical_path_and_timeline() {
        let t = GateTimings::default();
        for basis in [Basis::Z, Basis::X] {
            for r in [1, 3, 5] {
                let (_, circuit) = build_rotated_surface_code(5, r, basis).unwrap();
                let cycle = t.reset + 2.0 * t.single_qubit + 4.0 * t.two_qubit + t.measure;
                let readout = t.measure + if basis == Basis::X { t.single_qubit } else { 0.0 };
                let hand = r as f64 * cycle + readout;
                assert!((circuit.total_duration - hand).abs() < 1e-15);
                assert!((timeline_duration(&circuit) - hand).abs() < 1e-15);
                circuit.validate().unwrap();
            }
        }
    }

    #[test]
    fn grid_chip_hosts_code_by_affine_placement() {
        let chip = build_grid_chip(5, 5);
        let layout = CodeLayout::new(5, Basis::Z).unwrap();
        let m = place_code_at(&chip, &layout, Coord::default()).unwrap();
        assert!(m.is_valid_for(&chip, &layout.interaction_graph()));
    }

    #[test]
    fn backtracking_search_embeds_code() {
        let chip = build_grid_chip(5, 5);
        let layout = CodeLayout::new(5, Basis::Z).unwrap();
        let graph = layout.interaction_graph();
        let m = map_circuit(&chip, &graph).unwrap();
        assert!(m.is_valid_for(&chip, &graph));
        for &(a, b) in graph.edges() {
            assert!(chip.has_coupler(m.get(a), m.get(b)));
        }
    }

    #[test]
    fn multi_code_placement() {
        let chip = build_grid_chip(7, 7);
        let single = multi_code_embed(&chip, 3, Basis::Z, &[Coord::default()]).unwrap();
        let layout = CodeLayout::new(3, Basis::Z).unwrap();
        assert_eq!(single[0].1, place_code_at(&chip, &layout, Coord::default()).unwrap());

        let quads = [(0.0, 0.0), (8.0, 0.0), (0.0, 8.0), (8.0, 8.0)].map(Coord::from);
        let codes = multi_code_embed(&chip, 3, Basis::Z, &quads).unwrap();
        let mut used: Vec<usize> = codes.iter().flat_map(|(_, m)| m.images().to_vec()).collect();
        let total = used.len();
        used.sort_unstable();
        used.dedup();
        assert_eq!(used.len(), total);
        for (l, m) in &codes {
            assert!(m.is_valid_for(&chip, &l.interaction_graph()));
        }

        let overlapping = [(0.0, 0.0), (2.0, 2.0)].map(Coord::from);
        assert!(matches!(
            multi_code_embed(&chip, 3, Basis::Z, &overlapping),
            Err(CodeError::Overlap { .. })
        ));
        assert!(matches!(
            multi_code_embed(&chip, 3, Basis::Z, &[Coord::new(20.0, 0.0)]),
            Err(CodeError::OutOfBounds { .. })
        ));
    }
}
