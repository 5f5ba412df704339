//! Radiation event identification over a sliding window of syndromes.
//!
//! The window keeps the last `K_max` detection-event vectors. On every push
//! it averages them per detector, folds the averages onto the qubits hosting
//! the detectors, keeps the qubits whose rate is above one defect per window
//! column, and, if enough of them are spatially clustered, reports the
//! weighted centroid and a radius for the impact.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::circuit::ScheduledCircuit;
use crate::geometry::Coord;

pub const DEFAULT_WINDOW: usize = 20;

/// Relative slack on the clustering gate. Grid spacings are exact multiples
/// of the device pitch, so a tie must not be lost to rounding.
const GATE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReiError {
    #[error("syndrome has length {found}, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("window capacity must be at least 1")]
    ZeroCapacity,
    #[error("detector {detector} is hosted by qubit {qubit} which has no coordinate")]
    BadHost { detector: usize, qubit: usize },
    #[error("average minimum qubit distance must be positive, got {0}")]
    BadPitch(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub center: Coord,
    pub radius: f64,
}

impl Detection {
    pub fn contains(&self, c: Coord) -> bool {
        c.dist(self.center) <= self.radius
    }
}

/// FIFO of recent syndromes plus the running statistics derived from it.
#[derive(Debug, Clone)]
pub struct SyndromeWindow {
    capacity: usize,
    rounds: usize,
    detector_count: usize,
    /// Hosting qubit of each detector.
    host: Vec<u32>,
    /// Number of detectors hosted per qubit.
    hosted: Vec<u32>,
    /// Qubits hosting at least one detector, ascending.
    hosts: Vec<u32>,
    coords: Vec<Coord>,
    avg_min_dist: f64,
    /// Ring buffer of defect index lists.
    rows: Vec<Vec<u32>>,
    head: usize,
    len: usize,
    /// Defects hosted per qubit across the window.
    qubit_counts: Vec<u32>,
    pruned: Vec<(Coord, f64)>,
}

impl SyndromeWindow {
    /// `qubit_map[q]` lists the detectors hosted by qubit `q`; `coords[q]`
    /// is that qubit's chip position.
    pub fn new(
        capacity: usize,
        rounds: usize,
        qubit_map: &[Vec<usize>],
        coords: Vec<Coord>,
        avg_min_dist: f64,
    ) -> Result<Self, ReiError> {
        if capacity == 0 {
            return Err(ReiError::ZeroCapacity);
        }
        if !(avg_min_dist > 0.0) {
            return Err(ReiError::BadPitch(avg_min_dist));
        }
        let detector_count = qubit_map.iter().map(|s| s.len()).sum();
        let mut host = vec![u32::MAX; detector_count];
        let mut hosted = vec![0u32; coords.len()];
        for (q, dets) in qubit_map.iter().enumerate() {
            for &d in dets {
                if q >= coords.len() || d >= detector_count {
                    return Err(ReiError::BadHost { detector: d, qubit: q });
                }
                host[d] = q as u32;
                hosted[q] += 1;
            }
        }
        let hosts = (0..hosted.len() as u32).filter(|&q| hosted[q as usize] > 0).collect();
        Ok(Self {
            capacity,
            rounds,
            detector_count,
            host,
            hosted,
            hosts,
            qubit_counts: vec![0; coords.len()],
            coords,
            avg_min_dist,
            rows: (0..capacity).map(|_| Vec::new()).collect(),
            head: 0,
            len: 0,
            pruned: Vec::new(),
        })
    }

    /// Window for a placed memory circuit: detectors grouped by hosting
    /// qubit, positions taken from the circuit.
    pub fn for_circuit(
        capacity: usize,
        rounds: usize,
        circuit: &ScheduledCircuit,
        avg_min_dist: f64,
    ) -> Result<Self, ReiError> {
        let mut map = vec![Vec::new(); circuit.qubit_count];
        for (i, d) in circuit.detectors.iter().enumerate() {
            map[d.host].push(i);
        }
        Self::new(capacity, rounds, &map, circuit.qubit_coords.clone(), avg_min_dist)
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn detector_count(&self) -> usize {
        self.detector_count
    }

    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    pub fn clear(&mut self) {
        for r in &mut self.rows {
            r.clear();
        }
        self.qubit_counts.iter_mut().for_each(|c| *c = 0);
        self.head = 0;
        self.len = 0;
    }

    /// Appends a syndrome, evicting the oldest when full, then runs the
    /// identification on the updated window.
    pub fn push_and_detect(&mut self, syndrome: &[bool]) -> Result<Option<Detection>, ReiError> {
        self.push(syndrome)?;
        Ok(self.detect())
    }

    pub fn push(&mut self, syndrome: &[bool]) -> Result<(), ReiError> {
        if syndrome.len() != self.detector_count {
            return Err(ReiError::LengthMismatch {
                expected: self.detector_count,
                found: syndrome.len(),
            });
        }
        let slot = (self.head + self.len) % self.capacity;
        if self.len == self.capacity {
            for &d in &self.rows[self.head] {
                self.qubit_counts[self.host[d as usize] as usize] -= 1;
            }
            self.head = (self.head + 1) % self.capacity;
        } else {
            self.len += 1;
        }
        let row = &mut self.rows[slot];
        row.clear();
        // skip quiet stretches a block at a time; the OR fold vectorises
        const BLOCK: usize = 32;
        for (b, chunk) in syndrome.chunks(BLOCK).enumerate() {
            if !chunk.iter().fold(false, |acc, &bit| acc | bit) {
                continue;
            }
            for (i, &bit) in chunk.iter().enumerate() {
                if bit {
                    let d = b * BLOCK + i;
                    row.push(d as u32);
                    self.qubit_counts[self.host[d] as usize] += 1;
                }
            }
        }
        Ok(())
    }

    /// Per-qubit defect rate: mean over the window and the hosted detectors.
    pub fn qubit_rate(&self, qubit: usize) -> f64 {
        if self.hosted[qubit] == 0 || self.len == 0 {
            return 0.0;
        }
        self.qubit_counts[qubit] as f64 / (self.len as f64 * self.hosted[qubit] as f64)
    }

    /// Pruning threshold for the current fill level.
    pub fn threshold(&self) -> f64 {
        1.0 / ((self.rounds + 1) as f64 * self.len.max(1) as f64)
    }

    /// Identification on the current window contents.
    pub fn detect(&mut self) -> Option<Detection> {
        if self.len == 0 {
            return None;
        }
        let alpha = self.threshold();
        self.pruned.clear();
        for &q in &self.hosts {
            let q = q as usize;
            if self.qubit_counts[q] == 0 {
                continue;
            }
            let rate = self.qubit_rate(q);
            if rate > alpha {
                self.pruned.push((self.coords[q], rate));
            }
        }
        if self.pruned.len() <= 2 {
            return None;
        }
        locate(&mut self.pruned, self.avg_min_dist)
    }

    /// Fraction of detector-hosting qubits that lie inside `detection`.
    pub fn affected_ratio(&self, detection: &Detection) -> f64 {
        let mut hosts = 0usize;
        let mut inside = 0usize;
        for (q, &h) in self.hosted.iter().enumerate() {
            if h > 0 {
                hosts += 1;
                if detection.contains(self.coords[q]) {
                    inside += 1;
                }
            }
        }
        if hosts == 0 {
            0.0
        } else {
            inside as f64 / hosts as f64
        }
    }
}

/// Clustering gate and weighted centroid over already-pruned
/// `(position, rate)` pairs. Rates are overwritten during the computation.
pub fn locate(points: &mut [(Coord, f64)], avg_min_dist: f64) -> Option<Detection> {
    if points.len() < 2 {
        return None;
    }
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
    let range = hi - lo;
    if range != 0.0 {
        for p in points.iter_mut() {
            p.1 = (p.1 - lo) / range;
        }
    }
    // nearest-neighbour distances, compared squared and rooted once
    let mut nearest_sum = 0.0;
    let n = points.len();
    let mut best = [f64::INFINITY; 64];
    if n <= best.len() {
        for i in 0..n {
            for j in i + 1..n {
                let dx = points[i].0.x - points[j].0.x;
                let dy = points[i].0.y - points[j].0.y;
                let d2 = dx * dx + dy * dy;
                best[i] = best[i].min(d2);
                best[j] = best[j].min(d2);
            }
        }
        nearest_sum = best[..n].iter().map(|&d2| libm::sqrt(d2)).sum();
    } else {
        for i in 0..n {
            let mut b = f64::INFINITY;
            for j in 0..n {
                if i != j {
                    let dx = points[i].0.x - points[j].0.x;
                    let dy = points[i].0.y - points[j].0.y;
                    b = b.min(dx * dx + dy * dy);
                }
            }
            nearest_sum += libm::sqrt(b);
        }
    }
    let correlation = nearest_sum / points.len() as f64;
    if correlation > 2.0 * avg_min_dist * (1.0 + GATE_TOLERANCE) {
        return None;
    }
    let (mut wsum, mut xs, mut ys) = (0.0, 0.0, 0.0);
    for p in points.iter_mut() {
        p.1 *= p.1;
        wsum += p.1;
        xs += p.1 * p.0.x;
        ys += p.1 * p.0.y;
    }
    if wsum == 0.0 {
        return None;
    }
    let center = Coord::new(xs / wsum, ys / wsum);
    let spread: f64 = points.iter().map(|p| p.1 * p.0.dist(center)).sum::<f64>() / wsum;
    Some(Detection {
        center,
        radius: 2.0 * spread,
    })
}

/// Detectors hosted on qubits within the detection radius.
pub fn affected_detectors(detection: &Detection, circuit: &ScheduledCircuit) -> Vec<usize> {
    (0..circuit.detector_count())
        .filter(|&d| detection.contains(circuit.detector_coord(d)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chip::{build_grid_chip, device_avg_min_dist};
    use crate::circuit::Basis;
    use crate::surface_code::build_rotated_surface_code;

    fn line_window(rates_hosts: usize) -> SyndromeWindow {
        let map: Vec<Vec<usize>> = (0..rates_hosts).map(|q| vec![q]).collect();
        let coords = (0..rates_hosts).map(|q| Coord::new(2.0 * q as f64, 0.0)).collect();
        SyndromeWindow::new(4, 0, &map, coords, 1e6).unwrap()
    }

    #[test]
    fn all_zero_stream_never_detects() {
        let (_, c) = build_rotated_surface_code(5, 5, Basis::Z).unwrap();
        let mut w = SyndromeWindow::for_circuit(DEFAULT_WINDOW, 5, &c, core::f64::consts::SQRT_2).unwrap();
        let zero = vec![false; c.detector_count()];
        for _ in 0..50 {
            assert_eq!(w.push_and_detect(&zero).unwrap(), None);
        }
        assert_eq!(w.len(), DEFAULT_WINDOW);
    }

    #[test]
    fn centroid_fixture_by_hand() {
        let mut pts = [
            (Coord::new(0.0, 0.0), 0.5),
            (Coord::new(2.0, 0.0), 1.0),
            (Coord::new(4.0, 0.0), 0.25),
        ];
        let d = locate(&mut pts, 1e6).unwrap();
        // normalised (1/3, 1, 0), squared (1/9, 1, 0)
        let wsum = 1.0 / 9.0 + 1.0;
        let cx = 2.0 / wsum;
        let radius = 2.0 * (cx * (1.0 / 9.0) + (2.0 - cx)) / wsum;
        assert!((d.center.x - 1.8).abs() <= 1e-9 * 1.8);
        assert!((d.center.x - cx).abs() < 1e-12);
        assert_eq!(d.center.y, 0.0);
        assert!((d.radius - 0.72).abs() <= 1e-9 * 0.72);
        assert!((d.radius - radius).abs() < 1e-12);
    }

    #[test]
    fn window_reproduces_fixture_rates() {
        // rates 2/4, 4/4, 2/4 all clear alpha = 1/4; normalised weights
        // (0, 1, 0) put the centre on the middle qubit
        let mut w = line_window(3);
        let rows = [
            [true, true, true],
            [true, true, false],
            [false, true, true],
            [false, true, false],
        ];
        let mut last = None;
        for r in rows {
            last = w.push_and_detect(&r).unwrap();
        }
        assert_eq!(w.qubit_rate(0), 0.5);
        assert_eq!(w.qubit_rate(1), 1.0);
        assert_eq!(w.qubit_rate(2), 0.5);
        let d = last.unwrap();
        assert!((d.center.x - 2.0).abs() < 1e-12);
    }

    #[test]
    fn spread_out_defects_fail_the_gate() {
        let pitch = core::f64::consts::SQRT_2;
        let step = 5.0 * 2.0 * pitch;
        let coords: Vec<Coord> = (0..4).map(|i| Coord::new(step * i as f64 / pitch, step * i as f64 / pitch)).collect();
        let map: Vec<Vec<usize>> = (0..4).map(|q| vec![q]).collect();
        let mut w = SyndromeWindow::new(1, 0, &map, coords, pitch).unwrap();
        assert_eq!(w.push_and_detect(&[true; 4]).unwrap(), None);
    }

    #[test]
    fn two_pruned_qubits_are_not_enough() {
        let mut w = line_window(3);
        for _ in 0..4 {
            assert_eq!(w.push_and_detect(&[true, true, false]).unwrap(), None);
        }
    }

    #[test]
    fn fifo_evicts_oldest() {
        let mut w = line_window(3);
        w.push(&[true, false, false]).unwrap();
        for _ in 0..4 {
            w.push(&[false, false, true]).unwrap();
        }
        assert_eq!(w.qubit_rate(0), 0.0);
        assert_eq!(w.qubit_rate(2), 1.0);
        assert_eq!(w.len(), 4);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let mut w = line_window(3);
        assert_eq!(
            w.push_and_detect(&[true]),
            Err(ReiError::LengthMismatch { expected: 3, found: 1 })
        );
    }

    #[test]
    fn translation_moves_centre_only() {
        let chip = build_grid_chip(5, 5);
        let pitch = device_avg_min_dist(&chip).unwrap();
        let (_, c) = build_rotated_surface_code(5, 1, Basis::Z).unwrap();
        let shifted = c.translated(Coord::new(3.0, -7.0));
        let mut a = SyndromeWindow::for_circuit(3, 1, &c, pitch).unwrap();
        let mut b = SyndromeWindow::for_circuit(3, 1, &shifted, pitch).unwrap();
        let ev: Vec<bool> = (0..c.detector_count()).map(|i| i % 12 < 5).collect();
        let (da, db) = (a.push_and_detect(&ev).unwrap(), b.push_and_detect(&ev).unwrap());
        match (da, db) {
            (Some(x), Some(y)) => {
                assert!((x.center.x + 3.0 - y.center.x).abs() < 1e-9);
                assert!((x.center.y - 7.0 - y.center.y).abs() < 1e-9);
                assert!((x.radius - y.radius).abs() < 1e-9);
            }
            (None, None) => {}
            other => panic!("translation changed the verdict: {other:?}"),
        }
    }

    #[test]
    fn affected_detector_extremes() {
        let (_, c) = build_rotated_surface_code(3, 2, Basis::Z).unwrap();
        let host = c.detectors[0].host;
        let at = Detection {
            center: c.qubit_coords[host],
            radius: 0.0,
        };
        let hit = affected_detectors(&at, &c);
        assert!(!hit.is_empty());
        assert!(hit.iter().all(|&d| c.detectors[d].host == host));
        let all = Detection {
            center: Coord::new(3.0, 3.0),
            radius: 100.0,
        };
        assert_eq!(affected_detectors(&all, &c).len(), c.detector_count());
        let nowhere = Detection {
            center: Coord::new(1.0, 1.0),
            radius: 0.0,
        };
        assert!(affected_detectors(&nowhere, &c).is_empty());
    }
}
