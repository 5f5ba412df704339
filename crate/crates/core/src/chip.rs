//! Chip topology: qubit positions, diagonal couplers, gate timings and
//! subgraph placement of circuits onto the coupler graph.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::geometry::Coord;

/// Energy-relaxation time of the modelled device, in seconds.
pub const DEFAULT_TAU1: f64 = 85e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChipError {
    #[error("chip needs at least {needed} qubits, found {found}")]
    TooFewQubits { needed: usize, found: usize },
    #[error("qubits {a} and {b} share coordinates")]
    DuplicateCoordinate { a: usize, b: usize },
    #[error("coupler ({a}, {b}) references a missing qubit or is a self loop")]
    InvalidCoupler { a: usize, b: usize },
    #[error("coupler graph is disconnected: qubit {qubit} unreachable from qubit 0")]
    Disconnected { qubit: usize },
    #[error("timing constants and tau1 must be strictly positive")]
    NonPositiveTiming,
    #[error("interaction graph node {node} cannot be embedded into the coupler graph")]
    Unmappable { node: usize },
}

/// Durations of each gate class, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateTimings {
    pub single_qubit: f64,
    pub two_qubit: f64,
    pub measure: f64,
    pub reset: f64,
}

impl Default for GateTimings {
    fn default() -> Self {
        Self {
            single_qubit: 25e-9,
            two_qubit: 32e-9,
            measure: 58e-9,
            reset: 58e-9,
        }
    }
}

impl GateTimings {
    pub fn is_valid(&self) -> bool {
        [self.single_qubit, self.two_qubit, self.measure, self.reset]
            .iter()
            .all(|t| t.is_finite() && *t > 0.0)
    }
}

/// A planar chip. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Chip {
    coords: Vec<Coord>,
    couplers: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    timing: GateTimings,
    tau1: f64,
}

fn coord_key(c: Coord) -> (u64, u64) {
    // +0.0 folds -0.0 onto the same key.
    ((c.x + 0.0).to_bits(), (c.y + 0.0).to_bits())
}

impl Chip {
    /// Validates and builds a chip. Couplers are stored as sorted, deduplicated
    /// `(low, high)` pairs.
    pub fn new(
        coords: Vec<Coord>,
        couplers: Vec<(usize, usize)>,
        timing: GateTimings,
        tau1: f64,
    ) -> Result<Self, ChipError> {
        if coords.is_empty() {
            return Err(ChipError::TooFewQubits { needed: 1, found: 0 });
        }
        if !timing.is_valid() || !(tau1.is_finite() && tau1 > 0.0) {
            return Err(ChipError::NonPositiveTiming);
        }
        let mut seen = BTreeMap::new();
        for (i, c) in coords.iter().enumerate() {
            if let Some(&prev) = seen.get(&coord_key(*c)) {
                return Err(ChipError::DuplicateCoordinate { a: prev, b: i });
            }
            seen.insert(coord_key(*c), i);
        }
        let n = coords.len();
        let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(couplers.len());
        for (a, b) in couplers {
            if a >= n || b >= n || a == b {
                return Err(ChipError::InvalidCoupler { a, b });
            }
            pairs.push((a.min(b), a.max(b)));
        }
        pairs.sort_unstable();
        pairs.dedup();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &pairs {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let chip = Self {
            coords,
            couplers: pairs,
            adjacency,
            timing,
            tau1,
        };
        if let Some(q) = chip.first_unreachable() {
            return Err(ChipError::Disconnected { qubit: q });
        }
        Ok(chip)
    }

    fn first_unreachable(&self) -> Option<usize> {
        let mut seen = vec![false; self.coords.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(q) = queue.pop_front() {
            for &nb in &self.adjacency[q] {
                if !seen[nb] {
                    seen[nb] = true;
                    queue.push_back(nb);
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    pub fn qubit_count(&self) -> usize {
        self.coords.len()
    }

    pub fn coord(&self, qubit: usize) -> Coord {
        self.coords[qubit]
    }

    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    pub fn couplers(&self) -> &[(usize, usize)] {
        &self.couplers
    }

    pub fn neighbours(&self, qubit: usize) -> &[usize] {
        &self.adjacency[qubit]
    }

    pub fn has_coupler(&self, a: usize, b: usize) -> bool {
        self.adjacency
            .get(a)
            .is_some_and(|l| l.binary_search(&b).is_ok())
    }

    pub fn timing(&self) -> &GateTimings {
        &self.timing
    }

    pub fn tau1(&self) -> f64 {
        self.tau1
    }

    /// Index of the qubit sitting exactly at `c`, if any.
    pub fn qubit_at(&self, c: Coord) -> Option<usize> {
        let key = coord_key(c);
        self.coords.iter().position(|q| coord_key(*q) == key)
    }

    /// Returns `(min, max)` corners of the axis-aligned bounding box.
    pub fn bounding_box(&self) -> (Coord, Coord) {
        let mut lo = Coord::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Coord::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for c in &self.coords {
            lo.x = lo.x.min(c.x);
            lo.y = lo.y.min(c.y);
            hi.x = hi.x.max(c.x);
            hi.y = hi.y.max(c.y);
        }
        (lo, hi)
    }

    /// Same chip with every coordinate shifted by `offset`.
    pub fn translated(&self, offset: Coord) -> Chip {
        let mut out = self.clone();
        for c in &mut out.coords {
            *c = *c + offset;
        }
        out
    }
}

/// Closed-form qubit count of [`build_grid_chip`].
pub fn grid_chip_qubit_count(rows: usize, cols: usize) -> usize {
    (rows + 1) * (cols + 1) + rows * cols
}

/// Tiles `rows x cols` cross-shaped cells: a centre qubit at odd coordinates
/// coupled diagonally to the four even-coordinate corners around it. Adjacent
/// cells share corners, so the lattice is every integer point with `x + y`
/// even inside `[0, 2 cols] x [0, 2 rows]`. A `d x d` grid hosts a distance-`d`
/// rotated surface code with data qubits on the centres.
pub fn build_grid_chip(rows: usize, cols: usize) -> Chip {
    assert!(rows >= 1 && cols >= 1, "grid chip needs at least one cell");
    let (w, h) = (2 * cols, 2 * rows);
    let mut index = BTreeMap::new();
    let mut coords = Vec::with_capacity(grid_chip_qubit_count(rows, cols));
    for y in 0..=h {
        for x in 0..=w {
            if (x + y) % 2 == 0 {
                index.insert((x, y), coords.len());
                coords.push(Coord::new(x as f64, y as f64));
            }
        }
    }
    let mut couplers = Vec::with_capacity(4 * rows * cols);
    for y in (1..h).step_by(2) {
        for x in (1..w).step_by(2) {
            let centre = index[&(x, y)];
            for (cx, cy) in [(x - 1, y - 1), (x + 1, y - 1), (x - 1, y + 1), (x + 1, y + 1)] {
                couplers.push((centre, index[&(cx, cy)]));
            }
        }
    }
    Chip::new(coords, couplers, GateTimings::default(), DEFAULT_TAU1)
        .expect("grid chip construction is always valid")
}

/// Mean, over qubits, of the distance to the nearest other qubit.
pub fn device_avg_min_dist(chip: &Chip) -> Result<f64, ChipError> {
    min_dist_mean(chip.coords())
}

pub(crate) fn min_dist_mean(coords: &[Coord]) -> Result<f64, ChipError> {
    if coords.len() < 2 {
        return Err(ChipError::TooFewQubits {
            needed: 2,
            found: coords.len(),
        });
    }
    let total: f64 = coords
        .iter()
        .enumerate()
        .map(|(i, a)| {
            coords
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, b)| a.dist(*b))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Ok(total / coords.len() as f64)
}

/// Undirected graph of required two-qubit interactions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InteractionGraph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl InteractionGraph {
    pub fn new(node_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut pairs: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        let mut adjacency = vec![Vec::new(); node_count];
        for &(a, b) in &pairs {
            assert!(b < node_count && a != b, "bad interaction edge ({a}, {b})");
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        Self {
            node_count,
            edges: pairs,
            adjacency,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }
}

/// Injective node -> chip qubit table.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Mapping {
    images: Vec<usize>,
}

impl Mapping {
    pub fn from_images(images: Vec<usize>) -> Self {
        Self { images }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn get(&self, node: usize) -> usize {
        self.images[node]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// Injectivity plus every interaction edge landing on a coupler.
    pub fn is_valid_for(&self, chip: &Chip, graph: &InteractionGraph) -> bool {
        if self.images.len() != graph.node_count() {
            return false;
        }
        let mut used = vec![false; chip.qubit_count()];
        for &q in &self.images {
            if q >= used.len() || used[q] {
                return false;
            }
            used[q] = true;
        }
        graph
            .edges()
            .iter()
            .all(|&(a, b)| chip.has_coupler(self.images[a], self.images[b]))
    }
}

/// Backtracking subgraph monomorphism with degree pruning. Nodes are placed
/// in BFS order per connected component (root = highest degree, lowest index);
/// chip candidates are scanned in index order, so the first embedding found is
/// deterministic.
pub fn map_circuit(chip: &Chip, graph: &InteractionGraph) -> Result<Mapping, ChipError> {
    let n = graph.node_count();
    if n == 0 {
        return Ok(Mapping::default());
    }
    let order = placement_order(graph);
    let mut position = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    // For each node, neighbours placed before it.
    let earlier: Vec<Vec<usize>> = order
        .iter()
        .map(|&v| {
            graph.adjacency[v]
                .iter()
                .copied()
                .filter(|&u| position[u] < position[v])
                .collect()
        })
        .collect();

    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; chip.qubit_count()];
    let mut cursor = vec![0usize; n];
    let mut depth = 0usize;
    let mut deepest = 0usize;

    loop {
        let node = order[depth];
        let placed = next_candidate(chip, graph, node, &earlier[depth], &image, &used, &mut cursor[depth]);
        match placed {
            Some(q) => {
                image[node] = q;
                used[q] = true;
                depth += 1;
                if depth == n {
                    return Ok(Mapping { images: image });
                }
                deepest = deepest.max(depth);
                cursor[depth] = 0;
            }
            None => {
                if depth == 0 {
                    return Err(ChipError::Unmappable {
                        node: order[deepest],
                    });
                }
                depth -= 1;
                let prev = order[depth];
                used[image[prev]] = false;
                image[prev] = usize::MAX;
            }
        }
    }
}

fn placement_order(graph: &InteractionGraph) -> Vec<usize> {
    let n = graph.node_count();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    loop {
        let root = (0..n)
            .filter(|&v| !seen[v])
            .max_by(|&a, &b| graph.degree(a).cmp(&graph.degree(b)).then(b.cmp(&a)));
        let Some(root) = root else { break };
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &u in &graph.adjacency[v] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    order
}

fn next_candidate(
    chip: &Chip,
    graph: &InteractionGraph,
    node: usize,
    earlier: &[usize],
    image: &[usize],
    used: &[bool],
    cursor: &mut usize,
) -> Option<usize> {
    let degree = graph.degree(node);
    let fits = |q: usize| {
        !used[q]
            && chip.neighbours(q).len() >= degree
            && earlier.iter().all(|&u| chip.has_coupler(image[u], q))
    };
    match earlier.first() {
        Some(&anchor) => {
            let pool = chip.neighbours(image[anchor]);
            while *cursor < pool.len() {
                let q = pool[*cursor];
                *cursor += 1;
                if fits(q) {
                    return Some(q);
                }
            }
            None
        }
        None => {
            while *cursor < chip.qubit_count() {
                let q = *cursor;
                *cursor += 1;
                if fits(q) {
                    return Some(q);
                }
            }
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flood_fill_count(rows: usize, cols: usize) -> usize {
        let (w, h) = (2 * cols as i64, 2 * rows as i64);
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![(0i64, 0i64)];
        seen.insert((0, 0));
        while let Some((x, y)) = stack.pop() {
            for (dx, dy) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let p = (x + dx, y + dy);
                if p.0 >= 0 && p.1 >= 0 && p.0 <= w && p.1 <= h && seen.insert(p) {
                    stack.push(p);
                }
            }
        }
        seen.len()
    }

    #[test]
    fn unit_cell_is_a_cross() {
        let chip = build_grid_chip(1, 1);
        assert_eq!(chip.qubit_count(), 5);
        assert_eq!(chip.couplers().len(), 4);
        let centre = chip.qubit_at(Coord::new(1.0, 1.0)).unwrap();
        assert_eq!(chip.neighbours(centre).len(), 4);
    }

    #[test]
    fn grid_couplers_are_diagonal() {
        let chip = build_grid_chip(2, 2);
        for &(a, b) in chip.couplers() {
            let (ca, cb) = (chip.coord(a), chip.coord(b));
            assert_eq!((ca.x - cb.x).abs(), 1.0);
            assert_eq!((ca.y - cb.y).abs(), 1.0);
        }
    }

    #[test]
    fn grid_count_matches_flood_fill() {
        for (r, c) in [(1, 1), (2, 3), (5, 5), (20, 20)] {
            let chip = build_grid_chip(r, c);
            assert_eq!(chip.qubit_count(), grid_chip_qubit_count(r, c));
            assert_eq!(chip.qubit_count(), flood_fill_count(r, c));
        }
    }

    #[test]
    fn avg_min_dist_examples() {
        let t = GateTimings::default();
        let pair = Chip::new(
            vec![Coord::new(0.0, 0.0), Coord::new(1.0, 1.0)],
            vec![(0, 1)],
            t,
            DEFAULT_TAU1,
        )
        .unwrap();
        assert_eq!(device_avg_min_dist(&pair).unwrap(), 2f64.sqrt());
        // larger chips sum many equal terms, so allow rounding in the mean
        let tri = Chip::new(
            vec![Coord::new(0.0, 0.0), Coord::new(1.0, 1.0), Coord::new(2.0, 0.0)],
            vec![(0, 1), (1, 2)],
            t,
            DEFAULT_TAU1,
        )
        .unwrap();
        assert!((device_avg_min_dist(&tri).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        for (r, c) in [(1, 1), (3, 4), (6, 6)] {
            let got = device_avg_min_dist(&build_grid_chip(r, c)).unwrap();
            assert!((got - 2f64.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn single_qubit_has_no_min_dist() {
        let chip = Chip::new(vec![Coord::new(0.0, 0.0)], vec![], GateTimings::default(), 1.0).unwrap();
        assert!(matches!(
            device_avg_min_dist(&chip),
            Err(ChipError::TooFewQubits { .. })
        ));
    }

    #[test]
    fn invalid_chips_rejected() {
        let t = GateTimings::default();
        let dup = Chip::new(vec![Coord::new(0.0, 0.0); 2], vec![(0, 1)], t, 1.0);
        assert_eq!(dup, Err(ChipError::DuplicateCoordinate { a: 0, b: 1 }));
        let split = Chip::new(
            vec![Coord::new(0.0, 0.0), Coord::new(1.0, 1.0), Coord::new(5.0, 5.0)],
            vec![(0, 1)],
            t,
            1.0,
        );
        assert_eq!(split, Err(ChipError::Disconnected { qubit: 2 }));
        let bad = Chip::new(vec![Coord::new(0.0, 0.0)], vec![(0, 3)], t, 1.0);
        assert!(matches!(bad, Err(ChipError::InvalidCoupler { .. })));
        let zero_tau = Chip::new(vec![Coord::new(0.0, 0.0)], vec![], t, 0.0);
        assert_eq!(zero_tau, Err(ChipError::NonPositiveTiming));
    }

    #[test]
    fn empty_graph_maps_to_empty() {
        let chip = build_grid_chip(1, 1);
        let m = map_circuit(&chip, &InteractionGraph::new(0, [])).unwrap();
        assert!(m.is_empty());
    }

    #[test]
    fn single_edge_takes_first_coupler() {
        let chip = build_grid_chip(1, 1);
        let g = InteractionGraph::new(2, [(0, 1)]);
        let m = map_circuit(&chip, &g).unwrap();
        let pair = (m.get(0).min(m.get(1)), m.get(0).max(m.get(1)));
        assert_eq!(pair, chip.couplers()[0]);
        assert!(m.is_valid_for(&chip, &g));
    }

    #[test]
    fn triangle_is_unmappable_on_bipartite_lattice() {
        let chip = build_grid_chip(3, 3);
        let g = InteractionGraph::new(3, [(0, 1), (1, 2), (0, 2)]);
        assert!(matches!(map_circuit(&chip, &g), Err(ChipError::Unmappable { .. })));
    }

    #[test]
    fn star_larger_than_max_degree_fails_at_root() {
        let chip = build_grid_chip(2, 2);
        let g = InteractionGraph::new(6, (1..6).map(|i| (0, i)));
        assert_eq!(map_circuit(&chip, &g), Err(ChipError::Unmappable { node: 0 }));
    }
}
