//! Baseline decoders: exact minimum-weight perfect matching and union-find.

use alloc::vec;
use alloc::vec::Vec;
use core::time::Duration;

use crate::blossom::min_weight_perfect_matching;
use crate::detector_graph::{DetectorGraph, Dijkstra};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecodeResult {
    pub predicted_observable_flip: bool,
    /// Graph edge indices whose faults explain the syndrome. Empty when the
    /// decoder was asked for the prediction only.
    pub correction: Vec<usize>,
    /// Summed weight of the matched paths or of the correction.
    pub weight: f64,
    /// Filled in by callers that time the decode.
    pub decode_time: Option<Duration>,
}

/// Detectors flipped by a set of edges (boundary parity dropped).
pub fn correction_syndrome(graph: &DetectorGraph, correction: &[usize]) -> Vec<bool> {
    let mut out = vec![false; graph.detector_count()];
    let b = graph.boundary();
    for &e in correction {
        let edge = &graph.edges()[e];
        for v in [edge.a, edge.b] {
            if v != b {
                out[v] ^= true;
            }
        }
    }
    out
}

/// Fixed-point scale for path weights handed to the blossom solver.
const WEIGHT_SCALE: f64 = (1u64 << 20) as f64;

/// Reusable matching decoder. Keeps Dijkstra scratch space between calls.
#[derive(Debug, Clone, Default)]
pub struct MwpmDecoder {
    dijkstra: Dijkstra,
    with_correction: bool,
    targets: Vec<bool>,
}

impl MwpmDecoder {
    pub fn new() -> Self {
        Self {
            with_correction: true,
            ..Self::default()
        }
    }

    /// Skips path expansion; only the observable prediction and weight are
    /// produced.
    pub fn prediction_only() -> Self {
        Self::default()
    }

    pub fn decode(&mut self, graph: &DetectorGraph, events: &[bool]) -> DecodeResult {
        assert_eq!(events.len(), graph.detector_count(), "syndrome length mismatch");
        let defects: Vec<usize> = (0..events.len()).filter(|&i| events[i]).collect();
        let n = defects.len();
        if n == 0 {
            return DecodeResult::default();
        }
        let boundary = graph.boundary();
        self.targets.clear();
        self.targets.resize(graph.node_count(), false);
        for &d in &defects {
            self.targets[d] = true;
        }
        self.targets[boundary] = true;

        // pair[i][j] for j > i: (distance, parity); plus boundary legs
        let mut pair_dist = vec![f64::INFINITY; n * n];
        let mut pair_par = vec![false; n * n];
        let mut bdist = vec![f64::INFINITY; n];
        let mut bpar = vec![false; n];
        for (i, &s) in defects.iter().enumerate() {
            self.dijkstra.run(graph, s, Some((&self.targets, n + 1)));
            for (j, &t) in defects.iter().enumerate().skip(i + 1) {
                pair_dist[i * n + j] = self.dijkstra.distance(t);
                pair_par[i * n + j] = self.dijkstra.parity(t);
            }
            bdist[i] = self.dijkstra.distance(boundary);
            bpar[i] = self.dijkstra.parity(boundary);
        }

        // Complete graph on defects; pairing two defects may also mean both
        // leave through the boundary. An odd count adds one boundary vertex.
        let mut edges = Vec::with_capacity(n * (n + 1) / 2);
        let mut via_boundary = vec![false; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let direct = pair_dist[i * n + j];
                let through = bdist[i] + bdist[j];
                let (w, vb) = if through < direct { (through, true) } else { (direct, false) };
                if w.is_finite() {
                    via_boundary[i * n + j] = vb;
                    edges.push((i, j, libm::round(w * WEIGHT_SCALE) as i64));
                }
            }
        }
        let odd = n % 2 == 1;
        if odd {
            for i in 0..n {
                if bdist[i].is_finite() {
                    edges.push((i, n, libm::round(bdist[i] * WEIGHT_SCALE) as i64));
                }
            }
        }
        let vertex_count = n + usize::from(odd);
        let Some(mate) = min_weight_perfect_matching(vertex_count, &edges) else {
            return DecodeResult::default();
        };

        let mut flip = false;
        let mut weight = 0.0;
        // legs as (source defect, target node)
        let mut legs: Vec<(usize, usize)> = Vec::new();
        for i in 0..n {
            let j = mate[i];
            if j == n {
                flip ^= bpar[i];
                weight += bdist[i];
                legs.push((defects[i], boundary));
            } else if j > i {
                if via_boundary[i * n + j] {
                    flip ^= bpar[i] ^ bpar[j];
                    weight += bdist[i] + bdist[j];
                    legs.push((defects[i], boundary));
                    legs.push((defects[j], boundary));
                } else {
                    flip ^= pair_par[i * n + j];
                    weight += pair_dist[i * n + j];
                    legs.push((defects[i], defects[j]));
                }
            }
        }
        let mut correction = Vec::new();
        if self.with_correction {
            let mut count = vec![0u8; graph.edges().len()];
            let mut path = Vec::new();
            for &(s, t) in &legs {
                self.targets.iter_mut().for_each(|x| *x = false);
                self.targets[t] = true;
                self.dijkstra.run(graph, s, Some((&self.targets, 1)));
                path.clear();
                self.dijkstra.path_edges(graph, t, &mut path);
                for &e in &path {
                    count[e] ^= 1;
                }
            }
            correction = (0..count.len()).filter(|&e| count[e] == 1).collect();
        }
        DecodeResult {
            predicted_observable_flip: flip,
            correction,
            weight,
            decode_time: None,
        }
    }
}

/// Decodes `events` by exact minimum-weight perfect matching.
pub fn mwpm_decode(graph: &DetectorGraph, events: &[bool]) -> DecodeResult {
    MwpmDecoder::new().decode(graph, events)
}

/// Weighted union-find decoder.
///
/// Each edge is split into growth units proportional to its weight (at least
/// one, the lightest edge being two half-edges). Every round, each odd
/// cluster not yet touching the boundary grows all its frontier edges by one
/// unit; fully grown edges fuse clusters in edge-index order. A spanning
/// forest of the grown edges, rooted at the boundary where reachable, is
/// then peeled leaf-first.
pub fn union_find_decode(graph: &DetectorGraph, events: &[bool]) -> DecodeResult {
    assert_eq!(events.len(), graph.detector_count(), "syndrome length mismatch");
    if !events.iter().any(|&e| e) {
        return DecodeResult::default();
    }
    let nodes = graph.node_count();
    let boundary = graph.boundary();
    let edges = graph.edges();
    let wmin = graph.min_weight();
    let length: Vec<u32> = edges
        .iter()
        .map(|e| (libm::round(2.0 * e.weight / wmin) as u32).max(1))
        .collect();
    let mut growth = vec![0u32; edges.len()];
    let mut grown = vec![false; edges.len()];
    let mut stamp = vec![usize::MAX; edges.len()];

    let mut parent: Vec<usize> = (0..nodes).collect();
    let mut odd = vec![false; nodes];
    let mut touches_boundary = vec![false; nodes];
    let mut members: Vec<Vec<usize>> = (0..nodes).map(|v| vec![v]).collect();
    for (i, &e) in events.iter().enumerate() {
        odd[i] = e;
    }
    touches_boundary[boundary] = true;

    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }

    let mut round = 0usize;
    loop {
        let active: Vec<usize> = (0..nodes)
            .filter(|&v| parent[v] == v && odd[v] && !touches_boundary[v])
            .collect();
        if active.is_empty() {
            break;
        }
        let mut fused = Vec::new();
        for &root in &active {
            for &v in &members[root] {
                for &(_, e) in graph.neighbours(v) {
                    let e = e as usize;
                    if grown[e] || stamp[e] == round * nodes + root {
                        continue;
                    }
                    stamp[e] = round * nodes + root;
                    growth[e] += 1;
                    if growth[e] >= length[e] {
                        grown[e] = true;
                        fused.push(e);
                    }
                }
            }
        }
        if fused.is_empty() && active.iter().all(|&r| members[r].iter().all(|&v| graph.neighbours(v).is_empty())) {
            // isolated defects with no edges cannot be resolved
            break;
        }
        fused.sort_unstable();
        for e in fused {
            let (a, b) = (find(&mut parent, edges[e].a), find(&mut parent, edges[e].b));
            if a == b {
                continue;
            }
            let (keep, drop) = if members[a].len() >= members[b].len() { (a, b) } else { (b, a) };
            parent[drop] = keep;
            let moved = core::mem::take(&mut members[drop]);
            members[keep].extend(moved);
            odd[keep] ^= odd[drop];
            touches_boundary[keep] |= touches_boundary[drop];
        }
        round += 1;
    }

    // peel a spanning forest of grown edges
    let mut visited = vec![false; nodes];
    let mut tree_edge = vec![usize::MAX; nodes];
    let mut order = Vec::new();
    let mut queue = alloc::collections::VecDeque::new();
    let roots = core::iter::once(boundary).chain((0..events.len()).filter(|&i| events[i]));
    for r in roots {
        if visited[r] {
            continue;
        }
        visited[r] = true;
        queue.push_back(r);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &(u, e) in graph.neighbours(v) {
                let (u, e) = (u as usize, e as usize);
                if grown[e] && !visited[u] {
                    visited[u] = true;
                    tree_edge[u] = e;
                    queue.push_back(u);
                }
            }
        }
    }
    let mut flag = vec![false; nodes];
    flag[..events.len()].copy_from_slice(events);
    let mut correction = Vec::new();
    let mut flip = false;
    let mut weight = 0.0;
    for &v in order.iter().rev() {
        if flag[v] && tree_edge[v] != usize::MAX {
            let e = tree_edge[v];
            let edge = &edges[e];
            let u = if edge.a == v { edge.b } else { edge.a };
            flag[v] = false;
            flag[u] ^= true;
            correction.push(e);
            flip ^= edge.observable;
            weight += edge.weight;
        }
    }
    correction.sort_unstable();
    DecodeResult {
        predicted_observable_flip: flip,
        correction,
        weight,
        decode_time: None,
    }
}
