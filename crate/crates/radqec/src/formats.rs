//! Text and binary interchange formats.
//!
//! * Chip: `index x y` per qubit, then `a b` per coupler. `#` starts a
//!   comment.
//! * Circuit: header lines (`qubits`, `duration`, `coord`), one op per line
//!   as `op <start> <duration> <gate> <qubits..>`, then `detector` and
//!   `observable` lines listing record indices.
//! * Graph: `node <index> <x> <y> <round> <host>` lines, then
//!   `edge <a> <b> <p> <w> <observable mask>`; the boundary is `b = nodes`.
//! * Shot stream: little-endian binary; a magic tag, then per shot the
//!   detection events and raw measurements as length-prefixed bit vectors,
//!   the observable flip byte and the shot start time.
//!
//! Floats are written in shortest round-trip form, so every text format
//! reproduces its input exactly.

use std::fmt::Write as _;
use std::io::{self, Read, Write};

use anyhow::{anyhow, bail, Context, Result};
use radqec_core::chip::{GateTimings, DEFAULT_TAU1};
use radqec_core::circuit::Detector;
use radqec_core::detector_graph::DetectorNode;
use radqec_core::{Chip, Coord, DetectorGraph, GateKind, Op, ScheduledCircuit, ShotResult};

fn tokens(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then(|| (i + 1, l.split_whitespace().collect()))
    })
}

fn parse<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| anyhow!("line {line}: cannot parse `{s}`"))
}

pub fn chip_to_text(chip: &Chip) -> String {
    let mut s = String::new();
    for (i, c) in chip.coords().iter().enumerate() {
        let _ = writeln!(s, "{i} {} {}", c.x, c.y);
    }
    for &(a, b) in chip.couplers() {
        let _ = writeln!(s, "{a} {b}");
    }
    s
}

/// Parses a chip description; timings and tau1 take the device defaults.
pub fn chip_from_text(text: &str) -> Result<Chip> {
    let mut coords = Vec::new();
    let mut couplers = Vec::new();
    for (line, t) in tokens(text) {
        match t.len() {
            3 => {
                if !couplers.is_empty() {
                    bail!("line {line}: qubit after couplers");
                }
                let i: usize = parse(t[0], line)?;
                if i != coords.len() {
                    bail!("line {line}: expected qubit {}, found {i}", coords.len());
                }
                coords.push(Coord::new(parse(t[1], line)?, parse(t[2], line)?));
            }
            2 => couplers.push((parse(t[0], line)?, parse(t[1], line)?)),
            _ => bail!("line {line}: expected `index x y` or `a b`"),
        }
    }
    Ok(Chip::new(coords, couplers, GateTimings::default(), DEFAULT_TAU1)?)
}

pub fn circuit_to_text(c: &ScheduledCircuit) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "qubits {}", c.qubit_count);
    let _ = writeln!(s, "duration {}", c.total_duration);
    for (q, p) in c.qubit_coords.iter().enumerate() {
        let _ = writeln!(s, "coord {q} {} {}", p.x, p.y);
    }
    for op in &c.ops {
        let _ = write!(s, "op {} {} {}", op.start, op.duration, op.kind.name());
        for q in op.targets() {
            let _ = write!(s, " {q}");
        }
        s.push('\n');
    }
    for d in &c.detectors {
        let _ = write!(s, "detector {} {}", d.host, d.round);
        for r in &d.records {
            let _ = write!(s, " {r}");
        }
        s.push('\n');
    }
    s.push_str("observable");
    for r in &c.observable {
        let _ = write!(s, " {r}");
    }
    s.push('\n');
    s
}

pub fn circuit_from_text(text: &str) -> Result<ScheduledCircuit> {
    let mut c = ScheduledCircuit {
        qubit_count: 0,
        qubit_coords: Vec::new(),
        ops: Vec::new(),
        detectors: Vec::new(),
        observable: Vec::new(),
        total_duration: 0.0,
    };
    for (line, t) in tokens(text) {
        let nums = |from: usize| t[from..].iter().map(|s| parse::<usize>(s, line)).collect::<Result<Vec<_>>>();
        match (t[0], t.len()) {
            ("qubits", 2) => {
                c.qubit_count = parse(t[1], line)?;
                c.qubit_coords = vec![Coord::default(); c.qubit_count];
            }
            ("duration", 2) => c.total_duration = parse(t[1], line)?,
            ("coord", 4) => {
                let q: usize = parse(t[1], line)?;
                let slot = c.qubit_coords.get_mut(q).with_context(|| format!("line {line}: qubit {q} out of range"))?;
                *slot = Coord::new(parse(t[2], line)?, parse(t[3], line)?);
            }
            ("op", 5 | 6) => {
                let kind = GateKind::from_name(t[3]).with_context(|| format!("line {line}: unknown gate `{}`", t[3]))?;
                let (start, duration) = (parse(t[1], line)?, parse(t[2], line)?);
                let q = nums(4)?;
                if q.len() != kind.arity() {
                    bail!("line {line}: {} takes {} qubit(s)", kind.name(), kind.arity());
                }
                c.ops.push(if kind == GateKind::Cnot {
                    Op::cnot(q[0], q[1], start, duration)
                } else {
                    Op::single(kind, q[0], start, duration)
                });
            }
            ("detector", n) if n >= 3 => c.detectors.push(Detector {
                host: parse(t[1], line)?,
                round: parse(t[2], line)?,
                records: nums(3)?,
            }),
            ("observable", _) => c.observable = nums(1)?,
            _ => bail!("line {line}: unrecognised `{}`", t.join(" ")),
        }
    }
    c.validate().context("circuit dump is inconsistent")?;
    Ok(c)
}

pub fn graph_to_text(g: &DetectorGraph) -> String {
    let mut s = String::new();
    for (i, n) in g.nodes().iter().enumerate() {
        let _ = writeln!(s, "node {i} {} {} {} {}", n.coord.x, n.coord.y, n.round, n.host);
    }
    for e in g.edges() {
        let _ = writeln!(s, "edge {} {} {} {} {}", e.a, e.b, e.probability, e.weight, u8::from(e.observable));
    }
    s
}

/// Parses a graph dump. Weights are recomputed from the probabilities and
/// must agree with the written ones.
pub fn graph_from_text(text: &str) -> Result<DetectorGraph> {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for (line, t) in tokens(text) {
        match (t[0], t.len()) {
            ("node", 6) => {
                let i: usize = parse(t[1], line)?;
                if i != nodes.len() {
                    bail!("line {line}: expected node {}, found {i}", nodes.len());
                }
                nodes.push(DetectorNode {
                    coord: Coord::new(parse(t[2], line)?, parse(t[3], line)?),
                    round: parse(t[4], line)?,
                    host: parse(t[5], line)?,
                });
            }
            ("edge", 6) => {
                let mask: u8 = parse(t[5], line)?;
                if mask > 1 {
                    bail!("line {line}: observable mask must be 0 or 1");
                }
                let w: f64 = parse(t[4], line)?;
                edges.push((parse(t[1], line)?, parse(t[2], line)?, parse::<f64>(t[3], line)?, mask == 1, w, line));
            }
            _ => bail!("line {line}: unrecognised `{}`", t.join(" ")),
        }
    }
    let g = DetectorGraph::from_edges(nodes, edges.iter().map(|&(a, b, p, o, _, _)| (a, b, p, o)))?;
    for (e, &(_, _, _, _, w, line)) in g.edges().iter().zip(&edges) {
        if e.weight != w {
            bail!("line {line}: weight {w} does not match probability {}", e.probability);
        }
    }
    Ok(g)
}

const SHOT_MAGIC: &[u8; 4] = b"RQS1";

fn write_bits<W: Write>(w: &mut W, bits: &[bool]) -> io::Result<()> {
    w.write_all(&(bits.len() as u32).to_le_bytes())?;
    let mut bytes = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        bytes[i / 8] |= u8::from(b) << (i % 8);
    }
    w.write_all(&bytes)
}

fn read_bits<R: Read>(r: &mut R) -> io::Result<Vec<bool>> {
    let mut len = [0u8; 4];
    r.read_exact(&mut len)?;
    let n = u32::from_le_bytes(len) as usize;
    let mut bytes = vec![0u8; n.div_ceil(8)];
    r.read_exact(&mut bytes)?;
    Ok((0..n).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect())
}

/// Writes the stream header.
pub fn write_shot_header<W: Write>(w: &mut W) -> io::Result<()> {
    w.write_all(SHOT_MAGIC)
}

pub fn write_shot<W: Write>(w: &mut W, shot: &ShotResult) -> io::Result<()> {
    write_bits(w, &shot.detection_events)?;
    write_bits(w, &shot.raw_measurements)?;
    w.write_all(&[u8::from(shot.observable_flip)])?;
    w.write_all(&shot.shot_start.to_le_bytes())
}

/// Encodes a whole stream (header plus shots) into memory.
pub fn encode_shots(shots: &[ShotResult]) -> Vec<u8> {
    let mut out = Vec::new();
    write_shot_header(&mut out).expect("writing to memory");
    for s in shots {
        write_shot(&mut out, s).expect("writing to memory");
    }
    out
}

pub fn decode_shots(mut bytes: &[u8]) -> Result<Vec<ShotResult>> {
    let mut magic = [0u8; 4];
    bytes.read_exact(&mut magic).context("missing stream header")?;
    if &magic != SHOT_MAGIC {
        bail!("not a shot stream");
    }
    let mut shots = Vec::new();
    while !bytes.is_empty() {
        let detection_events = read_bits(&mut bytes).context("truncated shot")?;
        let raw_measurements = read_bits(&mut bytes).context("truncated shot")?;
        let mut tail = [0u8; 9];
        bytes.read_exact(&mut tail).context("truncated shot")?;
        if tail[0] > 1 {
            bail!("observable byte must be 0 or 1");
        }
        shots.push(ShotResult {
            detection_events,
            raw_measurements,
            observable_flip: tail[0] == 1,
            shot_start: f64::from_le_bytes(tail[1..].try_into().expect("eight bytes")),
        });
    }
    Ok(shots)
}
