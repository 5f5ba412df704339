//! Full stabiliser-tableau simulation (Aaronson-Gottesman), used as the
//! correctness oracle for the Pauli-frame sampler.

use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::circuit::{GateKind, ScheduledCircuit};
use crate::frame_sim::{
    detectors_from_flips, ErrorSampler, ErrorTape, QubitTimeline, ShotResult, SimError,
};
use crate::noise::{NoiseParams, Placement, RadiationEvent};
use crate::pauli::Pauli;

/// A Pauli (phase dropped) on `n` qubits in bit-packed form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliString {
    pub x: Vec<u64>,
    pub z: Vec<u64>,
}

impl PauliString {
    pub fn identity(words: usize) -> Self {
        Self {
            x: vec![0; words],
            z: vec![0; words],
        }
    }

    pub fn get(&self, q: usize) -> Pauli {
        let (w, b) = (q / 64, q % 64);
        Pauli::from_bits(self.x[w] >> b & 1 == 1, self.z[w] >> b & 1 == 1)
    }

    /// Qubits acted on non-trivially.
    pub fn support(&self) -> Vec<(usize, Pauli)> {
        let mut out = Vec::new();
        for w in 0..self.x.len() {
            let mut bits = self.x[w] | self.z[w];
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let q = 64 * w + b;
                out.push((q, self.get(q)));
            }
        }
        out
    }
}

/// Stabiliser tableau: rows `0..n` destabilisers, `n..2n` stabilisers, one
/// scratch row at `2n`.
#[derive(Debug, Clone)]
pub struct Tableau {
    n: usize,
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    r: Vec<bool>,
}

/// Outcome of a Z measurement. For random outcomes `anticommuting` is the
/// stabiliser generator that flips the result.
#[derive(Debug, Clone)]
pub struct MeasureOutcome {
    pub value: bool,
    pub anticommuting: Option<PauliString>,
}

impl Tableau {
    /// The all-|0> state.
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        let rows = 2 * n + 1;
        let mut t = Self {
            n,
            words,
            x: vec![0; rows * words],
            z: vec![0; rows * words],
            r: vec![false; rows],
        };
        for i in 0..n {
            t.x[i * words + i / 64] |= 1 << (i % 64);
            t.z[(n + i) * words + i / 64] |= 1 << (i % 64);
        }
        t
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    #[inline]
    fn xb(&self, row: usize, q: usize) -> bool {
        self.x[row * self.words + q / 64] >> (q % 64) & 1 == 1
    }

    #[inline]
    fn zb(&self, row: usize, q: usize) -> bool {
        self.z[row * self.words + q / 64] >> (q % 64) & 1 == 1
    }

    fn row(&self, row: usize) -> PauliString {
        let s = row * self.words;
        PauliString {
            x: self.x[s..s + self.words].to_vec(),
            z: self.z[s..s + self.words].to_vec(),
        }
    }

    pub fn hadamard(&mut self, q: usize) {
        let (w, m) = (q / 64, 1u64 << (q % 64));
        for row in 0..2 * self.n {
            let i = row * self.words + w;
            let (xv, zv) = (self.x[i] & m, self.z[i] & m);
            if xv != 0 && zv != 0 {
                self.r[row] ^= true;
            }
            self.x[i] = (self.x[i] & !m) | zv;
            self.z[i] = (self.z[i] & !m) | xv;
        }
    }

    pub fn cnot(&mut self, c: usize, t: usize) {
        for row in 0..2 * self.n {
            let (xc, zc, xt, zt) = (self.xb(row, c), self.zb(row, c), self.xb(row, t), self.zb(row, t));
            if xc && zt && (xt == zc) {
                self.r[row] ^= true;
            }
            if xc {
                self.x[row * self.words + t / 64] ^= 1 << (t % 64);
            }
            if zt {
                self.z[row * self.words + c / 64] ^= 1 << (c % 64);
            }
        }
    }

    /// Applies a Pauli error: flips the sign of every row it anticommutes with.
    pub fn apply_pauli(&mut self, q: usize, p: Pauli) {
        for row in 0..2 * self.n {
            let anti = (p.x_bit() && self.zb(row, q)) ^ (p.z_bit() && self.xb(row, q));
            if anti {
                self.r[row] ^= true;
            }
        }
    }

    fn rowsum(&mut self, h: usize, i: usize) {
        let w = self.words;
        let mut phase: i64 = 2 * (self.r[h] as i64) + 2 * (self.r[i] as i64);
        for k in 0..w {
            let (x1, z1) = (self.x[i * w + k], self.z[i * w + k]);
            let (x2, z2) = (self.x[h * w + k], self.z[h * w + k]);
            // g(x1,z1,x2,z2) summed bitwise: +1 / -1 contributions
            let y1 = x1 & z1;
            let xo = x1 & !z1;
            let zo = !x1 & z1;
            let plus = (y1 & z2 & !x2) | (xo & x2 & z2) | (zo & x2 & !z2);
            let minus = (y1 & x2 & !z2) | (xo & !x2 & z2) | (zo & x2 & z2);
            phase += plus.count_ones() as i64 - minus.count_ones() as i64;
            self.x[h * w + k] = x1 ^ x2;
            self.z[h * w + k] = z1 ^ z2;
        }
        self.r[h] = phase.rem_euclid(4) == 2;
    }

    fn clear_row(&mut self, row: usize) {
        let s = row * self.words;
        self.x[s..s + self.words].fill(0);
        self.z[s..s + self.words].fill(0);
        self.r[row] = false;
    }

    fn copy_row(&mut self, dst: usize, src: usize) {
        let w = self.words;
        self.x.copy_within(src * w..src * w + w, dst * w);
        self.z.copy_within(src * w..src * w + w, dst * w);
        self.r[dst] = self.r[src];
    }

    /// Z-basis measurement; `coin` supplies the value of a random outcome.
    pub fn measure(&mut self, q: usize, coin: impl FnOnce() -> bool) -> MeasureOutcome {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&row| self.xb(row, q)) {
            let anticommuting = self.row(p);
            for row in 0..2 * n {
                if row != p && self.xb(row, q) {
                    self.rowsum(row, p);
                }
            }
            self.copy_row(p - n, p);
            self.clear_row(p);
            self.z[p * self.words + q / 64] |= 1 << (q % 64);
            let value = coin();
            self.r[p] = value;
            MeasureOutcome {
                value,
                anticommuting: Some(anticommuting),
            }
        } else {
            let scratch = 2 * n;
            self.clear_row(scratch);
            for i in 0..n {
                if self.xb(i, q) {
                    self.rowsum(scratch, i + n);
                }
            }
            MeasureOutcome {
                value: self.r[scratch],
                anticommuting: None,
            }
        }
    }

    /// Measure-and-flip reset to |0>.
    pub fn reset(&mut self, q: usize, coin: impl FnOnce() -> bool) -> MeasureOutcome {
        let out = self.measure(q, coin);
        if out.value {
            self.apply_pauli(q, Pauli::X);
        }
        out
    }

    /// Symplectic sanity: stabilisers commute pairwise, each destabiliser
    /// anticommutes only with its own stabiliser.
    pub fn is_consistent(&self) -> bool {
        let sym = |a: usize, b: usize| -> bool {
            let w = self.words;
            let mut acc = 0u32;
            for k in 0..w {
                acc ^= ((self.x[a * w + k] & self.z[b * w + k]) ^ (self.z[a * w + k] & self.x[b * w + k]))
                    .count_ones()
                    & 1;
            }
            acc == 1
        };
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                if sym(n + i, n + j) {
                    return false;
                }
                if sym(i, j) {
                    return false;
                }
                if sym(i, n + j) != (i == j) {
                    return false;
                }
            }
        }
        true
    }
}

fn coin_from(rng: &mut impl RngCore) -> bool {
    rng.next_u32() & 1 == 1
}

/// Replays error tapes on a noisy tableau in lock-step with a noiseless
/// reference that shares the same random-outcome coins; records are reported
/// as differences from the reference.
#[derive(Debug, Clone)]
pub struct TableauSimulator<'c> {
    circuit: &'c ScheduledCircuit,
}

impl<'c> TableauSimulator<'c> {
    pub fn new(circuit: &'c ScheduledCircuit) -> Result<Self, SimError> {
        if let Some(i) = circuit.ops.iter().position(|o| !o.kind.is_clifford()) {
            return Err(SimError::NonClifford { op: i });
        }
        Ok(Self { circuit })
    }

    pub fn run_tape(&self, tape: &ErrorTape, coins: &mut impl RngCore, shot_start: f64) -> ShotResult {
        let c = self.circuit;
        let mut noisy = Tableau::new(c.qubit_count);
        let mut reference = Tableau::new(c.qubit_count);
        let mut flips = Vec::with_capacity(c.measurement_count());
        let entries = tape.entries();
        let mut cursor = 0usize;
        for (i, op) in c.ops.iter().enumerate() {
            while cursor < entries.len() && entries[cursor].op as usize == i && entries[cursor].placement == Placement::Before {
                let e = entries[cursor];
                noisy.apply_pauli(e.qubit as usize, e.pauli);
                cursor += 1;
            }
            let t = op.targets();
            match op.kind {
                GateKind::Hadamard => {
                    noisy.hadamard(t[0]);
                    reference.hadamard(t[0]);
                }
                GateKind::Cnot => {
                    noisy.cnot(t[0], t[1]);
                    reference.cnot(t[0], t[1]);
                }
                GateKind::Measure | GateKind::MeasureReset | GateKind::Reset => {
                    let coin = coin_from(coins);
                    let q = t[0];
                    let (a, b) = if op.kind == GateKind::Reset {
                        (noisy.reset(q, || coin).value, reference.reset(q, || coin).value)
                    } else {
                        (noisy.measure(q, || coin).value, reference.measure(q, || coin).value)
                    };
                    if op.kind.produces_record() {
                        flips.push(a ^ b);
                    }
                    if op.kind == GateKind::MeasureReset {
                        let coin = coin_from(coins);
                        noisy.reset(q, || coin);
                        reference.reset(q, || coin);
                    }
                }
                GateKind::T => unreachable!("rejected at construction"),
            }
            while cursor < entries.len() && entries[cursor].op as usize == i {
                let e = entries[cursor];
                noisy.apply_pauli(e.qubit as usize, e.pauli);
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

/// Samples errors from the noise model and runs them through the tableau.
/// The random stream is split: errors first, then measurement coins.
pub fn tableau_sample_shot<R: RngCore>(
    circuit: &ScheduledCircuit,
    noise: &NoiseParams,
    events: &[RadiationEvent],
    rng: &mut R,
    shot_start: f64,
) -> Result<ShotResult, SimError> {
    let sim = TableauSimulator::new(circuit)?;
    let sampler = ErrorSampler::new(circuit, *noise);
    let mut timeline = QubitTimeline::new(circuit.qubit_count, shot_start);
    let tape = sampler.sample_tape(events, rng, shot_start, &mut timeline);
    Ok(sim.run_tape(&tape, rng, shot_start))
}
