//! Intrinsic Pauli channels and the radiation fault model.
//!
//! Intrinsic noise is an SI1000-style model parameterised by one rate `p`;
//! within a category (e.g. the nine two-qubit `PP` terms) the mass is split
//! uniformly. Radiation suppresses the relaxation time as
//! `tau_rad(t) = tau1 * exp(10 * ((t - t_rad) / dt_rad - 1))` and a qubit at
//! distance `ds` from the impact, idle for `dt_g`, is erased with probability
//! `(1 - exp(-dt_g / tau_rad(t))) / (ds + 1)^2`.

use alloc::vec::Vec;

use thiserror::Error;

use crate::circuit::GateKind;
use crate::geometry::Coord;
use crate::pauli::Pauli;

/// Largest intrinsic rate for which every category stays a probability.
pub const MAX_INTRINSIC_P: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error("intrinsic rate {0} outside [0, 0.1]")]
    RateOutOfRange(f64),
    #[error("negative or non-finite input to the fault model: {0}")]
    NegativeInput(f64),
    #[error("radiation event needs positive duration and tau1")]
    BadEvent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    p: f64,
}

impl NoiseParams {
    pub fn new(p: f64) -> Result<Self, NoiseError> {
        if !(0.0..=MAX_INTRINSIC_P).contains(&p) {
            return Err(NoiseError::RateOutOfRange(p));
        }
        Ok(Self { p })
    }

    pub fn noiseless() -> Self {
        Self { p: 0.0 }
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// Gate classes of the intrinsic model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateClass {
    Q1,
    Q2,
    M,
    R,
}

impl GateClass {
    pub fn arity(self) -> usize {
        match self {
            GateClass::Q2 => 2,
            _ => 1,
        }
    }

    /// Total non-identity probability.
    pub fn error_mass(self, p: f64) -> f64 {
        match self {
            GateClass::Q1 => p / 10.0,
            GateClass::Q2 => p,
            GateClass::M => 5.0 * p,
            GateClass::R => 2.0 * p,
        }
    }

    /// Number of equally likely non-identity outcomes.
    pub fn outcomes(self) -> usize {
        match self {
            GateClass::Q2 => 15,
            _ => 3,
        }
    }
}

/// Where the intrinsic channel attaches relative to the op.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Placement {
    Before,
    After,
}

/// Intrinsic channels applied around an op of this kind: measurement noise
/// before the readout, reset noise after the reset, gate noise after the gate.
pub fn channels_for(kind: GateKind) -> &'static [(GateClass, Placement)] {
    match kind {
        GateKind::Reset => &[(GateClass::R, Placement::After)],
        GateKind::Hadamard | GateKind::T => &[(GateClass::Q1, Placement::After)],
        GateKind::Cnot => &[(GateClass::Q2, Placement::After)],
        GateKind::Measure => &[(GateClass::M, Placement::Before)],
        GateKind::MeasureReset => &[(GateClass::M, Placement::Before), (GateClass::R, Placement::After)],
    }
}

/// Non-identity Pauli tuple with index `k < class.outcomes()`. Two-qubit
/// outcomes enumerate `(a, b)` over `{I,X,Y,Z}^2 \ {II}` in lexicographic order.
pub fn outcome_paulis(class: GateClass, k: usize) -> [Pauli; 2] {
    const P: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    match class {
        GateClass::Q2 => {
            let idx = k + 1;
            [P[idx / 4], P[idx % 4]]
        }
        _ => [P[k + 1], Pauli::I],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliChannel {
    pub arity: usize,
    pub entries: Vec<([Pauli; 2], f64)>,
}

impl PauliChannel {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }
}

pub fn intrinsic_channel(class: GateClass, p: f64) -> Result<PauliChannel, NoiseError> {
    NoiseParams::new(p)?;
    let mass = class.error_mass(p);
    let k = class.outcomes();
    let mut entries = Vec::with_capacity(k + 1);
    entries.push(([Pauli::I, Pauli::I], 1.0 - mass));
    for i in 0..k {
        entries.push((outcome_paulis(class, i), mass / k as f64));
    }
    Ok(PauliChannel {
        arity: class.arity(),
        entries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiationEvent {
    pub center: Coord,
    pub t_rad: f64,
    pub delta_t_rad: f64,
    pub tau1: f64,
}

impl RadiationEvent {
    pub fn new(center: Coord, t_rad: f64, delta_t_rad: f64, tau1: f64) -> Result<Self, NoiseError> {
        if !(delta_t_rad > 0.0 && tau1 > 0.0 && t_rad.is_finite()) {
            return Err(NoiseError::BadEvent);
        }
        Ok(Self {
            center,
            t_rad,
            delta_t_rad,
            tau1,
        })
    }

    pub fn is_active(&self, t: f64) -> bool {
        t >= self.t_rad && t <= self.t_rad + self.delta_t_rad
    }

    pub fn end(&self) -> f64 {
        self.t_rad + self.delta_t_rad
    }
}

pub fn tau_rad(t: f64, event: &RadiationEvent) -> f64 {
    event.tau1 * libm::exp(10.0 * ((t - event.t_rad) / event.delta_t_rad - 1.0))
}

/// Inverse-square spatial damping.
pub fn spatial_factor(delta_s: f64) -> f64 {
    let r = delta_s + 1.0;
    1.0 / (r * r)
}

/// Probability of decay during an idle gap of `delta_t_g` ending at `t`.
pub fn temporal_factor(delta_t_g: f64, t: f64, event: &RadiationEvent) -> f64 {
    -libm::expm1(-delta_t_g / tau_rad(t, event))
}

/// Radiation erasure probability of one qubit before one op. Zero outside
/// the event window.
pub fn fault_probability(
    delta_s: f64,
    delta_t_g: f64,
    t: f64,
    event: &RadiationEvent,
) -> Result<f64, NoiseError> {
    if !(delta_s >= 0.0) {
        return Err(NoiseError::NegativeInput(delta_s));
    }
    if !(delta_t_g >= 0.0) {
        return Err(NoiseError::NegativeInput(delta_t_g));
    }
    if !event.is_active(t) {
        return Ok(0.0);
    }
    Ok(spatial_factor(delta_s) * temporal_factor(delta_t_g, t, event))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TAU1: f64 = 85e-6;

    fn event() -> RadiationEvent {
        RadiationEvent::new(Coord::new(0.0, 0.0), 0.0, 1e-3, TAU1).unwrap()
    }

    #[test]
    fn q1_noiseless_is_identity() {
        let ch = intrinsic_channel(GateClass::Q1, 0.0).unwrap();
        assert_eq!(ch.entries[0], ([Pauli::I, Pauli::I], 1.0));
        assert!(ch.entries[1..].iter().all(|(_, p)| *p == 0.0));
    }

    #[test]
    fn q2_table_row() {
        let p = 1e-5;
        let ch = intrinsic_channel(GateClass::Q2, p).unwrap();
        assert_eq!(ch.entries.len(), 16);
        assert_eq!(ch.entries[0].1, 1.0 - p);
        for (_, q) in &ch.entries[1..] {
            assert_eq!(*q, p / 15.0);
        }
        assert!((ch.total() - 1.0).abs() <= f64::EPSILON);
        // category masses: IP = p/5, PI = p/5, PP = 3p/5
        let mass = |pred: fn(&[Pauli; 2]) -> bool| -> f64 {
            ch.entries[1..].iter().filter(|(ps, _)| pred(ps)).map(|(_, q)| q).sum()
        };
        assert!((mass(|ps| ps[0] == Pauli::I) - p / 5.0).abs() < 1e-18);
        assert!((mass(|ps| ps[1] == Pauli::I) - p / 5.0).abs() < 1e-18);
        assert!((mass(|ps| ps[0] != Pauli::I && ps[1] != Pauli::I) - 3.0 * p / 5.0).abs() < 1e-18);
    }

    #[test]
    fn measurement_table_row() {
        let ch = intrinsic_channel(GateClass::M, 1e-3).unwrap();
        assert!((ch.entries[0].1 - 0.995).abs() < 1e-15);
        for (_, q) in &ch.entries[1..] {
            assert!((q - 5e-3 / 3.0).abs() < 1e-18);
        }
        let r = intrinsic_channel(GateClass::R, 1e-3).unwrap();
        assert!((r.entries[0].1 - 0.998).abs() < 1e-15);
    }

    #[test]
    fn rate_out_of_range() {
        assert!(intrinsic_channel(GateClass::Q1, 0.2).is_err());
        assert!(intrinsic_channel(GateClass::Q1, -1e-9).is_err());
        assert!(NoiseParams::new(f64::NAN).is_err());
    }

    #[test]
    fn tau_rad_values() {
        let e = event();
        assert_eq!(tau_rad(e.t_rad + e.delta_t_rad, &e), TAU1);
        let start = tau_rad(0.0, &e);
        assert!((start - 85e-6 * (-10f64).exp()).abs() < 1e-20);
        assert!((start - 3.859e-9).abs() < 1e-12);
        let mid = tau_rad(0.5e-3, &e);
        assert!((mid - TAU1 * (-5f64).exp()).abs() < 1e-18);
        assert!(start < mid && mid < TAU1);
    }

    #[test]
    fn fault_probability_examples() {
        let e = event();
        let t = 0.3e-3;
        assert_eq!(fault_probability(0.0, 0.0, t, &e).unwrap(), 0.0);
        let tau = tau_rad(t, &e);
        let unit = fault_probability(0.0, tau, t, &e).unwrap();
        assert!((unit - (1.0 - (-1f64).exp())).abs() < 1e-12);
        let dt = 40e-9;
        let p0 = fault_probability(0.0, dt, t, &e).unwrap();
        let p1 = fault_probability(1.0, dt, t, &e).unwrap();
        assert_eq!(p1, p0 / 4.0);
    }

    #[test]
    fn fault_probability_window_and_errors() {
        let e = event();
        assert_eq!(fault_probability(0.0, 1e-7, -1e-9, &e).unwrap(), 0.0);
        assert_eq!(fault_probability(0.0, 1e-7, 1.1e-3, &e).unwrap(), 0.0);
        assert!(fault_probability(-1.0, 1e-7, 0.0, &e).is_err());
        assert!(fault_probability(0.0, -1e-7, 0.0, &e).is_err());
        assert!(RadiationEvent::new(Coord::default(), 0.0, 0.0, TAU1).is_err());
    }

    proptest! {
        #[test]
        fn channels_are_distributions(p in 0.0f64..=0.1) {
            for class in [GateClass::Q1, GateClass::Q2, GateClass::M, GateClass::R] {
                let ch = intrinsic_channel(class, p).unwrap();
                prop_assert!(ch.entries.iter().all(|(_, q)| *q >= 0.0));
                prop_assert!((ch.total() - 1.0).abs() <= 4.0 * f64::EPSILON);
            }
        }

        #[test]
        fn monotone_in_space_time_and_idle(
            ds in 0.0f64..20.0, extra in 0.0f64..5.0,
            dt in 0.0f64..1e-6, dt_extra in 0.0f64..1e-6,
            t in 0.0f64..0.9e-3, t_extra in 0.0f64..0.1e-3,
        ) {
            let e = event();
            let base = fault_probability(ds, dt, t, &e).unwrap();
            prop_assert!((0.0..=1.0).contains(&base));
            prop_assert!(fault_probability(ds + extra, dt, t, &e).unwrap() <= base);
            prop_assert!(fault_probability(ds, dt + dt_extra, t, &e).unwrap() >= base);
            prop_assert!(fault_probability(ds, dt, t + t_extra, &e).unwrap() <= base);
        }

        #[test]
        fn equidistant_qubits_match(angle in 0.0f64..core::f64::consts::TAU, r in 0.0f64..10.0) {
            let e = event();
            let a = Coord::new(r, 0.0);
            let b = Coord::new(r * angle.cos(), r * angle.sin());
            let pa = fault_probability(a.dist(e.center), 50e-9, 1e-4, &e).unwrap();
            let pb = fault_probability(b.dist(e.center), 50e-9, 1e-4, &e).unwrap();
            prop_assert!((pa - pb).abs() <= 1e-12 * pa.max(1e-300));
        }
    }
}
