//! Radiation-aware quantum error correction for rotated surface codes.
//!
//! The crate models a superconducting chip with diagonal couplers, builds
//! scheduled rotated-surface-code memory circuits, samples them under an
//! intrinsic Pauli noise model plus time- and space-dependent radiation
//! faults, and decodes the resulting syndromes. On top of the baseline
//! matching and union-find decoders sits a sliding-window radiation event
//! identifier ([`rei`]) and the radiation-aware matcher built on it
//! ([`radmatching`]).
//!
//! Everything here is `no_std` with `alloc`; file formats, timing and the
//! scenario runner live in the `radqec` companion crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod blossom;
pub mod chip;
pub mod circuit;
pub mod decoders;
pub mod detector_graph;
pub mod frame_sim;
pub mod geometry;
pub mod noise;
pub mod pauli;
pub mod radmatching;
pub mod rei;
pub mod surface_code;
pub mod tableau;

pub use chip::{build_grid_chip, device_avg_min_dist, map_circuit, Chip, GateTimings, Mapping};
pub use circuit::{Basis, GateKind, Op, ScheduledCircuit};
pub use decoders::{mwpm_decode, union_find_decode, DecodeResult};
pub use detector_graph::{build_graph, shortest_path_weights, DetectorGraph};
pub use frame_sim::{sample_shot, FrameSimulator, QubitTimeline, ShotResult};
pub use geometry::Coord;
pub use noise::{fault_probability, intrinsic_channel, tau_rad, NoiseParams, RadiationEvent};
pub use radmatching::{radmatch_decode, RadMatchConfig, RadMatcher};
pub use rei::{affected_detectors, Detection, SyndromeWindow};
pub use surface_code::{build_rotated_surface_code, qubit_to_stabilisers, CodeLayout};
pub use tableau::{tableau_sample_shot, TableauSimulator};
