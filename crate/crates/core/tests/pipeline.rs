//! End-to-end checks across simulator, identification and decoders.

use proptest::prelude::*;
use radqec_core::chip::{build_grid_chip, device_avg_min_dist, DEFAULT_TAU1};
use radqec_core::decoders::MwpmDecoder;
use radqec_core::frame_sim::FrameSimulator;
use radqec_core::radmatching::{InversionPolicy, RadMatcher};
use radqec_core::rei::SyndromeWindow;
use radqec_core::{
    build_graph, build_rotated_surface_code, Basis, Coord, NoiseParams, QubitTimeline, RadiationEvent, ScheduledCircuit,
};
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

fn code(d: usize, basis: Basis) -> ScheduledCircuit {
    build_rotated_surface_code(d, d, basis).unwrap().1
}

#[test]
fn noiseless_memory_never_fails() {
    for basis in [Basis::X, Basis::Z] {
        let c = code(5, basis);
        let g = build_graph(&c, &NoiseParams::new(1e-3).unwrap()).unwrap();
        let sim = FrameSimulator::new(&c, NoiseParams::noiseless()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut tl = QubitTimeline::new(c.qubit_count, 0.0);
        let mut dec = MwpmDecoder::new();
        for _ in 0..20 {
            let r = sim.sample_shot(&[], &mut rng, 0.0, &mut tl);
            assert_eq!(r.defect_count(), 0);
            assert!(!r.observable_flip);
            assert!(!dec.decode(&g, &r.detection_events).predicted_observable_flip);
        }
    }
}

#[test]
fn detected_centre_tracks_a_central_impact() {
    let c = code(9, Basis::Z);
    let chip = build_grid_chip(9, 9);
    let pitch = device_avg_min_dist(&chip).unwrap();
    let locus = Coord::new(9.0, 9.0);
    let event = RadiationEvent::new(locus, 0.0, 1e-3, DEFAULT_TAU1).unwrap();
    let sim = FrameSimulator::new(&c, NoiseParams::new(1e-5).unwrap()).unwrap();
    let mut w = SyndromeWindow::for_circuit(20, 9, &c, pitch).unwrap();
    for seed in 0..4 {
        w.clear();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tl = QubitTimeline::new(c.qubit_count, 0.0);
        for shot in 0..40 {
            let r = sim.sample_shot(&[event], &mut rng, shot as f64 * c.total_duration, &mut tl);
            let det = w.push_and_detect(&r.detection_events).unwrap();
            if shot >= 20 {
                let det = det.expect("full-intensity impact is identified");
                assert!(det.center.dist(locus) <= 2.0 * pitch, "centre {:?}", det.center);
                assert!(det.contains(locus));
            }
        }
    }
}

#[test]
fn radmatching_equals_matching_without_radiation() {
    let c = code(5, Basis::X);
    let noise = NoiseParams::new(1e-5).unwrap();
    let g = build_graph(&c, &noise).unwrap();
    let sim = FrameSimulator::new(&c, noise).unwrap();
    let w = SyndromeWindow::for_circuit(20, 5, &c, std::f64::consts::SQRT_2).unwrap();
    let mut rm = RadMatcher::with_window(w, InversionPolicy::Invert, &c);
    let mut mwpm = MwpmDecoder::prediction_only();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut tl = QubitTimeline::new(c.qubit_count, 0.0);
    let shots = 4000;
    let mut same = 0;
    for k in 0..shots {
        let r = sim.sample_shot(&[], &mut rng, k as f64 * c.total_duration, &mut tl);
        let a = rm.decode(&g, &r.detection_events).unwrap();
        let b = mwpm.decode(&g, &r.detection_events);
        same += usize::from(a.detection.is_none() && a.result.predicted_observable_flip == b.predicted_observable_flip);
    }
    assert!(same as f64 >= 0.999 * shots as f64, "{same}/{shots}");
}

#[test]
fn radiation_raises_defect_counts_near_the_locus() {
    let c = code(7, Basis::Z);
    let near = RadiationEvent::new(Coord::new(7.0, 7.0), 0.0, 1e-3, DEFAULT_TAU1).unwrap();
    let far = RadiationEvent::new(Coord::new(400.0, 400.0), 0.0, 1e-3, DEFAULT_TAU1).unwrap();
    let sim = FrameSimulator::new(&c, NoiseParams::new(1e-5).unwrap()).unwrap();
    let count = |e: RadiationEvent| -> usize {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut tl = QubitTimeline::new(c.qubit_count, 0.0);
        (0..10)
            .map(|k| sim.sample_shot(&[e], &mut rng, k as f64 * c.total_duration, &mut tl).defect_count())
            .sum()
    };
    assert!(count(near) > 10 * count(far).max(1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn identification_is_translation_equivariant(dx in -20i32..20, dy in -20i32..20, seed in 0u64..1000) {
        let c = code(5, Basis::Z);
        let offset = Coord::new(2.0 * dx as f64, 2.0 * dy as f64);
        let moved = c.translated(offset);
        let event = RadiationEvent::new(Coord::new(5.0, 5.0), 0.0, 1e-3, DEFAULT_TAU1).unwrap();
        let sim = FrameSimulator::new(&c, NoiseParams::new(1e-5).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tl = QubitTimeline::new(c.qubit_count, 0.0);
        let mut a = SyndromeWindow::for_circuit(10, 5, &c, std::f64::consts::SQRT_2).unwrap();
        let mut b = SyndromeWindow::for_circuit(10, 5, &moved, std::f64::consts::SQRT_2).unwrap();
        for k in 0..15 {
            let r = sim.sample_shot(&[event], &mut rng, k as f64 * c.total_duration, &mut tl);
            let da = a.push_and_detect(&r.detection_events).unwrap();
            let db = b.push_and_detect(&r.detection_events).unwrap();
            prop_assert_eq!(da.is_some(), db.is_some());
            if let (Some(da), Some(db)) = (da, db) {
                prop_assert!((da.center.x + offset.x - db.center.x).abs() < 1e-9);
                prop_assert!((da.center.y + offset.y - db.center.y).abs() < 1e-9);
                prop_assert!((da.radius - db.radius).abs() < 1e-9);
            }
        }
    }
}
