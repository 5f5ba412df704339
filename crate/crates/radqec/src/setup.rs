//! Chips, placed codes and impact loci for the scenarios.

use anyhow::{bail, Context, Result};
use radqec_core::chip::DEFAULT_TAU1;
use radqec_core::surface_code::multi_code_embed;
use radqec_core::{
    build_graph, build_grid_chip, build_rotated_surface_code, device_avg_min_dist, surface_code::map_code, Basis, Chip,
    Coord, DetectorGraph, NoiseParams, RadiationEvent, ScheduledCircuit,
};

use crate::config::{Locus, RadiationConfig};

/// One code placed on a chip, with its decoding graph.
#[derive(Debug, Clone)]
pub struct CodeSetup {
    pub distance: usize,
    pub rounds: usize,
    pub basis: Basis,
    pub circuit: ScheduledCircuit,
    pub graph: DetectorGraph,
    pub noise: NoiseParams,
    pub avg_min_dist: f64,
    /// Centre of the patch in chip coordinates.
    pub centre: Coord,
}

impl CodeSetup {
    /// A single code mapped onto a grid chip of `chip` cells (default: the
    /// smallest grid that holds it).
    pub fn single(distance: usize, rounds: usize, basis: Basis, p: f64, chip: Option<(usize, usize)>) -> Result<(Chip, Self)> {
        let (rows, cols) = chip.unwrap_or((distance, distance));
        let chip = build_grid_chip(rows, cols);
        let (layout, circuit) = build_rotated_surface_code(distance, rounds, basis)?;
        let mapping = map_code(&chip, &layout)?;
        let circuit = circuit.placed(&chip, &mapping);
        let setup = Self::finish(distance, rounds, basis, p, &chip, circuit)?;
        Ok((chip, setup))
    }

    fn finish(distance: usize, rounds: usize, basis: Basis, p: f64, chip: &Chip, circuit: ScheduledCircuit) -> Result<Self> {
        let noise = NoiseParams::new(p)?;
        let graph = build_graph(&circuit, &noise)?;
        let n = distance * distance;
        let centre = circuit.qubit_coords[..n]
            .iter()
            .fold(Coord::default(), |acc, c| acc + *c);
        let centre = Coord::new(centre.x / n as f64, centre.y / n as f64);
        Ok(Self {
            distance,
            rounds,
            basis,
            avg_min_dist: device_avg_min_dist(chip)?,
            circuit,
            graph,
            noise,
            centre,
        })
    }

    /// Wall-clock length of one shot.
    pub fn shot_duration(&self) -> f64 {
        self.circuit.total_duration
    }
}

/// Names of the four codes of the multi-code chip, in placement order.
pub const QUADRANTS: [&str; 4] = ["north", "east", "west", "south"];

/// Four codes in the North, East, West and South quadrants of a square grid
/// chip. North is the top-left patch in chip coordinates (y grows south).
pub fn multi_code(distance: usize, rounds: usize, basis: Basis, p: f64) -> Result<(Chip, Vec<CodeSetup>)> {
    let side = 2 * distance + 1;
    let chip = build_grid_chip(side, side);
    let far = (2 * distance + 2) as f64;
    let offsets = [
        Coord::new(0.0, 0.0),
        Coord::new(far, 0.0),
        Coord::new(0.0, far),
        Coord::new(far, far),
    ];
    let placed = multi_code_embed(&chip, distance, basis, &offsets)?;
    let (_, base) = build_rotated_surface_code(distance, rounds, basis)?;
    let mut codes = Vec::with_capacity(4);
    for (_, mapping) in &placed {
        let circuit = base.placed(&chip, mapping);
        codes.push(CodeSetup::finish(distance, rounds, basis, p, &chip, circuit)?);
    }
    Ok((chip, codes))
}

/// Resolves a locus on a chip hosting one code. Compass points follow the
/// chip drawn rotated by 45 degrees: North is the corner at the minimum of
/// both coordinates, West the corner at minimum x and maximum y, and the
/// intermediate directions are edge midpoints.
pub fn resolve_single(locus: &Locus, chip: &Chip) -> Result<Coord> {
    let (lo, hi) = chip.bounding_box();
    let mid = Coord::new((lo.x + hi.x) / 2.0, (lo.y + hi.y) / 2.0);
    let name = match locus {
        Locus::Point([x, y]) => return Ok(Coord::new(*x, *y)),
        Locus::Label(s) => s.to_ascii_lowercase(),
    };
    Ok(match name.as_str() {
        "central" | "centre" | "center" => mid,
        "north" => lo,
        "east" => Coord::new(hi.x, lo.y),
        "west" => Coord::new(lo.x, hi.y),
        "south" => hi,
        "north-west" => Coord::new(lo.x, mid.y),
        "north-east" => Coord::new(mid.x, lo.y),
        "south-west" => Coord::new(mid.x, hi.y),
        "south-east" => Coord::new(hi.x, mid.y),
        other => bail!("unknown locus `{other}`"),
    })
}

/// Resolves a locus on the four-code chip: a quadrant name is that code's
/// centre, two joined names the midpoint of two code centres, and Central
/// the chip centre.
pub fn resolve_multi(locus: &Locus, chip: &Chip, codes: &[CodeSetup]) -> Result<Coord> {
    let name = match locus {
        Locus::Point([x, y]) => return Ok(Coord::new(*x, *y)),
        Locus::Label(s) => s.to_ascii_lowercase(),
    };
    let centre_of = |q: &str| QUADRANTS.iter().position(|n| *n == q).map(|i| codes[i].centre);
    if matches!(name.as_str(), "central" | "centre" | "center") {
        let (lo, hi) = chip.bounding_box();
        return Ok(Coord::new((lo.x + hi.x) / 2.0, (lo.y + hi.y) / 2.0));
    }
    if let Some(c) = centre_of(&name) {
        return Ok(c);
    }
    if let Some((a, b)) = name.split_once('-') {
        if let (Some(a), Some(b)) = (centre_of(a), centre_of(b)) {
            return Ok(Coord::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0));
        }
    }
    bail!("unknown locus `{name}`")
}

pub fn radiation_event(cfg: &RadiationConfig, center: Coord) -> Result<RadiationEvent> {
    RadiationEvent::new(center, cfg.t_rad, cfg.duration, DEFAULT_TAU1).with_context(|| format!("radiation at {}", cfg.locus.label()))
}
