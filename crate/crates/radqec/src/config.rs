//! Scenario configuration.
//!
//! Configs are TOML. Every scenario ships a built-in default; a user file is
//! merged over it key by key, so a file only needs the keys it changes.
//!
//! ```toml
//! seed = 7
//! samples = 128          # independent shot sequences
//! threads = 1
//! out = "results"
//! decoders = ["mwpm", "radmatching"]
//!
//! [code]
//! distances = [9]
//! rounds = 0             # 0 means rounds = distance
//! bases = ["z"]
//! p = 1e-5
//!
//! [chip]                 # optional; by default the chip fits the code
//! rows = 9
//! cols = 9
//!
//! [[radiation]]
//! locus = "central"      # or [x, y] in chip coordinates
//! t_rad = 0.0            # seconds
//! duration = 1e-3
//!
//! [time]
//! horizon = 1.2e-3       # seconds simulated per sequence
//! stride = 1             # decode every stride-th shot
//! window = 20            # syndromes held by the identification window
//!
//! [overhead]
//! distances = [5, 9, 13, 19]
//! calls = 20
//! density = 0.25
//! ```

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use radqec_core::Basis;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisName {
    X,
    Z,
}

impl BasisName {
    pub fn basis(self) -> Basis {
        match self {
            BasisName::X => Basis::X,
            BasisName::Z => Basis::Z,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BasisName::X => "x",
            BasisName::Z => "z",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderKind {
    Mwpm,
    UnionFind,
    Radmatching,
}

impl DecoderKind {
    pub fn label(self) -> &'static str {
        match self {
            DecoderKind::Mwpm => "mwpm",
            DecoderKind::UnionFind => "union_find",
            DecoderKind::Radmatching => "radmatching",
        }
    }
}

/// Impact position: a named locus resolved against the chip, or explicit
/// chip coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Locus {
    Label(String),
    Point([f64; 2]),
}

impl Locus {
    pub fn label(&self) -> String {
        match self {
            Locus::Label(s) => s.clone(),
            Locus::Point([x, y]) => format!("({x};{y})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiationConfig {
    pub locus: Locus,
    #[serde(default)]
    pub t_rad: f64,
    #[serde(default = "default_duration")]
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeConfig {
    pub distances: Vec<usize>,
    pub rounds: usize,
    pub bases: Vec<BasisName>,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChipConfig {
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub horizon: f64,
    pub stride: usize,
    pub window: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverheadConfig {
    pub distances: Vec<usize>,
    pub calls: usize,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: Option<u64>,
    pub samples: usize,
    pub threads: usize,
    pub out: PathBuf,
    pub decoders: Vec<DecoderKind>,
    pub code: CodeConfig,
    #[serde(default)]
    pub chip: Option<ChipConfig>,
    #[serde(default)]
    pub radiation: Vec<RadiationConfig>,
    pub time: TimeConfig,
    pub overhead: OverheadConfig,
}

fn default_duration() -> f64 {
    1e-3
}

/// Keys shared by every scenario.
const BASE: &str = r#"
samples = 128
threads = 1
out = "results"
decoders = ["mwpm"]

[code]
distances = [9]
rounds = 0
bases = ["z"]
p = 1e-5

[time]
horizon = 1.2e-3
stride = 1
window = 20

[overhead]
distances = [5, 9, 13, 19]
calls = 20
density = 0.25
"#;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    DistanceSweep,
    PositionStudy,
    Overhead,
    MultiCode,
    DecoderCompare,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::DistanceSweep => "distance-sweep",
            Scenario::PositionStudy => "position-study",
            Scenario::Overhead => "overhead",
            Scenario::MultiCode => "multi-code",
            Scenario::DecoderCompare => "decoder-compare",
        }
    }

    fn overrides(self) -> &'static str {
        match self {
            Scenario::DistanceSweep => {
                r#"
                [code]
                distances = [5, 9, 13]
                bases = ["x", "z"]
                [[radiation]]
                locus = "central"
                "#
            }
            Scenario::PositionStudy => {
                r#"
                [code]
                distances = [15]
                [[radiation]]
                locus = "central"
                [[radiation]]
                locus = "north-west"
                [[radiation]]
                locus = "west"
                "#
            }
            Scenario::Overhead => "",
            Scenario::MultiCode => {
                r#"
                [code]
                distances = [11]
                [time]
                stride = 8
                [[radiation]]
                locus = "central"
                [[radiation]]
                locus = "north"
                [[radiation]]
                locus = "north-east"
                "#
            }
            Scenario::DecoderCompare => {
                r#"
                decoders = ["mwpm", "union_find", "radmatching"]
                [time]
                stride = 4
                [[radiation]]
                locus = "central"
                "#
            }
        }
    }

    /// Built-in configuration of the scenario (no seed).
    pub fn default_config(self) -> ScenarioConfig {
        self.config_from_str("").expect("built-in config parses")
    }

    /// Merges `user` TOML over the scenario defaults.
    pub fn config_from_str(self, user: &str) -> Result<ScenarioConfig> {
        let mut merged: toml::Table = toml::from_str(BASE).expect("base config parses");
        let over: toml::Table = toml::from_str(self.overrides()).expect("scenario config parses");
        merge(&mut merged, over);
        let user: toml::Table = toml::from_str(user).context("parsing config")?;
        // a user radiation list replaces the default one instead of merging
        merge(&mut merged, user);
        let cfg: ScenarioConfig = merged.try_into().context("invalid config")?;
        Ok(cfg)
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

impl ScenarioConfig {
    /// Rounds used for a given distance.
    pub fn rounds_for(&self, distance: usize) -> usize {
        if self.code.rounds == 0 {
            distance
        } else {
            self.code.rounds
        }
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed.context("a seed is required (config key `seed` or --seed)")
    }

    pub fn validate(&self) -> Result<()> {
        self.seed()?;
        if self.samples == 0 {
            bail!("samples must be positive");
        }
        if self.threads == 0 {
            bail!("threads must be positive");
        }
        for &d in self.code.distances.iter().chain(&self.overhead.distances) {
            if d < 3 || d % 2 == 0 {
                bail!("code distance {d} must be odd and at least 3");
            }
        }
        if self.code.distances.is_empty() || self.code.bases.is_empty() {
            bail!("at least one distance and one basis are required");
        }
        if !(0.0..=0.1).contains(&self.code.p) {
            bail!("intrinsic rate {} outside [0, 0.1]", self.code.p);
        }
        if !(self.time.horizon > 0.0 && self.time.horizon.is_finite()) {
            bail!("time horizon must be positive");
        }
        if self.time.stride == 0 || self.time.window == 0 {
            bail!("stride and window must be positive");
        }
        for r in &self.radiation {
            if !(r.duration > 0.0) || !r.t_rad.is_finite() {
                bail!("radiation event at {} needs a positive duration", r.locus.label());
            }
        }
        if !(self.overhead.density > 0.0 && self.overhead.density <= 1.0) || self.overhead.calls == 0 {
            bail!("overhead density must lie in (0, 1] with at least one call");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_for_every_scenario() {
        for s in [
            Scenario::DistanceSweep,
            Scenario::PositionStudy,
            Scenario::Overhead,
            Scenario::MultiCode,
            Scenario::DecoderCompare,
        ] {
            let c = s.default_config();
            assert_eq!(c.samples, 128);
            assert!(c.seed.is_none());
            assert!(c.validate().is_err(), "seed must be mandatory");
        }
    }

    #[test]
    fn user_keys_override_defaults() {
        let c = Scenario::DistanceSweep
            .config_from_str("seed = 3\n[code]\ndistances = [7]\n[[radiation]]\nlocus = [1.0, 2.0]\nt_rad = 1e-4\n")
            .unwrap();
        assert_eq!(c.seed, Some(3));
        assert_eq!(c.code.distances, vec![7]);
        assert_eq!(c.code.bases, vec![BasisName::X, BasisName::Z]);
        assert_eq!(c.radiation.len(), 1);
        assert_eq!(c.radiation[0].locus, Locus::Point([1.0, 2.0]));
        assert_eq!(c.radiation[0].duration, 1e-3);
        assert_eq!(c.rounds_for(7), 7);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_decoder_is_rejected() {
        let e = Scenario::DecoderCompare.config_from_str("decoders = [\"bp\"]").unwrap_err();
        assert!(format!("{e:#}").contains("unknown variant"));
    }

    #[test]
    fn even_distance_is_rejected() {
        let c = Scenario::DistanceSweep.config_from_str("seed = 1\n[code]\ndistances = [4]").unwrap();
        assert!(c.validate().is_err());
    }
}
