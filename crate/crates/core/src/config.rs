//! Run configuration: every model parameter with its default, settable by
//! `key = value` lines (with `#` comments) or programmatically.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Reference density of consumers plus products per cell (90 agents on 165 x 165).
const REFERENCE_DENSITY: f64 = 90.0 / (165.0 * 165.0);

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub social: bool,
    pub cycles: u64,
    pub sample_every: u64,
    pub grid_width: u32,
    pub grid_height: u32,
    pub n_consumers: usize,
    pub n_types: usize,
    pub replicas_per_type: usize,

    pub utility_slope: f64,
    pub min_type_distance: f64,
    pub type_attempts: usize,
    /// `None` selects the mean nearest-neighbour signature distance.
    pub maxima_radius: Option<f64>,

    pub field_radius: u32,
    pub respawn_sigma: f64,

    pub perception_rows: usize,
    pub perception_cols: usize,
    pub conception_nodes: usize,
    pub som_alpha0: f64,
    pub som_alpha_decay: f64,
    pub som_alpha_floor: f64,
    pub som_radius_decay: f64,
    pub som_radius_floor: f64,
    pub som_init_max: f64,
    pub threshold_rate: f64,
    pub initial_threshold: f64,

    pub boredom_cycles: u32,
    pub frustration_limit: u32,
    pub tie_strength_floor: f64,
    pub consumption_gate: f64,
    pub consumption_cycles: u32,
    pub admiration_window: usize,
    pub dissatisfaction_window: usize,
    pub experiential_rate: f64,
    pub social_rate: f64,
    pub perturbation: f64,
    /// Threshold shift applied by a change of values.
    pub criteria_step: f64,
    pub relocation_range: u32,
    pub navigation_limit: u32,

    pub ws_degree: usize,
    pub ws_rewire: f64,
    pub tie_increment: f64,
    pub tie_decay: f64,
    pub tie_initial: f64,
    pub tie_removal: f64,
    pub referral_strength: f64,

    pub coverage_cell_width: f64,
    pub transient_cycles: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            social: true,
            cycles: 10_000,
            sample_every: 20,
            grid_width: 165,
            grid_height: 165,
            n_consumers: 40,
            n_types: 10,
            replicas_per_type: 5,

            utility_slope: 1.0,
            min_type_distance: 0.5,
            type_attempts: 10_000,
            maxima_radius: None,

            field_radius: 12,
            respawn_sigma: 10.0,

            perception_rows: 8,
            perception_cols: 8,
            conception_nodes: 16,
            som_alpha0: 0.3,
            som_alpha_decay: 0.999,
            som_alpha_floor: 0.01,
            som_radius_decay: 0.999,
            som_radius_floor: 0.5,
            som_init_max: 2.0,
            threshold_rate: 0.1,
            initial_threshold: 0.0,

            boredom_cycles: 50,
            frustration_limit: 5,
            tie_strength_floor: 0.2,
            consumption_gate: 1.0,
            consumption_cycles: 5,
            admiration_window: 10,
            dissatisfaction_window: 3,
            experiential_rate: 0.1,
            social_rate: 0.2,
            perturbation: 0.1,
            criteria_step: 0.1,
            relocation_range: 36,
            navigation_limit: 100,

            ws_degree: 4,
            ws_rewire: 0.1,
            tie_increment: 0.1,
            tie_decay: 0.001,
            tie_initial: 0.5,
            tie_removal: 0.05,
            referral_strength: 0.5,

            coverage_cell_width: 0.05,
            transient_cycles: 1_500,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

macro_rules! config_keys {
    ($($key:ident),* $(,)?) => {
        /// Every settable key, in file order.
        pub const KEYS: &[&str] = &[$(stringify!($key)),*];

        impl Config {
            /// Sets one parameter from its textual value.
            pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
                let value = value.trim();
                match key {
                    "maxima_radius" => {
                        self.maxima_radius = if value == "auto" {
                            None
                        } else {
                            Some(parse(key, value)?)
                        };
                    }
                    $(stringify!($key) => self.$key = parse(key, value)?,)*
                    _ => return Err(Error::Config(format!("unknown key {key:?}"))),
                }
                Ok(())
            }

            /// All parameters as `(key, value)` text pairs.
            pub fn entries(&self) -> Vec<(&'static str, String)> {
                let mut out = vec![(
                    "maxima_radius",
                    self.maxima_radius.map_or_else(|| "auto".to_string(), |r| r.to_string()),
                )];
                $(out.push((stringify!($key), self.$key.to_string()));)*
                out
            }
        }
    };
}

config_keys!(
    social,
    cycles,
    sample_every,
    grid_width,
    grid_height,
    n_consumers,
    n_types,
    replicas_per_type,
    utility_slope,
    min_type_distance,
    type_attempts,
    field_radius,
    respawn_sigma,
    perception_rows,
    perception_cols,
    conception_nodes,
    som_alpha0,
    som_alpha_decay,
    som_alpha_floor,
    som_radius_decay,
    som_radius_floor,
    som_init_max,
    threshold_rate,
    initial_threshold,
    boredom_cycles,
    frustration_limit,
    tie_strength_floor,
    consumption_gate,
    consumption_cycles,
    admiration_window,
    dissatisfaction_window,
    experiential_rate,
    social_rate,
    perturbation,
    criteria_step,
    relocation_range,
    navigation_limit,
    ws_degree,
    ws_rewire,
    tie_increment,
    tie_decay,
    tie_initial,
    tie_removal,
    referral_strength,
    coverage_cell_width,
    transient_cycles,
);

impl Config {
    /// Applies `key = value` lines. Blank lines and `#` comments are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut bad = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bad.push(format!("line {}: expected `key = value`", lineno + 1));
                continue;
            };
            if let Err(e) = self.set(key.trim(), value) {
                bad.push(format!("line {}: {e}", lineno + 1));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad.join("; ")))
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = Config::default();
        cfg.apply_text(&std::fs::read_to_string(path)?)?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn n_instances(&self) -> usize {
        self.n_types * self.replicas_per_type
    }

    pub fn with_social(&self, social: bool) -> Self {
        Config {
            social,
            ..self.clone()
        }
    }

    /// Checks hard constraints; returns the offending keys on failure and
    /// soft warnings otherwise.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut bad: Vec<String> = Vec::new();
        let mut check = |ok: bool, key: &str| {
            if !ok {
                bad.push(key.to_string());
            }
        };
        check(self.sample_every > 0, "sample_every");
        check(self.cycles > 0 && self.sample_every > 0 && self.cycles.is_multiple_of(self.sample_every), "cycles");
        check(self.grid_width > 0, "grid_width");
        check(self.grid_height > 0, "grid_height");
        check(self.n_consumers > 0, "n_consumers");
        check(self.n_types > 0, "n_types");
        check(self.replicas_per_type > 0, "replicas_per_type");
        let cells = self.grid_width as usize * self.grid_height as usize;
        check(self.n_consumers + self.n_instances() <= cells / 2, "n_consumers");
        check(self.utility_slope > 0.0, "utility_slope");
        check(self.min_type_distance >= 0.0, "min_type_distance");
        check(self.type_attempts > 0, "type_attempts");
        check(self.maxima_radius.is_none_or(|r| r > 0.0), "maxima_radius");
        check(self.field_radius > 0, "field_radius");
        check(self.respawn_sigma >= 0.0, "respawn_sigma");
        check(self.perception_rows > 0, "perception_rows");
        check(self.perception_cols > 0, "perception_cols");
        check(self.conception_nodes > 0, "conception_nodes");
        check((0.0..=1.0).contains(&self.som_alpha0), "som_alpha0");
        check((0.0..=1.0).contains(&self.som_alpha_decay), "som_alpha_decay");
        check((0.0..=1.0).contains(&self.som_alpha_floor), "som_alpha_floor");
        check((0.0..=1.0).contains(&self.som_radius_decay), "som_radius_decay");
        check(self.som_radius_floor > 0.0, "som_radius_floor");
        check(self.som_init_max > 0.0, "som_init_max");
        check((0.0..=1.0).contains(&self.threshold_rate), "threshold_rate");
        check((-1.0..=1.0).contains(&self.initial_threshold), "initial_threshold");
        check(self.consumption_gate >= 0.0, "consumption_gate");
        check(self.consumption_cycles > 0, "consumption_cycles");
        check(self.admiration_window > 0, "admiration_window");
        check(self.dissatisfaction_window > 0, "dissatisfaction_window");
        check((0.0..=1.0).contains(&self.experiential_rate), "experiential_rate");
        check((0.0..=1.0).contains(&self.social_rate), "social_rate");
        check(self.perturbation >= 0.0, "perturbation");
        check((0.0..=2.0).contains(&self.criteria_step), "criteria_step");
        check(self.relocation_range > 0, "relocation_range");
        check(self.navigation_limit > 0, "navigation_limit");
        check(
            self.ws_degree >= 2 && self.ws_degree.is_multiple_of(2) && self.ws_degree < self.n_consumers,
            "ws_degree",
        );
        check((0.0..=1.0).contains(&self.ws_rewire), "ws_rewire");
        check((0.0..=1.0).contains(&self.tie_increment), "tie_increment");
        check((0.0..=1.0).contains(&self.tie_decay), "tie_decay");
        check((0.0..=1.0).contains(&self.tie_initial), "tie_initial");
        check((0.0..=1.0).contains(&self.tie_removal), "tie_removal");
        check((0.0..=1.0).contains(&self.referral_strength), "referral_strength");
        check(self.coverage_cell_width > 0.0, "coverage_cell_width");
        if !bad.is_empty() {
            bad.dedup();
            return Err(Error::Config(format!("invalid values for: {}", bad.join(", "))));
        }
        let mut warnings = Vec::new();
        let density = (self.n_consumers + self.n_instances()) as f64 / cells as f64;
        let ratio = density / REFERENCE_DENSITY;
        if !(0.5..=1.5).contains(&ratio) {
            warnings.push(format!(
                "agent density {density:.5} per cell is {ratio:.2}x the reference density; results are density-sensitive"
            ));
        }
        Ok(warnings)
    }
}
