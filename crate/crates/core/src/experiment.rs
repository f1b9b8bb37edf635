//! Runs, social/non-social pairs, seeded batches and per-run metrics.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::product::{generate_type_set, Landscape, ProductType, Signature, VERTICES};
use crate::rng::{substream, Stream};
use crate::stats::linreg;
use crate::world::{PeriodSample, World};

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub config: Config,
    pub types: Vec<ProductType>,
    /// `None` when the type set's landscape is degenerate.
    pub fdc: Option<f64>,
    pub samples: Vec<PeriodSample>,
    pub initial_checksum: String,
    pub initial_network_checksum: String,
    pub final_network_checksum: String,
    pub consumption_events: u64,
}

impl RunResult {
    pub fn metrics(&self) -> RunMetrics {
        run_metrics(&self.samples, &self.config)
    }

    pub fn trajectory(&self, consumer: usize) -> Vec<Signature> {
        trajectory(&self.samples, consumer)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairResult {
    pub seed: u64,
    pub social: RunResult,
    pub nonsocial: RunResult,
}

/// FDC of a type set with maxima found at `radius` (default radius when `None`).
pub fn type_set_fdc(types: &[ProductType], radius: Option<f64>) -> Result<Option<f64>> {
    match Landscape::analyze(types, radius)?.fdc() {
        Ok(r) => Ok(Some(r)),
        Err(Error::Degenerate(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// The type set a run with this seed and configuration uses.
pub fn type_set_for_seed(seed: u64, config: &Config) -> Result<Vec<ProductType>> {
    generate_type_set(
        config.n_types,
        config.min_type_distance,
        config.utility_slope,
        &mut substream(seed, Stream::ProductTypes),
        config.type_attempts,
    )
}

/// Cycles an already primed world to completion.
pub fn run_world(world: World) -> Result<RunResult> {
    run_world_observed(world, |_| Ok(()))
}

/// Like [`run_world`], calling `observe` after every sampling cycle.
pub fn run_world_observed(mut world: World, mut observe: impl FnMut(&World) -> Result<()>) -> Result<RunResult> {
    let initial_checksum = world.checksum();
    let initial_network_checksum = world.network_checksum();
    let cfg = world.config().clone();
    let mut samples = Vec::with_capacity((cfg.cycles / cfg.sample_every) as usize);
    for _ in 0..cfg.cycles {
        if let Some(s) = world.step()? {
            samples.push(s);
            observe(&world)?;
        }
    }
    Ok(RunResult {
        seed: world.seed(),
        fdc: type_set_fdc(world.types(), cfg.maxima_radius)?,
        types: world.types().to_vec(),
        config: cfg,
        samples,
        initial_checksum,
        initial_network_checksum,
        final_network_checksum: world.network_checksum(),
        consumption_events: world.consumption_events(),
    })
}

pub fn run(seed: u64, config: &Config) -> Result<RunResult> {
    run_world(World::new(seed, config)?)
}

/// Social and non-social runs from one seed; their initial states must agree.
pub fn run_pair(seed: u64, base: &Config) -> Result<PairResult> {
    let social = World::new(seed, &base.with_social(true))?;
    let nonsocial = World::new(seed, &base.with_social(false))?;
    let (a, b) = (social.checksum(), nonsocial.checksum());
    if a != b {
        return Err(Error::Determinism {
            seed,
            detail: format!("initial checksums differ: {a} vs {b}"),
        });
    }
    Ok(PairResult {
        seed,
        social: run_world(social)?,
        nonsocial: run_world(nonsocial)?,
    })
}

/// Pairs for seeds `seed_base .. seed_base + n_pairs`, in seed order.
pub fn batch(n_pairs: usize, seed_base: u64, config: &Config, parallel: bool) -> Result<Vec<PairResult>> {
    if n_pairs == 0 {
        return Err(Error::Domain("a batch needs at least one pair".into()));
    }
    let seeds: Vec<u64> = (0..n_pairs as u64).map(|i| seed_base + i).collect();
    if parallel {
        seeds.par_iter().map(|&s| run_pair(s, config)).collect()
    } else {
        seeds.iter().map(|&s| run_pair(s, config)).collect()
    }
}

/// Sampled ideal vectors of one consumer.
pub fn trajectory(samples: &[PeriodSample], consumer: usize) -> Vec<Signature> {
    samples.iter().map(|s| s.consumers[consumer].ideal).collect()
}

/// Number of distinct lattice cells of edge `cell_width` visited by the trajectory.
pub fn value_coverage(trajectory: &[Signature], cell_width: f64) -> usize {
    trajectory
        .iter()
        .map(|s| -> [i64; VERTICES] { std::array::from_fn(|k| (s.0[k] / cell_width).floor() as i64) })
        .collect::<HashSet<_>>()
        .len()
}

pub fn value_path_length(trajectory: &[Signature]) -> f64 {
    trajectory.windows(2).map(|w| w[0].distance(&w[1])).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMetrics {
    pub mean_units: f64,
    pub mean_utility: f64,
    /// `None` when nothing was consumed.
    pub utility_per_unit: Option<f64>,
    pub mean_coverage: f64,
    pub mean_path_length: f64,
    /// Post-transient regression of aggregate units per period on cycle.
    pub trend_slope: Option<f64>,
    pub trend_p: Option<f64>,
}

pub fn run_metrics(samples: &[PeriodSample], config: &Config) -> RunMetrics {
    let n = samples.len().max(1) as f64;
    let total_units: u64 = samples.iter().map(|s| s.total_units).sum();
    let total_utility: f64 = samples.iter().map(|s| s.total_utility).sum();
    let consumers = samples.first().map_or(0, |s| s.consumers.len());
    let (mut coverage, mut path) = (0.0, 0.0);
    for c in 0..consumers {
        let t = trajectory(samples, c);
        coverage += value_coverage(&t, config.coverage_cell_width) as f64;
        path += value_path_length(&t);
    }
    let per_consumer = consumers.max(1) as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = samples
        .iter()
        .filter(|s| s.cycle > config.transient_cycles)
        .map(|s| (s.cycle as f64, s.total_units as f64))
        .unzip();
    let fit = linreg(&xs, &ys).ok();
    RunMetrics {
        mean_units: total_units as f64 / n,
        mean_utility: total_utility / n,
        utility_per_unit: (total_units > 0).then(|| total_utility / total_units as f64),
        mean_coverage: coverage / per_consumer,
        mean_path_length: path / per_consumer,
        trend_slope: fit.as_ref().map(|f| f.slope),
        trend_p: fit.as_ref().and_then(|f| f.slope_p_value()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::ConsumerSample;

    #[test]
    fn coverage_and_path_basics() {
        let a = Signature([0.1; 6]);
        assert_eq!(value_coverage(&[a], 0.05), 1);
        assert_eq!(value_coverage(&[a, Signature([0.11; 6])], 0.05), 1);
        assert_eq!(value_path_length(&[a]), 0.0);
        let b = Signature([0.4, 0.1, 0.1, 0.1, 0.1, 0.5]);
        assert_eq!(value_path_length(&[a, b]), a.distance(&b));
    }

    #[test]
    fn constant_series_has_flat_trend() {
        let cfg = Config {
            transient_cycles: 0,
            ..Config::default()
        };
        let samples: Vec<PeriodSample> = (1..=10)
            .map(|k| {
                PeriodSample::from_rows(
                    20 * k,
                    vec![ConsumerSample {
                        units: 3,
                        utility: 0.5,
                        ideal: Signature([1.0; 6]),
                    }],
                )
            })
            .collect();
        let m = run_metrics(&samples, &cfg);
        assert_eq!(m.trend_slope, Some(0.0));
        assert_eq!(m.mean_units, 3.0);
        assert_eq!(m.utility_per_unit, Some(0.5 / 3.0));
        assert_eq!(m.mean_coverage, 1.0);
    }

    #[test]
    fn zero_consumption_has_no_utility_per_unit() {
        let samples = vec![PeriodSample::from_rows(
            20,
            vec![ConsumerSample {
                units: 0,
                utility: 0.0,
                ideal: Signature([1.0; 6]),
            }],
        )];
        assert_eq!(run_metrics(&samples, &Config::default()).utility_per_unit, None);
    }
}
