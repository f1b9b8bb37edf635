//! Command-line interface: argument definitions and command execution.
//! Commands return their standard output as text so they can be tested
//! without spawning processes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::experiment::{batch, run_metrics, run_world_observed, RunMetrics};
use crate::io;
use crate::product::{generate_type_set, Landscape, ProductType};
use crate::report;
use crate::rng::{substream, Stream};
use crate::world::World;

#[derive(Debug, Parser)]
#[command(name = "situated-lab", version, about = "Situated consumer simulation laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Parameter overrides shared by the simulation commands.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// File of `key = value` lines.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Single override; may be repeated. Applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl ConfigArgs {
    /// Defaults, then the file, then `--set` overrides.
    pub fn resolve(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(path) => Config::from_file(path)?,
            None => Config::default(),
        };
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected KEY=VALUE, got {kv:?}")))?;
            cfg.set(k.trim(), v)?;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a distance-constrained product type set.
    GenTypes {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Minimum pairwise signature distance (defaults to the configured value).
        #[arg(long)]
        min_dist: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Sample unconstrained types and report the landscape's FDC.
    Landscape {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Run a single simulation.
    Run {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        cycles: Option<u64>,
        #[arg(long, conflicts_with = "no_social")]
        social: bool,
        #[arg(long)]
        no_social: bool,
        #[arg(long)]
        out: PathBuf,
        /// Write every entity's position at each sampling cycle.
        #[arg(long, value_name = "PATH")]
        world_dump: Option<PathBuf>,
        /// Write the tie list at each sampling cycle.
        #[arg(long, value_name = "PATH")]
        network_log: Option<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Run seeded social/non-social pairs and compare them.
    Experiment {
        #[arg(long, default_value_t = 30)]
        pairs: usize,
        #[arg(long)]
        seed_base: u64,
        #[arg(long)]
        out_dir: PathBuf,
        /// Run pairs one after another instead of in parallel.
        #[arg(long)]
        sequential: bool,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Recompute the comparison report from an experiment's run files.
    Analyze {
        #[arg(long)]
        in_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Text destined for standard output and standard error.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Output {
    pub stdout: String,
    pub warnings: Vec<String>,
}

pub fn execute(command: &Command) -> Result<Output> {
    match command {
        Command::GenTypes {
            seed,
            count,
            min_dist,
            out,
            cfg,
        } => gen_types(*seed, *count, *min_dist, out, &cfg.resolve()?),
        Command::Landscape { seed, samples, out, cfg } => landscape(*seed, *samples, out, &cfg.resolve()?),
        Command::Run {
            seed,
            cycles,
            social,
            no_social,
            out,
            world_dump,
            network_log,
            cfg,
        } => {
            let mut config = cfg.resolve()?;
            if let Some(c) = cycles {
                config.cycles = *c;
            }
            if *social {
                config.social = true;
            }
            if *no_social {
                config.social = false;
            }
            run(*seed, &config, out, world_dump.as_deref(), network_log.as_deref())
        }
        Command::Experiment {
            pairs,
            seed_base,
            out_dir,
            sequential,
            cfg,
        } => experiment(*pairs, *seed_base, out_dir, !sequential, &cfg.resolve()?),
        Command::Analyze { in_dir, out } => analyze(in_dir, out),
    }
}

fn pairwise_summary(types: &[ProductType]) -> String {
    let d: Vec<f64> = types
        .iter()
        .enumerate()
        .flat_map(|(i, a)| types[i + 1..].iter().map(move |b| a.signature.distance(&b.signature)))
        .collect();
    if d.is_empty() {
        return format!("types {}: no pairs\n", types.len());
    }
    let min = d.iter().copied().fold(f64::INFINITY, f64::min);
    let max = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    format!(
        "types {}: {} pairs, distance min {min:.6} mean {mean:.6} max {max:.6}\n",
        types.len(),
        d.len()
    )
}

pub fn gen_types(seed: u64, count: usize, min_dist: Option<f64>, out: &Path, cfg: &Config) -> Result<Output> {
    let min_distance = min_dist.unwrap_or(cfg.min_type_distance);
    let types = generate_type_set(
        count,
        min_distance,
        cfg.utility_slope,
        &mut substream(seed, Stream::ProductTypes),
        cfg.type_attempts,
    )?;
    io::write_atomic(out, &io::types_csv(&types))?;
    Ok(Output {
        stdout: pairwise_summary(&types),
        warnings: Vec::new(),
    })
}

pub fn landscape(seed: u64, samples: usize, out: &Path, cfg: &Config) -> Result<Output> {
    if samples < 2 {
        return Err(Error::Domain(format!("landscape needs at least 2 samples, got {samples}")));
    }
    let types = generate_type_set(
        samples,
        0.0,
        cfg.utility_slope,
        &mut substream(seed, Stream::Landscape),
        samples,
    )?;
    let land = Landscape::analyze(&types, cfg.maxima_radius)?;
    let summary = match land.fdc() {
        Ok(r) => format!(
            "# fdc,{r},maxima,{},radius,{}\n",
            land.maxima.len(),
            land.radius
        ),
        Err(Error::Degenerate(why)) => format!("# fdc,{},degenerate,{why}\n", io::NA),
        Err(e) => return Err(e),
    };
    let mut text = io::types_csv(&types);
    text.push_str(&summary);
    io::write_atomic(out, &text)?;
    Ok(Output {
        stdout: summary.trim_start_matches("# ").to_string(),
        warnings: Vec::new(),
    })
}

pub fn run(
    seed: u64,
    cfg: &Config,
    out: &Path,
    world_dump: Option<&Path>,
    network_log: Option<&Path>,
) -> Result<Output> {
    let warnings = cfg.validate()?;
    let mut dump = world_dump
        .map(|p| -> Result<File> {
            let mut f = File::create(p)?;
            writeln!(f, "{}", io::WORLD_HEADER)?;
            Ok(f)
        })
        .transpose()?;
    let mut net = network_log
        .map(|p| -> Result<File> {
            let mut f = File::create(p)?;
            writeln!(f, "{}", io::NETWORK_HEADER)?;
            Ok(f)
        })
        .transpose()?;
    let world = World::new(seed, cfg)?;
    let result = run_world_observed(world, |w| {
        if let Some(f) = dump.as_mut() {
            f.write_all(io::world_dump_rows(w).as_bytes())?;
        }
        if let Some(f) = net.as_mut() {
            f.write_all(io::network_rows(w).as_bytes())?;
        }
        Ok(())
    })?;
    io::write_atomic(out, &io::run_csv(&result.samples))?;
    let stdout = format!(
        "{}\n{}\n",
        io::SUMMARY_HEADER,
        io::summary_row(seed, cfg.social, result.fdc, &result.metrics())
    );
    Ok(Output { stdout, warnings })
}

fn write_analysis(dir: &Path, pairs: &[(RunMetrics, RunMetrics)]) -> Result<String> {
    let report = report::report_csv(&report::compare(pairs)?);
    io::write_atomic(&dir.join("report.csv"), &report)?;
    for (name, table) in report::tables(pairs)? {
        io::write_atomic(&dir.join(name), &table)?;
    }
    Ok(report)
}

pub fn experiment(pairs: usize, seed_base: u64, out_dir: &Path, parallel: bool, cfg: &Config) -> Result<Output> {
    let warnings = cfg.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let results = batch(pairs, seed_base, cfg, parallel)?;
    io::write_atomic(&out_dir.join("config.txt"), &cfg.to_text())?;
    let mut summary = format!("{}\n", io::SUMMARY_HEADER);
    let mut metrics = Vec::with_capacity(results.len());
    for p in &results {
        if p.social.initial_checksum != p.nonsocial.initial_checksum {
            return Err(Error::Determinism {
                seed: p.seed,
                detail: "pair members started from different states".into(),
            });
        }
        let (ms, mn) = (p.social.metrics(), p.nonsocial.metrics());
        for (r, m) in [(&p.social, &ms), (&p.nonsocial, &mn)] {
            io::write_atomic(
                &out_dir.join(io::run_file_name(p.seed, r.config.social)),
                &io::run_csv(&r.samples),
            )?;
            let _ = writeln!(summary, "{}", io::summary_row(p.seed, r.config.social, r.fdc, m));
        }
        metrics.push((ms, mn));
    }
    io::write_atomic(&out_dir.join("summary.csv"), &summary)?;
    let report = write_analysis(out_dir, &metrics)?;
    Ok(Output {
        stdout: report,
        warnings,
    })
}

pub fn analyze(in_dir: &Path, out: &Path) -> Result<Output> {
    let cfg_path = in_dir.join("config.txt");
    let cfg = if cfg_path.exists() {
        Config::from_file(&cfg_path)?
    } else {
        Config::default()
    };
    let mut runs: BTreeMap<u64, [Option<PathBuf>; 2]> = BTreeMap::new();
    for entry in std::fs::read_dir(in_dir)? {
        let path = entry?.path();
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        if let Some((seed, social)) = io::parse_run_file_name(&name) {
            runs.entry(seed).or_default()[usize::from(!social)] = Some(path);
        }
    }
    if runs.is_empty() {
        return Err(Error::Config(format!("no run files in {}", in_dir.display())));
    }
    let gaps: Vec<String> = runs
        .iter()
        .flat_map(|(seed, pair)| {
            [(true, &pair[0]), (false, &pair[1])]
                .into_iter()
                .filter(|(_, p)| p.is_none())
                .map(move |(social, _)| io::run_file_name(*seed, social))
        })
        .collect();
    if !gaps.is_empty() {
        return Err(Error::Config(format!("missing run files: {}", gaps.join(", "))));
    }
    let mut metrics = Vec::with_capacity(runs.len());
    for pair in runs.values() {
        let load = |p: &Option<PathBuf>| -> Result<RunMetrics> {
            let p = p.as_ref().expect("gaps checked");
            let samples = io::parse_run_csv(&p.display().to_string(), &std::fs::read_to_string(p)?)?;
            if samples.is_empty() {
                return Err(Error::parse(p.display().to_string(), "no samples"));
            }
            Ok(run_metrics(&samples, &cfg))
        };
        metrics.push((load(&pair[0])?, load(&pair[1])?));
    }
    std::fs::create_dir_all(out)?;
    let report = write_analysis(out, &metrics)?;
    Ok(Output {
        stdout: report,
        warnings: Vec::new(),
    })
}
