//! One-at-a-time sweep of the social-influence parameters around the
//! defaults, scoring each setting on the four behavioural checks.
//!
//! ```text
//! cargo run --release --example parameter_sweep -- --pairs 30
//! cargo run --release --example parameter_sweep -- --pairs 8 --only boredom_cycles=25
//! ```

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;
use situated_lab::experiment::{batch, RunMetrics};
use situated_lab::io::write_atomic;
use situated_lab::report::replication_criteria;
use situated_lab::Config;

#[derive(Parser)]
struct Args {
    #[arg(long, default_value_t = 30)]
    pairs: usize,
    #[arg(long, default_value_t = 1)]
    seed_base: u64,
    /// Run only settings whose label contains this text.
    #[arg(long)]
    only: Option<String>,
    /// Also write the table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// (label, overrides). Keys: social_rate, frustration_limit, boredom_cycles,
/// consumption_cycles, tie_strength_floor.
fn settings() -> Vec<(String, Vec<(&'static str, &'static str)>)> {
    let mut out = vec![("defaults".to_string(), vec![])];
    let axes: [(&str, &[&str]); 5] = [
        ("social_rate", &["0.1", "0.5"]),
        ("frustration_limit", &["3", "10", "20"]),
        ("boredom_cycles", &["15", "20", "25", "35", "100"]),
        ("consumption_cycles", &["10"]),
        ("tie_strength_floor", &["0.1", "0.4"]),
    ];
    for (key, values) in axes {
        for v in values {
            out.push((format!("{key}={v}"), vec![(key, *v)]));
        }
    }
    for combo in [
        vec![("frustration_limit", "10"), ("boredom_cycles", "25")],
        vec![("frustration_limit", "10"), ("consumption_cycles", "10")],
    ] {
        let label = combo.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ");
        out.push((label, combo));
    }
    out
}

fn main() -> situated_lab::Result<()> {
    let args = Args::parse();
    let mut table = String::from("setting,b1,b2,b3,b4,b1_detail,b2_detail,b3_detail,b4_detail\n");
    for (label, overrides) in settings() {
        if args.only.as_ref().is_some_and(|o| !label.contains(o.as_str())) {
            continue;
        }
        let mut cfg = Config::default();
        for (k, v) in &overrides {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        let start = Instant::now();
        let pairs = batch(args.pairs, args.seed_base, &cfg, true)?;
        let metrics: Vec<(RunMetrics, RunMetrics)> =
            pairs.iter().map(|p| (p.social.metrics(), p.nonsocial.metrics())).collect();
        let criteria = replication_criteria(&metrics)?;

        println!("{label}  ({} pairs, {:.0?})", args.pairs, start.elapsed());
        for c in &criteria {
            println!("  {} {} {}", c.id, if c.pass { "PASS" } else { "FAIL" }, c.detail);
        }
        let _ = write!(table, "\"{label}\"");
        for c in &criteria {
            let _ = write!(table, ",{}", c.pass);
        }
        for c in &criteria {
            let _ = write!(table, ",\"{}\"", c.detail);
        }
        table.push('\n');
    }
    if let Some(path) = &args.csv {
        write_atomic(path, &table)?;
    }
    Ok(())
}
