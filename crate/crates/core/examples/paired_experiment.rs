//! Social against non-social consumers from identical starting worlds,
//! compared with paired t and signed-rank tests.
//!
//! `cargo run --release --example paired_experiment -- [pairs] [cycles]`

use situated_lab::experiment::{batch, RunMetrics};
use situated_lab::report::{compare, report_csv};
use situated_lab::Config;

fn main() -> situated_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let pairs: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(6);
    let cycles: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(4000);
    let cfg = Config { cycles, ..Config::default() };

    let results = batch(pairs, 1, &cfg, true)?;
    let metrics: Vec<(RunMetrics, RunMetrics)> = results
        .iter()
        .map(|p| {
            assert_eq!(p.social.initial_checksum, p.nonsocial.initial_checksum);
            (p.social.metrics(), p.nonsocial.metrics())
        })
        .collect();
    println!("seed  units s/ns     path s/ns");
    for (p, (s, n)) in results.iter().zip(&metrics) {
        println!("{:>4}  {:.2}/{:.2}   {:.2}/{:.2}", p.seed, s.mean_units, n.mean_units, s.mean_path_length, n.mean_path_length);
    }
    println!("\n{}", report_csv(&compare(&metrics)?));
    Ok(())
}
