//! Fitness-distance correlation of seeded type sets: local maxima in
//! signature space and how utility falls off with distance to them.
//!
//! `cargo run --release --example landscape_fdc -- [sets]`

use situated_lab::experiment::type_set_for_seed;
use situated_lab::product::Landscape;
use situated_lab::Config;

fn main() -> situated_lab::Result<()> {
    let sets: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let cfg = Config::default();
    let mut fdcs = Vec::new();
    println!("seed  radius  maxima                          fdc");
    for seed in 1..=sets {
        let types = type_set_for_seed(seed, &cfg)?;
        let land = Landscape::analyze(&types, cfg.maxima_radius)?;
        let r = land.fdc().ok();
        println!("{seed:>4}  {:.3}   {:<30}  {}", land.radius, format!("{:?}", land.maxima), r.map_or("NA".into(), |r| format!("{r:+.3}")));
        fdcs.extend(r);
    }
    let mean = fdcs.iter().sum::<f64>() / fdcs.len() as f64;
    let negative = fdcs.iter().filter(|r| **r < 0.0).count();
    println!("\n{negative}/{} negative, mean {mean:+.3}", fdcs.len());
    Ok(())
}
