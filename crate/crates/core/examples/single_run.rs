//! One traced run: the aggregate consumption series and which behavioural
//! rule fired how often.
//!
//! `cargo run --release --example single_run -- [seed] [social|nonsocial] [cycles]`

use std::collections::BTreeMap;

use situated_lab::experiment::run_metrics;
use situated_lab::{Config, World};

fn main() -> situated_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let social = args.next().is_none_or(|s| s != "nonsocial");
    let cycles: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(3000);

    let cfg = Config { cycles, ..Config::default() }.with_social(social);
    let mut world = World::new(seed, &cfg)?;
    world.enable_trace();
    let mut samples = Vec::new();
    for _ in 0..cycles {
        if let Some(s) = world.step()? {
            if s.cycle % 500 == 0 {
                println!("cycle {:>5}: {:>3} units, utility {:+.2}, {} ties", s.cycle, s.total_units, s.total_utility, world.network().edge_count());
            }
            samples.push(s);
        }
    }

    let mut fired: BTreeMap<String, usize> = BTreeMap::new();
    for r in world.trace().unwrap_or_default() {
        *fired.entry(format!("{:?}", r.fired)).or_default() += 1;
    }
    println!("\nrule firings over {cycles} cycles:");
    for (rule, n) in fired {
        println!("  {rule:<18} {n}");
    }
    let m = run_metrics(&samples, &cfg);
    println!("\n{m:#?}");
    Ok(())
}
