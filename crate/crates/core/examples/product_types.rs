//! Product types: random connected topologies, their relaxed circular
//! layouts, signatures and utilities.
//!
//! `cargo run --example product_types -- [seed]`

use situated_lab::product::{generate_type_set, relax_layout, LayoutParams, ProductTopology};
use situated_lab::rng::{substream, Stream};

fn main() -> situated_lab::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);

    let path = ProductTopology::path([0, 2, 4, 1, 3, 5])?;
    let layout = relax_layout(&path, &LayoutParams::default());
    println!(
        "path 0-2-4-1-3-5: {} iterations, converged {}, edge spread {:.2e}",
        layout.iterations, layout.converged, layout.residual
    );
    println!("  signature {:.4?}\n", layout.signature.0);

    let types = generate_type_set(10, 0.5, 1.0, &mut substream(seed, Stream::ProductTypes), 10_000)?;
    println!("type  edges  utility   signature");
    for t in &types {
        println!("{:>4}  {:>5}  {:+.4}   {:.3?}", t.type_id, t.topology.edge_count(), t.utility, t.signature.0);
    }
    let closest = types
        .iter()
        .enumerate()
        .flat_map(|(i, a)| types[i + 1..].iter().map(move |b| a.signature.distance(&b.signature)))
        .fold(f64::INFINITY, f64::min);
    println!("\nclosest pair of signatures: {closest:.3}");
    Ok(())
}
