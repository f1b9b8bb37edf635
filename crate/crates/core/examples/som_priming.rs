//! A consumer's two maps before and after priming: where each product type
//! lands on the perception map and what utility the conception map predicts.

use situated_lab::cognition::perceive;
use situated_lab::world::{init_world, prime_consumers};
use situated_lab::Config;

fn main() -> situated_lab::Result<()> {
    let cfg = Config::default();
    let mut world = init_world(3, &cfg)?;
    let before = world.consumers()[0].clone();
    prime_consumers(&mut world)?;
    let after = &world.consumers()[0];

    println!("type  utility   cell before  qe before   cell after  qe after   predicted");
    for t in world.types() {
        let p0 = perceive(&before.perception, &t.signature)?;
        let p1 = perceive(&after.perception, &t.signature)?;
        println!(
            "{:>4}  {:+.3}    ({},{})        {:.3}       ({},{})       {:.3}      {:+.3}",
            t.type_id,
            t.utility,
            p0.row,
            p0.col,
            p0.quantization_error,
            p1.row,
            p1.col,
            p1.quantization_error,
            after.attract.predict(&t.signature)?
        );
    }
    let attractive = world.types().iter().filter(|t| after.attract.assess(&t.signature).unwrap_or(false)).count();
    println!(
        "\nthreshold {:+.2}: {attractive}/{} types look attractive after priming",
        after.attract.threshold(),
        world.types().len()
    );
    Ok(())
}
