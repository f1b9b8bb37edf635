//! The consumers' small-world tie graph: initial structure, decay of unused
//! ties and friend-of-friend referrals for isolated consumers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use situated_lab::network::{init_watts_strogatz, referral, SmallWorldParams};

fn main() -> situated_lab::Result<()> {
    let params = SmallWorldParams {
        n: 40,
        degree: 4,
        rewire: 0.1,
        initial_strength: 0.5,
        removal_floor: 0.05,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut g = init_watts_strogatz(&params, &mut rng)?;
    let degrees: Vec<usize> = (0..g.len()).map(|c| g.degree(c)).collect();
    println!("{} ties, connected {}, degrees {:?}", g.edge_count(), g.is_connected(), degrees);

    // Unused ties fade; repeated contact keeps one alive.
    for cycle in 1..=3000 {
        g.decay_all(0.001);
        if cycle % 10 == 0 {
            g.strengthen(0, 1, 0.1)?;
        }
        if cycle % 1000 == 0 {
            println!("cycle {cycle}: {} ties left, tie 0-1 at {:.3}", g.edge_count(), g.strength(0, 1).unwrap_or(0.0));
        }
    }

    let lonely = (0..g.len()).find(|&c| g.degree(c) == 0).unwrap_or(5);
    for _ in 0..3 {
        let friend = referral(&mut g, lonely, 0.5, &mut rng)?;
        println!("referral for consumer {lonely}: {friend:?} (degree now {})", g.degree(lonely));
    }
    Ok(())
}
