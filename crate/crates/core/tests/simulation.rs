use std::collections::BTreeMap;

use proptest::prelude::*;
use situated_lab::consumer::{
    adjust_values, categorize_neighbors, evaluate_situations, interact_socially, try_begin_consumption, Action,
    Movement, Situation, ValueDirection,
};
use situated_lab::experiment::{batch, run, run_pair, value_coverage, value_path_length};
use situated_lab::network::TieGraph;
use situated_lab::product::{valuation, ProductState, Signature};
use situated_lab::world::{init_world, prime_consumers};
use situated_lab::{Config, World};

fn small() -> Config {
    Config {
        grid_width: 50,
        grid_height: 50,
        n_consumers: 12,
        n_types: 5,
        replicas_per_type: 4,
        cycles: 400,
        ..Config::default()
    }
}

#[test]
fn default_world_starts_from_shared_state() {
    let w = World::new(21, &Config::default()).unwrap();
    assert_eq!(w.consumers().len(), 40);
    assert_eq!(w.products().len(), 50);
    let mean = Signature::mean(w.types().iter().map(|t| &t.signature)).unwrap();
    let first = &w.consumers()[0];
    for c in w.consumers() {
        assert_eq!(c.ideal, mean);
        assert_eq!(c.perception, first.perception);
        assert_eq!(c.attract, first.attract);
    }
    let mut cells: Vec<_> = w.products().iter().map(|p| p.location).collect();
    cells.sort_by_key(|l| (l.x, l.y));
    cells.dedup();
    assert_eq!(cells.len(), 50);
    let mut consumer_cells: Vec<_> = w.consumers().iter().map(|c| c.location).collect();
    consumer_cells.sort_by_key(|l| (l.x, l.y));
    consumer_cells.dedup();
    assert_eq!(consumer_cells.len(), 40);
    assert_eq!(w.checksum(), World::new(21, &Config::default()).unwrap().checksum());
    assert_ne!(w.checksum(), World::new(22, &Config::default()).unwrap().checksum());
}

#[test]
fn priming_shows_every_type_once() {
    let cfg = small();
    let mut w = init_world(4, &cfg).unwrap();
    let untrained = w.consumers()[0].perception.clone();
    prime_consumers(&mut w).unwrap();
    for c in w.consumers() {
        assert_eq!(c.perception.steps(), cfg.n_types as u64);
        assert_eq!(c.attract.map().steps(), cfg.n_types as u64);
    }
    let qe = |m: &situated_lab::cognition::SelfOrganizingMap| -> f64 {
        w.types().iter().map(|t| m.quantization_error(t.signature.components()).unwrap()).sum()
    };
    assert!(qe(&w.consumers()[0].perception) < qe(&untrained));
}

#[test]
fn pair_and_batch_agree() {
    let cfg = Config { cycles: 200, ..small() };
    let pair = run_pair(8, &cfg).unwrap();
    assert_eq!(pair.social.initial_checksum, pair.nonsocial.initial_checksum);
    assert_eq!(pair.nonsocial.initial_network_checksum, pair.nonsocial.final_network_checksum);
    assert!(pair.social.config.social && !pair.nonsocial.config.social);

    let one = batch(1, 8, &cfg, false).unwrap();
    assert_eq!(one[0], pair);
    let par = batch(3, 8, &cfg, true).unwrap();
    let seq = batch(3, 8, &cfg, false).unwrap();
    assert_eq!(par, seq);
    assert_eq!(par.iter().map(|p| p.seed).collect::<Vec<_>>(), vec![8, 9, 10]);
    assert!(batch(0, 8, &cfg, false).is_err());
}

fn traced(seed: u64, cfg: &Config) -> World {
    let mut w = World::new(seed, cfg).unwrap();
    w.enable_trace();
    for _ in 0..cfg.cycles {
        w.step().unwrap();
    }
    w
}

#[test]
fn each_consumer_acts_once_per_cycle() {
    let cfg = small();
    let w = traced(3, &cfg);
    let trace = w.trace().unwrap();
    let mut per_cycle: BTreeMap<(u64, usize), usize> = BTreeMap::new();
    for r in trace {
        *per_cycle.entry((r.cycle, r.consumer)).or_default() += 1;
        assert!(r.values_adjusted <= 1, "{r:?}");
        if r.moved {
            assert!(!matches!(r.action, Action::Consume(_) | Action::CompleteConsumption(..) | Action::EndBoredom));
        }
    }
    assert_eq!(per_cycle.len(), cfg.cycles as usize * cfg.n_consumers);
    assert!(per_cycle.values().all(|&n| n == 1));
}

#[test]
fn nonsocial_agents_never_use_social_rules() {
    let cfg = small().with_social(false);
    let w = traced(5, &cfg);
    for r in w.trace().unwrap() {
        assert!(!matches!(r.fired, Situation::InteractSocially | Situation::SearchForAFriend), "{r:?}");
    }
}

#[test]
fn sampled_units_add_up_to_consumption_events() {
    let res = run(6, &small()).unwrap();
    assert_eq!(res.samples.len(), 20);
    let total: u64 = res.samples.iter().map(|s| s.total_units).sum();
    assert_eq!(total, res.consumption_events);
    assert!(total > 0);
    for s in &res.samples {
        assert_eq!(s.total_units, s.consumers.iter().map(|c| c.units).sum::<u64>());
        let u: f64 = s.consumers.iter().map(|c| c.utility).sum();
        assert!((s.total_utility - u).abs() < 1e-9);
        assert!(s.consumers.iter().all(|c| c.ideal.0.iter().all(|x| x.is_finite() && *x >= 0.0)));
    }
}

#[test]
fn metrics_recompute_from_raw_samples() {
    let cfg = Config { transient_cycles: 100, ..small() };
    let res = run(7, &cfg).unwrap();
    let m = res.metrics();
    let n = res.samples.len() as f64;
    let units: Vec<f64> = res.samples.iter().map(|s| s.total_units as f64).collect();
    let utility: f64 = res.samples.iter().map(|s| s.total_utility).sum();
    assert!((m.mean_units - units.iter().sum::<f64>() / n).abs() < 1e-12);
    assert!((m.mean_utility - utility / n).abs() < 1e-12);
    assert!((m.utility_per_unit.unwrap() - utility / units.iter().sum::<f64>()).abs() < 1e-12);

    // Least squares by deviations from the means.
    let post: Vec<(f64, f64)> = res
        .samples
        .iter()
        .filter(|s| s.cycle > 100)
        .map(|s| (s.cycle as f64, s.total_units as f64))
        .collect();
    let k = post.len() as f64;
    let (mx, my) = (post.iter().map(|p| p.0).sum::<f64>() / k, post.iter().map(|p| p.1).sum::<f64>() / k);
    let sxy: f64 = post.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = post.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    assert!((m.trend_slope.unwrap() - sxy / sxx).abs() < 1e-12);

    let consumers = res.samples[0].consumers.len();
    let (mut cov, mut path) = (0.0, 0.0);
    for c in 0..consumers {
        let t = res.trajectory(c);
        cov += coverage_oracle(&t, cfg.coverage_cell_width) as f64;
        path += path_oracle(&t);
    }
    assert!((m.mean_coverage - cov / consumers as f64).abs() < 1e-12);
    assert!((m.mean_path_length - path / consumers as f64).abs() < 1e-9);
}

fn coverage_oracle(t: &[Signature], w: f64) -> usize {
    let mut cells: Vec<Vec<i64>> = t.iter().map(|s| s.0.iter().map(|x| (x / w).floor() as i64).collect()).collect();
    cells.sort();
    cells.dedup();
    cells.len()
}

fn path_oracle(t: &[Signature]) -> f64 {
    let mut total = 0.0;
    for i in 1..t.len() {
        let mut sq = 0.0;
        for k in 0..6 {
            sq += (t[i].0[k] - t[i - 1].0[k]).powi(2);
        }
        total += sq.sqrt();
    }
    total
}

#[test]
fn coverage_and_path_examples() {
    let line: Vec<Signature> = (0..5).map(|i| Signature([0.1 * i as f64, 0.0, 0.0, 0.0, 0.0, 0.0])).collect();
    assert_eq!(value_coverage(&line, 0.05), 5);
    assert!((value_path_length(&line) - 0.4).abs() < 1e-12);
    let still = vec![Signature([0.3; 6]); 10];
    assert_eq!(value_coverage(&still, 0.05), 1);
    assert_eq!(value_path_length(&still), 0.0);
    assert_eq!(value_coverage(&[], 0.05), 0);
}

proptest! {
    #[test]
    fn coverage_and_path_match_oracles(
        pts in prop::collection::vec(prop::array::uniform6(0.0f64..2.0), 0..40),
        w in 0.01f64..0.5,
    ) {
        let t: Vec<Signature> = pts.into_iter().map(Signature).collect();
        prop_assert_eq!(value_coverage(&t, w), coverage_oracle(&t, w));
        prop_assert!((value_path_length(&t) - path_oracle(&t)).abs() < 1e-9);
    }

    #[test]
    fn value_adjustment_stays_nonnegative(
        a in prop::array::uniform6(0.0f64..2.0),
        b in prop::array::uniform6(0.0f64..2.0),
        rate in 0.0f64..1.0,
    ) {
        let (a, b) = (Signature(a), Signature(b));
        let toward = adjust_values(&a, &b, rate, ValueDirection::Toward);
        prop_assert!(valuation(&toward, &b) <= valuation(&a, &b) + 1e-12);
        let away = adjust_values(&a, &b, rate, ValueDirection::Away);
        prop_assert!(away.0.iter().all(|x| *x >= 0.0));
    }
}

#[test]
fn repeated_pull_shrinks_distance_geometrically() {
    let target = Signature([1.0, 0.8, 0.6, 0.9, 1.1, 0.7]);
    let mut ideal = Signature([0.2; 6]);
    let mut d = valuation(&ideal, &target);
    for _ in 0..10 {
        ideal = adjust_values(&ideal, &target, 0.2, ValueDirection::Toward);
        let next = valuation(&ideal, &target);
        assert!((next - 0.8 * d).abs() < 1e-12);
        d = next;
    }
}

#[test]
fn fresh_consumer_only_consumes_locally() {
    let w = World::new(2, &small()).unwrap();
    let s = evaluate_situations(&w, 0);
    assert_eq!(s.highest(), Some(Situation::ConsumeLocally));
    assert_eq!(s.len(), 1);
}

#[test]
fn consumption_needs_attraction_and_proximity() {
    let mut w = World::new(2, &small()).unwrap();
    let pid = 0;
    let spot = w.products()[pid].location;
    w.place_consumer(0, spot).unwrap();
    let sig = w.types()[w.products()[pid].type_id].signature;

    w.consumers_mut()[0].attract.set_threshold(1.0);
    w.consumers_mut()[0].ideal = sig;
    assert!(!try_begin_consumption(&mut w, 0, pid).unwrap());
    assert_eq!(w.consumers()[0].failed_search_count, 1);

    w.consumers_mut()[0].attract.set_threshold(-1.0);
    w.consumers_mut()[0].ideal = Signature(sig.0.map(|x| x + 1.0));
    assert!(!try_begin_consumption(&mut w, 0, pid).unwrap());

    w.consumers_mut()[0].ideal = sig;
    assert!(try_begin_consumption(&mut w, 0, pid).unwrap());
    assert_eq!(w.products()[pid].state, ProductState::BeingConsumed);
    let c = &w.consumers()[0];
    assert_eq!(c.consuming.unwrap().remaining, w.config().consumption_cycles);
    assert_eq!(c.failed_search_count, 0);
    // A product in use cannot be taken again.
    assert!(!try_begin_consumption(&mut w, 0, pid).unwrap());
}

#[test]
fn neighbour_labels_follow_distances() {
    let w = World::new(1, &small()).unwrap();
    let mut consumers = w.consumers().to_vec();
    for (i, c) in consumers.iter_mut().enumerate() {
        c.ideal = Signature([i as f64 * 0.1; 6]);
    }
    let mut g = TieGraph::empty(consumers.len(), 0.05);
    assert_eq!(categorize_neighbors(5, &g, &consumers), None);
    for n in [2, 4, 6, 9] {
        g.connect(5, n, 0.5).unwrap();
    }
    let labels = categorize_neighbors(5, &g, &consumers).unwrap();
    // 4 and 6 are equally close; the lower id wins.
    assert_eq!(labels.most_similar, 4);
    assert_eq!(labels.most_dissimilar, 9);
    assert_eq!(labels.most_admired, None);
    assert_eq!(labels.least_admired, None);
}

#[test]
fn admiration_labels_match_brute_force() {
    let cfg = small();
    let mut w = World::new(13, &cfg).unwrap();
    for _ in 0..200 {
        w.step().unwrap();
    }
    for id in 0..cfg.n_consumers {
        let Some(labels) = categorize_neighbors(id, w.network(), w.consumers()) else {
            continue;
        };
        let scored: Vec<(usize, f64)> = w
            .network()
            .neighbors(id)
            .map(|(n, _)| (n, w.consumers()[n].admiration().unwrap()))
            .collect();
        let best = scored.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let worst = scored.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let first = |v: f64| scored.iter().filter(|p| p.1 == v).map(|p| p.0).min();
        assert_eq!(labels.most_admired, first(best));
        assert_eq!(labels.least_admired, first(worst));
    }
}

#[test]
fn social_interaction_alternates_values_and_approach() {
    let cfg = small();
    let mut w = World::new(17, &cfg).unwrap();
    let id = (0..cfg.n_consumers).find(|&i| w.network().degree(i) > 0).unwrap();
    let labels = categorize_neighbors(id, w.network(), w.consumers()).unwrap();
    let friend = labels.most_similar;
    w.consumers_mut()[id].ideal = Signature([0.0; 6]);
    w.consumers_mut()[friend].ideal = Signature([1.0; 6]);
    let friend = categorize_neighbors(id, w.network(), w.consumers()).unwrap().most_similar;
    let target = w.consumers()[friend].ideal;
    let before = w.network().strength(id, friend).unwrap();
    let d0 = valuation(&w.consumers()[id].ideal, &target);

    assert_eq!(interact_socially(&mut w, id).unwrap(), Action::ValueInfluence(friend));
    let d1 = valuation(&w.consumers()[id].ideal, &target);
    assert!((d1 - (1.0 - cfg.social_rate) * d0).abs() < 1e-12);
    let after = w.network().strength(id, friend).unwrap();
    assert!((after - (before + cfg.tie_increment).min(1.0)).abs() < 1e-12);

    assert_eq!(interact_socially(&mut w, id).unwrap(), Action::ApproachFriend(friend));
    assert!(matches!(w.consumers()[id].movement, Movement::Navigating { friend: f, .. } if f == friend));
    assert_eq!(w.consumers()[id].dissatisfaction_count, 0);
}
