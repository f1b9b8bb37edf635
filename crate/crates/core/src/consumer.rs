//! Situated consumers: situation evaluation, prioritised production rules,
//! foraging and consumption, value adaptation and social influence.

use std::collections::VecDeque;

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::cognition::{AttractivenessState, SelfOrganizingMap};
use crate::error::Result;
use crate::network::{referral, TieGraph};
use crate::product::{valuation, ProductState, Signature, VERTICES};
use crate::space::{ConsumerId, GridLocation, InstanceId};
use crate::world::World;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Expectation {
    Neutral,
    Optimistic,
    Pessimistic,
    SocialNavigation,
}

impl Expectation {
    fn reversed(self) -> Self {
        match self {
            Expectation::Optimistic => Expectation::Pessimistic,
            Expectation::Pessimistic => Expectation::Optimistic,
            Expectation::Neutral | Expectation::SocialNavigation => Expectation::Neutral,
        }
    }
}

/// Mental contexts, declared in firing priority (highest first).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Situation {
    Dissatisfied,
    SearchForAFriend,
    InteractSocially,
    Bored,
    ChangeLocation,
    ChangeValues,
    ConsumeLocally,
}

impl Situation {
    pub const ALL: [Situation; 7] = [
        Situation::Dissatisfied,
        Situation::SearchForAFriend,
        Situation::InteractSocially,
        Situation::Bored,
        Situation::ChangeLocation,
        Situation::ChangeValues,
        Situation::ConsumeLocally,
    ];

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

/// Set of simultaneously active situations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct Situations(u8);

impl Situations {
    pub fn insert(&mut self, s: Situation) {
        self.0 |= s.bit();
    }

    pub fn contains(&self, s: Situation) -> bool {
        self.0 & s.bit() != 0
    }

    pub fn iter(&self) -> impl Iterator<Item = Situation> + '_ {
        Situation::ALL.into_iter().filter(|s| self.contains(*s))
    }

    /// The situation whose rule fires this cycle.
    pub fn highest(&self) -> Option<Situation> {
        self.iter().next()
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }
}

impl FromIterator<Situation> for Situations {
    fn from_iter<I: IntoIterator<Item = Situation>>(iter: I) -> Self {
        let mut s = Situations::default();
        for x in iter {
            s.insert(x);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Consumption {
    pub instance: InstanceId,
    pub remaining: u32,
    /// Conception-map prediction captured when consumption began.
    pub predicted: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Movement {
    Foraging,
    Relocating { target: GridLocation, steps_left: u32 },
    Navigating { friend: ConsumerId, steps_left: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PendingChange {
    Location,
    Values,
}

/// What set off a pending change of location or values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChangeCause {
    Boredom,
    Dissatisfaction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueDirection {
    Toward,
    Away,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Consumer {
    pub id: ConsumerId,
    pub location: GridLocation,
    pub ideal: Signature,
    pub perception: SelfOrganizingMap,
    pub attract: AttractivenessState,
    pub expectation: Expectation,
    pub situations: Situations,
    pub boredom_count: u32,
    pub dissatisfaction_count: u32,
    pub failed_search_count: u32,
    pub consuming: Option<Consumption>,
    pub movement: Movement,
    pending: Option<(PendingChange, ChangeCause)>,
    change_location_next: bool,
    influence_values_next: bool,
    recent_utilities: VecDeque<f64>,
    /// Signature of the last product inspected and declined.
    last_declined: Option<Signature>,
    period_utilities: VecDeque<f64>,
    pub units_consumed: u64,
    pub utility_total: f64,
    pub(crate) period_units: u64,
    pub(crate) period_utility: f64,
    pub trajectory: Vec<Signature>,
}

impl Consumer {
    pub fn new(
        id: ConsumerId,
        location: GridLocation,
        ideal: Signature,
        perception: SelfOrganizingMap,
        attract: AttractivenessState,
    ) -> Self {
        Consumer {
            id,
            location,
            ideal,
            perception,
            attract,
            expectation: Expectation::Neutral,
            situations: Situations::default(),
            boredom_count: 0,
            dissatisfaction_count: 0,
            failed_search_count: 0,
            consuming: None,
            movement: Movement::Foraging,
            pending: None,
            change_location_next: true,
            influence_values_next: true,
            recent_utilities: VecDeque::new(),
            last_declined: None,
            period_utilities: VecDeque::new(),
            units_consumed: 0,
            utility_total: 0.0,
            period_units: 0,
            period_utility: 0.0,
            trajectory: Vec::new(),
        }
    }

    pub fn adjust_values(&mut self, target: &Signature, rate: f64, direction: ValueDirection) {
        self.ideal = adjust_values(&self.ideal, target, rate, direction);
    }

    /// Trailing mean of per-period realised utility; `None` before the first sample.
    pub fn admiration(&self) -> Option<f64> {
        if self.period_utilities.is_empty() {
            None
        } else {
            Some(self.period_utilities.iter().sum::<f64>() / self.period_utilities.len() as f64)
        }
    }

    pub(crate) fn close_period(&mut self, window: usize) {
        self.period_utilities.push_back(self.period_utility);
        while self.period_utilities.len() > window {
            self.period_utilities.pop_front();
        }
        self.period_units = 0;
        self.period_utility = 0.0;
        self.trajectory.push(self.ideal);
    }

    fn record_utility(&mut self, u: f64, window: usize) {
        self.recent_utilities.push_back(u);
        while self.recent_utilities.len() > window {
            self.recent_utilities.pop_front();
        }
    }

    fn activate_change(&mut self, cause: ChangeCause) {
        let kind = if self.change_location_next {
            PendingChange::Location
        } else {
            PendingChange::Values
        };
        self.pending = Some((kind, cause));
        self.change_location_next = !self.change_location_next;
    }

    pub fn is_dissatisfied(&self) -> bool {
        !self.recent_utilities.is_empty() && self.recent_utilities.iter().sum::<f64>() < 0.0
    }
}

/// `toward`: ideal + rate (target - ideal); `away`: ideal - rate (target - ideal).
/// Components are clamped at zero.
pub fn adjust_values(ideal: &Signature, target: &Signature, rate: f64, direction: ValueDirection) -> Signature {
    let sign = match direction {
        ValueDirection::Toward => 1.0,
        ValueDirection::Away => -1.0,
    };
    Signature(std::array::from_fn(|k| {
        (ideal.0[k] + sign * rate * (target.0[k] - ideal.0[k])).max(0.0)
    }))
}

/// Labels for a consumer's direct social contacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborLabels {
    pub most_similar: ConsumerId,
    pub most_dissimilar: ConsumerId,
    /// `None` while no neighbour has recorded a sampling period yet.
    pub most_admired: Option<ConsumerId>,
    pub least_admired: Option<ConsumerId>,
}

/// Categorises `id`'s neighbours by ideal distance and admiration.
/// Ties go to the lower consumer id. `None` if there are no ties.
pub fn categorize_neighbors(id: ConsumerId, network: &TieGraph, consumers: &[Consumer]) -> Option<NeighborLabels> {
    let me = &consumers[id];
    // neighbours iterate in increasing id order, so strict comparisons keep the lower id
    let mut most_similar: Option<(ConsumerId, f64)> = None;
    let mut most_dissimilar: Option<(ConsumerId, f64)> = None;
    let mut most_admired: Option<(ConsumerId, f64)> = None;
    let mut least_admired: Option<(ConsumerId, f64)> = None;
    for (n, _) in network.neighbors(id) {
        let d = valuation(&me.ideal, &consumers[n].ideal);
        if most_similar.is_none_or(|(_, best)| d < best) {
            most_similar = Some((n, d));
        }
        if most_dissimilar.is_none_or(|(_, best)| d > best) {
            most_dissimilar = Some((n, d));
        }
        if let Some(a) = consumers[n].admiration() {
            if most_admired.is_none_or(|(_, best)| a > best) {
                most_admired = Some((n, a));
            }
            if least_admired.is_none_or(|(_, best)| a < best) {
                least_admired = Some((n, a));
            }
        }
    }
    Some(NeighborLabels {
        most_similar: most_similar?.0,
        most_dissimilar: most_dissimilar?.0,
        most_admired: most_admired.map(|p| p.0),
        least_admired: least_admired.map(|p| p.0),
    })
}

/// What a consumer did in one cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionRecord {
    pub cycle: u64,
    pub consumer: ConsumerId,
    pub fired: Situation,
    pub action: Action,
    pub moved: bool,
    pub values_adjusted: u8,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Action {
    ReverseExpectations,
    Referral(Option<ConsumerId>),
    ValueInfluence(ConsumerId),
    ApproachFriend(ConsumerId),
    NoNeighbors,
    EndBoredom,
    Relocate,
    PerturbValues,
    BeginConsumption(InstanceId),
    DeclineProduct(InstanceId),
    Consume(InstanceId),
    CompleteConsumption(InstanceId, f64),
    Forage,
    Navigate(ConsumerId),
}

/// Active situations for consumer `id` given the current world.
pub fn evaluate_situations(world: &World, id: ConsumerId) -> Situations {
    let c = &world.consumers[id];
    let cfg = &world.config;
    let mut s = Situations::default();
    s.insert(Situation::ConsumeLocally);
    if cfg.social {
        let frustrated = c.dissatisfaction_count >= cfg.frustration_limit
            || c.failed_search_count >= cfg.frustration_limit;
        if c.consuming.is_none() && frustrated {
            s.insert(Situation::InteractSocially);
        }
        if world.network.degree(id) <= 2 && world.network.mean_strength(id) < cfg.tie_strength_floor {
            s.insert(Situation::SearchForAFriend);
        }
    }
    if c.boredom_count >= cfg.boredom_cycles {
        s.insert(Situation::Bored);
    }
    if c.is_dissatisfied() {
        s.insert(Situation::Dissatisfied);
    }
    let pending = c.pending.map(|p| p.0);
    if pending == Some(PendingChange::Location) || matches!(c.movement, Movement::Relocating { .. }) {
        s.insert(Situation::ChangeLocation);
    }
    if pending == Some(PendingChange::Values) {
        s.insert(Situation::ChangeValues);
    }
    s
}

/// Evaluates situations and fires the highest-priority rule for consumer `id`.
pub fn act(world: &mut World, id: ConsumerId) -> Result<ActionRecord> {
    let situations = evaluate_situations(world, id);
    world.consumers[id].situations = situations;
    let fired = situations.highest().unwrap_or(Situation::ConsumeLocally);
    let start = world.consumers[id].location;
    let ideal_before = world.consumers[id].ideal;
    let mut values_adjusted = 0u8;
    let action = match fired {
        Situation::Dissatisfied => {
            become_dissatisfied(world, id);
            Action::ReverseExpectations
        }
        Situation::SearchForAFriend => {
            let strength = world.config.referral_strength;
            Action::Referral(referral(&mut world.network, id, strength, &mut world.rng)?)
        }
        Situation::InteractSocially => {
            let a = interact_socially(world, id)?;
            if matches!(a, Action::ValueInfluence(_)) {
                values_adjusted += 1;
            }
            a
        }
        Situation::Bored => {
            let c = &mut world.consumers[id];
            c.boredom_count = 0;
            c.activate_change(ChangeCause::Boredom);
            Action::EndBoredom
        }
        Situation::ChangeLocation => {
            relocate(world, id)?;
            Action::Relocate
        }
        Situation::ChangeValues => {
            perturb_values(world, id);
            values_adjusted += 1;
            Action::PerturbValues
        }
        Situation::ConsumeLocally => {
            let a = consume_locally(world, id)?;
            if matches!(a, Action::CompleteConsumption(..)) {
                values_adjusted += 1;
            }
            a
        }
    };
    let c = &mut world.consumers[id];
    if c.consuming.is_none() && fired != Situation::Bored {
        c.boredom_count = c.boredom_count.saturating_add(1);
    }
    debug_assert!(values_adjusted > 0 || c.ideal == ideal_before);
    Ok(ActionRecord {
        cycle: world.cycle,
        consumer: id,
        fired,
        action,
        moved: c.location != start,
        values_adjusted,
    })
}

fn become_dissatisfied(world: &mut World, id: ConsumerId) {
    let c = &mut world.consumers[id];
    c.expectation = c.expectation.reversed();
    if let Some(consumption) = c.consuming.take() {
        world.products[consumption.instance].state = ProductState::Available;
    }
    c.movement = Movement::Foraging;
    c.recent_utilities.clear();
    c.activate_change(ChangeCause::Dissatisfaction);
}

/// One social influence from a single neighbour: most admired, else most similar.
///
/// Alternates per consumer between pulling the ideal toward the neighbour's
/// and setting off to navigate toward the neighbour. Strengthens the tie.
pub fn interact_socially(world: &mut World, id: ConsumerId) -> Result<Action> {
    let Some(labels) = categorize_neighbors(id, &world.network, &world.consumers) else {
        return Ok(Action::NoNeighbors);
    };
    let friend = labels.most_admired.unwrap_or(labels.most_similar);
    let target = world.consumers[friend].ideal;
    let rate = world.config.social_rate;
    let limit = world.config.navigation_limit;
    let c = &mut world.consumers[id];
    let action = if c.influence_values_next {
        c.adjust_values(&target, rate, ValueDirection::Toward);
        Action::ValueInfluence(friend)
    } else {
        c.movement = Movement::Navigating {
            friend,
            steps_left: limit,
        };
        c.expectation = Expectation::SocialNavigation;
        Action::ApproachFriend(friend)
    };
    c.influence_values_next = !c.influence_values_next;
    c.failed_search_count = 0;
    c.dissatisfaction_count = 0;
    world.network.strengthen(id, friend, world.config.tie_increment)?;
    Ok(action)
}

fn relocate(world: &mut World, id: ConsumerId) -> Result<()> {
    let c = &world.consumers[id];
    let (target, steps_left) = match (c.pending, c.movement) {
        (_, Movement::Relocating { target, steps_left }) => (target, steps_left),
        _ => {
            let range = world.config.relocation_range as i64;
            let dx = world.rng.random_range(-range..=range);
            let dy = world.rng.random_range(-range..=range);
            let target = world.grid.clamp(c.location.x as i64 + dx, c.location.y as i64 + dy);
            (target, 2 * world.config.relocation_range)
        }
    };
    world.consumers[id].pending = None;
    let here = world.consumers[id].location;
    let next = world.grid.step_toward(here, target);
    world.move_consumer(id, next)?;
    let c = &mut world.consumers[id];
    let steps_left = steps_left.saturating_sub(1);
    c.movement = if c.location == target || steps_left == 0 {
        Movement::Foraging
    } else {
        Movement::Relocating { target, steps_left }
    };
    Ok(())
}

/// Self-generated change of values and selection criteria.
///
/// After boredom the ideal leans toward the last declined product and the
/// threshold drops; after dissatisfaction the threshold rises. A uniform
/// random nudge is added to the ideal either way.
fn perturb_values(world: &mut World, id: ConsumerId) {
    let p = world.config.perturbation;
    let step = world.config.criteria_step;
    let rate = world.config.experiential_rate;
    let c = &mut world.consumers[id];
    let cause = c.pending.take().map_or(ChangeCause::Boredom, |p| p.1);
    match cause {
        ChangeCause::Boredom => {
            c.attract.set_threshold(c.attract.threshold() - step);
            if let Some(seen) = c.last_declined.take() {
                c.adjust_values(&seen, rate, ValueDirection::Toward);
            }
        }
        ChangeCause::Dissatisfaction => c.attract.set_threshold(c.attract.threshold() + step),
    }
    for k in 0..VERTICES {
        let delta = if p > 0.0 { world.rng.random_range(-p..=p) } else { 0.0 };
        c.ideal.0[k] = (c.ideal.0[k] + delta).max(0.0);
    }
}

fn consume_locally(world: &mut World, id: ConsumerId) -> Result<Action> {
    if let Some(mut consumption) = world.consumers[id].consuming {
        consumption.remaining -= 1;
        if consumption.remaining == 0 {
            world.consumers[id].consuming = Some(consumption);
            let u = complete_consumption(world, id)?;
            return Ok(Action::CompleteConsumption(consumption.instance, u));
        }
        world.consumers[id].consuming = Some(consumption);
        return Ok(Action::Consume(consumption.instance));
    }
    if let Movement::Navigating { friend, steps_left } = world.consumers[id].movement {
        let here = world.consumers[id].location;
        if let Some(pid) = world.occupancy.product_at(here) {
            if world.products[pid].state == ProductState::Available && try_begin_consumption(world, id, pid)? {
                let c = &mut world.consumers[id];
                c.movement = Movement::Foraging;
                c.expectation = Expectation::Neutral;
                return Ok(Action::BeginConsumption(pid));
            }
        }
        let there = world.consumers[friend].location;
        if here.manhattan(&there) > 1 {
            world.move_consumer(id, world.grid.step_toward(here, there))?;
        }
        let c = &mut world.consumers[id];
        let steps_left = steps_left - 1;
        if c.location.manhattan(&there) <= 1 || steps_left == 0 {
            c.movement = Movement::Foraging;
            c.expectation = Expectation::Neutral;
        } else {
            c.movement = Movement::Navigating { friend, steps_left };
        }
        return Ok(Action::Navigate(friend));
    }
    let here = world.consumers[id].location;
    let mut declined = None;
    if let Some(pid) = world.occupancy.product_at(here) {
        if world.products[pid].state == ProductState::Available {
            if try_begin_consumption(world, id, pid)? {
                return Ok(Action::BeginConsumption(pid));
            }
            declined = Some(pid);
        }
    }
    let mut next = world.field.ascend(here);
    if next == here {
        let options = world.grid.von_neumann_neighbors(here);
        next = *options.choose(&mut world.rng).expect("grid has more than one cell");
    }
    world.move_consumer(id, next)?;
    Ok(declined.map_or(Action::Forage, Action::DeclineProduct))
}

/// Inspects the product on the consumer's cell and begins consuming it if
/// it looks attractive and lies within the consumption gate of the ideal.
pub fn try_begin_consumption(world: &mut World, id: ConsumerId, instance: InstanceId) -> Result<bool> {
    let product = &world.products[instance];
    if product.state != ProductState::Available {
        return Ok(false);
    }
    let sig = world.types[product.type_id].signature;
    let c = &world.consumers[id];
    debug_assert_eq!(product.location, c.location);
    let attractive = c.attract.assess(&sig)?;
    let close = valuation(&c.ideal, &sig) <= world.config.consumption_gate;
    let c = &mut world.consumers[id];
    if attractive && close {
        c.consuming = Some(Consumption {
            instance,
            remaining: world.config.consumption_cycles,
            predicted: c.attract.predicted_utility(&sig),
        });
        c.boredom_count = 0;
        c.failed_search_count = 0;
        world.products[instance].state = ProductState::BeingConsumed;
        Ok(true)
    } else {
        c.failed_search_count += 1;
        c.last_declined = Some(sig);
        Ok(false)
    }
}

/// Finishes the current consumption: realises the type's utility, updates
/// expectation, memory, threshold and ideal, and queues the product for respawn.
pub fn complete_consumption(world: &mut World, id: ConsumerId) -> Result<f64> {
    let consumption = world.consumers[id]
        .consuming
        .take()
        .expect("complete_consumption requires an active consumption");
    let ptype = &world.types[world.products[consumption.instance].type_id];
    let (sig, u) = (ptype.signature, ptype.utility);
    let cfg = &world.config;
    let c = &mut world.consumers[id];
    c.expectation = if u >= consumption.predicted {
        Expectation::Optimistic
    } else {
        Expectation::Pessimistic
    };
    if u < consumption.predicted {
        c.dissatisfaction_count += 1;
    } else {
        c.dissatisfaction_count = c.dissatisfaction_count.saturating_sub(1);
    }
    c.perception.train_step(sig.components())?;
    c.attract.learn(&sig, u)?;
    c.attract.update_threshold(u);
    if u > 0.0 {
        c.adjust_values(&sig, cfg.experiential_rate, ValueDirection::Toward);
    } else if u < 0.0 {
        c.adjust_values(&sig, cfg.experiential_rate, ValueDirection::Away);
    }
    c.record_utility(u, cfg.dissatisfaction_window);
    c.units_consumed += 1;
    c.utility_total += u;
    c.period_units += 1;
    c.period_utility += u;
    world.consumption_events += 1;
    world.pending_respawns.push(consumption.instance);
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn priority_order() {
        let all: Situations = Situation::ALL.into_iter().collect();
        assert_eq!(all.highest(), Some(Situation::Dissatisfied));
        let s: Situations = [Situation::InteractSocially, Situation::SearchForAFriend, Situation::ConsumeLocally]
            .into_iter()
            .collect();
        assert_eq!(s.highest(), Some(Situation::SearchForAFriend));
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn adjust_values_rates() {
        let ideal = Signature([1.0, 0.5, 0.2, 0.9, 1.1, 0.0]);
        let target = Signature([0.3, 0.8, 0.2, 1.5, 0.1, 0.4]);
        assert_eq!(adjust_values(&ideal, &target, 0.0, ValueDirection::Toward), ideal);
        let full = adjust_values(&ideal, &target, 1.0, ValueDirection::Toward);
        assert!(full.distance(&target) < 1e-15);
        let mut x = ideal;
        let mut gap = valuation(&x, &target);
        for _ in 0..20 {
            x = adjust_values(&x, &target, 0.2, ValueDirection::Toward);
            let next = valuation(&x, &target);
            assert!((next - 0.8 * gap).abs() < 1e-12);
            gap = next;
        }
        let away = adjust_values(&ideal, &target, 0.5, ValueDirection::Away);
        assert!(away.0.iter().all(|v| *v >= 0.0));
        assert_eq!(away.0[0], 1.35);
    }

    proptest! {
        #[test]
        fn adjustment_keeps_ideal_valid(
            ideal in prop::array::uniform6(0.0f64..2.0),
            target in prop::array::uniform6(0.0f64..2.0),
            rate in 0.0f64..=1.0,
            away in any::<bool>(),
        ) {
            let dir = if away { ValueDirection::Away } else { ValueDirection::Toward };
            let out = adjust_values(&Signature(ideal), &Signature(target), rate, dir);
            prop_assert!(out.0.iter().all(|v| v.is_finite() && *v >= 0.0));
            if !away && rate > 0.0 && rate < 1.0 && ideal != target {
                prop_assert!(valuation(&out, &Signature(target)) < valuation(&Signature(ideal), &Signature(target)));
            }
        }
    }
}
