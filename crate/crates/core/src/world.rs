//! The simulated world: initialisation from a seed, priming, and the cycle loop.

use rand::seq::SliceRandom;
use rand::Rng;
use sha2::{Digest, Sha256};

use crate::cognition::{perceive, AttractivenessState, SelfOrganizingMap, SomSchedule, CONCEPT_DIM};
use crate::config::Config;
use crate::consumer::{act, ActionRecord, Consumer};
use crate::error::{Error, Result};
use crate::network::{init_watts_strogatz, SmallWorldParams, TieGraph};
use crate::experiment::type_set_for_seed;
use crate::product::{ProductInstance, ProductState, ProductType, Signature, VERTICES};
use crate::rng::{substream, SimRng, Stream};
use crate::space::{respawn_location, ConsumerId, Grid, GridLocation, Occupancy, ProximityField};

const PLACEMENT_ATTEMPTS: usize = 1_000;

/// Per-consumer record for one sampling period.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsumerSample {
    pub units: u64,
    pub utility: f64,
    pub ideal: Signature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodSample {
    pub cycle: u64,
    pub consumers: Vec<ConsumerSample>,
    pub total_units: u64,
    pub total_utility: f64,
}

impl PeriodSample {
    /// Builds a sample whose aggregates are the sums of the per-consumer rows.
    pub fn from_rows(cycle: u64, consumers: Vec<ConsumerSample>) -> Self {
        let total_units = consumers.iter().map(|c| c.units).sum();
        let total_utility = consumers.iter().map(|c| c.utility).sum();
        PeriodSample {
            cycle,
            consumers,
            total_units,
            total_utility,
        }
    }
}

#[derive(Debug, Clone)]
pub struct World {
    pub(crate) seed: u64,
    pub(crate) config: Config,
    pub(crate) grid: Grid,
    pub(crate) types: Vec<ProductType>,
    pub(crate) products: Vec<ProductInstance>,
    pub(crate) consumers: Vec<Consumer>,
    pub(crate) occupancy: Occupancy,
    pub(crate) field: ProximityField,
    pub(crate) network: TieGraph,
    pub(crate) rng: SimRng,
    pub(crate) cycle: u64,
    pub(crate) pending_respawns: Vec<usize>,
    pub(crate) consumption_events: u64,
    trace: Option<Vec<ActionRecord>>,
}

fn distinct_cells(grid: Grid, n: usize, rng: &mut SimRng) -> Result<Vec<GridLocation>> {
    let mut taken = vec![false; grid.cells()];
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut placed = false;
        for _ in 0..PLACEMENT_ATTEMPTS {
            let idx = rng.random_range(0..grid.cells());
            if !taken[idx] {
                taken[idx] = true;
                out.push(grid.location(idx));
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::Config(format!(
                "could not place {n} entities on {} cells; density too high",
                grid.cells()
            )));
        }
    }
    Ok(out)
}

/// Builds an unprimed world: type set, placements, shared initial maps,
/// identical ideals at the mean type signature, and the social network.
pub fn init_world(seed: u64, config: &Config) -> Result<World> {
    config.validate()?;
    let grid = Grid::new(config.grid_width, config.grid_height)?;
    let types = type_set_for_seed(seed, config)?;

    let mut placement = substream(seed, Stream::Placement);
    let product_cells = distinct_cells(grid, config.n_instances(), &mut placement)?;
    let consumer_cells = distinct_cells(grid, config.n_consumers, &mut placement)?;
    let mut occupancy = Occupancy::new(grid);
    let products: Vec<ProductInstance> = product_cells
        .iter()
        .enumerate()
        .map(|(id, &location)| ProductInstance {
            id,
            type_id: id % config.n_types,
            location,
            state: ProductState::Available,
        })
        .collect();
    for p in &products {
        occupancy.place_product(p.id, p.location)?;
    }
    let field = ProximityField::rebuild(grid, config.field_radius, &product_cells);

    let schedule = |radius0| SomSchedule {
        alpha0: config.som_alpha0,
        alpha_decay: config.som_alpha_decay,
        alpha_floor: config.som_alpha_floor,
        radius0,
        radius_decay: config.som_radius_decay,
        radius_floor: config.som_radius_floor,
    };
    let mut som_rng = substream(seed, Stream::SomInit);
    let sig_range = (0.0, config.som_init_max);
    let perception = SelfOrganizingMap::random(
        config.perception_rows,
        config.perception_cols,
        &[sig_range; VERTICES],
        schedule(None),
        &mut som_rng,
    )?;
    let mut concept_ranges = [sig_range; CONCEPT_DIM];
    concept_ranges[VERTICES] = (-1.0, 1.0);
    let conception = SelfOrganizingMap::random(
        config.conception_nodes,
        1,
        &concept_ranges,
        schedule(None),
        &mut som_rng,
    )?;
    let attract = AttractivenessState::new(conception, config.initial_threshold, config.threshold_rate)?;
    let ideal = Signature::mean(types.iter().map(|t| &t.signature)).expect("type set is non-empty");

    let mut consumers = Vec::with_capacity(config.n_consumers);
    for (id, &loc) in consumer_cells.iter().enumerate() {
        occupancy.place_consumer(id, loc)?;
        consumers.push(Consumer::new(id, loc, ideal, perception.clone(), attract.clone()));
    }

    let network = init_watts_strogatz(
        &SmallWorldParams {
            n: config.n_consumers,
            degree: config.ws_degree,
            rewire: config.ws_rewire,
            initial_strength: config.tie_initial,
            removal_floor: config.tie_removal,
        },
        &mut substream(seed, Stream::Network),
    )?;

    Ok(World {
        seed,
        config: config.clone(),
        grid,
        types,
        products,
        consumers,
        occupancy,
        field,
        network,
        rng: substream(seed, Stream::CycleLoop),
        cycle: 0,
        pending_respawns: Vec::new(),
        consumption_events: 0,
        trace: None,
    })
}

/// Exposes every consumer to each product type once, in type order.
pub fn prime_consumers(world: &mut World) -> Result<()> {
    for c in &mut world.consumers {
        for t in &world.types {
            perceive(&c.perception, &t.signature)?;
            let _ = c.attract.predicted_utility(&t.signature);
            c.perception.train_step(t.signature.components())?;
            c.attract.learn(&t.signature, t.utility)?;
        }
    }
    Ok(())
}

fn hash_f64s<'a>(h: &mut Sha256, xs: impl IntoIterator<Item = &'a f64>) {
    for x in xs {
        h.update(x.to_bits().to_le_bytes());
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl World {
    /// Initialised and primed world, ready to cycle.
    pub fn new(seed: u64, config: &Config) -> Result<Self> {
        let mut w = init_world(seed, config)?;
        prime_consumers(&mut w)?;
        Ok(w)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn types(&self) -> &[ProductType] {
        &self.types
    }

    pub fn products(&self) -> &[ProductInstance] {
        &self.products
    }

    pub fn consumers(&self) -> &[Consumer] {
        &self.consumers
    }

    pub fn consumers_mut(&mut self) -> &mut [Consumer] {
        &mut self.consumers
    }

    pub fn occupancy(&self) -> &Occupancy {
        &self.occupancy
    }

    pub fn field(&self) -> &ProximityField {
        &self.field
    }

    pub fn network(&self) -> &TieGraph {
        &self.network
    }

    pub fn network_mut(&mut self) -> &mut TieGraph {
        &mut self.network
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn consumption_events(&self) -> u64 {
        self.consumption_events
    }

    /// Starts recording one [`ActionRecord`] per consumer per cycle.
    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn trace(&self) -> Option<&[ActionRecord]> {
        self.trace.as_deref()
    }

    /// Moves consumer `id` one step; rejected moves leave it in place.
    pub fn move_consumer(&mut self, id: ConsumerId, to: GridLocation) -> Result<bool> {
        let from = self.consumers[id].location;
        let accepted = self.occupancy.move_consumer(id, from, to)?;
        if accepted {
            self.consumers[id].location = to;
        }
        Ok(accepted)
    }

    /// Teleports a consumer for test setups; the target must be free of consumers.
    pub fn place_consumer(&mut self, id: ConsumerId, to: GridLocation) -> Result<()> {
        if self.consumers[id].consuming.is_some() {
            return Err(Error::ContractViolation(format!("consumer {id} is consuming")));
        }
        let from = self.consumers[id].location;
        if from == to {
            return Ok(());
        }
        if self.occupancy.consumer_at(to).is_some() {
            return Err(Error::ContractViolation(format!("cell {to:?} holds a consumer")));
        }
        // rebuild occupancy around the new position
        let mut occ = Occupancy::new(self.grid);
        for c in &self.consumers {
            occ.place_consumer(c.id, if c.id == id { to } else { c.location })?;
        }
        for p in &self.products {
            occ.place_product(p.id, p.location)?;
        }
        self.occupancy = occ;
        self.consumers[id].location = to;
        Ok(())
    }

    pub(crate) fn product_locations(&self) -> Vec<GridLocation> {
        self.products.iter().map(|p| p.location).collect()
    }

    fn respawn_pending(&mut self) -> Result<()> {
        let pending = std::mem::take(&mut self.pending_respawns);
        for id in pending {
            let old = self.products[id].location;
            let new = respawn_location(&self.occupancy, id, old, self.config.respawn_sigma, &mut self.rng);
            self.occupancy.move_product(id, old, new)?;
            self.products[id].location = new;
            self.products[id].state = ProductState::Available;
            let locations = self.product_locations();
            self.field.relocate(old, new, &locations);
        }
        Ok(())
    }

    fn strengthen_contacts(&mut self) -> Result<()> {
        let delta = self.config.tie_increment;
        for a in 0..self.consumers.len() {
            let loc = self.consumers[a].location;
            for next in [
                self.grid.clamp(loc.x as i64 + 1, loc.y as i64),
                self.grid.clamp(loc.x as i64, loc.y as i64 + 1),
            ] {
                if next == loc {
                    continue;
                }
                if let Some(b) = self.occupancy.consumer_at(next) {
                    self.network.strengthen(a, b, delta)?;
                }
            }
        }
        Ok(())
    }

    /// Advances one cycle. Returns a sample when the cycle is a sampling cycle.
    pub fn step(&mut self) -> Result<Option<PeriodSample>> {
        self.cycle += 1;
        if self.config.social {
            self.network.decay_all(self.config.tie_decay);
        }
        let mut order: Vec<ConsumerId> = (0..self.consumers.len()).collect();
        order.shuffle(&mut self.rng);
        for id in order {
            let record = act(self, id)?;
            if let Some(trace) = self.trace.as_mut() {
                trace.push(record);
            }
        }
        self.respawn_pending()?;
        if self.config.social {
            self.strengthen_contacts()?;
        }
        if cfg!(debug_assertions) {
            self.audit()?;
        }
        Ok(self.cycle.is_multiple_of(self.config.sample_every).then(|| self.sample()))
    }

    /// Closes the current sampling period for every consumer.
    pub fn sample(&mut self) -> PeriodSample {
        let window = self.config.admiration_window;
        let rows = self
            .consumers
            .iter_mut()
            .map(|c| {
                let row = ConsumerSample {
                    units: c.period_units,
                    utility: c.period_utility,
                    ideal: c.ideal,
                };
                c.close_period(window);
                row
            })
            .collect();
        PeriodSample::from_rows(self.cycle, rows)
    }

    /// Checks occupancy, counts, consumption bookkeeping and ideal validity.
    pub fn audit(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Internal(format!("cycle {}: {msg}", self.cycle)));
        if self.occupancy.consumer_count() != self.consumers.len() {
            return fail(format!("{} consumers on the grid", self.occupancy.consumer_count()));
        }
        if self.occupancy.product_count() != self.products.len() {
            return fail(format!("{} products on the grid", self.occupancy.product_count()));
        }
        for c in &self.consumers {
            if self.occupancy.consumer_at(c.location) != Some(c.id) {
                return fail(format!("consumer {} not registered at {:?}", c.id, c.location));
            }
            if c.ideal.0.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return fail(format!("consumer {} has invalid ideal {:?}", c.id, c.ideal));
            }
            if let Some(k) = c.consuming {
                let p = &self.products[k.instance];
                if p.location != c.location || p.state != ProductState::BeingConsumed {
                    return fail(format!("consumer {} consuming product {} elsewhere", c.id, p.id));
                }
            }
        }
        for p in &self.products {
            if self.occupancy.product_at(p.location) != Some(p.id) {
                return fail(format!("product {} not registered at {:?}", p.id, p.location));
            }
        }
        let consuming = self.consumers.iter().filter(|c| c.consuming.is_some()).count();
        let busy = self.products.iter().filter(|p| p.state == ProductState::BeingConsumed).count();
        if consuming != busy {
            return fail(format!("{consuming} consumers consuming but {busy} products busy"));
        }
        Ok(())
    }

    /// SHA-256 over the social network only.
    pub fn network_checksum(&self) -> String {
        let mut h = Sha256::new();
        for (a, b, s) in self.network.edges() {
            h.update((a as u64).to_le_bytes());
            h.update((b as u64).to_le_bytes());
            h.update(s.to_bits().to_le_bytes());
        }
        hex(&h.finalize())
    }

    /// SHA-256 over the state that must agree between the members of a pair:
    /// types, placements, ideals, map weights, thresholds and the network.
    /// Configuration flags are excluded.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.types {
            h.update(t.topology.mask().to_le_bytes());
            hash_f64s(&mut h, t.signature.components());
            hash_f64s(&mut h, [&t.utility]);
        }
        for p in &self.products {
            h.update([p.location.x, p.location.y, p.type_id as u32, p.state as u32].map(u32::to_le_bytes).concat());
        }
        for c in &self.consumers {
            h.update([c.location.x, c.location.y].map(u32::to_le_bytes).concat());
            hash_f64s(&mut h, c.ideal.components());
            hash_f64s(&mut h, c.perception.weights());
            hash_f64s(&mut h, c.attract.map().weights());
            hash_f64s(&mut h, [&c.attract.threshold()]);
        }
        h.update(self.network_checksum().as_bytes());
        hex(&h.finalize())
    }
}
