//! The consumption space: a bounded grid with von Neumann moves, one consumer
//! per cell, a product proximity field and Gaussian product respawn.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridLocation {
    pub x: u32,
    pub y: u32,
}

impl GridLocation {
    pub const fn new(x: u32, y: u32) -> Self {
        GridLocation { x, y }
    }

    pub fn manhattan(&self, other: &GridLocation) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

/// Neighbour order used everywhere ties are broken. North is decreasing `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    North,
    East,
    South,
    West,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::East,
        Direction::South,
        Direction::West,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    width: u32,
    height: u32,
}

impl Grid {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Config(format!("grid {width}x{height} has no cells")));
        }
        Ok(Grid { width, height })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn cells(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn contains(&self, loc: GridLocation) -> bool {
        loc.x < self.width && loc.y < self.height
    }

    pub fn index(&self, loc: GridLocation) -> usize {
        debug_assert!(self.contains(loc));
        loc.y as usize * self.width as usize + loc.x as usize
    }

    pub fn location(&self, index: usize) -> GridLocation {
        GridLocation::new(
            (index % self.width as usize) as u32,
            (index / self.width as usize) as u32,
        )
    }

    pub fn step(&self, loc: GridLocation, dir: Direction) -> Option<GridLocation> {
        let GridLocation { x, y } = loc;
        let next = match dir {
            Direction::North => GridLocation::new(x, y.checked_sub(1)?),
            Direction::East => GridLocation::new(x + 1, y),
            Direction::South => GridLocation::new(x, y + 1),
            Direction::West => GridLocation::new(x.checked_sub(1)?, y),
        };
        self.contains(next).then_some(next)
    }

    /// In-bounds orthogonal neighbours in N, E, S, W order.
    pub fn von_neumann_neighbors(&self, loc: GridLocation) -> Vec<GridLocation> {
        Direction::ALL
            .iter()
            .filter_map(|&d| self.step(loc, d))
            .collect()
    }

    pub fn clamp(&self, x: i64, y: i64) -> GridLocation {
        GridLocation::new(
            x.clamp(0, self.width as i64 - 1) as u32,
            y.clamp(0, self.height as i64 - 1) as u32,
        )
    }

    /// One Manhattan step from `from` toward `to`; the x axis is closed first.
    pub fn step_toward(&self, from: GridLocation, to: GridLocation) -> GridLocation {
        if from.x < to.x {
            GridLocation::new(from.x + 1, from.y)
        } else if from.x > to.x {
            GridLocation::new(from.x - 1, from.y)
        } else if from.y < to.y {
            GridLocation::new(from.x, from.y + 1)
        } else if from.y > to.y {
            GridLocation::new(from.x, from.y - 1)
        } else {
            from
        }
    }
}

/// Linear-decay proximity to the nearest product, composed by maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityField {
    grid: Grid,
    radius: u32,
    values: Vec<f64>,
}

impl ProximityField {
    pub fn new(grid: Grid, radius: u32) -> Self {
        ProximityField {
            grid,
            radius: radius.max(1),
            values: vec![0.0; grid.cells()],
        }
    }

    pub fn rebuild(grid: Grid, radius: u32, products: &[GridLocation]) -> Self {
        let mut field = ProximityField::new(grid, radius);
        for &p in products {
            field.stamp(p);
        }
        field
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    fn intensity(&self, distance: u32) -> f64 {
        (1.0 - distance as f64 / self.radius as f64).max(0.0)
    }

    fn diamond(&self, center: GridLocation) -> impl Iterator<Item = GridLocation> + '_ {
        let r = self.radius as i64 - 1;
        let (cx, cy) = (center.x as i64, center.y as i64);
        (-r..=r).flat_map(move |dy| {
            let span = r - dy.abs();
            (-span..=span).filter_map(move |dx| {
                let (x, y) = (cx + dx, cy + dy);
                (x >= 0 && y >= 0 && x < self.grid.width as i64 && y < self.grid.height as i64)
                    .then(|| GridLocation::new(x as u32, y as u32))
            })
        })
    }

    fn stamp(&mut self, product: GridLocation) {
        let cells: Vec<GridLocation> = self.diamond(product).collect();
        for c in cells {
            let v = self.intensity(c.manhattan(&product));
            let slot = &mut self.values[self.grid.index(c)];
            if v > *slot {
                *slot = v;
            }
        }
    }

    /// Incrementally moves one product from `old` to `new`.
    /// `products` lists every product location after the move.
    pub fn relocate(&mut self, old: GridLocation, new: GridLocation, products: &[GridLocation]) {
        let cells: Vec<GridLocation> = self.diamond(old).collect();
        let reach = 2 * self.radius;
        let nearby: Vec<GridLocation> = products
            .iter()
            .copied()
            .filter(|p| p.manhattan(&old) < reach)
            .collect();
        for c in cells {
            let v = nearby
                .iter()
                .map(|p| self.intensity(c.manhattan(p)))
                .fold(0.0, f64::max);
            let idx = self.grid.index(c);
            self.values[idx] = v;
        }
        self.stamp(new);
    }

    pub fn value(&self, loc: GridLocation) -> f64 {
        self.values[self.grid.index(loc)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn best_neighbor(&self, loc: GridLocation, better: impl Fn(f64, f64) -> bool) -> GridLocation {
        let mut best = loc;
        let mut best_value = self.value(loc);
        for n in self.grid.von_neumann_neighbors(loc) {
            let v = self.value(n);
            if better(v, best_value) {
                best = n;
                best_value = v;
            }
        }
        best
    }

    /// Neighbour with the largest strictly higher field value, or `loc` itself.
    pub fn ascend(&self, loc: GridLocation) -> GridLocation {
        self.best_neighbor(loc, |v, best| v > best)
    }

    /// Neighbour with the smallest strictly lower field value, or `loc` itself.
    pub fn descend(&self, loc: GridLocation) -> GridLocation {
        self.best_neighbor(loc, |v, best| v < best)
    }
}

pub type ConsumerId = usize;
pub type InstanceId = usize;

/// Which consumer and which product instance sit on each cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Occupancy {
    grid: Grid,
    consumers: Vec<Option<ConsumerId>>,
    products: Vec<Option<InstanceId>>,
}

impl Occupancy {
    pub fn new(grid: Grid) -> Self {
        Occupancy {
            grid,
            consumers: vec![None; grid.cells()],
            products: vec![None; grid.cells()],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn consumer_at(&self, loc: GridLocation) -> Option<ConsumerId> {
        self.consumers[self.grid.index(loc)]
    }

    pub fn product_at(&self, loc: GridLocation) -> Option<InstanceId> {
        self.products[self.grid.index(loc)]
    }

    pub fn place_consumer(&mut self, id: ConsumerId, loc: GridLocation) -> Result<()> {
        let slot = &mut self.consumers[self.grid.index(loc)];
        if slot.is_some() {
            return Err(Error::ContractViolation(format!("cell {loc:?} already holds a consumer")));
        }
        *slot = Some(id);
        Ok(())
    }

    pub fn place_product(&mut self, id: InstanceId, loc: GridLocation) -> Result<()> {
        let slot = &mut self.products[self.grid.index(loc)];
        if slot.is_some() {
            return Err(Error::ContractViolation(format!("cell {loc:?} already holds a product")));
        }
        *slot = Some(id);
        Ok(())
    }

    /// Moves consumer `id` from `from` to a neighbouring (or the same) cell.
    /// Returns whether the move was accepted; occupied targets are rejected.
    pub fn move_consumer(&mut self, id: ConsumerId, from: GridLocation, to: GridLocation) -> Result<bool> {
        if self.consumer_at(from) != Some(id) {
            return Err(Error::ContractViolation(format!(
                "consumer {id} is not at {from:?}"
            )));
        }
        if to == from {
            return Ok(true);
        }
        if !self.grid.contains(to) || from.manhattan(&to) != 1 {
            return Err(Error::ContractViolation(format!(
                "move {from:?} -> {to:?} is not to a von Neumann neighbour"
            )));
        }
        let target = self.grid.index(to);
        if self.consumers[target].is_some() {
            return Ok(false);
        }
        self.consumers[target] = Some(id);
        let source = self.grid.index(from);
        self.consumers[source] = None;
        Ok(true)
    }

    pub fn move_product(&mut self, id: InstanceId, from: GridLocation, to: GridLocation) -> Result<()> {
        if self.product_at(from) != Some(id) {
            return Err(Error::ContractViolation(format!("product {id} is not at {from:?}")));
        }
        let source = self.grid.index(from);
        self.products[source] = None;
        self.place_product(id, to)
    }

    pub fn consumer_count(&self) -> usize {
        self.consumers.iter().flatten().count()
    }

    pub fn product_count(&self) -> usize {
        self.products.iter().flatten().count()
    }
}

/// Continuous per-axis Gaussian offsets with standard deviation `sigma`.
pub fn gaussian_offset<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> (f64, f64) {
    let dx: f64 = StandardNormal.sample(rng);
    let dy: f64 = StandardNormal.sample(rng);
    (sigma * dx, sigma * dy)
}

const RESPAWN_REDRAWS: usize = 100;

/// New cell for product `id`, leaving `old`: rounded Gaussian offsets clamped
/// to the grid, redrawn while the target holds another product, then a
/// row-major linear probe from the last target.
pub fn respawn_location<R: Rng + ?Sized>(
    occupancy: &Occupancy,
    id: InstanceId,
    old: GridLocation,
    sigma: f64,
    rng: &mut R,
) -> GridLocation {
    let grid = occupancy.grid();
    let free = |loc: GridLocation| occupancy.product_at(loc).is_none() || occupancy.product_at(loc) == Some(id);
    let mut target = old;
    for _ in 0..RESPAWN_REDRAWS {
        let (dx, dy) = gaussian_offset(rng, sigma);
        target = grid.clamp(old.x as i64 + dx.round() as i64, old.y as i64 + dy.round() as i64);
        if free(target) {
            return target;
        }
    }
    let start = grid.index(target);
    (0..grid.cells())
        .map(|k| grid.location((start + k) % grid.cells()))
        .find(|&loc| free(loc))
        .expect("more cells than products")
}
