use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::WorldError;

/// `(x, y)` grid coordinates; `(0, 0)` is the top-left cell.
pub type Cell = (i32, i32);

pub const DEFAULT_GRID: &str = include_str!("../../data/grid.toml");

pub fn manhattan(a: Cell, b: Cell) -> i32 {
    (a.0 - b.0).abs() + (a.1 - b.1).abs()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fixtures {
    pub lamp: Cell,
    pub fire: Cell,
    pub door: Cell,
    pub charger: Cell,
    pub chair: Cell,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemSpec {
    pub name: String,
    pub cell: Cell,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub width: i32,
    pub height: i32,
    pub start: Cell,
    pub walls: BTreeSet<Cell>,
    pub water: BTreeSet<Cell>,
    pub fixtures: Fixtures,
    pub items: Vec<ItemSpec>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::from_toml(DEFAULT_GRID).expect("shipped grid is valid")
    }
}

impl GridSpec {
    pub fn from_toml(text: &str) -> Result<Self, WorldError> {
        let g: GridSpec = toml::from_str(text).map_err(|e| WorldError::Grid(e.to_string()))?;
        g.validate()?;
        Ok(g)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("grid serializes")
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.0 >= 0 && c.1 >= 0 && c.0 < self.width && c.1 < self.height
    }

    pub fn is_wall(&self, c: Cell) -> bool {
        self.walls.contains(&c)
    }

    pub fn is_water(&self, c: Cell) -> bool {
        self.water.contains(&c)
    }

    pub fn item_index(&self, name: &str) -> Option<usize> {
        self.items.iter().position(|i| i.name == name)
    }

    pub fn item_names(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|i| i.name.as_str())
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        if self.width <= 0 || self.height <= 0 {
            return Err(WorldError::Grid("grid dimensions must be positive".into()));
        }
        let f = &self.fixtures;
        let named = [
            ("start", self.start),
            ("lamp", f.lamp),
            ("fire", f.fire),
            ("door", f.door),
            ("charger", f.charger),
            ("chair", f.chair),
        ];
        let items = self.items.iter().map(|i| (i.name.as_str(), i.cell));
        for (name, c) in named.into_iter().chain(items) {
            if !self.in_bounds(c) {
                return Err(WorldError::Grid(format!("{name} at {c:?} is out of bounds")));
            }
            if self.is_wall(c) {
                return Err(WorldError::Grid(format!("{name} at {c:?} is inside a wall")));
            }
        }
        for c in self.walls.iter().chain(&self.water) {
            if !self.in_bounds(*c) {
                return Err(WorldError::Grid(format!("cell {c:?} is out of bounds")));
            }
        }
        let mut seen = BTreeSet::new();
        for i in &self.items {
            if !seen.insert(i.name.as_str()) {
                return Err(WorldError::Grid(format!("item `{}` listed twice", i.name)));
            }
        }
        Ok(())
    }

    /// Size of the full state-tuple domain: robot cell, each item as a
    /// (cell, carried) pair, five fixture/posture Booleans and the
    /// wall-contact flag.
    pub fn state_space_size(&self) -> u128 {
        let cells = (self.width as u128) * (self.height as u128);
        let mut n = cells;
        for _ in &self.items {
            n *= cells * 2;
        }
        n * (1 << 5) * 2
    }
}
