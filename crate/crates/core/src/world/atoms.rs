use crate::stl::{Arg, Atom, AtomVocabulary, MonitorError, TraceView};

use super::grid::{manhattan, Cell, GridSpec};
use super::state::{ItemPos, WorldState};
use super::WorldError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Coordinate,
    Item,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AtomSpec {
    pub name: &'static str,
    pub params: &'static [(&'static str, ParamKind)],
}

const XY: &[(&str, ParamKind)] = &[("x", ParamKind::Coordinate), ("y", ParamKind::Coordinate)];
const ITEM: &[(&str, ParamKind)] = &[("item", ParamKind::Item)];
const ITEM_XY: &[(&str, ParamKind)] =
    &[("item", ParamKind::Item), ("x", ParamKind::Coordinate), ("y", ParamKind::Coordinate)];

pub const ATOMS: [AtomSpec; 15] = [
    AtomSpec { name: "robotAt", params: XY },
    AtomSpec { name: "robotAtWall", params: &[] },
    AtomSpec { name: "robotAtWater", params: &[] },
    AtomSpec { name: "lampOn", params: &[] },
    AtomSpec { name: "lampOff", params: &[] },
    AtomSpec { name: "fireOn", params: &[] },
    AtomSpec { name: "fireOff", params: &[] },
    AtomSpec { name: "doorOpen", params: &[] },
    AtomSpec { name: "doorClosed", params: &[] },
    AtomSpec { name: "itemOnRobot", params: ITEM },
    AtomSpec { name: "itemAt", params: ITEM_XY },
    AtomSpec { name: "chargerPlugged", params: &[] },
    AtomSpec { name: "chargerUnplugged", params: &[] },
    AtomSpec { name: "robotSittingOnChair", params: &[] },
    AtomSpec { name: "robotStanding", params: &[] },
];

pub fn atom_spec(name: &str) -> Option<&'static AtomSpec> {
    ATOMS.iter().find(|a| a.name == name)
}

/// The registered atoms as a parser vocabulary.
pub struct WorldVocabulary;

impl AtomVocabulary for WorldVocabulary {
    fn arity(&self, name: &str) -> Option<usize> {
        atom_spec(name).map(|s| s.params.len())
    }
}

/// The atom with every parameter left as a slot named after the parameter
/// and `index`: `robotAt(?x0,?y0)`, `itemOnRobot(?item1)`.
pub fn slotted_atom(spec: &AtomSpec, index: usize) -> Atom {
    let args = spec.params.iter().map(|(p, _)| Arg::Slot(format!("{p}{index}"))).collect();
    Atom::Prop { name: spec.name.to_string(), args }
}

fn int_arg(a: &Arg) -> Result<i64, WorldError> {
    match a {
        Arg::Int(v) => Ok(*v),
        Arg::Slot(s) => Err(WorldError::Unresolved(s.clone())),
        Arg::Name(n) => Err(WorldError::BadArgument(n.clone())),
    }
}

fn item_arg<'a>(a: &'a Arg, g: &GridSpec) -> Result<&'a str, WorldError> {
    match a {
        Arg::Name(n) if g.item_index(n).is_some() => Ok(n),
        Arg::Name(n) => Err(WorldError::UnknownItem(n.clone())),
        Arg::Slot(s) => Err(WorldError::Unresolved(s.clone())),
        Arg::Int(v) => Err(WorldError::BadArgument(v.to_string())),
    }
}

/// Truth of a registered atom in a state.
pub fn atom_eval(s: &WorldState, atom: &Atom, g: &GridSpec) -> Result<bool, WorldError> {
    let Atom::Prop { name, args } = atom else {
        return Err(WorldError::UnknownAtom(atom.to_string()));
    };
    let spec = atom_spec(name).ok_or_else(|| WorldError::UnknownAtom(name.clone()))?;
    if spec.params.len() != args.len() {
        return Err(WorldError::Arity { name: name.clone(), expected: spec.params.len(), found: args.len() });
    }
    Ok(match spec.name {
        "robotAt" => (s.robot.0 as i64, s.robot.1 as i64) == (int_arg(&args[0])?, int_arg(&args[1])?),
        "robotAtWall" => s.bumped_wall || g.is_wall(s.robot),
        "robotAtWater" => g.is_water(s.robot),
        "lampOn" => s.lamp_on,
        "lampOff" => !s.lamp_on,
        "fireOn" => s.fire_on,
        "fireOff" => !s.fire_on,
        "doorOpen" => s.door_open,
        "doorClosed" => !s.door_open,
        "itemOnRobot" => s.carries(item_arg(&args[0], g)?),
        "itemAt" => {
            let item = item_arg(&args[0], g)?;
            let cell = (int_arg(&args[1])?, int_arg(&args[2])?);
            matches!(s.items.get(item), Some(ItemPos::At(c)) if (c.0 as i64, c.1 as i64) == cell)
        }
        "chargerPlugged" => s.charger_plugged,
        "chargerUnplugged" => !s.charger_plugged,
        "robotSittingOnChair" => s.sitting,
        "robotStanding" => !s.sitting,
        _ => unreachable!("registered atom without evaluator"),
    })
}

fn nearest(from: Cell, cells: impl Iterator<Item = Cell>) -> Option<i32> {
    cells.map(|c| manhattan(from, c)).min()
}

/// Lower bound on the number of actions before `atom` holds, ignoring
/// walls: 0 when it already holds, `None` when nothing can make it true.
pub fn atom_distance(s: &WorldState, atom: &Atom, g: &GridSpec) -> Result<Option<u32>, WorldError> {
    if atom_eval(s, atom, g)? {
        return Ok(Some(0));
    }
    let Atom::Prop { name, args } = atom else { unreachable!("atom_eval rejects numeric atoms") };
    let r = s.robot;
    let near = |c: Cell| (manhattan(r, c) - 1).max(0);
    let item_cell = |item: &str| match s.items.get(item) {
        Some(ItemPos::At(c)) => Some(*c),
        _ => None,
    };
    // Walk to an item and pick it up; in the dark, switch the lamp on first.
    let lamp = g.fixtures.lamp;
    let fetch = |c: Cell| {
        if s.lamp_on || manhattan(c, lamp) <= 1 {
            manhattan(r, c) + 1
        } else {
            near(lamp) + 1 + (manhattan(lamp, c) - 1).max(0) + 1
        }
    };
    let d = match name.as_str() {
        "robotAt" => Some(manhattan(r, (int_arg(&args[0])? as i32, int_arg(&args[1])? as i32))),
        "robotAtWall" => nearest(r, g.walls.iter().copied()),
        "robotAtWater" => nearest(r, g.water.iter().copied()),
        "lampOn" | "lampOff" => Some(near(lamp) + 1),
        "fireOn" | "fireOff" => Some(near(g.fixtures.fire) + 1),
        "doorOpen" | "doorClosed" => match item_cell("doorKey") {
            Some(k) => Some(fetch(k) + (manhattan(k, g.fixtures.door) - 1).max(0) + 1),
            None if s.carries("doorKey") => Some(near(g.fixtures.door) + 1),
            None => None,
        },
        "itemOnRobot" => item_cell(item_arg(&args[0], g)?).map(fetch),
        "itemAt" => {
            let item = item_arg(&args[0], g)?;
            let target = (int_arg(&args[1])? as i32, int_arg(&args[2])? as i32);
            match item_cell(item) {
                Some(c) => Some(fetch(c) + manhattan(c, target) + 1),
                None => Some(manhattan(r, target) + 1),
            }
        }
        "chargerPlugged" => Some(near(g.fixtures.charger) + 1),
        "robotSittingOnChair" => Some(manhattan(r, g.fixtures.chair) + 1),
        "robotStanding" => Some(1),
        // Nothing unplugs the charger.
        _ => None,
    };
    Ok(d.map(|d| d as u32))
}

/// A trace view straight over world states, used where building string-keyed
/// records would be wasteful (policy training and rollouts).
pub struct StateTrace<'a> {
    pub states: &'a [WorldState],
    pub grid: &'a GridSpec,
}

impl TraceView for StateTrace<'_> {
    fn len(&self) -> usize {
        self.states.len()
    }

    fn holds(&self, t: usize, atom: &Atom) -> Result<bool, MonitorError> {
        let s = self.states.get(t).ok_or(MonitorError::TimeOutOfRange { t, len: self.states.len() })?;
        atom_eval(s, atom, self.grid).map_err(|e| match e {
            WorldError::Unresolved(slot) => MonitorError::Unresolved(format!("?{slot}")),
            other => MonitorError::MissingSignal(other.to_string()),
        })
    }

    fn signal(&self, t: usize, name: &str) -> Result<f64, MonitorError> {
        let s = self.states.get(t).ok_or(MonitorError::TimeOutOfRange { t, len: self.states.len() })?;
        match name {
            "x" => Ok(s.robot.0 as f64),
            "y" => Ok(s.robot.1 as f64),
            _ => Err(MonitorError::MissingSignal(name.to_string())),
        }
    }
}
