use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::grid::{manhattan, Cell, GridSpec};
use super::WorldError;

/// Where an item is: on a cell or carried by the robot. Serialized as
/// `[x, y]` or the string `"robot"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ItemPos {
    At(Cell),
    OnRobot,
}

impl Serialize for ItemPos {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ItemPos::At(c) => c.serialize(s),
            ItemPos::OnRobot => s.serialize_str("robot"),
        }
    }
}

impl<'de> Deserialize<'de> for ItemPos {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Cell(Cell),
            Tag(String),
        }
        match Repr::deserialize(d)? {
            Repr::Cell(c) => Ok(ItemPos::At(c)),
            Repr::Tag(t) if t == "robot" => Ok(ItemPos::OnRobot),
            Repr::Tag(t) => Err(serde::de::Error::custom(format!("expected [x, y] or \"robot\", got \"{t}\""))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WorldState {
    pub robot: Cell,
    pub items: BTreeMap<String, ItemPos>,
    pub lamp_on: bool,
    pub fire_on: bool,
    pub door_open: bool,
    pub charger_plugged: bool,
    pub sitting: bool,
    /// Set when the last action tried to move into a wall.
    #[serde(default)]
    pub bumped_wall: bool,
}

impl WorldState {
    /// Robot at the grid's start cell, items at their home cells, everything
    /// switched off, robot standing.
    pub fn initial(g: &GridSpec) -> Self {
        WorldState {
            robot: g.start,
            items: g.items.iter().map(|i| (i.name.clone(), ItemPos::At(i.cell))).collect(),
            lamp_on: false,
            fire_on: false,
            door_open: false,
            charger_plugged: false,
            sitting: false,
            bumped_wall: false,
        }
    }

    pub fn carries(&self, item: &str) -> bool {
        self.items.get(item) == Some(&ItemPos::OnRobot)
    }

    pub fn carried(&self) -> impl Iterator<Item = &str> {
        self.items.iter().filter(|(_, p)| **p == ItemPos::OnRobot).map(|(n, _)| n.as_str())
    }

    /// Checks the state against the grid's cells and item registry.
    pub fn check(&self, g: &GridSpec) -> Result<(), WorldError> {
        if !g.in_bounds(self.robot) || g.is_wall(self.robot) {
            return Err(WorldError::BadState(format!("robot at {:?} is not a free cell", self.robot)));
        }
        if self.items.len() != g.items.len() {
            return Err(WorldError::BadState("item set differs from the grid's items".into()));
        }
        for (name, pos) in &self.items {
            if g.item_index(name).is_none() {
                return Err(WorldError::UnknownItem(name.clone()));
            }
            if let ItemPos::At(c) = pos {
                if !g.in_bounds(*c) || g.is_wall(*c) {
                    return Err(WorldError::BadState(format!("{name} at {c:?} is not a free cell")));
                }
            }
        }
        if self.sitting && self.robot != g.fixtures.chair {
            return Err(WorldError::BadState("sitting away from the chair".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Action {
    MoveN,
    MoveS,
    MoveE,
    MoveW,
    PickUp,
    Drop,
    ToggleLamp,
    ToggleFire,
    ToggleDoor,
    PlugCharger,
    Sit,
    Stand,
    Wait,
}

impl Action {
    pub const ALL: [Action; 13] = [
        Action::MoveN,
        Action::MoveS,
        Action::MoveE,
        Action::MoveW,
        Action::PickUp,
        Action::Drop,
        Action::ToggleLamp,
        Action::ToggleFire,
        Action::ToggleDoor,
        Action::PlugCharger,
        Action::Sit,
        Action::Stand,
        Action::Wait,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Action::MoveN => "moveN",
            Action::MoveS => "moveS",
            Action::MoveE => "moveE",
            Action::MoveW => "moveW",
            Action::PickUp => "pickUp",
            Action::Drop => "drop",
            Action::ToggleLamp => "toggleLamp",
            Action::ToggleFire => "toggleFire",
            Action::ToggleDoor => "toggleDoor",
            Action::PlugCharger => "plugCharger",
            Action::Sit => "sit",
            Action::Stand => "stand",
            Action::Wait => "wait",
        }
    }

    pub fn index(self) -> usize {
        Action::ALL.iter().position(|a| *a == self).expect("listed")
    }

    fn delta(self) -> Option<(i32, i32)> {
        match self {
            Action::MoveN => Some((0, -1)),
            Action::MoveS => Some((0, 1)),
            Action::MoveE => Some((1, 0)),
            Action::MoveW => Some((-1, 0)),
            _ => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Action {
    type Err = WorldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Action::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| WorldError::UnknownAction(s.to_string()))
    }
}

/// Environment dynamics. Illegal actions leave the state unchanged, except
/// that trying to walk into a wall sets `bumped_wall` for that step.
pub fn step(s: &WorldState, a: Action, g: &GridSpec) -> WorldState {
    let mut n = s.clone();
    n.bumped_wall = false;
    let near = |c: Cell| manhattan(s.robot, c) <= 1;
    if let Some((dx, dy)) = a.delta() {
        if s.sitting {
            return n;
        }
        let target = (s.robot.0 + dx, s.robot.1 + dy);
        if !g.in_bounds(target) {
            return n;
        }
        if g.is_wall(target) {
            n.bumped_wall = true;
            return n;
        }
        n.robot = target;
        return n;
    }
    match a {
        Action::PickUp => {
            let lamp = g.fixtures.lamp;
            let visible = |c: Cell| s.lamp_on || manhattan(c, lamp) <= 1;
            let pick = g.items.iter().find(|i| match s.items.get(&i.name) {
                Some(ItemPos::At(c)) => *c == s.robot && visible(*c),
                _ => false,
            });
            if let Some(item) = pick {
                n.items.insert(item.name.clone(), ItemPos::OnRobot);
            }
        }
        Action::Drop => {
            if let Some(item) = g.items.iter().find(|i| s.carries(&i.name)) {
                n.items.insert(item.name.clone(), ItemPos::At(s.robot));
            }
        }
        Action::ToggleLamp if near(g.fixtures.lamp) => n.lamp_on = !s.lamp_on,
        Action::ToggleFire if near(g.fixtures.fire) => n.fire_on = !s.fire_on,
        Action::ToggleDoor if near(g.fixtures.door) && s.carries("doorKey") => n.door_open = !s.door_open,
        Action::PlugCharger if near(g.fixtures.charger) => n.charger_plugged = true,
        Action::Sit if s.robot == g.fixtures.chair => n.sitting = true,
        Action::Stand => n.sitting = false,
        _ => {}
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(g: &GridSpec, robot: Cell) -> WorldState {
        WorldState { robot, ..WorldState::initial(g) }
    }

    #[test]
    fn plain_move() {
        let g = GridSpec::default();
        assert_eq!(step(&at(&g, (1, 0)), Action::MoveW, &g).robot, (0, 0));
        assert_eq!(step(&at(&g, (3, 3)), Action::MoveN, &g).robot, (3, 2));
        assert_eq!(step(&at(&g, (3, 3)), Action::MoveS, &g).robot, (3, 4));
    }

    #[test]
    fn wall_bump_and_bounds() {
        let g = GridSpec::default();
        let s = at(&g, (3, 3));
        let n = step(&s, Action::MoveW, &g);
        assert_eq!(n.robot, (3, 3));
        assert!(n.bumped_wall);
        assert!(!step(&n, Action::Wait, &g).bumped_wall);
        let corner = at(&g, (0, 0));
        let n = step(&corner, Action::MoveN, &g);
        assert_eq!(n, corner);
    }

    #[test]
    fn pickup_needs_light() {
        let g = GridSpec::default();
        let dark = at(&g, (5, 5));
        assert!(!step(&dark, Action::PickUp, &g).carries("purpleCube"));
        let lit = WorldState { lamp_on: true, ..dark };
        let n = step(&lit, Action::PickUp, &g);
        assert!(n.carries("purpleCube"));
        // The key lies next to the lamp, so it is visible in the dark.
        assert!(step(&at(&g, (0, 1)), Action::PickUp, &g).carries("doorKey"));
        let dropped = step(&WorldState { robot: (6, 5), ..n }, Action::Drop, &g);
        assert_eq!(dropped.items["purpleCube"], ItemPos::At((6, 5)));
    }

    #[test]
    fn toggles_need_adjacency() {
        let g = GridSpec::default();
        assert!(step(&at(&g, (1, 0)), Action::ToggleLamp, &g).lamp_on);
        assert!(!step(&at(&g, (2, 0)), Action::ToggleLamp, &g).lamp_on);
        assert!(step(&at(&g, (7, 1)), Action::ToggleFire, &g).fire_on);
        let near_door = at(&g, (3, 7));
        assert!(!step(&near_door, Action::ToggleDoor, &g).door_open);
        let mut keyed = near_door.clone();
        keyed.items.insert("doorKey".into(), ItemPos::OnRobot);
        assert!(step(&keyed, Action::ToggleDoor, &g).door_open);
        assert!(step(&at(&g, (6, 7)), Action::PlugCharger, &g).charger_plugged);
    }

    #[test]
    fn sitting_blocks_moves() {
        let g = GridSpec::default();
        let s = step(&at(&g, (0, 7)), Action::Sit, &g);
        assert!(s.sitting);
        assert_eq!(step(&s, Action::MoveN, &g).robot, (0, 7));
        assert!(!step(&at(&g, (1, 7)), Action::Sit, &g).sitting);
        assert!(!step(&s, Action::Stand, &g).sitting);
    }

    #[test]
    fn json_shape() {
        let g = GridSpec::default();
        let mut s = WorldState::initial(&g);
        s.items.insert("doorKey".into(), ItemPos::OnRobot);
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"doorKey\":\"robot\"") && text.contains("\"lampOn\":false"), "{text}");
        let back: WorldState = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!("toggleLamp".parse::<Action>().unwrap(), Action::ToggleLamp);
        assert!("fly".parse::<Action>().is_err());
    }
}
