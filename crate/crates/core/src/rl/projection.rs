use serde::{Deserialize, Serialize};

use crate::stl::{Arg, Atom, Formula};
use crate::world::{GridSpec, ItemPos, WorldState};

use super::RlError;

const ITEM_BITS: u32 = 13;
const ON_ROBOT: u64 = (1 << ITEM_BITS) - 1;
const MAX_ITEMS: usize = 3;

/// The parts of a [`WorldState`] a task can depend on. The robot position is
/// always kept; everything else only when some atom of the formula (or the
/// dynamics behind it) refers to it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Projection {
    pub lamp: bool,
    pub fire: bool,
    pub door: bool,
    pub charger: bool,
    pub sitting: bool,
    pub bumped: bool,
    pub items: Vec<String>,
}

impl Projection {
    pub fn for_formula(phi: &Formula, g: &GridSpec) -> Result<Self, RlError> {
        let mut p = Projection::default();
        let add_item = |p: &mut Projection, name: &str| {
            if !p.items.iter().any(|i| i == name) {
                p.items.push(name.to_string());
            }
        };
        for atom in phi.atoms() {
            let Atom::Prop { name, args } = atom else { continue };
            match name.as_str() {
                "robotAtWall" => p.bumped = true,
                "lampOn" | "lampOff" => p.lamp = true,
                "fireOn" | "fireOff" => p.fire = true,
                "doorOpen" | "doorClosed" => {
                    p.door = true;
                    if g.item_index("doorKey").is_some() {
                        add_item(&mut p, "doorKey");
                    }
                }
                "chargerPlugged" | "chargerUnplugged" => p.charger = true,
                "robotSittingOnChair" | "robotStanding" => p.sitting = true,
                "itemOnRobot" | "itemAt" => {
                    // Picking up needs light, so the lamp matters too.
                    p.lamp = true;
                    if let Some(Arg::Name(item)) = args.first() {
                        add_item(&mut p, item);
                    }
                }
                _ => {}
            }
        }
        p.items.sort();
        p.check(g)?;
        Ok(p)
    }

    /// Keeps every component.
    pub fn full(g: &GridSpec) -> Self {
        Projection {
            lamp: true,
            fire: true,
            door: true,
            charger: true,
            sitting: true,
            bumped: true,
            items: g.item_names().map(str::to_string).collect(),
        }
    }

    pub fn check(&self, g: &GridSpec) -> Result<(), RlError> {
        if g.width > 255 || g.height > 255 || (g.width as u64 * g.height as u64) >= ON_ROBOT {
            return Err(RlError::KeyOverflow(format!("{}x{} grid", g.width, g.height)));
        }
        if self.items.len() > MAX_ITEMS {
            return Err(RlError::KeyOverflow(format!("{} tracked items (at most {MAX_ITEMS})", self.items.len())));
        }
        Ok(())
    }

    /// Bit layout, low to high: x (8), y (8), lamp, fire, door, charger,
    /// sitting, bumped, then 13 bits per tracked item (cell index, or all
    /// ones when carried).
    pub fn key(&self, s: &WorldState, g: &GridSpec) -> u64 {
        let mut k = (s.robot.0 as u64 & 0xff) | ((s.robot.1 as u64 & 0xff) << 8);
        let flags = [
            self.lamp && s.lamp_on,
            self.fire && s.fire_on,
            self.door && s.door_open,
            self.charger && s.charger_plugged,
            self.sitting && s.sitting,
            self.bumped && s.bumped_wall,
        ];
        for (i, f) in flags.into_iter().enumerate() {
            k |= (f as u64) << (16 + i);
        }
        for (i, item) in self.items.iter().enumerate() {
            let v = match s.items.get(item) {
                Some(ItemPos::OnRobot) => ON_ROBOT,
                Some(ItemPos::At(c)) => (c.1 * g.width + c.0) as u64,
                None => 0,
            };
            k |= v << (22 + ITEM_BITS * i as u32);
        }
        k
    }

    /// Component names, for policy file headers.
    pub fn describe(&self) -> String {
        let mut parts = vec!["robot".to_string()];
        for (on, name) in [
            (self.lamp, "lamp"),
            (self.fire, "fire"),
            (self.door, "door"),
            (self.charger, "charger"),
            (self.sitting, "sitting"),
            (self.bumped, "bumped"),
        ] {
            if on {
                parts.push(name.to_string());
            }
        }
        parts.extend(self.items.iter().cloned());
        parts.join(",")
    }
}
