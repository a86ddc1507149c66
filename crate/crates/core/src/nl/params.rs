use std::collections::BTreeMap;

use regex::Regex;

use crate::stl::{Arg, Atom};
use crate::synthesis::{arg_slot_kind, SlotKind, SlotValue, Valuation};

use super::NlError;

pub const DEFAULT_ITEMS: &str = include_str!("../../data/items.toml");

/// What a parameter lookup is for: an atom's argument slots, or the
/// `occurrence`-th (1-based) temporal bound named `slot`.
#[derive(Debug, Clone, Copy)]
pub enum ParamTarget<'a> {
    Atom(&'a Atom),
    Interval { slot: &'a str, occurrence: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Mentions {
    pub coordinates: Vec<(i64, i64)>,
    pub items: Vec<String>,
    pub durations: Vec<u32>,
}

/// Pattern-based extraction of coordinates, item names and durations.
#[derive(Debug, Clone)]
pub struct ParamExtractor {
    aliases: BTreeMap<String, String>,
    coord: Regex,
    item: Regex,
    duration: Regex,
}

impl Default for ParamExtractor {
    fn default() -> Self {
        ParamExtractor::from_toml(DEFAULT_ITEMS).expect("shipped item aliases are valid")
    }
}

impl ParamExtractor {
    /// `item = ["alias", …]` per line.
    pub fn from_toml(text: &str) -> Result<Self, NlError> {
        let table: BTreeMap<String, Vec<String>> =
            toml::from_str(text).map_err(|e| NlError::Data(format!("item aliases: {e}")))?;
        let mut aliases = BTreeMap::new();
        for (item, forms) in table {
            for f in forms {
                aliases.insert(f.to_lowercase(), item.clone());
            }
        }
        if aliases.is_empty() {
            return Err(NlError::Data("item aliases: no entries".into()));
        }
        let mut forms: Vec<&String> = aliases.keys().collect();
        forms.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        let alt = forms.iter().map(|f| regex::escape(f).replace("\\ ", r"\s+").replace(' ', r"\s+")).collect::<Vec<_>>().join("|");
        Ok(ParamExtractor {
            item: Regex::new(&format!(r"\b(?:{alt})\b")).expect("alias regex"),
            aliases,
            coord: Regex::new(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)").expect("coordinate regex"),
            duration: Regex::new(r"\b(\d+)\s*(?:seconds?|secs?|s)\b").expect("duration regex"),
        })
    }

    pub fn item_for_alias(&self, alias: &str) -> Option<&str> {
        let key = alias.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ");
        self.aliases.get(&key).map(String::as_str)
    }

    pub fn scan(&self, text: &str) -> Mentions {
        let lower = text.to_lowercase();
        let mut m = Mentions::default();
        for c in self.coord.captures_iter(&lower) {
            if let (Ok(x), Ok(y)) = (c[1].parse(), c[2].parse()) {
                m.coordinates.push((x, y));
            }
        }
        for hit in self.item.find_iter(&lower) {
            if let Some(item) = self.item_for_alias(hit.as_str()) {
                m.items.push(item.to_string());
            }
        }
        for c in self.duration.captures_iter(&lower) {
            if let Ok(d) = c[1].parse() {
                m.durations.push(d);
            }
        }
        m
    }

    /// Bindings for `target` found in `text`; empty when nothing matches.
    pub fn extract_parameters(&self, text: &str, target: ParamTarget<'_>) -> Valuation {
        let m = self.scan(text);
        let mut v = Valuation::new();
        match target {
            ParamTarget::Atom(Atom::Prop { args, .. }) => {
                let coords = m.coordinates.first();
                let mut coord_pos = 0;
                for a in args {
                    let Arg::Slot(s) = a else { continue };
                    match arg_slot_kind(s) {
                        SlotKind::ItemName => {
                            if let Some(item) = m.items.first() {
                                v.insert(s.clone(), SlotValue::Name(item.clone()));
                            }
                        }
                        _ => {
                            if let Some(&(x, y)) = coords {
                                v.insert(s.clone(), SlotValue::Int(if coord_pos == 0 { x } else { y }));
                            }
                            coord_pos += 1;
                        }
                    }
                }
            }
            ParamTarget::Atom(Atom::Cmp { .. }) => {}
            ParamTarget::Interval { slot, occurrence } => {
                if let Some(d) = occurrence.checked_sub(1).and_then(|i| m.durations.get(i)) {
                    v.insert(slot.to_string(), SlotValue::Int(*d as i64));
                }
            }
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stl::parse_formula;

    fn atom(s: &str) -> Atom {
        match parse_formula(s).unwrap() {
            crate::stl::Formula::Atom(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn coordinates() {
        let p = ParamExtractor::default();
        let a = atom("robotAt(?x0,?y0)");
        let v = p.extract_parameters("Go to location (7, 4) and pick up the green cube.", ParamTarget::Atom(&a));
        assert_eq!(v["x0"], SlotValue::Int(7));
        assert_eq!(v["y0"], SlotValue::Int(4));
    }

    #[test]
    fn items() {
        let p = ParamExtractor::default();
        let a = atom("itemOnRobot(?item1)");
        let v = p.extract_parameters("pick up the purple cube", ParamTarget::Atom(&a));
        assert_eq!(v["item1"], SlotValue::Name("purpleCube".into()));
        let v = p.extract_parameters("grab the Violet  Block", ParamTarget::Atom(&a));
        assert_eq!(v["item1"], SlotValue::Name("purpleCube".into()));
        assert!(p.extract_parameters("pick up the cube", ParamTarget::Atom(&a)).is_empty());
        assert_eq!(p.scan("take the door key").items, vec!["doorKey"]);
    }

    #[test]
    fn durations() {
        let p = ParamExtractor::default();
        let v = p.extract_parameters(
            "open the door within 10 seconds and charge in 15 s",
            ParamTarget::Interval { slot: "t2", occurrence: 2 },
        );
        assert_eq!(v["t2"], SlotValue::Int(15));
        assert!(p.extract_parameters("open the door", ParamTarget::Interval { slot: "t1", occurrence: 1 }).is_empty());
    }
}
