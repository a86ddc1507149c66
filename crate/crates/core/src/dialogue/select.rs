use crate::stl::{satisfies, Arg, Atom, Formula};
use crate::synthesis::{Template, Valuation};
use crate::world::{Demonstration, GridSpec, StateTrace};

fn holds(f: &Formula, d: &Demonstration, g: &GridSpec) -> bool {
    let states = d.states();
    satisfies(f, &StateTrace { states: &states, grid: g }, 0).unwrap_or(false)
}

/// First candidate, in the given order, whose instantiation under `v`
/// satisfies every positive demo and no negative demo at time 0. Candidates
/// that `v` does not fully resolve are skipped.
pub fn select_best_stl(
    candidates: &[Template],
    v: &Valuation,
    positives: &[Demonstration],
    negatives: &[Demonstration],
    g: &GridSpec,
) -> Option<Formula> {
    candidates.iter().find_map(|t| {
        let f = t.instantiate(v).ok()?;
        let ok = positives.iter().all(|d| holds(&f, d, g)) && !negatives.iter().any(|d| holds(&f, d, g));
        ok.then_some(f)
    })
}

/// Normal form used for exact-match scoring: operands of `∧` and `∨` are
/// ordered by their printed form and item names are lowercased.
pub fn normalize(f: &Formula) -> Formula {
    f.clone().map(&mut |node| match node {
        Formula::And(a, b) if b.to_string() < a.to_string() => Formula::And(b, a),
        Formula::Or(a, b) if b.to_string() < a.to_string() => Formula::Or(b, a),
        Formula::Atom(Atom::Prop { name, args }) => Formula::Atom(Atom::Prop {
            name,
            args: args
                .into_iter()
                .map(|a| match a {
                    Arg::Name(n) => Arg::Name(n.to_lowercase()),
                    other => other,
                })
                .collect(),
        }),
        other => other,
    })
}

pub fn formulas_match(a: &Formula, b: &Formula) -> bool {
    normalize(a) == normalize(b)
}
