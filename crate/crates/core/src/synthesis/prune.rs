use std::fmt;

use serde::{Deserialize, Serialize};

use crate::stl::{satisfies, Atom, Formula, Interval, MonitorError, TraceView};

use super::enumerate::SynthesisError;
use super::template::Template;

/// `before` must become true no later than `after`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalDependency {
    pub before: String,
    pub after: String,
}

impl CausalDependency {
    pub fn new(before: impl Into<String>, after: impl Into<String>) -> Self {
        CausalDependency { before: before.into(), after: after.into() }
    }
}

pub const DEFAULT_PROBE_HORIZON: u32 = 3;

/// A Boolean trace over named atoms; `rows[i][t]` is atom `i` at time `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitTrace {
    pub atoms: Vec<String>,
    pub rows: Vec<Vec<bool>>,
}

impl BitTrace {
    fn from_bits(atoms: &[String], len: usize, bits: u64) -> Self {
        let rows = (0..atoms.len())
            .map(|i| (0..len).map(|t| bits >> (i * len + t) & 1 == 1).collect())
            .collect();
        BitTrace { atoms: atoms.to_vec(), rows }
    }

    fn row(&self, name: &str) -> Option<&[bool]> {
        self.atoms.iter().position(|a| a == name).map(|i| self.rows[i].as_slice())
    }
}

impl fmt::Display for BitTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (name, row)) in self.atoms.iter().zip(&self.rows).enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{name}=")?;
            for &b in row {
                f.write_str(if b { "1" } else { "0" })?;
            }
        }
        Ok(())
    }
}

impl TraceView for BitTrace {
    fn len(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Atoms are matched by name only; arguments are ignored.
    fn holds(&self, t: usize, atom: &Atom) -> Result<bool, MonitorError> {
        let row = self.row(atom.name()).ok_or_else(|| MonitorError::MissingSignal(atom.name().to_string()))?;
        row.get(t).copied().ok_or(MonitorError::TimeOutOfRange { t, len: row.len() })
    }

    fn signal(&self, _t: usize, name: &str) -> Result<f64, MonitorError> {
        Err(MonitorError::MissingSignal(name.to_string()))
    }
}

/// Rebinds every temporal interval to `[0, horizon]`.
pub fn with_probe_intervals(f: &Formula, horizon: u32) -> Formula {
    let probe = Interval::new(0, horizon).expect("0 <= horizon");
    f.clone().map(&mut |node| match node {
        Formula::Eventually(_, x) => Formula::Eventually(probe.clone(), x),
        Formula::Always(_, x) => Formula::Always(probe.clone(), x),
        Formula::Until(_, a, b) => Formula::Until(probe.clone(), a, b),
        other => other,
    })
}

fn distinct_atom_names(f: &Formula) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for a in f.atoms() {
        if !names.iter().any(|n| n == a.name()) {
            names.push(a.name().to_string());
        }
    }
    names
}

/// Does the trace order `after` strictly ahead of `before`? That is, `after`
/// occurs and every occurrence precedes the first occurrence of `before`.
fn violates(trace: &BitTrace, dep: &CausalDependency) -> bool {
    let (Some(after), before) = (trace.row(&dep.after), trace.row(&dep.before)) else {
        return false;
    };
    let first_before = before.and_then(|r| r.iter().position(|&b| b)).unwrap_or(usize::MAX);
    match after.iter().rposition(|&b| b) {
        Some(last_after) => last_after < first_before,
        None => false,
    }
}

/// Searches all Boolean traces of length `horizon + 1` over the formula's
/// atoms for one that satisfies `f` (intervals rebound to `[0, horizon]`)
/// while ordering `after` ahead of `before`.
pub fn causal_witness(f: &Formula, dep: &CausalDependency, horizon: u32) -> Result<Option<BitTrace>, SynthesisError> {
    if horizon < 1 {
        return Err(SynthesisError::BadHorizon);
    }
    let probe = with_probe_intervals(f, horizon);
    let atoms = distinct_atom_names(&probe);
    if !atoms.contains(&dep.after) {
        return Ok(None);
    }
    let len = horizon as usize + 1;
    let total_bits = atoms.len() * len;
    if total_bits > 24 {
        return Err(SynthesisError::TooManyAtoms(atoms.len()));
    }
    for bits in 0..(1u64 << total_bits) {
        let trace = BitTrace::from_bits(&atoms, len, bits);
        if violates(&trace, dep) && satisfies(&probe, &trace, 0).unwrap_or(false) {
            return Ok(Some(trace));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrunedTemplate {
    pub template: Template,
    pub counterexample: BitTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneReport {
    pub survivors: Vec<Template>,
    pub pruned: Vec<PrunedTemplate>,
}

impl PruneReport {
    /// One line per pruned template: canonical string, a tab, then the
    /// counterexample as `atom=bits` columns.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for p in &self.pruned {
            out.push_str(&format!("{}\t{}\n", p.template.canonical(), p.counterexample));
        }
        out
    }
}

/// Drops templates that admit a satisfying trace where `dep.after` happens
/// entirely before `dep.before`. Order of survivors is preserved.
pub fn prune_causal(templates: &[Template], dep: &CausalDependency, horizon: u32) -> Result<PruneReport, SynthesisError> {
    if horizon < 1 {
        return Err(SynthesisError::BadHorizon);
    }
    let mut report = PruneReport { survivors: Vec::new(), pruned: Vec::new() };
    for t in templates {
        match causal_witness(&t.skeleton, dep, horizon)? {
            Some(cx) => report.pruned.push(PrunedTemplate { template: t.clone(), counterexample: cx }),
            None => report.survivors.push(t.clone()),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stl::parse_formula;
    use crate::synthesis::enumerate::{enumerate_pstl, Literal, Op, SynthesisBounds};

    fn running_example() -> Vec<Template> {
        let lits = vec![Literal::new(Atom::prop("lampOn")), Literal::new(Atom::prop("itemOnRobot"))];
        enumerate_pstl(&lits, &[Op::And, Op::Eventually], SynthesisBounds { l: 3, u: 5 }).unwrap()
    }

    fn dep() -> CausalDependency {
        CausalDependency::new("lampOn", "itemOnRobot")
    }

    #[test]
    fn running_example_pruning() {
        let report = prune_causal(&running_example(), &dep(), 3).unwrap();
        let survivors: Vec<String> = report.survivors.iter().map(|t| t.canonical()).collect();
        let pruned: Vec<String> = report.pruned.iter().map(|p| p.template.canonical()).collect();
        for s in [
            "(lampOn & itemOnRobot)",
            "(lampOn & F[0,?t1](itemOnRobot))",
            "F[0,?t1](lampOn & F[0,?t2](itemOnRobot))",
        ] {
            assert!(survivors.contains(&s.to_string()), "{s} should survive: {survivors:?}");
        }
        for p in ["(F[0,?t1](lampOn) & F[0,?t2](itemOnRobot))", "(itemOnRobot & F[0,?t1](lampOn))"] {
            assert!(pruned.contains(&p.to_string()), "{p} should be pruned: {pruned:?}");
        }
        assert_eq!(survivors.len(), 8);
        assert_eq!(pruned.len(), 6);
    }

    #[test]
    fn counterexamples_are_genuine() {
        let report = prune_causal(&running_example(), &dep(), 3).unwrap();
        for p in &report.pruned {
            let probe = with_probe_intervals(&p.template.skeleton, 3);
            assert!(satisfies(&probe, &p.counterexample, 0).unwrap());
            assert!(violates(&p.counterexample, &dep()));
        }
        let text = report.render();
        assert_eq!(text.lines().count(), report.pruned.len());
        assert!(text.contains("itemOnRobot=1000"), "{text}");
    }

    #[test]
    fn templates_without_the_atom_are_kept() {
        let t = vec![Template::new(parse_formula("F[0,?t1](lampOn)").unwrap())];
        let report = prune_causal(&t, &dep(), 3).unwrap();
        assert_eq!(report.survivors, t);
    }

    #[test]
    fn horizon_must_be_positive() {
        assert_eq!(prune_causal(&[], &dep(), 0), Err(SynthesisError::BadHorizon));
    }
}
