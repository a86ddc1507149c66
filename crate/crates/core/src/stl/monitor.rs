//! Boolean satisfaction and quantitative robustness over discrete traces.
//!
//! Temporal windows `[t+lo, t+hi]` are clipped at the end of the trace. An
//! empty window makes `G` vacuously true (robustness `+inf`) and `F` / `U`
//! false (robustness `-inf`). `Implies` is evaluated as `!a | b`.

use std::ops::RangeInclusive;

use thiserror::Error;

use super::ast::{Atom, Comparator, Formula, Interval, Threshold};
use super::trace::TraceView;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MonitorError {
    #[error("time index {t} outside trace of length {len}")]
    TimeOutOfRange { t: usize, len: usize },
    #[error("formula is not ground: unresolved {0}")]
    Unresolved(String),
    #[error("trace has no signal `{0}`")]
    MissingSignal(String),
}

/// Robustness of a satisfied environment atom; a violated one scores the
/// negation.
pub const ATOM_ROBUSTNESS: f64 = 1.0;

fn window(t: usize, iv: &Interval, len: usize) -> Result<RangeInclusive<usize>, MonitorError> {
    let (lo, hi) = iv.resolved().ok_or_else(|| MonitorError::Unresolved(iv.to_string()))?;
    let start = t + lo as usize;
    let end = (t + hi as usize).min(len.saturating_sub(1));
    // `start > end` yields an empty range.
    #[allow(clippy::reversed_empty_ranges)]
    Ok(if start > end { 1..=0 } else { start..=end })
}

fn check_time(t: usize, len: usize) -> Result<(), MonitorError> {
    if t < len {
        Ok(())
    } else {
        Err(MonitorError::TimeOutOfRange { t, len })
    }
}

fn threshold(atom: &Atom) -> Result<f64, MonitorError> {
    match atom {
        Atom::Cmp { threshold: Threshold::Fixed(c), .. } => Ok(*c),
        Atom::Cmp { threshold: Threshold::Slot(s), .. } => Err(MonitorError::Unresolved(format!("?{s}"))),
        Atom::Prop { .. } => unreachable!("threshold of a propositional atom"),
    }
}

/// Does `trace` satisfy `phi` at time `t`?
pub fn satisfies<T: TraceView + ?Sized>(phi: &Formula, trace: &T, t: usize) -> Result<bool, MonitorError> {
    check_time(t, trace.len())?;
    sat(phi, trace, t)
}

fn sat<T: TraceView + ?Sized>(phi: &Formula, tr: &T, t: usize) -> Result<bool, MonitorError> {
    Ok(match phi {
        Formula::True => true,
        Formula::Atom(atom @ Atom::Prop { .. }) => tr.holds(t, atom)?,
        Formula::Atom(atom @ Atom::Cmp { signal, op, .. }) => {
            let c = threshold(atom)?;
            let x = tr.signal(t, signal)?;
            match op {
                Comparator::Le => x <= c,
                Comparator::Ge => x >= c,
                Comparator::Eq => x == c,
            }
        }
        Formula::Not(f) => !sat(f, tr, t)?,
        Formula::And(a, b) => sat(a, tr, t)? && sat(b, tr, t)?,
        Formula::Or(a, b) => sat(a, tr, t)? || sat(b, tr, t)?,
        Formula::Implies(a, b) => !sat(a, tr, t)? || sat(b, tr, t)?,
        Formula::Eventually(iv, f) => {
            for s in window(t, iv, tr.len())? {
                if sat(f, tr, s)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Always(iv, f) => {
            for s in window(t, iv, tr.len())? {
                if !sat(f, tr, s)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Until(iv, a, b) => {
            let w = window(t, iv, tr.len())?;
            // `a` must hold on every instant in [t, t'); track that prefix.
            let mut prefix_ok = true;
            let mut next = t;
            for s in w {
                while next < s {
                    if !sat(a, tr, next)? {
                        prefix_ok = false;
                        break;
                    }
                    next += 1;
                }
                if !prefix_ok {
                    break;
                }
                if sat(b, tr, s)? {
                    return Ok(true);
                }
            }
            false
        }
    })
}

/// Quantitative robustness of `phi` on `trace` at time `t`.
///
/// Numeric atoms use signed distance to the threshold, environment atoms
/// score `±1`, conjunction and `G` take minima, disjunction and `F` take
/// maxima.
pub fn robustness<T: TraceView + ?Sized>(phi: &Formula, trace: &T, t: usize) -> Result<f64, MonitorError> {
    check_time(t, trace.len())?;
    rho(phi, trace, t)
}

fn rho<T: TraceView + ?Sized>(phi: &Formula, tr: &T, t: usize) -> Result<f64, MonitorError> {
    Ok(match phi {
        Formula::True => f64::INFINITY,
        Formula::Atom(atom @ Atom::Prop { .. }) => {
            if tr.holds(t, atom)? {
                ATOM_ROBUSTNESS
            } else {
                -ATOM_ROBUSTNESS
            }
        }
        Formula::Atom(atom @ Atom::Cmp { signal, op, .. }) => {
            let c = threshold(atom)?;
            let x = tr.signal(t, signal)?;
            match op {
                Comparator::Le => c - x,
                Comparator::Ge => x - c,
                Comparator::Eq => -(x - c).abs(),
            }
        }
        Formula::Not(f) => -rho(f, tr, t)?,
        Formula::And(a, b) => rho(a, tr, t)?.min(rho(b, tr, t)?),
        Formula::Or(a, b) => rho(a, tr, t)?.max(rho(b, tr, t)?),
        Formula::Implies(a, b) => (-rho(a, tr, t)?).max(rho(b, tr, t)?),
        Formula::Eventually(iv, f) => {
            let mut best = f64::NEG_INFINITY;
            for s in window(t, iv, tr.len())? {
                best = best.max(rho(f, tr, s)?);
            }
            best
        }
        Formula::Always(iv, f) => {
            let mut worst = f64::INFINITY;
            for s in window(t, iv, tr.len())? {
                worst = worst.min(rho(f, tr, s)?);
            }
            worst
        }
        Formula::Until(iv, a, b) => {
            let mut best = f64::NEG_INFINITY;
            let mut prefix_min = f64::INFINITY;
            let mut next = t;
            for s in window(t, iv, tr.len())? {
                while next < s {
                    prefix_min = prefix_min.min(rho(a, tr, next)?);
                    next += 1;
                }
                best = best.max(rho(b, tr, s)?.min(prefix_min));
            }
            best
        }
    })
}
