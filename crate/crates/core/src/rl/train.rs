use std::io::Write;
use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::stl::{robustness, satisfies, Atom, Comparator, Formula, MonitorError, ATOM_ROBUSTNESS, Trace, TraceView};
use crate::world::{atom_distance, atom_eval, states_to_trace, step, Action, Cell, GridSpec, StateTrace, WorldError, WorldState};

use super::policy::{argmax, Policy, QFunction, N_ACTIONS};
use super::projection::Projection;
use super::replay::{ReplayMemory, Transition};
use super::{Hyperparams, RlError};

/// Robustness values are clamped to this magnitude before differencing, so
/// `true` and empty windows (`±inf`) still give finite rewards.
pub const RHO_CAP: f64 = 100.0;

/// Robustness of the partial trajectory at time 0.
pub fn robustness_reward<T: TraceView + ?Sized>(partial: &T, phi: &Formula) -> Result<f64, RlError> {
    Ok(robustness(phi, partial, 0)?)
}

fn cap(rho: f64) -> f64 {
    rho.clamp(-RHO_CAP, RHO_CAP)
}

/// Per-step atom values for the reward monitor, `stride` values per step.
/// With `graded` unset, atoms read as `±1` exactly like the plain monitor.
#[derive(Debug, Clone, Default)]
struct PackedTrace {
    stride: usize,
    values: Vec<f64>,
    robot: Vec<Cell>,
    graded: bool,
}

impl PackedTrace {
    fn last_state(&self) -> PackedTrace {
        let n = self.robot.len();
        PackedTrace {
            stride: self.stride,
            values: self.values[(n - 1) * self.stride..].to_vec(),
            robot: vec![self.robot[n - 1]],
            graded: true,
        }
    }
}

impl TraceView for PackedTrace {
    fn len(&self) -> usize {
        self.robot.len()
    }

    fn holds(&self, _t: usize, atom: &Atom) -> Result<bool, MonitorError> {
        Err(MonitorError::MissingSignal(atom.to_string()))
    }

    fn signal(&self, t: usize, name: &str) -> Result<f64, MonitorError> {
        let c = self.robot.get(t).ok_or(MonitorError::TimeOutOfRange { t, len: self.robot.len() })?;
        match name {
            "x" => Ok(c.0 as f64),
            "y" => Ok(c.1 as f64),
            _ => {
                let i: usize = name
                    .strip_prefix('#')
                    .and_then(|n| n.parse().ok())
                    .ok_or_else(|| MonitorError::MissingSignal(name.to_string()))?;
                let v = self.values[t * self.stride + i];
                Ok(if self.graded { v } else { v.signum() * ATOM_ROBUSTNESS })
            }
        }
    }
}

/// Reward-side value of an environment atom: `+1` when it holds, otherwise
/// between `-0.1` and `-1` depending on how many moves are still needed.
/// The sign always matches the `±1` monitor semantics.
pub fn graded_atom(s: &WorldState, atom: &Atom, g: &GridSpec) -> Result<f64, RlError> {
    let d = atom_distance(s, atom, g).map_err(|e| match e {
        WorldError::Unresolved(slot) => RlError::Monitor(MonitorError::Unresolved(format!("?{slot}"))),
        other => other.into(),
    })?;
    let span = (2 * (g.width + g.height)) as f64;
    Ok(match d {
        Some(0) if atom_eval(s, atom, g)? => 1.0,
        Some(d) => -(0.1 + 0.9 * (d as f64).min(span) / span),
        None => -1.0,
    })
}

/// The task formula with every environment atom replaced by a numeric atom
/// `#i >= 0` over per-step [`graded_atom`] values. Read as signs, these give
/// the ordinary robustness; read as grades, the robustness of the current
/// state alone serves as a shaping potential.
#[derive(Debug, Clone)]
pub struct TaskMonitor {
    formula: Formula,
    atoms: Vec<Atom>,
}

impl TaskMonitor {
    pub fn new(phi: &Formula, g: &GridSpec) -> Result<Self, RlError> {
        for iv in phi.temporal_intervals() {
            if iv.resolved().is_none() {
                return Err(MonitorError::Unresolved(iv.to_string()).into());
            }
        }
        let mut atoms = Vec::new();
        let formula = relabel(phi, &mut atoms);
        let m = TaskMonitor { formula, atoms };
        // Rejects unresolved slots and unknown atoms up front.
        let mut tr = m.trace();
        m.push(&mut tr, &WorldState::initial(g), g)?;
        m.robustness(&tr)?;
        Ok(m)
    }

    fn trace(&self) -> PackedTrace {
        PackedTrace { stride: self.atoms.len(), ..Default::default() }
    }

    fn push(&self, tr: &mut PackedTrace, s: &WorldState, g: &GridSpec) -> Result<(), RlError> {
        for a in &self.atoms {
            tr.values.push(graded_atom(s, a, g)?);
        }
        tr.robot.push(s.robot);
        Ok(())
    }

    /// Robustness of the partial trajectory, identical to the plain monitor.
    fn robustness(&self, tr: &PackedTrace) -> Result<f64, RlError> {
        Ok(robustness(&self.formula, tr, 0)?)
    }

    /// Graded robustness of the latest state on its own.
    fn potential(&self, tr: &PackedTrace) -> Result<f64, RlError> {
        Ok(cap(robustness(&self.formula, &tr.last_state(), 0)?))
    }
}

fn relabel(phi: &Formula, atoms: &mut Vec<Atom>) -> Formula {
    let b = |f: &Formula, atoms: &mut Vec<Atom>| Box::new(relabel(f, atoms));
    match phi {
        Formula::True => Formula::True,
        Formula::Atom(a @ Atom::Prop { .. }) => {
            let i = atoms.iter().position(|x| x == a).unwrap_or_else(|| {
                atoms.push(a.clone());
                atoms.len() - 1
            });
            Formula::Atom(Atom::cmp(format!("#{i}"), Comparator::Ge, 0.0))
        }
        Formula::Atom(a) => Formula::Atom(a.clone()),
        Formula::Not(f) => Formula::Not(b(f, atoms)),
        Formula::And(x, y) => Formula::And(b(x, atoms), b(y, atoms)),
        Formula::Or(x, y) => Formula::Or(b(x, atoms), b(y, atoms)),
        Formula::Implies(x, y) => Formula::Implies(b(x, atoms), b(y, atoms)),
        Formula::Eventually(i, f) => Formula::Eventually(i.clone(), b(f, atoms)),
        Formula::Always(i, f) => Formula::Always(i.clone(), b(f, atoms)),
        Formula::Until(i, x, y) => Formula::Until(i.clone(), b(x, atoms), b(y, atoms)),
    }
}

/// One learning-curve row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CurvePoint {
    pub episode: usize,
    #[serde(rename = "return")]
    pub ret: f64,
    pub epsilon: f64,
    pub replay_size: usize,
}

/// Reported after every episode; returning `Break` from the callback stops
/// training before the next one.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Progress {
    pub episodes: usize,
    pub point: CurvePoint,
    pub reached_goal: bool,
}

#[derive(Debug, Clone)]
pub struct Training {
    pub q: QFunction,
    pub curve: Vec<CurvePoint>,
    pub goals: usize,
    pub cancelled: bool,
}

pub fn train(g: &GridSpec, s0: &WorldState, phi: &Formula, h: &Hyperparams) -> Result<Training, RlError> {
    train_with(g, s0, phi, h, &mut |_| ControlFlow::Continue(()))
}

pub fn train_with(
    g: &GridSpec,
    s0: &WorldState,
    phi: &Formula,
    h: &Hyperparams,
    on_episode: &mut dyn FnMut(&Progress) -> ControlFlow<()>,
) -> Result<Training, RlError> {
    h.validate()?;
    s0.check(g)?;
    let monitor = TaskMonitor::new(phi, g)?;
    let projection = Projection::for_formula(phi, g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(h.seed);
    let mut q = QFunction::new(projection.clone());
    let mut target = q.table.clone();
    let mut replay = ReplayMemory::new(h.replay_capacity);
    let mut curve = Vec::with_capacity(h.episodes);
    let mut goals = 0;
    let mut cancelled = false;

    for episode in 0..h.episodes {
        if episode % h.target_period == 0 {
            target.clone_from(&q.table);
        }
        let epsilon = h.epsilon(episode);
        let mut s = s0.clone();
        let mut tr = monitor.trace();
        monitor.push(&mut tr, &s, g)?;
        let mut prev = cap(monitor.robustness(&tr)?);
        let mut phi_prev = if h.shaping { monitor.potential(&tr)? } else { 0.0 };
        let mut ret = 0.0;
        let mut reached = false;
        for t in 0..h.max_steps {
            let key = projection.key(&s, g);
            let a = if rng.gen::<f64>() < epsilon { rng.gen_range(0..N_ACTIONS) } else { argmax(&q.values(key)) };
            s = step(&s, Action::ALL[a], g);
            monitor.push(&mut tr, &s, g)?;
            let rho = monitor.robustness(&tr)?;
            reached = rho > 0.0;
            let mut reward = cap(rho) - prev + if reached { h.goal_bonus } else { 0.0 };
            prev = cap(rho);
            if h.shaping {
                let phi_next = monitor.potential(&tr)?;
                reward += phi_next - phi_prev;
                phi_prev = phi_next;
            }
            ret += reward;
            replay.push(Transition { state: key, action: a, reward, next_state: projection.key(&s, g), done: reached });
            if replay.len() > h.replay_threshold {
                for tr in replay.sample(&mut rng, h.batch_size) {
                    let next = if tr.done {
                        0.0
                    } else {
                        target.get(&tr.next_state).map_or(0.0, |r| r[argmax(r)])
                    };
                    let cell = &mut q.row_mut(tr.state)[tr.action];
                    let updated = *cell + h.alpha * (tr.reward + h.gamma * next - *cell);
                    if !updated.is_finite() {
                        return Err(RlError::NonFinite {
                            episode,
                            step: t,
                            detail: format!("state {} action {} reward {}", tr.state, Action::ALL[tr.action], tr.reward),
                        });
                    }
                    *cell = updated;
                }
            }
            if reached {
                break;
            }
        }
        goals += reached as usize;
        let point = CurvePoint { episode, ret, epsilon, replay_size: replay.len() };
        curve.push(point.clone());
        let progress = Progress { episodes: h.episodes, point, reached_goal: reached };
        if on_episode(&progress).is_break() {
            cancelled = episode + 1 < h.episodes;
            break;
        }
    }
    Ok(Training { q, curve, goals, cancelled })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub satisfied: bool,
    pub robustness: f64,
    pub states: Vec<WorldState>,
    pub actions: Vec<Action>,
}

impl Rollout {
    pub fn trace(&self, g: &GridSpec) -> Trace {
        states_to_trace(&self.states, g)
    }
}

/// Greedy rollout from `s0`, stopping once the partial trajectory has
/// positive robustness or after `max_steps` actions.
pub fn evaluate<P: Policy + ?Sized>(
    policy: &P,
    g: &GridSpec,
    s0: &WorldState,
    phi: &Formula,
    max_steps: usize,
) -> Result<Rollout, RlError> {
    s0.check(g)?;
    let monitor = TaskMonitor::new(phi, g)?;
    let mut tr = monitor.trace();
    let mut states = vec![s0.clone()];
    let mut actions = Vec::new();
    monitor.push(&mut tr, s0, g)?;
    for _ in 0..max_steps {
        let a = policy.act(states.last().expect("non-empty"), g);
        let s = step(states.last().expect("non-empty"), a, g);
        monitor.push(&mut tr, &s, g)?;
        states.push(s);
        actions.push(a);
        if monitor.robustness(&tr)? > 0.0 {
            break;
        }
    }
    let view = StateTrace { states: &states, grid: g };
    Ok(Rollout {
        satisfied: satisfies(phi, &view, 0)?,
        robustness: robustness(phi, &view, 0)?,
        states,
        actions,
    })
}

pub fn write_curve_csv<W: Write>(curve: &[CurvePoint], w: W) -> Result<(), RlError> {
    let mut out = csv::Writer::from_writer(w);
    if curve.is_empty() {
        out.write_record(["episode", "return", "epsilon", "replaySize"])?;
    }
    for p in curve {
        out.serialize(p)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stl::parse_formula_with;
    use crate::world::{record, WorldVocabulary};
    use proptest::prelude::*;

    fn f(s: &str) -> Formula {
        parse_formula_with(s, &WorldVocabulary).unwrap()
    }

    const TASK: &str = "F[0,15]((lampOn & F[0,10](itemOnRobot(purpleCube))))";

    fn quick(episodes: usize, seed: u64) -> Hyperparams {
        Hyperparams { episodes, seed, ..Default::default() }
    }

    #[test]
    fn reward_examples() {
        let g = GridSpec::default();
        let s0 = WorldState::initial(&g);
        use Action::*;
        let d = record(
            &g,
            &s0,
            &[MoveN, MoveN, MoveN, MoveW, MoveW, ToggleLamp, MoveE, MoveE, MoveS, MoveS, MoveS, MoveS, MoveS, MoveE, MoveE, PickUp],
        )
        .unwrap();
        let states = d.states();
        let view = StateTrace { states: &states, grid: &g };
        assert!(robustness_reward(&view, &f(TASK)).unwrap() > 0.0);
        assert_eq!(robustness_reward(&view, &Formula::True).unwrap(), f64::INFINITY);
        let bump = record(&g, &s0, &[MoveN, MoveW]).unwrap().states();
        let view = StateTrace { states: &bump, grid: &g };
        assert!(robustness_reward(&view, &f("G[0,1000](!(robotAtWall))")).unwrap() < 0.0);
        assert!(robustness_reward(&StateTrace { states: &[], grid: &g }, &Formula::True).is_err());
    }

    #[test]
    fn packed_monitor_agrees_with_world_atoms() {
        let g = GridSpec::default();
        let phi = f("((lampOn U[0,5] robotAt(1,0)) | G[0,3](!(robotAtWall)))");
        let m = TaskMonitor::new(&phi, &g).unwrap();
        let s0 = WorldState::initial(&g);
        use Action::*;
        let states = record(&g, &s0, &[MoveN, MoveN, MoveN, MoveW, MoveW, MoveW]).unwrap().states();
        let mut tr = m.trace();
        for (t, s) in states.iter().enumerate() {
            m.push(&mut tr, s, &g).unwrap();
            let direct = robustness(&phi, &StateTrace { states: &states[..=t], grid: &g }, 0).unwrap();
            assert_eq!(m.robustness(&tr).unwrap(), direct);
            let pot = m.potential(&tr).unwrap();
            assert!(pot.abs() <= 1.0 && pot != 0.0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn packed_robustness_matches_monitor(
            actions in prop::collection::vec(0..N_ACTIONS, 1..30),
            which in 0usize..5,
        ) {
            let g = GridSpec::default();
            let phi = f([
                TASK,
                "G[0,20](!(robotAtWall))",
                "(F[0,10](doorOpen) | (fireOn U[2,12] itemOnRobot(greenCube)))",
                "F[0,25]((itemAt(doorKey,3,3) & !(robotAtWater)))",
                "(F[0,8](robotSittingOnChair) -> G[0,8](chargerUnplugged))",
            ][which]);
            let m = TaskMonitor::new(&phi, &g).unwrap();
            let acts: Vec<Action> = actions.iter().map(|i| Action::ALL[*i]).collect();
            let states = record(&g, &WorldState::initial(&g), &acts).unwrap().states();
            let mut tr = m.trace();
            for (t, s) in states.iter().enumerate() {
                m.push(&mut tr, s, &g).unwrap();
                let view = StateTrace { states: &states[..=t], grid: &g };
                prop_assert_eq!(m.robustness(&tr).unwrap(), robustness(&phi, &view, 0).unwrap());
                let graded = robustness(&m.formula, &tr.last_state(), 0).unwrap();
                let single = satisfies(&phi, &StateTrace { states: &states[t..=t], grid: &g }, 0).unwrap();
                prop_assert_eq!(graded > 0.0, single);
            }
        }
    }

    #[test]
    fn unresolved_task_is_rejected() {
        let g = GridSpec::default();
        let s0 = WorldState::initial(&g);
        for bad in ["F[0,?t1](lampOn)", "F[0,5](robotAt(?x0,?y0))"] {
            let phi = parse_formula_with(bad, &WorldVocabulary).unwrap();
            assert!(matches!(train(&g, &s0, &phi, &quick(1, 0)), Err(RlError::Monitor(_))), "{bad}");
        }
    }

    #[test]
    fn zero_episodes() {
        let g = GridSpec::default();
        let s0 = WorldState::initial(&g);
        let out = train(&g, &s0, &f(TASK), &quick(0, 0)).unwrap();
        assert!(out.curve.is_empty() && out.q.is_empty());
        let r = evaluate(&out.q, &g, &s0, &f(TASK), 40).unwrap();
        assert!(!r.satisfied);
        assert!(r.actions.iter().all(|a| *a == Action::MoveN));
        let mut buf = Vec::new();
        write_curve_csv(&out.curve, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "episode,return,epsilon,replaySize\n");
    }

    #[test]
    fn replay_gates_updates() {
        let g = GridSpec::default();
        let s0 = WorldState::initial(&g);
        // 10 episodes of at most 40 steps never exceed 500 transitions.
        let out = train(&g, &s0, &f(TASK), &quick(10, 3)).unwrap();
        assert!(out.curve.last().unwrap().replay_size <= 400);
        assert!(out.q.is_empty());
    }

    #[test]
    fn cancellation_between_episodes() {
        let g = GridSpec::default();
        let s0 = WorldState::initial(&g);
        let mut seen = 0;
        let out = train_with(&g, &s0, &f(TASK), &quick(100, 1), &mut |p| {
            seen += 1;
            if p.point.episode == 4 {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })
        .unwrap();
        assert_eq!((seen, out.curve.len(), out.cancelled), (5, 5, true));
    }

    #[test]
    fn seeded_runs_are_identical() {
        let g = GridSpec::default();
        let s0 = WorldState::initial(&g);
        let phi = f("F[0,15](robotAt(3,1))");
        let a = train(&g, &s0, &phi, &quick(600, 9)).unwrap();
        let b = train(&g, &s0, &phi, &quick(600, 9)).unwrap();
        assert_eq!(a.curve, b.curve);
        assert_eq!(a.q, b.q);
        assert!(a.goals > 0);
        let c = train(&g, &s0, &phi, &quick(600, 10)).unwrap();
        assert_ne!(a.curve, c.curve);
    }

    #[test]
    fn learns_to_reach_a_corner() {
        let g = GridSpec::default();
        let s0 = WorldState::initial(&g);
        let phi = f("F[0,15](robotAt(0,0))");
        let h = Hyperparams { episodes: 3000, epsilon_decay: 0.998, ..quick(0, 7) };
        let out = train(&g, &s0, &phi, &h).unwrap();
        let r = evaluate(&out.q, &g, &s0, &phi, 40).unwrap();
        assert!(r.satisfied);
        assert!(r.actions.len() <= 15);
        assert_eq!(r.states.last().unwrap().robot, (0, 0));
        assert!(r.states.iter().all(|s| !g.is_wall(s.robot)));
        let n = out.curve.len() / 10;
        let mean = |xs: &[CurvePoint]| xs.iter().map(|p| p.ret).sum::<f64>() / xs.len() as f64;
        assert!(mean(&out.curve[out.curve.len() - n..]) > mean(&out.curve[..n]));
    }
}
