use std::ops::ControlFlow;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use stl_dialogue::rl::{evaluate, train_with, Hyperparams, Progress};
use stl_dialogue::stl::Formula;
use stl_dialogue::world::{GridSpec, WorldState};
use tokio::sync::{watch, Mutex};

use crate::store::{JobState, RolloutView, TrainStatus};
use crate::{Entry, Job, Service};

const CURVE_TAIL: usize = 50;

/// Starts training on its own thread. The status is republished at most
/// about 200 times per job; the final status, policy and rollout are
/// committed to the session when the thread finishes.
pub(crate) fn spawn(
    svc: Arc<Service>,
    entry: Arc<Mutex<Entry>>,
    g: GridSpec,
    s0: WorldState,
    phi: Formula,
    h: Hyperparams,
    initial: TrainStatus,
) -> Job {
    let cancel = Arc::new(AtomicBool::new(false));
    let (tx, rx) = watch::channel(initial.clone());
    let flag = cancel.clone();
    std::thread::spawn(move || {
        let mut status = initial;
        let every = (h.episodes / 200).max(1);
        let result = train_with(&g, &s0, &phi, &h, &mut |p: &Progress| {
            status.episode = p.point.episode + 1;
            status.goals += p.reached_goal as usize;
            status.curve_tail.push_back(p.point.clone());
            if status.curve_tail.len() > CURVE_TAIL {
                status.curve_tail.pop_front();
            }
            if status.episode % every == 0 {
                tx.send_replace(status.clone());
            }
            if flag.load(Ordering::Relaxed) {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        let text = phi.to_string();
        let outcome = result.and_then(|t| {
            if t.cancelled {
                return Ok(None);
            }
            let rollout = evaluate(&t.q.greedy(), &g, &s0, &phi, h.max_steps)?;
            Ok(Some((t.q.export(&text), RolloutView::new(&rollout, &g))))
        });
        match &outcome {
            Ok(Some(_)) => status.state = JobState::Finished,
            Ok(None) => status.state = JobState::Cancelled,
            Err(e) => {
                status.state = JobState::Failed;
                status.error = Some(e.to_string());
            }
        }
        let mut e = entry.blocking_lock();
        let committed = svc.commit(&mut e, |rec| {
            rec.training = status.clone();
            if let Ok(Some((policy, rollout))) = outcome {
                rec.artifacts.formula = Some(text);
                rec.artifacts.policy = Some(policy);
                rec.artifacts.rollout = Some(rollout);
            }
            Ok(())
        });
        if let Err(err) = committed {
            e.record.training = status.clone();
            e.record.training.state = JobState::Failed;
            e.record.training.error = Some(err.message);
        }
        tx.send_replace(e.record.training.clone());
        e.job = None;
    });
    Job { cancel, status: rx }
}
