use std::collections::VecDeque;

use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub state: u64,
    pub action: usize,
    pub reward: f64,
    pub next_state: u64,
    pub done: bool,
}

/// Fixed-capacity FIFO of transitions.
#[derive(Debug, Clone)]
pub struct ReplayMemory {
    buf: VecDeque<Transition>,
    capacity: usize,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Self {
        ReplayMemory { buf: VecDeque::with_capacity(capacity), capacity }
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, t: Transition) {
        if self.capacity == 0 {
            return;
        }
        if self.buf.len() == self.capacity {
            self.buf.pop_front();
        }
        self.buf.push_back(t);
    }

    /// `n` uniform draws with replacement.
    pub fn sample<R: Rng>(&self, rng: &mut R, n: usize) -> Vec<Transition> {
        if self.buf.is_empty() {
            return Vec::new();
        }
        (0..n).map(|_| self.buf[rng.gen_range(0..self.buf.len())]).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.buf.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tr(i: u64) -> Transition {
        Transition { state: i, action: 0, reward: 0.0, next_state: i + 1, done: false }
    }

    #[test]
    fn evicts_oldest() {
        let mut m = ReplayMemory::new(3);
        for i in 0..5 {
            m.push(tr(i));
        }
        assert_eq!(m.iter().map(|t| t.state).collect::<Vec<_>>(), vec![2, 3, 4]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(m.sample(&mut rng, 10).iter().all(|t| (2..5).contains(&t.state)));
        assert!(ReplayMemory::new(3).sample(&mut rng, 4).is_empty());
    }

    proptest! {
        #[test]
        fn never_exceeds_capacity(cap in 0usize..20, pushes in 0u64..100) {
            let mut m = ReplayMemory::new(cap);
            for i in 0..pushes {
                m.push(tr(i));
                prop_assert!(m.len() <= cap);
            }
            prop_assert_eq!(m.len(), (pushes as usize).min(cap));
        }
    }
}
