use std::collections::VecDeque;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Strategy;

/// Pending node ids in the order a strategy visits them.
#[derive(Clone, Debug)]
pub struct Frontier {
    strategy: Strategy,
    beam: usize,
    defer: bool,
    rng: ChaCha8Rng,
    queue: VecDeque<usize>,
    /// Beam search: children of the current generation.
    next: Vec<usize>,
    /// Beam search: pruned nodes kept for later (backward only).
    deferred: VecDeque<usize>,
}

impl Frontier {
    /// `defer` keeps beam-pruned nodes for when the beam runs dry instead
    /// of discarding them.
    pub fn new(strategy: Strategy, beam: usize, seed: u64, defer: bool) -> Frontier {
        Frontier {
            strategy,
            beam: beam.max(1),
            defer,
            rng: ChaCha8Rng::seed_from_u64(seed),
            queue: VecDeque::new(),
            next: Vec::new(),
            deferred: VecDeque::new(),
        }
    }

    /// Adds the children of one expansion, in generation order.
    pub fn push_children(&mut self, ids: &[usize]) {
        match self.strategy {
            Strategy::Bfs | Strategy::Rs => self.queue.extend(ids),
            Strategy::Dfs => self.queue.extend(ids.iter().rev()),
            Strategy::Bs => self.next.extend(ids),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty() && self.next.is_empty() && self.deferred.is_empty()
    }

    pub fn pop(&mut self) -> Option<usize> {
        match self.strategy {
            Strategy::Bfs => self.queue.pop_front(),
            Strategy::Dfs => self.queue.pop_back(),
            Strategy::Rs => {
                if self.queue.is_empty() {
                    return None;
                }
                let i = self.rng.gen_range(0..self.queue.len());
                self.queue.swap_remove_back(i)
            }
            Strategy::Bs => {
                if self.queue.is_empty() {
                    self.advance_generation();
                }
                self.queue.pop_front()
            }
        }
    }

    fn advance_generation(&mut self) {
        let mut gen = std::mem::take(&mut self.next);
        if gen.is_empty() {
            let n = self.deferred.len().min(self.beam);
            gen = self.deferred.drain(..n).collect();
        }
        if gen.len() > self.beam {
            let mut keep: Vec<usize> = sample(&mut self.rng, gen.len(), self.beam).into_vec();
            keep.sort_unstable();
            let mut kept = vec![false; gen.len()];
            for &k in &keep {
                kept[k] = true;
            }
            for (i, id) in gen.iter().enumerate() {
                if kept[i] {
                    self.queue.push_back(*id);
                } else if self.defer {
                    self.deferred.push_back(*id);
                }
            }
        } else {
            self.queue.extend(gen);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drain(f: &mut Frontier) -> Vec<usize> {
        std::iter::from_fn(|| f.pop()).collect()
    }

    #[test]
    fn bfs_and_dfs_orders() {
        let mut b = Frontier::new(Strategy::Bfs, 20, 0, false);
        b.push_children(&[1, 2]);
        assert_eq!(b.pop(), Some(1));
        b.push_children(&[3]);
        assert_eq!(drain(&mut b), [2, 3]);
        let mut d = Frontier::new(Strategy::Dfs, 20, 0, false);
        d.push_children(&[1, 2]);
        assert_eq!(d.pop(), Some(1));
        d.push_children(&[3]);
        assert_eq!(drain(&mut d), [3, 2]);
    }

    #[test]
    fn random_is_seeded() {
        let run = |seed| {
            let mut f = Frontier::new(Strategy::Rs, 20, seed, false);
            f.push_children(&(0..30).collect::<Vec<_>>());
            drain(&mut f)
        };
        assert_eq!(run(7), run(7));
        let mut sorted = run(7);
        sorted.sort();
        assert_eq!(sorted, (0..30).collect::<Vec<_>>());
    }

    #[test]
    fn wide_beam_matches_bfs() {
        let mut b = Frontier::new(Strategy::Bs, 20, 3, false);
        let mut q = Frontier::new(Strategy::Bfs, 20, 3, false);
        for f in [&mut b, &mut q] {
            f.push_children(&[1, 2, 3]);
        }
        let mut order = (vec![], vec![]);
        for _ in 0..3 {
            let (x, y) = (b.pop().unwrap(), q.pop().unwrap());
            b.push_children(&[x * 10, x * 10 + 1]);
            q.push_children(&[y * 10, y * 10 + 1]);
            order.0.push(x);
            order.1.push(y);
        }
        order.0.extend(drain(&mut b));
        order.1.extend(drain(&mut q));
        assert_eq!(order.0, order.1);
    }

    #[test]
    fn narrow_beam_prunes_or_defers() {
        let mut f = Frontier::new(Strategy::Bs, 2, 0, false);
        f.push_children(&[1, 2, 3, 4, 5]);
        assert_eq!(drain(&mut f).len(), 2);
        let mut g = Frontier::new(Strategy::Bs, 2, 0, true);
        g.push_children(&[1, 2, 3, 4, 5]);
        let mut all = drain(&mut g);
        all.sort();
        assert_eq!(all, [1, 2, 3, 4, 5]);
    }
}
