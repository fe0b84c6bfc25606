use alloc::vec::Vec;

use rand::Rng;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Transition<A> {
    pub state: Vec<f64>,
    pub action: A,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
}

/// Fixed-capacity ring buffer; the oldest entry is overwritten first.
#[derive(Debug, Clone)]
pub struct ReplayBuffer<T> {
    capacity: usize,
    items: Vec<T>,
    next: usize,
}

impl<T> ReplayBuffer<T> {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidConfig("replay capacity must be >= 1".into()));
        }
        Ok(Self { capacity, items: Vec::with_capacity(capacity), next: 0 })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, item: T) {
        if self.items.len() < self.capacity {
            self.items.push(item);
        } else {
            self.items[self.next] = item;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    /// Stored items from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &T> {
        let split = if self.items.len() < self.capacity { 0 } else { self.next };
        self.items[split..].iter().chain(&self.items[..split])
    }

    /// `n` indices drawn uniformly with replacement.
    pub fn sample_indices<R: Rng>(&self, rng: &mut R, n: usize) -> Vec<usize> {
        if self.items.is_empty() {
            return Vec::new();
        }
        (0..n).map(|_| rng.random_range(0..self.items.len())).collect()
    }

    pub fn get(&self, index: usize) -> Option<&T> {
        self.items.get(index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_stream;
    use alloc::vec;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn never_exceeds_capacity_and_evicts_fifo(cap in 1usize..40, extra in 0usize..60) {
            let mut buf = ReplayBuffer::new(cap).unwrap();
            for i in 0..cap + extra {
                buf.push(i);
                prop_assert!(buf.len() <= cap);
            }
            let kept: Vec<usize> = buf.iter().copied().collect();
            let expected: Vec<usize> = (extra..cap + extra).collect();
            prop_assert_eq!(kept, expected);
        }
    }

    #[test]
    fn sampling_reaches_every_slot() {
        let mut buf = ReplayBuffer::new(16).unwrap();
        for i in 0..20 {
            buf.push(i);
        }
        let mut rng = rng_stream(1, "test/replay");
        let mut hits = vec![0usize; 16];
        for i in buf.sample_indices(&mut rng, 4000) {
            hits[i] += 1;
        }
        // Expected 250 per slot; 5σ ≈ 77.
        assert!(hits.iter().all(|&h| (170..=330).contains(&h)), "{hits:?}");
    }

    #[test]
    fn zero_capacity_rejected() {
        assert!(ReplayBuffer::<u8>::new(0).is_err());
    }
}
