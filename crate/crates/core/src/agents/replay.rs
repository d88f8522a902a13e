use crate::numerics::RngStream;

/// One (s, a, r, s') record.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
}

/// Fixed-capacity FIFO ring of transitions with uniform with-replacement
/// sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    storage: Vec<Transition>,
    head: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1);
        Self {
            capacity,
            storage: Vec::new(),
            head: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        if self.storage.len() < self.capacity {
            self.storage.push(t);
        } else {
            self.storage[self.head] = t;
            self.head = (self.head + 1) % self.capacity;
        }
    }

    /// Uniform with-replacement draw of `batch` transitions; `None` while the
    /// buffer is not yet filled to the batch size.
    pub fn sample(&self, batch: usize, rng: &mut RngStream) -> Option<Vec<&Transition>> {
        if self.storage.len() < batch {
            return None;
        }
        Some(
            (0..batch)
                .map(|_| &self.storage[rng.index(self.storage.len())])
                .collect(),
        )
    }
}
