//! Uniform-sampling ring-buffer replay storage.
//!
//! Transitions are stored struct-of-arrays with fixed observation and action
//! widths. Once full, new pushes overwrite the oldest entries.

use rand::Rng;

#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    obs_dim: usize,
    act_dim: usize,
    size: usize,
    next_idx: usize,
    obs: Vec<f64>,
    actions: Vec<f64>,
    rewards: Vec<f64>,
    next_obs: Vec<f64>,
    dones: Vec<f64>,
}

/// A sampled minibatch, batch-major like the network inputs.
#[derive(Debug, Default, Clone)]
pub struct Batch {
    pub size: usize,
    pub obs: Vec<f64>,
    pub actions: Vec<f64>,
    pub rewards: Vec<f64>,
    pub next_obs: Vec<f64>,
    pub dones: Vec<f64>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, obs_dim: usize, act_dim: usize) -> Self {
        assert!(capacity > 0 && obs_dim > 0 && act_dim > 0);
        Self {
            capacity,
            obs_dim,
            act_dim,
            size: 0,
            next_idx: 0,
            obs: Vec::new(),
            actions: Vec::new(),
            rewards: Vec::new(),
            next_obs: Vec::new(),
            dones: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, obs: &[f64], action: &[f64], reward: f64, next_obs: &[f64], done: f64) {
        assert_eq!(obs.len(), self.obs_dim);
        assert_eq!(action.len(), self.act_dim);
        assert_eq!(next_obs.len(), self.obs_dim);
        if self.size < self.capacity {
            self.obs.extend_from_slice(obs);
            self.actions.extend_from_slice(action);
            self.rewards.push(reward);
            self.next_obs.extend_from_slice(next_obs);
            self.dones.push(done);
            self.size += 1;
        } else {
            let i = self.next_idx;
            self.obs[i * self.obs_dim..(i + 1) * self.obs_dim].copy_from_slice(obs);
            self.actions[i * self.act_dim..(i + 1) * self.act_dim].copy_from_slice(action);
            self.rewards[i] = reward;
            self.next_obs[i * self.obs_dim..(i + 1) * self.obs_dim].copy_from_slice(next_obs);
            self.dones[i] = done;
        }
        self.next_idx = (self.next_idx + 1) % self.capacity;
    }

    /// Stored transition `i` as `(obs, action, reward, next_obs, done)`.
    pub fn transition(&self, i: usize) -> (&[f64], &[f64], f64, &[f64], f64) {
        assert!(i < self.size);
        (
            &self.obs[i * self.obs_dim..(i + 1) * self.obs_dim],
            &self.actions[i * self.act_dim..(i + 1) * self.act_dim],
            self.rewards[i],
            &self.next_obs[i * self.obs_dim..(i + 1) * self.obs_dim],
            self.dones[i],
        )
    }

    /// Uniformly sample `batch_size` transitions (with replacement) into the
    /// reusable `Batch`.
    pub fn sample_into<R: Rng>(&self, batch_size: usize, rng: &mut R, batch: &mut Batch) {
        assert!(self.size >= batch_size, "buffer smaller than batch");
        batch.size = batch_size;
        batch.obs.clear();
        batch.actions.clear();
        batch.rewards.clear();
        batch.next_obs.clear();
        batch.dones.clear();
        for _ in 0..batch_size {
            let i = rng.random_range(0..self.size);
            let (o, a, r, no, d) = self.transition(i);
            batch.obs.extend_from_slice(o);
            batch.actions.extend_from_slice(a);
            batch.rewards.push(r);
            batch.next_obs.extend_from_slice(no);
            batch.dones.push(d);
        }
    }
}
