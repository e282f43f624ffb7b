//! Agents: the episodic-control loop and a tabular Q-learning baseline.
//!
//! The episodic-control agent acts ε-greedily over value estimates read from
//! an [`EpisodicValueStore`], records the episode as it goes, and only
//! writes at the end of the episode: each visited (embedding, action) pair
//! is updated with the discounted return actually obtained from that point,
//! under the store's max-return rule. There is no gradient step and no
//! bootstrapping — values are backed up from observed returns alone, which
//! is what lets a single successful episode immediately raise the value of
//! every state on its path.
//!
//! The baseline is conventional tabular Q-learning over hashed observations.
//! It sees exactly the same episode seeds as the episodic agent; the point
//! of the comparison is that a hash key only supports lookup, not
//! generalization, so any observation jitter defeats it while the
//! nearest-neighbour estimates above degrade gracefully.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embeddings::EmbeddingFunction;
use crate::env::{Action, GridWorldSpec, NUM_ACTIONS};
use crate::error::{EcError, Result};
use crate::memory::{Embedding, EpisodicValueStore};

/// Derives an independent stream seed from a base seed, splitmix64-style.
/// Distinct `stream` values give decorrelated generators, so one
/// user-visible seed can drive the environment, the policy, a projection
/// matrix and a training corpus without aliasing.
pub fn mix_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Policy and backup parameters for the episodic-control agent.
#[derive(Debug, Clone, Copy)]
pub struct AgentConfig {
    /// Probability of acting uniformly at random.
    pub epsilon: f64,
    /// Discount used when folding episode rewards into returns.
    pub gamma: f64,
    /// Neighbours consulted per value estimate.
    pub k: usize,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self { epsilon: 0.005, gamma: 1.0, k: 11 }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && (0.0..=1.0).contains(&self.epsilon)) {
            return Err(EcError::InvalidArgument(format!(
                "epsilon must lie in [0, 1], got {}",
                self.epsilon
            )));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(EcError::InvalidArgument(format!(
                "gamma must lie in (0, 1], got {}",
                self.gamma
            )));
        }
        if self.k == 0 {
            return Err(EcError::InvalidArgument("k must be at least 1".into()));
        }
        Ok(())
    }
}

/// Discounted suffix sums: `out[t] = r[t] + gamma * out[t + 1]`. An empty
/// reward list has no returns and is rejected.
pub fn compute_returns(rewards: &[f64], gamma: f64) -> Result<Vec<f64>> {
    if rewards.is_empty() {
        return Err(EcError::InvalidArgument(
            "returns are undefined for an empty reward list".into(),
        ));
    }
    let mut returns = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for t in (0..rewards.len()).rev() {
        acc = rewards[t] + gamma * acc;
        returns[t] = acc;
    }
    Ok(returns)
}

/// One episode's visited embeddings, actions taken, and rewards received.
#[derive(Debug, Clone, Default)]
pub struct EpisodeTrace {
    embeddings: Vec<Embedding>,
    actions: Vec<usize>,
    rewards: Vec<f64>,
}

impl EpisodeTrace {
    pub fn record(&mut self, embedding: Embedding, action: usize, reward: f64) {
        self.embeddings.push(embedding);
        self.actions.push(action);
        self.rewards.push(reward);
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn total_reward(&self) -> f64 {
        self.rewards.iter().sum()
    }
}

/// Estimated value of `key` under `action`; an action whose buffer has no
/// entries yet is treated as worth zero.
fn action_value(
    store: &mut EpisodicValueStore,
    key: &Embedding,
    action: usize,
    k: usize,
) -> Result<f64> {
    match store.estimate(key, action, k) {
        Ok(v) => Ok(v),
        Err(EcError::EmptyBuffer { .. }) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// The greedy action: argmax of the per-action estimates, lowest index on
/// ties.
pub fn greedy_action(
    store: &mut EpisodicValueStore,
    key: &Embedding,
    k: usize,
) -> Result<usize> {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for action in 0..store.num_actions() {
        let value = action_value(store, key, action, k)?;
        if value > best_value {
            best = action;
            best_value = value;
        }
    }
    Ok(best)
}

/// ε-greedy action selection. Draws the exploration coin first, so the
/// random-number stream advances identically whether or not the store has
/// anything to say.
pub fn act(
    store: &mut EpisodicValueStore,
    key: &Embedding,
    config: &AgentConfig,
    rng: &mut ChaCha8Rng,
) -> Result<usize> {
    let explore = rng.random::<f64>() < config.epsilon;
    let random_choice = rng.random_range(0..store.num_actions());
    if explore {
        Ok(random_choice)
    } else {
        greedy_action(store, key, config.k)
    }
}

/// Folds a finished episode into the store: every visited (embedding,
/// action) pair is written with its discounted return, from the last step
/// back to the first.
pub fn end_episode(
    store: &mut EpisodicValueStore,
    trace: &EpisodeTrace,
    gamma: f64,
) -> Result<()> {
    let returns = compute_returns(&trace.rewards, gamma)?;
    for t in (0..trace.len()).rev() {
        store.update(&trace.embeddings[t], trace.actions[t], returns[t])?;
    }
    Ok(())
}

/// What one episode produced. Frame accounting is one frame per
/// environment step, so a summary's step count doubles as its frame count.
#[derive(Debug, Clone, Copy)]
pub struct EpisodeSummary {
    /// Actions taken (equivalently, frames consumed).
    pub steps: usize,
    pub total_reward: f64,
}

/// Plays one episode of `spec` with the episodic-control policy, then folds
/// the trace into `store`. The environment and the policy draw from
/// independent streams derived from `seed`, so the same seed replays the
/// same episode against an equal store.
pub fn run_episode(
    spec: &GridWorldSpec,
    store: &mut EpisodicValueStore,
    embedding: &EmbeddingFunction,
    config: &AgentConfig,
    seed: u64,
) -> Result<EpisodeSummary> {
    config.validate()?;
    let (mut state, first_frame) = spec.reset(mix_seed(seed, 0))?;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 1));
    let mut trace = EpisodeTrace::default();
    let mut key = embedding.embed(&first_frame)?;
    while !state.done() {
        let action = act(store, &key, config, &mut rng)?;
        let outcome = state.step(Action::from_index(action)?)?;
        trace.record(key, action, outcome.reward);
        key = embedding.embed(&outcome.observation)?;
    }
    end_episode(store, &trace, config.gamma)?;
    Ok(EpisodeSummary { steps: trace.len(), total_reward: trace.total_reward() })
}

/// An environment presented as opaque state keys, for tabular methods.
pub trait KeyedEnvironment {
    fn num_actions(&self) -> usize;
    /// Starts an episode and returns the initial state key.
    fn reset(&mut self, seed: u64) -> Result<u64>;
    /// Returns (next state key, reward, done).
    fn step(&mut self, action: usize) -> Result<(u64, f64, bool)>;
}

fn fnv1a64(bytes: impl Iterator<Item = u8>) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// A gridworld exposed through observation hashes: the state key is a
/// 64-bit FNV-1a digest of the rendered frame's exact bit pattern. Two
/// observations get the same key only when they are identical down to the
/// last bit, which is precisely the regime where tabular lookup works.
pub struct HashedGridWorld {
    spec: GridWorldSpec,
    state: Option<crate::env::EnvState>,
}

impl HashedGridWorld {
    pub fn new(spec: GridWorldSpec) -> Self {
        Self { spec, state: None }
    }

    fn frame_key(frame: &crate::embeddings::ObservationFrame) -> u64 {
        fnv1a64(frame.pixels().iter().flat_map(|p| p.to_bits().to_le_bytes()))
    }
}

impl KeyedEnvironment for HashedGridWorld {
    fn num_actions(&self) -> usize {
        NUM_ACTIONS
    }

    fn reset(&mut self, seed: u64) -> Result<u64> {
        let (state, frame) = self.spec.reset(seed)?;
        self.state = Some(state);
        Ok(Self::frame_key(&frame))
    }

    fn step(&mut self, action: usize) -> Result<(u64, f64, bool)> {
        let state = self
            .state
            .as_mut()
            .ok_or_else(|| EcError::InvalidArgument("step before reset".into()))?;
        let out = state.step(Action::from_index(action)?)?;
        Ok((Self::frame_key(&out.observation), out.reward, out.done))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QLearningConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub episodes: usize,
    pub seed: u64,
}

/// A finished Q-learning run: the per-episode reward curve and the learned
/// table.
pub struct QLearningOutcome {
    pub episode_rewards: Vec<f64>,
    pub q: HashMap<(u64, usize), f64>,
}

/// Runs ε-greedy tabular Q-learning. Episode `e` seeds its environment and
/// its policy stream exactly as [`run_episode`] does for episode seed
/// `mix_seed(config.seed, e)`, so curves from the two agents are paired
/// run-for-run.
pub fn q_learning_baseline(
    env: &mut dyn KeyedEnvironment,
    config: &QLearningConfig,
) -> Result<QLearningOutcome> {
    if !(config.alpha.is_finite() && config.alpha > 0.0 && config.alpha <= 1.0) {
        return Err(EcError::InvalidArgument(format!(
            "alpha must lie in (0, 1], got {}",
            config.alpha
        )));
    }
    if !(config.gamma.is_finite() && (0.0..=1.0).contains(&config.gamma)) {
        return Err(EcError::InvalidArgument(format!(
            "gamma must lie in [0, 1], got {}",
            config.gamma
        )));
    }
    if !(config.epsilon.is_finite() && (0.0..=1.0).contains(&config.epsilon)) {
        return Err(EcError::InvalidArgument(format!(
            "epsilon must lie in [0, 1], got {}",
            config.epsilon
        )));
    }
    let actions = env.num_actions();
    let mut q: HashMap<(u64, usize), f64> = HashMap::new();
    let lookup = |q: &HashMap<(u64, usize), f64>, s: u64, a: usize| {
        q.get(&(s, a)).copied().unwrap_or(0.0)
    };
    let greedy = |q: &HashMap<(u64, usize), f64>, s: u64| {
        let mut best = 0;
        let mut best_value = f64::NEG_INFINITY;
        for a in 0..actions {
            let v = lookup(q, s, a);
            if v > best_value {
                best = a;
                best_value = v;
            }
        }
        best
    };
    let mut episode_rewards = Vec::with_capacity(config.episodes);
    for episode in 0..config.episodes {
        let episode_seed = mix_seed(config.seed, episode as u64);
        let mut state = env.reset(mix_seed(episode_seed, 0))?;
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(episode_seed, 1));
        let mut total = 0.0;
        loop {
            let explore = rng.random::<f64>() < config.epsilon;
            let random_choice = rng.random_range(0..actions);
            let action = if explore { random_choice } else { greedy(&q, state) };
            let (next, reward, done) = env.step(action)?;
            total += reward;
            let bootstrap = if done {
                0.0
            } else {
                (0..actions).map(|a| lookup(&q, next, a)).fold(f64::NEG_INFINITY, f64::max)
            };
            let target = reward + config.gamma * bootstrap;
            let entry = q.entry((state, action)).or_insert(0.0);
            *entry += config.alpha * (target - *entry);
            state = next;
            if done {
                break;
            }
        }
        episode_rewards.push(total);
    }
    Ok(QLearningOutcome { episode_rewards, q })
}
