//! Episodic control: value estimation from a buffer of remembered returns.
//!
//! The crate implements a small reinforcement-learning stack built around
//! non-parametric value memory. Instead of fitting a parametric Q function,
//! the agent keeps one key/value buffer per action, stores the highest
//! discounted return ever obtained after taking that action in a given state,
//! and estimates values for novel states with a k-nearest-neighbour average
//! over the stored keys.
//!
//! Module map:
//!
//! * [`memory`] — per-action value buffers with exact-match lookup, kNN
//!   estimation, least-recently-written eviction and text snapshots.
//! * [`embeddings`] — observation keys: identity flattening, seeded Gaussian
//!   random projection, and distortion diagnostics for the projection.
//! * [`vae`] — a small dense variational autoencoder trained with RMSProp,
//!   usable as a learned embedding (latent mean and log-std).
//! * [`env`] — deterministic gridworld tasks (foraging and a double-T maze)
//!   with plane-stacked image observations.
//! * [`agent`] — the episodic controller (epsilon-greedy acting, backward
//!   return propagation into the buffers) and a tabular Q-learning baseline.
//! * [`harness`] — experiment configs, multi-seed runs, k sweeps and CSV
//!   metrics output.

pub mod agent;
pub mod embeddings;
pub mod env;
pub mod error;
pub mod harness;
pub mod memory;
pub mod vae;

pub use error::{EcError, Result};
