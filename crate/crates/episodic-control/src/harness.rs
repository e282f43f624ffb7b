//! Experiment harness: config files, multi-seed runs, CSV reports.
//!
//! A single line-oriented `key=value` file describes a whole experiment:
//! the task (same keys the environment parser accepts), the embedding used
//! to key the value store, the agent parameters, and the run shape
//! (episodes, seeds, store capacity). [`run_experiment`] repeats the run
//! once per seed — each seed gets its own store and, where applicable, its
//! own projection matrix or freshly pretrained VAE — and aggregates the
//! per-episode reward across seeds. [`run_k_sweep`] repeats that for a list
//! of neighbourhood sizes.
//!
//! All emitted numbers are formatted with Rust's shortest-round-trip float
//! display, so a rerun of the same config produces byte-identical CSV files
//! and parsing a report back recovers the exact values.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agent::{mix_seed, run_episode, AgentConfig};
use crate::embeddings::{EmbeddingFunction, ObservationFrame, ProjectionMatrix};
use crate::env::{GridWorldSpec, StartMode, ACTIONS, NUM_ACTIONS};
use crate::error::{EcError, Result};
use crate::memory::EpisodicValueStore;
use crate::vae::{train, TrainConfig, VaeModel};

/// Keys handled by [`GridWorldSpec::from_key_value_text`]; everything else
/// in a config file belongs to the experiment layer.
const ENV_KEYS: [&str; 7] = ["task", "width", "height", "items", "start_mode", "t_max", "seed"];

/// Stream tags for per-seed infrastructure randomness. They sit far above
/// any realistic episode index, so episode streams never alias them.
const PROJECTION_STREAM: u64 = 1 << 40;
const CORPUS_STREAM: u64 = (1 << 40) + 1;
const VAE_INIT_STREAM: u64 = (1 << 40) + 2;
const VAE_TRAIN_STREAM: u64 = (1 << 40) + 3;

/// How observations are turned into store keys.
#[derive(Debug, Clone, PartialEq)]
pub enum EmbeddingKind {
    /// Flattened frames, unchanged.
    Identity,
    /// A fixed Gaussian random projection down to `dim` components.
    RandomProjection { dim: usize },
    /// Encoder statistics of a VAE pretrained on `frames` random-policy
    /// frames before the run starts.
    Vae {
        hidden: usize,
        latent: usize,
        frames: usize,
        steps: usize,
        batch: usize,
        learning_rate: f64,
    },
}

/// Everything needed to reproduce an experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub spec: GridWorldSpec,
    pub embedding: EmbeddingKind,
    pub agent: AgentConfig,
    /// Entries each action buffer holds before evicting.
    pub capacity: usize,
    pub episodes: usize,
    pub seeds: Vec<u64>,
}

impl ExperimentConfig {
    /// A runnable baseline configuration for `spec`: identity embedding,
    /// regime defaults for the agent, a 10,000-entry store, 100 episodes
    /// over seeds 0–4.
    pub fn defaults_for(spec: GridWorldSpec) -> Self {
        let agent = default_agent(spec.start_mode());
        Self {
            spec,
            embedding: EmbeddingKind::Identity,
            agent,
            capacity: 10_000,
            episodes: 100,
            seeds: vec![0, 1, 2, 3, 4],
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        self.agent.validate()?;
        if self.capacity == 0 {
            return Err(EcError::InvalidArgument("capacity must be at least 1".into()));
        }
        if self.episodes == 0 {
            return Err(EcError::InvalidArgument("episodes must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(EcError::InvalidArgument("at least one seed is required".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for s in &self.seeds {
            if !seen.insert(*s) {
                return Err(EcError::InvalidArgument(format!("duplicate seed {s}")));
            }
        }
        match &self.embedding {
            EmbeddingKind::Identity => {}
            EmbeddingKind::RandomProjection { dim } => {
                if *dim == 0 {
                    return Err(EcError::InvalidArgument(
                        "projection_dim must be at least 1".into(),
                    ));
                }
            }
            EmbeddingKind::Vae { hidden, latent, frames, steps, batch, learning_rate } => {
                for (name, v) in [
                    ("vae_hidden", *hidden),
                    ("vae_latent", *latent),
                    ("vae_frames", *frames),
                    ("vae_steps", *steps),
                    ("vae_batch", *batch),
                ] {
                    if v == 0 {
                        return Err(EcError::InvalidArgument(format!(
                            "{name} must be at least 1"
                        )));
                    }
                }
                if !(learning_rate.is_finite() && *learning_rate > 0.0) {
                    return Err(EcError::InvalidArgument(format!(
                        "vae_learning_rate must be positive, got {learning_rate}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Agent parameters suited to the exact-match regime of each start mode:
/// with a fixed start, revisits are literal, so a small neighbourhood and
/// undiscounted returns work best; with randomized starts the store must
/// generalize across jittered frames, which wants a wide neighbourhood and
/// a mild discount.
pub fn default_agent(start_mode: StartMode) -> AgentConfig {
    match start_mode {
        StartMode::Fixed => AgentConfig { epsilon: 0.005, gamma: 1.0, k: 11 },
        StartMode::Randomized => AgentConfig { epsilon: 0.005, gamma: 0.99, k: 50 },
    }
}

/// Parses an experiment description.
///
/// Environment keys (`task`, `width`, `height`, `items`, `start_mode`,
/// `t_max`, `seed`) are handled exactly as in
/// [`GridWorldSpec::from_key_value_text`]. The experiment layer adds:
///
/// * `episodes` — episodes per seed (default 100)
/// * `seeds` — comma-separated run seeds (default `0,1,2,3,4`)
/// * `capacity` — per-action buffer capacity (default 10000)
/// * `epsilon`, `gamma`, `k` — agent parameters; `gamma` and `k` default by
///   start mode (fixed: 1 and 11; randomized: 0.99 and 50), `epsilon` to 0.005
/// * `embedding` — `identity` (default), `projection`, or `vae`
/// * `projection_dim` — output size for `embedding=projection` (default 64)
/// * `vae_hidden`, `vae_latent`, `vae_frames`, `vae_steps`, `vae_batch`,
///   `vae_learning_rate` — pretraining shape for `embedding=vae`
///   (defaults 32, 8, 500, 500, 16, 0.001)
///
/// Unknown keys, malformed values and out-of-range parameters are rejected
/// with the offending line number. Keys for an embedding other than the
/// selected one are rejected too, so a config cannot silently carry dead
/// parameters.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut episodes = None;
    let mut seeds: Option<Vec<u64>> = None;
    let mut capacity = None;
    let mut epsilon = None;
    let mut gamma = None;
    let mut k = None;
    let mut embedding_name: Option<String> = None;
    let mut projection_dim = None;
    let mut vae_hidden = None;
    let mut vae_latent = None;
    let mut vae_frames = None;
    let mut vae_steps = None;
    let mut vae_batch = None;
    let mut vae_learning_rate = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = idx + 1;
        let config_err = |message: String| EcError::Config { line: lineno, message };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_err(format!("expected key=value, found {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        if ENV_KEYS.contains(&key) {
            continue; // handled by the environment parser below
        }
        match key {
            "episodes" => {
                episodes = Some(
                    value.parse::<usize>().map_err(|e| config_err(format!("bad episodes: {e}")))?,
                )
            }
            "seeds" => {
                let parsed = value
                    .split(',')
                    .map(|piece| {
                        piece
                            .trim()
                            .parse::<u64>()
                            .map_err(|e| config_err(format!("bad seed {piece:?}: {e}")))
                    })
                    .collect::<Result<Vec<u64>>>()?;
                if parsed.is_empty() {
                    return Err(config_err("seeds list is empty".into()));
                }
                seeds = Some(parsed);
            }
            "capacity" => {
                capacity = Some(
                    value.parse::<usize>().map_err(|e| config_err(format!("bad capacity: {e}")))?,
                )
            }
            "epsilon" => {
                let v =
                    value.parse::<f64>().map_err(|e| config_err(format!("bad epsilon: {e}")))?;
                if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
                    return Err(config_err(format!("epsilon must lie in [0, 1], got {v}")));
                }
                epsilon = Some(v);
            }
            "gamma" => {
                let v = value.parse::<f64>().map_err(|e| config_err(format!("bad gamma: {e}")))?;
                if !(v.is_finite() && v > 0.0 && v <= 1.0) {
                    return Err(config_err(format!("gamma must lie in (0, 1], got {v}")));
                }
                gamma = Some(v);
            }
            "k" => {
                let v = value.parse::<usize>().map_err(|e| config_err(format!("bad k: {e}")))?;
                if v == 0 {
                    return Err(config_err("k must be at least 1".into()));
                }
                k = Some(v);
            }
            "embedding" => match value {
                "identity" | "projection" | "vae" => embedding_name = Some(value.to_string()),
                other => return Err(config_err(format!("unknown embedding {other:?}"))),
            },
            "projection_dim" => {
                projection_dim = Some(
                    value
                        .parse::<usize>()
                        .map_err(|e| config_err(format!("bad projection_dim: {e}")))?,
                )
            }
            "vae_hidden" => {
                vae_hidden = Some(
                    value.parse::<usize>().map_err(|e| config_err(format!("bad vae_hidden: {e}")))?,
                )
            }
            "vae_latent" => {
                vae_latent = Some(
                    value.parse::<usize>().map_err(|e| config_err(format!("bad vae_latent: {e}")))?,
                )
            }
            "vae_frames" => {
                vae_frames = Some(
                    value.parse::<usize>().map_err(|e| config_err(format!("bad vae_frames: {e}")))?,
                )
            }
            "vae_steps" => {
                vae_steps = Some(
                    value.parse::<usize>().map_err(|e| config_err(format!("bad vae_steps: {e}")))?,
                )
            }
            "vae_batch" => {
                vae_batch = Some(
                    value.parse::<usize>().map_err(|e| config_err(format!("bad vae_batch: {e}")))?,
                )
            }
            "vae_learning_rate" => {
                let v = value
                    .parse::<f64>()
                    .map_err(|e| config_err(format!("bad vae_learning_rate: {e}")))?;
                if !(v.is_finite() && v > 0.0) {
                    return Err(config_err(format!(
                        "vae_learning_rate must be positive, got {v}"
                    )));
                }
                vae_learning_rate = Some(v);
            }
            other => return Err(config_err(format!("unknown key {other:?}"))),
        }
    }

    // Re-parse only the environment lines, blanking the rest so the
    // environment parser reports original line numbers.
    let env_text = text
        .lines()
        .map(|raw| {
            let line = raw.trim();
            let key = line.split('=').next().unwrap_or("").trim();
            if line.is_empty() || line.starts_with('#') || ENV_KEYS.contains(&key) {
                raw
            } else {
                ""
            }
        })
        .collect::<Vec<_>>()
        .join("\n");
    let spec = GridWorldSpec::from_key_value_text(&env_text)?;

    let embedding = match embedding_name.as_deref().unwrap_or("identity") {
        "projection" => EmbeddingKind::RandomProjection { dim: projection_dim.unwrap_or(64) },
        "vae" => EmbeddingKind::Vae {
            hidden: vae_hidden.unwrap_or(32),
            latent: vae_latent.unwrap_or(8),
            frames: vae_frames.unwrap_or(500),
            steps: vae_steps.unwrap_or(500),
            batch: vae_batch.unwrap_or(16),
            learning_rate: vae_learning_rate.unwrap_or(1e-3),
        },
        _ => EmbeddingKind::Identity,
    };
    // Reject parameters for embeddings that are not in play.
    if !matches!(embedding, EmbeddingKind::RandomProjection { .. }) && projection_dim.is_some() {
        return Err(EcError::Config {
            line: 0,
            message: "projection_dim requires embedding=projection".into(),
        });
    }
    if !matches!(embedding, EmbeddingKind::Vae { .. }) {
        for (name, set) in [
            ("vae_hidden", vae_hidden.is_some()),
            ("vae_latent", vae_latent.is_some()),
            ("vae_frames", vae_frames.is_some()),
            ("vae_steps", vae_steps.is_some()),
            ("vae_batch", vae_batch.is_some()),
            ("vae_learning_rate", vae_learning_rate.is_some()),
        ] {
            if set {
                return Err(EcError::Config {
                    line: 0,
                    message: format!("{name} requires embedding=vae"),
                });
            }
        }
    }

    let defaults = default_agent(spec.start_mode());
    let config = ExperimentConfig {
        spec,
        embedding,
        agent: AgentConfig {
            epsilon: epsilon.unwrap_or(defaults.epsilon),
            gamma: gamma.unwrap_or(defaults.gamma),
            k: k.unwrap_or(defaults.k),
        },
        capacity: capacity.unwrap_or(10_000),
        episodes: episodes.unwrap_or(100),
        seeds: seeds.unwrap_or_else(|| vec![0, 1, 2, 3, 4]),
    };
    config.validate()?;
    Ok(config)
}

/// Reads and parses a config file.
pub fn read_config(path: &Path) -> Result<ExperimentConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// One episode's line in a per-seed report.
#[derive(Debug, Clone)]
pub struct EpisodeRow {
    pub episode: usize,
    /// Actions taken this episode.
    pub steps: usize,
    /// Environment frames consumed since the seed started — one per step,
    /// plus any embedding-pretraining corpus.
    pub frames: u64,
    pub total_reward: f64,
    /// Exact-match rate of the store over all estimates so far.
    pub match_rate: f64,
    /// Entries per action buffer after the episode's writes.
    pub occupancy: Vec<usize>,
}

/// Everything one seed produced. `failure` carries the error message if the
/// run stopped early; the rows collected up to that point are kept.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub seed: u64,
    pub rows: Vec<EpisodeRow>,
    pub failure: Option<String>,
}

impl RunRecord {
    /// True when the seed finished every episode without an error.
    pub fn is_complete(&self, episodes: usize) -> bool {
        self.failure.is_none() && self.rows.len() == episodes
    }
}

/// Cross-seed reward statistics for one episode index.
#[derive(Debug, Clone, Copy)]
pub struct AggregateRow {
    pub episode: usize,
    pub mean_reward: f64,
    /// Standard error of the mean, with the n-1 variance denominator.
    pub sem_reward: f64,
    pub n_seeds: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub runs: Vec<RunRecord>,
    /// Empty unless at least two seeds completed every episode.
    pub aggregate: Vec<AggregateRow>,
}

fn mean_sem(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Gathers `wanted` frames by playing uniformly random episodes of `spec`.
/// Used to pretrain a VAE embedding before the agent ever acts.
pub fn collect_corpus(
    spec: &GridWorldSpec,
    wanted: usize,
    seed: u64,
) -> Result<Vec<ObservationFrame>> {
    if wanted == 0 {
        return Err(EcError::InvalidArgument("corpus must contain at least one frame".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 1 << 32));
    let mut frames = Vec::with_capacity(wanted);
    let mut episode = 0u64;
    while frames.len() < wanted {
        let (mut state, first) = spec.reset(mix_seed(seed, episode))?;
        frames.push(first);
        while !state.done() && frames.len() < wanted {
            let action = ACTIONS[rng.random_range(0..NUM_ACTIONS)];
            frames.push(state.step(action)?.observation);
        }
        episode += 1;
    }
    Ok(frames)
}

/// Builds the key function for one seed, returning it together with the
/// number of frames consumed by pretraining (zero unless a VAE is trained).
fn build_embedding(config: &ExperimentConfig, seed: u64) -> Result<(EmbeddingFunction, usize)> {
    let frame_dim = config.spec.frame_dim();
    match &config.embedding {
        EmbeddingKind::Identity => Ok((EmbeddingFunction::Identity, 0)),
        EmbeddingKind::RandomProjection { dim } => {
            let matrix =
                ProjectionMatrix::gaussian(frame_dim, *dim, mix_seed(seed, PROJECTION_STREAM))?;
            Ok((EmbeddingFunction::Projection(matrix), 0))
        }
        EmbeddingKind::Vae { hidden, latent, frames, steps, batch, learning_rate } => {
            let corpus = collect_corpus(&config.spec, *frames, mix_seed(seed, CORPUS_STREAM))?;
            let mut model =
                VaeModel::new(frame_dim, *hidden, *latent, mix_seed(seed, VAE_INIT_STREAM))?;
            let train_config = TrainConfig {
                steps: *steps,
                batch_size: *batch,
                learning_rate: *learning_rate,
                seed: mix_seed(seed, VAE_TRAIN_STREAM),
            };
            train(&mut model, &corpus, &train_config)?;
            Ok((EmbeddingFunction::VaeFeatures(model), corpus.len()))
        }
    }
}

fn run_single_seed(config: &ExperimentConfig, seed: u64) -> RunRecord {
    let mut record = RunRecord { seed, rows: Vec::new(), failure: None };
    let attempt = (|| -> Result<()> {
        let (embedding, pretrain_frames) = build_embedding(config, seed)?;
        let dim = embedding.output_dim(config.spec.frame_dim());
        let mut store = EpisodicValueStore::new(NUM_ACTIONS, config.capacity, dim)?;
        let mut frames = pretrain_frames as u64;
        for episode in 0..config.episodes {
            let summary = run_episode(
                &config.spec,
                &mut store,
                &embedding,
                &config.agent,
                mix_seed(seed, episode as u64),
            )?;
            frames += summary.steps as u64;
            record.rows.push(EpisodeRow {
                episode,
                steps: summary.steps,
                frames,
                total_reward: summary.total_reward,
                match_rate: store.match_rate().unwrap_or(0.0),
                occupancy: store.occupancy(),
            });
        }
        Ok(())
    })();
    if let Err(e) = attempt {
        record.failure = Some(e.to_string());
    }
    record
}

fn aggregate_rows(runs: &[RunRecord], episodes: usize) -> Vec<AggregateRow> {
    let complete: Vec<&RunRecord> = runs.iter().filter(|r| r.is_complete(episodes)).collect();
    if complete.len() < 2 {
        return Vec::new();
    }
    (0..episodes)
        .map(|episode| {
            let rewards: Vec<f64> =
                complete.iter().map(|r| r.rows[episode].total_reward).collect();
            let (mean_reward, sem_reward) = mean_sem(&rewards);
            AggregateRow { episode, mean_reward, sem_reward, n_seeds: rewards.len() }
        })
        .collect()
}

/// Runs the configured experiment across all seeds. A seed that fails stops
/// only itself; its partial rows and failure message are kept and the
/// aggregate is computed over the seeds that completed (empty if fewer than
/// two did).
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let runs: Vec<RunRecord> =
        config.seeds.iter().map(|&seed| run_single_seed(config, seed)).collect();
    let aggregate = aggregate_rows(&runs, config.episodes);
    Ok(ExperimentOutcome { runs, aggregate })
}

/// Episodes counted into the final score: the last tenth of the run, and
/// never fewer than one episode.
pub fn final_score_window(episodes: usize) -> usize {
    (episodes / 10).max(1)
}

/// One neighbourhood size's result in a sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub k: usize,
    /// Mean over seeds of the mean reward in the final-score window.
    pub final_score_mean: f64,
    pub final_score_sem: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// The full per-k outcomes, in sweep order.
    pub outcomes: Vec<(usize, ExperimentOutcome)>,
}

/// Reruns the experiment once per neighbourhood size in `ks`.
pub fn run_k_sweep(config: &ExperimentConfig, ks: &[usize]) -> Result<SweepOutcome> {
    if ks.is_empty() {
        return Err(EcError::InvalidArgument("sweep needs at least one k".into()));
    }
    let mut seen = std::collections::HashSet::new();
    for &k in ks {
        if k == 0 {
            return Err(EcError::InvalidArgument("sweep values must be positive".into()));
        }
        if !seen.insert(k) {
            return Err(EcError::InvalidArgument(format!("duplicate sweep value k={k}")));
        }
    }
    let window = final_score_window(config.episodes);
    let mut rows = Vec::with_capacity(ks.len());
    let mut outcomes = Vec::with_capacity(ks.len());
    for &k in ks {
        let mut swept = config.clone();
        swept.agent.k = k;
        let outcome = run_experiment(&swept)?;
        let scores: Vec<f64> = outcome
            .runs
            .iter()
            .filter(|r| r.is_complete(config.episodes))
            .map(|r| {
                let tail = &r.rows[r.rows.len() - window..];
                tail.iter().map(|row| row.total_reward).sum::<f64>() / window as f64
            })
            .collect();
        if scores.is_empty() {
            return Err(EcError::UndefinedStatistic {
                what: "sweep final score",
                why: format!("no seed completed all episodes for k={k}"),
            });
        }
        let (final_score_mean, final_score_sem) = mean_sem(&scores);
        rows.push(SweepRow { k, final_score_mean, final_score_sem });
        outcomes.push((k, outcome));
    }
    Ok(SweepOutcome { rows, outcomes })
}

pub const METRICS_HEADER: &str = "episode,steps,frames,total_reward,match_rate,buffer_occupancy";
pub const AGGREGATE_HEADER: &str = "episode,mean_reward,sem_reward,n_seeds";
pub const SWEEP_HEADER: &str = "k,final_score_mean,final_score_sem";

/// Writes `seed_<s>.csv` per run plus `aggregate.csv` into `dir`, creating
/// it if needed. Buffer occupancies are `;`-joined inside their column so
/// the files stay plain single-header CSV.
pub fn write_metrics(dir: &Path, outcome: &ExperimentOutcome) -> Result<()> {
    if outcome.runs.is_empty() {
        return Err(EcError::InvalidArgument("no per-seed records to write".into()));
    }
    std::fs::create_dir_all(dir)?;
    for run in &outcome.runs {
        let mut text = String::from(METRICS_HEADER);
        text.push('\n');
        for row in &run.rows {
            let occupancy = row
                .occupancy
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(";");
            writeln!(
                text,
                "{},{},{},{},{},{}",
                row.episode, row.steps, row.frames, row.total_reward, row.match_rate, occupancy
            )
            .expect("writing to a String cannot fail");
        }
        std::fs::write(dir.join(format!("seed_{}.csv", run.seed)), text)?;
    }
    let mut text = String::from(AGGREGATE_HEADER);
    text.push('\n');
    for row in &outcome.aggregate {
        writeln!(text, "{},{},{},{}", row.episode, row.mean_reward, row.sem_reward, row.n_seeds)
            .expect("writing to a String cannot fail");
    }
    std::fs::write(dir.join("aggregate.csv"), text)?;
    Ok(())
}

/// Writes `sweep.csv` into `dir` plus one `k_<k>/` subdirectory of full
/// metrics per swept value.
pub fn write_sweep(dir: &Path, sweep: &SweepOutcome) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut text = String::from(SWEEP_HEADER);
    text.push('\n');
    for row in &sweep.rows {
        writeln!(text, "{},{},{}", row.k, row.final_score_mean, row.final_score_sem)
            .expect("writing to a String cannot fail");
    }
    std::fs::write(dir.join("sweep.csv"), text)?;
    for (k, outcome) in &sweep.outcomes {
        write_metrics(&dir.join(format!("k_{k}")), outcome)?;
    }
    Ok(())
}
