//! Self-play training loop.
//!
//! Each iteration generates episodes with the search guiding both players
//! from a frozen network snapshot, stores the search-improved policies and
//! discounted returns in a circular replay buffer, then takes minibatch
//! gradient steps on a private copy that becomes the next snapshot.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::game::{Game, JointAction, Trajectory};
use crate::mcts::{run_search, SearchConfig};
use crate::net::{
    CheckpointError, NetConfig, NetError, NetOracle, Network, Optimizer, OptimizerKind, Real,
    TrainSample,
};
use crate::rng::substream_n;

/// A stored training example; see [`TrainSample`] for the fields.
pub type ReplayEntry = TrainSample;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("io error writing training outputs: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Circular replay buffer; once full, every insert evicts the oldest entry.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    entries: Vec<ReplayEntry>,
    capacity: usize,
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay buffer capacity must be positive");
        Self {
            entries: Vec::with_capacity(capacity.min(4096)),
            capacity,
            cursor: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, entry: ReplayEntry) {
        if self.entries.len() < self.capacity {
            self.entries.push(entry);
        } else {
            self.entries[self.cursor] = entry;
            self.cursor = (self.cursor + 1) % self.capacity;
        }
    }

    pub fn insert_all(&mut self, entries: impl IntoIterator<Item = ReplayEntry>) {
        for e in entries {
            self.insert(e);
        }
    }

    /// The stored entries in insertion order, oldest first.
    pub fn iter_ordered(&self) -> impl Iterator<Item = &ReplayEntry> {
        let (wrapped, head) = self.entries.split_at(self.cursor);
        head.iter().chain(wrapped.iter())
    }

    /// Draws `batch` entries uniformly with replacement.
    pub fn sample(&self, batch: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<ReplayEntry> {
        assert!(!self.entries.is_empty(), "cannot sample an empty buffer");
        use rand::Rng;
        (0..batch)
            .map(|_| self.entries[rng.gen_range(0..self.entries.len())].clone())
            .collect()
    }
}

/// Discounted returns by backward recursion with a zero tail.
pub fn compute_returns(rewards: &[f64], gamma: f64) -> Vec<f64> {
    compute_returns_with_tail(rewards, gamma, 0.0)
}

/// Discounted returns with a bootstrapped tail value for episodes truncated
/// before a terminal state.
pub fn compute_returns_with_tail(rewards: &[f64], gamma: f64, tail: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut acc = tail;
    for (i, r) in rewards.iter().enumerate().rev() {
        acc = r + gamma * acc;
        out[i] = acc;
    }
    out
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub n_iter: usize,
    pub n_ep: usize,
    pub grad_steps: usize,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub weight_decay: f64,
    pub learning_rate: f64,
    pub gamma: f64,
    pub seed: u64,
    pub search: SearchConfig,
    /// Bootstrap truncated episodes from the network value instead of zero.
    pub bootstrap_truncated: bool,
    pub optimizer: OptimizerKind,
    /// Self-play worker threads; 1 means sequential. Results are identical
    /// either way because episode seeds are indexed.
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_iter: 50,
            n_ep: 16,
            grad_steps: 64,
            batch_size: 256,
            buffer_capacity: 50_000,
            weight_decay: 1e-4,
            learning_rate: 1e-3,
            gamma: 0.99,
            seed: 0,
            search: SearchConfig::default(),
            bootstrap_truncated: true,
            optimizer: OptimizerKind::Adam,
            workers: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.n_iter < 1 || self.n_ep < 1 || self.grad_steps < 1 || self.batch_size < 1 {
            return Err("train counts (n_iter, n_ep, grad_steps, batch_size) must be at least 1".into());
        }
        if self.buffer_capacity < 1 {
            return Err("train.buffer_capacity must be at least 1".into());
        }
        if self.weight_decay < 0.0 {
            return Err(format!("train.weight_decay must be nonnegative, got {}", self.weight_decay));
        }
        if !(self.learning_rate > 0.0) {
            return Err(format!("train.learning_rate must be positive, got {}", self.learning_rate));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(format!("train.gamma must lie in [0, 1], got {}", self.gamma));
        }
        self.search.validate()
    }
}

/// One self-play episode: entries for the buffer plus the raw trajectory.
#[derive(Debug, Clone)]
pub struct EpisodeRecord<S> {
    pub entries: Vec<ReplayEntry>,
    pub trajectory: Trajectory<S>,
}

/// Plays one episode with both players sampling from the search policies.
/// Returns one replay entry per visited state, with discounted returns
/// computed backward from the episode end (bootstrapped from the network
/// value when the horizon truncates a live episode and the flag is set).
pub fn self_play_episode<G: Game, T: Real>(
    game: &G,
    net: &Network<T>,
    cfg: &TrainConfig,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> EpisodeRecord<G::State> {
    let oracle = NetOracle::new(net);
    let mut trajectory = Trajectory::new();
    let mut encodings = Vec::new();
    let mut state = game.initial_state(rng);
    let mut t = 0usize;

    while !game.is_terminal(&state) && t < cfg.search.horizon {
        let result = run_search(game, &state, &oracle, &cfg.search, rng);
        let a1 = result.pi1.sample(rng);
        let a2 = result.pi2.sample(rng);
        let step = game
            .step(&state, JointAction::new(a1, a2))
            .expect("search root is nonterminal and actions are in range");
        encodings.push(game.encode_state(&state));
        trajectory.push(state, result.pi1, result.pi2, step.reward1);
        state = step.next_state;
        t += 1;
    }

    let tail = if cfg.bootstrap_truncated && !game.is_terminal(&state) {
        net.forward(&game.encode_state(&state))
            .expect("encoding matches the network input")
            .value
    } else {
        0.0
    };
    let returns = compute_returns_with_tail(&trajectory.rewards(), cfg.gamma, tail);

    let entries = encodings
        .into_iter()
        .zip(trajectory.steps.iter())
        .zip(&returns)
        .map(|((input, step), v)| ReplayEntry {
            input,
            policy1: step.pi1.probs().to_vec(),
            policy2: step.pi2.probs().to_vec(),
            value: *v,
        })
        .collect();

    EpisodeRecord {
        entries,
        trajectory,
    }
}

/// Per-iteration metrics, mirrored into the metrics CSV.
#[derive(Debug, Clone)]
pub struct MetricsRow {
    pub iteration: usize,
    pub wall_seconds: f64,
    pub mean_policy_loss: f64,
    pub mean_value_loss: f64,
    pub total_loss: f64,
    pub buffer_fill: usize,
    pub brv_p1: Option<f64>,
    pub brv_p2: Option<f64>,
    pub exploitability: Option<f64>,
}

pub const METRICS_HEADER: &str =
    "iteration,wall_seconds,mean_policy_loss,mean_value_loss,total_loss,buffer_fill,brv_p1,brv_p2,exploitability";

impl MetricsRow {
    pub fn csv_line(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.9}")).unwrap_or_default();
        format!(
            "{},{:.3},{:.9},{:.9},{:.9},{},{},{},{}",
            self.iteration,
            self.wall_seconds,
            self.mean_policy_loss,
            self.mean_value_loss,
            self.total_loss,
            self.buffer_fill,
            opt(self.brv_p1),
            opt(self.brv_p2),
            opt(self.exploitability),
        )
    }
}

/// Optional per-iteration evaluation probe (exploitability against exact
/// best responses on tabular games, for example).
pub type Probe<'a, T> = dyn Fn(&Network<T>) -> (Option<f64>, Option<f64>, Option<f64>) + 'a;

#[derive(Debug)]
pub struct TrainOutput<T: Real> {
    pub network: Network<T>,
    pub metrics: Vec<MetricsRow>,
    pub checkpoint_paths: Vec<PathBuf>,
}

/// Runs the full loop: `n_iter` iterations of self-play episode generation
/// followed by minibatch gradient steps, writing `metrics.csv` and one
/// checkpoint per iteration into `out_dir`.
pub fn train_loop<G: Game, T: Real>(
    game: &G,
    net_cfg: NetConfig,
    cfg: &TrainConfig,
    out_dir: &Path,
    probe: Option<&Probe<'_, T>>,
) -> Result<TrainOutput<T>, TrainError> {
    cfg.validate().map_err(TrainError::InvalidConfig)?;
    net_cfg.validate().map_err(TrainError::InvalidConfig)?;
    std::fs::create_dir_all(out_dir)?;

    let mut net = Network::<T>::new(net_cfg, crate::rng::derive_seed(cfg.seed, "net-init", 0));
    let mut optimizer = Optimizer::<T>::new(cfg.optimizer, cfg.learning_rate);
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity);
    let mut metrics = Vec::with_capacity(cfg.n_iter);
    let mut checkpoint_paths = Vec::with_capacity(cfg.n_iter);

    let metrics_path = out_dir.join("metrics.csv");
    let mut metrics_file = std::fs::File::create(&metrics_path)?;
    writeln!(metrics_file, "{METRICS_HEADER}")?;

    let start = Instant::now();
    for iteration in 1..=cfg.n_iter {
        // Self play against the frozen snapshot published at iteration start.
        let snapshot = net.clone();
        let episode_indices: Vec<u64> = (0..cfg.n_ep as u64)
            .map(|e| (iteration as u64) << 32 | e)
            .collect();
        let run_episode = |tag: &u64| {
            let mut rng = substream_n(cfg.seed, "episode", *tag);
            self_play_episode(game, &snapshot, cfg, &mut rng).entries
        };
        let episode_entries: Vec<Vec<ReplayEntry>> = if cfg.workers > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.workers)
                .build()
                .map_err(|e| TrainError::InvalidConfig(e.to_string()))?;
            pool.install(|| episode_indices.par_iter().map(run_episode).collect())
        } else {
            episode_indices.iter().map(run_episode).collect()
        };
        for entries in episode_entries {
            buffer.insert_all(entries);
        }

        // Gradient steps on a private copy; published at iteration end.
        let mut rng = substream_n(cfg.seed, "batches", iteration as u64);
        let mut policy_sum = 0.0;
        let mut value_sum = 0.0;
        let mut total_sum = 0.0;
        for _ in 0..cfg.grad_steps {
            let batch = buffer.sample(cfg.batch_size, &mut rng);
            let (loss, grads) = net.loss_grads(&batch, cfg.weight_decay)?;
            optimizer.step(&mut net.params, &grads);
            policy_sum += loss.policy;
            value_sum += loss.value;
            total_sum += loss.total;
        }

        let (brv_p1, brv_p2, exploitability) = match probe {
            Some(p) => p(&net),
            None => (None, None, None),
        };

        let ckpt = out_dir.join(format!("checkpoint_{iteration:04}.saz"));
        net.save_checkpoint(&ckpt)?;
        checkpoint_paths.push(ckpt);

        let row = MetricsRow {
            iteration,
            wall_seconds: start.elapsed().as_secs_f64(),
            mean_policy_loss: policy_sum / cfg.grad_steps as f64,
            mean_value_loss: value_sum / cfg.grad_steps as f64,
            total_loss: total_sum / cfg.grad_steps as f64,
            buffer_fill: buffer.len(),
            brv_p1,
            brv_p2,
            exploitability,
        };
        writeln!(metrics_file, "{}", row.csv_line())?;
        metrics.push(row);
    }
    metrics_file.flush()?;

    Ok(TrainOutput {
        network: net,
        metrics,
        checkpoint_paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::tabular::make_tabular_toy;
    use crate::net::ValueBinning;
    use crate::rng::substream;

    fn entry(id: f64) -> ReplayEntry {
        ReplayEntry {
            input: vec![id],
            policy1: vec![1.0],
            policy2: vec![1.0],
            value: id,
        }
    }

    #[test]
    fn returns_follow_the_backward_recursion() {
        let r = compute_returns(&[0.0, 0.0, 1.0], 0.5);
        assert_eq!(r, vec![0.25, 0.5, 1.0]);
    }

    #[test]
    fn zero_discount_returns_equal_rewards() {
        let r = compute_returns(&[0.3, -0.7, 0.2], 0.0);
        assert_eq!(r, vec![0.3, -0.7, 0.2]);
    }

    #[test]
    fn empty_rewards_give_empty_returns() {
        assert!(compute_returns(&[], 0.9).is_empty());
    }

    #[test]
    fn bootstrapped_tail_feeds_the_recursion() {
        let r = compute_returns_with_tail(&[0.0, 1.0], 0.5, 2.0);
        assert_eq!(r, vec![1.0, 2.0]);
    }

    #[test]
    fn circular_eviction_keeps_the_most_recent_entries() {
        let mut buf = ReplayBuffer::new(3);
        for i in 1..=4 {
            buf.insert(entry(i as f64));
        }
        let held: Vec<f64> = buf.iter_ordered().map(|e| e.value).collect();
        assert_eq!(held, vec![2.0, 3.0, 4.0]);
        assert_eq!(buf.len(), 3);
    }

    #[test]
    fn replay_discipline_under_interleaved_inserts() {
        let mut buf = ReplayBuffer::new(5);
        let mut expected = Vec::new();
        for i in 0..23 {
            buf.insert(entry(i as f64));
            expected.push(i as f64);
        }
        let held: Vec<f64> = buf.iter_ordered().map(|e| e.value).collect();
        assert_eq!(held, expected[expected.len() - 5..]);
    }

    #[test]
    fn sampling_a_single_entry_buffer_repeats_it() {
        let mut buf = ReplayBuffer::new(4);
        buf.insert(entry(7.0));
        let mut rng = substream(0, "sample");
        let batch = buf.sample(4, &mut rng);
        assert_eq!(batch.len(), 4);
        assert!(batch.iter().all(|e| e.value == 7.0));
    }

    #[test]
    #[should_panic(expected = "empty buffer")]
    fn sampling_empty_buffer_panics() {
        let buf = ReplayBuffer::new(4);
        let mut rng = substream(0, "sample");
        let _ = buf.sample(1, &mut rng);
    }

    fn toy_setup() -> (crate::envs::tabular::TabularToy, NetConfig, TrainConfig) {
        let game = make_tabular_toy("asym22(1)").unwrap();
        let net_cfg = NetConfig {
            input_dim: crate::game::Game::encoding_len(&game),
            trunk_widths: vec![16, 16],
            head_hidden: vec![16],
            actions1: 2,
            actions2: 2,
            binning: ValueBinning::symmetric(2.0, 21),
        };
        let cfg = TrainConfig {
            n_iter: 2,
            n_ep: 4,
            grad_steps: 8,
            batch_size: 16,
            buffer_capacity: 512,
            gamma: 1.0,
            search: SearchConfig {
                n_sim: 24,
                gamma: 1.0,
                horizon: 4,
                ..SearchConfig::default()
            },
            ..TrainConfig::default()
        };
        (game, net_cfg, cfg)
    }

    #[test]
    fn one_step_game_episodes_produce_one_entry_with_the_stage_reward() {
        let (game, net_cfg, cfg) = toy_setup();
        let net = Network::<f64>::new(net_cfg, 3);
        let mut rng = substream(1, "episode");
        let rec = self_play_episode(&game, &net, &cfg, &mut rng);
        assert_eq!(rec.entries.len(), 1);
        assert_eq!(rec.trajectory.len(), 1);
        let e = &rec.entries[0];
        assert_eq!(e.value, rec.trajectory.steps[0].reward1);
        assert!((e.policy1.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((e.policy2.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn episodes_are_deterministic_given_the_stream() {
        let (game, net_cfg, cfg) = toy_setup();
        let net = Network::<f64>::new(net_cfg, 3);
        let a = self_play_episode(&game, &net, &cfg, &mut substream(2, "ep"));
        let b = self_play_episode(&game, &net, &cfg, &mut substream(2, "ep"));
        assert_eq!(a.entries, b.entries);
    }

    #[test]
    fn train_loop_writes_metrics_and_checkpoints() {
        let (game, net_cfg, cfg) = toy_setup();
        let dir = tempfile::tempdir().unwrap();
        let out = train_loop::<_, f64>(&game, net_cfg, &cfg, dir.path(), None).unwrap();
        assert_eq!(out.metrics.len(), 2);
        assert_eq!(out.checkpoint_paths.len(), 2);
        for p in &out.checkpoint_paths {
            assert!(p.exists());
        }
        let csv = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
        let lines: Vec<&str> = csv.trim().lines().collect();
        assert_eq!(lines.len(), 3, "header plus one row per iteration");
        assert!(lines[0].starts_with("iteration,"));
    }

    #[test]
    fn single_and_multi_worker_runs_match() {
        let (game, net_cfg, mut cfg) = toy_setup();
        cfg.n_iter = 1;
        let dir1 = tempfile::tempdir().unwrap();
        let dir2 = tempfile::tempdir().unwrap();
        cfg.workers = 1;
        let a = train_loop::<_, f64>(&game, net_cfg.clone(), &cfg, dir1.path(), None).unwrap();
        cfg.workers = 2;
        let b = train_loop::<_, f64>(&game, net_cfg, &cfg, dir2.path(), None).unwrap();
        for i in 0..a.network.params.coord_count() {
            assert_eq!(a.network.params.get_coord(i), b.network.params.get_coord(i));
        }
    }

    #[test]
    fn training_loss_trends_down_on_the_smoke_test() {
        let (game, net_cfg, mut cfg) = toy_setup();
        cfg.n_iter = 6;
        cfg.grad_steps = 16;
        let dir = tempfile::tempdir().unwrap();
        let out = train_loop::<_, f64>(&game, net_cfg, &cfg, dir.path(), None).unwrap();
        let first = out.metrics.first().unwrap().total_loss;
        let last = out.metrics.last().unwrap().total_loss;
        assert!(last < first, "loss went from {first} to {last}");
    }

    #[test]
    fn invalid_config_is_rejected_with_the_offending_key() {
        let (game, net_cfg, mut cfg) = toy_setup();
        cfg.gamma = 1.5;
        let dir = tempfile::tempdir().unwrap();
        let err = train_loop::<_, f64>(&game, net_cfg, &cfg, dir.path(), None).unwrap_err();
        assert!(err.to_string().contains("gamma"));
    }
}
