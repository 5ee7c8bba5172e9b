//! Evaluation experiments.
//!
//! Two families: exploitability measurements of policies (raw network heads
//! or search-derived) against exact or sampled best responses, and the
//! empirical check of the frontier-error contraction bound — perturbing the
//! frontier values of random game trees by at most `ε` moves the exact
//! minimax root value by at most `γ^D·ε`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::hash::Hash;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exact::{
    best_response_value, best_response_value_tree, sampled_best_response_value, ExactError,
    SampledBrConfig,
};
use crate::game::{Game, Player};
use crate::matgame::{solve_lp, MatGameError, MixedStrategy, PayoffMatrix};
use crate::mcts::{run_search, Oracle, SearchConfig};
use crate::net::{NetOracle, Network, Real};
use crate::rng::{derive_seed, substream_n};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("tree of {nodes} nodes exceeds the node budget {budget}")]
    BudgetExceeded { nodes: usize, budget: usize },
    #[error(transparent)]
    MatGame(#[from] MatGameError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("io error writing reports: {0}")]
    Io(#[from] std::io::Error),
}

// ---------------------------------------------------------------------------
// Frontier-error contraction trials
// ---------------------------------------------------------------------------

/// Configuration of one randomized contraction experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorTrialConfig {
    pub depth: usize,
    pub rows: usize,
    pub cols: usize,
    pub gamma: f64,
    pub epsilon: f64,
    pub reward_range: (f64, f64),
    pub trials: usize,
    /// Independent perturbation draws per tree.
    pub perturbation_draws: usize,
    pub seed: u64,
    pub node_budget: usize,
}

impl Default for ErrorTrialConfig {
    fn default() -> Self {
        Self {
            depth: 3,
            rows: 2,
            cols: 2,
            gamma: 0.9,
            epsilon: 1.0,
            reward_range: (-1.0, 1.0),
            trials: 100,
            perturbation_draws: 32,
            seed: 0,
            node_budget: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ErrorTrialOutcome {
    /// Largest observed root deviation over all trials and draws.
    pub max_root_error: f64,
    /// The contraction bound `γ^D·ε`.
    pub bound: f64,
    pub pass: bool,
}

/// Explicit random game tree with controllable frontier values.
struct RewardTree {
    depth: usize,
    branch: usize,
    /// `rewards[d][node * branch + edge]`.
    rewards: Vec<Vec<f64>>,
    frontier: Vec<f64>,
    rows: usize,
    cols: usize,
    gamma: f64,
}

impl RewardTree {
    fn random(cfg: &ErrorTrialConfig, rng: &mut rand_chacha::ChaCha8Rng) -> Self {
        let branch = cfg.rows * cfg.cols;
        let (lo, hi) = cfg.reward_range;
        let mut rewards = Vec::with_capacity(cfg.depth);
        let mut nodes = 1usize;
        for _ in 0..cfg.depth {
            rewards.push((0..nodes * branch).map(|_| rng.gen_range(lo..hi)).collect());
            nodes *= branch;
        }
        let frontier = (0..nodes).map(|_| rng.gen_range(lo..hi)).collect();
        Self {
            depth: cfg.depth,
            branch,
            rewards,
            frontier,
            rows: cfg.rows,
            cols: cfg.cols,
            gamma: cfg.gamma,
        }
    }

    /// Exact minimax value with the given frontier values.
    fn root_value(&self, frontier: &[f64]) -> Result<f64, MatGameError> {
        self.node_value(0, 0, frontier)
    }

    fn node_value(&self, depth: usize, node: usize, frontier: &[f64]) -> Result<f64, MatGameError> {
        if depth == self.depth {
            return Ok(frontier[node]);
        }
        let mut entries = Vec::with_capacity(self.branch);
        for edge in 0..self.branch {
            let child = node * self.branch + edge;
            let r = self.rewards[depth][child];
            entries.push(r + self.gamma * self.node_value(depth + 1, child, frontier)?);
        }
        Ok(solve_lp(&PayoffMatrix::new(self.rows, self.cols, entries)?)?.value)
    }
}

/// Builds `trials` random trees, perturbs every frontier value independently
/// within `[-ε, ε]`, and reports the worst observed root deviation against
/// the bound `γ^D·ε`.
pub fn error_propagation_trial(cfg: &ErrorTrialConfig) -> Result<ErrorTrialOutcome, EvalError> {
    let branch = cfg.rows * cfg.cols;
    let mut nodes = 0usize;
    let mut level = 1usize;
    for _ in 0..=cfg.depth {
        nodes += level;
        level = level.saturating_mul(branch);
    }
    if nodes > cfg.node_budget {
        return Err(EvalError::BudgetExceeded {
            nodes,
            budget: cfg.node_budget,
        });
    }

    let errors: Result<Vec<f64>, EvalError> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = substream_n(cfg.seed, "error-tree", trial);
            let tree = RewardTree::random(cfg, &mut rng);
            let exact = tree.root_value(&tree.frontier)?;
            let mut worst = 0.0f64;
            for draw in 0..cfg.perturbation_draws {
                let mut rng =
                    substream_n(cfg.seed, "error-draw", trial * 10_007 + draw as u64);
                let perturbed: Vec<f64> = tree
                    .frontier
                    .iter()
                    .map(|v| v + rng.gen_range(-cfg.epsilon..=cfg.epsilon))
                    .collect();
                let approx = tree.root_value(&perturbed)?;
                worst = worst.max((approx - exact).abs());
            }
            Ok(worst)
        })
        .collect();

    let max_root_error = errors?.into_iter().fold(0.0f64, f64::max);
    let bound = cfg.gamma.powi(cfg.depth as i32) * cfg.epsilon;
    Ok(ErrorTrialOutcome {
        max_root_error,
        bound,
        pass: max_root_error <= bound + 1e-12,
    })
}

// ---------------------------------------------------------------------------
// Exploitability evaluation
// ---------------------------------------------------------------------------

/// Which policy is being evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    /// The raw policy heads of the network.
    Raw,
    /// Search-derived root policies recomputed at every reached state.
    Mcts { n_sim: usize },
}

impl EvalMode {
    pub fn search_iters(&self) -> usize {
        match self {
            EvalMode::Raw => 0,
            EvalMode::Mcts { n_sim } => *n_sim,
        }
    }
}

/// Best-response computation backing an exploitability number.
#[derive(Debug, Clone)]
pub enum BrMethod {
    /// Exhaustive expectimax (memoized when states hash).
    Exact { node_budget: usize },
    /// Monte-Carlo lower bound from a planning responder.
    Sampled { episodes: usize, search_sims: usize },
}

/// One evaluation result row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub setting: String,
    pub brv_p1: f64,
    pub brv_p2: f64,
    pub exploitability: f64,
    pub search_iters: usize,
    pub seed: u64,
    /// "exact" or "sampled".
    pub tag: String,
}

/// A collection of evaluation rows plus aggregation and report output.
#[derive(Debug, Clone, Default, Serialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
}

/// Mean/deviation summary per search-iteration setting.
#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    pub setting: String,
    pub search_iters: usize,
    pub seeds: usize,
    pub mean_brv_p1: f64,
    pub mean_brv_p2: f64,
    pub mean_exploitability: f64,
    pub std_exploitability: f64,
}

pub const EVAL_CSV_HEADER: &str =
    "setting,brv_p1,brv_p2,exploitability,search_iters,seed,tag";

impl EvalReport {
    pub fn push(&mut self, row: EvalRow) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(EVAL_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.9},{:.9},{:.9},{},{},{}\n",
                r.setting, r.brv_p1, r.brv_p2, r.exploitability, r.search_iters, r.seed, r.tag
            ));
        }
        out
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<(), EvalError> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Groups rows by `(setting, search_iters)` and reports mean and
    /// standard deviation (population) of the exploitability.
    pub fn aggregate(&self) -> Vec<CurvePoint> {
        let mut groups: Vec<((String, usize), Vec<&EvalRow>)> = Vec::new();
        for row in &self.rows {
            let key = (row.setting.clone(), row.search_iters);
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, v)) => v.push(row),
                None => groups.push((key, vec![row])),
            }
        }
        groups
            .into_iter()
            .map(|((setting, search_iters), rows)| {
                let n = rows.len() as f64;
                let mean = |f: fn(&EvalRow) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / n;
                let mean_e = mean(|r| r.exploitability);
                let var = rows
                    .iter()
                    .map(|r| (r.exploitability - mean_e).powi(2))
                    .sum::<f64>()
                    / n;
                CurvePoint {
                    setting,
                    search_iters,
                    seeds: rows.len(),
                    mean_brv_p1: mean(|r| r.brv_p1),
                    mean_brv_p2: mean(|r| r.brv_p2),
                    mean_exploitability: mean_e,
                    std_exploitability: var.sqrt(),
                }
            })
            .collect()
    }

    /// JSON summary with the caller's config echoed for provenance.
    pub fn write_json(
        &self,
        path: &std::path::Path,
        config_echo: serde_json::Value,
    ) -> Result<(), EvalError> {
        let doc = serde_json::json!({
            "config": config_echo,
            "rows": self.rows,
            "aggregate": self.aggregate(),
        });
        std::fs::write(path, serde_json::to_string_pretty(&doc).expect("serializable report"))?;
        Ok(())
    }
}

/// Frozen-policy closures for both players under an evaluation mode. Search
/// results are cached per state so a policy is consistent wherever it is
/// queried, and search seeds are drawn deterministically in cache-miss
/// order.
struct PolicyPair<'a, G: Game, T: Real> {
    game: &'a G,
    net: &'a Network<T>,
    mode: EvalMode,
    search: SearchConfig,
    seed: u64,
    counter: RefCell<u64>,
}

impl<'a, G: Game, T: Real> PolicyPair<'a, G, T> {
    fn new(
        game: &'a G,
        net: &'a Network<T>,
        mode: EvalMode,
        search_base: &SearchConfig,
        seed: u64,
    ) -> Self {
        let search = SearchConfig {
            n_sim: mode.search_iters().max(1),
            gamma: game.discount(),
            horizon: game.horizon(),
            ..search_base.clone()
        };
        Self {
            game,
            net,
            mode,
            search,
            seed,
            counter: RefCell::new(0),
        }
    }

    fn fresh_eval(&self, state: &G::State) -> (MixedStrategy, MixedStrategy) {
        match self.mode {
            EvalMode::Raw => {
                let oracle = NetOracle::new(self.net);
                let eval = oracle.evaluate(self.game, state);
                (eval.p1, eval.p2)
            }
            EvalMode::Mcts { .. } => {
                let mut c = self.counter.borrow_mut();
                let mut rng = substream_n(self.seed, "eval-search", *c);
                *c += 1;
                let oracle = NetOracle::new(self.net);
                let r = run_search(self.game, state, &oracle, &self.search, &mut rng);
                (r.pi1, r.pi2)
            }
        }
    }
}

/// Evaluates a network's policies on a tabular game against exact best
/// responses. `search_base` supplies the search knobs (exploration constant
/// and regret-matching budgets) for the search-derived policies; the
/// simulation count comes from `mode` and the discount and horizon from the
/// game.
pub fn evaluate_policy_tabular<G, T>(
    game: &G,
    net: &Network<T>,
    setting: &str,
    mode: EvalMode,
    search_base: &SearchConfig,
    seed: u64,
    node_budget: usize,
) -> Result<EvalRow, EvalError>
where
    G: Game,
    G::State: Hash + Eq,
    T: Real,
{
    let s0 = game.initial_state(&mut crate::rng::substream(seed, "eval-root"));
    let pair = PolicyPair::new(game, net, mode, search_base, seed);
    let cache: RefCell<HashMap<(usize, G::State), (MixedStrategy, MixedStrategy)>> =
        RefCell::new(HashMap::new());
    let lookup = |depth: usize, state: &G::State| {
        cache
            .borrow_mut()
            .entry((depth, state.clone()))
            .or_insert_with(|| pair.fresh_eval(state))
            .clone()
    };
    let p1 = |d: usize, s: &G::State| lookup(d, s).0;
    let p2 = |d: usize, s: &G::State| lookup(d, s).1;

    let brv_p1 = best_response_value(game, &s0, &p2, Player::One, node_budget)?;
    let brv_p2 = best_response_value(game, &s0, &p1, Player::Two, node_budget)?;
    Ok(EvalRow {
        setting: setting.to_string(),
        brv_p1,
        brv_p2,
        exploitability: brv_p1 + brv_p2,
        search_iters: mode.search_iters(),
        seed,
        tag: "exact".into(),
    })
}

/// Evaluates a network's policies on a continuous-state game, either by
/// exhaustive tree expectimax (small horizons only) or by the sampled
/// lower-bound estimate.
pub fn evaluate_policy_continuous<G, T>(
    game: &G,
    net: &Network<T>,
    setting: &str,
    mode: EvalMode,
    search_base: &SearchConfig,
    seed: u64,
    br: &BrMethod,
) -> Result<EvalRow, EvalError>
where
    G: Game,
    T: Real,
{
    let pair = PolicyPair::new(game, net, mode, search_base, seed);
    let p1 = |_d: usize, s: &G::State| pair.fresh_eval(s).0;
    let p2 = |_d: usize, s: &G::State| pair.fresh_eval(s).1;

    let (brv_p1, brv_p2, tag) = match br {
        BrMethod::Exact { node_budget } => {
            let s0 = game.initial_state(&mut crate::rng::substream(seed, "eval-root"));
            let a = best_response_value_tree(game, &s0, &p2, Player::One, *node_budget)?;
            let b = best_response_value_tree(game, &s0, &p1, Player::Two, *node_budget)?;
            (a, b, "exact")
        }
        BrMethod::Sampled {
            episodes,
            search_sims,
        } => {
            let cfg = SampledBrConfig {
                episodes: *episodes,
                search_sims: *search_sims,
                exploration: 1.4,
                seed: derive_seed(seed, "sampled-br-cfg", 0),
            };
            let a = sampled_best_response_value(game, &p2, Player::One, &cfg);
            let b = sampled_best_response_value(game, &p1, Player::Two, &cfg);
            (a, b, "sampled")
        }
    };
    Ok(EvalRow {
        setting: setting.to_string(),
        brv_p1,
        brv_p2,
        exploitability: brv_p1 + brv_p2,
        search_iters: mode.search_iters(),
        seed,
        tag: tag.into(),
    })
}

/// Exploitability as a function of search effort: one row per
/// `(n_sim, seed)` pair, evaluated against exact best responses.
pub fn exploitability_vs_search_curve<G, T>(
    game: &G,
    net: &Network<T>,
    setting: &str,
    iters_list: &[usize],
    seeds: &[u64],
    search_base: &SearchConfig,
    node_budget: usize,
) -> Result<EvalReport, EvalError>
where
    G: Game,
    G::State: Hash + Eq + Send,
    T: Real,
{
    let jobs: Vec<(usize, u64)> = iters_list
        .iter()
        .flat_map(|n| seeds.iter().map(move |s| (*n, *s)))
        .collect();
    let rows: Result<Vec<EvalRow>, EvalError> = jobs
        .par_iter()
        .map(|(n_sim, seed)| {
            evaluate_policy_tabular(
                game,
                net,
                setting,
                EvalMode::Mcts { n_sim: *n_sim },
                search_base,
                *seed,
                node_budget,
            )
        })
        .collect();
    Ok(EvalReport { rows: rows? })
}
