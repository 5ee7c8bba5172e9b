//! Ground-truth solvers for small games.
//!
//! [`backward_induction`] solves the tree of stage games exactly: the value
//! of a state is the linear-programming value of the matrix whose entries
//! are `reward + γ·V(child)`, with value 0 at terminal states and at the
//! horizon. [`best_response_value`] computes the value a responder achieves
//! against a frozen stochastic opponent by depth-limited expectimax, which
//! is an MDP solve. Their combination, [`joint_exploitability`], is the
//! distance-to-equilibrium metric the rest of the crate reports.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use rand::Rng;
use thiserror::Error;

use crate::game::{Game, JointAction, Player};
use crate::matgame::{solve_lp, MatGameError, MixedStrategy, PayoffMatrix};

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum ExactError {
    #[error("node budget {budget} exceeded while expanding the game tree")]
    NodeBudgetExceeded { budget: usize },
    #[error(transparent)]
    MatGame(#[from] MatGameError),
}

/// Exact state values per `(depth, state)`.
#[derive(Debug, Clone, Default)]
pub struct ValueTable<S: Hash + Eq> {
    map: HashMap<(usize, S), f64>,
}

impl<S: Hash + Eq + Clone> ValueTable<S> {
    pub fn get(&self, depth: usize, state: &S) -> Option<f64> {
        self.map.get(&(depth, state.clone())).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, S), &f64)> {
        self.map.iter()
    }
}

/// Equilibrium stage strategies per `(depth, state)`.
#[derive(Debug, Clone, Default)]
pub struct StagePolicy<S: Hash + Eq> {
    map: HashMap<(usize, S), (MixedStrategy, MixedStrategy)>,
}

impl<S: Hash + Eq + Clone + fmt::Debug> StagePolicy<S> {
    pub fn get(&self, depth: usize, state: &S) -> Option<&(MixedStrategy, MixedStrategy)> {
        self.map.get(&(depth, state.clone()))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// One player's strategies as a frozen-policy closure for the
    /// best-response routines. Panics if queried off the covered set, which
    /// violates the best-response precondition.
    pub fn policy_for(&self, player: Player) -> impl Fn(usize, &S) -> MixedStrategy + '_ {
        move |depth, state| {
            let (p1, p2) = self
                .map
                .get(&(depth, state.clone()))
                .unwrap_or_else(|| panic!("stage policy missing state {state:?} at depth {depth}"));
            match player {
                Player::One => p1.clone(),
                Player::Two => p2.clone(),
            }
        }
    }
}

/// Solves the whole reachable tree below `s0` exactly.
///
/// Returns the value table (player 1's value at every reachable
/// `(depth, state)`, zero at terminals and at the horizon) and the
/// equilibrium stage strategies at every nonterminal state.
pub fn backward_induction<G>(
    game: &G,
    s0: &G::State,
    node_budget: usize,
) -> Result<(ValueTable<G::State>, StagePolicy<G::State>), ExactError>
where
    G: Game,
    G::State: Hash + Eq,
{
    let mut values = ValueTable {
        map: HashMap::new(),
    };
    let mut policy = StagePolicy {
        map: HashMap::new(),
    };
    induct(game, s0, 0, node_budget, &mut values, &mut policy)?;
    Ok((values, policy))
}

fn induct<G>(
    game: &G,
    state: &G::State,
    depth: usize,
    node_budget: usize,
    values: &mut ValueTable<G::State>,
    policy: &mut StagePolicy<G::State>,
) -> Result<f64, ExactError>
where
    G: Game,
    G::State: Hash + Eq,
{
    if let Some(v) = values.map.get(&(depth, state.clone())) {
        return Ok(*v);
    }
    if values.map.len() >= node_budget {
        return Err(ExactError::NodeBudgetExceeded {
            budget: node_budget,
        });
    }
    if game.is_terminal(state) || depth >= game.horizon() {
        values.map.insert((depth, state.clone()), 0.0);
        return Ok(0.0);
    }

    let (n, m) = game.action_counts(state);
    let gamma = game.discount();
    let mut entries = Vec::with_capacity(n * m);
    for a1 in 0..n {
        for a2 in 0..m {
            let step = game
                .step(state, JointAction::new(a1, a2))
                .expect("nonterminal state with in-range actions");
            let v_child = if step.terminal {
                // Terminal successors still get a memo entry so the table
                // records every reachable state.
                values.map.entry((depth + 1, step.next_state)).or_insert(0.0);
                0.0
            } else {
                induct(game, &step.next_state, depth + 1, node_budget, values, policy)?
            };
            entries.push(step.reward1 + gamma * v_child);
        }
    }
    let stage = PayoffMatrix::new(n, m, entries)?;
    let solution = solve_lp(&stage)?;
    values.map.insert((depth, state.clone()), solution.value);
    policy.map.insert(
        (depth, state.clone()),
        (solution.row_strategy, solution.col_strategy),
    );
    Ok(solution.value)
}

/// Value the responder achieves against a frozen opponent policy, by
/// memoized depth-limited expectimax. `frozen` maps `(depth, state)` to the
/// opponent's mixed strategy and must cover every state the recursion
/// reaches. Responder ties break toward the lowest action index.
pub fn best_response_value<G, F>(
    game: &G,
    s0: &G::State,
    frozen: &F,
    responder: Player,
    node_budget: usize,
) -> Result<f64, ExactError>
where
    G: Game,
    G::State: Hash + Eq,
    F: Fn(usize, &G::State) -> MixedStrategy,
{
    let mut memo: HashMap<(usize, G::State), f64> = HashMap::new();
    brv_memo(game, s0, 0, frozen, responder, node_budget, &mut memo)
}

fn brv_memo<G, F>(
    game: &G,
    state: &G::State,
    depth: usize,
    frozen: &F,
    responder: Player,
    node_budget: usize,
    memo: &mut HashMap<(usize, G::State), f64>,
) -> Result<f64, ExactError>
where
    G: Game,
    G::State: Hash + Eq,
    F: Fn(usize, &G::State) -> MixedStrategy,
{
    if game.is_terminal(state) || depth >= game.horizon() {
        return Ok(0.0);
    }
    if let Some(v) = memo.get(&(depth, state.clone())) {
        return Ok(*v);
    }
    if memo.len() >= node_budget {
        return Err(ExactError::NodeBudgetExceeded {
            budget: node_budget,
        });
    }

    let v = brv_expand(game, state, depth, frozen, responder, |g, s, d| {
        brv_memo(g, s, d, frozen, responder, node_budget, memo)
    })?;
    memo.insert((depth, state.clone()), v);
    Ok(v)
}

/// One expectimax level: expectation over the frozen player's strategy,
/// maximization over the responder's actions.
fn brv_expand<G, F>(
    game: &G,
    state: &G::State,
    depth: usize,
    frozen: &F,
    responder: Player,
    mut recurse: impl FnMut(&G, &G::State, usize) -> Result<f64, ExactError>,
) -> Result<f64, ExactError>
where
    G: Game,
    F: Fn(usize, &G::State) -> MixedStrategy,
{
    let (n, m) = game.action_counts(state);
    let (responder_count, frozen_count) = match responder {
        Player::One => (n, m),
        Player::Two => (m, n),
    };
    let dist = frozen(depth, state);
    assert_eq!(
        dist.len(),
        frozen_count,
        "frozen policy dimension must match the state's action count"
    );
    let gamma = game.discount();

    let mut best = f64::NEG_INFINITY;
    for ar in 0..responder_count {
        let mut value = 0.0;
        for af in 0..frozen_count {
            let p = dist.prob(af);
            if p == 0.0 {
                continue;
            }
            let joint = match responder {
                Player::One => JointAction::new(ar, af),
                Player::Two => JointAction::new(af, ar),
            };
            let step = game
                .step(state, joint)
                .expect("nonterminal state with in-range actions");
            let r = match responder {
                Player::One => step.reward1,
                Player::Two => -step.reward1,
            };
            let cont = if step.terminal {
                0.0
            } else {
                recurse(game, &step.next_state, depth + 1)?
            };
            value += p * (r + gamma * cont);
        }
        if value > best {
            best = value;
        }
    }
    Ok(best)
}

/// [`best_response_value`] without memoization, for games whose states
/// cannot be hashed. The tree is bounded by `(n·m)^horizon` nodes, counted
/// against `node_budget`.
pub fn best_response_value_tree<G, F>(
    game: &G,
    s0: &G::State,
    frozen: &F,
    responder: Player,
    node_budget: usize,
) -> Result<f64, ExactError>
where
    G: Game,
    F: Fn(usize, &G::State) -> MixedStrategy,
{
    let mut visited = 0usize;
    brv_tree(game, s0, 0, frozen, responder, node_budget, &mut visited)
}

fn brv_tree<G, F>(
    game: &G,
    state: &G::State,
    depth: usize,
    frozen: &F,
    responder: Player,
    node_budget: usize,
    visited: &mut usize,
) -> Result<f64, ExactError>
where
    G: Game,
    F: Fn(usize, &G::State) -> MixedStrategy,
{
    if game.is_terminal(state) || depth >= game.horizon() {
        return Ok(0.0);
    }
    *visited += 1;
    if *visited > node_budget {
        return Err(ExactError::NodeBudgetExceeded {
            budget: node_budget,
        });
    }
    brv_expand(game, state, depth, frozen, responder, |g, s, d| {
        brv_tree(g, s, d, frozen, responder, node_budget, visited)
    })
}

/// Sum of both best-response values: zero exactly at a Markov-perfect
/// equilibrium on the reachable set, positive otherwise.
pub fn joint_exploitability<G, F1, F2>(
    game: &G,
    s0: &G::State,
    policy1: &F1,
    policy2: &F2,
    node_budget: usize,
) -> Result<f64, ExactError>
where
    G: Game,
    G::State: Hash + Eq,
    F1: Fn(usize, &G::State) -> MixedStrategy,
    F2: Fn(usize, &G::State) -> MixedStrategy,
{
    let br1 = best_response_value(game, s0, policy2, Player::One, node_budget)?;
    let br2 = best_response_value(game, s0, policy1, Player::Two, node_budget)?;
    Ok(br1 + br2)
}

/// Configuration for the Monte-Carlo best-response estimate used when the
/// exact expectimax tree is out of budget.
#[derive(Debug, Clone)]
pub struct SampledBrConfig {
    /// Episodes averaged into the estimate.
    pub episodes: usize,
    /// Search simulations per decision.
    pub search_sims: usize,
    /// UCB exploration constant.
    pub exploration: f64,
    pub seed: u64,
}

impl Default for SampledBrConfig {
    fn default() -> Self {
        Self {
            episodes: 64,
            search_sims: 256,
            exploration: 1.4,
            seed: 0,
        }
    }
}

/// Monte-Carlo estimate of the best-response value: the responder plans with
/// a receding-horizon UCT search against the frozen policy (which it treats
/// as part of the environment), and the induced policy's value is averaged
/// over episodes. Any concrete responder policy value is a lower bound on
/// the true best response, so exploitability reported from this estimate is
/// a lower bound as well.
pub fn sampled_best_response_value<G, F>(
    game: &G,
    frozen: &F,
    responder: Player,
    cfg: &SampledBrConfig,
) -> f64
where
    G: Game,
    F: Fn(usize, &G::State) -> MixedStrategy,
{
    let mut total = 0.0;
    for episode in 0..cfg.episodes {
        let mut rng = crate::rng::substream_n(cfg.seed, "sampled-br", episode as u64);
        let mut state = game.initial_state(&mut rng);
        let mut discount = 1.0;
        let mut ret = 0.0;
        let mut t = 0usize;
        while !game.is_terminal(&state) && t < game.horizon() {
            let ar = uct_plan(game, &state, t, frozen, responder, cfg, &mut rng);
            let dist = frozen(t, &state);
            let af = dist.sample(&mut rng);
            let joint = match responder {
                Player::One => JointAction::new(ar, af),
                Player::Two => JointAction::new(af, ar),
            };
            let step = game.step(&state, joint).expect("valid episode step");
            let r = match responder {
                Player::One => step.reward1,
                Player::Two => -step.reward1,
            };
            ret += discount * r;
            discount *= game.discount();
            state = step.next_state;
            t += 1;
        }
        total += ret;
    }
    total / cfg.episodes.max(1) as f64
}

/// Single-agent UCT over the responder's actions; frozen actions are chance
/// moves sampled inside the simulations.
fn uct_plan<G, F>(
    game: &G,
    state: &G::State,
    abs_depth: usize,
    frozen: &F,
    responder: Player,
    cfg: &SampledBrConfig,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> usize
where
    G: Game,
    F: Fn(usize, &G::State) -> MixedStrategy,
{
    struct NodeStats {
        visits: Vec<f64>,
        returns: Vec<f64>,
        total: f64,
    }

    // Keyed by the realized prefix of (responder, frozen) action pairs; the
    // frozen draws make transitions stochastic from the responder's side.
    let mut stats: HashMap<Vec<(usize, usize)>, NodeStats> = HashMap::new();

    let (n, m) = game.action_counts(state);
    let responder_count = match responder {
        Player::One => n,
        Player::Two => m,
    };
    if responder_count == 1 {
        return 0;
    }

    for _ in 0..cfg.search_sims {
        let mut s = state.clone();
        let mut t = abs_depth;
        let mut path: Vec<(Vec<(usize, usize)>, usize, f64, f64)> = Vec::new();
        let mut key: Vec<(usize, usize)> = Vec::new();
        let mut discount = 1.0;

        // Descend until an unexpanded node, collecting rewards on the way.
        loop {
            if game.is_terminal(&s) || t >= game.horizon() {
                break;
            }
            let (sn, sm) = game.action_counts(&s);
            let rc = match responder {
                Player::One => sn,
                Player::Two => sm,
            };
            let entry = stats.entry(key.clone());
            let node = match entry {
                std::collections::hash_map::Entry::Occupied(o) => o.into_mut(),
                std::collections::hash_map::Entry::Vacant(v) => {
                    v.insert(NodeStats {
                        visits: vec![0.0; rc],
                        returns: vec![0.0; rc],
                        total: 0.0,
                    });
                    // Fresh node: rollout from here.
                    break;
                }
            };
            let ar = select_ucb(node, cfg.exploration);
            let dist = frozen(t, &s);
            let af = dist.sample(rng);
            let joint = match responder {
                Player::One => JointAction::new(ar, af),
                Player::Two => JointAction::new(af, ar),
            };
            let step = game.step(&s, joint).expect("valid search step");
            let r = match responder {
                Player::One => step.reward1,
                Player::Two => -step.reward1,
            };
            path.push((key.clone(), ar, r, discount));
            key.push((ar, af));
            discount *= game.discount();
            s = step.next_state;
            t += 1;
        }

        // Random rollout to the horizon.
        let mut rollout = 0.0;
        {
            let mut rd = discount;
            let mut rs = s;
            let mut rt = t;
            while !game.is_terminal(&rs) && rt < game.horizon() {
                let (sn, sm) = game.action_counts(&rs);
                let (rc, fcount) = match responder {
                    Player::One => (sn, sm),
                    Player::Two => (sm, sn),
                };
                let ar = rng.gen_range(0..rc);
                let dist = frozen(rt, &rs);
                assert_eq!(dist.len(), fcount);
                let af = dist.sample(rng);
                let joint = match responder {
                    Player::One => JointAction::new(ar, af),
                    Player::Two => JointAction::new(af, ar),
                };
                let step = game.step(&rs, joint).expect("valid rollout step");
                let r = match responder {
                    Player::One => step.reward1,
                    Player::Two => -step.reward1,
                };
                rollout += rd * r;
                rd *= game.discount();
                rs = step.next_state;
                rt += 1;
            }
        }

        // Back up realized discounted returns (discounted from the root, so
        // comparisons within a node share the same prefix factor).
        for (node_key, ar, r, d) in path.into_iter().rev() {
            let node = stats.get_mut(&node_key).expect("path nodes exist");
            let contribution = r * d + rollout;
            node.visits[ar] += 1.0;
            node.returns[ar] += contribution;
            node.total += 1.0;
            rollout = contribution;
        }
    }

    fn select_ucb(node: &NodeStats, c: f64) -> usize {
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for a in 0..node.visits.len() {
            let score = if node.visits[a] == 0.0 {
                f64::INFINITY
            } else {
                node.returns[a] / node.visits[a]
                    + c * ((node.total.max(1.0)).ln() / node.visits[a]).sqrt()
            };
            if score > best_score {
                best_score = score;
                best = a;
            }
        }
        best
    }

    let root = stats.get(&Vec::new()).expect("root searched");
    let mut best = 0;
    let mut best_visits = -1.0;
    for a in 0..root.visits.len() {
        if root.visits[a] > best_visits {
            best_visits = root.visits[a];
            best = a;
        }
    }
    best
}
