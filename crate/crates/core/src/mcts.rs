//! Simultaneous-move Monte Carlo Tree Search.
//!
//! Every tree node is a matrix game: the estimated stage payoffs are
//! `Ā_jk = R_jk + γ·V_jk`, where `R_jk` is the immediate reward of the joint
//! action and `V_jk` the current value estimate of the successor. Action
//! selection solves an optimism-augmented copy of that game per player,
//!
//! ```text
//!   Ã(1) =  Ā + c·P·√N(s) / (1 + N(s,a¹,a²))
//!   Ã(2) = -Ā + c·P·√N(s) / (1 + N(s,a¹,a²))
//! ```
//!
//! with the joint prior `P` the product of the two policy heads. Each player
//! maximizes its own augmented view (a shared matrix would make the bonus
//! pessimistic for the minimizer), a few regret-matching iterations produce
//! average strategies, and both actions are sampled independently. Backups
//! re-solve the unaugmented stage game and store its value, so values
//! propagate by minimax rather than by averaging.

use rand_chacha::ChaCha8Rng;

use crate::game::{Game, JointAction};
use crate::matgame::{MixedStrategy, PayoffMatrix, RegretState};

/// Priors and value estimate for a state, as produced by the network (or a
/// baseline stand-in).
#[derive(Debug, Clone)]
pub struct OracleEval {
    pub p1: MixedStrategy,
    pub p2: MixedStrategy,
    /// Value to player 1.
    pub value: f64,
}

/// Source of priors and leaf value estimates that guides the search.
pub trait Oracle<G: Game>: Sync {
    fn evaluate(&self, game: &G, state: &G::State) -> OracleEval;
}

/// Baseline oracle: uniform priors and zero values. With enough simulations
/// the search converges toward the exact solver from this prior alone.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformZeroOracle;

impl<G: Game> Oracle<G> for UniformZeroOracle {
    fn evaluate(&self, game: &G, state: &G::State) -> OracleEval {
        let (n, m) = game.action_counts(state);
        OracleEval {
            p1: MixedStrategy::uniform(n.max(1)),
            p2: MixedStrategy::uniform(m.max(1)),
            value: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Simulations per search.
    pub n_sim: usize,
    /// Exploration constant for the optimism bonus.
    pub c_puct: f64,
    /// Regret-matching iterations for in-tree stage solves.
    pub rm_iters: usize,
    /// Regret-matching iterations for the final root solve.
    pub root_rm_iters: usize,
    pub gamma: f64,
    /// Frontier depth measured from the search root.
    pub horizon: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            n_sim: 128,
            c_puct: 2.0,
            rm_iters: 32,
            root_rm_iters: 512,
            gamma: 0.99,
            horizon: 20,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.n_sim < 1 {
            return Err("search.n_sim must be at least 1".into());
        }
        if self.c_puct < 0.0 {
            return Err("search.c_puct must be nonnegative".into());
        }
        if self.rm_iters < 1 || self.root_rm_iters < 1 {
            return Err("search.rm_iters and search.root_rm_iters must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(format!("search.gamma must lie in [0, 1], got {}", self.gamma));
        }
        if self.horizon < 1 {
            return Err("search.horizon must be at least 1".into());
        }
        Ok(())
    }
}

/// Root strategies and value estimate returned by a search.
#[derive(Debug, Clone)]
pub struct SearchResult {
    pub pi1: MixedStrategy,
    pub pi2: MixedStrategy,
    pub v_root: f64,
}

/// Per-joint-action statistics of an expanded node.
#[derive(Debug, Clone)]
pub struct Edge<S> {
    pub reward: f64,
    /// Current value estimate of the successor (network estimate until the
    /// edge is first traversed, then the child's backed-up value).
    pub value: f64,
    pub visits: u64,
    pub child_state: S,
    pub child_terminal: bool,
    child_node: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Node<S> {
    pub state: S,
    pub depth: usize,
    pub terminal: bool,
    pub visits: u64,
    /// Cached stage-game value from the latest solve.
    pub value: f64,
    rows: usize,
    cols: usize,
    pub p1: Option<MixedStrategy>,
    pub p2: Option<MixedStrategy>,
    /// Row-major `rows x cols` edge table; empty until expansion.
    pub edges: Vec<Edge<S>>,
}

impl<S> Node<S> {
    pub fn expanded(&self) -> bool {
        !self.edges.is_empty()
    }

    pub fn action_counts(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn edge(&self, a1: usize, a2: usize) -> &Edge<S> {
        &self.edges[a1 * self.cols + a2]
    }

    /// Estimated stage payoffs `Ā = R + γ·V`.
    pub fn stage_payoffs(&self, gamma: f64) -> PayoffMatrix {
        let entries = self
            .edges
            .iter()
            .map(|e| e.reward + gamma * e.value)
            .collect();
        PayoffMatrix::new(self.rows, self.cols, entries)
            .expect("expanded node has a nonempty finite edge table")
    }
}

/// A single search owns its tree exclusively; run one per root.
pub struct Search<'a, G: Game, O: Oracle<G>> {
    game: &'a G,
    oracle: &'a O,
    cfg: SearchConfig,
    nodes: Vec<Node<G::State>>,
}

const ROOT: usize = 0;

impl<'a, G: Game, O: Oracle<G>> Search<'a, G, O> {
    /// Builds a search tree rooted at `state`. The root must be nonterminal.
    pub fn new(game: &'a G, oracle: &'a O, cfg: SearchConfig, state: G::State) -> Self {
        assert!(
            !game.is_terminal(&state),
            "search root must be nonterminal"
        );
        let root = Self::fresh_node(game, state, 0);
        Self {
            game,
            oracle,
            cfg,
            nodes: vec![root],
        }
    }

    fn fresh_node(game: &G, state: G::State, depth: usize) -> Node<G::State> {
        let terminal = game.is_terminal(&state);
        let (rows, cols) = if terminal { (0, 0) } else { game.action_counts(&state) };
        Node {
            state,
            depth,
            terminal,
            visits: 0,
            value: 0.0,
            rows,
            cols,
            p1: None,
            p2: None,
            edges: Vec::new(),
        }
    }

    pub fn nodes(&self) -> &[Node<G::State>] {
        &self.nodes
    }

    pub fn root(&self) -> &Node<G::State> {
        &self.nodes[ROOT]
    }

    pub fn config(&self) -> &SearchConfig {
        &self.cfg
    }

    /// Runs the configured number of simulations and extracts the root
    /// policies from the final unaugmented stage game.
    pub fn run(&mut self, rng: &mut ChaCha8Rng) -> SearchResult {
        for _ in 0..self.cfg.n_sim {
            self.simulate(ROOT, rng);
        }
        self.extract_root_policies()
    }

    /// One simulation pass. Terminal nodes are worth zero (all value flows
    /// through rewards); frontier nodes at the horizon return the oracle's
    /// value estimate; unexpanded leaves are expanded and solved; internal
    /// nodes select a joint action, recurse, and back the child value up.
    pub fn simulate(&mut self, node_id: usize, rng: &mut ChaCha8Rng) -> f64 {
        if self.nodes[node_id].terminal {
            return 0.0;
        }
        if self.nodes[node_id].depth >= self.cfg.horizon {
            return self.oracle.evaluate(self.game, &self.nodes[node_id].state).value;
        }
        if !self.nodes[node_id].expanded() {
            self.expand_node(node_id);
            let solved = self.solve_local(node_id, self.cfg.rm_iters);
            self.nodes[node_id].value = solved.v_root;
            return solved.v_root;
        }
        let action = self.select_joint_action(node_id, rng);
        let child_id = self.child_node(node_id, action);
        let v_child = self.simulate(child_id, rng);
        self.backup(node_id, action, v_child)
    }

    /// Fills the edge table: rewards and successor states from the
    /// generative model, successor values from the oracle (zero for
    /// terminal successors), priors from the oracle at this state.
    pub fn expand_node(&mut self, node_id: usize) {
        debug_assert!(!self.nodes[node_id].expanded());
        let eval = self.oracle.evaluate(self.game, &self.nodes[node_id].state);
        let (rows, cols) = self.nodes[node_id].action_counts();
        let mut edges = Vec::with_capacity(rows * cols);
        for a1 in 0..rows {
            for a2 in 0..cols {
                let step = self
                    .game
                    .step(&self.nodes[node_id].state, JointAction::new(a1, a2))
                    .expect("expansion steps a nonterminal state with in-range actions");
                let value = if step.terminal {
                    0.0
                } else {
                    self.oracle.evaluate(self.game, &step.next_state).value
                };
                edges.push(Edge {
                    reward: step.reward1,
                    value,
                    visits: 0,
                    child_state: step.next_state,
                    child_terminal: step.terminal,
                    child_node: None,
                });
            }
        }
        let node = &mut self.nodes[node_id];
        node.edges = edges;
        node.p1 = Some(eval.p1);
        node.p2 = Some(eval.p2);
    }

    /// Joint prior `P(s, a¹, a²) = p1(a¹) · p2(a²)`.
    pub fn joint_prior(&self, node_id: usize) -> PayoffMatrix {
        let node = &self.nodes[node_id];
        let p1 = node.p1.as_ref().expect("expanded node has priors");
        let p2 = node.p2.as_ref().expect("expanded node has priors");
        let mut entries = Vec::with_capacity(node.rows * node.cols);
        for i in 0..node.rows {
            for j in 0..node.cols {
                entries.push(p1.prob(i) * p2.prob(j));
            }
        }
        PayoffMatrix::new(node.rows, node.cols, entries).expect("priors are positive and finite")
    }

    /// Solves each player's optimism-augmented stage game with regret
    /// matching and samples the two actions independently from the average
    /// strategies.
    pub fn select_joint_action(&mut self, node_id: usize, rng: &mut ChaCha8Rng) -> JointAction {
        let (x, y) = self.selection_strategies(node_id);
        JointAction::new(x.sample(rng), y.sample(rng))
    }

    /// The average strategies the selection step samples from; exposed for
    /// tests of the optimism augmentation.
    pub fn selection_strategies(&self, node_id: usize) -> (MixedStrategy, MixedStrategy) {
        let node = &self.nodes[node_id];
        debug_assert!(node.expanded());
        let abar = node.stage_payoffs(self.cfg.gamma);
        let prior = self.joint_prior(node_id);
        let sqrt_n = (node.visits as f64).sqrt();
        let (rows, cols) = node.action_counts();

        let mut aug1 = Vec::with_capacity(rows * cols);
        let mut aug2 = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let bonus = self.cfg.c_puct * prior.get(i, j) * sqrt_n
                    / (1.0 + node.edge(i, j).visits as f64);
                aug1.push(abar.get(i, j) + bonus);
                aug2.push(-abar.get(i, j) + bonus);
            }
        }
        let aug1 = PayoffMatrix::new(rows, cols, aug1).expect("finite augmented payoffs");
        let aug2 = PayoffMatrix::new(rows, cols, aug2).expect("finite augmented payoffs");

        let mut rm = RegretState::new(rows, cols);
        for _ in 0..self.cfg.rm_iters {
            rm.step_bimatrix(&aug1, &aug2);
        }
        rm.average_strategies()
    }

    fn child_node(&mut self, node_id: usize, action: JointAction) -> usize {
        let cols = self.nodes[node_id].cols;
        let edge_idx = action.a1 * cols + action.a2;
        if let Some(id) = self.nodes[node_id].edges[edge_idx].child_node {
            return id;
        }
        let state = self.nodes[node_id].edges[edge_idx].child_state.clone();
        let depth = self.nodes[node_id].depth + 1;
        let child = Self::fresh_node(self.game, state, depth);
        let id = self.nodes.len();
        self.nodes.push(child);
        self.nodes[node_id].edges[edge_idx].child_node = Some(id);
        id
    }

    /// Updates visit counts and the traversed edge's value, then re-solves
    /// the unaugmented stage game and stores its value as the node's.
    pub fn backup(&mut self, node_id: usize, action: JointAction, v_child: f64) -> f64 {
        {
            let node = &mut self.nodes[node_id];
            let idx = action.a1 * node.cols + action.a2;
            node.edges[idx].visits += 1;
            node.visits += 1;
            node.edges[idx].value = v_child;
        }
        let solved = self.solve_local(node_id, self.cfg.rm_iters);
        self.nodes[node_id].value = solved.v_root;
        solved.v_root
    }

    /// Solves a node's current unaugmented stage game by regret matching.
    fn solve_local(&self, node_id: usize, iters: usize) -> SearchResult {
        let abar = self.nodes[node_id].stage_payoffs(self.cfg.gamma);
        let solution = crate::matgame::regret_matching_solve(&abar, iters);
        SearchResult {
            pi1: solution.row_strategy,
            pi2: solution.col_strategy,
            v_root: solution.value,
        }
    }

    /// Final root solve at the elevated iteration budget.
    pub fn extract_root_policies(&self) -> SearchResult {
        debug_assert!(self.nodes[ROOT].expanded(), "run at least one simulation");
        self.solve_local(ROOT, self.cfg.root_rm_iters)
    }
}

/// Convenience wrapper: build a tree, run the configured simulations, return
/// the root result. Deterministic given the stream.
pub fn run_search<G: Game, O: Oracle<G>>(
    game: &G,
    state: &G::State,
    oracle: &O,
    cfg: &SearchConfig,
    rng: &mut ChaCha8Rng,
) -> SearchResult {
    let mut search = Search::new(game, oracle, cfg.clone(), state.clone());
    search.run(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::random_tree::RandomTreeGame;
    use crate::envs::tabular::{make_tabular_toy, ToyState};
    use crate::exact::{backward_induction, DEFAULT_NODE_BUDGET};
    use crate::game::Game;
    use crate::rng::substream;

    fn cfg(n_sim: usize) -> SearchConfig {
        SearchConfig {
            n_sim,
            gamma: 1.0,
            horizon: 8,
            ..SearchConfig::default()
        }
    }

    fn root<G: Game>(game: &G) -> G::State {
        game.initial_state(&mut substream(0, "root"))
    }

    #[test]
    fn depth_one_game_recovers_the_stage_value() {
        let g = make_tabular_toy("asym22(1)").unwrap();
        let s0 = root(&g);
        let mut rng = substream(1, "search");
        let r = run_search(&g, &s0, &UniformZeroOracle, &cfg(2000), &mut rng);
        assert!((r.v_root - 0.2).abs() < 0.05, "v_root {}", r.v_root);
        assert!((r.pi1.prob(0) - 0.4).abs() < 0.1);
    }

    #[test]
    fn single_simulation_returns_valid_strategies() {
        let g = make_tabular_toy("rps(2)").unwrap();
        let s0 = root(&g);
        let mut rng = substream(2, "search");
        let r = run_search(&g, &s0, &UniformZeroOracle, &cfg(1), &mut rng);
        assert!((r.pi1.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((r.pi2.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(r.v_root.is_finite());
    }

    #[test]
    fn symmetric_game_value_is_near_zero() {
        let g = make_tabular_toy("matching_pennies(2)").unwrap();
        let s0 = root(&g);
        let mut rng = substream(3, "search");
        let r = run_search(&g, &s0, &UniformZeroOracle, &cfg(2000), &mut rng);
        assert!(r.v_root.abs() < 0.05, "v_root {}", r.v_root);
    }

    #[test]
    fn expansion_builds_product_priors_and_terminal_children() {
        let g = make_tabular_toy("rps(1)").unwrap();
        let s0 = root(&g);
        let mut search = Search::new(&g, &UniformZeroOracle, cfg(1), s0);
        search.expand_node(0);
        let prior = search.joint_prior(0);
        let mut total = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                assert!((prior.get(i, j) - 1.0 / 9.0).abs() < 1e-12);
                total += prior.get(i, j);
            }
        }
        assert!((total - 1.0).abs() < 1e-9);
        // One-shot game: every successor is terminal and worth zero.
        for e in &search.root().edges {
            assert!(e.child_terminal);
            assert_eq!(e.value, 0.0);
        }
    }

    #[test]
    fn fresh_node_selection_is_uniform() {
        // Zero visits, zero payoffs, uniform priors: the bonus is constant,
        // the augmented games are constant matrices, selection stays uniform.
        let g = make_tabular_toy("rps(1)").unwrap();
        let s0 = root(&g);
        let mut search = Search::new(&g, &UniformZeroOracle, cfg(1), s0);
        search.expand_node(0);
        let (x, y) = search.selection_strategies(0);
        for p in x.probs().iter().chain(y.probs()) {
            assert!((p - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn visited_joint_action_bonus_shrinks() {
        // Zero payoffs isolate the bonus term: after one visit to (0,0) its
        // bonus drops by half while the others keep the full numerator, so
        // neither player's mass on action 0 may grow.
        let mut g = RandomTreeGame::new(2, 2, 2, 3);
        g.reward_scale = 0.0;
        let s0 = root(&g);
        let mut search = Search::new(&g, &UniformZeroOracle, cfg(1), s0);
        search.expand_node(0);
        let (x0, y0) = search.selection_strategies(0);
        assert!((x0.prob(0) - 0.5).abs() < 1e-9);
        search.backup(0, JointAction::new(0, 0), 0.0);
        let (x1, y1) = search.selection_strategies(0);
        assert!(x1.prob(0) <= x0.prob(0) + 1e-9);
        assert!(y1.prob(0) <= y0.prob(0) + 1e-9);
    }

    #[test]
    fn backup_on_single_action_chain_applies_discounted_value() {
        let g = make_tabular_toy("matching_pennies(1)").unwrap();
        let s0 = root(&g);
        let mut search = Search::new(
            &g,
            &UniformZeroOracle,
            SearchConfig {
                gamma: 0.5,
                ..cfg(1)
            },
            s0,
        );
        search.expand_node(0);
        // Overwrite the edge table to a 1x1 chain: R = 1, child value 2.
        search.nodes[0].rows = 1;
        search.nodes[0].cols = 1;
        search.nodes[0].edges.truncate(1);
        search.nodes[0].edges[0].reward = 1.0;
        search.nodes[0].p1 = Some(MixedStrategy::uniform(1));
        search.nodes[0].p2 = Some(MixedStrategy::uniform(1));
        let v = search.backup(0, JointAction::new(0, 0), 2.0);
        assert!((v - 2.0).abs() < 1e-12, "1 + 0.5*2 = 2, got {v}");
    }

    #[test]
    fn visit_counts_are_conserved_at_every_node() {
        let g = make_tabular_toy("rps(3)").unwrap();
        let s0 = root(&g);
        let mut search = Search::new(&g, &UniformZeroOracle, cfg(300), s0);
        let mut rng = substream(4, "search");
        search.run(&mut rng);
        for node in search.nodes() {
            if node.expanded() {
                let edge_total: u64 = node.edges.iter().map(|e| e.visits).sum();
                assert_eq!(node.visits, edge_total);
            }
        }
    }

    #[test]
    fn same_seed_gives_identical_results() {
        let g = make_tabular_toy("rps(2)").unwrap();
        let s0 = root(&g);
        let r1 = run_search(&g, &s0, &UniformZeroOracle, &cfg(200), &mut substream(5, "s"));
        let r2 = run_search(&g, &s0, &UniformZeroOracle, &cfg(200), &mut substream(5, "s"));
        assert_eq!(r1.pi1.probs(), r2.pi1.probs());
        assert_eq!(r1.pi2.probs(), r2.pi2.probs());
        assert_eq!(r1.v_root, r2.v_root);
    }

    #[test]
    fn reward_shift_leaves_selection_strategies_unchanged() {
        let g = make_tabular_toy("asym22(1)").unwrap();
        let s0 = root(&g);
        let mut search = Search::new(&g, &UniformZeroOracle, cfg(1), s0.clone());
        search.expand_node(0);
        search.backup(0, JointAction::new(0, 1), 0.3);
        let (x0, y0) = search.selection_strategies(0);
        for e in search.nodes[0].edges.iter_mut() {
            e.reward += 2.5;
        }
        let (x1, y1) = search.selection_strategies(0);
        for (a, b) in x0.probs().iter().zip(x1.probs()) {
            assert!((a - b).abs() < 1e-9);
        }
        for (a, b) in y0.probs().iter().zip(y1.probs()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn converges_to_backward_induction_on_random_trees() {
        let mut ok = 0;
        for seed in 0..5u64 {
            let g = RandomTreeGame::new(2, 2, 2, 1000 + seed);
            let s0 = root(&g);
            let (values, _) = backward_induction(&g, &s0, DEFAULT_NODE_BUDGET).unwrap();
            let exact = values.get(0, &s0).unwrap();
            let mut rng = substream(seed, "conv");
            let r = run_search(&g, &s0, &UniformZeroOracle, &cfg(5000), &mut rng);
            if (r.v_root - exact).abs() <= 0.05 {
                ok += 1;
            }
        }
        assert!(ok >= 4, "only {ok}/5 runs matched the exact values");
    }

    #[test]
    fn horizon_cutoff_uses_oracle_value() {
        struct ConstOracle(f64);
        impl<G: Game> Oracle<G> for ConstOracle {
            fn evaluate(&self, game: &G, state: &G::State) -> OracleEval {
                let (n, m) = game.action_counts(state);
                OracleEval {
                    p1: MixedStrategy::uniform(n.max(1)),
                    p2: MixedStrategy::uniform(m.max(1)),
                    value: self.0,
                }
            }
        }
        // With the frontier at depth 1, every simulation below the root stops
        // immediately and returns the constant frontier estimate, so the root
        // stage game converges to pennies + 0.7 and is worth 0.7.
        let g = make_tabular_toy("matching_pennies(4)").unwrap();
        let s0 = root(&g);
        let oracle = ConstOracle(0.7);
        let mut search = Search::new(
            &g,
            &oracle,
            SearchConfig {
                n_sim: 64,
                gamma: 1.0,
                horizon: 1,
                ..SearchConfig::default()
            },
            s0,
        );
        let mut rng = substream(6, "frontier");
        let r = search.run(&mut rng);
        assert!((r.v_root - 0.7).abs() < 0.05, "v_root {}", r.v_root);
    }

    #[test]
    #[should_panic(expected = "nonterminal")]
    fn terminal_root_is_rejected() {
        let g = make_tabular_toy("matching_pennies(1)").unwrap();
        let mut search_rng = substream(7, "x");
        let s0 = g.initial_state(&mut search_rng);
        let step = g.step(&s0, JointAction::new(0, 0)).unwrap();
        let _ = Search::new(&g, &UniformZeroOracle, cfg(1), step.next_state);
    }

    #[test]
    fn root_extraction_solves_the_root_game() {
        let g = make_tabular_toy("matching_pennies(1)").unwrap();
        let s0 = ToyState::Step(0);
        let mut search = Search::new(&g, &UniformZeroOracle, cfg(500), s0);
        let mut rng = substream(8, "extract");
        let r = search.run(&mut rng);
        assert!((r.pi1.prob(0) - 0.5).abs() < 0.02);
        assert!((r.pi2.prob(0) - 0.5).abs() < 0.02);
    }
}
