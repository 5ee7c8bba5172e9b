//! Tabular toy games: repeated matrix games and grid pursuit on a torus.
//!
//! These are the validation fixtures: small enough for exact backward
//! induction, with stage equilibria known in closed form or checkable by the
//! grid-search oracle.

use rand_chacha::ChaCha8Rng;

use super::EnvError;
use crate::game::{Game, JointAction, StepResult};
use crate::matgame::PayoffMatrix;

/// Which toy a [`TabularToy`] instance plays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ToyKind {
    /// Repeated matching pennies; stage value 0, uniform equilibrium.
    MatchingPennies,
    /// Repeated rock-paper-scissors; stage value 0, uniform equilibrium.
    Rps,
    /// Repeated `[[2, -1], [-1, 1]]`; stage value 0.2, equilibrium
    /// (0.4, 0.6) for both players.
    Asym22,
    /// Simultaneous pursuit on a `k x k` torus; the evader is player 1 and
    /// receives -1 on capture.
    GridPursuit { k: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ToyState {
    Step(usize),
    Grid {
        t: usize,
        evader: (usize, usize),
        pursuer: (usize, usize),
    },
}

#[derive(Debug, Clone)]
pub struct TabularToy {
    kind: ToyKind,
    horizon: usize,
    gamma: f64,
}

/// Parses names of the form `matching_pennies(H)`, `rps(H)`, `asym22(H)`,
/// `grid_pursuit(k,H)`. The discount defaults to 1 and can be overridden
/// with [`TabularToy::with_gamma`].
pub fn make_tabular_toy(name: &str) -> Result<TabularToy, EnvError> {
    let name = name.trim();
    let (head, args) = match name.find('(') {
        Some(i) if name.ends_with(')') => (&name[..i], &name[i + 1..name.len() - 1]),
        _ => (name, ""),
    };
    let parse =
        |s: &str| -> Result<usize, EnvError> {
            s.trim().parse::<usize>().map_err(|e| {
                EnvError::BadToyArgs(name.to_string(), e.to_string())
            })
        };
    let kind = match head {
        "matching_pennies" => ToyKind::MatchingPennies,
        "rps" => ToyKind::Rps,
        "asym22" => ToyKind::Asym22,
        "grid_pursuit" => {
            let mut parts = args.split(',');
            let k = parse(parts.next().unwrap_or(""))?;
            let h = parse(parts.next().unwrap_or(""))?;
            if k < 2 {
                return Err(EnvError::BadToyArgs(
                    name.to_string(),
                    "grid size must be at least 2".into(),
                ));
            }
            return Ok(TabularToy {
                kind: ToyKind::GridPursuit { k },
                horizon: h.max(1),
                gamma: 1.0,
            });
        }
        _ => return Err(EnvError::UnknownToy(name.to_string())),
    };
    let horizon = if args.is_empty() { 1 } else { parse(args)? };
    Ok(TabularToy {
        kind,
        horizon: horizon.max(1),
        gamma: 1.0,
    })
}

impl TabularToy {
    pub fn new(kind: ToyKind, horizon: usize) -> Self {
        Self {
            kind,
            horizon: horizon.max(1),
            gamma: 1.0,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn kind(&self) -> &ToyKind {
        &self.kind
    }

    /// The per-step payoff matrix for repeated matrix games.
    pub fn stage_matrix(&self) -> Option<PayoffMatrix> {
        let rows = match self.kind {
            ToyKind::MatchingPennies => vec![vec![1.0, -1.0], vec![-1.0, 1.0]],
            ToyKind::Rps => vec![
                vec![0.0, -1.0, 1.0],
                vec![1.0, 0.0, -1.0],
                vec![-1.0, 1.0, 0.0],
            ],
            ToyKind::Asym22 => vec![vec![2.0, -1.0], vec![-1.0, 1.0]],
            ToyKind::GridPursuit { .. } => return None,
        };
        Some(PayoffMatrix::from_rows(rows).expect("static stage matrices are valid"))
    }

    fn grid_k(&self) -> usize {
        match self.kind {
            ToyKind::GridPursuit { k } => k,
            _ => unreachable!("grid accessor on a repeated game"),
        }
    }

    fn cell_index(&self, cell: (usize, usize)) -> usize {
        cell.0 * self.grid_k() + cell.1
    }
}

/// Torus moves: stay, up, down, left, right.
const GRID_MOVES: [(isize, isize); 5] = [(0, 0), (0, 1), (0, -1), (-1, 0), (1, 0)];

fn torus_move(cell: (usize, usize), mv: usize, k: usize) -> (usize, usize) {
    let (dx, dy) = GRID_MOVES[mv];
    let wrap = |v: usize, d: isize| -> usize {
        (v as isize + d).rem_euclid(k as isize) as usize
    };
    (wrap(cell.0, dx), wrap(cell.1, dy))
}

impl Game for TabularToy {
    type State = ToyState;

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn discount(&self) -> f64 {
        self.gamma
    }

    fn initial_state(&self, _rng: &mut ChaCha8Rng) -> ToyState {
        match self.kind {
            ToyKind::GridPursuit { k } => ToyState::Grid {
                t: 0,
                evader: (0, 0),
                pursuer: (k / 2, k / 2),
            },
            _ => ToyState::Step(0),
        }
    }

    fn is_terminal(&self, state: &ToyState) -> bool {
        match state {
            ToyState::Step(t) => *t >= self.horizon,
            ToyState::Grid { t, evader, pursuer } => *t >= self.horizon || evader == pursuer,
        }
    }

    fn action_counts(&self, _state: &ToyState) -> (usize, usize) {
        self.action_space()
    }

    fn action_space(&self) -> (usize, usize) {
        match self.kind {
            ToyKind::MatchingPennies | ToyKind::Asym22 => (2, 2),
            ToyKind::Rps => (3, 3),
            ToyKind::GridPursuit { .. } => (5, 5),
        }
    }

    fn transition(&self, state: &ToyState, action: JointAction) -> StepResult<ToyState> {
        match state {
            ToyState::Step(t) => {
                let stage = self.stage_matrix().expect("repeated game has a stage matrix");
                let reward1 = stage.get(action.a1, action.a2);
                let next = ToyState::Step(t + 1);
                let terminal = t + 1 >= self.horizon;
                StepResult {
                    next_state: next,
                    reward1,
                    terminal,
                }
            }
            ToyState::Grid { t, evader, pursuer } => {
                let k = self.grid_k();
                let ev = torus_move(*evader, action.a1, k);
                let pu = torus_move(*pursuer, action.a2, k);
                let captured = ev == pu;
                let next = ToyState::Grid {
                    t: t + 1,
                    evader: ev,
                    pursuer: pu,
                };
                StepResult {
                    next_state: next,
                    reward1: if captured { -1.0 } else { 0.0 },
                    terminal: captured || t + 1 >= self.horizon,
                }
            }
        }
    }

    fn encode_state(&self, state: &ToyState) -> Vec<f64> {
        let mut out = vec![0.0; self.encoding_len()];
        match state {
            ToyState::Step(t) => {
                out[(*t).min(self.horizon)] = 1.0;
            }
            ToyState::Grid { t, evader, pursuer } => {
                let k2 = self.grid_k() * self.grid_k();
                out[self.cell_index(*evader)] = 1.0;
                out[k2 + self.cell_index(*pursuer)] = 1.0;
                out[2 * k2 + (*t).min(self.horizon)] = 1.0;
            }
        }
        out
    }

    fn encoding_len(&self) -> usize {
        match self.kind {
            ToyKind::GridPursuit { k } => 2 * k * k + self.horizon + 1,
            _ => self.horizon + 1,
        }
    }

    fn max_abs_reward(&self) -> f64 {
        match self.kind {
            ToyKind::Asym22 => 2.0,
            _ => 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn parses_names() {
        assert!(matches!(
            make_tabular_toy("matching_pennies(3)").unwrap().kind(),
            ToyKind::MatchingPennies
        ));
        assert!(matches!(
            make_tabular_toy("grid_pursuit(4,6)").unwrap().kind(),
            ToyKind::GridPursuit { k: 4 }
        ));
        assert!(matches!(
            make_tabular_toy("chess(2)"),
            Err(EnvError::UnknownToy(_))
        ));
        assert!(make_tabular_toy("grid_pursuit(x,2)").is_err());
    }

    #[test]
    fn repeated_game_runs_to_horizon() {
        let g = make_tabular_toy("rps(2)").unwrap();
        let mut rng = substream(0, "t");
        let s0 = g.initial_state(&mut rng);
        let r1 = g.step(&s0, JointAction::new(0, 1)).unwrap();
        assert_eq!(r1.reward1, -1.0);
        assert!(!r1.terminal);
        let r2 = g.step(&r1.next_state, JointAction::new(2, 1)).unwrap();
        assert_eq!(r2.reward1, 1.0);
        assert!(r2.terminal);
    }

    #[test]
    fn grid_pursuit_capture_and_wrap() {
        let g = make_tabular_toy("grid_pursuit(2,5)").unwrap();
        // Evader at (0,0), pursuer at (1,1) on a 2x2 torus: if the evader
        // moves right to (1,0) and the pursuer moves down to (1,0) they meet.
        let s = ToyState::Grid {
            t: 0,
            evader: (0, 0),
            pursuer: (1, 1),
        };
        let r = g.step(&s, JointAction::new(4, 2)).unwrap();
        assert_eq!(r.reward1, -1.0);
        assert!(r.terminal);
        // Torus wrap: moving left from column 0 lands on column k-1.
        let next = torus_move((0, 0), 3, 4);
        assert_eq!(next, (3, 0));
    }

    #[test]
    fn one_hot_encoding_is_deterministic_and_fixed_length() {
        let g = make_tabular_toy("asym22(3)").unwrap();
        let s = ToyState::Step(1);
        let e1 = g.encode_state(&s);
        let e2 = g.encode_state(&s);
        assert_eq!(e1, e2);
        assert_eq!(e1.len(), g.encoding_len());
        assert_eq!(e1.iter().sum::<f64>(), 1.0);
        assert_eq!(e1[1], 1.0);
    }
}
