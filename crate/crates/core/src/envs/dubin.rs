//! Pursuit-evasion tag with Dubin vehicle dynamics.
//!
//! Both agents move at constant speed with a bounded turn rate
//! (`ẋ = V cosθ, ẏ = V sinθ, θ̇ = u`). The attacker (player 1) tries to
//! reach a circular goal region of radius 1 at the origin; the defender
//! tries to come within capture radius first. Each step both agents pick a
//! turn rate from `{-u_max, 0, +u_max}` and the pose advances along the
//! exact constant-turn-rate arc, so there is no integration error.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::game::{Game, JointAction, StepResult};

#[derive(Debug, Clone)]
pub struct DubinConfig {
    pub v_attacker: f64,
    pub v_defender: f64,
    pub u_max: f64,
    pub dt: f64,
    pub goal_radius: f64,
    pub capture_radius: f64,
    pub horizon: usize,
    pub gamma: f64,
    /// Position scale used by the state encoding.
    pub arena_scale: f64,
    /// Attacker spawn annulus (min, max radius) around the goal.
    pub attacker_spawn: (f64, f64),
    /// Defender spawn annulus.
    pub defender_spawn: (f64, f64),
}

impl Default for DubinConfig {
    fn default() -> Self {
        Self {
            v_attacker: 1.0,
            v_defender: 1.1,
            u_max: 1.0,
            dt: 0.3,
            goal_radius: 1.0,
            capture_radius: 0.5,
            horizon: 20,
            gamma: 0.99,
            arena_scale: 6.0,
            attacker_spawn: (3.0, 6.0),
            defender_spawn: (1.5, 3.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DubinState {
    pub attacker: Pose,
    pub defender: Pose,
    pub step: usize,
}

#[derive(Debug, Clone)]
pub struct DubinTag {
    cfg: DubinConfig,
}

impl DubinTag {
    pub fn new(cfg: DubinConfig) -> Self {
        Self { cfg }
    }

    pub fn config(&self) -> &DubinConfig {
        &self.cfg
    }

    fn captured(&self, s: &DubinState) -> bool {
        let dx = s.attacker.x - s.defender.x;
        let dy = s.attacker.y - s.defender.y;
        (dx * dx + dy * dy).sqrt() <= self.cfg.capture_radius
    }

    fn in_goal(&self, s: &DubinState) -> bool {
        (s.attacker.x * s.attacker.x + s.attacker.y * s.attacker.y).sqrt()
            <= self.cfg.goal_radius
    }

    fn turn_rate(&self, action: usize) -> f64 {
        match action {
            0 => -self.cfg.u_max,
            1 => 0.0,
            _ => self.cfg.u_max,
        }
    }
}

fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let wrapped = (theta + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI;
    // rem_euclid can return exactly two_pi - epsilon carry; keep [-pi, pi).
    if wrapped >= std::f64::consts::PI {
        wrapped - two_pi
    } else {
        wrapped
    }
}

/// Closed-form constant-turn-rate advance of a Dubin pose.
pub fn dubin_advance(pose: &Pose, speed: f64, turn_rate: f64, dt: f64) -> Pose {
    if turn_rate.abs() < 1e-12 {
        return Pose {
            x: pose.x + speed * dt * pose.theta.cos(),
            y: pose.y + speed * dt * pose.theta.sin(),
            theta: pose.theta,
        };
    }
    let radius = speed / turn_rate;
    let theta_next = pose.theta + turn_rate * dt;
    Pose {
        x: pose.x + radius * (theta_next.sin() - pose.theta.sin()),
        y: pose.y - radius * (theta_next.cos() - pose.theta.cos()),
        theta: wrap_angle(theta_next),
    }
}

impl Game for DubinTag {
    type State = DubinState;

    fn horizon(&self) -> usize {
        self.cfg.horizon
    }

    fn discount(&self) -> f64 {
        self.cfg.gamma
    }

    fn initial_state(&self, rng: &mut ChaCha8Rng) -> DubinState {
        let two_pi = 2.0 * std::f64::consts::PI;
        let spawn = |rng: &mut ChaCha8Rng, radii: (f64, f64)| -> Pose {
            let r = rng.gen_range(radii.0..radii.1);
            let phi = rng.gen_range(0.0..two_pi);
            Pose {
                x: r * phi.cos(),
                y: r * phi.sin(),
                theta: rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
            }
        };
        for _ in 0..128 {
            let s = DubinState {
                attacker: spawn(rng, self.cfg.attacker_spawn),
                defender: spawn(rng, self.cfg.defender_spawn),
                step: 0,
            };
            if !self.is_terminal(&s) {
                return s;
            }
        }
        // Spawn annuli that always overlap the goal or each other are a
        // config error; fall back to a fixed legal layout.
        DubinState {
            attacker: Pose {
                x: self.cfg.attacker_spawn.1,
                y: 0.0,
                theta: std::f64::consts::PI,
            },
            defender: Pose {
                x: 0.0,
                y: self.cfg.defender_spawn.1,
                theta: 0.0,
            },
            step: 0,
        }
    }

    fn is_terminal(&self, state: &DubinState) -> bool {
        state.step >= self.cfg.horizon || self.captured(state) || self.in_goal(state)
    }

    fn action_counts(&self, _state: &DubinState) -> (usize, usize) {
        (3, 3)
    }

    fn action_space(&self) -> (usize, usize) {
        (3, 3)
    }

    fn transition(&self, state: &DubinState, action: JointAction) -> StepResult<DubinState> {
        let next = DubinState {
            attacker: dubin_advance(
                &state.attacker,
                self.cfg.v_attacker,
                self.turn_rate(action.a1),
                self.cfg.dt,
            ),
            defender: dubin_advance(
                &state.defender,
                self.cfg.v_defender,
                self.turn_rate(action.a2),
                self.cfg.dt,
            ),
            step: state.step + 1,
        };
        // Defender wins ties: capture is checked before the goal.
        let (reward1, terminal) = if self.captured(&next) {
            (-1.0, true)
        } else if self.in_goal(&next) {
            (1.0, true)
        } else {
            (0.0, next.step >= self.cfg.horizon)
        };
        StepResult {
            next_state: next,
            reward1,
            terminal,
        }
    }

    fn encode_state(&self, state: &DubinState) -> Vec<f64> {
        let s = self.cfg.arena_scale;
        vec![
            state.attacker.x / s,
            state.attacker.y / s,
            state.attacker.theta.cos(),
            state.attacker.theta.sin(),
            state.defender.x / s,
            state.defender.y / s,
            state.defender.theta.cos(),
            state.defender.theta.sin(),
        ]
    }

    fn encoding_len(&self) -> usize {
        8
    }

    fn max_abs_reward(&self) -> f64 {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    fn game() -> DubinTag {
        DubinTag::new(DubinConfig::default())
    }

    fn state(ax: f64, ay: f64, at: f64, dx: f64, dy: f64, dt: f64) -> DubinState {
        DubinState {
            attacker: Pose { x: ax, y: ay, theta: at },
            defender: Pose { x: dx, y: dy, theta: dt },
            step: 0,
        }
    }

    #[test]
    fn straight_line_moves_exactly() {
        let p = dubin_advance(&Pose { x: 0.0, y: 0.0, theta: 0.0 }, 1.0, 0.0, 1.0);
        assert_eq!(p.x, 1.0);
        assert_eq!(p.y, 0.0);
        assert_eq!(p.theta, 0.0);

        let q = dubin_advance(
            &Pose { x: 0.0, y: 0.0, theta: std::f64::consts::FRAC_PI_2 },
            1.0,
            0.0,
            1.0,
        );
        assert!((q.y - 1.0).abs() < 1e-15);
        assert!(q.x.abs() < 1e-15);
    }

    #[test]
    fn heading_change_equals_turn_rate_times_dt() {
        let theta0 = 0.25;
        let u = 0.7;
        let dt = 0.3;
        let p = dubin_advance(&Pose { x: 1.0, y: -2.0, theta: theta0 }, 1.0, u, dt);
        assert!((p.theta - theta0 - u * dt).abs() < 1e-15);
    }

    #[test]
    fn constant_turn_path_stays_on_circle_of_radius_v_over_u() {
        let v = 1.3;
        let u = 0.9;
        let mut pose = Pose { x: 0.4, y: 0.1, theta: 0.6 };
        let radius = v / u;
        let center = (
            pose.x - radius * pose.theta.sin(),
            pose.y + radius * pose.theta.cos(),
        );
        for _ in 0..50 {
            pose = dubin_advance(&pose, v, u, 0.11);
            let d = ((pose.x - center.0).powi(2) + (pose.y - center.1).powi(2)).sqrt();
            assert!((d - radius).abs() < 1e-6, "radius drift {}", (d - radius).abs());
        }
    }

    #[test]
    fn attacker_inside_goal_terminates_with_plus_one() {
        let g = game();
        let s = state(0.5, 0.0, 0.0, 4.0, 4.0, 0.0);
        assert!(g.is_terminal(&s), "already inside the goal disk");
        // One straight step from (1.2, 0) heading toward the origin lands at
        // (0.9, 0), inside the radius-1 goal disk.
        let s2 = state(1.2, 0.0, std::f64::consts::PI, 4.0, 4.0, 0.0);
        let r = g.step(&s2, JointAction::new(1, 1)).unwrap();
        assert_eq!(r.reward1, 1.0);
        assert!(r.terminal);
    }

    #[test]
    fn capture_beats_goal_on_ties() {
        let g = game();
        // After the step the attacker is inside the goal at (0.9, 0) and the
        // defender, diving from above, lands within capture radius of it.
        let s = state(
            1.2,
            0.0,
            std::f64::consts::PI,
            0.9,
            0.8,
            -std::f64::consts::FRAC_PI_2,
        );
        assert!(!g.is_terminal(&s));
        let r = g.step(&s, JointAction::new(1, 1)).unwrap();
        assert!(r.terminal);
        assert_eq!(r.reward1, -1.0);
    }

    #[test]
    fn horizon_bounds_episode_length() {
        let mut cfg = DubinConfig::default();
        cfg.horizon = 3;
        let g = DubinTag::new(cfg);
        let mut s = state(4.0, 0.0, std::f64::consts::FRAC_PI_2, -2.0, 0.0, std::f64::consts::FRAC_PI_2);
        let mut steps = 0;
        while !g.is_terminal(&s) {
            let r = g.step(&s, JointAction::new(1, 1)).unwrap();
            s = r.next_state;
            steps += 1;
            assert!(steps <= 3);
        }
        assert_eq!(steps, 3);
    }

    #[test]
    fn initial_states_are_nonterminal_and_reproducible() {
        let g = game();
        let s1 = g.initial_state(&mut substream(9, "env"));
        let s2 = g.initial_state(&mut substream(9, "env"));
        assert_eq!(s1, s2);
        assert!(!g.is_terminal(&s1));
    }

    #[test]
    fn encoding_has_fixed_layout() {
        let g = game();
        let s = state(3.0, -1.5, 0.0, 1.0, 2.0, std::f64::consts::FRAC_PI_2);
        let e = g.encode_state(&s);
        assert_eq!(e.len(), 8);
        assert_eq!(e[0], 0.5);
        assert_eq!(e[2], 1.0);
        assert!((e[7] - 1.0).abs() < 1e-15);
    }
}
