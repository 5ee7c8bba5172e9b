//! Planar orbital custody game.
//!
//! An observer satellite (player 1) tries to keep line-of-sight custody of a
//! maneuvering target. Both craft fly planar two-body dynamics propagated
//! with fixed-step RK4; actions are impulsive velocity changes along the
//! prograde/retrograde and radial directions, or coast. Custody holds when
//! the target is visible: the sight line is not occluded by Earth, the
//! target is illuminated (outside the cylindrical shadow), and the look
//! direction stays outside the sensor's sun-exclusion cone.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::game::{Game, JointAction, StepResult};

#[derive(Debug, Clone)]
pub struct SdaConfig {
    /// Impulse magnitude per maneuver (km/s).
    pub dv: f64,
    /// Step duration (s).
    pub dt: f64,
    /// Gravitational parameter (km^3/s^2).
    pub mu: f64,
    /// Occluding body radius (km).
    pub earth_radius: f64,
    /// Sensor sun-exclusion half-angle (rad).
    pub sun_exclusion_half_angle: f64,
    pub horizon: usize,
    pub gamma: f64,
    /// Period of sun-direction rotation (s); 0 keeps the sun fixed.
    pub sun_rotation_period: f64,
    /// RK4 substeps per game step.
    pub rk4_substeps: usize,
    pub observer_radius: f64,
    pub target_radius: f64,
    /// Initial target phase angle range (rad), sampled uniformly.
    pub target_phase_range: (f64, f64),
    /// Initial sun direction angle (rad).
    pub sun_angle: f64,
}

impl Default for SdaConfig {
    fn default() -> Self {
        Self {
            dv: 0.01,
            dt: 60.0,
            mu: 398_600.4418,
            earth_radius: 6371.0,
            sun_exclusion_half_angle: 30f64.to_radians(),
            horizon: 24,
            gamma: 0.99,
            sun_rotation_period: 0.0,
            rk4_substeps: 8,
            observer_radius: 7000.0,
            target_radius: 7000.0,
            target_phase_range: (0.15, 0.6),
            sun_angle: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Body {
    pub pos: [f64; 2],
    pub vel: [f64; 2],
}

impl Body {
    pub fn radius(&self) -> f64 {
        norm(self.pos)
    }

    pub fn speed(&self) -> f64 {
        norm(self.vel)
    }

    /// Specific orbital energy `v²/2 - μ/r`.
    pub fn energy(&self, mu: f64) -> f64 {
        0.5 * self.speed().powi(2) - mu / self.radius()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdaState {
    pub observer: Body,
    pub target: Body,
    pub sun: [f64; 2],
    pub step: usize,
}

/// Maneuver set per player: coast plus impulses along the orbit frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Maneuver {
    Coast,
    Prograde,
    Retrograde,
    RadialOut,
    RadialIn,
}

pub const MANEUVERS: [Maneuver; 5] = [
    Maneuver::Coast,
    Maneuver::Prograde,
    Maneuver::Retrograde,
    Maneuver::RadialOut,
    Maneuver::RadialIn,
];

#[derive(Debug, Clone)]
pub struct SdaCustody {
    cfg: SdaConfig,
}

fn norm(v: [f64; 2]) -> f64 {
    (v[0] * v[0] + v[1] * v[1]).sqrt()
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn scale(v: [f64; 2], s: f64) -> [f64; 2] {
    [v[0] * s, v[1] * s]
}

fn add(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] + b[0], a[1] + b[1]]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn unit(v: [f64; 2]) -> [f64; 2] {
    let n = norm(v);
    if n == 0.0 {
        [0.0, 0.0]
    } else {
        scale(v, 1.0 / n)
    }
}

fn apply_maneuver(body: &mut Body, m: Maneuver, dv: f64) {
    let dir = match m {
        Maneuver::Coast => return,
        Maneuver::Prograde => unit(body.vel),
        Maneuver::Retrograde => scale(unit(body.vel), -1.0),
        Maneuver::RadialOut => unit(body.pos),
        Maneuver::RadialIn => scale(unit(body.pos), -1.0),
    };
    body.vel = add(body.vel, scale(dir, dv));
}

/// One fixed-step RK4 integration of the planar two-body equations.
pub fn propagate_two_body(body: &Body, mu: f64, dt: f64, substeps: usize) -> Body {
    let accel = |pos: [f64; 2]| -> [f64; 2] {
        let r = norm(pos);
        scale(pos, -mu / (r * r * r))
    };
    let h = dt / substeps.max(1) as f64;
    let mut p = body.pos;
    let mut v = body.vel;
    for _ in 0..substeps.max(1) {
        let k1p = v;
        let k1v = accel(p);
        let k2p = add(v, scale(k1v, h / 2.0));
        let k2v = accel(add(p, scale(k1p, h / 2.0)));
        let k3p = add(v, scale(k2v, h / 2.0));
        let k3v = accel(add(p, scale(k2p, h / 2.0)));
        let k4p = add(v, scale(k3v, h));
        let k4v = accel(add(p, scale(k3p, h)));
        p = add(
            p,
            scale(
                add(add(k1p, scale(add(k2p, k3p), 2.0)), k4p),
                h / 6.0,
            ),
        );
        v = add(
            v,
            scale(
                add(add(k1v, scale(add(k2v, k3v), 2.0)), k4v),
                h / 6.0,
            ),
        );
    }
    Body { pos: p, vel: v }
}

/// Target inside the cylindrical shadow: on the anti-sun side and within one
/// Earth radius of the shadow axis.
pub fn sda_eclipse(state: &SdaState, cfg: &SdaConfig) -> bool {
    let along = dot(state.target.pos, state.sun);
    if along >= 0.0 {
        return false;
    }
    let lateral = sub(state.target.pos, scale(state.sun, along));
    norm(lateral) < cfg.earth_radius
}

/// Sight line blocked by Earth: the observer-target segment passes within
/// one Earth radius of the origin with the closest point strictly between
/// the endpoints.
pub fn sda_los_occluded(state: &SdaState, cfg: &SdaConfig) -> bool {
    let o = state.observer.pos;
    let d = sub(state.target.pos, o);
    let len2 = dot(d, d);
    if len2 == 0.0 {
        return false;
    }
    let s = -dot(o, d) / len2;
    if s <= 0.0 || s >= 1.0 {
        return false;
    }
    norm(add(o, scale(d, s))) < cfg.earth_radius
}

/// Look direction within the sensor's sun-exclusion cone.
pub fn sda_sun_blinded(state: &SdaState, cfg: &SdaConfig) -> bool {
    let look = unit(sub(state.target.pos, state.observer.pos));
    let cos_angle = dot(look, state.sun).clamp(-1.0, 1.0);
    cos_angle.acos() < cfg.sun_exclusion_half_angle
}

/// Custody: unoccluded, illuminated, and outside the sun-exclusion cone.
pub fn sda_custody(state: &SdaState, cfg: &SdaConfig) -> bool {
    !sda_los_occluded(state, cfg) && !sda_eclipse(state, cfg) && !sda_sun_blinded(state, cfg)
}

impl SdaCustody {
    pub fn new(cfg: SdaConfig) -> Self {
        Self { cfg }
    }

    pub fn config(&self) -> &SdaConfig {
        &self.cfg
    }

    /// Circular-orbit period at the observer's initial radius.
    pub fn reference_period(&self) -> f64 {
        2.0 * std::f64::consts::PI * (self.cfg.observer_radius.powi(3) / self.cfg.mu).sqrt()
    }

    fn crashed(&self, body: &Body) -> bool {
        body.radius() < self.cfg.earth_radius
    }
}

impl Game for SdaCustody {
    type State = SdaState;

    fn horizon(&self) -> usize {
        self.cfg.horizon
    }

    fn discount(&self) -> f64 {
        self.cfg.gamma
    }

    fn initial_state(&self, rng: &mut ChaCha8Rng) -> SdaState {
        let (lo, hi) = self.cfg.target_phase_range;
        let phase = if hi > lo { rng.gen_range(lo..hi) } else { lo };
        let circ = |r: f64, phi: f64, mu: f64| -> Body {
            let v = (mu / r).sqrt();
            Body {
                pos: [r * phi.cos(), r * phi.sin()],
                vel: [-v * phi.sin(), v * phi.cos()],
            }
        };
        SdaState {
            observer: circ(self.cfg.observer_radius, 0.0, self.cfg.mu),
            target: circ(self.cfg.target_radius, phase, self.cfg.mu),
            sun: [self.cfg.sun_angle.cos(), self.cfg.sun_angle.sin()],
            step: 0,
        }
    }

    fn is_terminal(&self, state: &SdaState) -> bool {
        state.step >= self.cfg.horizon
            || self.crashed(&state.observer)
            || self.crashed(&state.target)
    }

    fn action_counts(&self, _state: &SdaState) -> (usize, usize) {
        (MANEUVERS.len(), MANEUVERS.len())
    }

    fn action_space(&self) -> (usize, usize) {
        (MANEUVERS.len(), MANEUVERS.len())
    }

    fn transition(&self, state: &SdaState, action: JointAction) -> StepResult<SdaState> {
        let mut observer = state.observer;
        let mut target = state.target;
        apply_maneuver(&mut observer, MANEUVERS[action.a1], self.cfg.dv);
        apply_maneuver(&mut target, MANEUVERS[action.a2], self.cfg.dv);
        observer = propagate_two_body(&observer, self.cfg.mu, self.cfg.dt, self.cfg.rk4_substeps);
        target = propagate_two_body(&target, self.cfg.mu, self.cfg.dt, self.cfg.rk4_substeps);

        let sun = if self.cfg.sun_rotation_period > 0.0 {
            let base = self.cfg.sun_angle
                + 2.0 * std::f64::consts::PI * (state.step + 1) as f64 * self.cfg.dt
                    / self.cfg.sun_rotation_period;
            [base.cos(), base.sin()]
        } else {
            state.sun
        };

        let next = SdaState {
            observer,
            target,
            sun,
            step: state.step + 1,
        };

        let obs_crash = self.crashed(&next.observer);
        let tgt_crash = self.crashed(&next.target);
        let (reward1, terminal) = if obs_crash || tgt_crash {
            // Simultaneous crashes cancel out.
            let r = match (tgt_crash, obs_crash) {
                (true, true) => 0.0,
                (true, false) => 1.0,
                (false, true) => -1.0,
                (false, false) => unreachable!(),
            };
            (r, true)
        } else {
            let r = if sda_custody(&next, &self.cfg) { 1.0 } else { 0.0 };
            (r, next.step >= self.cfg.horizon)
        };

        StepResult {
            next_state: next,
            reward1,
            terminal,
        }
    }

    fn encode_state(&self, state: &SdaState) -> Vec<f64> {
        let r0 = self.cfg.observer_radius;
        let v0 = (self.cfg.mu / r0).sqrt();
        vec![
            state.observer.pos[0] / r0,
            state.observer.pos[1] / r0,
            state.observer.vel[0] / v0,
            state.observer.vel[1] / v0,
            state.target.pos[0] / r0,
            state.target.pos[1] / r0,
            state.target.vel[0] / v0,
            state.target.vel[1] / v0,
            state.sun[0],
            state.sun[1],
        ]
    }

    fn encoding_len(&self) -> usize {
        10
    }

    fn max_abs_reward(&self) -> f64 {
        1.0
    }
}
