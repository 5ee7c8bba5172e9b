//! Environment construction from the config.

use simmax::envs::dubin::{DubinConfig, DubinTag};
use simmax::envs::sda::{SdaConfig, SdaCustody};
use simmax::envs::tabular::{make_tabular_toy, TabularToy};
use simmax::game::{value_scale, Game};
use simmax::net::{NetConfig, ValueBinning};

use crate::config::RunConfig;
use crate::CliError;

pub enum EnvInstance {
    Toy(TabularToy),
    Dubin(DubinTag),
    Sda(SdaCustody),
}


pub fn build_env(cfg: &RunConfig) -> Result<EnvInstance, CliError> {
    let name = cfg.env.name.trim();
    match name {
        "dubin" => {
            let d = &cfg.env.dubin;
            let dc = DubinConfig {
                v_attacker: d.v_attacker,
                v_defender: d.v_defender,
                u_max: d.u_max,
                dt: d.dt,
                goal_radius: d.goal_radius,
                capture_radius: d.capture_radius,
                horizon: d.horizon,
                gamma: cfg.env.gamma,
                arena_scale: d.arena_scale,
                attacker_spawn: d.attacker_spawn,
                defender_spawn: d.defender_spawn,
            };
            Ok(EnvInstance::Dubin(DubinTag::new(dc)))
        }
        "sda" => {
            let s = &cfg.env.sda;
            let sc = SdaConfig {
                dv: s.dv,
                dt: s.dt,
                mu: s.mu,
                earth_radius: s.earth_radius,
                sun_exclusion_half_angle: s.sun_exclusion_half_angle,
                horizon: s.horizon,
                gamma: cfg.env.gamma,
                sun_rotation_period: s.sun_rotation_period,
                rk4_substeps: s.rk4_substeps,
                observer_radius: s.observer_radius,
                target_radius: s.target_radius,
                target_phase_range: s.target_phase_range,
                sun_angle: s.sun_angle,
            };
            Ok(EnvInstance::Sda(SdaCustody::new(sc)))
        }
        toy => {
            let g = make_tabular_toy(toy)
                .map_err(|e| CliError::Validation(format!("env.name: {e}")))?
                .with_gamma(cfg.env.gamma);
            Ok(EnvInstance::Toy(g))
        }
    }
}

/// Network architecture for a game under this config; the value half-range
/// defaults to the discounted reward bound of the environment.
pub fn net_config<G: Game>(game: &G, cfg: &RunConfig) -> NetConfig {
    let scale = if cfg.net.value_scale > 0.0 {
        cfg.net.value_scale
    } else {
        value_scale(game.horizon(), game.discount(), game.max_abs_reward()).max(1e-6)
    };
    let (a1, a2) = game.action_space();
    NetConfig {
        input_dim: game.encoding_len(),
        trunk_widths: cfg.net.trunk_widths.clone(),
        head_hidden: cfg.net.head_hidden.clone(),
        actions1: a1,
        actions2: a2,
        binning: ValueBinning::symmetric(scale, cfg.net.value_bins),
    }
}

/// Search configuration for a game under this config.
pub fn search_config<G: Game>(game: &G, cfg: &RunConfig) -> simmax::mcts::SearchConfig {
    simmax::mcts::SearchConfig {
        n_sim: cfg.search.n_sim,
        c_puct: cfg.search.c_puct,
        rm_iters: cfg.search.rm_iters,
        root_rm_iters: cfg.search.root_rm_iters,
        gamma: game.discount(),
        horizon: if cfg.search.horizon > 0 {
            cfg.search.horizon
        } else {
            game.horizon()
        },
    }
}
