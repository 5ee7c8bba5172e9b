//! `simmax train`: the self-play loop with metrics and checkpoints.

use std::path::Path;

use simmax::eval::{evaluate_policy_tabular, EvalMode};
use simmax::game::Game;
use simmax::net::{Network, OptimizerKind, Real};
use simmax::train::{train_loop, TrainConfig, TrainError};

use crate::config::RunConfig;
use crate::envs::{build_env, net_config, search_config, EnvInstance};
use crate::CliError;

pub fn run(cfg: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    match build_env(cfg)? {
        EnvInstance::Toy(game) => {
            if cfg.train.probe_exploitability {
                match cfg.net.precision.as_str() {
                    "f32" => train_with_probe::<_, f32>(&game, cfg, out_dir),
                    _ => train_with_probe::<_, f64>(&game, cfg, out_dir),
                }
            } else {
                dispatch(&game, cfg, out_dir)
            }
        }
        EnvInstance::Dubin(game) => dispatch(&game, cfg, out_dir),
        EnvInstance::Sda(game) => dispatch(&game, cfg, out_dir),
    }
}

fn train_config<G: Game>(game: &G, cfg: &RunConfig) -> TrainConfig {
    TrainConfig {
        n_iter: cfg.train.n_iter,
        n_ep: cfg.train.n_ep,
        grad_steps: cfg.train.grad_steps,
        batch_size: cfg.train.batch_size,
        buffer_capacity: cfg.train.buffer_capacity,
        weight_decay: cfg.train.weight_decay,
        learning_rate: cfg.train.learning_rate,
        gamma: game.discount(),
        seed: cfg.seed,
        search: search_config(game, cfg),
        bootstrap_truncated: cfg.train.bootstrap_truncated,
        optimizer: if cfg.train.optimizer == "sgd" {
            OptimizerKind::Sgd
        } else {
            OptimizerKind::Adam
        },
        workers: if cfg.workers == 0 {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        } else {
            cfg.workers
        },
    }
}

fn dispatch<G: Game>(game: &G, cfg: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    match cfg.net.precision.as_str() {
        "f32" => train_generic::<G, f32>(game, cfg, out_dir, None),
        _ => train_generic::<G, f64>(game, cfg, out_dir, None),
    }
}

/// Tabular games can afford an exact exploitability probe of the raw policy
/// heads after every iteration.
fn train_with_probe<G, T>(game: &G, cfg: &RunConfig, out_dir: &Path) -> Result<(), CliError>
where
    G: Game,
    G::State: std::hash::Hash + Eq,
    T: Real,
{
    let budget = cfg.eval.node_budget;
    let seed = cfg.seed;
    let search = search_config(game, cfg);
    let probe = move |net: &Network<T>| {
        match evaluate_policy_tabular(game, net, "probe", EvalMode::Raw, &search, seed, budget) {
            Ok(row) => (
                Some(row.brv_p1),
                Some(row.brv_p2),
                Some(row.exploitability),
            ),
            Err(_) => (None, None, None),
        }
    };
    train_generic::<G, T>(game, cfg, out_dir, Some(&probe))
}

fn train_generic<G: Game, T: Real>(
    game: &G,
    cfg: &RunConfig,
    out_dir: &Path,
    probe: Option<&simmax::train::Probe<'_, T>>,
) -> Result<(), CliError> {
    let net_cfg = net_config(game, cfg);
    let train_cfg = train_config(game, cfg);
    let out = train_loop::<G, T>(game, net_cfg, &train_cfg, out_dir, probe).map_err(|e| match e {
        TrainError::InvalidConfig(m) => CliError::Validation(m),
        other => CliError::Runtime(other.to_string()),
    })?;

    let last = out.metrics.last().expect("at least one iteration");
    println!(
        "trained {} iterations in {:.1}s; final loss {:.6} (policy {:.6}, value {:.6})",
        out.metrics.len(),
        last.wall_seconds,
        last.total_loss,
        last.mean_policy_loss,
        last.mean_value_loss
    );
    if let Some(e) = last.exploitability {
        println!("final probe exploitability {e:.6}");
    }
    println!(
        "metrics: {}",
        out_dir.join("metrics.csv").display()
    );
    println!(
        "last checkpoint: {}",
        out.checkpoint_paths
            .last()
            .expect("one checkpoint per iteration")
            .display()
    );
    Ok(())
}
