//! `simmax eval`: exploitability of a trained checkpoint.

use std::hash::Hash;
use std::path::Path;

use simmax::eval::{
    evaluate_policy_continuous, evaluate_policy_tabular, BrMethod, EvalError, EvalMode, EvalReport,
};
use simmax::exact::ExactError;
use simmax::game::Game;
use simmax::net::{CheckpointError, Network, Real};

use crate::config::RunConfig;
use crate::envs::{build_env, net_config, search_config, EnvInstance};
use crate::CliError;

pub fn run(cfg: &RunConfig, out_dir: &Path, checkpoint: &Path) -> Result<(), CliError> {
    match build_env(cfg)? {
        EnvInstance::Toy(game) => match cfg.net.precision.as_str() {
            "f32" => eval_tabular::<_, f32>(&game, cfg, out_dir, checkpoint),
            _ => eval_tabular::<_, f64>(&game, cfg, out_dir, checkpoint),
        },
        EnvInstance::Dubin(game) => match cfg.net.precision.as_str() {
            "f32" => eval_continuous::<_, f32>(&game, cfg, out_dir, checkpoint),
            _ => eval_continuous::<_, f64>(&game, cfg, out_dir, checkpoint),
        },
        EnvInstance::Sda(game) => match cfg.net.precision.as_str() {
            "f32" => eval_continuous::<_, f32>(&game, cfg, out_dir, checkpoint),
            _ => eval_continuous::<_, f64>(&game, cfg, out_dir, checkpoint),
        },
    }
}

fn load_net<G: Game, T: Real>(
    game: &G,
    cfg: &RunConfig,
    checkpoint: &Path,
) -> Result<Network<T>, CliError> {
    let net_cfg = net_config(game, cfg);
    Network::<T>::load_checkpoint(net_cfg, checkpoint).map_err(|e| match e {
        // Bad or mismatched checkpoint files are input errors.
        CheckpointError::BadMagic
        | CheckpointError::UnsupportedVersion(_)
        | CheckpointError::ManifestMismatch(_)
        | CheckpointError::NonFinite
        | CheckpointError::Io(_) => CliError::Validation(format!(
            "checkpoint {}: {e}",
            checkpoint.display()
        )),
    })
}

/// The best-response method for a continuous-state game: exact expectimax
/// when the full tree fits the node budget, otherwise the sampled
/// lower-bound estimate.
fn resolve_br<G: Game>(game: &G, cfg: &RunConfig) -> BrMethod {
    let (n, m) = game.action_space();
    let tree_nodes = ((n * m) as f64).powi(game.horizon() as i32);
    match cfg.eval.br.as_str() {
        "exact" => BrMethod::Exact {
            node_budget: cfg.eval.node_budget,
        },
        "sampled" => BrMethod::Sampled {
            episodes: cfg.eval.br_episodes,
            search_sims: cfg.eval.br_search_sims,
        },
        _ => {
            if tree_nodes <= cfg.eval.node_budget as f64 {
                BrMethod::Exact {
                    node_budget: cfg.eval.node_budget,
                }
            } else {
                BrMethod::Sampled {
                    episodes: cfg.eval.br_episodes,
                    search_sims: cfg.eval.br_search_sims,
                }
            }
        }
    }
}

fn map_eval_error(e: EvalError) -> CliError {
    match e {
        EvalError::BudgetExceeded { .. }
        | EvalError::Exact(ExactError::NodeBudgetExceeded { .. }) => {
            CliError::Runtime(e.to_string())
        }
        other => CliError::Runtime(other.to_string()),
    }
}

fn eval_modes(cfg: &RunConfig) -> Vec<EvalMode> {
    match cfg.eval.mode.as_str() {
        "raw" => vec![EvalMode::Raw],
        _ => cfg
            .eval
            .iters_list
            .iter()
            .map(|n| EvalMode::Mcts { n_sim: *n })
            .collect(),
    }
}

fn eval_seeds(cfg: &RunConfig) -> Vec<u64> {
    (0..cfg.eval.seeds as u64).map(|i| cfg.seed + i).collect()
}

fn eval_tabular<G, T>(
    game: &G,
    cfg: &RunConfig,
    out_dir: &Path,
    checkpoint: &Path,
) -> Result<(), CliError>
where
    G: Game,
    G::State: Hash + Eq,
    T: Real,
{
    let net = load_net::<G, T>(game, cfg, checkpoint)?;
    let search = search_config(game, cfg);
    let mut report = EvalReport::default();
    for mode in eval_modes(cfg) {
        for seed in eval_seeds(cfg) {
            let row = evaluate_policy_tabular(
                game,
                &net,
                &cfg.env.name,
                mode,
                &search,
                seed,
                cfg.eval.node_budget,
            )
            .map_err(map_eval_error)?;
            report.push(row);
        }
    }
    write_report(&report, cfg, out_dir)
}

fn eval_continuous<G, T>(
    game: &G,
    cfg: &RunConfig,
    out_dir: &Path,
    checkpoint: &Path,
) -> Result<(), CliError>
where
    G: Game,
    T: Real,
{
    let net = load_net::<G, T>(game, cfg, checkpoint)?;
    let search = search_config(game, cfg);
    let br = resolve_br(game, cfg);
    let mut report = EvalReport::default();
    for mode in eval_modes(cfg) {
        for seed in eval_seeds(cfg) {
            let row =
                evaluate_policy_continuous(game, &net, &cfg.env.name, mode, &search, seed, &br)
                    .map_err(map_eval_error)?;
            report.push(row);
        }
    }
    write_report(&report, cfg, out_dir)
}

fn write_report(report: &EvalReport, cfg: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let csv_path = out_dir.join("eval_rows.csv");
    report.write_csv(&csv_path).map_err(map_eval_error)?;
    let json_path = out_dir.join("eval_summary.json");
    report
        .write_json(
            &json_path,
            serde_json::to_value(cfg).expect("config serializes"),
        )
        .map_err(map_eval_error)?;

    for point in report.aggregate() {
        println!(
            "{} n_sim={:>5}: exploitability {:.6} ± {:.6} over {} seeds",
            point.setting,
            point.search_iters,
            point.mean_exploitability,
            point.std_exploitability,
            point.seeds
        );
    }
    println!("rows: {}", csv_path.display());
    println!("summary: {}", json_path.display());
    Ok(())
}
