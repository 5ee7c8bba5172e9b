//! `simmax solve`: exact backward induction for tabular games.

use std::path::Path;

use simmax::exact::{backward_induction, ExactError};
use simmax::game::Game;
use simmax::rng::substream;

use crate::config::RunConfig;
use crate::envs::{build_env, EnvInstance};
use crate::CliError;

pub fn run(cfg: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let EnvInstance::Toy(game) = build_env(cfg)? else {
        return Err(CliError::Validation(format!(
            "env.name {:?}: tabular required for solve",
            cfg.env.name
        )));
    };

    let s0 = game.initial_state(&mut substream(cfg.seed, "solve-root"));
    let (values, policy) =
        backward_induction(&game, &s0, cfg.eval.node_budget).map_err(|e| match e {
            ExactError::NodeBudgetExceeded { .. } => CliError::Runtime(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        })?;

    let root_value = values.get(0, &s0).expect("root is solved");
    println!("root value {root_value:.6}");
    let (p1, p2) = policy.get(0, &s0).expect("root stage policy exists");
    let fmt = |probs: &[f64]| {
        probs
            .iter()
            .map(|p| format!("{p:.6}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    println!("root policy p1 [{}]", fmt(p1.probs()));
    println!("root policy p2 [{}]", fmt(p2.probs()));

    // Deterministic dump of the whole value table.
    let mut rows: Vec<(usize, String, f64)> = values
        .iter()
        .map(|((depth, state), v)| (*depth, format!("{state:?}"), *v))
        .collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let doc = serde_json::json!({
        "env": cfg.env.name,
        "gamma": cfg.env.gamma,
        "root_value": root_value,
        "states": rows
            .iter()
            .map(|(depth, state, v)| {
                serde_json::json!({ "depth": depth, "state": state, "value": v })
            })
            .collect::<Vec<_>>(),
    });
    let path = out_dir.join("value_table.json");
    std::fs::write(&path, serde_json::to_string_pretty(&doc).expect("serializable"))
        .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))?;
    println!("value table: {} ({} states)", path.display(), rows.len());
    Ok(())
}
