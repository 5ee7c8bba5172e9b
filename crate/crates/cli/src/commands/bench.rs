//! `simmax bench`: search and solver throughput.

use std::path::Path;
use std::time::Instant;

use simmax::game::Game;
use simmax::matgame::{regret_matching_solve, PayoffMatrix};
use simmax::mcts::{Search, UniformZeroOracle};
use simmax::rng::substream_n;

use crate::config::RunConfig;
use crate::envs::{build_env, search_config, EnvInstance};
use crate::CliError;

pub fn run(cfg: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    match build_env(cfg)? {
        EnvInstance::Toy(game) => bench_game(&game, cfg, out_dir),
        EnvInstance::Dubin(game) => bench_game(&game, cfg, out_dir),
        EnvInstance::Sda(game) => bench_game(&game, cfg, out_dir),
    }
}

fn bench_game<G: Game>(game: &G, cfg: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let search_cfg = search_config(game, cfg);
    let budget = std::time::Duration::from_millis(cfg.bench.duration_ms);

    // Deterministic structure probe: one seeded search, counted nodes.
    let s0 = game.initial_state(&mut substream_n(cfg.seed, "bench-root", 0));
    let mut probe = Search::new(game, &UniformZeroOracle, search_cfg.clone(), s0.clone());
    let probe_result = probe.run(&mut substream_n(cfg.seed, "bench-search", 0));
    let node_count = probe.nodes().len();

    // Throughput: repeated fresh searches until the time budget is spent.
    let start = Instant::now();
    let mut searches = 0u64;
    while start.elapsed() < budget {
        let mut search = Search::new(game, &UniformZeroOracle, search_cfg.clone(), s0.clone());
        search.run(&mut substream_n(cfg.seed, "bench-search", searches + 1));
        searches += 1;
    }
    let sims_per_sec = (searches * search_cfg.n_sim as u64) as f64 / start.elapsed().as_secs_f64();

    // Regret-matching throughput on a 3x3 stage game at the in-tree budget.
    let rps = PayoffMatrix::from_rows(vec![
        vec![0.0, -1.0, 1.0],
        vec![1.0, 0.0, -1.0],
        vec![-1.0, 1.0, 0.0],
    ])
    .expect("static matrix");
    let start = Instant::now();
    let mut solves = 0u64;
    let mut sink = 0.0;
    while start.elapsed() < budget {
        sink += regret_matching_solve(&rps, search_cfg.rm_iters).value;
        solves += 1;
    }
    let rm_solves_per_sec = solves as f64 / start.elapsed().as_secs_f64();

    let doc = serde_json::json!({
        "env": cfg.env.name,
        "n_sim": search_cfg.n_sim,
        "rm_iters": search_cfg.rm_iters,
        "node_count": node_count,
        "root_value": probe_result.v_root,
        "searches_timed": searches,
        "sims_per_sec": sims_per_sec,
        "rm_solves_per_sec": rm_solves_per_sec,
        "rm_value_accumulator": sink,
    });
    let path = out_dir.join("bench.json");
    std::fs::write(&path, serde_json::to_string_pretty(&doc).expect("serializable"))
        .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))?;

    println!("node_count {node_count}");
    println!("sims_per_sec {sims_per_sec:.0}");
    println!("rm_solves_per_sec {rm_solves_per_sec:.0}");
    println!("report: {}", path.display());
    Ok(())
}
